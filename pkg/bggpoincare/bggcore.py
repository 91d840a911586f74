"""
BGG diagram machinery.

A ``DiagramSpec`` stacks rows of vector-valued de Rham complexes and connects
row j to row j-1 by the algebraic operator S(u) = sum_a dx_a ^ A_a u built
from constant generators A_a, or given by its matrices directly. Everything algebraic (S, its pseudo-inverse T,
the projection onto the BGG fiber) acts on the fiber labels (row, I, a) and
leaves polynomial coefficients untouched; the differential parts act through
module ``derham``.

Matrix proxies are read row-wise: value index first, form component second.
"""

import logging
from fractions import Fraction
from functools import lru_cache

from .derham import (PoincareFamily, curl, exterior_d, koszul_poincare,
                     proxy_operator, wedge_sign)
from .forms import (PolyForm, ValueMap, apply_value_map, form_index_sets,
                    form_to_proxy, polyform_from_json, polyform_to_json,
                    proxy_map, proxy_to_form, value_space)
from .linear import LinearOp, pseudo_inverse
from .ratpoly import Poly, format_rational, monomial_basis, parse_rational
from .schemas import ElementModel, IdentityReport

logger = logging.getLogger(__name__)

ORTHONORMAL_ROWS = ("R", "V", "M")

# BGG operators of the builtin diagrams, degree by degree
PROXY_SEQUENCES = {
    "hessian": ("hess", "curl", "div"),
    "elasticity": ("def", "inc", "div"),
    "divdiv": ("devgrad", "symcurl", "divdiv"),
}


def _levi_civita(a, b, c):
    return (a - b) * (b - c) * (c - a) // 2


class DiagramSpec:
    """
    Rows of value spaces and the algebraic operator S linking consecutive rows.

    S is given either by generators, S u = sum_a dx_a ^ A_a u, or directly by
    its matrices on fiber labels.

    Args:
        name: Diagram name
        n: Ambient dimension
        rows: Value-space tags, one per row (row 0 first)
        generators: For each j >= 1, a list of n ValueMaps A_a: V_j -> V_{j-1}
        s_matrices: For each degree i < n, the dense matrix of S: Y^i -> Y^(i+1)
            with rows and columns ordered as ``fiber_labels``
    """

    def __init__(self, name, n, rows, generators=None, s_matrices=None):
        self.name = name
        self.n = n
        self.values = tuple(value_space(tag, n) for tag in rows)
        for space in self.values:
            if space.tag not in ORTHONORMAL_ROWS:
                raise ValueError(f"Diagram rows must be one of {ORTHONORMAL_ROWS}, got {space.tag}")
        if (generators is None) == (s_matrices is None):
            raise ValueError("Give either generators or S matrices")
        self._fiber_cache = {}
        self.generators = None
        if generators is not None:
            self._set_generators(generators)
        else:
            self._set_s_matrices(s_matrices)

        for i in range(n):
            if not (self.s_fiber(i + 1) @ self.s_fiber(i)).is_zero():
                raise ValueError(f"S.S != 0 in degree {i}")

    def _set_generators(self, generators):
        if len(generators) != self.height - 1:
            raise ValueError("Need one generator family per pair of consecutive rows")
        for j, family in enumerate(generators, start=1):
            if len(family) != self.n:
                raise ValueError(f"Row transition {j} needs {self.n} generators, got {len(family)}")
            for vmap in family:
                if vmap.source != self.values[j] or vmap.target != self.values[j - 1]:
                    raise ValueError(f"Generator for row {j} has the wrong value spaces")
        self.generators = tuple(tuple(family) for family in generators)

    def _set_s_matrices(self, s_matrices):
        if len(s_matrices) != self.n:
            raise ValueError(f"Need {self.n} S matrices (degrees 0..{self.n - 1}), got {len(s_matrices)}")
        for i, matrix in enumerate(s_matrices):
            rows, cols = self.fiber_labels(i + 1), self.fiber_labels(i)
            if len(matrix) != len(rows) or any(len(line) != len(cols) for line in matrix):
                raise ValueError(f"S matrix of degree {i} must be {len(rows)}x{len(cols)}")
            op = LinearOp.from_dense(matrix, rows, cols)
            for a, b in op.entries:
                if rows[a][0] != cols[b][0] - 1:
                    raise ValueError(f"S of degree {i} must map row j to row j-1")
            self._fiber_cache[("S", i)] = op

        # constant S anticommutes with d as soon as it does on linear monomials
        for i in range(self.n):
            for u in twisted_basis(self, i, 1):
                if plain_d(s_apply(u)).to_twisted() + s_apply(plain_d(u)):
                    raise ValueError(f"d.S + S.d != 0 in degree {i}")

    def __repr__(self):
        return f"DiagramSpec({self.name}, n={self.n}, rows={[v.tag for v in self.values]})"

    @property
    def height(self):
        return len(self.values)

    def slot(self, i, j):
        """Value space of slot (i, j); the form degree is i"""
        if not 0 <= j < self.height:
            raise ValueError(f"Row {j} outside diagram {self.name}")
        return self.values[j]

    # Fiber-level operators

    def fiber_labels(self, i):
        return tuple(
            (j, index, a)
            for j, space in enumerate(self.values)
            for index in form_index_sets(self.n, i)
            for a in range(space.dim)
        )

    def _cached(self, key, build):
        if key not in self._fiber_cache:
            self._fiber_cache[key] = build()
        return self._fiber_cache[key]

    def s_fiber(self, i):
        """S: Y^i -> Y^(i+1) on fiber labels"""
        def build():
            if self.generators is None:
                # explicit matrices cover every degree below n
                return LinearOp(self.fiber_labels(i + 1), self.fiber_labels(i))
            entries = {}
            for j, index, a in self.fiber_labels(i):
                if j == 0:
                    continue
                for b, generator in enumerate(self.generators[j - 1]):
                    if b in index:
                        continue
                    target_index = tuple(sorted(index + (b,)))
                    sign = wedge_sign(index, b)
                    for c, value in generator.matrix.column(a).items():
                        key = ((j - 1, target_index, c), (j, index, a))
                        entries[key] = entries.get(key, 0) + sign * value
            return LinearOp.from_labels(self.fiber_labels(i + 1), self.fiber_labels(i), entries)

        return self._cached(("S", i), build)

    def t_fiber(self, i):
        """T = S^+ : Y^i -> Y^(i-1)"""
        return self._cached(("T", i), lambda: pseudo_inverse(self.s_fiber(i - 1)))

    def pi_fiber(self, i):
        """Orthogonal projection onto ker S ^ ran(S)^perp"""
        def build():
            labels = self.fiber_labels(i)
            projector = LinearOp.identity(labels) - self.t_fiber(i + 1) @ self.s_fiber(i)
            if i >= 1:
                projector = projector - self.s_fiber(i - 1) @ self.t_fiber(i)
            return projector

        return self._cached(("Pi", i), build)

    def upsilon_fiber_basis(self, i):
        return self._cached(("Ubasis", i), lambda: self.pi_fiber(i).image())

    def upsilon_rows(self, i):
        return sorted({label[0] for vector in self.upsilon_fiber_basis(i) for label in vector})

    def upsilon_row(self, i):
        """The single row carrying the BGG fiber in degree i"""
        rows = self.upsilon_rows(i)
        if len(rows) != 1:
            raise ValueError(f"BGG fiber of {self.name} in degree {i} spans rows {rows}")
        return rows[0]


def _generator_maps(source_tag, target_tag, n, matrices, name):
    source = value_space(source_tag, n)
    target = value_space(target_tag, n)
    return [
        ValueMap(source, target, LinearOp.from_dense(matrix), f"{name}_{a + 1}")
        for a, matrix in enumerate(matrices)
    ]


@lru_cache(maxsize=None)
def builtin_diagram(name):
    """hessian, elasticity, divdiv (n = 3) and the one-dimensional line diagram"""
    if name == "hessian":
        matrices = [[[int(a == b) for b in range(3)]] for a in range(3)]
        return DiagramSpec(name, 3, ("R", "V"), [_generator_maps("V", "R", 3, matrices, "A")])
    if name == "elasticity":
        matrices = [
            [[_levi_civita(a, b, c) for c in range(3)] for b in range(3)] for a in range(3)
        ]
        return DiagramSpec(name, 3, ("V", "V"), [_generator_maps("V", "V", 3, matrices, "A")])
    if name == "divdiv":
        matrices = [[[int(a == b)] for b in range(3)] for a in range(3)]
        return DiagramSpec(name, 3, ("V", "R"), [_generator_maps("R", "V", 3, matrices, "A")])
    if name == "line":
        return DiagramSpec(name, 1, ("R", "R"), [_generator_maps("R", "R", 1, [[[1]]], "A")])
    raise ValueError(f"Unknown diagram: {name}")


BUILTIN_DIAGRAMS = ("hessian", "elasticity", "divdiv", "line")


def diagram_from_json(data):
    """
    Named builtin (a string or {"name": ...}), or explicit rows with either
    generator matrices ("generators") or the S matrices per degree ("S").
    """
    if isinstance(data, str):
        return builtin_diagram(data)
    if "rows" not in data:
        return builtin_diagram(data["name"])
    n = data["n"]
    rows = data["rows"]
    name = data.get("name", "custom")
    if "S" in data:
        if "generators" in data:
            raise ValueError("Give either generators or S matrices, not both")
        matrices = [[[parse_rational(x) for x in line] for line in matrix] for matrix in data["S"]]
        return DiagramSpec(name, n, rows, s_matrices=matrices)
    generators = []
    for j, family in enumerate(data["generators"], start=1):
        matrices = [[[parse_rational(x) for x in row] for row in matrix] for matrix in family]
        generators.append(_generator_maps(rows[j], rows[j - 1], n, matrices, "A"))
    return DiagramSpec(name, n, rows, generators)


def diagram_to_json(diagram):
    """Explicit form: rows plus the dense S matrix of every degree below n"""
    return {
        "name": diagram.name,
        "n": diagram.n,
        "rows": [space.tag for space in diagram.values],
        "S": [
            [[format_rational(x) for x in line] for line in diagram.s_fiber(i).to_dense()]
            for i in range(diagram.n)
        ],
    }


# Elements


class TwistedElement:
    """Element of Y^i: one PolyForm of degree i per diagram row."""

    def __init__(self, diagram, degree, components):
        components = tuple(components)
        if len(components) != diagram.height:
            raise ValueError(f"Expected {diagram.height} components, got {len(components)}")
        for j, form in enumerate(components):
            if form.n != diagram.n or form.k != degree or form.value != diagram.values[j]:
                raise ValueError(
                    f"Component {j} must be a {degree}-form valued in {diagram.values[j].tag}"
                )
        self.diagram = diagram
        self.degree = degree
        self.components = components

    @classmethod
    def zero(cls, diagram, degree):
        return cls(diagram, degree, [PolyForm(diagram.n, degree, v) for v in diagram.values])

    @classmethod
    def from_fibers(cls, diagram, degree, fibers):
        coeffs = [dict() for _ in diagram.values]
        for (j, index, a), poly in fibers.items():
            coeffs[j][(index, a)] = poly
        return cls(
            diagram, degree,
            [PolyForm(diagram.n, degree, v, c) for v, c in zip(diagram.values, coeffs)],
        )

    @classmethod
    def from_row(cls, diagram, row, form):
        components = [PolyForm(diagram.n, form.k, v) for v in diagram.values]
        components[row] = form
        return cls(diagram, form.k, components)

    def fibers(self):
        return {
            (j, index, a): poly
            for j, form in enumerate(self.components)
            for (index, a), poly in form.coeffs.items()
        }

    def _same_space(self, other):
        if self.diagram is not other.diagram or self.degree != other.degree:
            raise ValueError("Elements live in different spaces")

    def __add__(self, other):
        if not isinstance(other, TwistedElement):
            return NotImplemented
        self._same_space(other)
        return TwistedElement(
            self.diagram, self.degree, [a + b for a, b in zip(self.components, other.components)]
        )

    def __neg__(self):
        return TwistedElement(self.diagram, self.degree, [-c for c in self.components])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        return TwistedElement(self.diagram, self.degree, [c * scalar for c in self.components])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TwistedElement):
            return NotImplemented
        return (
            self.diagram is other.diagram
            and self.degree == other.degree
            and self.components == other.components
        )

    __hash__ = None

    def __bool__(self):
        return any(self.components)

    def __repr__(self):
        return f"{type(self).__name__}({self.diagram.name}, degree={self.degree})"

    def map_rows(self, fn, degree=None):
        """Apply a form operator row by row"""
        components = [fn(form) for form in self.components]
        return TwistedElement(self.diagram, components[0].k if degree is None else degree, components)

    def to_twisted(self):
        return TwistedElement(self.diagram, self.degree, self.components)


class BGGElement(TwistedElement):
    """Element of the BGG fiber: S u = 0 and u orthogonal to ran S."""

    def __init__(self, diagram, degree, components):
        super().__init__(diagram, degree, components)
        fibers = self.fibers()
        residual = diagram.s_fiber(degree).apply(fibers)
        if degree >= 1:
            residual.update(diagram.t_fiber(degree).apply(fibers))
        if residual:
            raise ValueError(f"Element does not lie in the BGG fiber of degree {degree}")

    @classmethod
    def of(cls, u):
        return cls(u.diagram, u.degree, u.components)

    def __add__(self, other):
        result = super().__add__(other)
        return BGGElement.of(result) if isinstance(other, BGGElement) else result

    def __neg__(self):
        return BGGElement.of(super().__neg__())

    def __mul__(self, scalar):
        result = super().__mul__(scalar)
        return result if result is NotImplemented else BGGElement.of(result)

    __rmul__ = __mul__


def _fiber_map(u, op, degree):
    return TwistedElement.from_fibers(u.diagram, degree, op.apply(u.fibers()))


def _nilpotency_bound(diagram):
    return diagram.height - 1


# Algebraic operators


def s_apply(u):
    """S: Y^i -> Y^(i+1)"""
    if u.degree > u.diagram.n:
        raise ValueError(f"S undefined in degree {u.degree}")
    return _fiber_map(u, u.diagram.s_fiber(u.degree), u.degree + 1)


def t_apply(u):
    """T = S^+ : Y^i -> Y^(i-1)"""
    if u.degree < 1:
        raise ValueError("T needs degree >= 1")
    return _fiber_map(u, u.diagram.t_fiber(u.degree), u.degree - 1)


def proj_upsilon(u):
    """I - S T - T S"""
    return BGGElement.of(_fiber_map(u, u.diagram.pi_fiber(u.degree), u.degree))


# Twisted complex


def plain_d(u):
    return u.map_rows(exterior_d, u.degree + 1)


def plain_p(u, p=koszul_poincare):
    if u.degree < 1:
        raise ValueError("Poincare operator needs degree >= 1")
    return u.map_rows(p, u.degree - 1)


def twisted_d(u):
    """d_V = d - S"""
    return plain_d(u).to_twisted() - s_apply(u)


def f_iso(u, direction="forward", p=koszul_poincare):
    """
    F = (I - PS)^-1 = sum_l (PS)^l (forward) or I - PS (inverse).

    PS moves every component one row down, so the series stops after
    height - 1 terms.
    """
    u = u.to_twisted()
    if u.degree > u.diagram.n:
        return u
    if direction == "inverse":
        return u - plain_p(s_apply(u), p)
    if direction != "forward":
        raise ValueError(f"Unknown direction: {direction}")
    total = u
    term = u
    for _ in range(_nilpotency_bound(u.diagram)):
        term = plain_p(s_apply(term), p)
        total = total + term
    return total


def twisted_poincare(u, p=koszul_poincare):
    """P_V^i = F^(i-1) P^i (F^i)^-1"""
    if u.degree < 1:
        raise ValueError("Twisted Poincare operator needs degree >= 1")
    return f_iso(plain_p(f_iso(u, "inverse", p), p), "forward", p)


# BGG complex


def g_apply(u):
    """G^i = -sum_k (T d)^k T"""
    if u.degree < 1:
        raise ValueError("G needs degree >= 1")
    term = t_apply(u)
    total = term
    for _ in range(_nilpotency_bound(u.diagram)):
        term = t_apply(plain_d(term))
        total = total + term
    return -total


def a_apply(u):
    """A^i = I - G^(i+1) d_V^i; the identity from degree n on, where Y^(i+1) is zero"""
    u = u.to_twisted()
    if u.degree >= u.diagram.n:
        return u
    dv = twisted_d(u)
    if not dv:
        return u
    return u - g_apply(dv)


def b_apply(u):
    """B^i = Pi (I - d_V^(i-1) G^i)"""
    u = u.to_twisted()
    if u.degree >= 1:
        u = u - twisted_d(g_apply(u))
    return proj_upsilon(u)


def bgg_maps(u, which):
    if which == "A":
        return a_apply(u)
    if which == "B":
        return b_apply(u)
    raise ValueError(f"Unknown BGG map: {which}")


def bgg_d(u):
    """D^i = Pi d_V A"""
    return proj_upsilon(twisted_d(a_apply(u)))


def bgg_poincare(u, p=koszul_poincare):
    """P^i = B^(i-1) P_V^i A^i"""
    if u.degree < 1:
        raise ValueError("BGG Poincare operator needs degree >= 1")
    return b_apply(twisted_poincare(a_apply(u), p))


def twisted_family():
    return PoincareFamily(d=twisted_d, p=twisted_poincare, name="twisted", degree_of=lambda u: u.degree)


def bgg_family():
    return PoincareFamily(d=bgg_d, p=bgg_poincare, name="bgg", degree_of=lambda u: u.degree)


def complexify(family, samples=()):
    """
    P~^i = P^i - D^(i-2) P^(i-1) P^i, which squares to zero.

    ``samples`` are checked against DP + PD = I first; a failure raises.
    """
    for u in samples:
        if family.degree_of(u) < 1:
            continue
        du = family.d(u)
        lhs = family.d(family.p(u))
        if du:
            lhs = lhs + family.p(du)
        if lhs != u:
            raise ValueError(f"{family.name} violates DP + PD = I on a sample")

    def p_tilde(u):
        pu = family.p(u)
        if family.degree_of(u) < 2:
            return pu
        return pu - family.d(family.p(pu))

    return PoincareFamily(d=family.d, p=p_tilde, name=f"{family.name}~", degree_of=family.degree_of)


# Proxies and bases


def element_from_proxy(diagram, degree, field):
    """Place a proxy field in the row carrying the BGG fiber"""
    row = diagram.upsilon_row(degree)
    form = proxy_to_form(field, diagram.n, degree, diagram.values[row])
    return BGGElement.of(TwistedElement.from_row(diagram, row, form))


def element_to_proxy(u):
    return form_to_proxy(u.components[u.diagram.upsilon_row(u.degree)])


def twisted_from_proxies(diagram, degree, fields):
    """TwistedElement from one proxy field per row"""
    components = [
        proxy_to_form(field, diagram.n, degree, space)
        for field, space in zip(fields, diagram.values)
    ]
    return TwistedElement(diagram, degree, components)


def twisted_to_proxies(u):
    return tuple(form_to_proxy(form) for form in u.components)


def twisted_basis(diagram, degree, r):
    """Fiber labels of Y^degree tensored with monomials of degree <= r"""
    return [
        TwistedElement.from_fibers(diagram, degree, {label: Poly.monomial(m)})
        for label in diagram.fiber_labels(degree)
        for m in monomial_basis(diagram.n, r)
    ]


def upsilon_basis(diagram, degree, r, mode="up_to"):
    """BGG fiber basis of degree ``degree`` tensored with monomials"""
    basis = []
    for vector in diagram.upsilon_fiber_basis(degree):
        for m in monomial_basis(diagram.n, r, mode):
            poly = Poly.monomial(m)
            basis.append(
                BGGElement.of(
                    TwistedElement.from_fibers(diagram, degree, {l: poly * c for l, c in vector.items()})
                )
            )
    return basis


def element_labels(u):
    """Expansion of an element as (row, I, a, monomial) -> coefficient"""
    return {
        (j, index, a, m): c
        for (j, index, a), poly in u.fibers().items()
        for m, c in poly.terms.items()
    }


def operator_matrix(op, basis, rows=None):
    """Matrix of an element operator on a basis; rows labelled (row, I, a, monomial)"""
    columns = [element_labels(op(u)) for u in basis]
    if rows is None:
        rows = sorted({label for column in columns for label in column})
    return LinearOp.from_columns(rows, columns)


def element_to_json(u):
    return {
        "diagram": u.diagram.name,
        "degree": u.degree,
        "components": [polyform_to_json(form) for form in u.components],
    }


def element_from_json(data, diagram=None):
    model = ElementModel.model_validate(data)
    diagram = diagram or builtin_diagram(model.diagram)
    components = [polyform_from_json(c.model_dump()) for c in model.components]
    return TwistedElement(diagram, model.degree, components)


def twisted_proxy_poincare_first(u, w):
    """
    First twisted Poincare operator of the elasticity diagram in proxies.

    (u, w) are matrix fields (row-wise vector-valued 1-forms); returns the pair
    of vector fields (Pu + P(mskw(Pw)), Pw).
    """
    def p_matrix(field):
        return form_to_proxy(koszul_poincare(proxy_to_form(field, 3, 1, "V")))

    pw = p_matrix(w)
    twist = p_matrix(apply_value_map(proxy_map("mskw", 3), pw))
    pu = p_matrix(u)
    return tuple(a + b for a, b in zip(pu, twist)), pw


# Checks


def _first_failure(report, identity, element):
    logger.warning(f"Counterexample to {identity} in {report.scope}")
    report.passed = False
    report.counterexample = element_to_json(element)


def _run_check(report, elements, residual_fn):
    checked = 0
    for u in elements:
        checked += 1
        if residual_fn(u):
            _first_failure(report, report.identity, u)
            break
    report.checked = checked
    return report


def _homotopy_residual(d, p, degree):
    if degree >= 1:
        def residual(u):
            du = d(u)
            lhs = d(p(u))
            if du.degree <= u.diagram.n and du:
                lhs = lhs + p(du)
            return lhs - u
    else:
        def residual(u):
            du = d(u)
            return d(p(du)) - du if du else du
    return residual


def check_diagram(diagram, r_max):
    """dS = -Sd and S.S = 0 on every monomial element up to degree r_max"""
    reports = []
    for i in range(diagram.n):
        report = IdentityReport(identity="d.S + S.d = 0", scope=f"diagram {diagram.name}", degree=i)
        _run_check(
            report,
            twisted_basis(diagram, i, r_max),
            lambda u: plain_d(s_apply(u)).to_twisted() + s_apply(plain_d(u)),
        )
        reports.append(report)
        report = IdentityReport(identity="S.S = 0", scope=f"diagram {diagram.name}", degree=i)
        _run_check(report, twisted_basis(diagram, i, 0), lambda u: s_apply(s_apply(u)))
        reports.append(report)
    return reports


def homotopy_check_twisted(diagram, degree, r_max):
    """d_V P_V + P_V d_V = I (degree >= 1) or d_V P_V d_V = d_V (degree 0)"""
    identity = "dV.PV + PV.dV = I" if degree >= 1 else "dV.PV.dV = dV"
    report = IdentityReport(identity=identity, scope=f"twisted {diagram.name}", degree=degree)
    logger.info(f"Checking {identity} on {diagram.name}, degree {degree}, r_max={r_max}")
    return _run_check(
        report, twisted_basis(diagram, degree, r_max),
        _homotopy_residual(twisted_d, twisted_poincare, degree),
    )


def check_twisted_lemma(diagram, degree, r_max):
    """d (I - PS) = (I - PS) d_V"""
    report = IdentityReport(identity="d.(I-PS) = (I-PS).dV", scope=f"twisted {diagram.name}", degree=degree)
    return _run_check(
        report, twisted_basis(diagram, degree, r_max),
        lambda u: plain_d(f_iso(u, "inverse")).to_twisted() - f_iso(twisted_d(u), "inverse"),
    )


def homotopy_check_bgg(diagram, degree, r_max):
    """D P + P D = I (degree >= 1) or D P D = D (degree 0) on the BGG fiber basis"""
    family = bgg_family()
    identity = "D.P + P.D = I" if degree >= 1 else "D.P.D = D"
    report = IdentityReport(identity=identity, scope=f"bgg {diagram.name} ({family.name})", degree=degree)
    logger.info(f"Checking {identity} on {diagram.name}, degree {degree}, r_max={r_max}")
    return _run_check(
        report, upsilon_basis(diagram, degree, r_max),
        _homotopy_residual(family.d, family.p, degree),
    )


def check_cochain_maps(diagram, degree, r_max):
    """B A = I, A D = d_V A, D B = B d_V"""
    scope = f"bgg {diagram.name}"
    upsilon = upsilon_basis(diagram, degree, r_max)
    reports = [
        _run_check(
            IdentityReport(identity="B.A = I", scope=scope, degree=degree),
            upsilon, lambda u: bgg_maps(bgg_maps(u, "A"), "B") - u,
        ),
        _run_check(
            IdentityReport(identity="A.D = dV.A", scope=scope, degree=degree),
            upsilon, lambda u: bgg_maps(bgg_d(u), "A") - twisted_d(bgg_maps(u, "A")),
        ),
    ]
    if degree < diagram.n:
        reports.append(_run_check(
            IdentityReport(identity="D.B = B.dV", scope=scope, degree=degree),
            twisted_basis(diagram, degree, r_max),
            lambda u: bgg_d(b_apply(u)).to_twisted() - b_apply(twisted_d(u)).to_twisted(),
        ))
    return reports


def check_proxy_agreement(diagram, r_max):
    """BGG differentials against the classical proxy operators"""
    reports = []
    names = PROXY_SEQUENCES.get(diagram.name)
    for degree in range(diagram.n):
        if names is None:
            # line diagram: D = second derivative
            identity = "D = d^2/dx^2"

            def expected(u):
                return partial_second(element_to_proxy(u))
        else:
            identity = f"D = {names[degree]}"

            def expected(u, name=names[degree]):
                return proxy_operator(name, element_to_proxy(u))
        report = IdentityReport(identity=identity, scope=f"bgg {diagram.name}", degree=degree)
        reports.append(_run_check(
            report, upsilon_basis(diagram, degree, r_max),
            lambda u: element_to_proxy(bgg_d(u)) != expected(u),
        ))
    return reports


def partial_second(poly):
    return poly.derivative(0).derivative(0)


def _cross(x, v):
    return (x[1] * v[2] - x[2] * v[1], x[2] * v[0] - x[0] * v[2], x[0] * v[1] - x[1] * v[0])


def cesaro_volterra_expected(w):
    """w - w(0) + 1/2 x ^ (curl w)(0)"""
    x = [Poly.variable(3, axis) for axis in range(3)]
    rotation = [Poly.constant(3, c.constant_term()) for c in curl(w)]
    twist = _cross(x, rotation)
    return tuple(
        wi - Poly.constant(3, wi.constant_term()) + ti * Fraction(1, 2)
        for wi, ti in zip(w, twist)
    )


def check_cesaro_volterra(r_max):
    """P^1(def w) = w - w(0) + 1/2 x ^ (curl w)(0) on monomial vector fields"""
    diagram = builtin_diagram("elasticity")
    report = IdentityReport(
        identity="P1(def w) = w - w(0) + 1/2 x^(curl w)(0)", scope="bgg elasticity", degree=1
    )
    elements = upsilon_basis(diagram, 0, r_max)

    def residual(u):
        w = element_to_proxy(u)
        strain = element_from_proxy(diagram, 1, proxy_operator("def", w))
        return element_to_proxy(bgg_poincare(strain)) != cesaro_volterra_expected(w)

    return _run_check(report, elements, residual)


def check_twisted_proxies(r_max):
    """Proxy form of the first elasticity twisted Poincare operator"""
    diagram = builtin_diagram("elasticity")
    report = IdentityReport(
        identity="PV1(u, w) = (Pu + P(mskw(Pw)), Pw)", scope="twisted elasticity", degree=1
    )

    def residual(u):
        fields = twisted_to_proxies(u)
        return twisted_to_proxies(twisted_poincare(u)) != twisted_proxy_poincare_first(*fields)

    return _run_check(report, twisted_basis(diagram, 1, r_max), residual)


def check_complexified(diagram, degree, r_max, twisted=False):
    """
    P~.P~ = 0 and the homotopy identity for the complexified BGG family, or
    the twisted family with ``twisted``.

    The input family is sampled on the linear monomial basis before the
    modification.
    """
    if twisted:
        family, basis_of, label = twisted_family(), twisted_basis, "twisted"
    else:
        family, basis_of, label = bgg_family(), upsilon_basis, "bgg"
    family = complexify(family, samples=basis_of(diagram, degree, min(r_max, 1)))
    scope = f"{label} {diagram.name} (complexified)"
    basis = basis_of(diagram, degree, r_max)
    identity = "D.P~ + P~.D = I" if degree >= 1 else "D.P~.D = D"
    reports = [_run_check(
        IdentityReport(identity=identity, scope=scope, degree=degree),
        basis, _homotopy_residual(family.d, family.p, degree),
    )]
    if degree >= 2:
        reports.append(_run_check(
            IdentityReport(identity="P~.P~ = 0", scope=scope, degree=degree),
            basis, lambda u: family.p(family.p(u)),
        ))
    return reports


# Suites keyed by diagram name, so jobs pickle cheaply


def twisted_suite(name, degree, r_max):
    diagram = builtin_diagram(name)
    reports = [
        homotopy_check_twisted(diagram, degree, r_max),
        check_twisted_lemma(diagram, degree, r_max),
    ]
    reports.extend(check_complexified(diagram, degree, r_max, twisted=True))
    if degree == 0:
        reports.extend(check_diagram(diagram, r_max))
    if name == "elasticity" and degree == 1:
        reports.append(check_twisted_proxies(r_max))
    return reports


def bgg_suite(name, degree, r_max):
    diagram = builtin_diagram(name)
    reports = [homotopy_check_bgg(diagram, degree, r_max)]
    reports.extend(check_cochain_maps(diagram, degree, r_max))
    reports.extend(check_complexified(diagram, degree, r_max))
    if degree == 0:
        reports.extend(check_proxy_agreement(diagram, r_max))
    if name == "elasticity" and degree == 1:
        reports.append(check_cesaro_volterra(r_max))
    return reports
