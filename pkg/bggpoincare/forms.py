"""
Value spaces, polynomial differential forms and algebraic proxy maps.

A ``PolyForm`` is an alternating k-form in n variables whose coefficients are
polynomials valued in a ``ValueSpace`` (scalars, vectors or one of the matrix
subspaces). Form index sets are stored 0-based and strictly increasing; in JSON
they are written 1-based.
"""

import itertools
import logging
from fractions import Fraction
from functools import lru_cache

from .linear import LinearOp, pseudo_inverse
from .ratpoly import Poly, format_rational, parse_rational, poly_arith, random_poly
from .schemas import PolyFormModel

logger = logging.getLogger(__name__)

MATRIX_TAGS = ("M", "S", "K", "T", "ST")


def _unit(size, index):
    vector = [Fraction(0)] * size
    vector[index] = Fraction(1)
    return vector


def _matrix_basis(tag, n):
    def entry(i, j):
        return i * n + j

    size = n * n
    basis = []
    if tag == "M":
        basis = [_unit(size, k) for k in range(size)]
    elif tag == "S":
        basis = [_unit(size, entry(i, i)) for i in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            vector = _unit(size, entry(i, j))
            vector[entry(j, i)] = Fraction(1)
            basis.append(vector)
    elif tag == "K":
        for i, j in itertools.combinations(range(n), 2):
            vector = _unit(size, entry(i, j))
            vector[entry(j, i)] = Fraction(-1)
            basis.append(vector)
    elif tag in ("T", "ST"):
        if tag == "T":
            basis = [_unit(size, entry(i, j)) for i in range(n) for j in range(n) if i != j]
        else:
            for i, j in itertools.combinations(range(n), 2):
                vector = _unit(size, entry(i, j))
                vector[entry(j, i)] = Fraction(1)
                basis.append(vector)
        for i in range(n - 1):
            vector = _unit(size, entry(i, i))
            vector[entry(n - 1, n - 1)] = Fraction(-1)
            basis.append(vector)
    return basis


class ValueSpace:
    """
    Coefficient target of a form: R, V, or a matrix subspace M, S, K, T, ST.

    Elements are described by coordinates in a fixed basis of ambient
    vectors; matrices are flattened row-major.
    """

    def __init__(self, tag, n):
        if n < 1:
            raise ValueError(f"Dimension must be >= 1, got {n}")
        self.tag = tag
        self.n = n
        if tag == "R":
            self.ambient = "scalar"
            self.ambient_dim = 1
            basis = [[Fraction(1)]]
        elif tag == "V":
            self.ambient = "vector"
            self.ambient_dim = n
            basis = [_unit(n, i) for i in range(n)]
        elif tag in MATRIX_TAGS:
            self.ambient = "matrix"
            self.ambient_dim = n * n
            basis = _matrix_basis(tag, n)
        else:
            raise ValueError(f"Unknown value space: {tag}")
        self.basis = tuple(tuple(vector) for vector in basis)
        self.embedding = LinearOp(
            range(self.ambient_dim),
            range(len(self.basis)),
            {(e, a): v for a, vector in enumerate(self.basis) for e, v in enumerate(vector) if v},
        )
        self.coordinates_op = pseudo_inverse(self.embedding)

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, ValueSpace):
            return NotImplemented
        return (self.tag, self.n) == (other.tag, other.n)

    def __hash__(self):
        return hash((self.tag, self.n))

    def __repr__(self):
        return f"ValueSpace({self.tag}, n={self.n})"

    def embed(self, coords):
        """Coordinates (dict a -> value) to an ambient vector (dict e -> value)"""
        return self.embedding.apply(coords)

    def coordinates(self, ambient):
        """Ambient vector (dict e -> value) to coordinates; rejects non-members"""
        coords = self.coordinates_op.apply(ambient)
        cleaned = {e: v for e, v in ambient.items() if v}
        if self.embed(coords) != cleaned:
            raise ValueError(f"Value does not lie in {self.tag}")
        return coords


@lru_cache(maxsize=None)
def value_space(tag, n):
    """Cached ValueSpace lookup"""
    return ValueSpace(tag, n)


def _as_space(value, n):
    if isinstance(value, ValueSpace):
        if value.n != n:
            raise ValueError(f"Value space dimension {value.n} does not match form dimension {n}")
        return value
    return value_space(value, n)


class PolyForm:
    """Alternating k-form with polynomial coefficients in a value space."""

    __slots__ = ("n", "k", "value", "coeffs")

    def __init__(self, n, k, value, coeffs=None):
        if not 0 <= k <= n + 1:
            raise ValueError(f"Form degree {k} outside 0..{n + 1}")
        value = _as_space(value, n)
        clean = {}
        for (index, a), poly in (coeffs or {}).items():
            index = tuple(index)
            if len(index) != k or list(index) != sorted(set(index)):
                raise ValueError(f"Index set {index} is not strictly increasing of size {k}")
            if index and not (0 <= index[0] and index[-1] < n):
                raise ValueError(f"Index set {index} out of range for dimension {n}")
            if not 0 <= a < value.dim:
                raise ValueError(f"Value index {a} out of range for {value.tag}")
            if not isinstance(poly, Poly):
                poly = Poly.constant(n, poly)
            if poly.n != n:
                raise ValueError(f"Coefficient dimension {poly.n} does not match {n}")
            if poly:
                clean[(index, a)] = poly
        self.n = n
        self.k = k
        self.value = value
        self.coeffs = clean

    @classmethod
    def zero(cls, n, k, value):
        return cls(n, k, value)

    @classmethod
    def monomial_form(cls, n, k, value, index, a, monomial, coeff=1):
        return cls(n, k, value, {(tuple(index), a): Poly(n, {tuple(monomial): coeff})})

    def _check_compatible(self, other):
        if (self.n, self.k, self.value) != (other.n, other.k, other.value):
            raise ValueError(
                f"Incompatible forms: (n={self.n}, k={self.k}, {self.value.tag}) vs "
                f"(n={other.n}, k={other.k}, {other.value.tag})"
            )

    def __add__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        self._check_compatible(other)
        coeffs = dict(self.coeffs)
        for key, poly in other.coeffs.items():
            coeffs[key] = poly_arith(coeffs[key], poly, "add") if key in coeffs else poly
        return PolyForm(self.n, self.k, self.value, coeffs)

    def __neg__(self):
        return PolyForm(self.n, self.k, self.value, {key: -p for key, p in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        return PolyForm(self.n, self.k, self.value, {key: p * scalar for key, p in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        return (self.n, self.k, self.value, self.coeffs) == (other.n, other.k, other.value, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.k, self.value, frozenset(self.coeffs.items())))

    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def __repr__(self):
        return f"PolyForm(n={self.n}, k={self.k}, value={self.value.tag}, terms={len(list(self.terms()))})"

    @property
    def degree(self):
        """Largest coefficient degree, -1 for the zero form"""
        return max((p.degree for p in self.coeffs.values()), default=-1)

    def terms(self):
        """Iterate (I, a, monomial, coeff) in a deterministic order"""
        for index, a in sorted(self.coeffs):
            for monomial, coeff in self.coeffs[(index, a)].sorted_terms(reverse=True):
                yield index, a, monomial, coeff

    def map_coeffs(self, fn):
        """Apply ``fn`` to every coefficient polynomial"""
        return PolyForm(self.n, self.k, self.value, {key: fn(p) for key, p in self.coeffs.items()})

    def ambient_coefficients(self):
        """Coefficients keyed by (I, ambient index) instead of basis index"""
        ambient = {}
        for (index, a), poly in self.coeffs.items():
            for e, b in enumerate(self.value.basis[a]):
                if b:
                    key = (index, e)
                    ambient[key] = ambient[key] + poly * b if key in ambient else poly * b
        return {key: p for key, p in ambient.items() if p}

    def evaluate_at_origin(self):
        return self.map_coeffs(lambda p: Poly.constant(p.n, p.constant_term()))


def form_index_sets(n, k):
    """All strictly increasing 0-based index sets of size k"""
    return list(itertools.combinations(range(n), k))


def form_proxy_slots(n, k):
    """
    Proxy identification of k-forms in n <= 3 dimensions.

    Returns:
        (kind, [(I, sign), ...]) with kind "scalar" or "vector"; slot s of the
        proxy equals sign * coefficient of dx_I.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"Proxy identification only for n <= 3, got n={n}")
    if not 0 <= k <= n:
        raise ValueError(f"Form degree {k} has no proxy in dimension {n}")
    if k == 0:
        return "scalar", [((), 1)]
    if k == n:
        return "scalar", [(tuple(range(n)), 1)]
    if k == 1:
        return "vector", [((i,), 1) for i in range(n)]
    # n == 3, k == 2
    return "vector", [((1, 2), 1), ((0, 2), -1), ((0, 1), 1)]


def field_kind(field):
    if isinstance(field, Poly):
        return "scalar"
    if field and isinstance(field[0], (tuple, list)):
        return "matrix"
    return "vector"


def as_poly(value, n):
    if isinstance(value, Poly):
        if value.n != n:
            raise ValueError(f"Dimension mismatch: {value.n} vs {n}")
        return value
    return Poly.constant(n, parse_rational(value))


def flatten_field(field, n):
    """Scalar, vector or matrix field to a list of Poly (matrices row-major)"""
    kind = field_kind(field)
    if kind == "scalar":
        return [field]
    if kind == "vector":
        return [as_poly(x, n) for x in field]
    return [as_poly(x, n) for row in field for x in row]


def shape_field(values, ambient, n):
    values = list(values)
    if ambient == "scalar":
        return values[0]
    if ambient == "vector":
        return tuple(values)
    return tuple(tuple(values[i * n:(i + 1) * n]) for i in range(n))


def form_to_proxy(u):
    """
    Identify a form with a scalar, vector or matrix field.

    Vector-valued forms whose form part is a vector become matrices with the
    value index as the row (differential operators act row-wise).
    """
    n = u.n
    kind, slots = form_proxy_slots(n, u.k)
    ambient = u.ambient_coefficients()
    zero = Poly.zero(n)

    def slot_values(e):
        return [ambient.get((index, e), zero) * sign for index, sign in slots]

    if u.value.ambient == "scalar":
        values = slot_values(0)
        return values[0] if kind == "scalar" else tuple(values)
    if u.value.ambient == "vector":
        rows = [slot_values(e) for e in range(n)]
        if kind == "scalar":
            return tuple(row[0] for row in rows)
        return tuple(tuple(row) for row in rows)
    if u.k != 0:
        raise ValueError("Matrix-valued forms have a proxy only in degree 0")
    return shape_field([ambient.get(((), e), zero) for e in range(n * n)], "matrix", n)


def proxy_to_form(field, n, k, value):
    """Inverse of ``form_to_proxy``; rejects fields outside the value space"""
    space = _as_space(value, n)
    kind, slots = form_proxy_slots(n, k)

    if space.ambient == "scalar":
        rows = [[field] if kind == "scalar" else list(field)]
    elif space.ambient == "vector":
        rows = [[x] for x in field] if kind == "scalar" else [list(row) for row in field]
    else:
        if k != 0:
            raise ValueError("Matrix-valued forms have a proxy only in degree 0")
        rows = [[x] for x in flatten_field(field, n)]

    if len(rows) != space.ambient_dim or any(len(row) != len(slots) for row in rows):
        raise ValueError(f"Field shape does not match a {k}-form valued in {space.tag} (n={n})")

    by_index = {}
    for e, row in enumerate(rows):
        for (index, sign), entry in zip(slots, row):
            poly = as_poly(entry, n)
            if poly:
                by_index.setdefault(index, {})[e] = poly * sign
    coeffs = {}
    for index, ambient in by_index.items():
        for a, poly in space.coordinates(ambient).items():
            coeffs[(index, a)] = poly
    return PolyForm(n, k, space, coeffs)


class ValueMap:
    """Constant linear map between two value spaces."""

    def __init__(self, source, target, matrix, name=None):
        if matrix.shape != (target.dim, source.dim):
            raise ValueError(
                f"Value map matrix has shape {matrix.shape}, expected {(target.dim, source.dim)}"
            )
        self.source = source
        self.target = target
        self.matrix = matrix
        self.name = name

    def __repr__(self):
        return f"ValueMap({self.name or '?'}: {self.source.tag} -> {self.target.tag})"

    @classmethod
    def from_function(cls, source, target, fn, name=None):
        """
        Build from a function on ambient vectors.

        ``fn`` takes a list of Fractions of length source.ambient_dim and returns
        a list of length target.ambient_dim.
        """
        columns = []
        for vector in source.basis:
            image = fn(list(vector))
            columns.append(target.coordinates({e: v for e, v in enumerate(image) if v}))
        matrix = LinearOp.from_columns(range(target.dim), columns)
        return cls(source, target, matrix, name)

    def apply_coords(self, coords):
        return self.matrix.apply(coords)

    def apply_ambient(self, vector):
        coords = self.source.coordinates({e: v for e, v in enumerate(vector) if v})
        image = self.target.embed(self.apply_coords(coords))
        zero = Fraction(0)
        return [image.get(e, zero) for e in range(self.target.ambient_dim)]

    def restrict(self, source, target):
        """The same map read between subspaces of the source and target ambients"""
        return ValueMap.from_function(source, target, self.apply_ambient, self.name)

    def __matmul__(self, other):
        if not isinstance(other, ValueMap):
            return NotImplemented
        if other.target != self.source:
            raise ValueError(f"Cannot compose {self!r} after {other!r}")
        return ValueMap(other.source, self.target, self.matrix @ other.matrix, f"{self.name}*{other.name}")

    def __add__(self, other):
        return ValueMap(self.source, self.target, self.matrix + other.matrix, self.name)

    def __mul__(self, scalar):
        return ValueMap(self.source, self.target, self.matrix * scalar, self.name)

    __rmul__ = __mul__


def _trace(x, n):
    return sum((x[i * n + i] for i in range(n)), Fraction(0))


def _transpose(x, n):
    return [x[j * n + i] for i in range(n) for j in range(n)]


def _scaled_identity(t, n):
    return [t if i == j else Fraction(0) for i in range(n) for j in range(n)]


def _mskw(v):
    v1, v2, v3 = v
    zero = Fraction(0)
    return [zero, -v3, v2, v3, zero, -v1, -v2, v1, zero]


def _vskw(x):
    half = Fraction(1, 2)
    return [half * (x[7] - x[5]), half * (x[2] - x[6]), half * (x[3] - x[1])]


def _proxy_function(name, n):
    add = lambda a, b: [p + q for p, q in zip(a, b)]  # noqa: E731
    sub = lambda a, b: [p - q for p, q in zip(a, b)]  # noqa: E731
    half = Fraction(1, 2)
    if name == "iota":
        return "R", "M", lambda x: _scaled_identity(x[0], n)
    if name == "tr":
        return "M", "R", lambda x: [_trace(x, n)]
    if name == "dev":
        return "M", "M", lambda x: sub(x, _scaled_identity(_trace(x, n) / n, n))
    if name == "sym":
        return "M", "M", lambda x: [half * v for v in add(x, _transpose(x, n))]
    if name == "skw":
        return "M", "M", lambda x: [half * v for v in sub(x, _transpose(x, n))]
    if name == "transpose":
        return "M", "M", lambda x: _transpose(x, n)
    if name == "scal_S":
        return "M", "M", lambda x: sub(_transpose(x, n), _scaled_identity(_trace(x, n), n))
    if name == "scal_S_inv":
        if n < 2:
            raise ValueError("scal_S_inv requires n >= 2")
        return "M", "M", lambda x: sub(
            _transpose(x, n), _scaled_identity(_trace(x, n) / (n - 1), n)
        )
    if name in ("mskw", "vskw"):
        if n != 3:
            raise ValueError(f"{name} is only defined for n = 3, got n={n}")
        return ("V", "M", _mskw) if name == "mskw" else ("M", "V", _vskw)
    raise ValueError(f"Unknown proxy map: {name}")


@lru_cache(maxsize=None)
def proxy_map(name, n):
    """
    Exact matrix of a named algebraic map.

    Matrix-valued sides use the full space M; use ``ValueMap.restrict`` to
    read a map between subspaces such as S or K.
    """
    source, target, fn = _proxy_function(name, n)
    return ValueMap.from_function(value_space(source, n), value_space(target, n), fn, name)


@lru_cache(maxsize=None)
def projection_map(source, target):
    """Orthogonal (Frobenius/Euclidean) projection between value spaces on one ambient"""
    if source.n != target.n or source.ambient != target.ambient:
        raise ValueError(f"No projection from {source.tag} to {target.tag}")
    return ValueMap(source, target, target.coordinates_op @ source.embedding, f"proj_{target.tag}")


def apply_map_to_form(vmap, u):
    """Apply a constant value map coefficient-wise to a form"""
    if u.value != vmap.source:
        raise ValueError(f"Form valued in {u.value.tag}, map expects {vmap.source.tag}")
    by_index = {}
    for (index, a), poly in u.coeffs.items():
        by_index.setdefault(index, {})[a] = poly
    coeffs = {}
    for index, coords in by_index.items():
        for a, poly in vmap.apply_coords(coords).items():
            coeffs[(index, a)] = poly
    return PolyForm(u.n, u.k, vmap.target, coeffs)


def value_projection(u, target):
    """Orthogonally project the values of ``u`` onto ``target``"""
    target = _as_space(target, u.n)
    return apply_map_to_form(projection_map(u.value, target), u)


def apply_value_map(vmap, field):
    """Pointwise application of a constant value map to a field"""
    n = vmap.source.n
    values = flatten_field(field, n)
    if len(values) != vmap.source.ambient_dim:
        raise ValueError(f"Field shape does not match {vmap.source.tag}")
    coords = vmap.source.coordinates({e: p for e, p in enumerate(values) if p})
    image = vmap.target.embed(vmap.apply_coords(coords))
    zero = Poly.zero(n)
    return shape_field(
        [image.get(e, zero) for e in range(vmap.target.ambient_dim)], vmap.target.ambient, n
    )


def field_in_space(field, tag, n):
    """True when every value of a matrix/vector field lies in the value space ``tag``"""
    space = value_space(tag, n)
    values = flatten_field(field, n)
    if len(values) != space.ambient_dim:
        return False
    try:
        space.coordinates({e: p for e, p in enumerate(values) if p})
    except ValueError:
        return False
    return True


def polyform_to_json(u):
    """Serialize a PolyForm; index sets 1-based, value index 0-based"""
    return {
        "n": u.n,
        "k": u.k,
        "value": u.value.tag,
        "terms": [
            {
                "I": [i + 1 for i in index],
                "a": a,
                "monomial": list(monomial),
                "coeff": format_rational(coeff),
            }
            for index, a, monomial, coeff in u.terms()
        ],
    }


def polyform_from_json(data):
    """Parse and validate a PolyForm JSON document"""
    model = PolyFormModel.model_validate(data)
    coeffs = {}
    for term in model.terms:
        index = tuple(i - 1 for i in term.I)
        if len(term.monomial) != model.n:
            raise ValueError(f"Monomial {term.monomial} has wrong length for n={model.n}")
        key = (index, term.a)
        poly = Poly(model.n, {tuple(term.monomial): parse_rational(term.coeff)})
        coeffs[key] = coeffs[key] + poly if key in coeffs else poly
    return PolyForm(model.n, model.k, model.value, coeffs)


def random_form(rng, n, k, value, r, density=0.4, bound=3):
    """Seeded random form with coefficient degree <= r"""
    space = _as_space(value, n)
    coeffs = {}
    for index in form_index_sets(n, k):
        for a in range(space.dim):
            coeffs[(index, a)] = random_poly(rng, n, r, density, bound)
    return PolyForm(n, k, space, coeffs)
