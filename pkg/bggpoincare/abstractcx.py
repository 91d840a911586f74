"""
Finite-dimensional cochain complexes over Q.

The operator identities of the twisted/BGG construction are purely algebraic,
so they can be exercised exactly on matrix complexes: homotopy sets (P, L),
conjugation of a row grid by F = exp(K), the finite BGG reduction and the
modifications that make a homotopy family square to zero.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import List, Optional

import numpy as np

from .linear import LinearOp, pseudo_inverse, inverse
from .schemas import FiniteComplexModel, IdentityReport

logger = logging.getLogger(__name__)


def _labels(dim):
    return tuple(range(dim))


class FiniteComplex:
    """
    V^0 -> V^1 -> ... -> V^N with d^(i+1) d^i = 0.

    ``d[i]`` maps V^i to V^(i+1); space labels are arbitrary hashables.
    """

    def __init__(self, spaces, d, known_cohomology=None):
        self.spaces = tuple(tuple(s) if not isinstance(s, int) else _labels(s) for s in spaces)
        if len(d) != max(len(self.spaces) - 1, 0):
            raise ValueError(f"Need {len(self.spaces) - 1} differentials, got {len(d)}")
        for i, di in enumerate(d):
            if di.cols != self.spaces[i] or di.rows != self.spaces[i + 1]:
                raise ValueError(f"Differential {i} has shape {di.shape}, spaces do not chain")
        for i in range(len(d) - 1):
            if not (d[i + 1] @ d[i]).is_zero():
                raise ValueError(f"d^{i + 1} d^{i} != 0")
        self.d = list(d)
        self.known_cohomology = known_cohomology

    @property
    def dims(self):
        return [len(s) for s in self.spaces]

    @property
    def length(self):
        return len(self.spaces)

    def __repr__(self):
        return f"FiniteComplex(dims={self.dims})"

    def identity(self, i):
        return LinearOp.identity(self.spaces[i])

    def zero(self, i, j):
        """Zero map V^j -> V^i"""
        return LinearOp(self.spaces[i], self.spaces[j])


def cohomology_dims(c):
    """dim V^i - rank d^i - rank d^(i-1)"""
    ranks = [di.rank() for di in c.d]
    return [
        dim - (ranks[i] if i < len(ranks) else 0) - (ranks[i - 1] if i >= 1 else 0)
        for i, dim in enumerate(c.dims)
    ]


def complex_to_json(c):
    return {
        "dims": c.dims,
        "d": [
            [
                {"row": i, "col": j, "value": str(v)}
                for (i, j), v in sorted(di.entries.items())
            ]
            for di in c.d
        ],
    }


def complex_from_json(data):
    model = FiniteComplexModel.model_validate(data)
    dims = model.dims
    if len(model.d) != max(len(dims) - 1, 0):
        raise ValueError("Number of differentials does not match the dimensions")
    d = []
    for i, triplets in enumerate(model.d):
        entries = {(t.row, t.col): Fraction(t.value) for t in triplets}
        d.append(LinearOp(_labels(dims[i + 1]), _labels(dims[i]), entries))
    return FiniteComplex(dims, d)


@dataclass
class HomotopySet:
    """P^i: V^i -> V^(i-1) (P[0] is None) and L^i: V^i -> V^i"""

    P: List[Optional[LinearOp]]
    L: List[LinearOp]

    def __post_init__(self):
        if len(self.P) != len(self.L):
            raise ValueError("P and L must cover the same degrees")
        if self.P and self.P[0] is not None:
            raise ValueError("There is no P^0")


def zero_homotopy(c):
    """P = 0, L = I"""
    return HomotopySet(
        P=[None] + [c.zero(i - 1, i) for i in range(1, c.length)],
        L=[c.identity(i) for i in range(c.length)],
    )


def _homotopy_residual(c, h, i):
    residual = c.identity(i) - h.L[i]
    if i >= 1:
        residual = residual - c.d[i - 1] @ h.P[i]
    if i + 1 < c.length:
        residual = residual - h.P[i + 1] @ c.d[i]
    return residual


def _check_shapes(c, h):
    if len(h.L) != c.length:
        raise ValueError("Homotopy set does not match the complex length")
    for i in range(c.length):
        if h.L[i].rows != c.spaces[i] or h.L[i].cols != c.spaces[i]:
            raise ValueError(f"L^{i} has the wrong shape")
        if i >= 1 and (h.P[i].rows != c.spaces[i - 1] or h.P[i].cols != c.spaces[i]):
            raise ValueError(f"P^{i} has the wrong shape")


def _report(identity, scope, degree, failure):
    report = IdentityReport(identity=identity, scope=scope, degree=degree, checked=1)
    if failure:
        logger.warning(f"{identity} fails in degree {degree} ({scope})")
        report.passed = False
        report.counterexample = {"degree": degree}
    return report


def check_homotopy(c, h, scope="abstract"):
    """dP + Pd = I - L in every degree, and the consequence dL = Ld"""
    _check_shapes(c, h)
    reports = []
    for i in range(c.length):
        reports.append(_report("d.P + P.d = I - L", scope, i, not _homotopy_residual(c, h, i).is_zero()))
    for i in range(c.length - 1):
        reports.append(_report("d.L = L.d", scope, i, not (c.d[i] @ h.L[i] - h.L[i + 1] @ c.d[i]).is_zero()))
    return reports


def homotopy_holds(c, h):
    return all(report.passed for report in check_homotopy(c, h))


def hodge_homotopy(c):
    """P^i = (d^(i-1))^+ and L the orthogonal projector onto harmonic vectors"""
    P = [None]
    L = []
    for i in range(c.length):
        projector = c.identity(i)
        if i >= 1:
            pinv = pseudo_inverse(c.d[i - 1])
            P.append(pinv)
            projector = projector - c.d[i - 1] @ pinv
        if i < len(c.d):
            projector = projector - pseudo_inverse(c.d[i]) @ c.d[i]
        L.append(projector)
    return HomotopySet(P=P, L=L)


def _coordinates(basis_op):
    return pseudo_inverse(basis_op)


def _basis_op(space, vectors):
    return LinearOp.from_columns(space, vectors)


def subcomplex_from_L(c, h):
    """
    The subcomplex W^i = ran L^i with the induced differential.

    Returns:
        (W, report) where the report compares the cohomology of W and V.
    """
    if not homotopy_holds(c, h):
        raise ValueError("Homotopy identity dP + Pd = I - L fails")
    bases = [_basis_op(c.spaces[i], h.L[i].image()) for i in range(c.length)]
    d = [
        _coordinates(bases[i + 1]) @ c.d[i] @ bases[i]
        for i in range(len(c.d))
    ]
    w = FiniteComplex([b.cols for b in bases], d)
    expected = cohomology_dims(c)
    actual = cohomology_dims(w)
    report = IdentityReport(identity="H(ran L) = H(V)", scope="abstract", checked=c.length)
    if expected != actual:
        report.passed = False
        report.counterexample = {"complex": expected, "subcomplex": actual}
    return w, report


# Grids of complexes


class GridComplex:
    """Rows of complexes of equal length; Y^i = sum_j Z^(i,j) labelled (j, index)."""

    def __init__(self, rows):
        rows = list(rows)
        if not rows or len({row.length for row in rows}) != 1:
            raise ValueError("Grid rows must be complexes of equal length")
        self.rows = rows
        self.length = rows[0].length
        self.total = FiniteComplex(
            [self.labels(i) for i in range(self.length)],
            [self._block_diagonal([row.d[i] for row in rows], i, i + 1) for i in range(self.length - 1)],
        )

    @property
    def height(self):
        return len(self.rows)

    def labels(self, i):
        return tuple((j, x) for j, row in enumerate(self.rows) for x in row.spaces[i])

    def _block_diagonal(self, blocks, source, target):
        entries = {}
        for j, op in enumerate(blocks):
            for (a, b), v in op.entries.items():
                entries[((j, op.rows[a]), (j, op.cols[b]))] = v
        return LinearOp.from_labels(self.labels(target), self.labels(source), entries)

    def block_homotopy(self, homotopies):
        """Row-wise homotopy sets assembled into one on the total complex"""
        if len(homotopies) != self.height:
            raise ValueError("Need one homotopy set per row")
        P = [None] + [
            self._block_diagonal([h.P[i] for h in homotopies], i, i - 1)
            for i in range(1, self.length)
        ]
        L = [self._block_diagonal([h.L[i] for h in homotopies], i, i) for i in range(self.length)]
        return HomotopySet(P=P, L=L)


class KFamily:
    """
    K^i: Y^i -> Y^i lowering the row index, with S = dK - Kd and SK = KS.
    """

    def __init__(self, grid, K):
        if len(K) != grid.length:
            raise ValueError("Need one K per degree")
        for i, ki in enumerate(K):
            if ki.rows != grid.labels(i) or ki.cols != grid.labels(i):
                raise ValueError(f"K^{i} has the wrong shape")
            for (a, b) in ki.entries:
                if ki.rows[a][0] >= ki.cols[b][0]:
                    raise ValueError("K must strictly lower the row index")
        self.grid = grid
        self.K = list(K)
        d = grid.total.d
        self.S = [d[i] @ K[i] - K[i + 1] @ d[i] for i in range(grid.length - 1)]
        for i, si in enumerate(self.S):
            if not (si @ K[i] - K[i + 1] @ si).is_zero():
                raise ValueError(f"S K != K S in degree {i}")

    def exp(self, i, sign=1):
        """exp(sign * K^i) as a finite sum"""
        ki = self.K[i] * sign
        total = LinearOp.identity(ki.rows)
        power = total
        for m in range(1, self.grid.height + 1):
            power = power @ ki
            if power.is_zero():
                return total
            total = total + power * Fraction(1, factorial(m))
        raise ValueError("K is not nilpotent")

    def twisted_complex(self):
        """d_V = d - S"""
        d = self.grid.total.d
        return FiniteComplex(
            [self.grid.labels(i) for i in range(self.grid.length)],
            [d[i] - self.S[i] for i in range(len(d))],
        )


def conjugate_by_expK(grid, k_family, h):
    """
    Transport a homotopy set of the untwisted grid to d_V = F d F^-1.

    P_V^i = F^(i-1) P^i (F^i)^-1, L_V^i = F^i L^i (F^i)^-1 with F = exp(K).
    """
    F = [k_family.exp(i) for i in range(grid.length)]
    F_inv = [k_family.exp(i, -1) for i in range(grid.length)]
    P = [None] + [F[i - 1] @ h.P[i] @ F_inv[i] for i in range(1, grid.length)]
    L = [F[i] @ h.L[i] @ F_inv[i] for i in range(grid.length)]
    return HomotopySet(P=P, L=L)


def modify_hat_tilde(h, c):
    """
    P^ = (I - L) P (I - L), then P~^i = P^^i - d^(i-2) P^^(i-1) P^^i.

    The result keeps dP + Pd = I - L and adds L P~ = P~ L = 0 and P~ P~ = 0.
    """
    _check_shapes(c, h)
    if not homotopy_holds(c, h):
        raise ValueError("Input violates dP + Pd = I - L")
    for i in range(c.length):
        if h.L[i] @ h.L[i] != h.L[i]:
            raise ValueError(f"L^{i} is not idempotent")
        if i < len(c.d) and not (c.d[i] @ h.L[i]).is_zero():
            raise ValueError(f"d L != 0 in degree {i}")
        if i < len(c.d) and not (h.L[i + 1] @ c.d[i]).is_zero():
            raise ValueError(f"L d != 0 in degree {i}")

    complement = [c.identity(i) - h.L[i] for i in range(c.length)]
    hat = [None] + [complement[i - 1] @ h.P[i] @ complement[i] for i in range(1, c.length)]
    tilde = [None]
    for i in range(1, c.length):
        tilde.append(hat[i] - c.d[i - 2] @ hat[i - 1] @ hat[i] if i >= 2 else hat[i])
    return HomotopySet(P=tilde, L=list(h.L)), HomotopySet(P=hat, L=list(h.L))


def check_modified(c, h):
    """Post-conditions of ``modify_hat_tilde``"""
    tilde, hat = modify_hat_tilde(h, c)
    scope = "abstract (modified)"
    reports = check_homotopy(c, tilde, scope)
    for i in range(1, c.length):
        reports.append(_report("L.P~ = 0", scope, i, not (h.L[i - 1] @ tilde.P[i]).is_zero()))
        reports.append(_report("P~.L = 0", scope, i, not (tilde.P[i] @ h.L[i]).is_zero()))
        if i >= 2:
            reports.append(_report("P~.P~ = 0", scope, i, not (tilde.P[i - 1] @ tilde.P[i]).is_zero()))
            reports.append(_report(
                "D.P~ = D.P^", scope, i,
                (c.d[i - 2] @ tilde.P[i - 1]) != (c.d[i - 2] @ hat.P[i - 1]),
            ))
        if i < c.length - 1:
            reports.append(_report(
                "P~.D = P^.D", scope, i,
                (tilde.P[i + 1] @ c.d[i]) != (hat.P[i + 1] @ c.d[i]),
            ))
    return reports


# Finite BGG reduction


@dataclass
class BGGReduction:
    """Reduced complex on BGG-fiber coordinates and the maps A, B around it"""

    reduced: FiniteComplex
    twisted: FiniteComplex
    A: List[LinearOp] = field(default_factory=list)
    B: List[LinearOp] = field(default_factory=list)


def reduce_grid(grid, k_family):
    """
    BGG reduction of the twisted total complex with S = dK - Kd.

    T = S^+, fiber = ran(I - ST - TS), G = -sum_k (T d)^k T with the untwisted
    d, A = (I - G d_V) U and B = U^+ Pi (I - d_V G), where U is a basis of the
    fiber.
    """
    twisted = k_family.twisted_complex()
    d = grid.total.d
    S = k_family.S
    length = grid.length
    labels = [grid.labels(i) for i in range(length)]

    T = [None] + [pseudo_inverse(S[i - 1]) for i in range(1, length)]

    projectors = []
    for i in range(length):
        pi = LinearOp.identity(labels[i])
        if i >= 1:
            pi = pi - S[i - 1] @ T[i]
        if i + 1 < length:
            pi = pi - T[i + 1] @ S[i]
        projectors.append(pi)

    G = [None]
    for i in range(1, length):
        term = T[i]
        total = term
        for _ in range(grid.height):
            term = T[i] @ d[i - 1] @ term
            total = total + term
        G.append(-total)

    bases = [LinearOp.from_columns(labels[i], projectors[i].image()) for i in range(length)]
    coords = [pseudo_inverse(b) for b in bases]

    A = []
    B = []
    for i in range(length):
        a = LinearOp.identity(labels[i])
        if i + 1 < length:
            a = a - G[i + 1] @ twisted.d[i]
        A.append(a @ bases[i])
        b = LinearOp.identity(labels[i])
        if i >= 1:
            b = b - twisted.d[i - 1] @ G[i]
        B.append(coords[i] @ projectors[i] @ b)

    reduced_d = [B[i + 1] @ twisted.d[i] @ A[i] for i in range(length - 1)]
    reduced = FiniteComplex([b.cols for b in bases], reduced_d)
    logger.info(f"Reduced grid of dims {grid.total.dims} to {reduced.dims}")
    return BGGReduction(reduced=reduced, twisted=twisted, A=A, B=B)


def check_reduction(reduction):
    """B A = I, A D = d_V A, D B = B d_V"""
    reports = []
    r = reduction.reduced
    t = reduction.twisted
    for i in range(r.length):
        reports.append(_report("B.A = I", "reduction", i, reduction.B[i] @ reduction.A[i] != r.identity(i)))
    for i in range(len(r.d)):
        reports.append(_report(
            "A.D = dV.A", "reduction", i, reduction.A[i + 1] @ r.d[i] != t.d[i] @ reduction.A[i]
        ))
        reports.append(_report(
            "D.B = B.dV", "reduction", i, r.d[i] @ reduction.B[i] != reduction.B[i + 1] @ t.d[i]
        ))
    return reports


def transport_homotopy(reduction, h_twisted):
    """P = B P_V A and L = B L_V A on the reduced complex"""
    A, B = reduction.A, reduction.B
    length = reduction.reduced.length
    P = [None] + [B[i - 1] @ h_twisted.P[i] @ A[i] for i in range(1, length)]
    L = [B[i] @ h_twisted.L[i] @ A[i] for i in range(length)]
    return HomotopySet(P=P, L=L)


def check_transported(reduction, h_twisted):
    """Homotopy identity, L D = D L = 0 and idempotence on the reduced complex"""
    h = transport_homotopy(reduction, h_twisted)
    r = reduction.reduced
    reports = check_homotopy(r, h, "reduction")
    for i in range(r.length):
        if i < len(r.d):
            reports.append(_report("L.D = 0", "reduction", i, not (h.L[i + 1] @ r.d[i]).is_zero()))
            reports.append(_report("D.L = 0", "reduction", i, not (r.d[i] @ h.L[i]).is_zero()))
        if h_twisted.L[i] @ h_twisted.L[i] == h_twisted.L[i]:
            reports.append(_report("L.L = L", "reduction", i, h.L[i] @ h.L[i] != h.L[i]))
    return reports


# Generators


def _unit_triangular(rng, size, bound=2):
    entries = {(i, i): 1 for i in range(size)}
    for i in range(size):
        for j in range(i + 1, size):
            value = int(rng.integers(-bound, bound + 1))
            if value:
                entries[(i, j)] = value
    return LinearOp(_labels(size), _labels(size), entries)


def _pair_counts(dims, cohomology, rng):
    pairs = []
    previous = 0
    for i, dim in enumerate(dims):
        free = dim - previous
        if free < 0:
            raise ValueError(f"Dimensions {dims} admit no complex with cohomology {cohomology}")
        if i == len(dims) - 1:
            if cohomology is not None and free != cohomology[i]:
                raise ValueError(
                    f"Cohomology {cohomology} is inconsistent with dimensions {dims} (Euler characteristic)"
                )
            count = 0
        elif cohomology is not None:
            count = free - cohomology[i]
        else:
            count = int(rng.integers(0, min(free, dims[i + 1]) + 1))
        if count < 0 or (i + 1 < len(dims) and count > dims[i + 1]):
            raise ValueError(f"Dimensions {dims} admit no complex with cohomology {cohomology}")
        pairs.append(count)
        previous = count
    return pairs


def random_complex(seed, dims, cohomology=None):
    """
    Seeded complex built from elementary exact pairs Q -> Q plus trivial
    summands, then hidden by unit-triangular changes of basis.

    Without ``cohomology`` the pair counts are drawn from the seed.
    """
    dims = list(dims)
    if cohomology is not None and len(cohomology) != len(dims):
        raise ValueError("Cohomology vector must match the dimensions")
    rng = np.random.default_rng(seed)
    pairs = _pair_counts(dims, cohomology, rng)

    # Pair p between degree i and i+1 uses target index p of V^(i+1) and
    # source index offset_i + p of V^i, where offset_i is the number of
    # incoming pair targets.
    d = []
    for i in range(len(dims) - 1):
        offset = pairs[i - 1] if i >= 1 else 0
        entries = {(p, offset + p): 1 for p in range(pairs[i])}
        d.append(LinearOp(_labels(dims[i + 1]), _labels(dims[i]), entries))

    Q = [_unit_triangular(rng, dim) for dim in dims]
    d = [Q[i + 1] @ d[i] @ inverse(Q[i]) for i in range(len(d))]
    known = [dims[i] - pairs[i] - (pairs[i - 1] if i >= 1 else 0) for i in range(len(dims))]
    return FiniteComplex(dims, d, known_cohomology=known)


def random_grid(seed, dims):
    """Two rows of random complexes and a random row-lowering K"""
    rng = np.random.default_rng(seed)
    rows = [random_complex(int(rng.integers(0, 2**31)), dims) for _ in range(2)]
    grid = GridComplex(rows)
    K = []
    for i in range(grid.length):
        labels = grid.labels(i)
        entries = {}
        for a, target in enumerate(labels):
            for b, source in enumerate(labels):
                if target[0] == source[0] - 1:
                    value = int(rng.integers(-2, 3))
                    if value:
                        entries[(a, b)] = value
        K.append(LinearOp(labels, labels, entries))
    return grid, KFamily(grid, K)


# The one-dimensional example


def _derivative_matrix(r):
    """d/dx: P_r -> P_(r-1) in the monomial basis"""
    return LinearOp(_labels(max(r, 0)), _labels(r + 1), {(m - 1, m): m for m in range(1, r + 1)})


def _integration_matrix(r):
    """Integration from 0: P_(r-1) -> P_r"""
    return LinearOp(_labels(r + 1), _labels(max(r, 0)), {(m + 1, m): Fraction(1, m + 1) for m in range(r)})


def line_complex(r):
    """d^2/dx^2: P_r -> P_(r-2) with its homotopy P = integrate twice"""
    if r < 1:
        raise ValueError("Need r >= 1")
    second = _derivative_matrix(r - 1) @ _derivative_matrix(r)
    c = FiniteComplex([r + 1, r - 1], [second])
    poincare = _integration_matrix(r) @ _integration_matrix(r - 1)
    L0 = c.identity(0) - poincare @ second
    L1 = c.identity(1) - second @ poincare
    return c, HomotopySet(P=[None, poincare], L=[L0, L1])


def line_grid(r):
    """
    Rows P_r -> P_(r-1) and P_(r-1) -> P_(r-2) with K = integration from
    row 1 to row 0 in degree 0, so that S = dK - Kd = I.
    """
    if r < 1:
        raise ValueError("Need r >= 1")
    rows = [
        FiniteComplex([r + 1, r], [_derivative_matrix(r)]),
        FiniteComplex([r, r - 1], [_derivative_matrix(r - 1)]),
    ]
    grid = GridComplex(rows)
    integrate = _integration_matrix(r)
    K0 = LinearOp.from_labels(
        grid.labels(0), grid.labels(0),
        {((0, integrate.rows[a]), (1, integrate.cols[b])): v for (a, b), v in integrate.entries.items()},
    )
    K1 = LinearOp(grid.labels(1), grid.labels(1))
    homotopies = []
    for row in rows:
        size = row.dims[0]
        P1 = _integration_matrix(size - 1)
        L0 = row.identity(0) - P1 @ row.d[0]
        homotopies.append(HomotopySet(P=[None, P1], L=[L0, row.identity(1) - row.d[0] @ P1]))
    return grid, KFamily(grid, [K0, K1]), grid.block_homotopy(homotopies)


def check_random_instances(seed, count, dims=(2, 3, 3, 2)):
    """Hodge homotopies, subcomplexes, modifications and reductions on seeded instances"""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(count):
        instance_seed = int(rng.integers(0, 2**31))
        c = random_complex(instance_seed, dims)
        h = hodge_homotopy(c)
        reports.extend(check_homotopy(c, h))
        _, report = subcomplex_from_L(c, h)
        reports.append(report)
        if c.known_cohomology != cohomology_dims(c):
            reports.append(_report("H = constructed cohomology", "abstract", None, True))
        reports.extend(check_modified(c, h))

        grid, k_family = random_grid(instance_seed, dims[:3])
        h_grid = grid.block_homotopy([hodge_homotopy(row) for row in grid.rows])
        h_twisted = conjugate_by_expK(grid, k_family, h_grid)
        twisted = k_family.twisted_complex()
        reports.extend(check_homotopy(twisted, h_twisted, "twisted grid"))
        for i in range(grid.length):
            reports.append(_report(
                "rank L_V = rank L", "twisted grid", i, h_twisted.L[i].rank() != h_grid.L[i].rank()
            ))
        reduction = reduce_grid(grid, k_family)
        reports.extend(check_reduction(reduction))
        reports.extend(check_transported(reduction, h_twisted))
    return reports


def check_line_example(r_max):
    """
    The one-dimensional example: the reduced line grid is d^2/dx^2, the
    transported homotopy is integration twice, A^0, B^1 have the block
    forms (I; d/dx) and (d/dx, I), and exp(K) and P_V have the explicit
    upper-triangular forms built from the single integration P#.
    """
    reports = []
    for r in range(2, r_max + 1):
        c, h = line_complex(r)
        reports.extend(check_homotopy(c, h, "line"))
        grid, k_family, h_grid = line_grid(r)
        reduction = reduce_grid(grid, k_family)
        reports.extend(check_reduction(reduction))
        reports.append(_report("D = d^2/dx^2", "line", 0, reduction.reduced.d[0] != c.d[0]))
        h_twisted = conjugate_by_expK(grid, k_family, h_grid)
        transported = transport_homotopy(reduction, h_twisted)
        reports.append(_report("P = integrate twice", "line", 1, transported.P[1] != h.P[1]))
        reports.append(_report("L0 u = u(0) + u'(0) x", "line", 0, transported.L[0] != h.L[0]))
        reports.append(_report("D.P = I", "line", 1, c.d[0] @ transported.P[1] != c.identity(1)))
        # P D - I only leaves the affine part behind
        affine = transported.P[1] @ c.d[0] - c.identity(0)
        reports.append(_report(
            "P.D = I + affine", "line", 0, any(affine.rows[a] > 1 for a, _ in affine.entries)
        ))

        sharp = {(m + 1, m): Fraction(1, m + 1) for m in range(r)}
        f0 = LinearOp.from_labels(grid.labels(0), grid.labels(0), {
            **{(label, label): 1 for label in grid.labels(0)},
            **{((0, t), (1, s)): v for (t, s), v in sharp.items()},
        })
        reports.append(_report("F0 = (I, P#; 0, I)", "line", 0, k_family.exp(0) != f0))
        reports.append(_report(
            "F1 = I", "line", 1, k_family.exp(1) != LinearOp.identity(grid.labels(1))
        ))
        pv = LinearOp.from_labels(grid.labels(0), grid.labels(1), {
            **{((0, m + 1), (0, m)): Fraction(1, m + 1) for m in range(r)},
            **{((1, m + 1), (1, m)): Fraction(1, m + 1) for m in range(r - 1)},
            **{((0, m + 2), (1, m)): Fraction(1, (m + 1) * (m + 2)) for m in range(r - 1)},
        })
        reports.append(_report("PV = (P#, P#.Pb; 0, Pb)", "line", 1, h_twisted.P[1] != pv))

        a0 = LinearOp.from_labels(grid.labels(0), reduction.reduced.spaces[0], {
            **{((0, m), m): 1 for m in range(r + 1)},
            **{((1, m - 1), m): m for m in range(1, r + 1)},
        })
        reports.append(_report("A0 = (I; d/dx)", "line", 0, reduction.A[0] != a0))
        b1 = LinearOp.from_labels(reduction.reduced.spaces[1], grid.labels(1), {
            **{(m, (1, m)): 1 for m in range(r - 1)},
            **{(m - 1, (0, m)): m for m in range(1, r)},
        })
        reports.append(_report("B1 = (d/dx, I)", "line", 1, reduction.B[1] != b1))
    return reports
