"""
Exact rational scalars and sparse multivariate polynomials over Q.

Rationals are ``fractions.Fraction`` (always reduced, zero is 0/1). A ``Poly``
stores a map from exponent tuples to non-zero rationals; monomials are ordered
graded lexicographically wherever an order matters.
"""

import itertools
from fractions import Fraction
from math import comb

Rational = Fraction


def parse_rational(text):
    """Parse a rational from "p/q", "p" or an int/Fraction"""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid rational literal: {text!r}") from e


def format_rational(value):
    """Format a rational as "p/q" (or "p" when integral)"""
    return str(Fraction(value))


def grlex_key(monomial):
    """Sort key for graded lexicographic order (degree first, then x1 > x2 > ...)"""
    return (sum(monomial), tuple(-e for e in monomial))


def monomial_basis(n, r, mode="up_to", reverse=False):
    """
    Enumerate monomials in n variables.

    Args:
        n: Ambient dimension (>= 1)
        r: Degree (>= 0)
        mode: "homogeneous" for degree exactly r, "up_to" for degree <= r
        reverse: Return the reversed graded lexicographic order

    Returns:
        List of exponent tuples
    """
    if n < 1:
        raise ValueError(f"Dimension must be >= 1, got {n}")
    if r < 0:
        # truncated slot
        return []
    if mode == "homogeneous":
        degrees = [r]
    elif mode == "up_to":
        degrees = range(r + 1)
    else:
        raise ValueError(f"Unknown monomial mode: {mode}")

    monomials = []
    for degree in degrees:
        for combo in itertools.combinations_with_replacement(range(n), degree):
            exponents = [0] * n
            for axis in combo:
                exponents[axis] += 1
            monomials.append(tuple(exponents))
    monomials.sort(key=grlex_key, reverse=reverse)
    return monomials


def monomial_count(n, r, mode="up_to"):
    """Closed-form size of ``monomial_basis``"""
    if r < 0:
        return 0
    if mode == "homogeneous":
        return comb(n + r - 1, r)
    return comb(n + r, r)


class Poly:
    """Sparse polynomial in ``n`` variables with rational coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        if n < 1:
            raise ValueError(f"Polynomial dimension must be >= 1, got {n}")
        clean = {}
        for monomial, coeff in (terms or {}).items():
            monomial = tuple(int(e) for e in monomial)
            if len(monomial) != n:
                raise ValueError(
                    f"Monomial {monomial} has length {len(monomial)}, expected {n}"
                )
            if any(e < 0 for e in monomial):
                raise ValueError(f"Negative exponent in monomial {monomial}")
            value = clean.get(monomial, 0) + Fraction(coeff)
            if value:
                clean[monomial] = value
            else:
                clean.pop(monomial, None)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # Constructors

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def constant(cls, n, value):
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, n, axis):
        if not 0 <= axis < n:
            raise ValueError(f"Axis {axis} out of range for dimension {n}")
        exponents = [0] * n
        exponents[axis] = 1
        return cls(n, {tuple(exponents): 1})

    @classmethod
    def monomial(cls, exponents, coeff=1):
        return cls(len(exponents), {tuple(exponents): coeff})

    @classmethod
    def _raw(cls, n, clean):
        poly = object.__new__(cls)
        object.__setattr__(poly, "n", n)
        object.__setattr__(poly, "terms", clean)
        return poly

    # Queries

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial"""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def is_zero(self):
        return not self.terms

    def is_homogeneous(self, degree=None):
        degrees = {sum(m) for m in self.terms}
        if degree is None:
            return len(degrees) <= 1
        return degrees <= {degree}

    def constant_term(self):
        return self.terms.get((0,) * self.n, Fraction(0))

    def evaluate(self, point):
        """Evaluate at a rational point"""
        if len(point) != self.n:
            raise ValueError(f"Point has {len(point)} coordinates, expected {self.n}")
        total = Fraction(0)
        for monomial, coeff in self.terms.items():
            value = coeff
            for x, e in zip(point, monomial):
                if e:
                    value *= Fraction(x) ** e
            total += value
        return total

    def sorted_terms(self, reverse=False):
        return sorted(
            self.terms.items(), key=lambda item: grlex_key(item[0]), reverse=reverse
        )

    def derivative(self, axis):
        return partial_derivative(self, axis)

    def homogeneous_components(self):
        return homogeneous_components(self)

    # Arithmetic

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError(
                    f"Dimension mismatch: {self.n} vs {other.n}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result = dict(self.terms)
        for monomial, coeff in other.terms.items():
            value = result.get(monomial, 0) + coeff
            if value:
                result[monomial] = value
            else:
                result.pop(monomial, None)
        return Poly._raw(self.n, result)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            factor = Fraction(other)
            if not factor:
                return Poly.zero(self.n)
            return Poly._raw(self.n, {m: c * factor for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        result = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                monomial = tuple(a + b for a, b in zip(m1, m2))
                value = result.get(monomial, 0) + c1 * c2
                if value:
                    result[monomial] = value
                else:
                    result.pop(monomial, None)
        return Poly._raw(self.n, result)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.n, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Poly({self.n}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for monomial, coeff in self.sorted_terms(reverse=True):
            factors = [
                f"x{axis + 1}" if e == 1 else f"x{axis + 1}^{e}"
                for axis, e in enumerate(monomial)
                if e
            ]
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            elif coeff == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{coeff}*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


def poly_arith(a, b, op):
    """Exact add/sub/mul of two polynomials of equal dimension"""
    if a.n != b.n:
        raise ValueError(f"Dimension mismatch: {a.n} vs {b.n}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"Unknown polynomial operation: {op}")


def partial_derivative(p, axis):
    """Formal partial derivative along ``axis`` (0-based)"""
    if not 0 <= axis < p.n:
        raise ValueError(f"Axis {axis} out of range for dimension {p.n}")
    result = {}
    for monomial, coeff in p.terms.items():
        e = monomial[axis]
        if e:
            lowered = monomial[:axis] + (e - 1,) + monomial[axis + 1:]
            result[lowered] = coeff * e
    return Poly._raw(p.n, result)


def homogeneous_components(p):
    """Split into homogeneous parts keyed by degree"""
    buckets = {}
    for monomial, coeff in p.terms.items():
        buckets.setdefault(sum(monomial), {})[monomial] = coeff
    return {degree: Poly._raw(p.n, terms) for degree, terms in sorted(buckets.items())}


def random_poly(rng, n, r, density=0.5, bound=3):
    """Seeded random polynomial of degree <= r with small integer coefficients"""
    terms = {}
    for monomial in monomial_basis(n, r):
        if rng.random() < density:
            terms[monomial] = int(rng.integers(-bound, bound + 1))
    return Poly(n, terms)
