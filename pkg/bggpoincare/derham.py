"""
Exterior derivative, Euler contraction and the Koszul Poincare operator on
polynomial forms, plus the vector/matrix proxy differential operators.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .forms import (PolyForm, apply_value_map, field_kind, form_index_sets,
                    form_to_proxy, polyform_to_json, proxy_map, proxy_to_form)
from .ratpoly import Poly, monomial_basis, partial_derivative
from .schemas import IdentityReport

logger = logging.getLogger(__name__)

PROXY_OPERATORS = (
    "grad", "curl", "div", "def", "hess", "inc", "divdiv",
    "symcurl", "devgrad", "devhess", "devdef", "cot",
)


@dataclass(frozen=True)
class EulerField:
    """The field E(x) = x"""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Dimension must be >= 1, got {self.n}")

    def component(self, axis):
        return Poly.variable(self.n, axis)


@dataclass(frozen=True)
class PoincareFamily:
    """A differential together with a candidate homotopy operator."""

    d: Callable
    p: Callable
    name: str = "family"
    degree_of: Callable = lambda u: u.k


def wedge_sign(index, j):
    """Sign of moving dx_j in front of dx_I into sorted position"""
    return -1 if sum(1 for i in index if i < j) % 2 else 1


def exterior_d(u):
    """d(p dx_I) = sum over j not in I of dp/dx_j dx_j ^ dx_I"""
    if u.k > u.n:
        raise ValueError(f"Exterior derivative undefined on {u.k}-forms in dimension {u.n}")
    coeffs = {}
    for (index, a), poly in u.coeffs.items():
        for j in range(u.n):
            if j in index:
                continue
            derivative = partial_derivative(poly, j)
            if not derivative:
                continue
            key = (tuple(sorted(index + (j,))), a)
            term = derivative * wedge_sign(index, j)
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return PolyForm(u.n, u.k + 1, u.value, coeffs)


def interior_euler(u):
    """Contraction with the Euler field x"""
    if u.k == 0:
        raise ValueError("Euler contraction needs a form of degree >= 1")
    euler = EulerField(u.n)
    coeffs = {}
    for (index, a), poly in u.coeffs.items():
        for s, axis in enumerate(index):
            key = (index[:s] + index[s + 1:], a)
            term = poly * euler.component(axis) * (-1 if s % 2 else 1)
            coeffs[key] = coeffs[key] + term if key in coeffs else term
    return PolyForm(u.n, u.k - 1, u.value, coeffs)


def koszul_poincare(u):
    """
    Poincare operator with base point 0.

    On a homogeneous coefficient of degree r the integral over the segment
    [0, x] reduces to i_E u / (r + k).
    """
    if u.k == 0:
        raise ValueError("Poincare operator needs a form of degree >= 1")

    def rescale(poly):
        return Poly(poly.n, {m: c / (sum(m) + u.k) for m, c in poly.terms.items()})

    return interior_euler(u.map_coeffs(rescale))


def koszul_family():
    """(d, P) for the polynomial de Rham complex"""
    return PoincareFamily(d=exterior_d, p=koszul_poincare, name="koszul")


# Proxy operators


def _field_dim(field):
    kind = field_kind(field)
    if kind == "scalar":
        return field.n
    if kind == "vector":
        return field[0].n
    return field[0][0].n


def _require_3d(name, n):
    if n != 3:
        raise ValueError(f"{name} is only defined for n = 3, got n={n}")


def grad(field):
    """Gradient; row-wise Jacobian (du)_ij = d_j u_i on vector fields"""
    n = _field_dim(field)
    kind = field_kind(field)
    if kind == "matrix":
        raise ValueError("grad expects a scalar or vector field")
    value = "R" if kind == "scalar" else "V"
    return form_to_proxy(exterior_d(proxy_to_form(field, n, 0, value)))


def curl(field):
    """Curl of a vector field, row-wise on matrix fields"""
    n = _field_dim(field)
    _require_3d("curl", n)
    kind = field_kind(field)
    if kind == "scalar":
        raise ValueError("curl expects a vector or matrix field")
    value = "R" if kind == "vector" else "V"
    return form_to_proxy(exterior_d(proxy_to_form(field, n, 1, value)))


def div(field):
    """Divergence of a vector field, row-wise on matrix fields"""
    n = _field_dim(field)
    _require_3d("div", n)
    kind = field_kind(field)
    if kind == "scalar":
        raise ValueError("div expects a vector or matrix field")
    value = "R" if kind == "vector" else "V"
    return form_to_proxy(exterior_d(proxy_to_form(field, n, 2, value)))


def _matrix_map(name, field):
    if field_kind(field) != "matrix":
        raise ValueError(f"{name} expects a matrix field")
    return apply_value_map(proxy_map(name, _field_dim(field)), field)


def proxy_operator(name, field):
    """
    Apply a named proxy differential operator.

    Every operator is built from ``grad``, ``curl`` and ``div`` (themselves
    exterior derivatives read through proxies) and constant value maps.
    """
    if name == "grad":
        return grad(field)
    if name == "curl":
        return curl(field)
    if name == "div":
        return div(field)
    if name == "def":
        return _matrix_map("sym", grad(_vector(name, field)))
    if name == "hess":
        return grad(grad(_scalar(name, field)))
    if name == "inc":
        return curl(_matrix_map("transpose", curl(_matrix(name, field))))
    if name == "divdiv":
        return div(div(_matrix(name, field)))
    if name == "symcurl":
        return _matrix_map("sym", curl(_matrix(name, field)))
    if name == "devgrad":
        return _matrix_map("dev", grad(_vector(name, field)))
    if name == "devhess":
        return _matrix_map("dev", grad(grad(_scalar(name, field))))
    if name == "devdef":
        return _matrix_map("dev", _matrix_map("sym", grad(_vector(name, field))))
    if name == "cot":
        step = curl(_matrix(name, field))
        step = curl(_matrix_map("scal_S_inv", step))
        return curl(_matrix_map("scal_S_inv", step))
    raise ValueError(f"Unknown proxy operator: {name}")


def _scalar(name, field):
    if field_kind(field) != "scalar":
        raise ValueError(f"{name} expects a scalar field")
    return field


def _vector(name, field):
    if field_kind(field) != "vector":
        raise ValueError(f"{name} expects a vector field")
    return field


def _matrix(name, field):
    if field_kind(field) != "matrix":
        raise ValueError(f"{name} expects a matrix field")
    return field


def monomial_forms(n, k, r_max, value="R"):
    """Basis of k-forms with monomial coefficients of degree <= r_max"""
    forms = []
    for index in form_index_sets(n, k):
        for monomial in monomial_basis(n, r_max):
            forms.append(PolyForm.monomial_form(n, k, value, index, 0, monomial))
    return forms


def homotopy_check_derham(k, r_max, n=3):
    """
    Check dP + Pd = I on every monomial k-form of degree <= r_max (k >= 1),
    and Pd u = u - u(0) on 0-forms.
    """
    if k == 0:
        identity = "P.d(u) = u - u(0)"
    else:
        identity = "d.P + P.d = I"
    report = IdentityReport(identity=identity, scope=f"derham n={n}", degree=k)
    logger.info(f"Checking {identity} for k={k}, n={n}, r_max={r_max}")
    if not 0 <= k <= n:
        raise ValueError(f"Form degree {k} outside 0..{n}")

    checked = 0
    for u in monomial_forms(n, k, r_max):
        if k == 0:
            residual = koszul_poincare(exterior_d(u)) - (u - u.evaluate_at_origin())
        else:
            du = exterior_d(u)
            lhs = exterior_d(koszul_poincare(u))
            if du:
                lhs = lhs + koszul_poincare(du)
            residual = lhs - u
        checked += 1
        if residual:
            logger.warning(f"Counterexample to {identity} at k={k}")
            report.passed = False
            report.counterexample = polyform_to_json(u)
            break
    report.checked = checked
    return report


def cartan_scale(u):
    """(r + k) for a homogeneous form of coefficient degree r"""
    degrees = {sum(m) for p in u.coeffs.values() for m in p.terms}
    if len(degrees) > 1:
        raise ValueError("Form is not homogeneous")
    return Fraction(degrees.pop() + u.k) if degrees else Fraction(0)
