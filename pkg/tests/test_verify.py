import io
import json
import os
import sys

import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from bggpoincare.derham import proxy_operator
from bggpoincare.forms import form_to_proxy
from bggpoincare.verify import (SEQUENCE_NAMES, degree0_kernel_basis,
                                euler_characteristic, reports_to_json,
                                resolve_sequence, run_sequence,
                                verify_enriched_complex,
                                verify_homogeneous_poincare,
                                verify_polynomial_complex, write_dims_csv)


def test_euler_characteristic():
    """Alternating sum"""
    assert euler_characteristic([105, 120, 24, 3]) == 6
    assert euler_characteristic([]) == 0


def test_resolve_sequence_by_diagram():
    """Diagram names select their polynomial sequence"""
    assert resolve_sequence("elasticity")[0] == "poly-elast"
    assert resolve_sequence("poly-hess")[0] == "poly-hess"
    with pytest.raises(ValueError):
        resolve_sequence("poly-maxwell")


def test_elasticity_sequence():
    """P_4 x V -> P_3 x S -> P_1 x S -> P_0 x V"""
    report = verify_polynomial_complex("poly-elast", 4)
    assert report.dims == [105, 120, 24, 3]
    assert report.euler_characteristic == 6
    assert report.cohomology == [6, 0, 0, 0]
    assert report.slots == ["P_4 x V", "P_3 x S", "P_1 x S", "P_0 x V"]
    assert report.passed


def test_hessian_sequence():
    """P_4 -> P_2 x S -> P_1 x T -> P_0 x V"""
    report = verify_polynomial_complex("poly-hess", 4)
    assert report.dims == [35, 60, 32, 3]
    assert report.euler_characteristic == 4
    assert report.cohomology == [4, 0, 0, 0]
    assert report.passed


def test_divdiv_sequence():
    """P_4 x V -> P_3 x T -> P_2 x S -> P_0"""
    report = verify_polynomial_complex("poly-divdiv", 4)
    assert report.dims == [105, 160, 60, 1]
    assert report.cohomology == [4, 0, 0, 0]
    assert report.passed


def test_conformal_hessian_sequence():
    """Kernel of devhess is span{1, x, |x|^2}"""
    report = verify_polynomial_complex("poly-conf-hess", 5)
    assert report.dims == [56, 100, 50, 1]
    assert report.euler_characteristic == 5
    assert report.cohomology == [5, 0, 0, 0]
    assert report.passed


def test_conformal_deformation_sequence():
    """Kernel of devdef is the ten conformal Killing fields"""
    report = verify_polynomial_complex("poly-conf-def", 5)
    assert report.dims == [168, 175, 20, 3]
    assert report.euler_characteristic == 10
    assert report.cohomology == [10, 0, 0, 0]
    assert report.passed


def test_reverse_order_agrees():
    """Ranks do not depend on the monomial order"""
    grlex = verify_polynomial_complex("poly-hess", 3)
    reverse = verify_polynomial_complex("poly-hess", 3, order="reverse")
    assert grlex.rank_out == reverse.rank_out
    assert grlex.cohomology == reverse.cohomology


def test_witness():
    """D P u = u on kernel bases of the elasticity sequence"""
    report = verify_polynomial_complex("poly-elast", 2, witness=True)
    assert report.verdicts["witness D.P = I"]
    assert report.passed


@pytest.mark.parametrize(
    "kwargs",
    [
        {"name": "poly-elast", "r": -1},
        {"name": "poly-elast", "r": 2, "order": "lex"},
        {"name": "poly-conf-hess", "r": 2, "witness": True},
        {"name": "poly-maxwell", "r": 2},
    ],
)
def test_invalid_arguments(kwargs):
    """Bad degree, order, witness target or name"""
    with pytest.raises(ValueError):
        verify_polynomial_complex(**kwargs)


def test_rigid_motions():
    """The kernel of def is six-dimensional and killed by def"""
    basis = degree0_kernel_basis("elasticity", 2)
    assert len(basis) == 6
    assert all(max(p.degree for p in u.coeffs.values()) <= 1 for u in basis)
    for u in basis:
        assert not any(proxy_operator("def", form_to_proxy(u))[i][j] for i in range(3) for j in range(3))


def test_homogeneous_elasticity():
    """H_4 x V <- H_3 x S <- H_1 x S <- H_0 x V"""
    report = verify_homogeneous_poincare(0)
    assert report.name == "homog-elast"
    assert report.dims == [45, 60, 18, 3]
    assert report.slots == ["H_4 x V", "H_3 x S", "H_1 x S", "H_0 x V"]
    assert report.rank_out[0] == 0
    assert report.cohomology is None
    assert report.passed
    with pytest.raises(ValueError):
        verify_homogeneous_poincare(-1)


def test_enriched_hessian():
    """D and the complexified P preserve the enlarged spaces"""
    report = verify_enriched_complex("hessian", 1)
    assert report.name == "enriched-hessian"
    assert report.passed
    assert report.cohomology == [4, 0, 0, 0]
    assert report.verdicts["plain spaces not P-closed"]
    assert "unenriched" in report.counterexample


def test_run_sequence_dispatch():
    """Homogeneous and enriched names reach their own verifications"""
    assert "homog-elast" in SEQUENCE_NAMES
    assert "enriched-elasticity" in SEQUENCE_NAMES
    assert run_sequence("homog-elast", 0).cohomology is None
    assert run_sequence("poly-hess", 2).name == "poly-hess"


def test_dims_csv():
    """One CSV row per slot"""
    report = verify_polynomial_complex("poly-elast", 4)
    stream = io.StringIO()
    write_dims_csv([report], stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == "name,r,slot,dim,rank_out,cohomology"
    assert lines[1] == "poly-elast,4,P_4 x V,105,99,6"
    assert len(lines) == 5


def test_reports_json():
    """Reports serialize with their verdicts"""
    report = verify_polynomial_complex("poly-hess", 2)
    data = json.loads(reports_to_json([report]))
    assert data[0]["name"] == "poly-hess"
    assert data[0]["verdicts"]["complex"] is True
