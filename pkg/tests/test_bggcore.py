import json
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from bggpoincare.bggcore import (BGGElement, TwistedElement, bgg_d, bgg_maps,
                                 bgg_poincare, builtin_diagram,
                                 cesaro_volterra_expected, check_cesaro_volterra,
                                 check_cochain_maps, check_complexified,
                                 check_diagram, check_proxy_agreement,
                                 check_twisted_lemma, check_twisted_proxies,
                                 complexify, diagram_from_json, diagram_to_json,
                                 element_from_json, element_from_proxy,
                                 element_to_json, element_to_proxy, f_iso,
                                 g_apply, homotopy_check_bgg,
                                 homotopy_check_twisted, operator_matrix,
                                 plain_d, plain_p, s_apply, t_apply, twisted_basis,
                                 twisted_d, twisted_family, twisted_from_proxies,
                                 twisted_poincare, twisted_to_proxies,
                                 upsilon_basis)
from bggpoincare.derham import (PoincareFamily, exterior_d, koszul_family,
                                koszul_poincare, proxy_operator)
from bggpoincare.forms import PolyForm, apply_value_map, proxy_map, random_form
from bggpoincare.ratpoly import Poly, random_poly

DIAGRAMS = ["hessian", "elasticity", "divdiv"]


def x(axis, n=3):
    return Poly.variable(n, axis)


def const(value, n=3):
    return Poly.constant(n, value)


def assert_all_passed(reports):
    for report in reports if isinstance(reports, list) else [reports]:
        assert report.passed, (report.identity, report.counterexample)
        assert report.checked > 0


def test_unknown_diagram():
    """Unknown builtin names raise ValueError"""
    with pytest.raises(ValueError):
        builtin_diagram("maxwell")


@pytest.mark.parametrize(
    "name, rows",
    [("elasticity", [0, 0, 1, 1]), ("hessian", [0, 1, 1, 1]), ("divdiv", [0, 0, 0, 1]), ("line", [0, 1])],
)
def test_upsilon_rows(name, rows):
    """The BGG fiber sits in a single row per degree"""
    diagram = builtin_diagram(name)
    assert [diagram.upsilon_row(i) for i in range(diagram.n + 1)] == rows


@pytest.mark.parametrize(
    "name, dims", [("elasticity", [3, 6, 6, 3]), ("hessian", [1, 6, 8, 3]), ("divdiv", [3, 8, 6, 1])]
)
def test_upsilon_dimensions(name, dims):
    """Fiber dimensions match the value spaces of the BGG complexes"""
    diagram = builtin_diagram(name)
    assert [len(diagram.upsilon_fiber_basis(i)) for i in range(4)] == dims


def test_diagram_from_generator_matrices():
    """Explicit generator matrices rebuild the hessian diagram"""
    data = {
        "name": "hessian",
        "n": 3,
        "rows": ["R", "V"],
        "generators": [[[["1", "0", "0"]], [["0", "1", "0"]], [["0", "0", "1"]]]],
    }
    diagram = diagram_from_json(data)
    builtin = builtin_diagram("hessian")
    for i in range(3):
        assert diagram.s_fiber(i) == builtin.s_fiber(i)
    assert diagram_from_json("elasticity") is builtin_diagram("elasticity")


E12 = [["0", "1", "0"], ["0", "0", "0"], ["0", "0", "0"]]
E21 = [["0", "0", "0"], ["1", "0", "0"], ["0", "0", "0"]]
ZERO = [["0"] * 3] * 3
IDENTITY = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]


def test_two_rows_accept_any_generators():
    """With two rows S.S lands below the last row, so nothing constrains the generators"""
    diagram = diagram_from_json({"n": 3, "rows": ["V", "V"], "generators": [[E12, E21, ZERO]]})
    assert_all_passed(check_diagram(diagram, 1))


def test_three_rows_reject_incompatible_generators():
    """S.S = 0 needs A_a B_b = A_b B_a; here the dx1^dx2 part is E11 - E22"""
    with pytest.raises(ValueError, match="S.S"):
        diagram_from_json({
            "n": 3, "rows": ["V", "V", "V"], "generators": [[E12, E21, ZERO], [E12, E21, ZERO]],
        })


def test_three_rows_with_compatible_generators():
    """Equal scalar generators in both transitions give S.S = 0"""
    diagram = diagram_from_json({
        "n": 3, "rows": ["V", "V", "V"],
        "generators": [[IDENTITY, IDENTITY, IDENTITY], [IDENTITY, IDENTITY, IDENTITY]],
    })
    assert diagram.height == 3
    assert_all_passed(check_diagram(diagram, 1))


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_diagram_json_with_s_matrices(name):
    """Writing S as matrices and reading it back gives the same operators"""
    builtin = builtin_diagram(name)
    diagram = diagram_from_json(json.loads(json.dumps(diagram_to_json(builtin))))
    assert diagram.generators is None
    for i in range(builtin.n + 1):
        assert diagram.s_fiber(i) == builtin.s_fiber(i)
    assert [diagram.upsilon_row(i) for i in range(diagram.n + 1)] == [
        builtin.upsilon_row(i) for i in range(builtin.n + 1)
    ]


def test_s_matrices_shape_and_count():
    """One matrix per degree below n, each sized by the fiber labels"""
    with pytest.raises(ValueError):
        diagram_from_json({"n": 1, "rows": ["R", "R"], "S": []})
    with pytest.raises(ValueError):
        diagram_from_json({"n": 1, "rows": ["R", "R"], "S": [[["0"]]]})
    with pytest.raises(ValueError):
        diagram_from_json({"n": 1, "rows": ["R", "R"], "S": [[["0", "1"]]], "generators": []})


def test_s_matrices_must_move_up_one_row():
    """S maps row j to row j-1 only"""
    with pytest.raises(ValueError, match="row j to row j-1"):
        diagram_from_json({"n": 1, "rows": ["R", "R"], "S": [[["0", "0"], ["1", "0"]]]})


def test_s_matrices_must_anticommute_with_d():
    """dx1 ^ in degree 0 without its degree-1 part breaks dS = -Sd"""
    s0 = [["0", "1"], ["0", "0"], ["0", "0"], ["0", "0"]]
    s1 = [["0"] * 4] * 2
    with pytest.raises(ValueError, match="d.S"):
        diagram_from_json({"n": 2, "rows": ["R", "R"], "S": [s0, s1]})
    s1 = [["0", "0", "0", "1"], ["0"] * 4]
    diagram = diagram_from_json({"n": 2, "rows": ["R", "R"], "S": [s0, s1]})
    assert_all_passed(check_diagram(diagram, 2))


def test_rows_must_be_orthonormal_spaces():
    """Rows are restricted to R, V and M"""
    with pytest.raises(ValueError):
        diagram_from_json({"n": 3, "rows": ["S", "V"], "generators": [[[["1"] * 3] * 6] * 3]})


def test_twisted_element_shape_checks():
    """Components must match the diagram rows and degree"""
    diagram = builtin_diagram("elasticity")
    with pytest.raises(ValueError):
        TwistedElement(diagram, 1, [PolyForm(3, 1, "V")])
    with pytest.raises(ValueError):
        TwistedElement(diagram, 1, [PolyForm(3, 1, "V"), PolyForm(3, 2, "V")])


def test_bgg_element_rejects_non_fiber():
    """A skew matrix field is not in the elasticity fiber of degree 1"""
    zero = Poly.zero(3)
    skew = ((zero, x(0), zero), (-x(0), zero, zero), (zero, zero, zero))
    with pytest.raises(ValueError):
        element_from_proxy(builtin_diagram("elasticity"), 1, skew)


def test_elasticity_twist_sign():
    """d_V(0, e1) = (-mskw(e1), 0) with row-wise proxies"""
    diagram = builtin_diagram("elasticity")
    zero = Poly.zero(3)
    u = twisted_from_proxies(diagram, 0, [(zero, zero, zero), (const(1), zero, zero)])
    first, second = twisted_to_proxies(twisted_d(u))
    mskw = apply_value_map(proxy_map("mskw", 3), (const(1), zero, zero))
    assert first == tuple(tuple(-p for p in row) for row in mskw)
    assert second == ((zero,) * 3,) * 3


def test_s_undefined_above_top_degree():
    """S has no meaning on (n+1)-forms"""
    diagram = builtin_diagram("line")
    u = TwistedElement.zero(diagram, 2)
    with pytest.raises(ValueError):
        s_apply(u)


def test_f_iso_direction_check():
    """Unknown F direction raises"""
    diagram = builtin_diagram("hessian")
    with pytest.raises(ValueError):
        f_iso(TwistedElement.zero(diagram, 1), "sideways")


def test_f_iso_inverts():
    """(I - PS) undoes the forward series"""
    diagram = builtin_diagram("elasticity")
    for u in upsilon_basis(diagram, 1, 1)[:10]:
        assert f_iso(f_iso(u), "inverse") == u.to_twisted()


def test_line_bgg_poincare_integrates_twice():
    """On the line, P(x^r dx) = x^(r+2) / ((r+1)(r+2))"""
    diagram = builtin_diagram("line")
    for r in range(5):
        u = element_from_proxy(diagram, 1, Poly.monomial((r,)))
        expected = Poly.monomial((r + 2,), Fraction(1, (r + 1) * (r + 2)))
        assert element_to_proxy(bgg_poincare(u)) == expected
        assert element_to_proxy(bgg_d(bgg_poincare(u))) == Poly.monomial((r,))


def test_cesaro_volterra_on_example():
    """P1(def w) for w = (x2^2, 0, 0)"""
    diagram = builtin_diagram("elasticity")
    zero = Poly.zero(3)
    w = (x(1) * x(1), zero, zero)
    strain = element_from_proxy(diagram, 1, proxy_operator("def", w))
    assert element_to_proxy(bgg_poincare(strain)) == cesaro_volterra_expected(w)
    assert cesaro_volterra_expected(w) == w


def test_hessian_operator_matrix_rank():
    """hess on quadratics has rank 10 - 4"""
    diagram = builtin_diagram("hessian")
    matrix = operator_matrix(bgg_d, upsilon_basis(diagram, 0, 2))
    assert matrix.shape[1] == 10
    assert matrix.rank() == 6


def test_element_json_round_trip():
    """Elements survive JSON serialization"""
    diagram = builtin_diagram("divdiv")
    u = upsilon_basis(diagram, 2, 1)[3]
    assert element_from_json(element_to_json(u)) == u.to_twisted()


def test_complexify_rejects_bad_samples():
    """A family violating the homotopy identity is refused"""
    broken = PoincareFamily(d=exterior_d, p=lambda u: koszul_poincare(u) * 2, name="broken")
    sample = PolyForm(3, 1, "R", {((0,), 0): x(1)})
    with pytest.raises(ValueError):
        complexify(broken, samples=[sample])


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_diagram_identities(name):
    """dS = -Sd and S.S = 0"""
    assert_all_passed(check_diagram(builtin_diagram(name), 2))


@pytest.mark.parametrize("name", DIAGRAMS)
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_twisted_homotopy(name, degree):
    """d_V P_V + P_V d_V = I and the intertwining lemma"""
    diagram = builtin_diagram(name)
    assert_all_passed(homotopy_check_twisted(diagram, degree, 2))
    assert_all_passed(check_twisted_lemma(diagram, degree, 2))


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_bgg_homotopy(name, degree):
    """D P + P D = I, D P D = D and the cochain maps"""
    diagram = builtin_diagram(name)
    if degree > diagram.n:
        pytest.skip("line diagram has degrees 0 and 1")
    assert_all_passed(homotopy_check_bgg(diagram, degree, 2))
    assert_all_passed(check_cochain_maps(diagram, degree, 2))


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_bgg_differentials_match_proxies(name):
    """D is def/inc/div, hess/curl/div, devgrad/symcurl/divdiv or d^2/dx^2"""
    assert_all_passed(check_proxy_agreement(builtin_diagram(name), 3))


def test_cesaro_volterra_suite():
    """P1(def w) = w - w(0) + 1/2 x^(curl w)(0) on monomial fields"""
    assert_all_passed(check_cesaro_volterra(3))


def test_twisted_proxy_formula():
    """(Pu + P(mskw(Pw)), Pw)"""
    assert_all_passed(check_twisted_proxies(2))


@pytest.mark.parametrize("name", DIAGRAMS)
@pytest.mark.parametrize("degree", [1, 2, 3])
def test_complexified_family(name, degree):
    """P~ P~ = 0 without breaking the homotopy identity"""
    assert_all_passed(check_complexified(builtin_diagram(name), degree, 2))


class TestRandomElasticity:
    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_def_then_poincare(self, seed):
        """Cesaro-Volterra on random displacement fields"""
        rng = np.random.default_rng(seed)
        w = tuple(random_poly(rng, 3, 3) for _ in range(3))
        diagram = builtin_diagram("elasticity")
        strain = element_from_proxy(diagram, 1, proxy_operator("def", w))
        assert element_to_proxy(bgg_poincare(strain)) == cesaro_volterra_expected(w)

    @given(st.sampled_from(DIAGRAMS), st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_bgg_d_matches_proxy(self, name, seed):
        """D^0 against the classical first operator on random fields"""
        rng = np.random.default_rng(seed)
        diagram = builtin_diagram(name)
        first = {"hessian": "hess", "elasticity": "def", "divdiv": "devgrad"}[name]
        if name == "hessian":
            field = random_poly(rng, 3, 3)
        else:
            field = tuple(random_poly(rng, 3, 3) for _ in range(3))
        u = element_from_proxy(diagram, 0, field)
        assert element_to_proxy(bgg_d(u)) == proxy_operator(first, field)

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_twisted_poincare_identity(self, seed):
        """d_V P_V + P_V d_V = I on random twisted 1-forms"""
        rng = np.random.default_rng(seed)
        diagram = builtin_diagram("elasticity")
        fields = [tuple(tuple(random_poly(rng, 3, 2, density=0.3) for _ in range(3)) for _ in range(3)) for _ in range(2)]
        u = twisted_from_proxies(diagram, 1, fields)
        assert twisted_d(twisted_poincare(u)) + twisted_poincare(twisted_d(u)) == u


def test_bgg_elements_support_arithmetic():
    """Sums and scalar multiples stay in the fiber"""
    diagram = builtin_diagram("hessian")
    a, b = upsilon_basis(diagram, 1, 1)[:2]
    assert isinstance(a + b, BGGElement)
    assert isinstance(a * Fraction(1, 2), BGGElement)
    assert (a - a).components == TwistedElement.zero(diagram, 1).components


def _rows(u):
    """Split a two-row element into its upper and lower parts"""
    return (
        TwistedElement.from_row(u.diagram, 0, u.components[0]),
        TwistedElement.from_row(u.diagram, 1, u.components[1]),
    )


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_two_row_f_is_one_step(name):
    """F = I + PS"""
    diagram = builtin_diagram(name)
    for degree in range(diagram.n):
        for u in twisted_basis(diagram, degree, 2):
            assert f_iso(u) == u + plain_p(s_apply(u))


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_two_row_twisted_poincare(name):
    """P_V = (P, -P(PS - SP); 0, P), which is (P, PSP; 0, P) because P.P = 0"""
    diagram = builtin_diagram(name)
    for degree in range(1, diagram.n + 1):
        for u in twisted_basis(diagram, degree, 2):
            _, lower = _rows(u)
            assert twisted_poincare(u) == plain_p(u) + plain_p(s_apply(plain_p(lower)))


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_two_row_g_is_minus_t(name):
    """T d T vanishes with two rows, leaving G = -T"""
    diagram = builtin_diagram(name)
    for degree in range(1, diagram.n + 1):
        for u in twisted_basis(diagram, degree, 1):
            assert g_apply(u) == -t_apply(u)


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_two_row_a(name):
    """A = (I, 0; Td, Pi_ker)"""
    diagram = builtin_diagram(name)
    for degree in range(diagram.n + 1):
        for u in twisted_basis(diagram, degree, 1):
            upper, lower = _rows(u)
            expected = upper + t_apply(plain_d(upper)) + lower - t_apply(s_apply(lower))
            assert bgg_maps(u, "A") == expected


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_two_row_b(name):
    """B = (Pi_ran_perp, 0; Pi_ker d T, Pi_ker)"""
    diagram = builtin_diagram(name)
    for degree in range(1, diagram.n + 1):
        for u in twisted_basis(diagram, degree, 1):
            upper, lower = _rows(u)
            second = lower + plain_d(t_apply(upper))
            expected = upper - s_apply(t_apply(upper)) + second - t_apply(s_apply(second))
            assert bgg_maps(u, "B").to_twisted() == expected


def test_bgg_maps_rejects_unknown_map():
    """Only A and B exist"""
    with pytest.raises(ValueError):
        bgg_maps(TwistedElement.zero(builtin_diagram("line"), 0), "C")


def test_complexified_koszul_is_unchanged():
    """The Koszul operator already squares to zero, so P~ = P"""
    rng = np.random.default_rng(5)
    samples = [random_form(rng, 3, k, "R", 3) for k in (1, 2, 3) for _ in range(3)]
    family = complexify(koszul_family(), samples=samples)
    for k in (1, 2, 3):
        for _ in range(5):
            u = random_form(rng, 3, k, "V", 3)
            assert family.p(u) == koszul_poincare(u)


@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_complexified_twisted_family(name, degree):
    """The modification applies to P_V as well"""
    diagram = builtin_diagram(name)
    if degree > diagram.n:
        pytest.skip("line diagram has degrees 0 and 1")
    reports = check_complexified(diagram, degree, 2, twisted=True)
    assert_all_passed(reports)
    assert reports[0].scope == f"twisted {name} (complexified)"


def test_twisted_family_sampling_catches_sign_errors():
    """P_V paired with d + S instead of d - S is refused"""
    family = twisted_family()
    flipped = PoincareFamily(
        d=lambda u: plain_d(u).to_twisted() + s_apply(u), p=family.p, name="flipped",
        degree_of=family.degree_of,
    )
    with pytest.raises(ValueError):
        complexify(flipped, samples=twisted_basis(builtin_diagram("elasticity"), 1, 1))


@pytest.mark.slow
@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_twisted_homotopy_to_degree_five(name):
    """d_V P_V + P_V d_V = I on every monomial element of degree <= 5"""
    diagram = builtin_diagram(name)
    for degree in range(diagram.n + 1):
        assert_all_passed(homotopy_check_twisted(diagram, degree, 5))


@pytest.mark.slow
@pytest.mark.parametrize("name", DIAGRAMS + ["line"])
def test_bgg_homotopy_to_degree_five(name):
    """D P + P D = I on the BGG fiber basis of degree <= 5"""
    diagram = builtin_diagram(name)
    for degree in range(diagram.n + 1):
        assert_all_passed(homotopy_check_bgg(diagram, degree, 5))


@pytest.mark.slow
@pytest.mark.parametrize("name", DIAGRAMS)
@pytest.mark.parametrize("degree", [2, 3])
def test_complexified_to_degree_four(name, degree):
    """P~ P~ = 0 on the BGG fiber basis of degree <= 4"""
    assert_all_passed(check_complexified(builtin_diagram(name), degree, 4))
