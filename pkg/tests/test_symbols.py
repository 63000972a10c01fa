import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from levymult.numerics import sphere_quadrature
from levymult.symbols import (
    AngularModulator,
    Beurling,
    Constant,
    Directional,
    GeneralL,
    LevyGauss,
    Mixed,
    RadialProfile,
    RieszPower,
    Stable,
    beurling_symbol,
    eval_general_symbol,
    eval_levy_gauss_symbol,
    eval_mixed_symbol,
    eval_stable_symbol,
    normalization_constant,
    radial_profile_from_density,
    relativistic_exponent,
    relativistic_profile,
    riesz_power_symbol,
    second_moment_matrices,
    stable_profile,
    symbol_from_json,
    symbol_to_json,
)

HARMONIC = AngularModulator.harmonic()
ONE = AngularModulator.constant(1.0)


def circle_power_integral(r, weight=lambda u: 1.0):
    """Independent 1-D oracle: ∫_0^{2π} |cos u|^r weight(u) du."""
    f = lambda u: abs(math.cos(u)) ** r * weight(u)
    pts = [math.pi / 2, 3 * math.pi / 2]
    return integrate.quad(f, 0, 2 * math.pi, points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)[0]


@pytest.fixture(scope="module")
def relativistic_profiles():
    return {a: relativistic_profile(a, 2) for a in (0.5, 1.0, 1.5)}


# -- normalization constant ------------------------------------------------


def test_normalization_n2_r2_is_pi():
    assert normalization_constant(2, 2.0) == pytest.approx(math.pi, rel=1e-14)


def test_normalization_small_r_tends_to_circle_length():
    assert normalization_constant(2, 1e-9) == pytest.approx(2 * math.pi, rel=1e-8)


def test_normalization_n3_r1_is_two_pi():
    assert normalization_constant(3, 1.0) == pytest.approx(2 * math.pi, rel=1e-14)


@given(st.floats(0.05, 30.0))
def test_normalization_matches_one_dimensional_integral(r):
    assert normalization_constant(2, r) == pytest.approx(circle_power_integral(r), rel=1e-9)


@given(st.floats(0.05, 30.0))
def test_normalization_n3_closed_integral(r):
    # ∫_{S²}|θ_1|^r dσ = 2π ∫_{-1}^{1}|t|^r dt = 4π/(r+1)
    assert normalization_constant(3, r) == pytest.approx(4 * math.pi / (r + 1), rel=1e-12)


# -- modulators -------------------------------------------------------------


def test_harmonic_default_is_conjugate_square():
    theta = np.array([[math.cos(0.3), math.sin(0.3)]])
    assert HARMONIC(theta)[0] == pytest.approx(cmath.exp(-0.6j))
    assert AngularModulator.harmonic(+1)(theta)[0] == pytest.approx(cmath.exp(0.6j))


def test_modulator_bounds_enforced():
    with pytest.raises(ValueError):
        AngularModulator.constant(1.5)
    with pytest.raises(ValueError):
        AngularModulator.expression(lambda t: 2 * t[:, 0], 2)
    rule = sphere_quadrature(2, 5)
    with pytest.raises(ValueError):
        AngularModulator.tabulated(rule, np.full(len(rule), 1.01))
    with pytest.raises(ValueError):
        AngularModulator.tabulated(rule, np.ones(3))


def test_tabulated_modulator_uses_nearest_node():
    rule = sphere_quadrature(2, 6)
    phi = AngularModulator.tabulated(rule, rule.nodes[:, 0])
    theta = rule.nodes[[5, 17]] + 1e-4
    assert np.allclose(phi(theta), rule.nodes[[5, 17], 0])


# -- stable / mixed ---------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_stable_with_unit_modulator_is_one(n):
    xi = np.random.default_rng(1).normal(size=(20, n))
    assert np.allclose(Stable(n, 1.7, ONE)(xi), 1.0, atol=1e-14)


def test_stable_r2_harmonic_at_first_axis():
    assert Stable(2, 2.0, HARMONIC)(np.array([1.0, 0.0])) == pytest.approx(0.5, abs=1e-13)


@given(st.floats(0.1, 60.0), st.floats(-math.pi, math.pi), st.floats(0.1, 100.0))
def test_stable_harmonic_is_scaled_beurling(r, alpha, radius):
    xi = radius * np.array([math.cos(alpha), math.sin(alpha)])
    value = Stable(2, r, HARMONIC)(xi)
    assert abs(value) == pytest.approx(r / (r + 2), abs=1e-11)
    assert value == pytest.approx(r / (r + 2) * cmath.exp(-2j * alpha), abs=1e-11)


def test_stable_harmonic_matches_one_dimensional_oracle():
    r = 3.3
    ratio = circle_power_integral(r, lambda u: math.cos(2 * u)) / circle_power_integral(r)
    assert eval_stable_symbol(np.array([2.0, 0.0]), r, HARMONIC).real == pytest.approx(ratio, abs=1e-12)


def test_tabulated_harmonic_on_product_rule():
    rule = sphere_quadrature(2, 10)
    phi = AngularModulator.tabulated(rule, HARMONIC(rule.nodes))
    assert eval_stable_symbol(np.array([0.0, 3.0]), 2.0, phi) == pytest.approx(-0.5, abs=1e-12)


def test_expression_modulator_n3():
    phi = AngularModulator.expression(lambda t: t[..., 2] ** 2, 3)
    # φ = θ_3², r = 2, ξ = e_1: ∫θ_1²θ_3² / ∫θ_1² = (4π/15)/(4π/3) = 1/5
    assert Stable(3, 2.0, phi)(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.2, abs=1e-10)


def test_stable_rejects_origin_and_bad_r():
    with pytest.raises(ValueError):
        eval_stable_symbol(np.zeros(2), 1.0, HARMONIC)
    with pytest.raises(ValueError):
        Stable(2, 0.0, HARMONIC)


def test_mixed_combines_phase_amplitudes():
    a1 = circle_power_integral(1.0)
    a3 = circle_power_integral(3.0)
    expected = (a1 / 3 + a3 * 3 / 5) / (a1 + a3)
    got = Mixed(2, 1.0, 3.0, 1.0, 1.0, HARMONIC)(np.array([1.0, 0.0]))
    assert got == pytest.approx(expected, abs=1e-12)


def test_mixed_with_zero_second_weight_reduces_to_stable():
    xi = np.array([[0.4, -1.2], [2.0, 0.3]])
    assert np.allclose(eval_mixed_symbol(xi, 1.5, 4.0, 2.0, 0.0, HARMONIC), eval_stable_symbol(xi, 1.5, HARMONIC))


def test_mixed_unit_modulator():
    assert Mixed(3, 0.5, 2.0, 1.0, 3.0, ONE)(np.array([1.0, 2.0, 3.0])) == pytest.approx(1.0, abs=1e-14)


def test_mixed_is_not_homogeneous():
    m = Mixed(2, 1.0, 3.0, 1.0, 1.0, HARMONIC)
    xi = np.array([1.0, 0.0])
    assert abs(m(0.01 * xi) - 1 / 3) < 1e-3
    assert abs(m(100 * xi) - 3 / 5) < 1e-3


# -- radial profiles and general symbols -------------------------------------


def test_zero_density_gives_zero_profile():
    prof = radial_profile_from_density(lambda r: np.zeros_like(r))
    assert np.all(prof(np.array([0.0, 0.5, 7.0])) == 0)


def test_zero_profile_general_symbol_raises():
    prof = radial_profile_from_density(lambda r: np.zeros_like(r))
    with pytest.raises(ZeroDivisionError):
        eval_general_symbol(np.array([1.0, 0.0]), prof, ONE)


def test_general_with_stable_profile_reproduces_stable():
    xi = np.random.default_rng(7).normal(size=(30, 2))
    r = 2.7
    got = GeneralL(2, stable_profile(r), HARMONIC)(xi)
    want = Stable(2, r, HARMONIC)(xi)
    assert np.max(np.abs(got - want)) < 1e-12


def test_stable_profile_derivative_is_odd():
    prof = stable_profile(1.5)
    assert prof.derivative(np.array([2.0]))[0] == pytest.approx(-1.5 * math.sqrt(2))
    assert prof.derivative(np.array([-2.0]))[0] == pytest.approx(1.5 * math.sqrt(2))


def test_alpha_one_stable_density_gives_linear_profile():
    prof = radial_profile_from_density(lambda r: r ** -2.0)
    x = np.array([0.1, 1.0, 10.0])
    assert np.allclose(prof.exact(x) / x, -math.pi / 2, rtol=1e-6)


def relativistic_closed_form(x, alpha):
    s = (1 - alpha) / 2
    if s == 0:
        return -0.5 * np.log1p(x * x)
    return special.gamma(s) * ((1 + x * x) ** (-s / 2) * np.cos(s * np.arctan(x)) - 1)


def relativistic_closed_derivative(x, alpha):
    # d/dx of Γ(s)[Re (1 - ix)^{-s} - 1] = Γ(s+1)·Re(i(1 - ix)^{-s-1})
    s = (1 - alpha) / 2
    return special.gamma(s + 1) * np.real(1j * (1 - 1j * x) ** (-s - 1))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_relativistic_profile_matches_closed_form(relativistic_profiles, alpha):
    prof = relativistic_profiles[alpha]
    x = np.geomspace(1e-3, 1e3, 25)
    assert np.allclose(prof(x), relativistic_closed_form(x, alpha), rtol=1e-7, atol=1e-14)
    assert np.allclose(prof.derivative(x), relativistic_closed_derivative(x, alpha), rtol=1e-6, atol=1e-12)


def test_relativistic_profile_is_even(relativistic_profiles):
    prof = relativistic_profiles[0.5]
    x = np.array([0.3, 4.0])
    assert np.allclose(prof(-x), prof(x))
    assert np.allclose(prof.derivative(-x), -prof.derivative(x))


def test_density_validation_rejects_nonintegrable():
    with pytest.raises(ValueError):
        radial_profile_from_density(lambda r: r ** -3.5)


def test_relativistic_exponent_examples():
    assert relativistic_exponent(np.zeros(2), 1.0) == 0
    assert relativistic_exponent(np.array([math.sqrt(3), 0.0]), 1.0, 1.0) == pytest.approx(1.0, abs=1e-14)


@given(st.floats(0.1, 1.9), st.floats(0.1, 5.0), st.floats(1e-6, 1e4))
def test_relativistic_exponent_properties(alpha, mass, radius):
    xi = np.array([radius, 0.0])
    v = relativistic_exponent(xi, alpha, mass)
    direct = (radius ** 2 + mass ** (2 / alpha)) ** (alpha / 2) - mass
    assert v >= 0
    assert v == pytest.approx(direct, rel=1e-9, abs=1e-12 * mass)


def test_relativistic_exponent_large_frequency_ratio():
    xi = np.array([1e8, 0.0])
    assert relativistic_exponent(xi, 1.3) / 1e8 ** 1.3 == pytest.approx(1.0, rel=1e-6)


# -- Lévy-Gauss ---------------------------------------------------------------


def test_second_moments_single_atom():
    A, B = second_moment_matrices([[1.0, 0.0]], [1.0], ONE)
    assert np.allclose(B, np.diag([1.0, 0.0]))
    assert np.allclose(A, B)


def test_second_moments_two_atoms_with_weight():
    psi = AngularModulator.expression(lambda t: t[..., 0] ** 2, 2)
    A, B = second_moment_matrices([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0], psi)
    assert np.allclose(A, np.diag([1.0, 0.0]))
    assert np.allclose(B, np.eye(2))


def test_levy_gauss_zero_density_equal_matrices_is_one():
    prof = radial_profile_from_density(lambda r: np.zeros_like(r))
    A, B = second_moment_matrices([[0.6, 0.8], [1.0, 0.0]], [1.0, 2.0], ONE)
    xi = np.array([[1.0, 2.0], [-0.3, 0.4]])
    assert np.allclose(eval_levy_gauss_symbol(xi, prof, ONE, A, B), 1.0)


def test_levy_gauss_without_gaussian_part_reduces_to_general():
    prof = stable_profile(1.5)
    xi = np.array([[1.0, 2.0], [-0.3, 0.4]])
    zero = np.zeros((2, 2))
    assert np.allclose(eval_levy_gauss_symbol(xi, prof, HARMONIC, zero, zero),
                       eval_general_symbol(xi, prof, HARMONIC), atol=1e-14)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_pure_gaussian_symbol_is_half_conjugate_beurling(a, b):
    if math.hypot(a, b) < 1e-3:
        return
    prof = radial_profile_from_density(lambda r: np.zeros_like(r))
    A = 0.5 * np.array([[1, 1j], [1j, -1]])
    xi = np.array([a, b])
    got = eval_levy_gauss_symbol(xi, prof, ONE, A, np.eye(2))
    assert got == pytest.approx(0.5 * np.conj(beurling_symbol(xi)), abs=1e-12)


def test_pure_gaussian_first_axis_value():
    sym = LevyGauss(2, radial_profile_from_density(lambda r: np.zeros_like(r)), ONE,
                    0.5 * np.array([[1, 1j], [1j, -1]]), np.eye(2))
    assert sym(np.array([1.0, 0.0])) == pytest.approx(0.5)


def test_levy_gauss_rejects_indefinite_b():
    with pytest.raises(ValueError):
        eval_levy_gauss_symbol(np.array([1.0, 0.0]), stable_profile(1.0), ONE, np.eye(2), np.diag([1.0, -1.0]))


def test_levy_gauss_mixed_components_bounded():
    A, B = second_moment_matrices([[1.0, 0.0]], [0.7], HARMONIC)
    sym = LevyGauss(2, stable_profile(1.2), HARMONIC, A, B)
    xi = np.random.default_rng(2).normal(size=(200, 2)) * 3
    assert np.max(np.abs(sym(xi))) <= 1 + 1e-12


# -- explicit symbols ---------------------------------------------------------


def test_beurling_examples():
    assert beurling_symbol(np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert beurling_symbol(np.array([0.0, 1.0])) == pytest.approx(-1.0)


def test_riesz_power_example():
    assert riesz_power_symbol(np.array([1.0, 1.0]), 1) == pytest.approx(0.5)
    assert RieszPower(3, 2)(np.array([1.0, 1.0, 0.0])) == pytest.approx(0.25)


def test_directional_symbol():
    d = Directional(2, 2.0, (0.6, 0.8))
    assert d(np.array([3.0, 4.0])) == pytest.approx(1.0)
    assert d(np.array([4.0, -3.0])) == pytest.approx(0.0)


def test_dc_value_at_origin():
    assert Constant(2, 0.25)(np.zeros(2)) == 0.25
    assert Stable(2, 1.0, HARMONIC, dc=0.5)(np.zeros((3, 2)))[1] == 0.5
    assert Beurling()(np.zeros(2)) == 0


# -- batch properties ---------------------------------------------------------

FAMILY_SAMPLES = [
    lambda: Stable(2, 0.7, HARMONIC),
    lambda: Stable(3, 5.0, AngularModulator.expression(lambda t: t[..., 0] * t[..., 1], 3)),
    lambda: Mixed(2, 0.5, 2.5, 1.0, 0.3, HARMONIC),
    lambda: GeneralL(2, stable_profile(1.9), HARMONIC),
    lambda: Beurling(),
    lambda: RieszPower(2, 3),
    lambda: Directional(3, 1.5, (0.0, 0.6, 0.8)),
]


@pytest.mark.parametrize("make", FAMILY_SAMPLES)
@given(xi=st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_families_are_bounded_even_and_batch_consistent(make, xi):
    sym = make()
    x = np.asarray(xi[: sym.n])
    if np.linalg.norm(x) < 1e-3:
        return
    v = sym(x)
    assert abs(v) <= 1 + 10 * sym.est_error + 1e-12
    assert sym(-x) == pytest.approx(v, abs=1e-10)
    assert sym(np.stack([x, 2 * x]))[0] == pytest.approx(v, abs=1e-14)


@pytest.mark.parametrize("make", [f for i, f in enumerate(FAMILY_SAMPLES) if i != 2])
@given(t=st.floats(1e-3, 1e3))
def test_non_mixed_families_are_degree_zero_homogeneous(make, t):
    sym = make()
    x = np.array([0.3, -1.1, 0.7][: sym.n])
    assert sym(t * x) == pytest.approx(sym(x), abs=1e-10)


# -- serialization ------------------------------------------------------------

ROUND_TRIP = [
    Constant(2, 0.5 - 0.25j),
    Beurling(),
    RieszPower(3, 2),
    Directional(2, 3.0, (0.0, 1.0)),
    Stable(2, 2.5, HARMONIC, level=10, dc=0.1),
    Stable(3, 1.0, AngularModulator.constant(-0.5, 3)),
    Mixed(2, 1.0, 2.0, 0.5, 1.5, AngularModulator.harmonic(+1)),
    GeneralL(2, stable_profile(1.3), HARMONIC),
    LevyGauss(2, stable_profile(1.0), ONE, np.eye(2) * 0.5j, np.eye(2)),
]


@pytest.mark.parametrize("sym", ROUND_TRIP, ids=lambda s: s.family)
def test_symbol_json_round_trip(sym):
    doc = json.loads(json.dumps(symbol_to_json(sym)))
    back = symbol_from_json(doc)
    assert back.family == sym.family
    assert symbol_to_json(back) == doc
    xi = np.array([[0.3, -0.8], [1.5, 2.0]]) if sym.n == 2 else np.array([[0.3, -0.8, 0.2]])
    assert np.allclose(back(xi), sym(xi), atol=1e-14)


def test_tabulated_modulator_round_trip():
    rule = sphere_quadrature(2, 6)
    phi = AngularModulator.tabulated(rule, np.exp(1j * np.arange(len(rule))))
    back = AngularModulator.from_json(json.loads(json.dumps(phi.to_json())), 2)
    assert np.allclose(back.table, phi.table)


def test_relativistic_profile_round_trip(relativistic_profiles):
    doc = RadialProfile.to_json(relativistic_profiles[1.0])
    assert doc == {"kind": "relativistic", "alpha": 1.0, "n": 2}


@pytest.mark.parametrize("doc", [
    {"family": "nope"},
    {"n": 2},
    {"family": "stable", "n": 2},
    {"family": "stable", "n": 2, "r": 1.0, "phi": {"kind": "weird"}},
    [1, 2],
])
def test_malformed_symbol_documents(doc):
    with pytest.raises(ValueError):
        symbol_from_json(doc)


def test_expression_modulator_not_serializable():
    with pytest.raises(ValueError):
        AngularModulator.expression(lambda t: t[..., 0], 2).to_json()


@pytest.mark.parametrize("scale", [1e-6, 1e6])
def test_large_exponents_stay_finite_far_from_unit_scale(scale):
    xi = np.array([[0.6, 0.8], [1.0, 0.0]]) * scale
    phi = AngularModulator.harmonic()
    stable = Stable(2, 150.0, phi)
    mixed = Mixed(2, 20.0, 150.0, 1.0, 1.0, phi)
    assert np.allclose(stable(xi), stable(xi / scale), atol=1e-12)
    # at large |ξ| the s-term dominates, at small |ξ| the r-term
    dominant = Stable(2, 150.0 if scale > 1 else 20.0, phi)
    assert np.allclose(mixed(xi), dominant(xi / scale), atol=1e-9)
