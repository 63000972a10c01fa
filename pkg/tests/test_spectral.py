import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levymult.numerics import gamma_ratio
from levymult.spectral import (
    GridField,
    GridSpec,
    apply_multiplier,
    beurling_identity_error,
    bound_factor,
    conjugate_exponent,
    estimate_lp_ratio,
    extremal_field,
    gaussian_bump,
    l2_operator_norm,
    lp_norm,
    standard_ensemble,
    symbol_on_grid,
    weak_l1_ratio,
)
from levymult.symbols import AngularModulator, Beurling, Constant, Directional, RieszPower, Stable

SPEC = GridSpec((32, 32), (2 * math.pi, 2 * math.pi))


def random_field(spec, seed):
    rng = np.random.default_rng(seed)
    return GridField(spec, rng.normal(size=spec.shape) + 1j * rng.normal(size=spec.shape))


@pytest.mark.parametrize("shape, box", [((7, 8), (1, 1)), ((6, 8), (1, 1)), ((8, 8), (1, 0)), ((8,), (1, 1))])
def test_grid_spec_validation(shape, box):
    with pytest.raises(ValueError):
        GridSpec(shape, box)


def test_grid_frequencies_are_lattice_points():
    spec = GridSpec((8, 16), (2.0, 4.0))
    freq = spec.frequencies()
    assert freq.shape == (8, 16, 2)
    assert freq[1, 0, 0] == pytest.approx(math.pi)
    assert freq[0, 1, 1] == pytest.approx(math.pi / 2)
    assert spec.cell_volume == pytest.approx(2 / 8 * 4 / 16)


def test_field_arithmetic():
    f, g = random_field(SPEC, 1), random_field(SPEC, 2)
    assert np.allclose((f + g - g).samples, f.samples)
    assert np.allclose(f.scaled(2j).samples, 2j * f.samples)
    with pytest.raises(ValueError):
        f + random_field(GridSpec((16, 16), (1, 1)), 3)


def test_constant_one_is_identity():
    f = random_field(SPEC, 0)
    out = apply_multiplier(f, Constant(2, 1.0))
    assert lp_norm(out - f, 2) <= 1e-13 * lp_norm(f, 2)


def test_plane_wave_is_eigenfunction():
    x = SPEC.coordinates()
    xi = np.array([3.0, -2.0])
    f = GridField(SPEC, np.exp(1j * x @ xi))
    out = apply_multiplier(f, Beurling())
    assert np.allclose(out.samples, (3 + 2j) / (3 - 2j) * f.samples, atol=1e-12)


def test_beurling_is_unitary_on_mean_free_fields():
    f = random_field(SPEC, 4)
    f = GridField(SPEC, f.samples - f.samples.mean())
    assert lp_norm(apply_multiplier(f, Beurling()), 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)


def test_lp_norm_examples():
    assert lp_norm(GridField(SPEC, np.zeros(SPEC.shape, complex)), 3) == 0
    half = np.zeros(SPEC.shape, complex)
    half[:16] = 1
    for p in (1, 2, 3.5):
        assert lp_norm(GridField(SPEC, half), p) == pytest.approx((SPEC.volume / 2) ** (1 / p))
    assert lp_norm(GridField(SPEC, 3 * half), math.inf) == 3


@given(st.floats(1.0, 20.0), st.floats(0.1, 10.0))
def test_lp_norm_is_homogeneous(p, c):
    f = random_field(SPEC, 5)
    assert lp_norm(f.scaled(c), p) == pytest.approx(c * lp_norm(f, p), rel=1e-12)


def test_lp_norm_rejects_small_p():
    with pytest.raises(ValueError):
        lp_norm(random_field(SPEC, 1), 0.5)


def test_operator_norm_examples():
    assert l2_operator_norm(Constant(2, 0.5j), SPEC) == pytest.approx(0.5)
    assert l2_operator_norm(Beurling(), SPEC) == pytest.approx(1.0)
    assert l2_operator_norm(Stable(2, 3.0, AngularModulator.harmonic()), SPEC) == pytest.approx(0.6, abs=1e-12)


def test_extremal_field_attains_operator_norm():
    m = Directional(2, 2.5, (0.6, 0.8))
    f = extremal_field(m, SPEC)
    ratio = lp_norm(apply_multiplier(f, m), 2) / lp_norm(f, 2)
    assert ratio == pytest.approx(l2_operator_norm(m, SPEC), abs=1e-12)


def test_symbol_on_grid_uses_dc():
    vals = symbol_on_grid(Stable(2, 1.0, AngularModulator.harmonic(), dc=0.3), SPEC)
    assert vals[0, 0] == 0.3


def test_conjugate_exponent():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(1.5) == pytest.approx(3)
    assert conjugate_exponent(4) == 4
    with pytest.raises(ValueError):
        conjugate_exponent(1)


def test_bound_factors():
    assert bound_factor("conjecture", 3) == 2
    assert bound_factor("beurling", 4) == 6
    assert bound_factor("thm-main", 2, n=2, r=3) == pytest.approx(gamma_ratio(3, 2))
    assert bound_factor("thm-second", 3, n=2, r=2) == pytest.approx(4 * 2)
    assert bound_factor("thm-second", 3, n=3, r=0.5) == pytest.approx(2)
    assert bound_factor("dpv-riesz", 4, k=4) == pytest.approx(4 ** 0.5 * 4)
    with pytest.raises(ValueError):
        bound_factor("other", 2)
    with pytest.raises(ValueError):
        bound_factor("thm-main", 2)


def test_constant_one_ratio_is_one():
    ens, meta = standard_ensemble(SPEC, seed=3)
    rep = estimate_lp_ratio(Constant(2, 1.0), 4, ens, meta=meta)
    assert rep.observed_ratio == pytest.approx(1.0, rel=1e-12)
    assert rep.passed
    assert rep.to_json()["meta"]["seed"] == 3


def test_beurling_p2_ratio_at_most_one():
    ens, _ = standard_ensemble(SPEC, seed=1)
    rep = estimate_lp_ratio(Beurling(), 2.0, ens, "conjecture")
    assert rep.observed_ratio <= 1 + 1e-12
    assert rep.passed


def test_beurling_p4_ratio_below_explicit_bound():
    spec = GridSpec((64, 64), (1.0, 1.0))
    ens, meta = standard_ensemble(spec, seed=7, p=4.0, random_fields=200)
    assert meta["size"] == 5 + 3 + 200 + 2
    rep = estimate_lp_ratio(Beurling(), 4.0, ens, "beurling", meta=meta)
    assert rep.observed_ratio <= 6
    assert rep.passed


def test_theorem_bound_reports_flag_unit_constants():
    ens, _ = standard_ensemble(SPEC, seed=0, random_fields=2)
    rep = estimate_lp_ratio(RieszPower(2, 2), 3.0, ens, "dpv-riesz", k=2)
    assert rep.meta["constants_set_to_one"]


def test_standard_ensemble_is_deterministic():
    a, _ = standard_ensemble(SPEC, seed=11, p=3)
    b, _ = standard_ensemble(SPEC, seed=11, p=3)
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a, b))


def test_weak_l1_ratio_examples():
    f = gaussian_bump(SPEC, 0.3)
    assert weak_l1_ratio(Constant(2, 0.0), f) == 0
    ratio = weak_l1_ratio(Constant(2, 1.0), f)
    assert 0 < ratio <= 1 + 1e-12


def test_beurling_identity_for_bump():
    spec = GridSpec((64, 64), (8 * math.pi, 8 * math.pi))
    assert beurling_identity_error(2.0, gaussian_bump(spec, 1.5), level=12) <= 1e-3
    assert beurling_identity_error(2.0, GridField(spec, np.zeros(spec.shape, complex))) == 0


def test_beurling_identity_for_band_limited_field():
    spec = GridSpec((64, 64), (1.0, 1.0))
    ens, _ = standard_ensemble(spec, seed=2, random_fields=4)
    assert beurling_identity_error(8.0, ens[-1], level=14) <= 1e-3


def test_gaussian_bump_is_periodized():
    f = gaussian_bump(SPEC, 0.5, center=(0.0, 0.0))
    assert abs(f.samples[0, 0]) == pytest.approx(1.0)
    assert abs(f.samples[1, 0]) == pytest.approx(abs(f.samples[-1, 0]))
