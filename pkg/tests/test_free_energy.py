import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multildp.errors import InvalidProfile, UnsupportedDimension, ValidationError
from multildp.free_energy import (
    MOBIUS_DENSITY,
    MOBIUS_PROFILE,
    BoundaryFreeEnergy,
    GeneralFreeEnergy,
    MobiusFreeEnergy,
    SeriesControl,
    SymmetricFreeEnergy,
    WeightedFreeEnergy,
    WeightProfile,
    asymptotic_free_energy,
    boundary_free_energy,
    chain_position,
    estimate_profile,
    finite_difference,
    finite_volume_free_energy,
    free_energy_derivative,
    log_cosh,
    mobius,
    mobius_free_energy,
    mobius_weight,
    symmetric_free_energy,
    weighted_free_energy,
)
from multildp.ising import chain_mgf_log
from multildp.lattice import decompose_box

GRID = np.round(np.arange(-3.0, 3.0 + 1e-9, 0.05), 10)
BIASES = [round(0.1 * k, 1) for k in range(1, 10)]


def second_differences(f, grid):
    vals = np.array([f(b) for b in grid])
    return vals[:-2] - 2 * vals[1:-1] + vals[2:]


# -- symmetric and general --------------------------------------------------------


def test_symmetric_examples():
    assert symmetric_free_energy(0.0) == 0.0
    assert symmetric_free_energy(1.0) == pytest.approx(0.4337808304830271, abs=1e-15)
    assert symmetric_free_energy(-1.0) == symmetric_free_energy(1.0)
    assert math.isfinite(symmetric_free_energy(800.0))
    assert symmetric_free_energy(800.0) == pytest.approx(800 - math.log(2), rel=1e-15)


@pytest.mark.parametrize("p", [(2, 3), (2, 1), (2, 3, 5), (3, 5, 7)])
def test_general_at_half_is_log_cosh(p):
    for b in GRID:
        value, tail = asymptotic_free_energy(0.5, p, b)
        assert abs(value - math.log(math.cosh(b))) <= 1e-10
        assert tail == 0.0


@pytest.mark.parametrize("r", BIASES)
@pytest.mark.parametrize("p", [(2, 3), (2, 1), (2, 3, 5)])
def test_general_zero_at_beta_zero(r, p):
    assert abs(asymptotic_free_energy(r, p, 0.0)[0]) <= 1e-10


def test_general_reference_value():
    assert asymptotic_free_energy(0.3, (2, 3), 0.5)[0] == pytest.approx(0.19577715180303049, abs=1e-13)


def test_general_matches_large_box():
    # N = (2048, 2187): the one-dimensional counts reach the full chain-length range of both axes
    value = asymptotic_free_energy(0.3, (2, 3), 0.5)[0]
    assert abs(finite_volume_free_energy((2048, 2187), (2, 3), 0.3, 0.5) - value) <= 5e-3
    assert abs(finite_volume_free_energy((2048, 2187), (2, 3), 0.3, 0.5) - value) <= 1e-9


def test_finite_volume_convergence():
    target = asymptotic_free_energy(0.3, (2, 3), 0.5)[0]
    gaps = [abs(finite_volume_free_energy((2 * 6**k, 2 * 6**k), (2, 3), 0.3, 0.5) - target) for k in (1, 2, 3)]
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.mark.parametrize("r", BIASES)
@pytest.mark.parametrize("p", [(2, 3), (2, 1), (2, 3, 5, 7, 11)])
def test_general_convexity(r, p):
    F = GeneralFreeEnergy(r, p)
    assert second_differences(F, GRID).min() >= -1e-9


@pytest.mark.parametrize("r", [0.1, 0.3, 0.7, 0.95])
def test_tail_honesty(r):
    for p in [(2, 3), (2, 1)]:
        short = GeneralFreeEnergy(r, p, SeriesControl(100))
        long = GeneralFreeEnergy(r, p, SeriesControl(200))
        for b in GRID:
            v100, tail = short.evaluate(b)
            assert abs(long.value(b) - v100) <= tail + 1e-15


def test_tail_bound_meaningful_short_series():
    F1 = GeneralFreeEnergy(0.2, (2, 1), SeriesControl(3))
    F2 = GeneralFreeEnergy(0.2, (2, 1), SeriesControl(400))
    for b in (-2.0, -0.5, 0.5, 2.0):
        v, tail = F1.evaluate(b)
        assert 0 < abs(F2.value(b) - v) <= tail


def test_general_derivative_vs_finite_difference():
    F = GeneralFreeEnergy(0.3, (2, 3))
    for b in np.linspace(-2, 2, 41):
        assert abs(F.derivative(b) - finite_difference(F, b)) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(-4, 4), st.sampled_from([(2, 3), (2, 1), (3, 5, 7)]))
def test_general_derivative_property(r, b, p):
    F = GeneralFreeEnergy(r, p)
    assert abs(F.derivative(b) - F.derivative_fd(b)) <= 1e-6
    assert -1.0 <= F.derivative(b) <= 1.0


def test_general_chain_sum_identity():
    # the asymptotic value equals the chain-density weighted sum of chain factors
    r, p, b = 0.35, (2, 3), -0.7
    P = 6
    dens = [(P - 1) ** 2 / P ** (ell + 1) for ell in range(1, 400)]
    direct = math.fsum(d * chain_mgf_log(b, r, ell) for ell, d in enumerate(dens, start=1))
    assert asymptotic_free_energy(r, p, b)[0] == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("beta", [-700.0, -100.0, 100.0, 700.0])
def test_general_extreme_beta_finite(beta):
    value, tail = asymptotic_free_energy(0.3, (2, 3), beta)
    assert math.isfinite(value) and math.isfinite(tail)


def test_series_control_validation():
    with pytest.raises(ValidationError):
        SeriesControl(0)


# -- finite volume ------------------------------------------------------------------


@pytest.mark.parametrize("N, p", [((12, 12), (2, 3)), ((7, 9), (2, 3)), ((5, 5, 5), (2, 3, 5))])
def test_finite_volume_symmetric(N, p):
    for b in GRID:
        assert abs(finite_volume_free_energy(N, p, 0.5, b) - math.log(math.cosh(b))) <= 1e-12


def test_finite_volume_matches_chain_walk():
    N, p, r, b = (20, 15), (2, 3), 0.3, 0.5
    chains = decompose_box(N, p)
    direct = math.fsum(chain_mgf_log(b, r, c.length) for c in chains) / 300
    assert finite_volume_free_energy(N, p, r, b) == pytest.approx(direct, abs=1e-14)


def test_finite_volume_example():
    assert finite_volume_free_energy((2, 2), (2, 3), 0.3, 0.5) == pytest.approx(0.19144746711824792, abs=1e-14)
    assert finite_volume_free_energy((2, 2), (2, 3), 0.3, 0.0) == 0.0


# -- weighted and Mobius -------------------------------------------------------------


def test_weighted_reductions():
    unit = WeightProfile((1.0,), (1.0,))
    pm = WeightProfile((1.0, -1.0), (0.5, 0.5))
    for b in GRID:
        assert weighted_free_energy(unit, b) == pytest.approx(math.log(math.cosh(b)), abs=1e-14)
        assert weighted_free_energy(pm, b) == pytest.approx(math.log(math.cosh(b)), abs=1e-14)


def test_mobius_examples():
    assert mobius_free_energy(0.0) == 0.0
    assert mobius_free_energy(1.0) == pytest.approx(0.2637071231153795, abs=1e-15)
    assert weighted_free_energy(MOBIUS_PROFILE, 1.0) == pytest.approx(0.2637071231153795, abs=1e-14)


def test_mobius_profile_consistency():
    for b in GRID:
        assert abs(weighted_free_energy(MOBIUS_PROFILE, b) - mobius_free_energy(b)) <= 1e-14


profiles = st.integers(1, 5).flatmap(
    lambda m: st.tuples(
        st.lists(st.floats(-3, 3), min_size=m, max_size=m, unique=True),
        st.lists(st.floats(0.01, 1), min_size=m, max_size=m),
    )
)


def _profile(raw):
    values, w = raw
    total = math.fsum(w)
    freqs = [x / total for x in w]
    freqs[-1] = 1.0 - math.fsum(freqs[:-1])
    return WeightProfile(values, freqs)


@settings(max_examples=100, deadline=None)
@given(profiles, st.floats(-3, 3))
def test_weighted_sign_flip_exact(raw, b):
    prof = _profile(raw)
    assert weighted_free_energy(prof, b) == weighted_free_energy(prof.flipped(), b)
    assert weighted_free_energy(prof, b) == weighted_free_energy(prof, -b)


@settings(max_examples=50, deadline=None)
@given(profiles)
def test_weighted_convex_and_derivative(raw):
    F = WeightedFreeEnergy(_profile(raw))
    assert second_differences(F, GRID).min() >= -1e-9
    for b in (-1.3, 0.2, 2.1):
        assert F.derivative(b) == pytest.approx(finite_difference(F, b), abs=1e-7)


def test_weighted_rejects_other_bias():
    with pytest.raises(ValidationError, match="commut"):
        WeightedFreeEnergy(MOBIUS_PROFILE, r=0.3)


@pytest.mark.parametrize(
    "values, freqs",
    [((1, 1), (0.5, 0.5)), ((1, 2), (0.6, 0.6)), ((1, 2), (-0.1, 1.1)), ((), ()), ((1,), (0.5, 0.5))],
)
def test_invalid_profiles(values, freqs):
    with pytest.raises(InvalidProfile):
        WeightProfile(values, freqs)


def test_symmetric_convexity():
    assert second_differences(symmetric_free_energy, GRID).min() >= -1e-9


# -- boundary ------------------------------------------------------------------------


def test_boundary_normalization():
    expected = -(5 / 6) * math.log(2)
    assert boundary_free_energy("bc2", (2, 3), 0.0)[0] == pytest.approx(expected, abs=1e-15)
    assert boundary_free_energy("bcp", (2, 3), 0.0)[0] == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(-0.5776226504666211, abs=1e-15)
    assert boundary_free_energy("bc1", (2, 3), 0.0)[0] == 0.0
    assert boundary_free_energy("free", (2, 3), 0.0)[0] == 0.0


def test_bc1_is_symmetric():
    for b in GRID:
        assert boundary_free_energy("bc1", (2, 3), b)[0] == pytest.approx(symmetric_free_energy(b), abs=1e-15)


@pytest.mark.parametrize("p", [(2, 3), (2, 1), (3, 5)])
def test_bcp_dominates_bc2(p):
    for b in GRID[GRID >= 0]:
        assert boundary_free_energy("bcp", p, b)[0] >= boundary_free_energy("bc2", p, b)[0]


def test_bcp_tail_honest():
    for b in GRID:
        v100, tail = boundary_free_energy("bcp", (2, 3), b, SeriesControl(100))
        v200, _ = boundary_free_energy("bcp", (2, 3), b, SeriesControl(200))
        assert abs(v200 - v100) <= tail + 1e-15
    v3, tail3 = boundary_free_energy("bcp", (2, 1), 2.0, SeriesControl(3))
    v_long, _ = boundary_free_energy("bcp", (2, 1), 2.0, SeriesControl(400))
    assert 0 < abs(v_long - v3) <= tail3


def test_bcp_derivative():
    F = BoundaryFreeEnergy("bcp", (2, 3))
    for b in np.linspace(-2.5, 2.5, 11):
        assert F.derivative(b) == pytest.approx(finite_difference(F, b), abs=1e-8)


def test_boundary_dimension_check():
    with pytest.raises(UnsupportedDimension):
        BoundaryFreeEnergy("bc2", (2, 3, 5))
    with pytest.raises(UnsupportedDimension):
        BoundaryFreeEnergy("bcp", (2, 3, 5))
    BoundaryFreeEnergy("bc1", (2, 3, 5))


# -- derivatives ---------------------------------------------------------------------


def test_derivative_examples():
    S = SymmetricFreeEnergy()
    assert free_energy_derivative(S, 0.0) == 0.0
    assert free_energy_derivative(S, 1.0) == pytest.approx(0.7615941559557649, abs=1e-15)
    assert free_energy_derivative(MobiusFreeEnergy(), 1.0) == pytest.approx(MOBIUS_DENSITY * math.tanh(1.0), abs=1e-15)
    assert free_energy_derivative(BoundaryFreeEnergy("bc2", (2, 3)), 1.0) == pytest.approx(math.tanh(1.0))
    # plain callables fall back to finite differences
    assert free_energy_derivative(lambda b: b**3, 2.0) == pytest.approx(12.0, abs=1e-8)


def test_log_cosh_vectorized():
    x = np.array([-800.0, -1.0, 0.0, 1e-8, 3.0])
    assert np.all(np.isfinite(log_cosh(x)))
    assert log_cosh(x)[3] == pytest.approx(0.5e-16, rel=1e-6)


# -- weight helpers ------------------------------------------------------------------


def test_mobius_function():
    assert [mobius(n) for n in range(1, 13)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]
    with pytest.raises(ValueError):
        mobius(0)


def test_chain_position():
    assert chain_position((1, 1), (2, 3)) == 0
    assert chain_position((4, 9), (2, 3)) == 2
    assert chain_position((8, 9), (2, 3)) == 2
    assert chain_position((8, 5), (2, 1)) == 3


def test_estimate_profile_mobius():
    with pytest.warns(UserWarning):
        prof = estimate_profile(mobius_weight((2, 3)), (60, 60), (2, 3))
    assert set(prof.values) <= {-1.0, 0.0, 1.0}
    assert math.fsum(prof.freqs) == pytest.approx(1.0, abs=1e-12)


def test_estimate_profile_constant_no_warning(recwarn):
    prof = estimate_profile(lambda site: 1.0, (30, 30), (2, 3))
    assert prof.values == (1.0,) and prof.freqs == (1.0,)
    assert not [w for w in recwarn if issubclass(w.category, UserWarning)]
