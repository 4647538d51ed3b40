import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ris_emi.channels import ChannelDraw, LinkScenario, complex_normal, dbm_to_watt
from ris_emi.correlation import EffectiveCorrelationEstimate, sinc_correlation
from ris_emi.geometry import element_positions
from ris_emi.snr import (
    PhaseConfig,
    estimate_alpha,
    noise_optimal_phases,
    prop1_limit,
    prop2_limit,
    snr_no_emi,
    snr_with_emi,
)


def make_scenario(**overrides):
    base = dict(
        tx_power=dbm_to_watt(23.0),
        noise_power=dbm_to_watt(-114.0),
        element_area=6.25e-4,
        beta1=1e-8 / 6.25e-4,
        beta2=1e-7 / 6.25e-4,
        rho=100.0,
    )
    base.update(overrides)
    return LinkScenario(**base)


def random_draw(rng, n, beta_d=0.0):
    h_d = complex(math.sqrt(beta_d) * complex_normal(rng, ()))
    return ChannelDraw(
        h1=complex_normal(rng, n),
        h2=complex_normal(rng, n),
        h_d=h_d,
        trial_index=0,
        master_seed=0,
    )


def test_phase_config_wraps_phases():
    cfg = PhaseConfig(phases=np.array([-np.pi, 3 * np.pi]), amplitudes=np.ones(2))
    assert np.all(cfg.phases >= 0)
    assert np.all(cfg.phases < 2 * np.pi)
    np.testing.assert_allclose(cfg.phases, [np.pi, np.pi])


def test_phase_config_validates_amplitudes():
    with pytest.raises(ValueError):
        PhaseConfig(phases=np.zeros(2), amplitudes=np.array([0.5, 1.5]))
    with pytest.raises(ValueError):
        PhaseConfig(phases=np.zeros(2), amplitudes=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        PhaseConfig(phases=np.zeros(3), amplitudes=np.ones(2))


def test_reflection_coefficients():
    cfg = PhaseConfig(phases=np.array([0.0, np.pi / 2]), amplitudes=np.array([1.0, 0.5]))
    np.testing.assert_allclose(cfg.reflection_coefficients, [1.0, 0.5j], atol=1e-15)


@given(st.integers(min_value=0, max_value=10_000), st.booleans())
def test_alignment_identity(seed, with_direct):
    """The defining property of the thermal-noise optimum: every term of
    g2^H h1 + h_d lines up, so the modulus is the sum of moduli."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    draw = random_draw(rng, n, beta_d=1e-8 if with_direct else 0.0)
    gammas = rng.uniform(0.2, 1.0, n)
    cfg = noise_optimal_phases(draw, gammas)
    g2 = cfg.reflection_coefficients * draw.h2
    attained = abs(np.vdot(g2, draw.h1) + draw.h_d)
    target = float(np.sum(gammas * np.abs(draw.h1 * draw.h2))) + abs(draw.h_d)
    assert attained == pytest.approx(target, rel=1e-10)


def test_single_element_scalar_oracle():
    rng = np.random.default_rng(5)
    sc = make_scenario()
    draw = random_draw(rng, 1, beta_d=1e-9)
    corr = sinc_correlation(element_positions(1, sc.element_area, 0.1))
    phi = 0.7
    cfg = PhaseConfig(phases=np.array([phi]), amplitudes=np.array([0.9]))
    got = snr_with_emi(sc, cfg, draw, corr)

    g2 = 0.9 * np.exp(1j * phi) * draw.h2[0]
    signal = sc.tx_power * abs(np.conj(g2) * draw.h1[0] + draw.h_d) ** 2
    denom = sc.a_sigma2 * abs(g2) ** 2 + sc.noise_power
    assert got.snr_linear == pytest.approx(signal / denom, rel=1e-12)
    assert got.snr_db == pytest.approx(10 * math.log10(got.snr_linear))


def test_zero_emi_matches_closed_form():
    rng = np.random.default_rng(11)
    sc = make_scenario(rho=None, emi_intensity=0.0)
    draw = random_draw(rng, 16, beta_d=1e-8)
    corr = sinc_correlation(element_positions(16, sc.element_area, 0.1))
    gammas = np.ones(16)
    cfg = noise_optimal_phases(draw, gammas)
    via_emi_path = snr_with_emi(sc, cfg, draw, corr)
    assert via_emi_path.snr_linear == pytest.approx(
        snr_no_emi(sc, draw, gammas), rel=1e-12
    )
    assert via_emi_path.emi_term == 0.0


def test_snr_decreases_with_emi_intensity():
    rng = np.random.default_rng(2)
    draw = random_draw(rng, 16)
    corr = sinc_correlation(element_positions(16, 6.25e-4, 0.1))
    gammas = np.ones(16)
    cfg = noise_optimal_phases(draw, gammas)
    values = []
    for intensity in (0.0, 1e-12, 1e-10, 1e-8):
        sc = make_scenario(rho=None, emi_intensity=intensity)
        values.append(snr_with_emi(sc, cfg, draw, corr).snr_linear)
    assert values == sorted(values, reverse=True)
    assert values[0] > values[-1]


def test_noise_optimal_phases_beat_random_configs():
    rng = np.random.default_rng(17)
    sc = make_scenario(rho=None, emi_intensity=0.0)
    corr = sinc_correlation(element_positions(4, 6.25e-4, 0.1))
    draw = random_draw(rng, 4, beta_d=1e-9)
    gammas = np.ones(4)
    best = snr_no_emi(sc, draw, gammas)
    for _ in range(100):
        cfg = PhaseConfig(phases=rng.uniform(0, 2 * np.pi, 4), amplitudes=gammas)
        assert snr_with_emi(sc, cfg, draw, corr).snr_linear <= best * (1 + 1e-12)
    opt = noise_optimal_phases(draw, gammas)
    assert snr_with_emi(sc, opt, draw, corr).snr_linear == pytest.approx(
        best, rel=1e-12
    )


def test_degenerate_noise_free_scenario_raises():
    rng = np.random.default_rng(3)
    sc = make_scenario(noise_power=0.0, rho=None, emi_intensity=0.0)
    draw = random_draw(rng, 4)
    corr = sinc_correlation(element_positions(4, 6.25e-4, 0.1))
    cfg = noise_optimal_phases(draw, np.ones(4))
    with pytest.raises(ZeroDivisionError):
        snr_with_emi(sc, cfg, draw, corr)


def test_emi_term_infinite_without_thermal_noise():
    rng = np.random.default_rng(4)
    sc = make_scenario(noise_power=0.0, rho=None, emi_intensity=1e-10)
    draw = random_draw(rng, 4)
    corr = sinc_correlation(element_positions(4, 6.25e-4, 0.1))
    cfg = noise_optimal_phases(draw, np.ones(4))
    result = snr_with_emi(sc, cfg, draw, corr)
    assert result.emi_term == np.inf
    assert np.isfinite(result.snr_linear)


def test_prop1_limit_reference_value():
    sc = make_scenario()
    geo = element_positions(16, sc.element_area, 0.1)
    # (P/sigma_w^2) * (A beta1)(A beta2) * (pi/4)^2 with the standard params
    assert prop1_limit(sc, geo) == pytest.approx(0.0309157, rel=1e-4)


def test_prop2_limit_reference_value():
    sc = make_scenario()  # rho = 100
    assert prop2_limit(sc, 1.0) == pytest.approx(100 * (math.pi / 4) ** 2, rel=1e-12)
    assert prop2_limit(sc, 2.0) == pytest.approx(50 * (math.pi / 4) ** 2, rel=1e-12)


def test_prop2_limit_rejects_nonpositive_alpha():
    sc = make_scenario()
    with pytest.raises(ValueError, match="alpha"):
        prop2_limit(sc, 0.0)
    with pytest.raises(ValueError, match="alpha"):
        prop2_limit(sc, -0.5)


def test_estimate_alpha_identity_overlap():
    corr = sinc_correlation(element_positions(4, 6.25e-4, 0.1))
    est = EffectiveCorrelationEstimate(entries=np.eye(4, dtype=complex))
    # Rbar = I: alpha = tr(R)/N = 1 because R has unit diagonal
    assert estimate_alpha(corr, est) == pytest.approx(1.0, rel=1e-12)
    alpha, resid = estimate_alpha(corr, est, with_diagnostic=True)
    assert alpha == pytest.approx(1.0, rel=1e-12)
    assert abs(resid) < 1e-12


def test_estimate_alpha_weighted_diagonal():
    corr = sinc_correlation(element_positions(4, 6.25e-4, 0.1))
    weights = np.array([2.0, 0.0, 0.0, 0.0])
    est = EffectiveCorrelationEstimate(entries=np.diag(weights).astype(complex))
    assert estimate_alpha(corr, est) == pytest.approx(0.5, rel=1e-12)
