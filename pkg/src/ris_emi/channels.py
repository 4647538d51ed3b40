"""Link parameters and correlated channel/EMI sampling.

All powers are stored in watts; dB conversions happen only at config parsing.
Randomness follows a strict lineage: every (master_seed, trial_index,
variable_tag) triple derives its own independent generator, so any single
draw is reproducible in isolation and trials parallelize embarrassingly.
"""

from dataclasses import dataclass, field

import numpy as np

# Stream tags of the per-trial random variables.
STREAM_TAGS = {"h1": 0, "h2": 1, "hd": 2, "emi": 3}

RHO_CONSISTENCY_RTOL = 1e-9


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkScenario:
    """Scalar link parameters in SI units.

    beta1/beta2 are attenuation intensities in 1/m^2 (the configured
    quantities are the dimensionless products A*beta_i, as the attenuations
    are only ever used through them); beta_d is the direct-link variance
    (dimensionless); emi_intensity is sigma^2 in W/m^2; rho is the
    dimensionless ratio P*beta1/sigma^2. Exactly one of rho/emi_intensity may
    be omitted (None) and is derived from the other; if both are given they
    must agree to 1e-9 relative.

    gammas holds the element amplitudes in (0, 1]; a scalar broadcasts to any
    N via gamma_vector().
    """

    tx_power: float
    noise_power: float
    element_area: float
    beta1: float
    beta2: float
    beta_d: float = 0.0
    emi_intensity: float = None
    rho: float = None
    gammas: object = 1.0

    def __post_init__(self):
        if self.tx_power < 0 or self.noise_power < 0:
            raise ValueError("powers must be nonnegative")
        if self.element_area <= 0:
            raise ValueError("element_area must be positive")
        if self.beta1 < 0 or self.beta2 < 0 or self.beta_d < 0:
            raise ValueError("attenuation intensities must be nonnegative")
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if np.any(g <= 0) or np.any(g > 1):
            raise ValueError("amplitudes gamma must lie in (0, 1]")
        if self.emi_intensity is None and self.rho is None:
            raise ValueError("one of emi_intensity or rho must be given")
        if self.emi_intensity is None:
            derived = self.tx_power * self.beta1 / self.rho
            object.__setattr__(self, "emi_intensity", derived)
        elif self.rho is None:
            derived = (
                float("inf")
                if self.emi_intensity == 0
                else self.tx_power * self.beta1 / self.emi_intensity
            )
            object.__setattr__(self, "rho", derived)
        elif self.emi_intensity > 0:
            implied = self.tx_power * self.beta1 / self.emi_intensity
            if abs(implied - self.rho) > RHO_CONSISTENCY_RTOL * abs(self.rho):
                raise ValueError(
                    f"inconsistent rho: given {self.rho!r}, "
                    f"P*beta1/sigma^2 = {implied!r}"
                )
        if self.emi_intensity < 0:
            raise ValueError("emi_intensity must be nonnegative")

    @property
    def a_beta1(self):
        return self.element_area * self.beta1

    @property
    def a_beta2(self):
        return self.element_area * self.beta2

    @property
    def a_sigma2(self):
        return self.element_area * self.emi_intensity

    def gamma_vector(self, n):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if g.size == 1:
            return np.full(n, float(g[0]))
        if g.size != n:
            raise ValueError(f"gamma vector has size {g.size}, expected {n}")
        return g.copy()


def scenario_from_db(
    tx_power_dbm,
    noise_power_dbm,
    a_beta1_db,
    a_beta2_db,
    element_area,
    rho_db=None,
    beta_d_db=None,
    gamma=1.0,
):
    """Build a LinkScenario from the dB quantities used in configs.

    beta_d_db=None means no direct link (beta_d = 0). rho_db=None derives rho
    from an explicit EMI intensity, which this constructor does not take, so
    in practice rho_db is required here.
    """
    return LinkScenario(
        tx_power=dbm_to_watt(tx_power_dbm),
        noise_power=dbm_to_watt(noise_power_dbm),
        element_area=element_area,
        beta1=db_to_linear(a_beta1_db) / element_area,
        beta2=db_to_linear(a_beta2_db) / element_area,
        beta_d=0.0 if beta_d_db is None else db_to_linear(beta_d_db),
        rho=None if rho_db is None else db_to_linear(rho_db),
        gammas=gamma,
    )


@dataclass(frozen=True)
class ChannelDraw:
    """One trial's channel realizations with their seed lineage."""

    h1: np.ndarray = field(repr=False)
    h2: np.ndarray = field(repr=False)
    h_d: complex = 0j
    trial_index: int = 0
    master_seed: int = 0


def derive_stream(master_seed, trial_index, tag):
    """Independent generator for (master_seed, trial_index, tag)."""
    tag_id = STREAM_TAGS[tag]
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index, tag_id))
    return np.random.default_rng(ss)


def complex_normal(rng, size):
    """CN(0, 1) draws: real and imaginary parts independent N(0, 1/2)."""
    scale = np.sqrt(0.5)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_channel(variance_scale, sqrt_factor, rng):
    """Draw h ~ CN(0, variance_scale * R) via its square-root factor."""
    if variance_scale < 0:
        raise ValueError("variance_scale must be nonnegative")
    z = complex_normal(rng, sqrt_factor.shape[1])
    return np.sqrt(variance_scale) * (sqrt_factor @ z)


def sample_emi(scenario, sqrt_factor, rng):
    """Draw the EMI vector n ~ CN(0, A sigma^2 R)."""
    return sample_channel(scenario.a_sigma2, sqrt_factor, rng)


def sample_direct(beta_d, rng):
    """Draw the direct-path coefficient h_d ~ CN(0, beta_d)."""
    if beta_d < 0:
        raise ValueError("beta_d must be nonnegative")
    z = complex_normal(rng, ())
    return complex(np.sqrt(beta_d) * z)


def draw_trial(scenario, sqrt_factor1, sqrt_factor2, master_seed, trial_index):
    """Draw (h1, h2, h_d) for one trial from its tagged streams."""
    h1 = sample_channel(
        scenario.a_beta1, sqrt_factor1, derive_stream(master_seed, trial_index, "h1")
    )
    h2 = sample_channel(
        scenario.a_beta2, sqrt_factor2, derive_stream(master_seed, trial_index, "h2")
    )
    h_d = sample_direct(scenario.beta_d, derive_stream(master_seed, trial_index, "hd"))
    return ChannelDraw(
        h1=h1, h2=h2, h_d=h_d, trial_index=trial_index, master_seed=master_seed
    )
