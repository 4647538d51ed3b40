"""End-to-end SNR of the RIS link, with and without EMI, plus scaling limits.

For a phase configuration with reflection coefficients gamma_n e^{j phi_n},
the effective channel is g2 = Theta h2 and the destination SNR is

    SNR = P |g2^H h1 + h_d|^2 / (A sigma^2 g2^H R g2 + sigma_w^2).

Against thermal noise alone the optimal phases align every reflected term
with the direct path, giving the closed form
SNRbar = (P/sigma_w^2) (sum_n gamma_n |h1n h2n| + |h_d|)^2.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PhaseConfig:
    """Unit-modulus phase shifts and amplitudes of the RIS elements."""

    phases: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        phases = np.mod(np.asarray(self.phases, dtype=float), 2.0 * np.pi)
        object.__setattr__(self, "phases", phases)
        amps = np.asarray(self.amplitudes, dtype=float)
        if amps.shape != phases.shape:
            raise ValueError("phases and amplitudes must have the same shape")
        if np.any(amps <= 0) or np.any(amps > 1):
            raise ValueError("amplitudes must lie in (0, 1]")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def reflection_coefficients(self):
        return self.amplitudes * np.exp(1j * self.phases)


@dataclass(frozen=True)
class SnrResult:
    snr_linear: float
    snr_db: float
    signal_term: float
    emi_term: float
    strategy: str = "custom"


def effective_channel(config, h2):
    """g2 with entries gamma_n e^{j phi_n} h2_n."""
    return config.reflection_coefficients * h2


def snr_with_emi(scenario, config, draw, corr):
    """SNR of one draw under the given configuration, EMI included."""
    g2 = effective_channel(config, draw.h2)
    signal = scenario.tx_power * abs(np.vdot(g2, draw.h1) + draw.h_d) ** 2
    quad = float(np.real(np.vdot(g2, corr.entries @ g2)))
    emi_power = scenario.a_sigma2 * quad
    denom = emi_power + scenario.noise_power
    if denom == 0:
        raise ZeroDivisionError(
            "degenerate scenario: zero thermal noise and zero EMI power"
        )
    snr = signal / denom
    emi_term = emi_power / scenario.noise_power if scenario.noise_power > 0 else np.inf
    return SnrResult(
        snr_linear=snr,
        snr_db=10.0 * np.log10(snr) if snr > 0 else -np.inf,
        signal_term=signal,
        emi_term=emi_term,
    )


def noise_optimal_phases(draw, amplitudes):
    """Phases phi_n = arg(h1n h2n*) - arg(h_d), the thermal-noise optimum.

    arg(0) is taken as 0, so with no direct path the phases reduce to
    arg(h1n h2n*). The configuration aligns every term of g2^H h1 + h_d on
    the direct path's phase, making the sum's modulus
    sum_n gamma_n |h1n h2n| + |h_d|.
    """
    phases = np.angle(draw.h1 * np.conj(draw.h2)) - np.angle(draw.h_d)
    return PhaseConfig(phases=phases, amplitudes=np.asarray(amplitudes, dtype=float))


def snr_no_emi(scenario, draw, amplitudes):
    """Maximized SNR with no EMI: (P/sigma_w^2)(sum gamma|h1 h2| + |h_d|)^2."""
    amp = float(np.sum(amplitudes * np.abs(draw.h1 * draw.h2))) + abs(draw.h_d)
    return scenario.tx_power / scenario.noise_power * amp**2


def prop1_limit(scenario, geometry):
    """Limit of SNRbar / N^2 under rich scattering.

    Equals (P/sigma_w^2) * beta1 * beta2 * (pi A / 4)^2.
    """
    a = geometry.element_area
    return (
        scenario.tx_power
        / scenario.noise_power
        * scenario.beta1
        * scenario.beta2
        * (np.pi * a / 4.0) ** 2
    )


def prop2_limit(scenario, alpha):
    """Limit of SNR / N when the EMI shares the channels' subspace.

    Equals (rho / alpha) * (pi/4)^2, with alpha the limiting normalized trace
    overlap of the effective-channel and EMI correlations. Requires alpha > 0;
    alpha <= 0 is the asymptotically-orthogonal regime where SNR grows as N^2
    and this limit does not apply.
    """
    if alpha <= 0:
        raise ValueError(
            f"alpha must be positive (got {alpha!r}); the SNR/N limit "
            "does not apply in the asymptotically orthogonal regime"
        )
    return scenario.rho / alpha * (np.pi / 4.0) ** 2


def estimate_alpha(corr, estimate, with_diagnostic=False):
    """Finite-N overlap alpha = (1/N) Re tr(Rbar_est R).

    The imaginary part of the trace is a Monte Carlo/round-off residual; pass
    with_diagnostic=True to get (alpha, imag_residual).
    """
    n = corr.dim
    tr = np.sum(estimate.entries * corr.entries.T)
    alpha = float(np.real(tr)) / n
    if with_diagnostic:
        return alpha, float(np.imag(tr)) / n
    return alpha
