"""Spatial correlation matrices of channels and EMI on the RIS grid.

The (n, m) entry of a correlation matrix is the integral of the plane-wave
phase factor exp(j k . (u_n - u_m)) against an angular power density. For the
isotropic density the integral collapses to the closed form
sinc(2 ||u_n - u_m|| / lambda); for general densities it is evaluated by
quadrature.

The quadrature pairs the in-plane displacement (dx, dy) with the two
wave-vector components transverse to the propagation hemisphere's axis,
(2 pi / lambda) * (cos(theta) sin(phi), sin(theta)). With the angle domain
[-pi/2, pi/2)^2 this is the convention under which the isotropic integral
reproduces the sinc closed form (validated to machine precision in tests);
pairing the grid with the axial component instead would place it outside the
plane the hemisphere is referenced to.

Matrices are built as Gram forms R = (P * w) P^H with P[n, q] the phase factor
of element n at quadrature node q and w the density-weighted quadrature
weights, so they are PSD by construction up to round-off; hermitization and
eigenvalue clipping handle the round-off.
"""

from dataclasses import dataclass, field

import numpy as np

from .angular_density import isotropic_density

CLIP_RELATIVE = 1e-10

MATRIX_DUMP_HEADER = "# row-major correlation matrix; columns: row,col,real,imag"


@dataclass
class CorrelationMatrix:
    """Hermitian PSD correlation matrix with unit diagonal.

    entries is N x N complex; provenance records how it was built
    ("sinc-isotropic" or "quadrature(<density>)", possibly with an appended
    convergence warning). The eigendecomposition and square-root factor are
    computed lazily and cached.
    """

    entries: np.ndarray = field(repr=False)
    provenance: str = "unknown"
    _eig: tuple = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.entries.shape[0]

    def eig(self):
        """Clipped eigendecomposition (w, V), ascending eigenvalues.

        Eigenvalues in [-CLIP_RELATIVE * max, 0) are clipped to zero; an
        eigenvalue below that band means the matrix is not a correlation
        matrix (quadrature failure) and is rejected.
        """
        if self._eig is None:
            w, v = np.linalg.eigh(self.entries)
            wmax = float(w[-1])
            if wmax <= 0:
                raise ValueError("not a correlation matrix: no positive eigenvalue")
            if w[0] < -CLIP_RELATIVE * wmax:
                raise ValueError(
                    "not a correlation matrix: eigenvalue "
                    f"{w[0]:.3e} below -{CLIP_RELATIVE:g} * lambda_max"
                )
            self._eig = (np.clip(w, 0.0, None), v)
        return self._eig

    @property
    def sqrt_factor(self):
        """N x N factor L with L L^H = entries (to clipping precision)."""
        w, v = self.eig()
        return v * np.sqrt(w)

    def spectral_norm(self):
        return float(self.eig()[0][-1])


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def sinc_correlation(geometry):
    """Isotropic-scattering correlation: entries sinc(2 d_nm / lambda).

    sinc is the normalized sinc sin(pi x)/(pi x), so elements spaced at
    multiples of lambda/2 along a line decorrelate exactly.
    """
    pos = geometry.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    entries = np.sinc(2.0 * dist / geometry.wavelength)
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(entries=entries, provenance="sinc-isotropic")


def quadrature_correlation(geometry, density, rule, convergence_tol=None):
    """Correlation matrix of a density by tensor-product quadrature.

    Set convergence_tol to also recompute a probe of the widest-separation
    entries at doubled node count; if any probe entry moves by more than the
    tolerance, a warning is appended to the provenance (the matrix is still
    returned).
    """
    entries = _quadrature_entries(geometry, density, rule)
    provenance = f"quadrature({density.kind})"
    if convergence_tol is not None:
        shift = quadrature_probe_error(geometry, density, rule)
        if shift > convergence_tol:
            provenance += f" [warning: quadrature shift {shift:.2e} > {convergence_tol:g}]"
    return CorrelationMatrix(entries=entries, provenance=provenance)


def _phase_factors(positions, wavelength, rule):
    # Transverse wave-number components paired with the in-plane grid axes.
    k = 2.0 * np.pi / wavelength
    k1 = k * np.cos(rule.elevation) * np.sin(rule.azimuth)
    k2 = k * np.sin(rule.elevation)
    return np.exp(1j * (np.outer(positions[:, 0], k1) + np.outer(positions[:, 1], k2)))


def _quadrature_entries(geometry, density, rule):
    f = density.pdf(rule.azimuth, rule.elevation)
    w = rule.weight * f
    p = _phase_factors(geometry.positions, geometry.wavelength, rule)
    entries = _hermitize((p * w) @ p.conj().T)
    # The common diagonal value is the quadrature mass of the density; divide
    # it out so the diagonal is exactly 1 (a pure scaling, PSD preserved).
    mass = float(np.real(entries[0, 0]))
    if not np.isfinite(mass) or mass <= 0:
        raise ArithmeticError(f"quadrature produced nonpositive density mass {mass!r}")
    entries /= mass
    np.fill_diagonal(entries, 1.0)
    return entries


def quadrature_probe_error(geometry, density, rule, n_pairs=64):
    """Max entry shift between the rule and its doubled-resolution refinement.

    Only the n_pairs widest-separation element pairs are probed; those have
    the most oscillatory integrands and dominate the quadrature error.
    """
    from .angular_density import gauss_legendre_rule

    pos = geometry.positions
    n = pos.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    if iu.size == 0:
        return 0.0
    d2 = np.sum((pos[iu] - pos[ju]) ** 2, axis=1)
    order = np.argsort(d2)[::-1][:n_pairs]
    iu, ju = iu[order], ju[order]

    fine = gauss_legendre_rule(2 * rule.nodes_per_axis)
    vals = {}
    for r in (rule, fine):
        f = r.weight * density.pdf(r.azimuth, r.elevation)
        mass = float(np.sum(f))
        k = 2.0 * np.pi / geometry.wavelength
        k1 = k * np.cos(r.elevation) * np.sin(r.azimuth)
        k2 = k * np.sin(r.elevation)
        dx = pos[iu, 0] - pos[ju, 0]
        dy = pos[iu, 1] - pos[ju, 1]
        phase = np.exp(1j * (np.outer(dx, k1) + np.outer(dy, k2)))
        vals[r.nodes_per_axis] = (phase @ f) / mass
    return float(np.max(np.abs(vals[rule.nodes_per_axis] - vals[fine.nodes_per_axis])))


def sqrt_factor(corr):
    """Square-root factor L of a correlation matrix, L L^H = entries.

    Eigenvalues in [-1e-10 * lambda_max, 0) are clipped to zero before
    factorization; anything below that raises (the input is not a correlation
    matrix). Reconstruction is within 1e-8 relative Frobenius error.
    """
    return corr.sqrt_factor


@dataclass
class EffectiveCorrelationEstimate:
    """Monte Carlo estimate of the effective-channel correlation.

    entries estimates Rbar where E{g2 g2^H} = A*beta2*Rbar under the
    thermal-noise-optimal configuration. trace_over_n and spectral_norm are
    the finite-N diagnostics for the asymptotic regularity assumptions
    (reported, never pass/fail).
    """

    entries: np.ndarray = field(repr=False)
    n_samples: int = 0
    trace_over_n: float = 0.0
    spectral_norm: float = 0.0

    @property
    def dim(self):
        return self.entries.shape[0]


def estimate_effective_correlation(scenario, geometry, corr1, corr2, n_trials, seed):
    """Estimate Rbar = E{g2 g2^H} / (A beta2) by Monte Carlo.

    g2 is the effective channel under thermal-noise-optimal phases for fresh
    (h1, h2, h_d) draws. Trials are drawn from the per-trial tagged streams,
    so the estimate is reproducible from (seed, n_trials) alone.
    """
    from .channels import draw_trial
    from .snr import effective_channel, noise_optimal_phases

    if n_trials < 1000:
        raise ValueError(f"n_trials must be at least 1000, got {n_trials}")
    n = geometry.n_elements
    gammas = scenario.gamma_vector(n)
    l1 = corr1.sqrt_factor
    l2 = corr2.sqrt_factor
    acc = np.zeros((n, n), dtype=complex)
    block = []
    for t in range(n_trials):
        draw = draw_trial(scenario, l1, l2, seed, t)
        config = noise_optimal_phases(draw, gammas)
        block.append(effective_channel(config, draw.h2))
        if len(block) == 512 or t == n_trials - 1:
            g = np.stack(block, axis=1)
            acc += g @ g.conj().T
            block = []
    a_beta2 = scenario.element_area * scenario.beta2
    entries = _hermitize(acc / (n_trials * a_beta2))
    return EffectiveCorrelationEstimate(
        entries=entries,
        n_samples=n_trials,
        trace_over_n=float(np.real(np.trace(entries))) / n,
        spectral_norm=float(np.linalg.norm(entries, 2)),
    )


def write_matrix_csv(corr, path):
    """Dump a matrix to CSV for debugging: row, col, real, imag (row-major)."""
    entries = corr.entries if hasattr(corr, "entries") else np.asarray(corr)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MATRIX_DUMP_HEADER + "\n")
        fh.write("row,col,real,imag\n")
        n, m = entries.shape
        for i in range(n):
            for j in range(m):
                v = entries[i, j]
                fh.write(f"{i + 1},{j + 1},{float(v.real)!r},{float(v.imag)!r}\n")


def read_matrix_csv(path):
    """Read a matrix written by write_matrix_csv."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("row,"):
                continue
            i, j, re_part, im_part = line.strip().split(",")
            rows.append((int(i), int(j), float(re_part), float(im_part)))
    n = max(r[0] for r in rows)
    m = max(r[1] for r in rows)
    out = np.zeros((n, m), dtype=complex)
    for i, j, re_part, im_part in rows:
        out[i - 1, j - 1] = re_part + 1j * im_part
    return out
