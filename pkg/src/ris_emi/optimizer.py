"""EMI-aware phase optimization and its relaxed upper bound.

With a negligible direct link the SNR is a generalized Rayleigh quotient over
the unit-modulus phase vector phi:

    SNR = (P/sigma_w^2) |phi^H a|^2 / (phi^H B phi + 1),
    a = Gamma^H H2^H h1,  B = (A sigma^2 / sigma_w^2) Gamma^H H2^H R H2 Gamma.

Writing C = B + (1/N) I and phibar = C^{1/2} phi turns the objective into
phibar^H D phibar with the rank-one D = C^{-1/2} a a^H C^{-1/2}, maximized by
projected gradient ascent: take a gradient step in the bar domain, project
back to unit modulus through C^{-1/2}, re-lift, repeat.

Dropping the unit-modulus constraint and the thermal noise gives the closed
form upper bound (P / (A sigma^2)) a^H M^+ a with M = Gamma^H H2^H R H2 Gamma.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .correlation import CLIP_RELATIVE
from .snr import PhaseConfig

DEFAULT_BETA_STEP = 0.5
DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_TOLERANCE = 1e-6
CONVERGENCE_WINDOW = 5
RANGE_RESIDUAL_TOL = 1e-6


@dataclass
class OptimizerProblem:
    """Reformulated SNR maximization data for one channel draw.

    Carries a, the scale P/sigma_w^2, and one of two equivalent
    representations of C = B + (1/N) I: the dense eigendecomposition of C, or
    the compressed eigenpairs (u, mu) of the low-rank B (every direction
    orthogonal to u has C-eigenvalue exactly 1/N). The low-rank form makes
    large-N trials affordable; both agree to working precision.
    """

    a: np.ndarray = field(repr=False)
    scale: float = 1.0
    n: int = 0
    amplitudes: np.ndarray = field(default=None, repr=False)
    b: np.ndarray = field(default=None, repr=False)
    _c_eigvals: np.ndarray = field(default=None, repr=False)
    _c_eigvecs: np.ndarray = field(default=None, repr=False)
    _u: np.ndarray = field(default=None, repr=False)
    _mu: np.ndarray = field(default=None, repr=False)

    def _dense(self):
        return self._c_eigvals is not None

    def c_half(self, x):
        if self._dense():
            v, w = self._c_eigvecs, self._c_eigvals
            return v @ (np.sqrt(w) * (v.conj().T @ x))
        base = np.sqrt(1.0 / self.n)
        if self._u.shape[1] == 0:
            return base * x
        coef = self._u.conj().T @ x
        return self._u @ ((np.sqrt(self._mu + 1.0 / self.n) - base) * coef) + base * x

    def c_minus_half(self, x):
        if self._dense():
            v, w = self._c_eigvecs, self._c_eigvals
            return v @ ((v.conj().T @ x) / np.sqrt(w))
        base = 1.0 / np.sqrt(1.0 / self.n)
        if self._u.shape[1] == 0:
            return base * x
        coef = self._u.conj().T @ x
        return self._u @ ((1.0 / np.sqrt(self._mu + 1.0 / self.n) - base) * coef) + base * x

    def b_quad(self, phi):
        """real(phi^H B phi)."""
        if self._dense():
            return float(np.real(np.vdot(phi, self.b @ phi)))
        if self._u.shape[1] == 0:
            return 0.0
        coef = self._u.conj().T @ phi
        return float(np.sum(self._mu * np.abs(coef) ** 2))

    def snr_of(self, phi):
        """SNR of a unit-modulus phase vector under this problem."""
        num = abs(np.vdot(phi, self.a)) ** 2
        return self.scale * num / (self.b_quad(phi) + 1.0)

    @property
    def d_vector(self):
        return self.c_minus_half(self.a)

    def d_matrix(self):
        """The rank-one matrix D = C^{-1/2} a a^H C^{-1/2} (tests only)."""
        d = self.d_vector
        return np.outer(d, d.conj())

    def c_matrix(self):
        """Dense C (tests only)."""
        if self._dense():
            v, w = self._c_eigvecs, self._c_eigvals
            return (v * w) @ v.conj().T
        eye = np.eye(self.n) / self.n
        if self._u.shape[1] == 0:
            return eye
        return (self._u * self._mu) @ self._u.conj().T + eye


@dataclass
class OptimizerResult:
    phases: PhaseConfig
    snr: float
    iterations: int
    converged: bool
    trajectory: np.ndarray = field(repr=False)


@dataclass
class RelaxedBoundResult:
    """Relaxed-bound value with its range diagnostic.

    unbounded is set when a has components outside range(M) beyond
    RANGE_RESIDUAL_TOL * ||a||: the relaxed quotient is then formally
    unbounded and value (the pseudo-inverse quadratic form) understates the
    supremum. The finite value is still what the bound curves report.
    """

    value: float
    range_residual: float
    unbounded: bool


def _problem_vectors(scenario, draw, amplitudes):
    gam = np.asarray(amplitudes, dtype=float)
    h2 = draw.h2
    if not np.any(h2):
        raise ValueError("degenerate problem: h2 is identically zero")
    if scenario.beta_d > 0 or draw.h_d != 0:
        warnings.warn(
            "EMI-aware optimization assumes a negligible direct link; "
            "ignoring h_d (treating beta_d as 0)",
            stacklevel=3,
        )
    a = gam * np.conj(h2) * draw.h1
    weight = scenario.a_sigma2 / scenario.noise_power
    scale = scenario.tx_power / scenario.noise_power
    return a, gam, weight, scale


def build_problem(scenario, draw, corr, amplitudes):
    """Dense problem: B formed explicitly, C eigendecomposed."""
    a, gam, weight, scale = _problem_vectors(scenario, draw, amplitudes)
    n = a.size
    gh2 = gam * draw.h2
    b = weight * (np.conj(gh2)[:, None] * corr.entries * gh2[None, :])
    b = 0.5 * (b + b.conj().T)
    c = b + np.eye(n) / n
    w, v = np.linalg.eigh(c)
    return OptimizerProblem(
        a=a,
        scale=scale,
        n=n,
        amplitudes=gam,
        b=b,
        _c_eigvals=w,
        _c_eigvecs=v,
    )


def weighted_correlation_decomposition(weights, corr):
    """Eigenpairs (u, mu) of M = diag(conj(weights)) R diag(weights).

    Built from the clipped square-root factor L of R: a thin QR of
    diag(conj(weights)) L followed by an r x r eigendecomposition of the
    triangular Gram. This is the per-draw setup shared by
    build_problem_factored and relaxed_upper_bound_factored; computing it
    once and passing it to both halves the per-trial cost at large N.
    """
    weights = np.asarray(weights, dtype=complex)
    n = weights.size
    w_r, v_r = corr.eig()
    keep = w_r > 0
    factor = v_r[:, keep] * np.sqrt(w_r[keep])
    vmat = np.conj(weights)[:, None] * factor
    if vmat.shape[1] == 0 or not np.any(vmat):
        return np.zeros((n, 0)), np.zeros(0)
    q, r_tri = np.linalg.qr(vmat)
    mu, w_small = np.linalg.eigh(r_tri @ r_tri.conj().T)
    return q @ w_small, mu


def build_problem_factored(scenario, draw, corr, amplitudes, decomposition=None):
    """Low-rank problem: B's nonzero eigenpairs from the correlation factor.

    B = (A sigma^2/sigma_w^2) M with M = diag(gamma conj(h2)) R
    diag(gamma h2), so B's eigenpairs come from
    weighted_correlation_decomposition and give C^{+-1/2} exactly on
    range(B) with the known 1/N shift on its complement. Pass a precomputed
    decomposition to share it with the relaxed bound.
    """
    a, gam, weight, scale = _problem_vectors(scenario, draw, amplitudes)
    n = a.size
    if decomposition is None:
        decomposition = weighted_correlation_decomposition(gam * draw.h2, corr)
    u, mu = decomposition
    mu = np.clip(weight * mu, 0.0, None)
    return OptimizerProblem(
        a=a, scale=scale, n=n, amplitudes=gam, _u=u, _mu=mu
    )


def power_iteration(matvec, x0, tol=1e-8, max_iterations=200):
    """Largest eigenvalue of a Hermitian PSD operator by power iteration."""
    x = np.asarray(x0, dtype=complex)
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0
    if not np.isfinite(norm):
        return float("nan")
    x = x / norm
    lam = 0.0
    for _ in range(max_iterations):
        y = matvec(x)
        ynorm = np.linalg.norm(y)
        if ynorm == 0:
            return 0.0
        if not np.isfinite(ynorm):
            return float("nan")
        lam_new = float(np.real(np.vdot(x, y)))
        x = y / ynorm
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            return lam_new
        lam = lam_new
    return lam


def projected_gradient(
    problem,
    beta_step=DEFAULT_BETA_STEP,
    init=None,
    max_iterations=DEFAULT_MAX_ITERATIONS,
    tolerance=DEFAULT_TOLERANCE,
):
    """Projected-gradient ascent on the reformulated SNR.

    Each iteration lifts the current unit-modulus phases to the bar domain
    (phibar = C^{1/2} phi), takes the gradient step
    phibar <- phibar + alpha D phibar with alpha = beta/lambda_max(D^H D),
    and projects back with phi = exp(j arg(C^{-1/2} phibar)). Stops when the
    relative SNR change stays below tolerance for CONVERGENCE_WINDOW
    consecutive iterations. Returns the best iterate visited; the initial
    point counts, so the result never falls below the initialization.
    """
    if not 0.0 <= beta_step <= 1.0:
        raise ValueError(f"beta_step must be in [0, 1], got {beta_step}")
    n = problem.n
    if init is None:
        # exp(j arg(a)) is the thermal-noise optimum in phi space.
        phi = np.exp(1j * np.angle(problem.a))
        amplitudes = (
            problem.amplitudes if problem.amplitudes is not None else np.ones(n)
        )
    else:
        phi = np.exp(1j * init.phases)
        amplitudes = init.amplitudes

    d = problem.d_vector
    dd = float(np.real(np.vdot(d, d)))
    lam_max = power_iteration(lambda x: d * (dd * np.vdot(d, x)), d)

    def result(phi_best, best, traj, iters, converged):
        return OptimizerResult(
            phases=PhaseConfig(phases=np.angle(phi_best), amplitudes=amplitudes),
            snr=best,
            iterations=iters,
            converged=converged,
            trajectory=np.asarray(traj),
        )

    best = problem.snr_of(phi)
    trajectory = [best]
    if lam_max == 0.0:
        # a = 0: the objective is identically zero and every phase is optimal.
        return result(phi, best, trajectory, 0, True)

    alpha = beta_step / lam_max
    phi_best = phi
    prev = best
    stall = 0
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        phibar = problem.c_half(phi)
        phibar = phibar + alpha * d * np.vdot(d, phibar)
        back = problem.c_minus_half(phibar)
        if not np.all(np.isfinite(back)):
            raise RuntimeError(
                f"nonfinite iterate at iteration {iterations} "
                f"(alpha={alpha:.3e}, lambda_max={lam_max:.3e})"
            )
        phi = np.exp(1j * np.angle(back))
        cur = problem.snr_of(phi)
        trajectory.append(cur)
        if cur > best:
            best = cur
            phi_best = phi
        if abs(cur - prev) <= tolerance * max(prev, np.finfo(float).tiny):
            stall += 1
            if stall >= CONVERGENCE_WINDOW:
                return result(phi_best, best, trajectory, iterations, True)
        else:
            stall = 0
        prev = cur
    return result(phi_best, best, trajectory, iterations, False)


def relaxed_upper_bound(a, m_matrix, scenario):
    """Closed-form bound (P/(A sigma^2)) a^H M^+ a of the relaxed problem.

    M^+ uses the PSD pseudo-inverse with relative eigenvalue cutoff 1e-10.
    The returned result flags the bound as unbounded when a is not in
    range(M) (projection residual above 1e-6 ||a||): the relaxed quotient
    then has no finite supremum and the value is the bound of the
    range-restricted component only.
    """
    if scenario.a_sigma2 <= 0:
        raise ValueError("relaxed bound requires positive EMI power")
    w, v = np.linalg.eigh(m_matrix)
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0:
        return RelaxedBoundResult(value=0.0, range_residual=1.0, unbounded=True)
    keep = w > CLIP_RELATIVE * wmax
    coef = v[:, keep].conj().T @ a
    value = (
        scenario.tx_power
        / scenario.a_sigma2
        * float(np.sum(np.abs(coef) ** 2 / w[keep]))
    )
    anorm = float(np.linalg.norm(a))
    resid = float(np.linalg.norm(a - v[:, keep] @ coef)) / anorm if anorm > 0 else 0.0
    return RelaxedBoundResult(
        value=value, range_residual=resid, unbounded=resid > RANGE_RESIDUAL_TOL
    )


def relaxed_upper_bound_factored(a, weights, corr, scenario, decomposition=None):
    """Same bound computed from the correlation factor (large-N fast path).

    weights is gamma * h2, so M = diag(conj(weights)) R diag(weights); its
    nonzero spectrum is that of the compressed r x r product, with the same
    relative cutoff semantics as the dense path. Pass a precomputed
    decomposition to share the factorization with build_problem_factored.
    """
    if scenario.a_sigma2 <= 0:
        raise ValueError("relaxed bound requires positive EMI power")
    if decomposition is None:
        decomposition = weighted_correlation_decomposition(weights, corr)
    u, mu = decomposition
    mumax = float(mu[-1]) if mu.size else 0.0
    if mumax <= 0:
        return RelaxedBoundResult(value=0.0, range_residual=1.0, unbounded=True)
    keep = mu > CLIP_RELATIVE * mumax
    coef = u[:, keep].conj().T @ a
    value = (
        scenario.tx_power
        / scenario.a_sigma2
        * float(np.sum(np.abs(coef) ** 2 / mu[keep]))
    )
    anorm = float(np.linalg.norm(a))
    resid = float(np.linalg.norm(a - u[:, keep] @ coef)) / anorm if anorm > 0 else 0.0
    return RelaxedBoundResult(
        value=value, range_residual=resid, unbounded=resid > RANGE_RESIDUAL_TOL
    )
