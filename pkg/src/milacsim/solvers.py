"""Sum-rate evaluation and WMMSE block-coordinate solvers.

Implements the low-complexity weighted-MMSE scheme for sum-rate maximization
under the analog-network beamforming constraint: the coupled
spectral-constraint set is split into a spectral-norm-ball variable Y and a
power vector p, updated by projected gradient descent and a KKT bisection
respectively, after reducing the problem from N x K to K x K via the
range-space property of the channel. A full-dimension variant (for
validating the subspace reduction), a classical Frobenius-ball digital
baseline, projection-based stationarity residuals, and a brute-force grid
oracle round out the module.

All solvers work on the normalized problem: the response-block scaling is
absorbed so that the noise power fed to them must be four times the physical
receiver noise power (the experiment layer performs this conversion from
SNR). Rates are base-2 logarithms (bits per channel use) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamsets import milac_membership_with_power
from .exceptions import RankDeficientChannelError

LOG2 = np.log(2.0)

# Bisection on the power-constraint multiplier runs to this relative width.
BISECT_RTOL = 1e-12
_BISECT_MAX_ITER = 200

# Numerical slack when counting monotonicity violations of the inner PGD.
_PGD_SLACK = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, iteration caps, budget, and normalized noise power.

    ``noise_var`` is the normalized noise (four times the physical receiver
    noise power; see the module docstring). ``eps_out`` bounds the relative
    change of the log-weight surrogate between outer iterations, ``eps_in``
    the relative iterate change of the inner projected gradient descent.
    """

    power_budget: float = 1.0
    noise_var: float = 1.0
    eps_out: float = 1e-6
    eps_in: float = 1e-6
    max_outer: int = 500
    max_inner: int = 2000

    def __post_init__(self):
        if self.power_budget <= 0:
            raise ValueError("power budget must be positive")
        if self.noise_var <= 0:
            raise ValueError("noise power must be positive")
        if self.eps_out <= 0 or self.eps_in <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass(frozen=True)
class ReducedChannel:
    """K x K compression of a full-row-rank K x N channel.

    ``hbar = H H^H`` (Hermitian positive definite) and ``hhat`` its principal
    square root. Every optimal beamformer lies in the range of H^H, so the
    solvers search over K x K variables and lift back with W = H^H X.
    """

    h: np.ndarray
    hbar: np.ndarray
    hhat: np.ndarray

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.h.shape[1]


@dataclass
class WmmseState:
    """Iterate of the block-coordinate solver plus its convergence traces.

    ``surrogate`` records sum(log2(omega)) after each weight update (equal to
    the sum rate at that point); ``mse_trace`` records the weighted-MSE
    objective after every block update and must be nonincreasing;
    ``pgd_violations`` counts inner descent steps that increased the
    subproblem objective (zero when the Lipschitz stepsize is honored).
    """

    u: np.ndarray
    omega: np.ndarray
    y: np.ndarray
    p: np.ndarray
    surrogate: list = field(default_factory=list)
    mse_trace: list = field(default_factory=list)
    pgd_violations: int = 0

    def mse_violations(self, rtol: float = 1e-9) -> int:
        """Count increases of the weighted-MSE objective along the trace."""
        trace = np.asarray(self.mse_trace)
        if trace.size < 2:
            return 0
        prev, cur = trace[:-1], trace[1:]
        return int(np.sum(cur > prev + rtol * np.maximum(1.0, np.abs(prev))))


@dataclass(frozen=True)
class SumRateResult:
    """Outcome of one solve: achieved rate, realized beamformer, diagnostics."""

    rate_bits: float
    w: np.ndarray
    iterations: int
    converged: bool
    stationarity: float
    state: WmmseState


def sum_rate(h: np.ndarray, w: np.ndarray, noise_var: float) -> float:
    """Sum of log2(1 + SINR_k) over users, in bits per channel use."""
    if noise_var <= 0:
        raise ValueError("noise power must be positive")
    t = np.asarray(h) @ np.asarray(w)
    gains = np.abs(t) ** 2
    signal = np.diagonal(gains)
    interference = gains.sum(axis=1) - signal
    return float(np.sum(np.log2(1.0 + signal / (interference + noise_var))))


def reduce_dimension(h: np.ndarray, rank_tol: float = 1e-10) -> ReducedChannel:
    """Form the K x K compressed channel and its principal square root.

    Rejects numerically rank-deficient channels (smallest eigenvalue of H H^H
    below ``rank_tol`` times the largest): reduced-rank compression is not
    supported, supply a full-row-rank channel.
    """
    h = np.asarray(h, dtype=complex)
    hbar = h @ h.conj().T
    hbar = 0.5 * (hbar + hbar.conj().T)
    evals, evecs = np.linalg.eigh(hbar)
    if evals[-1] <= 0 or evals[0] <= rank_tol * evals[-1]:
        raise RankDeficientChannelError(
            "channel is numerically rank deficient "
            f"(eig range [{evals[0]:.3e}, {evals[-1]:.3e}]); reduced-rank "
            "compression is unsupported, provide a full-row-rank channel"
        )
    hhat = (evecs * np.sqrt(np.maximum(evals, 0.0))) @ evecs.conj().T
    return ReducedChannel(h, hbar, hhat)


def lift_solution(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Map a reduced K x K solution back to the full N x K beamformer H^H X."""
    return np.asarray(h).conj().T @ np.asarray(x)


def spectral_ball_projection(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest matrix with spectral norm at most one (clip singular values)."""
    u, s, vh = np.linalg.svd(np.asarray(m, dtype=complex), full_matrices=False)
    return (u * np.minimum(s, 1.0)) @ vh


# ---------------------------------------------------------------------------
# Block-update kernels. All operate on the effective gain matrix t = C @ Y,
# where C is either the reduced square-root channel (K x K) or the full
# channel (K x N); the algebra is identical in both parametrizations.
# ---------------------------------------------------------------------------


def _kernel_update_u(t: np.ndarray, p: np.ndarray, noise_var: float) -> np.ndarray:
    """MMSE receive scalars: u_k = t_kk sqrt(p_k) / (sum_j |t_kj|^2 p_j + noise)."""
    den = (np.abs(t) ** 2) @ p + noise_var
    return np.diagonal(t) * np.sqrt(p) / den


def _kernel_update_omega(
    t: np.ndarray, p: np.ndarray, u: np.ndarray, noise_var: float | None = None
) -> np.ndarray:
    """Weights omega_k = (1 - u_k^* t_kk sqrt(p_k))^-1; equals 1 + SINR_k.

    The reciprocal form requires a fresh u (its real part is then the current
    MSE, in (0, 1]); a nonpositive real part signals a stale-u contract
    violation. Near-vanishing denominators fall back to the equivalent
    1 + SINR form when the noise power is supplied.
    """
    residual = 1.0 - np.conj(u) * np.diagonal(t) * np.sqrt(p)
    real = residual.real
    if np.any(real <= 0):
        raise ValueError(
            "weight update saw a nonpositive MSE; u is stale for the current (Y, p)"
        )
    omega = 1.0 / real
    if noise_var is not None:
        tiny = np.abs(residual) < 1e-14
        if np.any(tiny):
            gains = (np.abs(t) ** 2) * p
            signal = np.diagonal(gains)
            interference = gains.sum(axis=1) - signal
            omega = np.where(tiny, 1.0 + signal / (interference + noise_var), omega)
    return omega


def power_allocation(
    alpha: np.ndarray, beta: np.ndarray, power_budget: float
) -> tuple[np.ndarray, float]:
    """Maximize sum_k (2 alpha_k sqrt(p_k) - beta_k p_k) over the capped simplex.

    Stationarity gives p_k = alpha_k^2 / (beta_k + lam)^2 with lam = 0 when
    the unconstrained powers fit the budget, else lam the unique positive
    root of the budget equation, found by bisection. Negative alphas (only
    possible from stale iterates) are clamped to zero, which is the
    constrained maximizer for those coordinates. Returns (p, lam).
    """
    alpha = np.maximum(np.asarray(alpha, dtype=float), 0.0)
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < 0):
        raise ValueError("beta must be nonnegative")
    active = alpha > 0
    if not np.any(active):
        return np.zeros_like(alpha), 0.0

    with np.errstate(divide="ignore"):
        unconstrained = np.where(active, (alpha / np.where(beta > 0, beta, np.inf)) ** 2, 0.0)
        unbounded = active & (beta == 0)
    if not np.any(unbounded) and unconstrained.sum() <= power_budget:
        return unconstrained, 0.0

    def total(lam: float) -> float:
        return float(np.sum((alpha / (beta + lam)) ** 2))

    lo = 0.0
    hi = float(np.sqrt(np.sum(alpha**2) / power_budget))
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= BISECT_RTOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if total(mid) > power_budget:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return (alpha / (beta + lam)) ** 2, lam


def _pgd_spectral_ball(
    y: np.ndarray,
    q: np.ndarray,
    lmat: np.ndarray,
    p: np.ndarray,
    eps_in: float,
    max_inner: int,
) -> tuple[np.ndarray, int, int]:
    """Projected gradient descent for the quadratic subproblem in Y.

    Minimizes tr(diag(p) Y^H Q Y) - 2 Re tr(diag(p)^(1/2) L Y) over the
    spectral-norm ball with the Lipschitz stepsize 1/(||Q||_2 max_k p_k);
    the objective is nonincreasing at every step. Returns the iterate, the
    step count, and the number of (tolerated but counted) ascent steps.
    """
    pmax = float(np.max(p, initial=0.0))
    if pmax <= 0:
        return y, 0, 0
    qnorm = float(np.linalg.norm(q, 2))
    if qnorm <= 0:
        # Q = 0 forces L = 0 (both carry the receive scalars): nothing to do.
        return y, 0, 0
    eta = 1.0 / (qnorm * pmax)
    sqrt_p = np.sqrt(p)

    def objective(mat: np.ndarray) -> float:
        quad = float(np.real(np.einsum("ij,ij->", np.conj(mat), q @ mat * p)))
        lin = float(np.real(np.sum(sqrt_p * np.diagonal(lmat @ mat))))
        return quad - 2.0 * lin

    prev_obj = objective(y)
    violations = 0
    steps = 0
    for steps in range(1, max_inner + 1):
        grad = q @ y * p - lmat.conj().T * sqrt_p
        y_new = spectral_ball_projection(y - eta * grad)
        obj = objective(y_new)
        if obj > prev_obj + _PGD_SLACK * max(1.0, abs(prev_obj)):
            violations += 1
        prev_obj = obj
        denom = float(np.linalg.norm(y))
        rel = float(np.linalg.norm(y_new - y)) / max(denom, 1e-300)
        y = y_new
        if rel <= eps_in:
            break
    return y, steps, violations


# ---------------------------------------------------------------------------
# Public block updates on the reduced parametrization.
# ---------------------------------------------------------------------------


def update_u(state: WmmseState, reduced: ReducedChannel, noise_var: float) -> np.ndarray:
    """Receive-scalar block update for the current (Y, p)."""
    return _kernel_update_u(reduced.hhat @ state.y, state.p, noise_var)


def update_omega(
    state: WmmseState, reduced: ReducedChannel, noise_var: float | None = None
) -> np.ndarray:
    """Weight block update; requires a freshly updated u."""
    return _kernel_update_omega(reduced.hhat @ state.y, state.p, state.u, noise_var)


def update_p(
    state: WmmseState, reduced: ReducedChannel, power_budget: float
) -> np.ndarray:
    """Power block update via the KKT bisection."""
    t = reduced.hhat @ state.y
    alpha, beta = _alpha_beta(t, state.u, state.omega)
    p, _ = power_allocation(alpha, beta, power_budget)
    return p


def _alpha_beta(t, u, omega) -> tuple[np.ndarray, np.ndarray]:
    alpha = omega * np.real(np.conj(u) * np.diagonal(t))
    beta = (omega * np.abs(u) ** 2) @ (np.abs(t) ** 2)
    return alpha, beta


def y_subproblem_pgd(
    y: np.ndarray,
    q: np.ndarray,
    lmat: np.ndarray,
    p: np.ndarray,
    eps_in: float = 1e-6,
    max_inner: int = 2000,
) -> np.ndarray:
    """Solve the spectral-ball quadratic subproblem by projected gradient descent."""
    out, _, _ = _pgd_spectral_ball(
        np.asarray(y, dtype=complex), q, lmat, np.asarray(p, dtype=float),
        eps_in, max_inner,
    )
    return out


# ---------------------------------------------------------------------------
# Full solvers.
# ---------------------------------------------------------------------------


def _weighted_mse(t, p, u, omega, noise_var) -> float:
    """Objective sum_k (omega_k E_k - ln omega_k) of the weighted-MSE surrogate."""
    sqrt_p = np.sqrt(p)
    tdiag = np.diagonal(t)
    residual = np.abs(1.0 - np.conj(u) * tdiag * sqrt_p) ** 2
    leak = ((np.abs(t) ** 2) * p).sum(axis=1) - (np.abs(tdiag) ** 2) * p
    mse = residual + np.abs(u) ** 2 * (leak + noise_var)
    return float(np.sum(omega * mse - np.log(omega)))


def _wmmse_lc_engine(
    cmat: np.ndarray, cfg: SolverConfig, init=None
) -> tuple[WmmseState, int, bool]:
    """Shared block-coordinate loop over (u, omega, p, Y).

    ``cmat`` is the effective channel-like matrix: the K x K square-root
    channel for the reduced problem, or the K x N channel itself for the
    full-dimension variant. The ball variable has shape (cmat columns) x K.
    ``init`` optionally warm-starts (Y, p); both are re-projected onto their
    feasible sets before use.
    """
    k = cmat.shape[0]
    if init is None:
        y = cmat.conj().T / np.linalg.norm(cmat, 2)
        p = np.full(k, cfg.power_budget / k)
    else:
        y0, p0 = init
        y = spectral_ball_projection(np.asarray(y0, dtype=complex))
        if y.shape != (cmat.shape[1], k):
            raise ValueError(f"warm-start ball variable must be {cmat.shape[1]}x{k}")
        p = np.maximum(np.asarray(p0, dtype=float), 0.0)
        if p.sum() > cfg.power_budget:
            p = p * (cfg.power_budget / p.sum())
    state = WmmseState(u=np.zeros(k, dtype=complex), omega=np.ones(k), y=y, p=p)
    noise = cfg.noise_var

    t = cmat @ y
    prev_surrogate = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_outer + 1):
        state.u = _kernel_update_u(t, state.p, noise)
        state.mse_trace.append(_weighted_mse(t, state.p, state.u, state.omega, noise))

        state.omega = _kernel_update_omega(t, state.p, state.u, noise)
        state.mse_trace.append(_weighted_mse(t, state.p, state.u, state.omega, noise))
        surrogate = float(np.sum(np.log2(state.omega)))
        state.surrogate.append(surrogate)

        alpha, beta = _alpha_beta(t, state.u, state.omega)
        state.p, _ = power_allocation(alpha, beta, cfg.power_budget)
        state.mse_trace.append(_weighted_mse(t, state.p, state.u, state.omega, noise))

        weights = state.omega * np.abs(state.u) ** 2
        q = (cmat.conj().T * weights) @ cmat
        lmat = (state.omega * np.conj(state.u))[:, None] * cmat
        state.y, _, bad = _pgd_spectral_ball(
            state.y, q, lmat, state.p, cfg.eps_in, cfg.max_inner
        )
        state.pgd_violations += bad
        t = cmat @ state.y
        state.mse_trace.append(_weighted_mse(t, state.p, state.u, state.omega, noise))

        if prev_surrogate is not None:
            denom = max(abs(prev_surrogate), 1e-300)
            if abs(surrogate - prev_surrogate) <= cfg.eps_out * denom:
                converged = True
                break
        prev_surrogate = surrogate
    return state, iterations, converged


def wmmse_lc(h: np.ndarray, cfg: SolverConfig, init=None) -> SumRateResult:
    """Low-complexity WMMSE solver on the reduced K x K problem.

    Runs the (u, omega, p, Y) block loop against the square-root compressed
    channel, then lifts W = H^H Hbar^(-1/2) Y diag(p)^(1/2) back to full
    dimension. The returned beamformer is certified against the achievable
    set's positive-semidefinite membership test. ``init=(Y, p)`` warm-starts
    the blocks (e.g. from a neighbouring sweep point); default is the fresh
    scaled-channel initialization.
    """
    h = np.asarray(h, dtype=complex)
    reduced = reduce_dimension(h)
    state, iterations, converged = _wmmse_lc_engine(reduced.hhat, cfg, init)
    x = np.linalg.solve(reduced.hhat, state.y) * np.sqrt(state.p)
    w = lift_solution(x, h)
    if not milac_membership_with_power(w, state.p, tol=1e-8):
        raise RuntimeError("solver produced a beamformer outside the achievable set")
    residual = stationarity_residual(x, state.p, reduced, cfg, relative=False)
    return SumRateResult(
        rate_bits=sum_rate(h, w, cfg.noise_var),
        w=w,
        iterations=iterations,
        converged=converged,
        stationarity=residual,
        state=state,
    )


def wmmse_lc_fulldim(h: np.ndarray, cfg: SolverConfig, init=None) -> SumRateResult:
    """Same block scheme run on the full N x K ball variable, without reduction.

    Exists to validate the range-space property: it should match the reduced
    solver's rate on any full-row-rank instance, at much higher per-iteration
    cost for large antenna counts.
    """
    h = np.asarray(h, dtype=complex)
    state, iterations, converged = _wmmse_lc_engine(h, cfg, init)
    w = state.y * np.sqrt(state.p)
    residual = _projection_residual(h, state.y, state.p, cfg)
    return SumRateResult(
        rate_bits=sum_rate(h, w, cfg.noise_var),
        w=w,
        iterations=iterations,
        converged=converged,
        stationarity=residual,
        state=state,
    )


def digital_wmmse(h: np.ndarray, cfg: SolverConfig, init=None) -> SumRateResult:
    """Classical WMMSE baseline under the Frobenius power constraint.

    Same u/omega updates against the compressed channel; the beamformer
    block has the regularized closed form (M + mu I)^-1 L^H in square-root
    coordinates, with a bisection on the power multiplier mu. Runs entirely
    in the reduced K x K space and lifts with W = H^H X. ``init`` optionally
    warm-starts the reduced beamformer X (rescaled into the power budget).
    """
    h = np.asarray(h, dtype=complex)
    reduced = reduce_dimension(h)
    hbar, hhat = reduced.hbar, reduced.hhat
    k = reduced.n_users
    noise = cfg.noise_var

    if init is None:
        x = np.sqrt(cfg.power_budget / (k * np.linalg.norm(h, 2) ** 2)) * np.eye(k)
    else:
        x = np.asarray(init, dtype=complex)
        if x.shape != (k, k):
            raise ValueError(f"warm-start beamformer must be {k}x{k}")
        power = float(np.linalg.norm(hhat @ x) ** 2)
        if power > cfg.power_budget:
            x = x * np.sqrt(cfg.power_budget / power)
    state = WmmseState(
        u=np.zeros(k, dtype=complex), omega=np.ones(k), y=x, p=np.zeros(k)
    )
    t = hbar @ x
    prev_surrogate = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_outer + 1):
        den = (np.abs(t) ** 2).sum(axis=1) + noise
        state.u = np.diagonal(t) / den
        state.mse_trace.append(_digital_mse(t, state.u, state.omega, noise))

        residual = 1.0 - np.conj(state.u) * np.diagonal(t)
        state.omega = 1.0 / residual.real
        state.mse_trace.append(_digital_mse(t, state.u, state.omega, noise))
        surrogate = float(np.sum(np.log2(state.omega)))
        state.surrogate.append(surrogate)

        x = _digital_beamformer_update(
            hhat, state.u, state.omega, cfg.power_budget
        )
        t = hbar @ x
        state.mse_trace.append(_digital_mse(t, state.u, state.omega, noise))

        if prev_surrogate is not None:
            denom = max(abs(prev_surrogate), 1e-300)
            if abs(surrogate - prev_surrogate) <= cfg.eps_out * denom:
                converged = True
                break
        prev_surrogate = surrogate

    state.y = x
    w = lift_solution(x, h)
    state.p = np.linalg.norm(w, axis=0) ** 2
    residual = _digital_residual(reduced, x, cfg)
    return SumRateResult(
        rate_bits=sum_rate(h, w, cfg.noise_var),
        w=w,
        iterations=iterations,
        converged=converged,
        stationarity=residual,
        state=state,
    )


def _digital_mse(t, u, omega, noise_var) -> float:
    tdiag = np.diagonal(t)
    residual = np.abs(1.0 - np.conj(u) * tdiag) ** 2
    leak = (np.abs(t) ** 2).sum(axis=1) - np.abs(tdiag) ** 2
    mse = residual + np.abs(u) ** 2 * (leak + noise_var)
    return float(np.sum(omega * mse - np.log(omega)))


def _digital_beamformer_update(hhat, u, omega, power_budget) -> np.ndarray:
    """Exact beamformer block: minimize the weighted MSE under the power cap.

    In coordinates V = Hhat X the constraint is a Frobenius ball, and the
    minimizer is V(mu) = (M + mu I)^-1 Ltil^H with M = Hhat^H diag(c) Hhat;
    mu = 0 when the unconstrained solution fits, else found by bisection.
    """
    c = omega * np.abs(u) ** 2
    m = (hhat.conj().T * c) @ hhat
    ltil = (omega * np.conj(u))[:, None] * hhat
    evals, evecs = np.linalg.eigh(m)
    evals = np.maximum(evals, 0.0)
    b = evecs.conj().T @ ltil.conj().T
    row_power = (np.abs(b) ** 2).sum(axis=1)
    # Rows in the kernel of M have (mathematically) zero right-hand side;
    # scrub the roundoff so they do not fake an unbounded power.
    row_power[row_power < 1e-20 * max(float(row_power.sum()), 1.0)] = 0.0

    def power(mu: float) -> float:
        den = (evals + mu) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(row_power > 0, row_power / den, 0.0)
        return float(np.sum(terms))

    if power(0.0) <= power_budget:
        mu = 0.0
    else:
        lo, hi = 0.0, float(np.sqrt(row_power.sum() / power_budget))
        for _ in range(_BISECT_MAX_ITER):
            if hi - lo <= BISECT_RTOL * max(hi, 1e-300):
                break
            mid = 0.5 * (lo + hi)
            if power(mid) > power_budget:
                lo = mid
            else:
                hi = mid
        mu = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            (evals + mu)[:, None] > 0, b / (evals + mu)[:, None], 0.0
        )
    v = evecs @ scaled
    return np.linalg.solve(hhat, v)


# ---------------------------------------------------------------------------
# Stationarity residuals and the brute-force oracle.
# ---------------------------------------------------------------------------


def _rate_gradient_t(t: np.ndarray, p: np.ndarray, noise_var: float) -> tuple[np.ndarray, np.ndarray]:
    """Wirtinger gradient of the bit sum rate w.r.t. the gain matrix and p.

    Rate = sum_k log2(1 + p_k |t_kk|^2 / (sum_{j!=k} p_j |t_kj|^2 + noise)).
    Returns (d/d conj(T), d/dp).
    """
    gains = np.abs(t) ** 2
    s = gains * p
    total = s.sum(axis=1) + noise_var
    interf = total - np.diagonal(s)
    inv_total = 1.0 / total
    inv_interf = 1.0 / interf
    coef = inv_total[:, None] - inv_interf[:, None] * (
        1.0 - np.eye(t.shape[0], t.shape[1])
    )
    grad_t = (t * p) * coef / LOG2
    grad_p = (gains * coef).sum(axis=0) / LOG2
    return grad_t, grad_p


def _project_power(p: np.ndarray, power_budget: float) -> np.ndarray:
    """Euclidean projection onto the nonnegative capped simplex."""
    q = np.maximum(p, 0.0)
    if q.sum() <= power_budget:
        return q
    # Project onto the face sum = budget via the sorted-threshold rule.
    srt = np.sort(p)[::-1]
    csum = np.cumsum(srt)
    idx = np.arange(1, p.size + 1)
    theta = (csum - power_budget) / idx
    valid = srt - theta > 0
    rho = int(np.max(np.nonzero(valid)[0]))
    return np.maximum(p - theta[rho], 0.0)


def _split_residual(
    cmat: np.ndarray,
    y: np.ndarray,
    p: np.ndarray,
    cfg: SolverConfig,
    step: float,
    relative: bool,
) -> float:
    """Projected-ascent residual of the split-variable problem at (Y, p)."""
    t = cmat @ y
    grad_t, grad_p = _rate_gradient_t(t, p, cfg.noise_var)
    grad_y = cmat.conj().T @ grad_t
    y_next = spectral_ball_projection(y + step * grad_y)
    p_next = _project_power(p + step * grad_p, cfg.power_budget)
    move = np.sqrt(np.linalg.norm(y_next - y) ** 2 + np.linalg.norm(p_next - p) ** 2)
    residual = float(move / step)
    if relative:
        gnorm = np.sqrt(np.linalg.norm(grad_y) ** 2 + np.linalg.norm(grad_p) ** 2)
        return residual / max(gnorm, 1e-300)
    return residual


def stationarity_residual(
    x: np.ndarray,
    p: np.ndarray,
    reduced: ReducedChannel,
    cfg: SolverConfig,
    step: float = 1e-3,
    relative: bool = False,
) -> float:
    """First-order residual of a reduced-space point (X, p).

    Maps X to the split parametrization Y = Hhat X diag(p+)^(1/2), takes one
    projected gradient-ascent step of size ``step`` on (Y, p) (spectral-ball
    projection on Y, capped-simplex projection on p), and returns the
    distance moved divided by the step. Zero exactly at KKT points, for any
    positive step. With ``relative=True`` the residual is divided by the
    gradient norm.
    """
    x = np.asarray(x, dtype=complex)
    p = np.asarray(p, dtype=float)
    slack = 1e-6 * max(1.0, cfg.power_budget)
    if np.any(p < -slack) or p.sum() > cfg.power_budget + slack:
        raise ValueError("power vector is infeasible")
    inv_sqrt = np.where(p > 0, 1.0 / np.sqrt(np.where(p > 0, p, 1.0)), 0.0)
    y = (reduced.hhat @ x) * inv_sqrt
    if np.linalg.norm(y, 2) > 1.0 + 1e-6:
        raise ValueError("X is not representable with a unit-ball split variable")
    return _split_residual(reduced.hhat, y, np.maximum(p, 0.0), cfg, step, relative)


def _projection_residual(h, f, p, cfg, step: float = 1e-3) -> float:
    """Full-dimension analog of the stationarity residual, at (F, p)."""
    return _split_residual(h, f, p, cfg, step, relative=False)


def stationarity_residual_fulldim(
    w: np.ndarray,
    p: np.ndarray,
    h: np.ndarray,
    cfg: SolverConfig,
    step: float = 1e-3,
    relative: bool = False,
) -> float:
    """First-order residual of a full-dimension point (W, p), W = F diag(p)^(1/2)."""
    w = np.asarray(w, dtype=complex)
    p = np.asarray(p, dtype=float)
    inv_sqrt = np.where(p > 0, 1.0 / np.sqrt(np.where(p > 0, p, 1.0)), 0.0)
    f = w * inv_sqrt
    if np.linalg.norm(f, 2) > 1.0 + 1e-6:
        raise ValueError("W is not representable with a unit-ball response")
    return _split_residual(np.asarray(h, dtype=complex), f, np.maximum(p, 0.0), cfg, step, relative)


def _digital_residual(reduced, x, cfg, step: float = 1e-3) -> float:
    """Projected-ascent residual of the Frobenius-ball problem in V = Hhat X."""
    v = reduced.hhat @ x
    t = reduced.hhat @ v
    grad_t, _ = _rate_gradient_t(t, np.ones(reduced.n_users), cfg.noise_var)
    grad_v = reduced.hhat.conj().T @ grad_t
    v_step = v + step * grad_v
    vnorm = np.linalg.norm(v_step)
    cap = np.sqrt(cfg.power_budget)
    if vnorm > cap:
        v_step = v_step * (cap / vnorm)
    return float(np.linalg.norm(v_step - v) / step)


@dataclass(frozen=True)
class OracleGrid:
    """Resolution of the brute-force grid (angles and unit-interval axes)."""

    angle_points: int = 8
    axis_points: int = 7
    power_points: int = 9


def brute_force_oracle(
    h: np.ndarray,
    power_budget: float,
    noise_var: float,
    grid: OracleGrid | None = None,
) -> float:
    """Exhaustive grid search over the reduced feasible set (K <= 2 only).

    Parametrizes the ball variable by its SVD factors on discretized angles
    and singular values and the power split on a simplex grid, evaluating
    the exact sum rate at every feasible grid point. Returns the best value
    found, a lower bound on the optimum whose gap shrinks with resolution.
    """
    h = np.asarray(h, dtype=complex)
    grid = grid or OracleGrid()
    reduced = reduce_dimension(h)
    k = reduced.n_users
    if k > 2:
        raise ValueError("brute-force oracle supports at most two users")
    hhat = reduced.hhat

    if k == 1:
        gain = float(np.abs(hhat[0, 0]) ** 2)
        svals = np.linspace(0.0, 1.0, grid.axis_points)
        powers = np.linspace(0.0, power_budget, grid.power_points)
        snr = gain * np.outer(svals**2, powers) / noise_var
        return float(np.log2(1.0 + snr).max())

    quarter = np.linspace(0.0, np.pi / 2, grid.axis_points)
    full = np.linspace(0.0, 2.0 * np.pi, grid.angle_points, endpoint=False)
    svals = np.linspace(0.0, 1.0, grid.axis_points)
    shares = np.linspace(0.0, 1.0, grid.power_points)
    p_grid = np.stack([shares * power_budget, (1.0 - shares) * power_budget], axis=1)

    # Right factors diag(s) V^H, flattened over (psi, rho, s1, s2).
    cp = np.cos(quarter)[:, None]
    sp = np.sin(quarter)[:, None]
    er = np.exp(1j * full)[None, :]
    vh_all = np.empty((grid.axis_points, grid.angle_points, 2, 2), dtype=complex)
    vh_all[..., 0, 0] = cp
    vh_all[..., 0, 1] = sp / er
    vh_all[..., 1, 0] = -sp * er
    vh_all[..., 1, 1] = cp
    vh_all = vh_all.reshape(-1, 2, 2)
    s_pairs = np.stack(
        [a.ravel() for a in np.meshgrid(svals, svals, indexing="ij")], axis=1
    )
    right = s_pairs[:, None, :, None] * vh_all[None, :, :, :]  # (ns, nv, 2, 2)
    right = right.reshape(-1, 2, 2)
    sqrtp = np.sqrt(p_grid)  # (np, 2)

    best = 0.0
    for theta in quarter:
        ct, st = np.cos(theta), np.sin(theta)
        for pa in full:
            ea = np.exp(1j * pa)
            for pb in full:
                eb = np.exp(1j * pb)
                umat = np.array([[ct * ea, -st / eb], [st * eb, ct / ea]])
                hu = hhat @ umat
                base = np.einsum("im,nmj->nij", hu, right)  # (ncore, 2, 2)
                z = base[:, None, :, :] * sqrtp[None, :, None, :]
                gains = np.abs(z) ** 2
                sig = np.stack([gains[..., 0, 0], gains[..., 1, 1]], axis=-1)
                tot = gains.sum(axis=-1)
                rate = np.log2(1.0 + sig / (tot - sig + noise_var)).sum(axis=-1)
                cand = float(rate.max())
                if cand > best:
                    best = cand
    return best
