"""Membership tests, decompositions, and constructions for beamforming-matrix sets.

Compares the set realizable by a lossless reciprocal analog network
(spectral-norm-bounded response times a per-stream power allocation) against
unconstrained digital beamforming and constant-modulus phase-shifter
beamforming, and provides the digital-achieving hybrid decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import ConvergenceError

# Relative slack used when validating set invariants at construction time.
_CHECK_RTOL = 1e-9

# Default eigenvalue tolerance for the positive-semidefinite membership test,
# applied relative to ||W||_2^2.
MEMBERSHIP_TOL = 1e-9

ENVELOPE_MAX_CUTS = 500


@dataclass(frozen=True)
class MilacBeamformer:
    """Beamformer realizable by a lossless reciprocal analog network.

    Pair (f, p): an N x K response with spectral norm at most one and a
    nonnegative power vector summing to at most the budget. The realized
    beamforming matrix is ``f @ diag(sqrt(p))``.
    """

    f: np.ndarray
    p: np.ndarray
    power_budget: float

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "p", p)
        if f.ndim != 2:
            raise ValueError("response must be a 2-D matrix")
        if p.shape != (f.shape[1],):
            raise ValueError("power vector length must match the column count")
        slack = _CHECK_RTOL * max(1.0, self.power_budget)
        if np.any(p < -slack):
            raise ValueError("powers must be nonnegative")
        if p.sum() > self.power_budget + slack:
            raise ValueError(
                f"total power {p.sum():.12g} exceeds budget {self.power_budget:.12g}"
            )
        norm = float(np.linalg.norm(f, 2)) if f.size else 0.0
        if norm > 1.0 + 1e-7:
            raise ValueError(f"response spectral norm {norm:.12g} exceeds 1")

    @property
    def w(self) -> np.ndarray:
        """Realized N x K beamforming matrix f diag(p)^(1/2)."""
        return self.f * np.sqrt(np.maximum(self.p, 0.0))


@dataclass(frozen=True)
class DigitalBeamformer:
    """Unconstrained digital beamformer under a Frobenius power budget."""

    w: np.ndarray
    power_budget: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        object.__setattr__(self, "w", w)
        if w.ndim != 2:
            raise ValueError("beamforming matrix must be 2-D")
        power = float(np.linalg.norm(w) ** 2)
        if power > self.power_budget * (1.0 + _CHECK_RTOL) + _CHECK_RTOL:
            raise ValueError(
                f"Frobenius power {power:.12g} exceeds budget {self.power_budget:.12g}"
            )


@dataclass(frozen=True)
class PhaseShifterMatrix:
    """Constant-modulus analog beamformer; every entry has modulus 1/sqrt(NK)."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        object.__setattr__(self, "phases", phases)
        if phases.ndim != 2:
            raise ValueError("phases must be an N x K matrix of angles")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")

    @property
    def w(self) -> np.ndarray:
        n, k = self.phases.shape
        return np.exp(1j * self.phases) / np.sqrt(n * k)


def milac_membership_with_power(
    w: np.ndarray, p: np.ndarray, tol: float = MEMBERSHIP_TOL
) -> bool:
    """Test whether diag(p) - W^H W is positive semidefinite (within tol).

    This certifies that W is realizable with the per-stream powers p;
    combined with sum(p) <= budget it certifies membership in the analog
    achievable set. The eigenvalue threshold is relative to ||W||_2^2.
    """
    w = np.asarray(w, dtype=complex)
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    gram = w.conj().T @ w
    slack = np.linalg.eigvalsh(np.diag(p) - gram)[0]
    scale = max(float(np.linalg.eigvalsh(gram)[-1].real), 1.0) if gram.size else 1.0
    return bool(slack >= -tol * scale)


def min_power_envelope(
    w: np.ndarray,
    tol: float = MEMBERSHIP_TOL,
    max_cuts: int = ENVELOPE_MAX_CUTS,
    gap_rtol: float = 1e-7,
) -> np.ndarray:
    """Minimize total power p subject to diag(p) >= W^H W.

    Cutting-plane scheme: starting from the diagonal necessary conditions
    p_i >= (W^H W)_ii, repeatedly take the minimum eigenpair (lam, v) of
    diag(p) - W^H W at the current LP solution, add the violated cut
    sum_i p_i |v_i|^2 >= v^H W^H W v, and re-solve the small LP. The LP value
    lower-bounds the optimum, and shifting the LP point by the violation
    (p + |lam| 1) gives a feasible certificate at most K|lam| above it, so
    iteration stops once that gap is below ``gap_rtol`` relative (or the
    violation itself is below ``tol``, relative to ||W||_2^2). The returned
    p* always satisfies lam_min(diag(p*) - W^H W) >= -tol; W is achievable
    at budget P iff sum(p*) <= P (within tolerance).
    """
    w = np.asarray(w, dtype=complex)
    k = w.shape[1]
    if k > 64:
        raise ValueError("envelope solver is capped at 64 columns")
    gram = w.conj().T @ w
    gram = 0.5 * (gram + gram.conj().T)
    scale = max(float(np.linalg.eigvalsh(gram)[-1].real), 1.0) if k else 1.0

    # Constraints a.p >= rhs stored as rows; linprog wants A_ub p <= b_ub.
    rows = [np.eye(k)[i] for i in range(k)]
    rhs = [max(gram[i, i].real, 0.0) for i in range(k)]
    cost = np.ones(k)
    best = None
    for _ in range(max_cuts):
        res = linprog(
            cost,
            A_ub=-np.asarray(rows),
            b_ub=-np.asarray(rhs),
            bounds=[(0.0, None)] * k,
            method="highs",
        )
        if not res.success:
            raise ConvergenceError(f"inner LP failed: {res.message}", best=best)
        p = res.x
        evals, evecs = np.linalg.eigh(np.diag(p) - gram)
        lam = float(evals[0])
        if lam >= -tol * scale:
            return p
        feasible = p + (-lam)
        if best is None or feasible.sum() < best.sum():
            best = feasible
        if k * (-lam) <= gap_rtol * max(1.0, float(p.sum())):
            return best
        v = evecs[:, 0]
        rows.append(np.abs(v) ** 2)
        rhs.append(max(float(np.real(v.conj() @ gram @ v)), 0.0))
    raise ConvergenceError(
        f"cutting-plane envelope did not certify within {max_cuts} cuts", best=best
    )


def decompose_milac(
    w: np.ndarray,
    p: np.ndarray,
    power_budget: float | None = None,
    tol: float = MEMBERSHIP_TOL,
) -> MilacBeamformer:
    """Split W into (F, p) with F = W diag(p+)^(1/2), where p+ inverts positive powers.

    Requires diag(p) >= W^H W; columns with zero power map to zero columns of
    F. The result satisfies F diag(p)^(1/2) = W and ||F||_2 <= 1.
    """
    w = np.asarray(w, dtype=complex)
    p = np.asarray(p, dtype=float)
    if not milac_membership_with_power(w, p, tol):
        raise ValueError("W^H W is not dominated by diag(p); cannot decompose")
    inv_sqrt = np.where(p > 0, 1.0 / np.sqrt(np.where(p > 0, p, 1.0)), 0.0)
    f = w * inv_sqrt
    # Roundoff can push the top singular value a hair past 1; renormalize it.
    norm = float(np.linalg.norm(f, 2)) if f.size else 0.0
    if norm > 1.0:
        f = f / norm
    if power_budget is None:
        power_budget = float(p.sum())
    return MilacBeamformer(f, p, power_budget)


def phase_shifter_matrix(phases: np.ndarray) -> PhaseShifterMatrix:
    """Build a constant-modulus beamformer from an N x K matrix of angles.

    Its Frobenius norm is exactly one, hence its spectral norm is at most
    one and it always lies inside the analog-network achievable response set.
    """
    mat = PhaseShifterMatrix(phases)
    norm = float(np.linalg.norm(mat.w, 2))
    if norm > 1.0 + 1e-9:
        raise AssertionError(f"constant-modulus matrix has spectral norm {norm}")
    return mat


def hybrid_digital_milac_decompose(
    dbf: DigitalBeamformer,
) -> tuple[np.ndarray, np.ndarray]:
    """Factor any power-feasible W as F P with semi-unitary F and K x K digital P.

    Via the SVD W = U D V^H: F is the first K left singular vectors and
    P = D_K V^H carries all the power (||P||_F^2 = ||W||_F^2). This realizes
    arbitrary digital beamformers with only K source chains feeding the
    analog network.
    """
    w = dbf.w
    n, k = w.shape
    if n < k:
        raise ValueError(f"need at least as many antennas as streams (N={n} < K={k})")
    u, s, vh = np.linalg.svd(w, full_matrices=True)
    f = u[:, :k]
    pmat = s[:, None] * vh
    return f, pmat


def sample_milac_boundary(
    n_antennas: int,
    n_users: int,
    rng: np.random.Generator | int,
    power_budget: float = 1.0,
) -> MilacBeamformer:
    """Draw a random achievable beamformer with ||F||_2 = 1 and full power use.

    Test-fixture generator for boundary points of the achievable set: a
    Gaussian matrix rescaled so its top singular value is one, paired with a
    Dirichlet power split summing to the budget.
    """
    if n_antennas < n_users:
        raise ValueError("boundary sampler assumes N >= K")
    gen = np.random.default_rng(rng)
    g = gen.standard_normal((n_antennas, n_users)) + 1j * gen.standard_normal(
        (n_antennas, n_users)
    )
    u, s, vh = np.linalg.svd(g, full_matrices=False)
    f = (u * (s / s[0])) @ vh
    norm = float(np.linalg.norm(f, 2))
    if norm > 1.0:
        f = f / norm
    p = power_budget * gen.dirichlet(np.ones(n_users))
    p = p * (power_budget / p.sum())
    return MilacBeamformer(f, p, power_budget)
