"""Algebra of lossless, reciprocal multiport analog networks.

Conversions between the tunable admittance elements of a fully connected
(N+K)-port network, its admittance matrix Y, its scattering matrix, and the
N x K response block that maps the K input ports to the N antenna ports.
Also provides the constructive completion of a partial scattering matrix
from any feasible response block (spectral norm at most one), which is the
existence half of the achievability characterization used by the
beamforming-set module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleResponseError, SingularNetworkError

DEFAULT_Z0 = 50.0

# Reciprocal condition number below which Cayley-transform inverses are rejected.
RCOND_MIN = 1e-12

# Singular values below RANK_CUT * sigma_max are treated as exactly zero when
# building the diagonal sqrt(1 - sigma^2) blocks of the completion.
RANK_CUT = 1e-12


@dataclass(frozen=True)
class TunableAdmittances:
    """Tunable elements of a fully connected multiport network.

    ``ground[n]`` is the admittance (siemens) from port n to ground and
    ``coupling[n, j]`` for n < j the admittance between ports n and j; the
    lower triangle is implied by reciprocity and must be left zero. For a
    lossless reciprocal network every element is purely imaginary.
    """

    ground: np.ndarray
    coupling: np.ndarray
    reference_impedance: float = DEFAULT_Z0

    def __post_init__(self):
        ground = np.asarray(self.ground, dtype=complex)
        coupling = np.asarray(self.coupling, dtype=complex)
        object.__setattr__(self, "ground", ground)
        object.__setattr__(self, "coupling", coupling)
        n_ports = ground.shape[0]
        if ground.ndim != 1:
            raise ValueError("ground must be a vector, one entry per port")
        if coupling.shape != (n_ports, n_ports):
            raise ValueError(
                f"coupling must be {n_ports}x{n_ports} to match {n_ports} ports"
            )
        if np.any(np.tril(coupling) != 0):
            raise ValueError("coupling is stored in the strict upper triangle only")
        if self.reference_impedance <= 0:
            raise ValueError("reference impedance must be positive")

    @property
    def n_ports(self) -> int:
        return self.ground.shape[0]

    def largest_real_part(self) -> float:
        """Largest |real part| over all elements; zero for a lossless network."""
        return max(
            float(np.max(np.abs(self.ground.real), initial=0.0)),
            float(np.max(np.abs(self.coupling.real), initial=0.0)),
        )


@dataclass(frozen=True)
class AdmittanceMatrix:
    """Port-level admittance matrix of an (N+K)-port network, with the port split."""

    matrix: np.ndarray
    n_antennas: int
    n_users: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        p = self.n_antennas + self.n_users
        if matrix.shape != (p, p):
            raise ValueError(f"admittance matrix must be {p}x{p}, got {matrix.shape}")

    @property
    def n_ports(self) -> int:
        return self.n_antennas + self.n_users

    def symmetry_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.T))


@dataclass(frozen=True)
class ScatteringMatrix:
    """Scattering matrix of an (N+K)-port network, with the port split.

    Ports 1..K are the source inputs and ports K+1..K+N the antenna outputs.
    Lossless networks have unitary theta, reciprocal networks symmetric theta.
    """

    theta: np.ndarray
    n_antennas: int
    n_users: int

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=complex)
        object.__setattr__(self, "theta", theta)
        p = self.n_antennas + self.n_users
        if theta.shape != (p, p):
            raise ValueError(f"scattering matrix must be {p}x{p}, got {theta.shape}")

    @property
    def n_ports(self) -> int:
        return self.n_antennas + self.n_users


@dataclass(frozen=True)
class MilacResponse:
    """Normalized N x K input-to-antenna response block of the network.

    This is the full off-diagonal scattering block; the physical response is
    half of it, a factor absorbed into the noise normalization downstream.
    A lossless reciprocal network always yields spectral norm at most one.
    """

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        object.__setattr__(self, "f", f)
        if f.ndim != 2:
            raise ValueError("response block must be a 2-D matrix")

    @property
    def n_antennas(self) -> int:
        return self.f.shape[0]

    @property
    def n_users(self) -> int:
        return self.f.shape[1]


@dataclass(frozen=True)
class NetworkReport:
    """Losslessness / reciprocity diagnostic for a scattering matrix."""

    symmetric_defect: float
    unitary_defect: float
    passed: bool


def admittances_to_matrix(
    elems: TunableAdmittances, n_antennas: int, n_users: int
) -> AdmittanceMatrix:
    """Assemble the port admittance matrix from the tunable elements.

    Off-diagonal entries are the negated coupling admittances; each diagonal
    entry is the ground admittance of that port plus the sum of all couplings
    incident on it. The result is exactly symmetric by construction.
    """
    p = n_antennas + n_users
    if elems.n_ports != p:
        raise ValueError(
            f"element set has {elems.n_ports} ports, expected {p} (= N + K)"
        )
    coupling = elems.coupling
    y = -(coupling + coupling.T)
    incident = coupling.sum(axis=1) + coupling.sum(axis=0)
    np.fill_diagonal(y, elems.ground + incident)
    return AdmittanceMatrix(y, n_antennas, n_users)


def matrix_to_admittances(
    ymat: AdmittanceMatrix, tol: float = 1e-8
) -> TunableAdmittances:
    """Recover the tunable elements from a (symmetric) admittance matrix.

    Inverse of :func:`admittances_to_matrix`; rejects matrices whose symmetry
    defect exceeds ``tol`` relative to the matrix norm.
    """
    y = ymat.matrix
    scale = max(float(np.linalg.norm(y)), 1e-300)
    if ymat.symmetry_defect() > tol * scale:
        raise ValueError(
            f"admittance matrix is not symmetric within tolerance "
            f"(defect {ymat.symmetry_defect():.3e}, scale {scale:.3e})"
        )
    coupling = -np.triu(y, k=1)
    incident = coupling.sum(axis=1) + coupling.sum(axis=0)
    ground = np.diagonal(y) - incident
    return TunableAdmittances(ground, coupling)


def _guarded_cayley(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    """solve(a, b) with a reciprocal-condition-number guard on a."""
    try:
        cond = np.linalg.cond(a)
    except np.linalg.LinAlgError as exc:  # SVD failure on pathological input
        raise SingularNetworkError(f"{what}: condition estimate failed") from exc
    if not np.isfinite(cond) or 1.0 / cond < RCOND_MIN:
        raise SingularNetworkError(
            f"{what}: matrix is numerically singular (rcond < {RCOND_MIN:g})"
        )
    return np.linalg.solve(a, b)


def scattering_from_admittance(
    ymat: AdmittanceMatrix, z0: float = DEFAULT_Z0
) -> ScatteringMatrix:
    """Cayley transform of the admittance matrix: (I + Z0 Y)^-1 (I - Z0 Y).

    For purely imaginary symmetric Y the result is unitary and symmetric.
    """
    y = ymat.matrix
    eye = np.eye(ymat.n_ports)
    theta = _guarded_cayley(eye + z0 * y, eye - z0 * y, "I + Z0*Y")
    return ScatteringMatrix(theta, ymat.n_antennas, ymat.n_users)


def admittance_from_scattering(
    smat: ScatteringMatrix, z0: float = DEFAULT_Z0
) -> AdmittanceMatrix:
    """Inverse Cayley transform: Y = (1/Z0) (I + theta)^-1 (I - theta).

    Fails with :class:`SingularNetworkError` when theta has an eigenvalue at -1
    (a short-circuited port has no admittance description).
    """
    theta = smat.theta
    eye = np.eye(smat.n_ports)
    y = _guarded_cayley(eye + theta, eye - theta, "I + theta") / z0
    return AdmittanceMatrix(y, smat.n_antennas, smat.n_users)


def response_from_scattering(smat: ScatteringMatrix) -> MilacResponse:
    """Read off the N x K block mapping input ports to antenna ports."""
    k, n = smat.n_users, smat.n_antennas
    return MilacResponse(smat.theta[k : k + n, 0:k])


def _phase_normalize(u: np.ndarray, vh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make the first nonzero entry of each left-singular vector real positive.

    Paired right-singular rows are co-rotated so the product U D Vh is
    unchanged; unpaired rows/columns (beyond min(N, K)) are normalized
    independently. Fixes an SVD gauge so completions are reproducible.
    """
    u = u.copy()
    vh = vh.copy()
    m = min(u.shape[1], vh.shape[0])
    for i in range(u.shape[1]):
        col = u[:, i]
        j = int(np.argmax(np.abs(col) > 1e-12))
        entry = col[j]
        if entry == 0:
            continue
        phase = entry / abs(entry)
        u[:, i] *= np.conj(phase)
        if i < m:
            vh[i, :] *= phase
    for i in range(m, vh.shape[0]):
        row = vh[i, :]
        j = int(np.argmax(np.abs(row) > 1e-12))
        entry = row[j]
        if entry == 0:
            continue
        vh[i, :] *= np.conj(entry / abs(entry))
    return u, vh


def complete_scattering(resp: MilacResponse, tol: float = 1e-9) -> ScatteringMatrix:
    """Complete a feasible response block to a full unitary symmetric network.

    Given F with spectral norm at most one (values in (1, 1+tol] are clipped),
    builds theta = [[theta11, F^T], [F, theta22]] from the SVD F = U D V^H:
    theta11 = -V^* S_K V^H and theta22 = U S_N U^T, where the diagonal S
    blocks carry sqrt(1 - sigma_i^2) on the leading entries and ones beyond
    the rank. The antenna/input block of the result recovers F exactly.
    """
    f = resp.f
    n, k = f.shape
    u, s, vh = np.linalg.svd(f, full_matrices=True)
    if s.size and s[0] > 1.0 + tol:
        raise InfeasibleResponseError(
            f"response block has spectral norm {s[0]:.12g} > 1 + {tol:g}; "
            "no lossless reciprocal network realizes it"
        )
    s = np.minimum(s, 1.0)
    if s.size and s[0] > 0:
        s[s < RANK_CUT * s[0]] = 0.0
    u, vh = _phase_normalize(u, vh)

    s_k = np.ones(k)
    s_n = np.ones(n)
    m = s.size
    s_k[:m] = np.sqrt(np.maximum(0.0, 1.0 - s**2))
    s_n[:m] = np.sqrt(np.maximum(0.0, 1.0 - s**2))

    theta11 = -(vh.T * s_k) @ vh
    theta22 = (u * s_n) @ u.T
    theta11 = 0.5 * (theta11 + theta11.T)
    theta22 = 0.5 * (theta22 + theta22.T)
    theta = np.block([[theta11, f.T], [f, theta22]])
    return ScatteringMatrix(theta, n, k)


def is_lossless_reciprocal(
    theta: np.ndarray | ScatteringMatrix, tol: float = 1e-9
) -> NetworkReport:
    """Measure how far a square matrix is from being unitary and symmetric."""
    mat = theta.theta if isinstance(theta, ScatteringMatrix) else np.asarray(theta)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    sym = float(np.linalg.norm(mat - mat.T))
    uni = float(np.linalg.norm(mat.conj().T @ mat - np.eye(mat.shape[0])))
    return NetworkReport(sym, uni, passed=(sym <= tol and uni <= tol))
