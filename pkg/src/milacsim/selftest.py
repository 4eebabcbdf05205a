"""Fast numerical-kernel self checks, runnable from the CLI.

Each check is an independent oracle: finite differences against the PGD
gradient, KKT residuals of the power bisection, and sampled optimality of
the spectral-ball projection. All three must pass in well under a minute.
"""
from __future__ import annotations

import numpy as np

from . import solvers


def _random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_gradient(seed: int = 2024, cases: int = 20, k: int = 4) -> tuple[bool, str]:
    """Central finite differences vs. the analytic subproblem gradient."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    eps = 1e-6
    for _ in range(cases):
        a = _random_complex(rng, (k, k))
        q = a @ a.conj().T + 0.1 * np.eye(k)
        lmat = _random_complex(rng, (k, k))
        p = rng.uniform(0.1, 1.0, k)
        y = _random_complex(rng, (k, k)) / (2 * np.sqrt(k))
        sqrt_p = np.sqrt(p)

        def objective(mat):
            quad = float(np.real(np.einsum("ij,ij->", np.conj(mat), q @ mat * p)))
            lin = float(np.real(np.sum(sqrt_p * np.diagonal(lmat @ mat))))
            return quad - 2.0 * lin

        grad = q @ y * p - lmat.conj().T * sqrt_p
        numeric = np.zeros((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                d = np.zeros((k, k))
                d[i, j] = eps
                dre = (objective(y + d) - objective(y - d)) / (2 * eps)
                dim = (objective(y + 1j * d) - objective(y - 1j * d)) / (2 * eps)
                numeric[i, j] = (dre + 1j * dim) / 2.0
        err = np.linalg.norm(numeric - grad) / max(np.linalg.norm(grad), 1e-300)
        worst = max(worst, err)
    return worst <= 1e-6, f"max relative gradient error {worst:.3e} (tol 1e-06)"


def check_bisection(seed: int = 7, cases: int = 200, k: int = 6) -> tuple[bool, str]:
    """Complementary slackness and feasibility of the power allocation."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        alpha = rng.uniform(0.0, 3.0, k)
        beta = rng.uniform(0.05, 2.0, k)
        budget = rng.uniform(0.5, 5.0)
        p, lam = solvers.power_allocation(alpha, beta, budget)
        if np.any(p < 0) or p.sum() > budget * (1 + 1e-9):
            return False, "infeasible allocation returned"
        slack = abs(lam * (p.sum() - budget))
        rel = slack / max(budget * lam, 1e-300) if lam > 0 else 0.0
        worst = max(worst, rel)
    return worst <= 1e-9, f"max KKT slackness residual {worst:.3e} (tol 1e-09)"


def random_ball_member(rng, n: int, k: int) -> np.ndarray:
    """Independent draw from the spectral-norm ball via a fresh SVD triple."""
    r = min(n, k)
    qn = np.linalg.qr(_random_complex(rng, (n, r)))[0]
    qk = np.linalg.qr(_random_complex(rng, (k, r)))[0]
    s = rng.uniform(0.0, 1.0, r)
    return (qn * s) @ qk.conj().T


def check_projection(seed: int = 2025, inputs: int = 100, candidates: int = 1000) -> tuple[bool, str]:
    """Projection must beat random feasible candidates in Frobenius distance."""
    rng = np.random.default_rng(seed)
    for _ in range(inputs):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, 6))
        m = _random_complex(rng, (n, k))
        proj = solvers.spectral_ball_projection(m)
        if np.linalg.norm(proj, 2) > 1 + 1e-9:
            return False, "projection left the ball"
        base = np.linalg.norm(proj - m)
        for _ in range(candidates):
            cand = random_ball_member(rng, n, k)
            if np.linalg.norm(cand - m) < base - 1e-9:
                return False, "a random feasible point beat the projection"
    return True, f"optimal vs {candidates} candidates on {inputs} inputs"


CHECKS = (
    ("pgd-gradient-finite-difference", check_gradient),
    ("power-bisection-kkt", check_bisection),
    ("spectral-projection-optimality", check_projection),
)


def run_selftest(echo=print) -> bool:
    """Run every check, print one pass/fail line each, return overall status."""
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
