"""Elliptope SDP engine.

Solves max{ <M, X> : X >= 0, X_ii = 1 } through the factorization X = S S^T
with unit-norm rows: repeated sweeps of block-coordinate maximization move
each row to the normalized gradient of the objective in that row, which is
monotone and needs O((nnz + dim) k) work per sweep.  Exact small-instance
oracles (cut norm enumeration, Grothendieck bound) live here too.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import MatrixOperator
from .rng import stream


class NumericError(RuntimeError):
    """Non-finite input or numerical breakdown inside the solver."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for :func:`solve_elliptope`.

    rank=None picks ceil(sqrt(2 dim)) + 1 (capped at dim), above the
    Barvinok-Pataki width at which the factorized problem admits the SDP
    optimum.
    """

    rank: int | None = None
    tol: float = 1e-6
    max_sweeps: int = 2000
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.rank is not None and self.rank < 2:
            raise ValueError("rank must be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1 or self.restarts < 1:
            raise ValueError("max_sweeps and restarts must be >= 1")

    def rank_for(self, dim: int) -> int:
        if self.rank is not None:
            return min(self.rank, max(dim, 2))
        return min(max(dim, 2), int(math.ceil(math.sqrt(2.0 * dim))) + 1)


@dataclass(frozen=True)
class SdpSolution:
    """A feasible factor and its objective value.

    Every row of ``factor`` has unit norm; ``value`` equals
    <M, factor factor^T>; ``objective_history`` holds the per-sweep objective
    of the winning restart (monotone nondecreasing).
    """

    factor: np.ndarray
    value: float
    sweeps_used: int
    converged: bool
    best_of: int
    objective_history: np.ndarray

    def to_json(self) -> str:
        return json.dumps({
            "value": self.value,
            "sweeps": self.sweeps_used,
            "converged": self.converged,
        })


@dataclass(frozen=True)
class DualCertificate:
    """Feasibility-corrected dual bound: for any y, subtracting
    n * min(0, lambda_min(diag(y) - M)) from 1^T y gives a valid upper bound
    on the SDP value."""

    y: np.ndarray
    upper_bound: float
    gap: float
    lambda_min: float
    power_converged: bool


def _sweep(S, indptr, nbr, w, u, c, order):
    """One in-place Gauss-Seidel sweep; returns nothing.

    Diagonal terms are excluded from the per-row gradient (they contribute a
    constant on the feasible set); a zero gradient keeps the previous row.
    """
    has_r1 = u is not None
    su = u @ S if has_r1 else None
    for i in order:
        lo, hi = indptr[i], indptr[i + 1]
        if hi > lo:
            g = w[lo:hi] @ S[nbr[lo:hi]]
            if has_r1:
                ui = u[i]
                g += (c * ui) * (su - ui * S[i])
        elif has_r1:
            ui = u[i]
            g = (c * ui) * (su - ui * S[i])
        else:
            continue
        nrm = math.sqrt(g @ g)
        if nrm <= 0.0:
            continue
        g /= nrm
        if has_r1:
            su += u[i] * (g - S[i])
        S[i] = g


def solve_elliptope(M: MatrixOperator, cfg: SolverConfig | None = None) -> SdpSolution:
    """Maximize <M, X> over the elliptope via low-rank coordinate ascent.

    Runs ``cfg.restarts`` independent sphere-uniform initializations, sweeps
    rows in fixed index order until the objective moves by less than
    ``cfg.tol`` (relative) in a full sweep, and returns the best restart.
    """
    cfg = cfg or SolverConfig()
    n = M.dim
    if n == 0:
        raise ValueError("cannot solve an empty (dimension-zero) problem")
    if not (np.all(np.isfinite(M.weights)) and math.isfinite(M.diag_shift)):
        raise NumericError("operator has non-finite entries")
    if M.rank1 is not None and not (np.all(np.isfinite(M.rank1[0])) and math.isfinite(M.rank1[1])):
        raise NumericError("operator rank-one part has non-finite entries")

    k = cfg.rank_for(n)
    indptr, nbr, w = M._offdiag_csr
    u, c = M.rank1 if M.rank1 is not None else (None, 0.0)
    if u is not None and c == 0.0:
        u = None
    order = range(n)

    best = None
    for r in range(cfg.restarts):
        S = stream(cfg.seed, "sdp-init", r).standard_normal((n, k))
        norms = np.linalg.norm(S, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        S /= norms
        history = [M.quadratic_form(S)]
        converged = False
        sweeps = 0
        for sweeps in range(1, cfg.max_sweeps + 1):
            _sweep(S, indptr, nbr, w, u, c, order)
            val = M.quadratic_form(S)
            history.append(val)
            if abs(val - history[-2]) <= cfg.tol * max(1.0, abs(val)):
                converged = True
                break
        value = history[-1]
        if not math.isfinite(value):
            raise NumericError("objective diverged to a non-finite value")
        sol = SdpSolution(
            factor=S,
            value=value,
            sweeps_used=sweeps,
            converged=converged,
            best_of=r,
            objective_history=np.asarray(history),
        )
        if best is None or sol.value > best.value:
            best = sol
    return best


def gradient_matrix(M: MatrixOperator, S: np.ndarray) -> np.ndarray:
    """Row gradients G_i = sum_{j != i} M_ij S_j (diagonal excluded)."""
    G = M._offdiag_matrix @ S
    if M.rank1 is not None:
        u, c = M.rank1
        G += np.outer(u, c * (u @ S)) - (c * u * u)[:, None] * S
    return G


def leading_eigenvalue(
    M: MatrixOperator, seed: int = 0, max_iters: int = 1000, tol: float = 1e-9
) -> float:
    """Largest eigenvalue of M by power iteration on a PSD shift of M.

    Shifting by the Gershgorin envelope makes the target the dominant
    eigenvalue in magnitude, so plain power iteration converges to it.
    """
    if M.dim == 0:
        raise ValueError("empty operator")
    shift = float(np.max(M.abs_offdiag_rowsums() + np.abs(M.diagonal()))) + 1.0
    v = stream(seed, "power-init").standard_normal(M.dim)
    v /= np.linalg.norm(v)
    theta = 0.0
    for _ in range(max_iters):
        z = M.matvec(v) + shift * v
        nrm = np.linalg.norm(z)
        if nrm == 0.0:
            return -shift
        z /= nrm
        theta = float(z @ (M.matvec(z) + shift * z))
        if np.linalg.norm((M.matvec(z) + shift * z) - theta * z) <= tol * max(1.0, abs(theta)):
            v = z
            break
        v = z
    return theta - shift


def certify_dual(
    M: MatrixOperator, sol: SdpSolution, max_iters: int = 2000, tol: float = 1e-6
) -> DualCertificate:
    """Dual upper bound at the solver's fixed point.

    Takes y_i = ||sum_{j != i} M_ij sigma_j|| + M_ii, estimates
    lambda_min(diag(y) - M) by power iteration on its reflected complement,
    and subtracts the conservative residual so the reported bound stays an
    upper bound even short of full convergence.
    """
    S = sol.factor
    y = np.linalg.norm(gradient_matrix(M, S), axis=1) + M.diagonal()
    n = M.dim

    # B = diag(y) - M;  power-iterate C = c0 I - B whose top eigenvalue is
    # c0 - lambda_min(B), with c0 from the Gershgorin envelope of B
    c0 = float(np.max(y - M.diagonal() + M.abs_offdiag_rowsums())) + 1.0

    def cmat(v):
        return c0 * v - y * v + M.matvec(v)

    v = stream(0, "dual-power").standard_normal(n)
    v /= np.linalg.norm(v)
    theta, res = 0.0, np.inf
    for _ in range(max_iters):
        z = cmat(v)
        nrm = np.linalg.norm(z)
        if nrm == 0.0:
            theta, res = 0.0, 0.0
            v = z
            break
        z /= nrm
        theta = float(z @ cmat(z))
        res = float(np.linalg.norm(cmat(z) - theta * z))
        v = z
        if res <= tol * max(1.0, abs(theta)):
            break
    converged = res <= tol * max(1.0, abs(theta))
    lambda_min = c0 - theta - res  # conservative: never above the true minimum
    upper = float(y.sum()) - n * min(0.0, lambda_min)
    return DualCertificate(
        y=y,
        upper_bound=upper,
        gap=upper - sol.value,
        lambda_min=lambda_min,
        power_converged=converged,
    )


def round_leading_eigvec(sol: SdpSolution, seed: int = 0,
                         max_iters: int = 2000, tol: float = 1e-12) -> np.ndarray:
    """Sign pattern of the leading eigenvector of X = S S^T.

    Power iteration uses only S-products (O(nk) per step).  Sign convention:
    the first nonzero coordinate of the eigenvector is made positive; exact
    zeros map to +1.  With degenerate spectra (e.g. X = I) any unit vector is
    leading and the output is just a valid +-1 vector.
    """
    S = sol.factor
    if not np.any(S):
        raise ValueError("zero factor cannot be rounded")
    n = S.shape[0]
    v = stream(seed, "round-init").standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iters):
        z = S @ (S.T @ v)
        nrm = np.linalg.norm(z)
        if nrm == 0.0:
            break
        z /= nrm
        if np.linalg.norm(z - v) <= tol or np.linalg.norm(z + v) <= tol:
            v = z
            break
        v = z
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        v = -v
    out = np.where(v >= 0, 1, -1).astype(np.int8)
    return out


def cut_norm_exact(M, chunk_bits: int = 14) -> float:
    """Exact infinity-to-one norm max_{s,t in {+-1}^n} s^T M t, for dim <= 20.

    Enumerates the 2^(n-1) sign vectors s (global flip is free); the inner
    maximum over t is the closed form sum_j |(M^T s)_j|.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    rows, _ = M.shape
    if max(M.shape) > 20:
        raise ValueError("exact cut norm enumeration is limited to dim <= 20")
    if rows == 0 or M.size == 0:
        return 0.0
    free = rows - 1
    best = 0.0
    total = 1 << free
    step = 1 << min(chunk_bits, free)
    bit_cols = np.arange(free, dtype=np.uint32)
    for start in range(0, total, step):
        codes = np.arange(start, min(start + step, total), dtype=np.uint32)
        signs = np.empty((codes.size, rows))
        signs[:, 0] = 1.0
        signs[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> bit_cols) & 1)
        vals = np.abs(signs @ M).sum(axis=1)
        best = max(best, float(vals.max()))
    return best


GROTHENDIECK_BOUND = 1.783  # just above pi / (2 ln(1 + sqrt 2)) = 1.7822...


@dataclass(frozen=True)
class GrothendieckReport:
    sdp_value: float
    cut_norm: float
    ratio: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps({
            "sdp_value": self.sdp_value,
            "cut_norm": self.cut_norm,
            "ratio": self.ratio,
            "pass": self.passed,
        })


def grothendieck_check(M, cfg: SolverConfig | None = None) -> GrothendieckReport:
    """Check SDP(M) <= 1.783 * ||M||_{inf->1} + 1e-6 on a small dense matrix."""
    M = np.asarray(M, dtype=np.float64)
    if max(M.shape) > 20:
        raise ValueError("grothendieck check is limited to dim <= 20")
    cut = cut_norm_exact(M)
    sol = solve_elliptope(MatrixOperator.from_dense(M), cfg or SolverConfig())
    ratio = sol.value / cut if cut > 0 else float("nan")
    return GrothendieckReport(
        sdp_value=sol.value,
        cut_norm=cut,
        ratio=ratio,
        passed=sol.value <= GROTHENDIECK_BOUND * cut + 1e-6,
    )


@dataclass(frozen=True)
class CutNormTrialReport:
    n: int
    d: float
    samples: int
    bound: float
    max_norm: float
    violations: int

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "d": self.d, "samples": self.samples,
            "bound": self.bound, "max_norm": self.max_norm,
            "violations": self.violations,
        })


def cut_norm_concentration_trial(
    n: int, d: float, samples: int, seed: int = 0
) -> CutNormTrialReport:
    """Sample Erdos-Renyi G(n, d/n) matrices and test the concentration bound
    ||A - E A||_{inf->1} <= 6 (1 + d) n by exact enumeration (n <= 20)."""
    if n > 20:
        raise ValueError("exact trial is limited to n <= 20")
    p = d / n
    if not (0.0 <= p <= 1.0):
        raise ValueError("d/n must be a valid probability")
    expected = p * (np.ones((n, n)) - np.eye(n))
    bound = 6.0 * (1.0 + d) * n
    max_norm = 0.0
    violations = 0
    for s in range(samples):
        rng = stream(seed, "cutnorm-trial", s)
        upper = np.triu(rng.random((n, n)) < p, k=1)
        A = (upper | upper.T).astype(np.float64)
        norm = cut_norm_exact(A - expected)
        max_norm = max(max_norm, norm)
        if norm > bound:
            violations += 1
    return CutNormTrialReport(
        n=n, d=d, samples=samples, bound=bound,
        max_norm=max_norm, violations=violations,
    )
