"""Constrained SDP via the aggregation reduction.

Pinning X_ij = x_i x_j on revealed pairs collapses all revealed rows/columns,
signed by their labels, into one margin row: the constrained program on an
n x n matrix equals the plain elliptope SDP of the (n-m+1) x (n-m+1)
aggregated matrix.  This module builds that matrix (keeping the
sparse + rank-one structure), solves it, reads label estimates off the
factor, and implements the detection test and the sandwich diagnostics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .census import EstimateReport
from .model import Graph, Labels, MatrixOperator, RevealedLabels, centered_adjacency
from .rng import coin
from .sdp import SdpSolution, SolverConfig, round_leading_eigvec, solve_elliptope


@dataclass(frozen=True)
class AggregatedOperator:
    """The reduced matrix: index 0 is the aggregated revealed margin.

    ``index_map[j]`` is the original vertex behind row j+1 (sorted unrevealed
    order); ``margin00`` is the (0,0) entry sum_{i,j in R} M_ij x_i x_j.
    """

    op: MatrixOperator
    margin00: float
    index_map: np.ndarray


@dataclass(frozen=True)
class CsdpSolution:
    """Constrained optimum: the value, the inner solve on the aggregated
    matrix, and sigma0, the common direction of all revealed +1 vertices."""

    value: float
    inner: SdpSolution
    sigma0: np.ndarray | None
    aggregated: AggregatedOperator | None


@dataclass(frozen=True)
class TestOutcome:
    """Decision of the CSDP detection test: flag community structure when the
    statistic reaches n ((a-b)/2 - delta)."""

    statistic: float
    threshold: float
    decision: int
    delta_used: float
    rho0: float

    def to_json(self) -> str:
        return json.dumps({
            "statistic": self.statistic,
            "threshold": self.threshold,
            "decision": self.decision,
            "delta": self.delta_used,
            "rho0": self.rho0,
        })


def aggregate(M: MatrixOperator, rev: RevealedLabels) -> AggregatedOperator:
    """Collapse revealed rows/columns of M, signed by revealed labels.

    Requires a balanced reveal (sum of revealed labels zero); that is what
    cancels the all-ones rank-one part out of the margin row for centered
    adjacency input.  The reduction is exact entrywise: the sparse block maps
    to sparse entries, and a rank-one part c u u^T maps to c v v^T with
    v = (sum_{i in R} x_i u_i, u restricted to unrevealed vertices).
    """
    if M.dim != rev.n:
        raise ValueError("operator and reveal dimensions differ")
    x = rev.values.astype(np.float64)
    if int(rev.values.sum(dtype=np.int64)) != 0:
        raise ValueError("aggregation requires a balanced reveal")
    unrev = rev.unrevealed()
    m = rev.m
    dim = M.dim - m + 1

    # column position of each original vertex in the aggregated matrix:
    # 0 for revealed (they all fold into the margin row), 1..n-m otherwise
    col = np.zeros(M.dim, dtype=np.int64)
    col[unrev] = 1 + np.arange(unrev.size)

    r, c_, w = M.rows, M.cols, M.weights
    rev_r = col[r] == 0
    rev_c = col[c_] == 0

    both = rev_r & rev_c
    diag = r == c_
    # ordered pairs over R count off-diagonal stored entries twice
    margin_sparse = float(
        np.sum(w[both] * x[r[both]] * x[c_[both]] * np.where(diag[both], 1.0, 2.0))
    )

    one = rev_r ^ rev_c
    rev_end = np.where(rev_r[one], r[one], c_[one])
    other_end = np.where(rev_r[one], c_[one], r[one])
    agg_rows = [np.zeros(one.sum(), dtype=np.int64)]
    agg_cols = [col[other_end]]
    agg_w = [w[one] * x[rev_end]]

    inner = ~rev_r & ~rev_c
    agg_rows.append(col[r[inner]])
    agg_cols.append(col[c_[inner]])
    agg_w.append(w[inner])

    v = None
    coeff = 0.0
    margin_rank1 = 0.0
    if M.rank1 is not None:
        u, coeff = M.rank1
        v = np.empty(dim)
        v[0] = float(x @ u)
        v[1:] = u[unrev]
        margin_rank1 = coeff * v[0] ** 2

    margin00 = float(margin_sparse + margin_rank1 + M.diag_shift * m)

    # the representation puts c v_0^2 + diag_shift at (0,0); top up with an
    # explicit sparse entry so the dense (0,0) equals margin00 exactly
    agg_rows.append(np.zeros(1, dtype=np.int64))
    agg_cols.append(np.zeros(1, dtype=np.int64))
    agg_w.append(np.array([margin_sparse + M.diag_shift * (m - 1)]))

    op = MatrixOperator(
        dim,
        np.concatenate(agg_rows),
        np.concatenate(agg_cols),
        np.concatenate(agg_w),
        rank1=None if v is None else (v, coeff),
        diag_shift=M.diag_shift,
    )
    return AggregatedOperator(op=op, margin00=margin00, index_map=unrev)


def solve_csdp(
    g: Graph, rev: RevealedLabels, d: float, cfg: SolverConfig | None = None
) -> CsdpSolution:
    """CSDP of the centered adjacency, solved as SDP of the aggregated matrix.

    With nothing revealed this is exactly the unsupervised solve (the raw
    operator is passed through, so results match sdp bit for bit).
    """
    M = centered_adjacency(g, d)
    if rev.m == 0:
        inner = solve_elliptope(M, cfg)
        return CsdpSolution(value=inner.value, inner=inner, sigma0=None, aggregated=None)
    agg = aggregate(M, rev)
    inner = solve_elliptope(agg.op, cfg)
    return CsdpSolution(
        value=inner.value,
        inner=inner,
        sigma0=inner.factor[0].copy(),
        aggregated=agg,
    )


def estimate_unrevealed(
    sol: CsdpSolution, rev: RevealedLabels, labels: Labels, seed: int = 0
) -> EstimateReport:
    """Labels from the factor: x_hat_j = sign(sigma_0 . sigma_j).

    sigma_0 is the direction shared by every revealed +1 vertex, so the signs
    are anchored and no global-flip alignment is needed.  Zero dot products
    fall to the same per-vertex fair coin as the census.  With an empty
    reveal the unsupervised rounding is used instead, whose overall sign is
    arbitrary (overlap takes the absolute value either way).
    """
    n = rev.n
    unrev = rev.unrevealed()
    if sol.sigma0 is None or sol.aggregated is None:
        estimates = round_leading_eigvec(sol.inner, seed=seed)
        ties = 0
    else:
        estimates = rev.values.copy()
        dots = sol.inner.factor[1:] @ sol.sigma0
        signs = np.sign(dots)
        ties = int(np.count_nonzero(signs == 0))
        verts = sol.aggregated.index_map
        for j in np.flatnonzero(signs == 0).tolist():
            signs[j] = coin(seed, "csdp-tie", int(verts[j]))
        estimates[verts] = signs.astype(np.int8)
    truth = labels.values[unrev].astype(np.int64)
    overlap = abs(int(truth @ estimates[unrev].astype(np.int64))) / max(unrev.size, 1)
    return EstimateReport(estimates=estimates, ties_broken=ties, overlap=overlap)


def detection_test(
    stat: float, n: int, a: float, b: float, delta: float | None = None
) -> TestOutcome:
    """Threshold test for community structure given the model rates.

    Declares a planted bisection (decision 1) iff stat >= n ((a-b)/2 - delta);
    the default margin is delta = (a-b)/40.  Also reports rho0, the reveal
    ratio at which the test is proven to work: 1 - (a-b)/(30 (1+d)).
    """
    if a <= b:
        raise ValueError("detection test requires a > b")
    if delta is None:
        delta = (a - b) / 40.0
    d = 0.5 * (a + b)
    threshold = n * ((a - b) / 2.0 - delta)
    return TestOutcome(
        statistic=float(stat),
        threshold=threshold,
        decision=int(stat >= threshold),
        delta_used=delta,
        rho0=1.0 - (a - b) / (30.0 * (1.0 + d)),
    )


@dataclass(frozen=True)
class SandwichReport:
    """SDP(sub) <= CSDP <= SDP, with the deterministic submatrix bound.

    ``holds`` is the two-sided sandwich up to solver tolerance tau;
    ``margin_nonneg`` marks instances where its lower side is actually
    guaranteed; ``submatrix_ok`` is the unconditional inequality
    SDP(sub) <= CSDP - margin00 + tau.
    """

    lower: float
    mid: float
    upper: float
    margin00: float
    tau: float
    holds: bool
    margin_nonneg: bool
    submatrix_ok: bool

    def to_json(self) -> str:
        return json.dumps({
            "lower": self.lower, "mid": self.mid, "upper": self.upper,
            "margin00": self.margin00, "tau": self.tau, "holds": self.holds,
            "margin_nonneg": self.margin_nonneg, "submatrix_ok": self.submatrix_ok,
        })


def sandwich_check(
    g: Graph, rev: RevealedLabels, d: float, cfg: SolverConfig | None = None
) -> SandwichReport:
    """Solve all three programs on one instance and audit the inequalities."""
    M = centered_adjacency(g, d)
    unrev = rev.unrevealed()
    lower = solve_elliptope(M.restrict(unrev), cfg).value if unrev.size else 0.0
    csol = solve_csdp(g, rev, d, cfg)
    upper = solve_elliptope(M, cfg).value
    margin00 = csol.aggregated.margin00 if csol.aggregated is not None else 0.0
    tau = 1e-3 * g.n * math.sqrt(max(d, 1.0))
    return SandwichReport(
        lower=float(lower),
        mid=float(csol.value),
        upper=float(upper),
        margin00=margin00,
        tau=tau,
        holds=bool(lower - tau <= csol.value <= upper + tau),
        margin_nonneg=bool(margin00 >= 0.0),
        submatrix_ok=bool(lower <= csol.value - margin00 + tau),
    )
