"""Census estimator: majority vote of revealed labels at a fixed graph distance.

An unrevealed vertex v is labeled by the sign of the sum of revealed labels
over the vertices at shortest-path distance exactly t from v (default t = 1),
with a fair coin on ties.  Alongside the estimator live its closed-form
accuracy predictions and the exact binomial oracles backing them.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import Graph, RevealedLabels, snr
from .rng import coin


@dataclass(frozen=True)
class CensusMargin:
    """Vote tally for one vertex at one depth.

    margin is the signed sum of revealed labels at distance exactly ``depth``;
    support counts the revealed voters, so |margin| <= support.
    """

    vertex: int
    depth: int
    margin: int
    support: int


@dataclass(frozen=True)
class EstimateReport:
    """Outcome of one estimator run.

    estimates is the full length-n +-1 vector with revealed labels copied
    through; overlap is |<x, x_hat>| / (n - m) restricted to unrevealed
    vertices; ties_broken counts fair-coin invocations.
    """

    estimates: np.ndarray
    ties_broken: int
    overlap: float

    def __post_init__(self):
        e = np.ascontiguousarray(self.estimates, dtype=np.int8)
        e.setflags(write=False)
        object.__setattr__(self, "estimates", e)

    def to_json(self) -> str:
        return json.dumps({
            "overlap": self.overlap,
            "ties": self.ties_broken,
            "estimates": self.estimates.tolist(),
        })


def _distance_shell(g: Graph, v: int, t: int) -> np.ndarray:
    """Vertices at shortest-path distance exactly t from v (BFS, truncated)."""
    dist = np.full(g.n, -1, dtype=np.int32)
    dist[v] = 0
    frontier = deque([v])
    shell = []
    while frontier:
        u = frontier.popleft()
        du = dist[u]
        if du == t:
            break
        for w in g.neighbors(u):
            if dist[w] < 0:
                dist[w] = du + 1
                if du + 1 == t:
                    shell.append(w)
                else:
                    frontier.append(w)
    return np.asarray(shell, dtype=np.int64)


def margins_at_depth(g: Graph, votes: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Signed vote sums and voter counts at distance exactly t, all vertices.

    ``votes`` is any length-n vector in {+1, 0, -1}; zeros do not vote.  The
    t = 1 case is a sparse matrix-vector product; t >= 2 runs one truncated
    BFS per vertex.
    """
    if t < 1:
        raise ValueError("depth t must be >= 1")
    votes = np.asarray(votes)
    if t == 1:
        heads = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
        margins = np.zeros(g.n, dtype=np.int64)
        support = np.zeros(g.n, dtype=np.int64)
        np.add.at(margins, heads, votes[g.indices].astype(np.int64))
        np.add.at(support, heads, (votes[g.indices] != 0).astype(np.int64))
        return margins, support
    margins = np.zeros(g.n, dtype=np.int64)
    support = np.zeros(g.n, dtype=np.int64)
    for v in range(g.n):
        shell = _distance_shell(g, v, t)
        if shell.size:
            sv = votes[shell]
            margins[v] = int(sv.sum())
            support[v] = int(np.count_nonzero(sv))
    return margins, support


def census_margin(g: Graph, rev: RevealedLabels, v: int, t: int) -> CensusMargin:
    """Vote tally of revealed labels at distance exactly t from an unrevealed v."""
    if t < 1:
        raise ValueError("depth t must be >= 1")
    if rev.values[v] != 0:
        raise ValueError(f"vertex {v} is revealed; census only estimates unrevealed vertices")
    shell = _distance_shell(g, v, t)
    if shell.size:
        sv = rev.values[shell].astype(np.int64)
        margin, support = int(sv.sum()), int(np.count_nonzero(sv))
    else:
        margin, support = 0, 0
    return CensusMargin(vertex=v, depth=t, margin=margin, support=support)


def census_estimate(g: Graph, rev: RevealedLabels, t: int = 1, seed: int = 0) -> EstimateReport:
    """Estimate every unrevealed label by its depth-t census.

    Ties (zero margin) are resolved by a fair coin from a stream keyed by the
    vertex index, so no vertex's coin perturbs another's.  Revealed labels are
    copied through; overlap is computed on the unrevealed vertices only.
    """
    if t < 1:
        raise ValueError("depth t must be >= 1")
    unrev = rev.unrevealed()
    if unrev.size == 0:
        raise ValueError("all vertices are revealed; nothing to estimate")
    margins, _ = margins_at_depth(g, rev.values, t)
    estimates = rev.values.copy()
    signs = np.sign(margins[unrev]).astype(np.int8)
    ties = unrev[signs == 0]
    for v in ties.tolist():
        estimates[v] = coin(seed, "census-tie", v)
    nonzero = unrev[signs != 0]
    estimates[nonzero] = signs[signs != 0]
    truth = g.labels.values[unrev].astype(np.int64)
    overlap = abs(int(truth @ estimates[unrev].astype(np.int64))) / unrev.size
    return EstimateReport(estimates=estimates, ties_broken=int(ties.size), overlap=overlap)


def delta_gap(a: float, b: float) -> float:
    """The constant (a - b) / (2 e^{a+b}) bounding the binomial sign gap.

    For X ~ Bin(N, a/N) and Y ~ Bin(N, b/N) independent with a > b, the gap
    P(X > Y) - P(X < Y) stays above this value for all large N.
    """
    if not (0 <= b <= a):
        raise ValueError(f"rates must satisfy a >= b >= 0, got a={a}, b={b}")
    return (a - b) / (2.0 * math.exp(a + b))


def binomial_pmf(n: int, p: float, tail: float = 1e-16) -> np.ndarray:
    """Binomial(n, p) pmf by the multiplicative recurrence, truncated once the
    remaining upper-tail mass drops below ``tail``."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"invalid probability {p}")
    if p == 0.0 or n == 0:
        return np.array([1.0])
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    q = 1.0 - p
    ratio = p / q
    terms = [q ** n]
    if terms[0] == 0.0:
        raise ValueError("pmf underflow: mean n*p too large for the recurrence")
    cum = terms[0]
    k = 0
    mean = n * p
    while k < n and (cum < 1.0 - tail or k < mean + 2):
        terms.append(terms[-1] * ((n - k) / (k + 1.0)) * ratio)
        k += 1
        cum += terms[-1]
    return np.asarray(terms)


def binomial_difference_stats(
    nx: int, px: float, ny: int, py: float
) -> tuple[float, float, float]:
    """(P(X > Y), P(X = Y), P(X < Y)) for independent X ~ Bin(nx, px) and
    Y ~ Bin(ny, py), exact up to truncated tail mass < 1e-12."""
    fx = binomial_pmf(nx, px)
    fy = binomial_pmf(ny, py)
    k = max(fx.size, fy.size)
    fx = np.pad(fx, (0, k - fx.size))
    fy = np.pad(fy, (0, k - fy.size))
    p_eq = float(fx @ fy)
    p_less = float(fy[1:] @ np.cumsum(fx)[:-1])  # sum_y P(Y=y) P(X <= y-1)
    p_greater = float(fx[1:] @ np.cumsum(fy)[:-1])
    return p_greater, p_eq, p_less


def binomial_gap_oracle(trials: int, a: float, b: float) -> float:
    """Exact P(X > Y) - P(X < Y) for X ~ Bin(trials, a/trials),
    Y ~ Bin(trials, b/trials); the independent check of :func:`delta_gap`."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if a / trials > 1 or b / trials > 1 or a < 0 or b < 0:
        raise ValueError("a/trials and b/trials must be valid probabilities")
    p_greater, _, p_less = binomial_difference_stats(trials, a / trials, trials, b / trials)
    return p_greater - p_less


def vote_accuracy_exact(k_same: int, k_cross: int, pa: float, pb: float) -> float:
    """Exact probability that a signed vote recovers the vertex label.

    The margin is Bin(k_same, pa) - Bin(k_cross, pb); ties recover with
    probability 1/2 (the fair coin).
    """
    p_greater, p_eq, _ = binomial_difference_stats(k_same, pa, k_cross, pb)
    return p_greater + 0.5 * p_eq


def predict_accuracy_erf(a: float, b: float, rho: float, t: int = 1) -> float:
    """Asymptotic per-vertex accuracy 1/2 + 1/2 erf(sqrt(rho SNR^t / 2))."""
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if t < 1:
        raise ValueError("depth t must be >= 1")
    if rho == 0.0:
        return 0.5
    return 0.5 + 0.5 * math.erf(math.sqrt(rho * snr(a, b) ** t / 2.0))


def census_success_bound(a: float, b: float, rho: float, n: int) -> tuple[float, float]:
    """Guaranteed overlap threshold and success probability of the t=1 census.

    Returns (delta/2, 1 - exp(-delta^2 (1-rho) n / 8)) with the rescaled
    constant delta = rho (a-b) / (2 e^{rho (a+b)}): the overlap exceeds the
    threshold with at least the returned probability.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    delta = delta_gap(rho * a, rho * b)
    return delta / 2.0, 1.0 - math.exp(-(delta ** 2) * (1.0 - rho) * n / 8.0)


def overlap_lower_curve(a: float, b: float, rho: float) -> float:
    """Asymptotic expected-overlap lower bound (2/3) sqrt(rho SNR) at t = 1."""
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    return (2.0 / 3.0) * math.sqrt(rho * snr(a, b))
