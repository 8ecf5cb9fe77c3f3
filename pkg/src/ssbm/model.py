"""Semi-supervised planted bisection model.

Two balanced hidden communities over n vertices; within-community pairs are
edges with probability a/n, cross pairs with probability b/n, and a balanced
subset of m = 2*floor(rho*n/2) true labels is revealed.  This module holds the
parameter/instance types, the seeded sampler, and the centered adjacency
operator A - (d/n) 11^T used by the SDP machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse

from .rng import stream


def snr(a: float, b: float) -> float:
    """Signal-to-noise ratio (a - b)^2 / (2 (a + b)).

    Unsupervised weak recovery is feasible iff this exceeds 1 (the
    Kesten-Stigum threshold).
    """
    if not (0 <= b <= a):
        raise ValueError(f"rates must satisfy a >= b >= 0, got a={a}, b={b}")
    if a + b == 0:
        raise ValueError("snr undefined for a + b = 0")
    return (a - b) ** 2 / (2.0 * (a + b))


@dataclass(frozen=True)
class ModelParams:
    """Complete parameter set for one semi-supervised planted bisection instance.

    Attributes:
        n: vertex count, positive and even.
        a: within-community rate; edge probability is a/n.
        b: cross-community rate, 0 <= b <= a; edge probability is b/n.
        rho: fraction of labels to reveal, in [0, 1].
        seed: 64-bit unsigned seed; every random choice derives from it.
    """

    n: int
    a: float
    b: float
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise ValueError(f"n must be a positive even integer, got {self.n}")
        if not (0 <= self.b <= self.a):
            raise ValueError(f"rates must satisfy 0 <= b <= a, got a={self.a}, b={self.b}")
        if self.a > self.n:
            raise ValueError(f"invalid edge probability a/n = {self.a / self.n} > 1")
        if not (0.0 <= self.rho <= 1.0):
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def d(self) -> float:
        """Average degree (a + b) / 2."""
        return 0.5 * (self.a + self.b)

    @property
    def m(self) -> int:
        """Number of revealed labels, 2*floor(rho*n/2); always even, balanced."""
        # epsilon guards against e.g. 0.3 * 1500 = 449.999... in binary floats
        return 2 * int(math.floor(self.rho * self.n / 2 + 1e-9))

    @property
    def snr(self) -> float:
        return snr(self.a, self.b)


@dataclass(frozen=True)
class Labels:
    """Ground-truth community assignment: a balanced vector of +-1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.int8)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size == 0 or not np.all(np.abs(v) == 1):
            raise ValueError("labels must be a nonempty vector with entries +-1")
        if int(v.sum(dtype=np.int64)) != 0:
            raise ValueError("labels must be balanced (equal community sizes)")

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Graph:
    """Sparse undirected simple graph with ground-truth labels.

    Adjacency is stored CSR-style: the sorted neighbor list of vertex v is
    ``indices[indptr[v]:indptr[v+1]]``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: Labels

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if indptr.size != self.n + 1 or indptr[0] != 0 or indptr[-1] != indices.size:
            raise ValueError("inconsistent CSR arrays")
        if self.labels.n != self.n:
            raise ValueError("label vector length does not match vertex count")

    @property
    def num_edges(self) -> int:
        return self.indices.size // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique edges as (i, j) arrays with i < j."""
        heads = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        keep = heads < self.indices
        return heads[keep], self.indices[keep]

    def validate(self) -> None:
        """Full structural check: symmetric, simple, sorted neighbor lists."""
        heads = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        if np.any(heads == self.indices):
            raise ValueError("self-loop found")
        for v in range(self.n):
            nbr = self.neighbors(v)
            if nbr.size and (np.any(np.diff(nbr) <= 0)):
                raise ValueError(f"neighbor list of {v} not strictly sorted")
        fwd = set(zip(heads.tolist(), self.indices.tolist()))
        if any((j, i) not in fwd for i, j in fwd):
            raise ValueError("adjacency not symmetric")


@dataclass(frozen=True)
class RevealedLabels:
    """Ternary reveal vector: +-1 on the revealed set, 0 elsewhere."""

    values: np.ndarray
    revealed_set: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.int8)
        r = np.ascontiguousarray(self.revealed_set, dtype=np.int64)
        v.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "revealed_set", r)
        nz = np.flatnonzero(v)
        if r.size != nz.size or np.any(np.sort(r) != nz):
            raise ValueError("revealed_set must be exactly the nonzero positions")
        if int(v.sum(dtype=np.int64)) != 0:
            raise ValueError("reveal must be balanced across communities")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def m(self) -> int:
        return self.revealed_set.size

    def unrevealed(self) -> np.ndarray:
        """Sorted indices of the unrevealed vertices."""
        return np.flatnonzero(self.values == 0)

    def check_truthful(self, labels: Labels) -> None:
        r = self.revealed_set
        if not np.array_equal(self.values[r], labels.values[r]):
            raise ValueError("revealed labels disagree with ground truth")


@dataclass(frozen=True)
class MatrixOperator:
    """Symmetric matrix in sparse + rank-one + diagonal-shift form.

    Dense entry: ``M[i, j] = S[i, j] + c * u[i] * u[j] + diag_shift * (i == j)``
    where S is symmetric and stored once per unordered pair (rows <= cols).
    Duplicate entries in the input are summed; exact zeros are dropped.
    Matrix-vector products run in O(nnz + dim).
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    rank1: tuple[np.ndarray, float] | None = None
    diag_shift: float = 0.0

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")
        r = np.ascontiguousarray(self.rows, dtype=np.int64)
        c = np.ascontiguousarray(self.cols, dtype=np.int64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if not (r.shape == c.shape == w.shape):
            raise ValueError("rows/cols/weights must have equal length")
        if r.size:
            lo, hi = np.minimum(r, c), np.maximum(r, c)
            if np.any(lo < 0) or np.any(hi >= self.dim):
                raise ValueError("sparse entry out of range")
            order = np.lexsort((hi, lo))
            lo, hi, w = lo[order], hi[order], w[order]
            # coalesce duplicates
            keys = lo * self.dim + hi
            first = np.empty(keys.size, dtype=bool)
            first[0] = True
            np.not_equal(keys[1:], keys[:-1], out=first[1:])
            idx = np.flatnonzero(first)
            w = np.add.reduceat(w, idx)
            lo, hi = lo[idx], hi[idx]
            nz = w != 0.0
            lo, hi, w = lo[nz], hi[nz], w[nz]
            r, c = lo, hi
        for arr in (r, c, w):
            arr.setflags(write=False)
        object.__setattr__(self, "rows", r)
        object.__setattr__(self, "cols", c)
        object.__setattr__(self, "weights", w)
        if self.rank1 is not None:
            u, coeff = self.rank1
            u = np.ascontiguousarray(u, dtype=np.float64)
            u.setflags(write=False)
            if u.size != self.dim:
                raise ValueError("rank-one vector length does not match dim")
            object.__setattr__(self, "rank1", (u, float(coeff)))

    @classmethod
    def from_dense(cls, M) -> "MatrixOperator":
        """Operator view of a dense symmetric matrix (upper triangle stored)."""
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("expected a square matrix")
        if not np.allclose(M, M.T, atol=1e-12, rtol=0):
            raise ValueError("matrix must be symmetric")
        r, c = np.nonzero(np.triu(M))
        return cls(M.shape[0], r, c, M[r, c])

    @cached_property
    def _offdiag_csr(self):
        """(indptr, indices, weights) of the symmetrized off-diagonal sparse part."""
        off = self.rows != self.cols
        heads = np.concatenate([self.rows[off], self.cols[off]])
        tails = np.concatenate([self.cols[off], self.rows[off]])
        w = np.concatenate([self.weights[off], self.weights[off]])
        order = np.lexsort((tails, heads))
        heads, tails, w = heads[order], tails[order], w[order]
        indptr = np.searchsorted(heads, np.arange(self.dim + 1))
        return indptr, tails, w

    @cached_property
    def _offdiag_matrix(self) -> scipy.sparse.csr_matrix:
        indptr, tails, w = self._offdiag_csr
        return scipy.sparse.csr_matrix((w, tails, indptr), shape=(self.dim, self.dim))

    @cached_property
    def sparse_diag(self) -> np.ndarray:
        """Diagonal of the sparse part alone."""
        d = np.zeros(self.dim)
        on = self.rows == self.cols
        d[self.rows[on]] = self.weights[on]
        d.setflags(write=False)
        return d

    def diagonal(self) -> np.ndarray:
        """Full matrix diagonal: sparse + rank-one + shift contributions."""
        d = self.sparse_diag.copy()
        if self.rank1 is not None:
            u, c = self.rank1
            d += c * u * u
        d += self.diag_shift
        return d

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        y = self._offdiag_matrix @ v
        y += self.sparse_diag * v
        if self.rank1 is not None:
            u, c = self.rank1
            y += (c * (u @ v)) * u
        if self.diag_shift:
            y += self.diag_shift * v
        return y

    def matmat(self, V: np.ndarray) -> np.ndarray:
        """Product against an (dim, k) block, column by column semantics."""
        V = np.asarray(V, dtype=np.float64)
        Y = self._offdiag_matrix @ V
        Y += self.sparse_diag[:, None] * V
        if self.rank1 is not None:
            u, c = self.rank1
            Y += np.outer(u, c * (u @ V))
        if self.diag_shift:
            Y += self.diag_shift * V
        return Y

    def quadratic_form(self, S: np.ndarray) -> float:
        """<M, S S^T> for an (dim, k) factor S."""
        S = np.asarray(S, dtype=np.float64)
        off = self.rows != self.cols
        total = 2.0 * float(
            self.weights[off] @ np.einsum("ij,ij->i", S[self.rows[off]], S[self.cols[off]])
        )
        row_sq = np.einsum("ij,ij->i", S, S)
        total += float(self.sparse_diag @ row_sq)
        if self.rank1 is not None:
            u, c = self.rank1
            z = u @ S
            total += c * float(z @ z)
        if self.diag_shift:
            total += self.diag_shift * float(row_sq.sum())
        return total

    def to_dense(self) -> np.ndarray:
        D = np.zeros((self.dim, self.dim))
        D[self.rows, self.cols] = self.weights
        D = D + np.triu(D, 1).T
        if self.rank1 is not None:
            u, c = self.rank1
            D += c * np.outer(u, u)
        if self.diag_shift:
            D[np.diag_indices(self.dim)] += self.diag_shift
        return D

    def restrict(self, keep: np.ndarray) -> "MatrixOperator":
        """Principal submatrix on the sorted index set ``keep``."""
        keep = np.asarray(keep, dtype=np.int64)
        pos = np.full(self.dim, -1, dtype=np.int64)
        pos[keep] = np.arange(keep.size)
        inside = (pos[self.rows] >= 0) & (pos[self.cols] >= 0)
        r1 = None
        if self.rank1 is not None:
            u, c = self.rank1
            r1 = (u[keep], c)
        return MatrixOperator(
            keep.size,
            pos[self.rows[inside]],
            pos[self.cols[inside]],
            self.weights[inside],
            rank1=r1,
            diag_shift=self.diag_shift,
        )

    def abs_offdiag_rowsums(self) -> np.ndarray:
        """Upper bound on the row sums of |off-diagonal entries|.

        Bounds |S_ij + c u_i u_j| by |S_ij| + |c u_i u_j|; good enough for
        Gershgorin-style spectral envelopes.
        """
        r = np.zeros(self.dim)
        off = self.rows != self.cols
        np.add.at(r, self.rows[off], np.abs(self.weights[off]))
        np.add.at(r, self.cols[off], np.abs(self.weights[off]))
        if self.rank1 is not None:
            u, c = self.rank1
            au = np.abs(u)
            r += abs(c) * au * (au.sum() - au)
        return r


def _bernoulli_hits(rng: np.random.Generator, count: int, p: float) -> np.ndarray:
    """Positions in [0, count) selected by independent Bernoulli(p) trials.

    Geometric skip sampling: instead of testing every position, jump ahead by
    Geometric(p) gaps, which takes O(count * p) expected time.
    """
    if count <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(count, dtype=np.int64)
    expected = count * p
    batch = int(expected + 10.0 * math.sqrt(expected) + 16.0)
    chunks = []
    pos = -1
    while True:
        steps = pos + np.cumsum(rng.geometric(p, size=batch))
        if steps[-1] >= count:
            chunks.append(steps[steps < count])
            break
        chunks.append(steps)
        pos = int(steps[-1])
    return np.concatenate(chunks)


def _pair_decode(k: np.ndarray, h: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the row-major enumeration of pairs (i < j) over h items."""

    def offset(i):
        return i * (2 * h - i - 1) // 2

    i = np.floor((2 * h - 1 - np.sqrt((2.0 * h - 1.0) ** 2 - 8.0 * k)) / 2.0).astype(np.int64)
    # float sqrt can land one row off at triangular boundaries
    i = np.where(offset(i + 1) <= k, i + 1, i)
    i = np.where(offset(i) > k, i - 1, i)
    j = k - offset(i) + i + 1
    return i, j


def sample_instance(params: ModelParams) -> tuple[Graph, RevealedLabels]:
    """Draw one (graph, revealed labels) realization, deterministic in the seed.

    The partition is a uniform balanced bisection; edges are sampled per block
    (within each community, and across) by geometric skip sampling; the reveal
    set picks m/2 vertices uniformly from each community, independent of the
    edges given the partition.
    """
    n, a, b = params.n, params.a, params.b
    if a > n or b > n:
        raise ValueError("edge probabilities a/n, b/n must not exceed 1")
    half = n // 2

    perm = stream(params.seed, "partition").permutation(n)
    s1 = np.sort(perm[:half])
    s2 = np.sort(perm[half:])
    values = np.full(n, -1, dtype=np.int8)
    values[s1] = 1
    labels = Labels(values)

    pairs_within = half * (half - 1) // 2
    ei_chunks, ej_chunks = [], []
    for name, comm in (("edges-within-1", s1), ("edges-within-2", s2)):
        hits = _bernoulli_hits(stream(params.seed, name), pairs_within, a / n)
        li, lj = _pair_decode(hits, half)
        ei_chunks.append(comm[li])
        ej_chunks.append(comm[lj])
    hits = _bernoulli_hits(stream(params.seed, "edges-cross"), half * half, b / n)
    ei_chunks.append(s1[hits // half])
    ej_chunks.append(s2[hits % half])
    ei = np.concatenate(ei_chunks)
    ej = np.concatenate(ej_chunks)

    heads = np.concatenate([ei, ej])
    tails = np.concatenate([ej, ei])
    order = np.lexsort((tails, heads))
    heads, tails = heads[order], tails[order]
    indptr = np.searchsorted(heads, np.arange(n + 1))
    graph = Graph(n, indptr, tails, labels)

    m = params.m
    rng = stream(params.seed, "reveal")
    revealed = np.concatenate([
        rng.choice(s1, size=m // 2, replace=False),
        rng.choice(s2, size=m // 2, replace=False),
    ])
    revealed.sort()
    rv = np.zeros(n, dtype=np.int8)
    rv[revealed] = labels.values[revealed]
    return graph, RevealedLabels(rv, revealed)


def centered_adjacency(g: Graph, d: float) -> MatrixOperator:
    """The operator A - (d/n) 11^T: adjacency as the sparse part, a rank-one
    all-ones correction with coefficient -d/n."""
    if d < 0:
        raise ValueError("average degree d must be nonnegative")
    ei, ej = g.edge_pairs()
    return MatrixOperator(
        g.n, ei, ej, np.ones(ei.size),
        rank1=(np.ones(g.n), -d / g.n),
    )


def write_instance(path, g: Graph, rev: RevealedLabels) -> None:
    """Serialize to the plain-text exchange format.

    Line 1: ``n m_edges``; one ``i j`` edge per line (0-based, i < j); then an
    ``L`` line with the n ground-truth labels and an ``R`` line with the n
    revealed values in {+1, 0, -1}.
    """
    ei, ej = g.edge_pairs()
    with open(path, "w") as fh:
        fh.write(f"{g.n} {ei.size}\n")
        for i, j in zip(ei.tolist(), ej.tolist()):
            fh.write(f"{i} {j}\n")
        fh.write("L " + " ".join(str(v) for v in g.labels.values.tolist()) + "\n")
        fh.write("R " + " ".join(str(v) for v in rev.values.tolist()) + "\n")


def read_instance(path) -> tuple[Graph, RevealedLabels]:
    """Parse the plain-text exchange format written by :func:`write_instance`."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    header = tokens[0].split()
    if len(header) != 2:
        raise ValueError("bad header, expected 'n m_edges'")
    n, m_edges = int(header[0]), int(header[1])
    ei = np.empty(m_edges, dtype=np.int64)
    ej = np.empty(m_edges, dtype=np.int64)
    for k in range(m_edges):
        i_str, j_str = tokens[1 + k].split()
        i, j = int(i_str), int(j_str)
        if not (0 <= i < j < n):
            raise ValueError(f"bad edge line: {tokens[1 + k]!r}")
        ei[k], ej[k] = i, j
    label_line = tokens[1 + m_edges].split()
    reveal_line = tokens[2 + m_edges].split()
    if label_line[0] != "L" or reveal_line[0] != "R":
        raise ValueError("missing L/R companion lines")
    labels = Labels(np.array([int(v) for v in label_line[1:]], dtype=np.int8))
    rv = np.array([int(v) for v in reveal_line[1:]], dtype=np.int8)
    if labels.n != n or rv.size != n:
        raise ValueError("label/reveal line length does not match n")
    heads = np.concatenate([ei, ej])
    tails = np.concatenate([ej, ei])
    order = np.lexsort((tails, heads))
    indptr = np.searchsorted(heads[order], np.arange(n + 1))
    g = Graph(n, indptr, tails[order], labels)
    rev = RevealedLabels(rv, np.flatnonzero(rv))
    rev.check_truthful(labels)
    return g, rev
