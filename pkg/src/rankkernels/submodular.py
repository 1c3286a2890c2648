"""Submodular set functions on an object-similarity graph.

The workhorse is the graph cut function F(S) = total edge weight crossing
between S and its complement: symmetric, nonnegative, submodular, and
F(empty) = F(V) = 0.  The module also provides the Lovasz extension, the
Edmonds greedy vertex, and small-instance predicates (base polytope and
tangent cone membership, submodularity) used as verification oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rankings import OrderedPartition, is_exhaustive


@dataclass
class InformationGraph:
    """Symmetric nonnegative edge weights over ``n`` objects.

    ``lengthscale`` records the value used at construction so a run can be
    reproduced under a lengthscale override.
    """

    n: int
    weights: np.ndarray
    lengthscale: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.allclose(w, w.T):
            raise ValueError("weights must be symmetric")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if np.diagonal(w).any():
            raise ValueError("diagonal must be zero")
        w = w.copy()
        w.flags.writeable = False
        self.weights = w

    @property
    def num_edges(self) -> int:
        """Count of nonzero (undirected) edges."""
        return int(np.count_nonzero(np.triu(self.weights, k=1)))


def pairwise_sq_dists(features: np.ndarray) -> np.ndarray:
    """Dense matrix of squared Euclidean distances between feature rows."""
    diff = features[:, None, :] - features[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def median_lengthscale(features: np.ndarray) -> float:
    """Median of the n(n-1)/2 pairwise Euclidean distances."""
    sq = pairwise_sq_dists(features)
    iu = np.triu_indices(features.shape[0], k=1)
    return float(np.median(np.sqrt(sq[iu])))


def build_graph(
    features,
    lengthscale: float | None = None,
    keep_fraction: float = 1.0,
) -> InformationGraph:
    """Information graph from object features.

    Edge weights are squared-exponential similarities
    ``exp(-0.5 * ||v - v'||^2 / lengthscale^2)``.  When ``lengthscale`` is
    omitted it is set to the median pairwise Euclidean distance.  Only the
    top ``keep_fraction`` of edges by weight are retained (ties broken by
    lexicographic (u, v)); the rest are zeroed.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[0] < 2:
        raise ValueError("need an (n, d) feature matrix with n >= 2")
    if not np.isfinite(features).all():
        raise ValueError("features must be finite")
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")

    n = features.shape[0]
    if lengthscale is None:
        lengthscale = median_lengthscale(features)
        if lengthscale == 0.0:
            raise ValueError(
                "median pairwise distance is zero; pass an explicit lengthscale"
            )
    if lengthscale <= 0:
        raise ValueError(f"lengthscale must be positive, got {lengthscale}")

    weights = np.exp(-0.5 * pairwise_sq_dists(features) / lengthscale**2)
    np.fill_diagonal(weights, 0.0)

    if keep_fraction < 1.0:
        iu, iv = np.triu_indices(n, k=1)
        keep = int(np.ceil(keep_fraction * len(iu)))
        order = sorted(range(len(iu)), key=lambda k: (-weights[iu[k], iv[k]], iu[k], iv[k]))
        kept = np.zeros((n, n))
        for k in order[:keep]:
            kept[iu[k], iv[k]] = kept[iv[k], iu[k]] = weights[iu[k], iv[k]]
        weights = kept

    return InformationGraph(n=n, weights=weights, lengthscale=float(lengthscale))


def save_edge_list(path, graph: InformationGraph) -> None:
    """Write nonzero edges as ``u v weight`` lines, sorted by (u, v)."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in range(graph.n):
            for v in range(u + 1, graph.n):
                w = graph.weights[u, v]
                if w != 0.0:
                    fh.write(f"{u} {v} {w:.17g}\n")


def _subset_mask(n: int, subset) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for j in subset:
        if not 0 <= j < n:
            raise ValueError(f"object id {j} outside [0, {n})")
        mask[j] = True
    return mask


def cut_eval(graph: InformationGraph, subset) -> float:
    """Total edge weight crossing between ``subset`` and its complement."""
    mask = _subset_mask(graph.n, subset)
    if not mask.any() or mask.all():
        return 0.0
    return float(graph.weights[mask][:, ~mask].sum())


class SetFunction:
    """A set function on subsets of ``range(n)``, normalized to F(empty) = 0.

    Wraps an arbitrary callable taking a frozenset; the offset F(empty) is
    subtracted at registration so every shipped function satisfies the
    normalization the feature-map increments assume.
    """

    def __init__(self, n: int, func):
        self.n = n
        self._func = func
        self._offset = float(func(frozenset()))

    def value(self, subset) -> float:
        return float(self._func(frozenset(subset))) - self._offset

    def prefix_values(self, blocks) -> np.ndarray:
        """F(B_1), ..., F(B_l) for the increasing prefixes of ``blocks``."""
        prefix: set[int] = set()
        out = np.empty(len(blocks))
        for i, b in enumerate(blocks):
            prefix.update(b)
            out[i] = self.value(prefix)
        return out

    def table(self) -> np.ndarray:
        """F over all 2**n subsets, indexed by bitmask (bit j = object j)."""
        if self.n > 20:
            raise ValueError(f"table() is exponential; n={self.n} is too large")
        vals = np.empty(2**self.n)
        for mask in range(2**self.n):
            vals[mask] = self.value([j for j in range(self.n) if mask >> j & 1])
        return vals


class CutFunction(SetFunction):
    """Graph cut function; evaluation is O(p) in the number of edges."""

    def __init__(self, graph: InformationGraph):
        self.graph = graph
        self.n = graph.n
        self._degrees = graph.weights.sum(axis=1)

    def value(self, subset) -> float:
        return cut_eval(self.graph, subset)

    def prefix_values(self, blocks) -> np.ndarray:
        # One O(n^2) pass per ranking: reorder objects block by block; the
        # cut of prefix p is the rectangle sum over rows < p, columns >= p.
        # Summing tail amounts (never differences of cuts) keeps every value
        # nonnegative and makes the full-set cut exactly zero.
        order = np.fromiter((j for b in blocks for j in sorted(b)), dtype=np.intp)
        if len(order) != self.n:
            raise ValueError("blocks must cover all objects")
        reordered = self.graph.weights[np.ix_(order, order)]
        rows = reordered.cumsum(axis=1)
        tails = rows[:, -1:] - rows  # tails[a, j] = sum of W[a, j+1:]
        cuts = np.diagonal(tails.cumsum(axis=0))  # cuts[p-1] = F(first p)
        boundaries = np.cumsum([len(b) for b in blocks]) - 1
        return cuts[boundaries]

    def table(self) -> np.ndarray:
        if self.n > 20:
            raise ValueError(f"table() is exponential; n={self.n} is too large")
        masks = np.arange(2**self.n, dtype=np.int64)
        x = (masks[:, None] >> np.arange(self.n)) & 1
        x = x.astype(float)
        return x @ self._degrees - np.einsum("ij,jk,ik->i", x, self.graph.weights, x)


def lovasz_extension(func: SetFunction, w) -> float:
    """Piecewise-linear extension of F evaluated at ``w``.

    Sorts coordinates in decreasing order (ties broken by ascending object
    id) and telescopes F over the sorted prefixes.  Agrees with F on
    indicator vectors.
    """
    w = np.asarray(w, dtype=float)
    if not np.isfinite(w).all():
        raise ValueError("w must be finite")
    n = func.n
    order = sorted(range(n), key=lambda j: (-w[j], j))
    prefix_vals = func.prefix_values([(j,) for j in order])
    total = w[order[-1]] * prefix_vals[-1]
    for k in range(n - 1):
        total += (w[order[k]] - w[order[k + 1]]) * prefix_vals[k]
    return float(total)


def greedy_vertex(func: SetFunction, perm) -> np.ndarray:
    """Edmonds greedy point: s[j_k] = F({j_1..j_k}) - F({j_1..j_{k-1}}).

    Lies in the base polytope whenever F is submodular, and always satisfies
    s(V) = F(V) by telescoping.
    """
    perm = list(perm)
    if sorted(perm) != list(range(func.n)):
        raise ValueError("perm must be a permutation of range(n)")
    prefix_vals = func.prefix_values([(j,) for j in perm])
    s = np.empty(func.n)
    prev = 0.0
    for k, j in enumerate(perm):
        s[j] = prefix_vals[k] - prev
        prev = prefix_vals[k]
    return s


def in_tangent_cone(
    func: SetFunction, partition: OrderedPartition, s, tol: float = 0.0
) -> bool:
    """Check the l-1 ordered-prefix constraints plus the total-mass equality."""
    if not is_exhaustive(partition):
        raise ValueError("tangent cone is defined for exhaustive partitions")
    s = np.asarray(s, dtype=float)
    prefix_vals = func.prefix_values(partition.blocks)
    prefix: set[int] = set()
    for i, block in enumerate(partition.blocks[:-1]):
        prefix.update(block)
        if s[list(prefix)].sum() > prefix_vals[i] + tol:
            return False
    return abs(s.sum() - prefix_vals[-1]) <= tol


def in_base_polytope(func: SetFunction, s, tol: float = 0.0) -> bool:
    """Exhaustively check all 2**n - 1 base-polytope constraints (n <= 20)."""
    if func.n > 20:
        raise ValueError(f"exponential check; n={func.n} is too large")
    s = np.asarray(s, dtype=float)
    table = func.table()
    n = func.n
    masks = np.arange(2**n, dtype=np.int64)
    x = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    sums = x @ s
    full = 2**n - 1
    if abs(sums[full] - table[full]) > tol:
        return False
    return bool((sums[1:full] <= table[1:full] + tol).all())


def is_submodular(func: SetFunction, tol: float = 1e-9) -> bool:
    """Exhaustive pairwise diminishing-returns check (n <= 12)."""
    if func.n > 12:
        raise ValueError(f"exponential check; n={func.n} is too large")
    table = func.table()
    size = 2**func.n
    masks = np.arange(size, dtype=np.int64)
    for s_mask in range(size):
        union = table[masks | s_mask]
        inter = table[masks & s_mask]
        if ((table[s_mask] + table) < union + inter - tol).any():
            return False
    return True


def is_compatible(w, partition: OrderedPartition, tol: float = 0.0) -> bool:
    """True iff ``w`` is constant on each block and block values are
    non-increasing from the least- to the most-preferred block."""
    if not is_exhaustive(partition):
        raise ValueError("compatibility is defined for exhaustive partitions")
    w = np.asarray(w, dtype=float)
    prev = np.inf
    for block in partition.blocks:
        vals = w[sorted(block)]
        if vals.max() - vals.min() > tol:
            return False
        if vals.max() > prev + tol:
            return False
        prev = vals.min()
    return True
