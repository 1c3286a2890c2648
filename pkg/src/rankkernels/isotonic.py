"""Weighted isotonic regression and the per-ranking feature map.

Given a submodular function F and an exhaustive ordered partition, each
block gets an unconstrained target ``-(F(B_i) - F(B_{i-1})) / |A_i|``.
Projecting the targets onto non-decreasing sequences in the block-size
weighted norm (pool adjacent violators) yields one value per block; reading
those values back per object gives the n-dimensional feature map whose
inner products define the ranking kernel.  Higher values mean more
preferred, the entries sum to -F(V) (zero for cut functions), and blocks
left unmerged keep their closed-form target exactly.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .rankings import (
    OrderedPartition,
    coherent_extensions,
    count_extensions,
    is_exhaustive,
    sample_extension,
)
from .submodular import SetFunction


class BlockTargets(NamedTuple):
    """Per-block unconstrained optima and positive block weights."""

    a: np.ndarray
    beta: np.ndarray


def block_targets(func: SetFunction, partition: OrderedPartition) -> BlockTargets:
    """Closed-form block values: a_i = -(F(B_i) - F(B_{i-1})) / |A_i|,
    weighted by the block sizes beta_i = |A_i|."""
    if not is_exhaustive(partition):
        raise ValueError("block targets need an exhaustive partition")
    prefix_vals = func.prefix_values(partition.blocks)
    increments = np.diff(prefix_vals, prepend=0.0)
    beta = partition.block_sizes().astype(float)
    return BlockTargets(a=-increments / beta, beta=beta)


def pava_runs(targets: BlockTargets) -> list[tuple[int, int, float]]:
    """Weighted pool-adjacent-violators, returning pooled runs.

    Each run is ``(start, stop, value)`` over half-open block-index ranges;
    run values are strictly increasing.  Runs whose targets were already
    equal are pooled without arithmetic so an already-monotone input comes
    back bit-for-bit.
    """
    a = np.asarray(targets.a, dtype=float)
    beta = np.asarray(targets.beta, dtype=float)
    if a.ndim != 1 or a.shape != beta.shape or len(a) == 0:
        raise ValueError("targets and weights must be equal-length 1-d arrays")
    if (beta <= 0).any():
        raise ValueError("block weights must be positive")

    runs: list[list] = []  # [start, stop, value, weight]
    for i in range(len(a)):
        value, weight = a[i], beta[i]
        start = i
        while runs and value <= runs[-1][2]:
            prev = runs.pop()
            if prev[2] != value:
                value = (prev[3] * prev[2] + weight * value) / (prev[3] + weight)
            weight += prev[3]
            start = prev[0]
        runs.append([start, i + 1, value, weight])
    return [(start, stop, value) for start, stop, value, _ in runs]


def pava(targets: BlockTargets) -> np.ndarray:
    """Minimizer of sum beta_i (v_i - a_i)^2 over non-decreasing v."""
    out = np.empty(len(targets.a))
    for start, stop, value in pava_runs(targets):
        out[start:stop] = value
    return out


def isotonic_bruteforce(targets: BlockTargets) -> np.ndarray:
    """Independent oracle: enumerate all 2**(l-1) adjacent-merge patterns,
    keep those whose weighted run means are non-decreasing, and return the
    feasible candidate with the smallest objective."""
    a = np.asarray(targets.a, dtype=float)
    beta = np.asarray(targets.beta, dtype=float)
    l = len(a)
    if l > 12:
        raise ValueError(f"brute force is exponential; l={l} is too large")

    best = None
    best_obj = np.inf
    for pattern in itertools.product((False, True), repeat=l - 1):
        bounds = [0] + [i + 1 for i, cut in enumerate(pattern) if cut] + [l]
        v = np.empty(l)
        means = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            mean = float(beta[lo:hi] @ a[lo:hi] / beta[lo:hi].sum())
            means.append(mean)
            v[lo:hi] = mean
        if any(m2 < m1 for m1, m2 in zip(means[:-1], means[1:])):
            continue
        obj = float(beta @ (v - a) ** 2)
        if obj < best_obj:
            best_obj = obj
            best = v
    return best


def feature_map(func: SetFunction, partition: OrderedPartition) -> np.ndarray:
    """The n-vector assigning each object its isotonic block value."""
    if not is_exhaustive(partition):
        raise ValueError("feature_map needs an exhaustive partition; "
                         "use mean_feature_map for non-exhaustive rankings")
    values = pava(block_targets(func, partition))
    phi = np.empty(partition.n)
    for i, block in enumerate(partition.blocks):
        phi[list(block)] = values[i]
    return phi


def basic_partition(func: SetFunction, partition: OrderedPartition) -> OrderedPartition:
    """Coarsen ``partition`` by merging the blocks PAVA pooled together; the
    result's block values are strictly increasing and its feature map equals
    the input's."""
    if not is_exhaustive(partition):
        raise ValueError("basic partition needs an exhaustive partition")
    runs = pava_runs(block_targets(func, partition))
    blocks = tuple(
        frozenset().union(*partition.blocks[start:stop]) for start, stop, _ in runs
    )
    return OrderedPartition(partition.n, blocks)


def mean_feature_map(
    func: SetFunction,
    partition: OrderedPartition,
    mode: str = "exact",
    n_samples: int = 600,
    rng: np.random.Generator | int | None = None,
    budget: int = 100_000,
) -> np.ndarray:
    """Mean of :func:`feature_map` over the coherent exhaustive extensions.

    ``mode="exact"`` enumerates every extension (guarded by ``budget``);
    ``mode="sampled"`` averages over ``n_samples`` uniform draws from the
    seeded stream ``rng``.  Exhaustive inputs return their feature map
    under either mode.
    """
    if is_exhaustive(partition):
        return feature_map(func, partition)
    if mode == "exact":
        maps = [feature_map(func, ext) for ext in coherent_extensions(partition, budget)]
    elif mode == "sampled":
        rng = np.random.default_rng(rng)
        maps = [
            feature_map(func, sample_extension(partition, rng))
            for _ in range(n_samples)
        ]
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    return np.mean(maps, axis=0)


def extension_count(partition: OrderedPartition) -> int:
    """Convenience re-export of the coherent-extension cardinality."""
    return count_extensions(partition)
