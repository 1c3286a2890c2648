"""Synthetic food-preference data and ranking-dataset I/O.

Eight dishes carry three features (sweet, savoury, juicy).  Two user types
weight the features by opposite priority orders; a user's ranking is the
argsort of the type's scores plus Gaussian jitter.  Censoring transforms
turn full rankings into top-k, exhaustive-interleaving, or interleaving
rankings.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .rankings import (
    OrderedPartition,
    Universe,
    format_ranking,
    from_permutation,
    from_topk,
    parse_ranking,
)

FOOD_NAMES = ("cake", "biscuit", "gelato", "steak", "burger", "sausage", "pasta", "pizza")

# rows = dishes, columns = (sweet, savouriness, juicy)
FOOD_FEATURES = np.array(
    [
        [0.9, 0.0, 0.3],  # cake
        [0.7, 0.1, 0.0],  # biscuit
        [1.0, 0.0, 0.7],  # gelato
        [0.0, 0.8, 0.8],  # steak
        [0.2, 0.8, 0.9],  # burger
        [0.1, 1.0, 1.0],  # sausage
        [0.4, 0.7, 0.7],  # pasta
        [0.4, 0.9, 0.6],  # pizza
    ]
)

IMPORTANCE_WEIGHTS = (1.0, 0.17, 0.09)

# feature priority per user type: type one values sweetness most, type two
# is the exact reverse
TYPE_ORDERINGS = {"one": (0, 1, 2), "two": (2, 1, 0)}


@dataclass(frozen=True)
class FoodModel:
    """The synthetic preference model: feature table, importance weights,
    and the per-type feature priority orders."""

    features: np.ndarray = field(default_factory=lambda: FOOD_FEATURES.copy())
    importance_weights: tuple[float, ...] = IMPORTANCE_WEIGHTS
    type_orderings: dict = field(default_factory=lambda: dict(TYPE_ORDERINGS))


def food_universe() -> Universe:
    return Universe(n=len(FOOD_NAMES), labels=FOOD_NAMES, features=FOOD_FEATURES)


def _type_weights(user_type: str) -> np.ndarray:
    if user_type not in TYPE_ORDERINGS:
        raise ValueError(f"user_type must be 'one' or 'two', got {user_type!r}")
    weights = np.empty(3)
    for priority, feature in enumerate(TYPE_ORDERINGS[user_type]):
        weights[feature] = IMPORTANCE_WEIGHTS[priority]
    return weights


def food_scores(user_type: str) -> np.ndarray:
    """Importance-weighted feature sums, one score per dish."""
    return FOOD_FEATURES @ _type_weights(user_type)


def table_scores(user_type: str) -> np.ndarray:
    """Scores rounded to two decimals: the published score table, which is
    also what the ranking sampler jitters.  The rounding matters: at full
    precision type two puts gelato a hair above pizza, while the rounded
    scores tie them and the stable argsort order matches the published
    noise-free preferences."""
    return np.round(food_scores(user_type), 2)


def noise_free_preferences(user_type: str) -> np.ndarray:
    """Per-dish preference ranks of the noise-free scores (0 = least
    favourite, 7 = most)."""
    order = np.argsort(table_scores(user_type), kind="stable")
    ranks = np.empty(len(order), dtype=np.intp)
    ranks[order] = np.arange(len(order))
    return ranks


def standard_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Gaussian draws via inverse CDF of the uniform integer stream: the
    same seed gives the same bytes on every platform."""
    u = (rng.integers(0, 2**53, size=size) + 0.5) * 2.0**-53
    return ndtri(u)


def sample_food_ranking(
    user_type: str, sigma: float, rng: np.random.Generator
) -> OrderedPartition:
    """Full ranking by ascending jittered score (least preferred first)."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    scores = table_scores(user_type) + sigma * standard_normal(rng, len(FOOD_NAMES))
    return from_permutation(np.argsort(scores, kind="stable"))


def _check_full(partition: OrderedPartition) -> None:
    if partition.num_blocks != partition.n or any(
        len(b) != 1 for b in partition.blocks
    ):
        raise ValueError("censoring needs a full (all-singleton) ranking")


def censor(
    full: OrderedPartition,
    kind: str,
    size: int,
    rng: np.random.Generator | None = None,
) -> OrderedPartition:
    """Reduce a full ranking to a partial one.

    kind="topk":  keep the ``size`` most-preferred objects as singletons and
       pool the rest into the least-preferred block.
    kind="exhaustive_interleave":  merge into ``size`` contiguous blocks with
       boundaries drawn uniformly over the compositions.
    kind="interleave":  keep a uniform random subset of ``size`` objects as
       singletons in their original relative order (non-exhaustive).
    """
    _check_full(full)
    n = full.n
    if not 1 <= size <= n:
        raise ValueError(f"size must be in [1, {n}], got {size}")
    if kind != "topk" and rng is None:
        raise ValueError(f"censoring kind {kind!r} needs a random stream")
    order = [next(iter(b)) for b in full.blocks]
    if kind == "topk":
        return from_topk(order[n - size:], n)
    if kind == "exhaustive_interleave":
        if size == n:
            return full
        cuts = np.sort(rng.choice(n - 1, size=size - 1, replace=False)) + 1
        bounds = [0, *cuts.tolist(), n]
        blocks = tuple(
            frozenset(order[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])
        )
        return OrderedPartition(n, blocks)
    if kind == "interleave":
        keep = set(rng.choice(n, size=size, replace=False).tolist())
        blocks = tuple(frozenset((j,)) for j in order if j in keep)
        return OrderedPartition(n, blocks)
    raise ValueError(f"unknown censoring kind {kind!r}")


@dataclass
class LabeledRankingDataset:
    """Rankings paired with labels in {-1, +1}."""

    rankings: list[OrderedPartition]
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.rankings) != len(self.labels):
            raise ValueError("rankings and labels must have equal length")
        if not np.isin(self.labels, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")

    def __len__(self) -> int:
        return len(self.rankings)


def generate_dataset(
    m: int,
    sigma: float,
    kind: str = "full",
    size: int | None = None,
    seed: int = 0,
) -> LabeledRankingDataset:
    """Balanced dataset: m/2 type-one users (label +1) then m/2 type-two
    users (label -1), each ranking sampled then censored, all from one
    seeded stream."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    if m % 2:
        warnings.warn(f"m={m} is odd; generating {m // 2} users per class")
    per_class = m // 2
    rng = np.random.default_rng(seed)
    rankings: list[OrderedPartition] = []
    labels: list[int] = []
    for user_type, label in (("one", 1), ("two", -1)):
        for _ in range(per_class):
            ranking = sample_food_ranking(user_type, sigma, rng)
            if kind != "full":
                ranking = censor(ranking, kind, size, rng)
            rankings.append(ranking)
            labels.append(label)
    return LabeledRankingDataset(rankings=rankings, labels=np.array(labels))


def save_rankings(path, rankings, n: int) -> None:
    """Rankings file: a ``#n=<count>`` header, then one ranking per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#n={n}\n")
        for r in rankings:
            if r.n != n:
                raise ValueError(f"ranking over n={r.n} in a file with n={n}")
            fh.write(format_ranking(r) + "\n")


def load_rankings(path) -> tuple[list[OrderedPartition], int]:
    """Parse a rankings file; errors carry the offending line number."""
    rankings: list[OrderedPartition] = []
    n = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                if text.startswith("#n=") and n is None:
                    try:
                        n = int(text[3:])
                    except ValueError:
                        raise ValueError(f"{path}:{lineno}: malformed #n= header") from None
                continue
            if n is None:
                raise ValueError(f"{path}:{lineno}: missing #n=<count> header")
            try:
                rankings.append(parse_ranking(text, n))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if n is None:
        raise ValueError(f"{path}: missing #n=<count> header")
    return rankings, n


def save_labels(path, labels) -> None:
    """Labels CSV: header then ``row_index,label`` rows."""
    labels = np.asarray(labels, dtype=int)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row_index,label\n")
        for i, y in enumerate(labels):
            fh.write(f"{i},{y:+d}\n")


def load_labels(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "row_index,label":
            raise ValueError(f"{path}: expected header 'row_index,label'")
        labels = []
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                continue
            try:
                idx, y = text.split(",")
                idx, y = int(idx), int(y)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed label row") from None
            if idx != len(labels):
                raise ValueError(f"{path}:{lineno}: row_index {idx} out of order")
            if y not in (-1, 1):
                raise ValueError(f"{path}:{lineno}: label must be -1 or +1")
            labels.append(y)
    return np.array(labels, dtype=int)


def save_features_csv(path, features) -> None:
    """Feature CSV: header ``id,f1,...,fd`` then one row per object."""
    features = np.asarray(features, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(f"f{k + 1}" for k in range(features.shape[1])) + "\n")
        for i, row in enumerate(features):
            fh.write(f"{i}," + ",".join(f"{x:.17g}" for x in row) + "\n")


def load_features_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "id":
            raise ValueError(f"{path}: expected an 'id,f1,...' header")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            try:
                idx = int(parts[0])
                vals = [float(x) for x in parts[1:]]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed feature row") from None
            if idx != len(rows):
                raise ValueError(f"{path}:{lineno}: id {idx} out of order")
            if len(vals) != len(header) - 1:
                raise ValueError(f"{path}:{lineno}: expected {len(header) - 1} features")
            rows.append(vals)
    return np.array(rows, dtype=float)
