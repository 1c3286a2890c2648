"""Rankings as ordered partitions.

A ranking over ``n`` objects (ids ``0..n-1``) is stored as an ordered
partition: a sequence of disjoint non-empty blocks, least-preferred block
first.  Objects sharing a block are tied.  A partition is *exhaustive* when
its blocks cover every object; full and top-k rankings are exhaustive,
interleaving rankings are not.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class ParseError(ValueError):
    """Malformed ranking text.  ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExtensionBudgetError(RuntimeError):
    """Exhaustive-extension enumeration would exceed the caller's budget."""


@dataclass(frozen=True)
class Universe:
    """The object set: a count plus optional display names and features."""

    n: int
    labels: tuple[str, ...] | None = None
    features: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"universe needs at least one object, got n={self.n}")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError(f"expected {self.n} labels, got {len(self.labels)}")
        if self.features is not None:
            feats = np.asarray(self.features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != self.n:
                raise ValueError(f"features must be an ({self.n}, d) matrix")
            object.__setattr__(self, "features", feats)


@dataclass(frozen=True)
class OrderedPartition:
    """Disjoint non-empty blocks of object ids, least preferred first."""

    n: int
    blocks: tuple[frozenset[int], ...]
    _objects: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if not self.blocks:
            raise ValueError("an ordered partition needs at least one block")
        blocks = tuple(frozenset(b) for b in self.blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            for j in b:
                if not (0 <= j < self.n):
                    raise ValueError(f"object id {j} outside [0, {self.n})")
                if j in seen:
                    raise ValueError(f"object id {j} appears in two blocks")
                seen.add(j)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_objects", frozenset(seen))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def objects(self) -> frozenset[int]:
        """All ranked object ids."""
        return self._objects

    def unranked(self) -> list[int]:
        """Object ids not mentioned by any block, ascending."""
        return [j for j in range(self.n) if j not in self._objects]

    def block_sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.blocks], dtype=np.intp)

    def block_of(self) -> dict[int, int]:
        """Map object id -> 0-based block index."""
        return {j: i for i, b in enumerate(self.blocks) for j in b}


def is_exhaustive(partition: OrderedPartition) -> bool:
    """True iff the blocks cover every object of the universe."""
    return len(partition.objects) == partition.n


def from_permutation(perm) -> OrderedPartition:
    """Full ranking from a permutation listed least -> most preferred."""
    perm = list(perm)
    n = len(perm)
    return OrderedPartition(n, tuple(frozenset((j,)) for j in perm))


def from_topk(ranked, n: int) -> OrderedPartition:
    """Top-k ranking: the k ranked ids as singletons, preceded by one tied
    block holding everything unranked (omitted when k == n)."""
    ranked = list(ranked)
    if not 1 <= len(ranked) <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={len(ranked)}")
    rest = frozenset(range(n)) - frozenset(ranked)
    if len(rest) != n - len(ranked):
        raise ValueError("duplicate id in top-k ranking")
    blocks = tuple(frozenset((j,)) for j in ranked)
    if rest:
        blocks = (rest,) + blocks
    return OrderedPartition(n, blocks)


def parse_ranking(text: str, n: int) -> OrderedPartition:
    """Parse one rankings-file line into an ordered partition.

    Grammar: blocks separated by ``<`` (least -> most preferred), object ids
    within a block separated by ``,``.  Ids are decimal non-negative
    integers.  Faults are reported with the byte offset of the offending
    token.
    """
    blocks: list[frozenset[int]] = []
    seen: set[int] = set()
    pos = 0
    for chunk in text.split("<"):
        ids: set[int] = set()
        tok_pos = pos
        for token in chunk.split(","):
            stripped = token.strip()
            offset = tok_pos + token.index(stripped) if stripped else tok_pos
            if not stripped:
                raise ParseError("empty block", offset)
            if not stripped.isdigit():
                raise ParseError(f"malformed token {stripped!r}", offset)
            j = int(stripped)
            if j >= n:
                raise ParseError(f"object id {j} >= n={n}", offset)
            if j in seen:
                raise ParseError(f"duplicate object id {j}", offset)
            seen.add(j)
            ids.add(j)
            tok_pos += len(token) + 1
        blocks.append(frozenset(ids))
        pos += len(chunk) + 1
    return OrderedPartition(n, tuple(blocks))


def format_ranking(partition: OrderedPartition) -> str:
    """Inverse of :func:`parse_ranking` (ids within a block ascending)."""
    return " < ".join(",".join(str(j) for j in sorted(b)) for b in partition.blocks)


def count_extensions(partition: OrderedPartition) -> int:
    """Number of coherent exhaustive extensions: (l+1)**u for u unranked."""
    u = partition.n - len(partition.objects)
    return (partition.num_blocks + 1) ** u


def _extend_with_gaps(partition: OrderedPartition, unranked: list[int], gaps) -> OrderedPartition:
    """Insert each unranked object at its gap (0 = before the first block,
    l = after the last); objects sharing a gap become one tied block."""
    l = partition.num_blocks
    at_gap: dict[int, set[int]] = {}
    for j, g in zip(unranked, gaps):
        at_gap.setdefault(g, set()).add(j)
    blocks: list[frozenset[int]] = []
    for i in range(l + 1):
        if i in at_gap:
            blocks.append(frozenset(at_gap[i]))
        if i < l:
            blocks.append(partition.blocks[i])
    return OrderedPartition(partition.n, tuple(blocks))


def coherent_extensions(
    partition: OrderedPartition, budget: int = 100_000
) -> list[OrderedPartition]:
    """All exhaustive ordered partitions coherent with ``partition``.

    Each unranked object is assigned to one of the l+1 gaps around the
    existing blocks; objects sharing a gap form a single tied block.  The
    enumeration is lexicographic in the gap-assignment vector with unranked
    objects taken in ascending id order.  For an exhaustive input the list
    contains just the input itself.
    """
    if is_exhaustive(partition):
        return [partition]
    total = count_extensions(partition)
    if total > budget:
        raise ExtensionBudgetError(
            f"{total} coherent extensions exceed the budget of {budget}"
        )
    unranked = partition.unranked()
    l = partition.num_blocks
    return [
        _extend_with_gaps(partition, unranked, gaps)
        for gaps in itertools.product(range(l + 1), repeat=len(unranked))
    ]


def sample_extension(
    partition: OrderedPartition, rng: np.random.Generator
) -> OrderedPartition:
    """One coherent exhaustive extension, each unranked object's gap drawn
    independently and uniformly.  Uniform over :func:`coherent_extensions`."""
    if is_exhaustive(partition):
        return partition
    unranked = partition.unranked()
    gaps = rng.integers(0, partition.num_blocks + 1, size=len(unranked))
    return _extend_with_gaps(partition, unranked, gaps)
