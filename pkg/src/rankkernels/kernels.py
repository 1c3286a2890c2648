"""Ranking kernels and Gram-matrix assembly.

The submodular kernel is the linear kernel on per-ranking feature maps, so
a Gram matrix costs one feature map per ranking plus one matrix product.
Kendall and Mallows baselines operate on pairwise concordance; all kernels
extend to non-exhaustive rankings by averaging over coherent exhaustive
extensions (exactly, or by seeded sampling).
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .isotonic import feature_map, mean_feature_map
from .rankings import OrderedPartition, coherent_extensions, is_exhaustive, sample_extension
from .submodular import SetFunction


@dataclass
class GramMatrix:
    """An m x m kernel matrix with provenance."""

    values: np.ndarray
    ranking_ids: np.ndarray
    kernel_kind: str
    params: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def k_s(phi: np.ndarray, phi_prime: np.ndarray) -> float:
    """Submodular kernel: inner product of two feature maps."""
    phi = np.asarray(phi, dtype=float)
    phi_prime = np.asarray(phi_prime, dtype=float)
    if phi.shape != phi_prime.shape:
        raise ValueError(f"dimension mismatch: {phi.shape} vs {phi_prime.shape}")
    return float(phi @ phi_prime)


def k_c(
    func: SetFunction,
    a: OrderedPartition,
    a_prime: OrderedPartition,
    mode: str = "exact",
    n_samples: int = 600,
    seed: int = 0,
    budget: int = 100_000,
) -> float:
    """Convolution kernel: inner product of mean feature maps.

    Exact mode equals the double average of the submodular kernel over all
    pairs of coherent extensions; exhaustive inputs reduce to :func:`k_s`.
    The two inputs draw from independent streams derived from ``seed``.
    """
    phi = mean_feature_map(func, a, mode, n_samples, np.random.default_rng((seed, 0)), budget)
    phi_prime = mean_feature_map(
        func, a_prime, mode, n_samples, np.random.default_rng((seed, 1)), budget
    )
    return k_s(phi, phi_prime)


def compute_feature_maps(
    func: SetFunction,
    rankings,
    mode: str = "exact",
    n_samples: int = 600,
    seed: int = 0,
    budget: int = 100_000,
    n_jobs: int = 1,
) -> np.ndarray:
    """Phase 1 of Gram assembly: the (m, n) matrix of (mean) feature maps.

    Sampled maps for ranking ``i`` use the stream ``(seed, i)``, so the
    result is identical for any ``n_jobs``.
    """
    rankings = list(rankings)
    _check_universe(rankings, func.n)
    out = np.empty((len(rankings), func.n))

    def fill(i: int) -> None:
        out[i] = mean_feature_map(
            func, rankings[i], mode, n_samples, np.random.default_rng((seed, i)), budget
        )

    if n_jobs == 1 or len(rankings) < 2:
        for i in range(len(rankings)):
            fill(i)
    else:
        workers = n_jobs if n_jobs and n_jobs > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(len(rankings))))
    return out


def gram_from_feature_maps(phi: np.ndarray) -> np.ndarray:
    """Phase 2 of Gram assembly: the matrix of pairwise inner products."""
    phi = np.asarray(phi, dtype=float)
    return phi @ phi.T


def gram_submodular(
    func: SetFunction,
    rankings,
    mode: str = "exact",
    n_samples: int = 600,
    seed: int = 0,
    budget: int = 100_000,
    n_jobs: int = 1,
) -> GramMatrix:
    """Gram matrix of the submodular kernel over a ranking dataset."""
    phi = compute_feature_maps(func, rankings, mode, n_samples, seed, budget, n_jobs)
    return GramMatrix(
        values=gram_from_feature_maps(phi),
        ranking_ids=np.arange(phi.shape[0]),
        kernel_kind="submodular",
        params={"mode": mode, "n_samples": n_samples, "seed": seed},
    )


def _check_universe(rankings, n: int) -> None:
    for r in rankings:
        if r.n != n:
            raise ValueError(f"mixed universes: expected n={n}, found n={r.n}")


def _block_ranks(partition: OrderedPartition) -> np.ndarray:
    """Block index per object (0 = least preferred); exhaustive only."""
    ranks = np.empty(partition.n, dtype=np.intp)
    for i, block in enumerate(partition.blocks):
        ranks[list(block)] = i
    return ranks


def _pair_signs(partition: OrderedPartition) -> np.ndarray:
    """sign(rank[u] - rank[v]) over all pairs u < v, as a flat vector."""
    ranks = _block_ranks(partition)
    iu, iv = np.triu_indices(partition.n, k=1)
    return np.sign(ranks[iu] - ranks[iv]).astype(float)


def _count_inversions(seq) -> int:
    """Merge-sort inversion count, O(n log n)."""
    seq = list(seq)
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _count_inversions(left) + _count_inversions(right)
    left = sorted(left)
    right = sorted(right)
    i = j = k = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            seq[k] = left[i]
            i += 1
        else:
            seq[k] = right[j]
            inv += len(left) - i
            j += 1
        k += 1
    return inv


def _is_full(partition: OrderedPartition) -> bool:
    return is_exhaustive(partition) and all(len(b) == 1 for b in partition.blocks)


def _require_exhaustive_pair(a: OrderedPartition, a_prime: OrderedPartition) -> None:
    if a.n != a_prime.n:
        raise ValueError(f"mixed universes: n={a.n} vs n={a_prime.n}")
    if not (is_exhaustive(a) and is_exhaustive(a_prime)):
        raise ValueError(
            "kendall/mallows need exhaustive rankings; "
            "use the convolution wrapper for non-exhaustive inputs"
        )


def discordant_pairs(a: OrderedPartition, a_prime: OrderedPartition) -> int:
    """Pairs ordered oppositely by the two rankings.

    Full rankings go through an O(n log n) inversion count; ties fall back
    to pair enumeration.
    """
    _require_exhaustive_pair(a, a_prime)
    if _is_full(a) and _is_full(a_prime):
        ranks_a = _block_ranks(a)
        order_prime = np.argsort(_block_ranks(a_prime))
        return _count_inversions(ranks_a[order_prime])
    s, s_prime = _pair_signs(a), _pair_signs(a_prime)
    return int(np.count_nonzero(s * s_prime < 0))


def kendall_tau(a: OrderedPartition, a_prime: OrderedPartition) -> float:
    """Kendall correlation between two exhaustive rankings.

    Tie-free inputs use the merge-sort inversion count and the plain
    (concordant - discordant) / C(n, 2) statistic; inputs with tied blocks
    use the tau-b normalization via pair enumeration.
    """
    _require_exhaustive_pair(a, a_prime)
    n = a.n
    n0 = n * (n - 1) // 2
    if n0 == 0:
        return 1.0
    if _is_full(a) and _is_full(a_prime):
        return (n0 - 2 * discordant_pairs(a, a_prime)) / n0
    s, s_prime = _pair_signs(a), _pair_signs(a_prime)
    numerator = float(s @ s_prime)
    denom = np.sqrt(np.count_nonzero(s) * np.count_nonzero(s_prime))
    if denom == 0.0:
        return 0.0
    return numerator / denom


def mallows(a: OrderedPartition, a_prime: OrderedPartition, lam: float) -> float:
    """Mallows kernel exp(-lam * d) with the discordant-pair count d
    normalized by C(n, 2), so ``lam`` is scale-free across n."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    _require_exhaustive_pair(a, a_prime)
    n0 = a.n * (a.n - 1) // 2
    if n0 == 0:
        return 1.0
    return float(np.exp(-lam * discordant_pairs(a, a_prime) / n0))


def _baseline_value(kind: str, lam: float):
    if kind == "kendall":
        return kendall_tau
    if kind == "mallows":
        return lambda a, b: mallows(a, b, lam)
    raise ValueError(f"unknown baseline kernel {kind!r}")


def gram_baseline(
    kind: str,
    rankings,
    lam: float = 1.0,
    mode: str = "exact",
    n_samples: int = 600,
    seed: int = 0,
    budget: int = 1_000_000,
) -> GramMatrix:
    """Gram matrix for the Kendall or Mallows baseline.

    Non-exhaustive entries are the double average of the base kernel over
    coherent extensions.  The baseline does not factor into mean maps, so
    exact mode sums over all extension pairs (``budget`` bounds the term
    count per entry) and sampled mode draws ``n_samples`` paired extensions
    from the stream ``(seed, i, j)`` per entry.
    """
    rankings = list(rankings)
    if rankings:
        _check_universe(rankings, rankings[0].n)
    value = _baseline_value(kind, lam)
    m = len(rankings)
    if rankings and all(is_exhaustive(r) for r in rankings):
        gram = _gram_baseline_exhaustive(kind, rankings, lam)
    else:
        gram = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                gram[i, j] = gram[j, i] = _baseline_entry(
                    value, rankings[i], rankings[j], mode, n_samples, (seed, i, j), budget
                )
    params = {"mode": mode, "n_samples": n_samples, "seed": seed}
    if kind == "mallows":
        params["lambda"] = lam
    return GramMatrix(
        values=gram,
        ranking_ids=np.arange(m),
        kernel_kind=kind,
        params=params,
    )


def _gram_baseline_exhaustive(kind: str, rankings, lam: float) -> np.ndarray:
    """Vectorized baseline Gram for all-exhaustive datasets.

    Sign-vector dot products are exactly the concordant-minus-discordant
    integers of the per-pair statistics, so the result matches the scalar
    path bit for bit (for full rankings, sqrt(n0 * n0) == n0 exactly).
    """
    n = rankings[0].n
    n0 = n * (n - 1) // 2
    m = len(rankings)
    if n0 == 0:
        return np.ones((m, m))
    signs = np.stack([_pair_signs(r) for r in rankings])
    dots = signs @ signs.T
    if kind == "kendall":
        nonzero = np.count_nonzero(signs, axis=1).astype(float)
        denom = np.sqrt(np.outer(nonzero, nonzero))
        return np.divide(dots, denom, out=np.zeros_like(dots), where=denom != 0.0)
    overlap = np.abs(signs) @ np.abs(signs).T
    discordant = (overlap - dots) / 2
    return np.exp(-lam * discordant / n0)


def _baseline_entry(value, a, a_prime, mode, n_samples, stream_key, budget) -> float:
    if is_exhaustive(a) and is_exhaustive(a_prime):
        return value(a, a_prime)
    if mode == "exact":
        exts = coherent_extensions(a, budget)
        exts_prime = coherent_extensions(a_prime, budget)
        if len(exts) * len(exts_prime) > budget:
            raise ValueError(
                f"{len(exts) * len(exts_prime)} extension pairs exceed the budget of {budget}"
            )
        total = sum(value(x, y) for x in exts for y in exts_prime)
        return total / (len(exts) * len(exts_prime))
    if mode == "sampled":
        rng = np.random.default_rng(stream_key)
        total = 0.0
        for _ in range(n_samples):
            total += value(sample_extension(a, rng), sample_extension(a_prime, rng))
        return total / n_samples
    raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")


def cross_gram_baseline(
    kind: str,
    rankings,
    train_rankings,
    lam: float = 1.0,
    mode: str = "exact",
    n_samples: int = 600,
    seed: int = 0,
    budget: int = 1_000_000,
) -> np.ndarray:
    """Baseline kernel values between two ranking collections (rows x
    columns), with the same non-exhaustive handling as :func:`gram_baseline`."""
    rankings, train_rankings = list(rankings), list(train_rankings)
    if rankings and train_rankings:
        _check_universe(rankings + train_rankings, train_rankings[0].n)
    value = _baseline_value(kind, lam)
    out = np.empty((len(rankings), len(train_rankings)))
    for i, a in enumerate(rankings):
        for j, b in enumerate(train_rankings):
            out[i, j] = _baseline_entry(value, a, b, mode, n_samples, (seed, i, j), budget)
    return out


def psd_check(gram, jitter: float = 1e-8) -> bool:
    """True iff a Cholesky factorization of K + jitter * I succeeds."""
    values = gram.values if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(f"need a square matrix, got shape {values.shape}")
    asym = np.abs(values - values.T).max()
    if asym > 1e-9:
        raise ValueError(f"matrix is asymmetric by {asym:.3g}")
    try:
        np.linalg.cholesky(values + jitter * np.eye(values.shape[0]))
        return True
    except np.linalg.LinAlgError:
        return False


GRAM_MAGIC = b"GRAM"
GRAM_VERSION = 1


def save_gram_binary(path, gram: GramMatrix) -> None:
    """Raw binary Gram: 16-byte header (magic, version u32, m u64, all
    little-endian) then m*m little-endian float64, row-major."""
    values = np.ascontiguousarray(gram.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(GRAM_MAGIC)
        fh.write(struct.pack("<IQ", GRAM_VERSION, values.shape[0]))
        fh.write(values.tobytes())


def load_gram_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != GRAM_MAGIC:
            raise ValueError(f"{path}: not a Gram binary file")
        version, m = struct.unpack("<IQ", header[4:])
        if version != GRAM_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != m * m:
        raise ValueError(f"{path}: expected {m * m} values, found {data.size}")
    return data.reshape(m, m).astype(float)


def save_gram_csv(path, gram: GramMatrix) -> None:
    """Gram matrix as CSV at 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in gram.values:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_gram_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
