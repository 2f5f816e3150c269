"""Markov-time sweep: Louvain ensembles per time, VI diagnostics, scale selection.

At every grid time the optimizer runs ``n_repeats`` times from different
seeds; the ensemble mean Variation of Information measures reproducibility
at that time, and the cross-time VI matrix between the best partitions
locates plateaux where one partition persists across resolutions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernel import MarkovKernel
from .stability import Partition, StabilityScore, coupling_matrix, maximize_coupling

# Above this many repeats the ensemble VI mean is estimated from a seeded
# subsample of pairs instead of all ~R^2/2 of them.
VI_PAIR_SUBSAMPLE_REPEATS = 150
VI_MAX_PAIRS = 10_000

# Seed-derivation tag for the pair-subsampling stream; outside any valid
# repeat index so it can never collide with a Louvain seed.
_VI_SAMPLE_TAG = 2**32

# Keeps plateau scores finite when the ensemble VI is exactly zero.
SCORE_EPS = 1e-9

__all__ = [
    "ScanPoint",
    "ScanResult",
    "SelectedScale",
    "TimeGrid",
    "cross_vi_matrix",
    "run_scan",
    "scan_point",
    "select_scales",
    "variation_of_information",
]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, log-uniform Markov times."""

    times: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("grid needs at least 2 times")
        if t[0] <= 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be positive and strictly increasing")
        ratios = np.diff(np.log(t))
        if not np.allclose(ratios, ratios[0], rtol=1e-9, atol=1e-12):
            raise ValueError("times must be log-uniformly spaced")
        t.flags.writeable = False

    @classmethod
    def logspaced(cls, t_min: float = 1e-2, t_max: float = 1e2, n_points: int = 100) -> "TimeGrid":
        if not 0.0 < t_min < t_max:
            raise ValueError(f"need 0 < t_min < t_max, got [{t_min}, {t_max}]")
        if n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {n_points}")
        return cls(np.geomspace(t_min, t_max, n_points))

    @property
    def n_points(self) -> int:
        return int(self.times.size)

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class ScanPoint:
    """Per-time scan record: best ensemble member plus reproducibility."""

    index: int
    t: float
    best: StabilityScore
    n_communities: int
    vi_ensemble: float


@dataclass(frozen=True)
class ScanResult:
    grid: TimeGrid
    points: tuple[ScanPoint, ...]
    cross_vi: np.ndarray  # (n_points, n_points), symmetric, zero diagonal


@dataclass(frozen=True)
class SelectedScale:
    """A robust scale: a VI plateau with its representative partition."""

    t: float
    partition: Partition
    n_communities: int
    plateau_span: tuple[float, float]
    vi_dip_depth: float
    score: float
    index_span: tuple[int, int]


def variation_of_information(p1: Partition, p2: Partition) -> float:
    """VI(p1, p2) = H(p1) + H(p2) - 2 I(p1, p2) in nats.

    Zero exactly iff the partitions coincide up to relabeling; symmetric and
    a metric on partitions.
    """
    if p1.n != p2.n:
        raise ValueError(f"partition lengths differ: {p1.n} vs {p2.n}")
    if p1.canonical_key() == p2.canonical_key():
        return 0.0
    n = p1.n
    joint = p1.assignment * p2.n_communities + p2.assignment
    counts = np.bincount(joint, minlength=p1.n_communities * p2.n_communities)
    pij = counts.reshape(p1.n_communities, p2.n_communities) / n
    p_rows = pij.sum(axis=1)
    p_cols = pij.sum(axis=0)
    nz = pij > 0
    mi = float(np.sum(pij[nz] * np.log(pij[nz] / np.outer(p_rows, p_cols)[nz])))
    h1 = float(-np.sum(p_rows[p_rows > 0] * np.log(p_rows[p_rows > 0])))
    h2 = float(-np.sum(p_cols[p_cols > 0] * np.log(p_cols[p_cols > 0])))
    return max(h1 + h2 - 2.0 * mi, 0.0)


def _ensemble_mean_vi(partitions: list[Partition], rng: np.random.Generator) -> float:
    """Mean VI over unordered ensemble pairs, deduplicated by canonical form.

    Pairs are subsampled (seeded, without replacement) once the full pair
    count exceeds the VI_MAX_PAIRS budget for > VI_PAIR_SUBSAMPLE_REPEATS
    repeats.
    """
    r = len(partitions)
    n_pairs = r * (r - 1) // 2
    if n_pairs == 0:
        return 0.0
    cache: dict[tuple[bytes, bytes], float] = {}

    def pair_vi(a: Partition, b: Partition) -> float:
        ka, kb = a.canonical_key(), b.canonical_key()
        if ka == kb:
            return 0.0
        key = (ka, kb) if ka < kb else (kb, ka)
        if key not in cache:
            cache[key] = variation_of_information(a, b)
        return cache[key]

    if r > VI_PAIR_SUBSAMPLE_REPEATS and n_pairs > VI_MAX_PAIRS:
        chosen = rng.choice(n_pairs, size=VI_MAX_PAIRS, replace=False)
        chosen.sort()
        total = 0.0
        for lin in chosen:
            i, j = _pair_from_linear(int(lin), r)
            total += pair_vi(partitions[i], partitions[j])
        return total / VI_MAX_PAIRS
    total = 0.0
    for i in range(r):
        for j in range(i + 1, r):
            total += pair_vi(partitions[i], partitions[j])
    return total / n_pairs


def _pair_from_linear(lin: int, r: int) -> tuple[int, int]:
    """Invert the row-major enumeration of unordered pairs of range(r)."""
    i = r - 2 - int(math.floor(math.sqrt(-8 * lin + 4 * r * (r - 1) - 7) / 2.0 - 0.5))
    j = lin + i + 1 - r * (r - 1) // 2 + (r - i) * ((r - i) - 1) // 2
    return i, j


def louvain_seed(master_seed: int, t_index: int, repeat: int) -> np.random.SeedSequence:
    """Deterministic per-(time, repeat) seed stream."""
    return np.random.SeedSequence(entropy=(master_seed, t_index, repeat))


def scan_point(
    kernel: MarkovKernel,
    t: float,
    t_index: int,
    n_repeats: int,
    master_seed: int,
) -> ScanPoint:
    """Run the Louvain ensemble at one Markov time.

    The best member is the highest-r run, ties resolved to the lowest repeat
    index; vi_ensemble is the (possibly pair-subsampled) mean VI.
    """
    if n_repeats < 2:
        raise ValueError(f"n_repeats must be >= 2, got {n_repeats}")
    b = coupling_matrix(kernel, t)
    partitions: list[Partition] = []
    best: StabilityScore | None = None
    for rep in range(n_repeats):
        p, r = maximize_coupling(b, louvain_seed(master_seed, t_index, rep))
        partitions.append(p)
        if best is None or r > best.r:
            best = StabilityScore(t, r, p)
    vi_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=(master_seed, t_index, _VI_SAMPLE_TAG))
    )
    vi = _ensemble_mean_vi(partitions, vi_rng)
    assert best is not None
    return ScanPoint(t_index, t, best, best.partition.n_communities, vi)


def cross_vi_matrix(points: list[ScanPoint] | tuple[ScanPoint, ...]) -> np.ndarray:
    """VI between the best partitions of every pair of scan times."""
    m = len(points)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            v = variation_of_information(points[i].best.partition, points[j].best.partition)
            out[i, j] = out[j, i] = v
    return out


_WORKER_KERNEL: MarkovKernel | None = None


def _init_worker(kernel: MarkovKernel) -> None:
    global _WORKER_KERNEL
    _WORKER_KERNEL = kernel


def _scan_point_task(args: tuple[float, int, int, int]) -> ScanPoint:
    t, t_index, n_repeats, master_seed = args
    assert _WORKER_KERNEL is not None
    return scan_point(_WORKER_KERNEL, t, t_index, n_repeats, master_seed)


def run_scan(
    kernel: MarkovKernel,
    grid: TimeGrid,
    n_repeats: int = 500,
    master_seed: int = 0,
    n_workers: int = 1,
) -> ScanResult:
    """Full sweep over the grid; output is identical for any worker count."""
    tasks = [(float(t), i, n_repeats, master_seed) for i, t in enumerate(grid.times)]
    if n_workers <= 1:
        points = [scan_point(kernel, t, i, n_repeats, master_seed) for t, i, *_ in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=n_workers, initializer=_init_worker, initargs=(kernel,)
        ) as pool:
            points = list(pool.map(_scan_point_task, tasks))
        points.sort(key=lambda p: p.index)
    return ScanResult(grid, tuple(points), cross_vi_matrix(points))


def select_scales(
    scan: ScanResult, max_scales: int = 4, vi_threshold: float = 0.1
) -> list[SelectedScale]:
    """Rank robust scales: plateaux of constant C with low cross-time VI.

    A candidate is a maximal grid interval of >= 2 points where the community
    count is constant and every pair of best partitions inside has
    cross-time VI <= vi_threshold * ln(N) nats (the threshold is expressed
    as a fraction of the VI upper bound ln N). Candidates are scored by
    plateau log-length over the ensemble VI at the interval centre and the
    top ``max_scales`` are returned. vi_dip_depth reports how far the
    plateau's lowest ensemble VI sits below the scan-wide maximum.
    """
    points = scan.points
    m = len(points)
    if m == 0:
        raise ValueError("empty scan")
    n_nodes = points[0].best.partition.n
    thresh = vi_threshold * math.log(n_nodes)

    def extend(i: int, j_start: int) -> int:
        """Largest j such that [i..j] is a valid plateau."""
        j = max(j_start, i)
        while j + 1 < m:
            nxt = j + 1
            if points[nxt].n_communities != points[i].n_communities:
                break
            if any(scan.cross_vi[nxt, l] > thresh for l in range(i, nxt)):
                break
            j = nxt
        return j

    candidates: list[tuple[int, int]] = []
    prev_maxj = -1
    for i in range(m):
        maxj = extend(i, prev_maxj)
        if maxj > i and maxj > prev_maxj:
            candidates.append((i, maxj))
        prev_maxj = maxj

    vi_max = max(p.vi_ensemble for p in points)
    scales: list[SelectedScale] = []
    for lo, hi in candidates:
        centre = (lo + hi) // 2
        log_len = math.log(points[hi].t) - math.log(points[lo].t)
        score = log_len / (points[centre].vi_ensemble + SCORE_EPS)
        dip = vi_max - min(p.vi_ensemble for p in points[lo : hi + 1])
        scales.append(
            SelectedScale(
                t=points[centre].t,
                partition=points[centre].best.partition,
                n_communities=points[centre].n_communities,
                plateau_span=(points[lo].t, points[hi].t),
                vi_dip_depth=dip,
                score=score,
                index_span=(lo, hi),
            )
        )
    scales.sort(key=lambda s: (-s.score, s.index_span[0]))
    return scales[:max_scales]
