"""Goldreich-Levin search for dominant Fourier coefficients by query access.

Given only the ability to evaluate a +/-1 function on chosen inputs, the
split-and-prune recursion finds every subset S with |fhat(S)| above a
threshold gamma.  Buckets fix membership of a growing prefix of coordinates;
the Fourier weight of a bucket,

    W(B) = sum over S consistent with B of fhat(S)^2,

is estimated by pair sampling: draw a suffix z on the free coordinates and
two independent prefixes x, x', and average

    f(x,z) * f(x',z) * chi_a(x) * chi_a(x'),

whose expectation is exactly W(B).  Children whose estimate falls below
gamma^2/2 are pruned.  Fully specified survivors are re-estimated once with
fresh randomness; that final estimate is both the reported weight and a
last filter against spurious survivors (the same check the threshold
heuristics rely on).

Each estimate draws its own random stream keyed by (seed, depth, pattern),
so runs are bitwise reproducible regardless of evaluation order.

The estimator variance is controlled only through ``queries_per_estimate``
(function evaluations per estimate; two per pair sample).  No analytic
constant is enforced -- 800 queries is the working default.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._rng import float_key, substream
from .boolfn import PseudoBooleanTable, SubsetMask, signs_to_index

GAMMA_LADDER = (0.9, 0.75, 0.5)


class BucketOverflowError(RuntimeError):
    """Raised when pruning keeps more live buckets than the configured cap.

    Happens when gamma^2/2 sits below the estimator noise floor, so spurious
    buckets multiply; the threshold-search heuristic treats it as "gamma too
    small".
    """

    def __init__(self, depth: int, count: int):
        super().__init__(f"bucket population {count} exceeded cap at depth {depth}")
        self.depth = depth
        self.count = count


class GammaSearchError(RuntimeError):
    pass


class QueryFunction:
    """Black-box +/-1 function with an evaluation counter.

    ``evaluator`` maps a (rows, arity) array of +/-1 inputs to (rows,)
    outputs in {+1, -1} and must be deterministic.
    """

    def __init__(self, arity: int, evaluator: Callable[[np.ndarray], np.ndarray]):
        self.arity = arity
        self._evaluator = evaluator
        self._queries = 0

    @property
    def queries(self) -> int:
        return self._queries

    def __call__(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.atleast_2d(inputs)
        if inputs.shape[1] != self.arity:
            raise ValueError(f"inputs must have {self.arity} columns")
        self._queries += inputs.shape[0]
        return np.asarray(self._evaluator(inputs), dtype=np.float64)


def embedded_table_query(table: PseudoBooleanTable, n: int, position: int) -> QueryFunction:
    """A table applied to a w-wide window of an n-bit input (rest ignored)."""
    w = table.arity
    if not 0 <= position <= n - w:
        raise ValueError(f"window [{position}, {position + w}) does not fit in {n} inputs")

    def evaluate(inputs: np.ndarray) -> np.ndarray:
        return table.values[signs_to_index(inputs[:, position : position + w])]

    return QueryFunction(n, evaluate)


class ProcessQueryFunction(QueryFunction):
    """Adapter for an external evaluator speaking a line protocol on stdio.

    One request per line: the +/-1 input values joined by commas; the child
    must answer each line with "1" or "-1".  Lets real (e.g. neural) encoders
    be probed without linking them in.
    """

    def __init__(self, argv: Sequence[str], arity: int):
        self._proc = subprocess.Popen(
            list(argv),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        super().__init__(arity, self._evaluate_rows)

    def _evaluate_rows(self, inputs: np.ndarray) -> np.ndarray:
        out = np.empty(inputs.shape[0])
        for i, row in enumerate(np.asarray(inputs, dtype=np.int64)):
            self._proc.stdin.write(",".join(map(str, row)) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
            if not line:
                raise RuntimeError("query process closed its output")
            out[i] = float(line.strip())
        return out

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass(frozen=True)
class GLConfig:
    """Knobs of one search run.

    ``delta`` is the nominal confidence target of the underlying theorem; it
    is recorded but the estimate accuracy is governed entirely by
    ``queries_per_estimate``.
    """

    gamma: float
    delta: float = 0.05
    queries_per_estimate: int = 800
    rng_seed: int = 0
    max_buckets: int = 512

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if self.queries_per_estimate < 1:
            raise ValueError("queries_per_estimate must be >= 1")


@dataclass(frozen=True)
class Bucket:
    """Membership of the first k coordinates: bit i of pattern <=> x_{i+1} in S."""

    k: int
    pattern: int


@dataclass(frozen=True)
class GLResult:
    sets: list[tuple[SubsetMask, float]]
    total_queries: int
    num_estimates: int
    stable: bool | None = field(default=None)

    def masks(self) -> tuple[SubsetMask, ...]:
        return tuple(m for m, _ in self.sets)


def _chi(prefix: np.ndarray, pattern: int) -> np.ndarray:
    """chi_a over the fixed coordinates: product of the pattern's columns."""
    if pattern == 0:
        return np.ones(prefix.shape[0])
    cols = [i for i in range(prefix.shape[1]) if (pattern >> i) & 1]
    neg = (prefix[:, cols] < 0).sum(axis=1) & 1
    return 1.0 - 2.0 * neg


def estimate_bucket_weight(
    f: QueryFunction, bucket: Bucket, queries: int, rng: np.random.Generator
) -> float:
    """Pair-sampling Monte Carlo estimate of W(bucket), clamped to [0, 1]."""
    if queries < 1:
        raise ValueError("queries must be >= 1")
    pairs = max(1, queries // 2)
    n, k = f.arity, bucket.k
    suffix = rng.integers(0, 2, size=(pairs, n - k), dtype=np.int8) * (-2) + 1
    x1 = rng.integers(0, 2, size=(pairs, k), dtype=np.int8) * (-2) + 1
    x2 = rng.integers(0, 2, size=(pairs, k), dtype=np.int8) * (-2) + 1
    e1 = f(np.hstack((x1, suffix)))
    e2 = f(np.hstack((x2, suffix)))
    est = float(np.mean(e1 * e2 * _chi(x1, bucket.pattern) * _chi(x2, bucket.pattern)))
    return min(1.0, max(0.0, est))


def goldreich_levin(f: QueryFunction, cfg: GLConfig) -> GLResult:
    """Find all subsets with |fhat(S)| >= gamma (with high probability).

    Splits buckets coordinate by coordinate in index order, keeping children
    whose estimated weight reaches gamma^2/2.  An empty return means every
    bucket was pruned -- gamma was too high for this function, not an error.
    """
    n = f.arity
    thr = cfg.gamma * cfg.gamma / 2.0
    seed = cfg.rng_seed
    start_queries = f.queries
    num_estimates = 0
    live: list[int] = [0]
    for depth in range(1, n + 1):
        children: list[int] = []
        for pattern in live:
            for a in (0, 1):
                child = pattern | (a << (depth - 1))
                rng = substream(seed, depth, child)
                est = estimate_bucket_weight(
                    f, Bucket(depth, child), cfg.queries_per_estimate, rng
                )
                num_estimates += 1
                if est >= thr:
                    children.append(child)
        if not children:
            return GLResult([], f.queries - start_queries, num_estimates)
        if len(children) > cfg.max_buckets:
            raise BucketOverflowError(depth, len(children))
        live = children
    sets: list[tuple[SubsetMask, float]] = []
    for mask in sorted(live):
        rng = substream(seed, n + 1, mask)
        est = estimate_bucket_weight(f, Bucket(n, mask), cfg.queries_per_estimate, rng)
        num_estimates += 1
        if est >= thr:
            sets.append((mask, est))
    return GLResult(sets, f.queries - start_queries, num_estimates)


def _derived_seed(seed: int, *path: int) -> int:
    return int(substream(seed, *path).integers(0, np.iinfo(np.int64).max))


def _classify_gamma(
    f: QueryFunction, gamma: float, runs: int, queries: int, seed: int
) -> tuple[str, GLResult | None]:
    """Run several searches at one gamma: 'stable' / 'too_high' / 'too_small'."""
    results = []
    for r in range(runs):
        cfg = GLConfig(
            gamma=gamma,
            queries_per_estimate=queries,
            rng_seed=_derived_seed(seed, float_key(gamma), r),
        )
        try:
            results.append(goldreich_levin(f, cfg))
        except BucketOverflowError:
            return "too_small", None
    if any(not res.sets for res in results):
        return "too_high", None
    mask_lists = {res.masks() for res in results}
    if len(mask_lists) == 1:
        first = results[0]
        return "stable", GLResult(first.sets, first.total_queries, first.num_estimates, stable=True)
    return "too_small", None


def gamma_search(
    f: QueryFunction,
    runs_per_gamma: int = 3,
    queries: int = 800,
    seed: int = 0,
    floor: float = 0.05,
    resolution: float = 1.0 / 16.0,
) -> tuple[float, GLResult]:
    """Heuristic threshold selection without prior knowledge of the spectrum.

    Tries the fixed ladder 0.9, 0.75, 0.5 first ("stable" = identical
    non-empty output set-lists across runs).  If none is stable, bisects
    (0, 0.5): empty outputs push gamma down, non-reproducible outputs or a
    bucket explosion (estimator noise above the pruning threshold) push it
    up, and the search stops at the given resolution, returning the largest
    stable gamma seen.
    """
    if runs_per_gamma < 2:
        raise ValueError("need at least 2 runs to assess stability")
    for gamma in GAMMA_LADDER:
        verdict, result = _classify_gamma(f, gamma, runs_per_gamma, queries, seed)
        if verdict == "stable":
            return gamma, result
    lo, hi = 0.0, 0.5
    best: tuple[float, GLResult] | None = None
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if mid < floor:
            break
        verdict, result = _classify_gamma(f, mid, runs_per_gamma, queries, seed)
        if verdict == "stable":
            best = (mid, result)
            lo = mid
        elif verdict == "too_high":
            hi = mid
        else:
            lo = mid
    if best is not None:
        return best
    raise GammaSearchError("no stable threshold found")


@dataclass(frozen=True)
class SweepRecord:
    queries: int
    run: int
    sets: list[tuple[SubsetMask, float]]
    overflowed: bool = False

    def masks(self) -> tuple[SubsetMask, ...]:
        return tuple(m for m, _ in self.sets)


def query_convergence_sweep(
    f: QueryFunction,
    gamma: float,
    query_grid: Sequence[int],
    runs: int,
    seed: int = 0,
) -> list[SweepRecord]:
    """Re-run the search across query budgets to see the output stabilize.

    For each budget in the (ascending) grid, ``runs`` independent searches
    are recorded; budgets too small for the threshold produce empty,
    varying, or overflowing outputs.
    """
    if not query_grid or list(query_grid) != sorted(query_grid):
        raise ValueError("query_grid must be non-empty and ascending")
    records = []
    for q in query_grid:
        for r in range(runs):
            cfg = GLConfig(
                gamma=gamma,
                queries_per_estimate=q,
                rng_seed=_derived_seed(seed, q, r),
            )
            try:
                res = goldreich_levin(f, cfg)
                records.append(SweepRecord(q, r, res.sets))
            except BucketOverflowError:
                records.append(SweepRecord(q, r, [], overflowed=True))
    return records


def budget_stability(records: Sequence[SweepRecord]) -> dict[int, bool]:
    """Budget -> were all its runs non-empty, non-overflowing, and identical."""
    by_budget: dict[int, list[SweepRecord]] = {}
    for rec in records:
        by_budget.setdefault(rec.queries, []).append(rec)
    out = {}
    for q, recs in sorted(by_budget.items()):
        ok = all(not r.overflowed and r.sets for r in recs)
        out[q] = ok and len({r.masks() for r in recs}) == 1
    return out


def sweep_to_csv(records: Sequence[SweepRecord], gamma: float) -> str:
    lines = ["queries,run,gamma,set_mask,weight"]
    for rec in records:
        for mask, weight in rec.sets:
            lines.append(f"{rec.queries},{rec.run},{gamma!r},{mask:#x},{weight!r}")
    return "\n".join(lines) + "\n"
