"""Slice admission under a shared cache and satellite backhaul.

Decides which network slices are served and how cache bytes and satellite
bandwidth are split among them, maximizing the served-slice count.  The
underlying model is fluid and deterministic: a slice's miss traffic flows
over the satellite at its allocated rate, hits are served locally, and a
request's delay is the backhaul round trip plus one file transmission.

Cache placement works at whole-file granularity, most popular files
first.  The allocation inner loop (``waterfill_grants``) lives in
``aerofed._kernels`` and runs compiled when the extension is available.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import waterfill_grants
from .domain import (
    BITS_PER_BYTE,
    EMPTY_PLAN,
    AdmissionPlan,
    NetworkSlice,
    SatelliteProfile,
    aggregate_demand,
)
from .errors import ProblemTooLarge, UndefinedDelay

__all__ = [
    "AdmissionProblem",
    "Allocation",
    "DelayBreakdown",
    "hit_ratio",
    "per_request_delay",
    "is_served",
    "solve",
    "solve_brute_force",
    "subset_feasible",
    "verify_plan",
    "popularity_pmf",
    "BRUTE_FORCE_LIMIT",
]

BRUTE_FORCE_LIMIT = 12

# Sub-byte slack for cache-budget comparisons: batched affordability checks
# may overdraw the byte budget by a few float ulps, never by a whole byte.
_CACHE_SLACK_BYTES = 1e-3


@lru_cache(maxsize=512)
def _popularity_prefix(catalog_size: int, zipf_exponent: float) -> np.ndarray:
    """Prefix sums of zipf weights: entry j is the total weight of the j
    most popular files (rank weights i ** -exponent, i = 1..catalog_size)."""
    ranks = np.arange(1, catalog_size + 1, dtype=np.float64)
    weights = ranks ** (-zipf_exponent)
    cum = np.empty(catalog_size + 1, dtype=np.float64)
    cum[0] = 0.0
    np.cumsum(weights, out=cum[1:])
    cum.setflags(write=False)
    return cum


def popularity_pmf(catalog_size: int, zipf_exponent: float) -> np.ndarray:
    """Normalized request probability per popularity rank (most popular
    first)."""
    cum = _popularity_prefix(catalog_size, zipf_exponent)
    return np.diff(cum) / cum[-1]


def _cached_files(slice_: NetworkSlice, cache_bytes: float) -> int:
    if cache_bytes <= 0:
        return 0
    capped = min(float(cache_bytes), slice_.catalog_bytes)
    m = int(capped // slice_.file_size_bytes)
    return min(m, slice_.catalog_size)


def hit_ratio(slice_: NetworkSlice, cache_bytes: float) -> float:
    """Fraction of a slice's requests served from a cache of this size.

    The cache holds whole files, most popular first: with m files cached
    the hit ratio is the total popularity of ranks 1..m.  For a zipf
    exponent of 0 this reduces to m / catalog_size.

    Parameters
    ----------
    slice_ : NetworkSlice
    cache_bytes : float
        Cache capacity granted to this slice; capped at the catalog size.

    Returns
    -------
    float in [0, 1]
    """
    if cache_bytes < 0:
        raise ValueError("cache_bytes must be >= 0")
    m = _cached_files(slice_, cache_bytes)
    cum = _popularity_prefix(slice_.catalog_size, slice_.zipf_exponent)
    return float(cum[m] / cum[slice_.catalog_size])


@dataclass(frozen=True)
class DelayBreakdown:
    hit_delay_s: float
    miss_delay_s: float
    mean_delay_s: float


def per_request_delay(
    slice_: NetworkSlice,
    cache_bytes: float,
    rate_bps: float,
    satellite: SatelliteProfile,
    cached_hit_delay_s: float = 0.0,
) -> DelayBreakdown:
    """Delay of one request under the fluid model.

    A hit is served locally after ``cached_hit_delay_s``; a miss pays the
    backhaul round trip plus the transmission of one file at the slice's
    allocated rate.  The mean weighs both by the hit ratio.

    Raises
    ------
    UndefinedDelay
        If misses can occur (hit ratio < 1) but the rate is zero.
    """
    if rate_bps < 0:
        raise ValueError("rate_bps must be >= 0")
    h = hit_ratio(slice_, cache_bytes)
    if rate_bps == 0.0:
        if h < 1.0:
            raise UndefinedDelay(
                f"slice {slice_.slice_id}: hit ratio {h} < 1 with zero satellite rate"
            )
        miss = math.inf
    else:
        miss = satellite.round_trip_delay_s + slice_.file_size_bytes * BITS_PER_BYTE / rate_bps
    mean = cached_hit_delay_s if h >= 1.0 else h * cached_hit_delay_s + (1.0 - h) * miss
    return DelayBreakdown(cached_hit_delay_s, miss, mean)


def is_served(
    slice_: NetworkSlice,
    cache_bytes: float,
    rate_bps: float,
    satellite: SatelliteProfile,
    cached_hit_delay_s: float = 0.0,
) -> bool:
    """Serving predicate: the rate carries the miss traffic (stability)
    and the mean request delay meets the slice requirement.

    Fully cached slices are served with zero rate; slices with zero
    demand issue no requests, so their delay constraint is vacuous.
    """
    d = aggregate_demand(slice_)
    h = hit_ratio(slice_, cache_bytes)
    if rate_bps < (1.0 - h) * d:
        return False
    if d == 0.0:
        return True
    mean = per_request_delay(slice_, cache_bytes, rate_bps, satellite, cached_hit_delay_s)
    return mean.mean_delay_s <= slice_.delay_requirement_s


@dataclass(frozen=True)
class AdmissionProblem:
    """One admission decision: candidate slices, the shared satellite and
    the cache byte budget."""

    slices: tuple[NetworkSlice, ...]
    satellite: SatelliteProfile
    cache_budget_bytes: float
    cached_hit_delay_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        if self.cache_budget_bytes < 0:
            raise ValueError("cache_budget_bytes must be >= 0")
        if self.cached_hit_delay_s < 0:
            raise ValueError("cached_hit_delay_s must be >= 0")
        ids = [s.slice_id for s in self.slices]
        if len(set(ids)) != len(ids):
            raise ValueError("slice ids must be unique")


@dataclass(frozen=True)
class Allocation:
    """Per-slice cache bytes and satellite rates certifying feasibility."""

    cache_alloc: dict[str, float]
    rate_alloc: dict[str, float]


class _SolveContext:
    """Per-problem arrays and caches shared by all subset evaluations."""

    def __init__(self, problem: AdmissionProblem):
        self.problem = problem
        self.satellite = problem.satellite
        self.eps = problem.cached_hit_delay_s
        self.cache_budget = float(problem.cache_budget_bytes)
        self.bandwidth = float(problem.satellite.bandwidth_bps)
        self.slices = tuple(sorted(problem.slices, key=lambda s: s.slice_id))
        n = len(self.slices)
        self.demand = np.array([aggregate_demand(s) for s in self.slices], dtype=np.float64)
        self.file_size = np.array([s.file_size_bytes for s in self.slices], dtype=np.float64)
        self.catalog = np.array([s.catalog_size for s in self.slices], dtype=np.int64)
        self.zipf = np.array([s.zipf_exponent for s in self.slices], dtype=np.float64)
        prefixes = [
            _popularity_prefix(s.catalog_size, s.zipf_exponent) for s in self.slices
        ]
        self.cum = (
            np.concatenate(prefixes) if prefixes else np.zeros(0, dtype=np.float64)
        )
        offsets = np.zeros(n, dtype=np.int64)
        pos = 0
        for i, s in enumerate(self.slices):
            offsets[i] = pos
            pos += s.catalog_size + 1
        self.offsets = offsets
        self.total = np.array(
            [self.cum[offsets[i] + self.slices[i].catalog_size] for i in range(n)],
            dtype=np.float64,
        )
        self._min_files: dict[int, int | None] = {}
        self._max_saving: dict[int, float] = {}

    def index_of(self, slice_id: str) -> int:
        for i, s in enumerate(self.slices):
            if s.slice_id == slice_id:
                return i
        raise KeyError(slice_id)

    def hit(self, i: int, files: int) -> float:
        base = self.offsets[i]
        return float(self.cum[base + files] / self.total[i])

    def min_files(self, i: int) -> int | None:
        """Smallest cached-file count meeting the slice's delay bound when
        the rate equals the residual demand; None if unreachable."""
        if i in self._min_files:
            return self._min_files[i]
        sl = self.slices[i]
        result = self._compute_min_files(sl, i)
        self._min_files[i] = result
        return result

    def _compute_min_files(self, sl: NetworkSlice, i: int) -> int | None:
        d = float(self.demand[i])
        if d == 0.0:
            return 0

        def ok(files: int) -> bool:
            cache_bytes = files * sl.file_size_bytes
            rate = (1.0 - self.hit(i, files)) * d
            return is_served(sl, cache_bytes, rate, self.satellite, self.eps)

        if ok(0):
            return 0
        k = sl.catalog_size
        if not ok(k):
            return None
        if self.eps > self.satellite.round_trip_delay_s:
            # local serving is slower than the backhaul round trip: extra
            # cache only hurts the mean until the catalog is complete
            return k
        lo, hi = 0, k  # ok(lo) is False, ok(hi) is True
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def max_saving(self, i: int) -> float:
        """Upper bound on the bandwidth this slice could save if it had
        the whole cache budget to itself."""
        if i not in self._max_saving:
            sl = self.slices[i]
            budget = min(self.cache_budget, sl.catalog_bytes)
            self._max_saving[i] = float(self.demand[i]) * hit_ratio(sl, budget)
        return self._max_saving[i]


def _canonical_rates(ctx: _SolveContext, idx: tuple[int, ...], grants: list[int]) -> list[float]:
    rates = []
    for j, i in enumerate(idx):
        h = ctx.hit(i, grants[j])
        rates.append((1.0 - h) * float(ctx.demand[i]))
    return rates


def _waterfill(ctx, idx, start, budget, need_saving):
    idx_arr = np.array(idx, dtype=np.int64)
    grants, saving, budget_left = waterfill_grants(
        ctx.demand[idx_arr],
        ctx.file_size[idx_arr],
        ctx.catalog[idx_arr],
        np.array(start, dtype=np.int64),
        ctx.cum,
        ctx.offsets[idx_arr],
        ctx.total[idx_arr],
        ctx.zipf[idx_arr],
        budget,
        need_saving,
    )
    return grants, saving, budget_left


def _total_saving(ctx, idx, grants) -> float:
    return sum(
        ctx.hit(i, grants[j]) * float(ctx.demand[i]) for j, i in enumerate(idx)
    )


def _swap_refine(ctx, idx, grants, floor_files):
    """Single-file swap pass: drop the least valuable granted file and
    regrant greedily elsewhere while total saving strictly improves."""
    current = list(grants)
    best_saving = _total_saving(ctx, idx, current)
    for _ in range(64):
        removable = []
        for j, i in enumerate(idx):
            if current[j] <= floor_files[j]:
                continue
            base = ctx.offsets[i] + current[j]
            value = float(ctx.cum[base] - ctx.cum[base - 1]) / float(ctx.total[i]) * float(
                ctx.demand[i]
            )
            removable.append((value, j))
        removable.sort()
        improved = False
        for _, j in removable:
            trial = list(current)
            trial[j] -= 1
            budget = ctx.cache_budget - sum(
                trial[t] * float(ctx.file_size[i2]) for t, i2 in enumerate(idx)
            )
            capped = [
                trial[t] if t == j else int(ctx.catalog[i2])
                for t, i2 in enumerate(idx)
            ]
            regrant, _, _ = _waterfill_capped(ctx, idx, trial, capped, budget)
            if _total_saving(ctx, idx, regrant) > best_saving:
                current = regrant
                best_saving = _total_saving(ctx, idx, current)
                improved = True
                break
        if not improved:
            break
    return current


def _waterfill_capped(ctx, idx, start, capped_catalog, budget):
    idx_arr = np.array(idx, dtype=np.int64)
    return waterfill_grants(
        ctx.demand[idx_arr],
        ctx.file_size[idx_arr],
        np.array(capped_catalog, dtype=np.int64),
        np.array(start, dtype=np.int64),
        ctx.cum,
        ctx.offsets[idx_arr],
        ctx.total[idx_arr],
        ctx.zipf[idx_arr],
        budget,
        math.inf,
    )


def _feasible(ctx: _SolveContext, idx: tuple[int, ...]):
    """Allocation serving exactly the slices at ``idx`` (sorted by id), or
    None.  Returns (total_rate, Allocation)."""
    if not idx:
        return 0.0, Allocation({}, {})
    floor_files = []
    for i in idx:
        mf = ctx.min_files(i)
        if mf is None:
            return None
        floor_files.append(mf)
    sizes = [float(ctx.file_size[i]) for i in idx]
    mandatory_bytes = sum(f * s for f, s in zip(floor_files, sizes))
    if mandatory_bytes > ctx.cache_budget + _CACHE_SLACK_BYTES:
        return None

    total_demand = sum(float(ctx.demand[i]) for i in idx)
    floor_saving = _total_saving(ctx, idx, floor_files)
    need = total_demand - ctx.bandwidth - floor_saving
    grants = list(floor_files)
    if need > 0.0:
        grants, _, _ = _waterfill(
            ctx, idx, floor_files, ctx.cache_budget - mandatory_bytes, need
        )

    refined = False
    for _ in range(64):
        rates = _canonical_rates(ctx, idx, grants)
        total_rate = sum(rates)
        if total_rate <= ctx.bandwidth:
            cache_alloc = {}
            rate_alloc = {}
            for j, i in enumerate(idx):
                sl = ctx.slices[i]
                cache_bytes = grants[j] * sl.file_size_bytes
                if not is_served(sl, cache_bytes, rates[j], ctx.satellite, ctx.eps):
                    return None
                cache_alloc[sl.slice_id] = cache_bytes
                rate_alloc[sl.slice_id] = rates[j]
            return total_rate, Allocation(cache_alloc, rate_alloc)
        budget = ctx.cache_budget - sum(
            grants[j] * sizes[j] for j in range(len(idx))
        )
        new_grants, _, _ = _waterfill(ctx, idx, grants, budget, total_rate - ctx.bandwidth)
        if new_grants == grants:
            if refined:
                return None
            refined = True
            new_grants = _swap_refine(ctx, idx, grants, floor_files)
            if new_grants == grants:
                return None
        grants = new_grants
    return None


def subset_feasible(
    subset: tuple[NetworkSlice, ...] | list[NetworkSlice],
    problem: AdmissionProblem,
) -> Allocation | None:
    """Allocation under which exactly ``subset`` is served, or None.

    Every slice first receives the cache its delay bound requires; the
    remaining budget is then water-filled on marginal bandwidth savings
    (next-most-popular file probability times slice demand) until the
    residual satellite demand fits the bandwidth.  Rates carry exactly
    the miss traffic.  A single-file swap pass closes the rare discrete
    gaps the greedy leaves when file sizes differ.
    """
    known = {s.slice_id: s for s in problem.slices}
    for s in subset:
        if known.get(s.slice_id) != s:
            raise ValueError(f"slice {s.slice_id!r} is not part of the problem")
    ctx = _SolveContext(problem)
    idx = tuple(sorted(ctx.index_of(s.slice_id) for s in subset))
    result = _feasible(ctx, idx)
    return None if result is None else result[1]


def _build_plan(ctx, idx, alloc: Allocation) -> AdmissionPlan:
    served = tuple(sorted(ctx.slices[i].slice_id for i in idx))
    return AdmissionPlan(
        served=served,
        cache_alloc=dict(alloc.cache_alloc),
        rate_alloc=dict(alloc.rate_alloc),
    )


def _ids(ctx, idx) -> tuple[str, ...]:
    return tuple(ctx.slices[i].slice_id for i in idx)


def _bound_infeasible(ctx, idx) -> bool:
    """Optimistic bound: even granting every slice the whole budget, the
    residual demand exceeds the bandwidth."""
    residual = sum(float(ctx.demand[i]) - ctx.max_saving(i) for i in idx)
    return residual > ctx.bandwidth * (1.0 + 1e-12) + 1e-9


def _compositions(limits: list[int], k: int):
    """All count vectors 0 <= c_i <= limits[i] with sum k, lexicographic."""
    g = len(limits)
    suffix = [0] * (g + 1)
    for i in range(g - 1, -1, -1):
        suffix[i] = suffix[i + 1] + limits[i]

    def rec(i: int, remaining: int, acc: tuple[int, ...]):
        if i == g:
            if remaining == 0:
                yield acc
            return
        lo = max(0, remaining - suffix[i + 1])
        hi = min(limits[i], remaining)
        for c in range(lo, hi + 1):
            yield from rec(i + 1, remaining - c, acc + (c,))

    yield from rec(0, k, ())


def solve(problem: AdmissionProblem) -> AdmissionPlan:
    """Maximize the number of served slices.

    Exact search: slices with identical parameters are interchangeable,
    so candidate subsets are enumerated as count vectors over parameter
    classes, largest cardinality first, with an optimistic residual bound
    pruning hopeless candidates.  Ties are broken by minimal total
    satellite rate, then by the lexicographically smallest served id set.
    The class search makes homogeneous instances (the interesting
    regime) linear in the slice count; fully heterogeneous instances
    degrade to subset search.
    """
    if not problem.slices:
        return EMPTY_PLAN
    ctx = _SolveContext(problem)
    classes: dict[tuple, list[int]] = {}
    for i, s in enumerate(ctx.slices):
        key = (
            s.ue_count,
            s.per_ue_request_rate,
            s.file_size_bytes,
            s.catalog_size,
            s.zipf_exponent,
            s.delay_requirement_s,
        )
        classes.setdefault(key, []).append(i)
    members = [
        m for m in classes.values() if _feasible(ctx, (m[0],)) is not None
    ]
    limits = [len(m) for m in members]
    reachable = sum(limits)
    for k in range(reachable, 0, -1):
        candidates = []
        for counts in _compositions(limits, k):
            idx = tuple(
                sorted(itertools.chain.from_iterable(
                    m[:c] for m, c in zip(members, counts)
                ))
            )
            if _bound_infeasible(ctx, idx):
                continue
            result = _feasible(ctx, idx)
            if result is not None:
                candidates.append((result[0], _ids(ctx, idx), idx, result[1]))
        if candidates:
            _, _, idx, alloc = min(candidates, key=lambda c: (c[0], c[1]))
            return _build_plan(ctx, idx, alloc)
    return EMPTY_PLAN


def solve_brute_force(problem: AdmissionProblem) -> AdmissionPlan:
    """Exhaustive oracle: enumerate every subset, largest first, using the
    same feasibility routine and tie-breaking as :func:`solve`."""
    n = len(problem.slices)
    if n > BRUTE_FORCE_LIMIT:
        raise ProblemTooLarge(
            f"{n} slices exceed the brute-force limit of {BRUTE_FORCE_LIMIT}"
        )
    if n == 0:
        return EMPTY_PLAN
    ctx = _SolveContext(problem)
    for k in range(n, 0, -1):
        candidates = []
        for combo in itertools.combinations(range(n), k):
            result = _feasible(ctx, combo)
            if result is not None:
                candidates.append((result[0], _ids(ctx, combo), combo, result[1]))
        if candidates:
            _, _, idx, alloc = min(candidates, key=lambda c: (c[0], c[1]))
            return _build_plan(ctx, idx, alloc)
    return EMPTY_PLAN


def verify_plan(problem: AdmissionProblem, plan: AdmissionPlan) -> None:
    """Re-check a plan against the problem, independent of how it was
    produced; raises ValueError on any violation."""
    by_id = {s.slice_id: s for s in problem.slices}
    for sid in plan.served:
        if sid not in by_id:
            raise ValueError(f"served slice {sid!r} is not part of the problem")
    total_cache = plan.total_cache_bytes
    if total_cache > problem.cache_budget_bytes + _CACHE_SLACK_BYTES:
        raise ValueError(
            f"cache allocation {total_cache} exceeds budget {problem.cache_budget_bytes}"
        )
    if plan.total_rate_bps > problem.satellite.bandwidth_bps:
        raise ValueError(
            f"rate allocation {plan.total_rate_bps} exceeds bandwidth "
            f"{problem.satellite.bandwidth_bps}"
        )
    for sid in plan.served:
        sl = by_id[sid]
        cache = plan.cache_alloc.get(sid, 0.0)
        rate = plan.rate_alloc.get(sid, 0.0)
        if cache > sl.catalog_bytes + _CACHE_SLACK_BYTES:
            raise ValueError(f"slice {sid}: cache {cache} exceeds catalog bytes")
        if not is_served(sl, cache, rate, problem.satellite, problem.cached_hit_delay_s):
            raise ValueError(f"slice {sid}: serving predicate fails")
