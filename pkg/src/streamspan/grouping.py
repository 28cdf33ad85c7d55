"""Streaming job-size bands and the bounded-memory large-job ledger.

Jobs are bucketed by size into one-doubling bands anchored at the largest
processing time: band k holds p in (2^(offset+k), 2^(offset+k+1)] for
k = 0..top_band, and the open low band collects everything at or below
2^offset.  Each bounded band keeps (count, load, retained jobs); a band
stops retaining the moment its count reaches retain_limit, because a band
that full makes every job at or below its upper edge "small" for the
search.  Three ledgers cover the ways the anchor can be known: given
exactly, given as an overestimate, or not given at all.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, JobValueError, PmaxContractError

__all__ = [
    "SchedulingParams",
    "derive_params",
    "ceil_log2",
    "group_index",
    "LargeJobSet",
    "KnownPmaxLedger",
    "EstimatePmaxLedger",
    "UnknownPmaxLedger",
]

_CHUNK = 1 << 16


def ceil_log2(p: float) -> int:
    """Exact ceil(log2 p) for p > 0, read off the float representation."""
    if not (p > 0) or math.isinf(p):
        raise JobValueError(f"need a finite positive value, got {p}")
    frac, ex = math.frexp(p)
    return ex - 1 if frac == 0.5 else ex


def group_index(p: float, band_offset: int) -> int:
    """Band index of a job: -1 for the open low band, else 0..top_band."""
    k = ceil_log2(p) - band_offset - 1
    return k if k >= 0 else -1


@dataclass(frozen=True)
class SchedulingParams:
    """Derived knobs shared by grouping and search.

    top_band: highest bounded band index; 2^top_band is the smallest power
        of two at least (m + m1 - 1) / ((eps/2) * m1 * e0), so every job
        below the banded window is provably small.
    retain_limit: a band stops retaining jobs once its count reaches this.
    """

    m: int
    floor_machines: int
    ratio_floor: float
    epsilon: float
    top_band: int
    retain_limit: int
    override_mode: bool = False

    @property
    def bounded_bands(self) -> int:
        return self.top_band + 1


def derive_params(
    m: int,
    floor_machines: int,
    ratio_floor: float,
    epsilon: float,
    top_band_override: int | None = None,
    retain_limit_override: int | None = None,
) -> SchedulingParams:
    """Pick the band count and retain limit for a (1+epsilon) guarantee.

    Overrides bypass the derivation for desk-scale experiments; the report
    then flags override mode and the guarantee is off the table.
    """
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    if not (1 <= floor_machines <= m):
        raise ConfigError(f"floor machine count must be in [1, {m}], got {floor_machines}")
    if not (0.0 < ratio_floor <= 1.0):
        raise ConfigError(f"ratio floor must be in (0, 1], got {ratio_floor}")
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    if epsilon >= 1:
        warnings.warn(
            f"epsilon = {epsilon} is outside the analyzed range (0, 1); "
            "the approximation guarantee is only proven below 1",
            RuntimeWarning,
            stacklevel=2,
        )
    need = math.ceil((m + floor_machines - 1) / ((epsilon / 2.0) * floor_machines * ratio_floor))
    top_band = (need - 1).bit_length()  # minimal g with 2^g >= need
    retain_limit = math.ceil(
        m * (m + floor_machines - 1) / ((epsilon / 4.0) * ratio_floor * floor_machines)
    )
    override = False
    if top_band_override is not None:
        if top_band_override < 0:
            raise ConfigError(f"top band override must be >= 0, got {top_band_override}")
        top_band = top_band_override
        override = True
    if retain_limit_override is not None:
        if retain_limit_override < 1:
            raise ConfigError(f"retain limit override must be >= 1, got {retain_limit_override}")
        retain_limit = retain_limit_override
        override = True
    return SchedulingParams(
        m=m,
        floor_machines=floor_machines,
        ratio_floor=ratio_floor,
        epsilon=epsilon,
        top_band=top_band,
        retain_limit=retain_limit,
        override_mode=override,
    )


@dataclass(frozen=True)
class LargeJobSet:
    """What the search needs after one pass over the stream.

    saturated_band: largest band whose count reached retain_limit (-1 when
        none did).  jobs: the retained (id, p) pairs of every band above
        it, band-ascending then arrival order.  Every job not listed has
        p <= small_bound.  band_offset is None only for an empty stream.
    """

    saturated_band: int
    jobs: tuple[tuple[int, float], ...]
    total_load: float
    small_bound: float
    band_offset: int | None

    @property
    def job_count(self) -> int:
        return len(self.jobs)


_EMPTY_LARGE_SET = LargeJobSet(
    saturated_band=-1, jobs=(), total_load=0.0, small_bound=0.0, band_offset=None
)


def _extract_large_set(params, state) -> LargeJobSet:
    offset, low_count, low_load, entries, total_load = state
    if offset is None:
        return _EMPTY_LARGE_SET
    saturated = -1
    for top, count, load, retained in entries:
        k = top - offset - 1
        if not (0 <= k <= params.top_band):
            raise ConfigError(f"band {k} outside the window after merging")
        if count >= params.retain_limit and k > saturated:
            saturated = k
    jobs: list[tuple[int, float]] = []
    for top, count, load, retained in entries:
        if top - offset - 1 > saturated:
            jobs.extend(retained)
    return LargeJobSet(
        saturated_band=saturated,
        jobs=tuple(jobs),
        total_load=total_load,
        small_bound=math.ldexp(1.0, offset + saturated + 1),
        band_offset=offset,
    )


def _check_positive(p: float, position: int) -> float:
    p = float(p)
    if not (p > 0) or math.isinf(p) or math.isnan(p):
        raise JobValueError(
            f"processing time must be finite and > 0, got {p} at position {position}",
            position=position,
        )
    return p


class _BandedLedger:
    """Array-backed band statistics for a window fixed before streaming."""

    def __init__(self, params: SchedulingParams, anchor_exp: int, n_bounded: int, p_limit: float, limit_label: str):
        self.params = params
        self._n_bounded = n_bounded
        self._stream_offset = anchor_exp - n_bounded
        self._p_limit = p_limit
        self._limit_label = limit_label
        cap = max(params.retain_limit - 1, 1)
        self._counts = np.zeros(n_bounded + 1, np.int64)
        self._loads = np.zeros(n_bounded + 1, np.float64)
        self._ret_len = np.zeros(n_bounded, np.int64)
        self._ret_ids = np.zeros((n_bounded, cap), np.int64)
        self._ret_ps = np.zeros((n_bounded, cap), np.float64)
        self._fstate = np.zeros(2, np.float64)  # total_load, max_seen
        self._istate = np.zeros(3, np.int64)  # job_count, retained_total, peak_retained

    # -- reading -------------------------------------------------------

    @property
    def job_count(self) -> int:
        return int(self._istate[0])

    @property
    def total_load(self) -> float:
        return float(self._fstate[0])

    @property
    def max_seen(self) -> float:
        return float(self._fstate[1])

    @property
    def retained_total(self) -> int:
        return int(self._istate[1])

    @property
    def peak_retained(self) -> int:
        return int(self._istate[2])

    @property
    def peak_group_records(self) -> int:
        # the record array is materialized up front
        return self._n_bounded + 1

    @property
    def retained_bound(self) -> int:
        return self._n_bounded * self.params.retain_limit

    @property
    def group_record_bound(self) -> int:
        return self._n_bounded + 1

    def retained_in_band(self, k: int) -> list[tuple[int, float]]:
        ln = int(self._ret_len[k])
        return [(int(self._ret_ids[k, s]), float(self._ret_ps[k, s])) for s in range(ln)]

    # -- streaming -----------------------------------------------------

    def _check_limit(self, p: float, position: int) -> None:
        if p > self._p_limit:
            raise PmaxContractError(
                f"job at position {position} has processing time {p} above "
                f"the declared {self._limit_label} {self._p_limit}",
                position=position,
            )

    def ingest(self, p: float) -> None:
        """Account one job; its id is its 0-based stream position."""
        position = self.job_count
        p = _check_positive(p, position)
        self._check_limit(p, position)
        one = np.array([p], np.float64)
        _kernels._ingest_scalar(
            one, position, self._stream_offset, self.params.retain_limit,
            self._counts, self._loads, self._ret_len, self._ret_ids, self._ret_ps,
            self._fstate, self._istate,
        )

    def ingest_many(self, ps) -> None:
        """Account a chunk of jobs through the selected kernel backend."""
        arr = np.ascontiguousarray(ps, dtype=np.float64)
        if arr.ndim != 1:
            raise ConfigError("job chunk must be one-dimensional")
        if arr.size == 0:
            return
        start = self.job_count
        bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0)))
        if bad.size:
            _check_positive(float(arr[bad[0]]), start + int(bad[0]))
        over = np.flatnonzero(arr > self._p_limit)
        if over.size:
            self._check_limit(float(arr[over[0]]), start + int(over[0]))
        for lo in range(0, arr.size, _CHUNK):
            chunk = arr[lo:lo + _CHUNK]
            _kernels.ingest_block(
                chunk, start + lo, self._stream_offset, self.params.retain_limit,
                self._counts, self._loads, self._ret_len, self._ret_ids, self._ret_ps,
                self._fstate, self._istate,
            )

    # -- state extraction ------------------------------------------------

    def _band_entries(self):
        entries = []
        for k in range(self._n_bounded):
            count = int(self._counts[k + 1])
            if count == 0:
                continue
            entries.append((
                self._stream_offset + k + 1,
                count,
                float(self._loads[k + 1]),
                tuple(self.retained_in_band(k)),
            ))
        return tuple(entries)

    def _merged_state(self):
        raise NotImplementedError

    def snapshot(self):
        """Canonical (offset, low_count, low_load, entries) for equality tests."""
        offset, low_count, low_load, entries, _ = self._merged_state()
        return (offset, low_count, low_load, entries)

    def finalize(self) -> LargeJobSet:
        return _extract_large_set(self.params, self._merged_state())


class KnownPmaxLedger(_BandedLedger):
    """Streaming ledger when the exact largest processing time is declared."""

    def __init__(self, params: SchedulingParams, p_max: float):
        if not (p_max > 0) or math.isinf(p_max):
            raise ConfigError(f"p_max must be finite and > 0, got {p_max}")
        super().__init__(params, ceil_log2(p_max), params.bounded_bands, p_max, "p_max")
        self.p_max = float(p_max)

    @property
    def band_offset(self) -> int:
        return self._stream_offset

    def _merged_state(self):
        if self.job_count == 0:
            return (None, 0, 0.0, (), 0.0)
        return (
            self._stream_offset,
            int(self._counts[0]),
            float(self._loads[0]),
            self._band_entries(),
            self.total_load,
        )


class EstimatePmaxLedger(_BandedLedger):
    """Streaming ledger when only an overestimate of p_max is declared.

    The window is widened by ceil(log2 alpha) extra bounded bands below the
    usual ones; once the true maximum is known the bands re-anchor, which
    can only fold whole bands into the open low band.  The widened bands
    retain jobs too, since re-anchoring may promote them into the window.
    """

    def __init__(self, params: SchedulingParams, p_max_estimate: float, alpha: float = 1.0):
        if not (p_max_estimate > 0) or math.isinf(p_max_estimate):
            raise ConfigError(f"p_max estimate must be finite and > 0, got {p_max_estimate}")
        if not alpha >= 1.0 or math.isinf(alpha):
            raise ConfigError(f"estimate factor alpha must be finite and >= 1, got {alpha}")
        extra = ceil_log2(alpha) if alpha > 1 else 0
        super().__init__(
            params,
            ceil_log2(p_max_estimate),
            params.bounded_bands + extra,
            p_max_estimate,
            "p_max estimate",
        )
        self.p_max_estimate = float(p_max_estimate)
        self.alpha = float(alpha)
        self.extra_bands = extra

    def _merged_state(self):
        if self.job_count == 0:
            return (None, 0, 0.0, (), 0.0)
        offset = ceil_log2(self.max_seen) - self.params.top_band - 1
        shift = offset - self._stream_offset
        if shift < 0:
            raise PmaxContractError(
                f"estimate {self.p_max_estimate} exceeds alpha={self.alpha} times "
                f"the observed maximum {self.max_seen}; the widened window cannot "
                "re-anchor that far down"
            )
        low_count = int(self._counts[0])
        low_load = float(self._loads[0])
        entries = []
        for k in range(self._n_bounded):
            count = int(self._counts[k + 1])
            if count == 0:
                continue
            if k - shift < 0:
                low_count += count
                low_load += float(self._loads[k + 1])
            else:
                entries.append((
                    self._stream_offset + k + 1,
                    count,
                    float(self._loads[k + 1]),
                    tuple(self.retained_in_band(k)),
                ))
        return (offset, low_count, low_load, tuple(entries), self.total_load)


class UnknownPmaxLedger:
    """Streaming ledger with no size hint: bands rebase as the maximum grows.

    Band records live in a map keyed by the band's absolute upper-edge
    exponent, so a rebase never rewrites keys -- it only folds the bands
    that sink below the window into the open low bucket.  At every prefix
    the state equals what KnownPmaxLedger would hold given the prefix
    maximum.
    """

    def __init__(self, params: SchedulingParams):
        self.params = params
        self._bands: dict[int, list] = {}  # top exponent -> [count, load, retained list]
        self._offset: int | None = None
        self._low_count = 0
        self._low_load = 0.0
        self._total_load = 0.0
        self._max_seen = 0.0
        self._job_count = 0
        self._retained_total = 0
        self._peak_retained = 0
        self._peak_records = 1  # the low bucket always exists

    @property
    def job_count(self) -> int:
        return self._job_count

    @property
    def total_load(self) -> float:
        return self._total_load

    @property
    def max_seen(self) -> float:
        return self._max_seen

    @property
    def band_offset(self) -> int | None:
        return self._offset

    @property
    def retained_total(self) -> int:
        return self._retained_total

    @property
    def peak_retained(self) -> int:
        return self._peak_retained

    @property
    def peak_group_records(self) -> int:
        return self._peak_records

    @property
    def retained_bound(self) -> int:
        return self.params.bounded_bands * self.params.retain_limit

    @property
    def group_record_bound(self) -> int:
        return self.params.bounded_bands + 1

    def ingest(self, p: float) -> None:
        position = self._job_count
        p = _check_positive(p, position)
        top = ceil_log2(p)
        if self._offset is None or top - self._offset - 1 > self.params.top_band:
            # rebase the window so this (necessarily maximal) job lands in
            # the top band, folding bands that sink below the new offset
            new_offset = top - self.params.top_band - 1
            for key in sorted(self._bands):
                if key <= new_offset:
                    count, load, retained = self._bands.pop(key)
                    self._low_count += count
                    self._low_load += load
                    self._retained_total -= len(retained)
            self._offset = new_offset
        k = top - self._offset - 1
        if k < 0:
            self._low_count += 1
            self._low_load += p
        else:
            rec = self._bands.get(top)
            if rec is None:
                rec = [0, 0.0, []]
                self._bands[top] = rec
                records = 1 + len(self._bands)
                if records > self._peak_records:
                    self._peak_records = records
            rec[0] += 1
            rec[1] += p
            if rec[0] >= self.params.retain_limit:
                self._retained_total -= len(rec[2])
                rec[2] = []
            else:
                rec[2].append((position, p))
                self._retained_total += 1
                if self._retained_total > self._peak_retained:
                    self._peak_retained = self._retained_total
        self._total_load += p
        if p > self._max_seen:
            self._max_seen = p
        self._job_count += 1

    def ingest_many(self, ps) -> None:
        for p in np.asarray(ps, dtype=np.float64).ravel():
            self.ingest(float(p))

    def _merged_state(self):
        if self._job_count == 0:
            return (None, 0, 0.0, (), 0.0)
        entries = tuple(
            (top, rec[0], rec[1], tuple(rec[2]))
            for top, rec in sorted(self._bands.items())
        )
        return (self._offset, self._low_count, self._low_load, entries, self._total_load)

    def snapshot(self):
        offset, low_count, low_load, entries, _ = self._merged_state()
        return (offset, low_count, low_load, entries)

    def finalize(self) -> LargeJobSet:
        return _extract_large_set(self.params, self._merged_state())
