"""The three ingest/search implementations must agree bit for bit:
the plain-python scalar loop, the vectorized numpy fallback, and (when
enabled) the jitted scalar loop that backs the default build."""

import numpy as np
import pytest

from streamspan import _kernels


def _fresh_state(n_bounded, retain_limit):
    cap = max(retain_limit - 1, 1)
    return dict(
        counts=np.zeros(n_bounded + 1, np.int64),
        loads=np.zeros(n_bounded + 1, np.float64),
        ret_len=np.zeros(n_bounded, np.int64),
        ret_ids=np.zeros((n_bounded, cap), np.int64),
        ret_ps=np.zeros((n_bounded, cap), np.float64),
        fstate=np.zeros(2, np.float64),
        istate=np.zeros(3, np.int64),
    )


def _run_ingest(fn, chunks, offset, retain_limit, n_bounded):
    state = _fresh_state(n_bounded, retain_limit)
    start = 0
    for chunk in chunks:
        arr = np.asarray(chunk, np.float64)
        fn(arr, start, offset, retain_limit, state["counts"], state["loads"],
           state["ret_len"], state["ret_ids"], state["ret_ps"],
           state["fstate"], state["istate"])
        start += arr.size
    return state


def _assert_states_equal(a, b):
    for key in a:
        assert np.array_equal(a[key], b[key]), key


def _random_stream(rng, size, offset, n_bounded):
    # sizes spread over the whole window (k up to n_bounded-1) plus
    # sub-window strays for the open low band
    exps = rng.integers(offset - 2, offset + n_bounded, size=size)
    mant = rng.uniform(0.5000001, 1.0, size=size)
    return np.ldexp(mant, exps + 1).astype(np.float64)


IMPLS = [("numpy", _kernels._ingest_numpy)]
if _kernels.NUMBA_ENABLED:
    IMPLS.append(("numba", _kernels.ingest_block))


@pytest.mark.parametrize("name,fn", IMPLS)
@pytest.mark.parametrize("retain_limit", [1, 2, 3, 16])
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_ingest_matches_scalar_reference(name, fn, retain_limit, seed):
    rng = np.random.default_rng(seed)
    offset, n_bounded = -1, 6
    stream = _random_stream(rng, 700, offset, n_bounded)
    want = _run_ingest(_kernels._ingest_scalar, [stream], offset, retain_limit, n_bounded)
    got = _run_ingest(fn, [stream], offset, retain_limit, n_bounded)
    _assert_states_equal(want, got)


@pytest.mark.parametrize("name,fn", IMPLS)
@pytest.mark.parametrize("split", [1, 3, 7, 64, 699, 700])
def test_ingest_is_chunk_invariant(name, fn, split):
    rng = np.random.default_rng(9)
    offset, n_bounded, retain_limit = 0, 5, 3
    stream = _random_stream(rng, 700, offset, n_bounded)
    whole = _run_ingest(_kernels._ingest_scalar, [stream], offset, retain_limit, n_bounded)
    pieces = [stream[i:i + split] for i in range(0, stream.size, split)]
    got = _run_ingest(fn, pieces, offset, retain_limit, n_bounded)
    _assert_states_equal(whole, got)


@pytest.mark.parametrize("name,fn", IMPLS)
def test_saturation_straddles_chunk_boundaries(name, fn):
    # retain_limit 3: the third arrival into a band clears it; place that
    # arrival before, at, and after a chunk split
    offset, n_bounded, retain_limit = 0, 2, 3
    p = 1.5  # band 0
    q = 3.0  # band 1
    stream = np.array([p, p, q, p, q, p, q])
    for split in range(1, len(stream)):
        want = _run_ingest(_kernels._ingest_scalar, [stream], offset, retain_limit, n_bounded)
        pieces = [stream[:split], stream[split:]]
        got = _run_ingest(fn, pieces, offset, retain_limit, n_bounded)
        _assert_states_equal(want, got)


@pytest.mark.parametrize("name,fn", IMPLS)
def test_peak_retained_tracks_within_chunk_maximum(name, fn):
    # fill two bands, then saturate both: the peak happens mid-chunk
    offset, n_bounded, retain_limit = 0, 2, 3
    stream = np.array([1.5, 3.0, 1.5, 3.0, 1.5, 3.0, 1.5, 3.0])
    got = _run_ingest(fn, [stream], offset, retain_limit, n_bounded)
    assert got["istate"][1] == 0  # both bands cleared by their third arrival
    assert got["istate"][2] == 4  # but four jobs were retained at once


def _search_case(rng, m, njobs, grid_size):
    job_ps = rng.uniform(0.5, 8.0, size=njobs)
    # nondecreasing capacity rows with distinct shapes per machine
    steps = rng.uniform(0.0, 4.0, size=(m, grid_size))
    capgrid = np.cumsum(steps, axis=1)
    x_floor = int(rng.integers(0, grid_size))
    return job_ps, capgrid, x_floor


SEARCH_IMPLS = [("numpy", _kernels._search_numpy)]
if _kernels.NUMBA_ENABLED:
    SEARCH_IMPLS.append(("numba", _kernels.search_assignments))


@pytest.mark.parametrize("name,fn", SEARCH_IMPLS)
@pytest.mark.parametrize("seed", range(8))
def test_search_matches_scalar_reference(name, fn, seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    njobs = int(rng.integers(0, 6))
    grid_size = int(rng.integers(1, 7))
    job_ps, capgrid, x_floor = _search_case(rng, m, njobs, grid_size)
    n_total = m**njobs
    want = _kernels._search_scalar(job_ps, m, capgrid, x_floor, n_total)
    got = fn(job_ps, m, capgrid, x_floor, n_total)
    assert (int(got[0]), int(got[1])) == (int(want[0]), int(want[1]))


@pytest.mark.parametrize("name,fn", SEARCH_IMPLS)
def test_search_reports_infeasible_as_grid_size(name, fn):
    capgrid = np.array([[1.0, 2.0]])
    job_ps = np.array([10.0])
    got = fn(job_ps, 1, capgrid, 0, 1)
    assert int(got[0]) == 2
    assert int(got[1]) == -1


def test_backend_reflects_environment():
    assert _kernels.backend() in ("numba", "numpy")
    assert _kernels.backend() == ("numba" if _kernels.NUMBA_ENABLED else "numpy")
