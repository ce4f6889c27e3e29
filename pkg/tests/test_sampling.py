import numpy as np
import pytest

from spdcsim.sampling import (ORDERING, RngStream, derive_stream, raw_words,
                              sample_vacuum)
from spdcsim.sampling import _philox_block


def test_ordering_constants_exact():
    assert ORDERING.intensity_offset == 0.5
    assert ORDERING.variance_offset == 0.25


@pytest.mark.parametrize("counter,seed,sid", [
    (0, 0, 0), (1, 0, 0), (0, 42, 0), (3, 42, 7), (1234, 98765, 43210),
])
def test_philox_block_matches_numpy(counter, seed, sid):
    # numpy's Philox increments the counter before emitting its first block,
    # so its block for counter c equals ours for counter c + 1.
    bg = np.random.Philox(counter=[counter, 0, 0, 0],
                          key=[np.uint64(seed), np.uint64(sid)])
    ref = bg.random_raw(8)
    sids = np.array([sid], dtype=np.uint64)
    mine = []
    with np.errstate(over="ignore"):
        for c in (counter + 1, counter + 2):
            mine.extend(w[0] for w in _philox_block(c, seed, sids))
    assert np.array_equal(ref, np.array(mine, dtype=np.uint64))


def test_raw_words_follow_block_layout():
    stream = derive_stream(42, 5)
    words = raw_words(stream, 3, 8)
    sids = np.array([5, 6, 7], dtype=np.uint64)
    with np.errstate(over="ignore"):
        blk0 = _philox_block(0, 42, sids)
        blk1 = _philox_block(1, 42, sids)
    expect = np.stack(blk0 + blk1, axis=1)
    assert np.array_equal(words, expect)


def test_vacuum_first_and_second_moments():
    ens = sample_vacuum(derive_stream(42, 0), 1_000_000, 1)
    col = ens.column(0)
    n = col.size
    intensity = np.abs(col) ** 2
    se_i = intensity.std(ddof=1) / np.sqrt(n)
    assert abs(intensity.mean() - 0.5) < 5 * se_i
    assert se_i == pytest.approx(0.0005, rel=0.1)

    se_mean = 0.5 / np.sqrt(n)
    assert abs(col.real.mean()) < 5 * se_mean
    assert abs(col.imag.mean()) < 5 * se_mean

    se_var = 0.25 * np.sqrt(2.0 / (n - 1))
    assert abs(col.real.var(ddof=1) - 0.25) < 5 * se_var
    assert abs(col.imag.var(ddof=1) - 0.25) < 5 * se_var


def test_vacuum_circularity_and_mode_independence():
    ens = sample_vacuum(derive_stream(7, 0), 1_000_000, 2)
    a, b = ens.column(0), ens.column(1)
    n = a.size
    pair = a * a
    se = np.sqrt((pair.real.var() + pair.imag.var()) / n)
    assert abs(pair.mean()) < 5 * se

    ia, ib = np.abs(a) ** 2, np.abs(b) ** 2
    prod = (ia - ia.mean()) * (ib - ib.mean())
    assert abs(prod.mean()) < 5 * prod.std(ddof=1) / np.sqrt(n)


def test_vacuum_fourth_moment_factorises():
    ens = sample_vacuum(derive_stream(3, 0), 1_000_000, 1)
    i4 = np.abs(ens.column(0)) ** 4
    se = i4.std(ddof=1) / np.sqrt(i4.size)
    assert abs(i4.mean() - 0.5) < 5 * se


def test_reproducible_and_order_independent():
    a = sample_vacuum(derive_stream(42, 0), 10_000, 3)
    b = sample_vacuum(derive_stream(42, 0), 10_000, 3)
    assert np.array_equal(a.data, b.data)
    c = sample_vacuum(derive_stream(42, 0), 10_000, 3, threads=4, chunk=512)
    assert np.array_equal(a.data, c.data)


def test_one_stream_per_repetition():
    ens = sample_vacuum(derive_stream(42, 0), 100, 2)
    # repetition r of the ensemble equals the single-repetition ensemble of
    # the stream derived for index r
    row = sample_vacuum(derive_stream(42, 57), 1, 2)
    assert np.array_equal(ens.data[57], row.data[0])


def test_derive_stream_contract():
    assert derive_stream(7, 0) == derive_stream(7, 0)
    first = sample_vacuum(derive_stream(7, 0), 1, 1).data[0, 0]
    other = sample_vacuum(derive_stream(7, 1), 1, 1).data[0, 0]
    different_seed = sample_vacuum(derive_stream(8, 3), 1, 1).data[0, 0]
    same_idx = sample_vacuum(derive_stream(7, 3), 1, 1).data[0, 0]
    assert first != other
    assert same_idx != different_seed


def test_invalid_shapes_rejected():
    with pytest.raises(ValueError):
        sample_vacuum(derive_stream(1, 0), 0, 1)
    with pytest.raises(ValueError):
        sample_vacuum(derive_stream(1, 0), 1, 0)


def test_stream_ids_wrap_to_uint64():
    s = RngStream(seed=-1, stream_id=2 ** 64 + 5)
    assert s.seed == 2 ** 64 - 1
    assert s.stream_id == 5


def test_samples_finite():
    ens = sample_vacuum(derive_stream(123, 0), 50_000, 4)
    assert np.all(np.isfinite(ens.data.view(np.float64)))
