"""Seedable vacuum-field sampling with counter-based per-repetition streams.

The sampler draws complex field amplitudes whose real and imaginary parts
are independent zero-mean Gaussians with variance 1/4, so each vacuum mode
carries a mean intensity <|E|^2> = 1/2 (units of photons per mode).
Expectations of sampled intensities are symmetric-order moments; converting
to normal order requires subtracting 1/2 from intensities and 1/4 from
intensity variances (see :data:`ORDERING`).  Individual normal-ordered
samples may be negative; nothing here clamps them.

Random number generation is fully deterministic and order-independent:

* Every repetition ``r`` of an ensemble owns a private Philox-4x64-10
  stream keyed by ``(seed, stream_id + r)``.  Philox is a pure function of
  (key, counter), so any number of workers can fill disjoint repetition
  ranges and always produce the same ensemble as a serial run.
* Within a stream, 64-bit words are consumed in counter order, mapped to
  doubles in [0, 1), and converted to Gaussians with the Box-Muller
  transform (word pair ``2t, 2t+1`` gives the cosine/sine pair).  Mode
  ``m`` of a repetition uses words ``2m`` and ``2m+1`` as its real and
  imaginary quadratures.

The Philox implementation below is vectorised over repetitions and is
checked bit-for-bit against ``numpy.random.Philox`` in the test suite.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ORDERING",
    "FieldEnsemble",
    "OrderingConstants",
    "RngStream",
    "derive_stream",
    "sample_vacuum",
    "LANE_STRIDE",
]

_U64 = np.uint64
_MASK64 = (1 << 64) - 1

# Philox-4x64 round multipliers and Weyl key increments (Random123 constants).
_M0 = _U64(0xD2E7470EE14C6C93)
_M1 = _U64(0xCA5A826395121157)
_W0 = _U64(0x9E3779B97F4A7C15)
_W1 = _U64(0xBB67AE8584CAA73B)
_MASK32 = _U64(0xFFFFFFFF)
_SH32 = _U64(32)
_SH11 = _U64(11)
_INV53 = 2.0 ** -53

#: Offset between stream_id blocks reserved for independent vacuum lanes of
#: a single experiment (e.g. amplifier inputs vs. detector-loss vacua).
LANE_STRIDE = 1 << 40

#: Constants converting symmetric-order sampled moments to normal order.
@dataclass(frozen=True)
class OrderingConstants:
    intensity_offset: float = 0.5
    variance_offset: float = 0.25


ORDERING = OrderingConstants()


@dataclass(frozen=True)
class RngStream:
    """Identifier of one deterministic random stream.

    Identical ``(seed, stream_id)`` pairs reproduce bit-identical samples;
    distinct stream ids yield statistically independent streams.
    """

    seed: int
    stream_id: int

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)


def derive_stream(seed: int, repetition_index: int) -> RngStream:
    """Pure derivation of the per-repetition stream for a given seed."""
    return RngStream(seed=seed, stream_id=repetition_index)


@dataclass(frozen=True)
class FieldEnsemble:
    """R independent repetitions x M modes of complex field amplitudes."""

    data: np.ndarray
    seed: int
    stream_base: int = 0

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("ensemble data must be 2-D (reps x modes)")

    @property
    def reps(self) -> int:
        return self.data.shape[0]

    @property
    def modes(self) -> int:
        return self.data.shape[1]

    def column(self, m: int) -> np.ndarray:
        return self.data[:, m]


def _mulhilo(a: np.uint64, x: np.ndarray):
    """Low and high 64 bits of a * x (64x64 -> 128 via 32-bit limbs)."""
    lo = a * x
    ah = a >> _SH32
    al = a & _MASK32
    xh = x >> _SH32
    xl = x & _MASK32
    t = ah * xl + ((al * xl) >> _SH32)
    u = al * xh + (t & _MASK32)
    hi = ah * xh + (t >> _SH32) + (u >> _SH32)
    return hi, lo


def _philox_block(counter0: int, seed: int, stream_ids: np.ndarray):
    """One Philox-4x64-10 block per stream id; returns four uint64 arrays."""
    shape = stream_ids.shape
    x0 = np.full(shape, _U64(counter0), dtype=np.uint64)
    x1 = np.zeros(shape, dtype=np.uint64)
    x2 = np.zeros(shape, dtype=np.uint64)
    x3 = np.zeros(shape, dtype=np.uint64)
    k0 = np.full(shape, _U64(seed), dtype=np.uint64)
    k1 = stream_ids.astype(np.uint64, copy=True)
    for _ in range(10):
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return x0, x1, x2, x3


def raw_words(stream: RngStream, reps: int, n_words: int) -> np.ndarray:
    """First ``n_words`` raw 64-bit words of ``reps`` consecutive streams."""
    sids = (_U64(stream.stream_id) + np.arange(reps, dtype=np.uint64)).astype(np.uint64)
    n_blocks = -(-n_words // 4)
    words = np.empty((reps, 4 * n_blocks), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(n_blocks):
            w0, w1, w2, w3 = _philox_block(j, stream.seed, sids)
            words[:, 4 * j] = w0
            words[:, 4 * j + 1] = w1
            words[:, 4 * j + 2] = w2
            words[:, 4 * j + 3] = w3
    return words[:, :n_words]


def _gaussian_pairs(words: np.ndarray) -> np.ndarray:
    """Box-Muller transform of an even number of word columns."""
    u1 = ((words[:, 0::2] >> _SH11) + _U64(1)).astype(np.float64) * _INV53
    u2 = (words[:, 1::2] >> _SH11).astype(np.float64) * _INV53
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    z = np.empty_like(words, dtype=np.float64)
    z[:, 0::2] = r * np.cos(ang)
    z[:, 1::2] = r * np.sin(ang)
    return z


def _fill_rows(out: np.ndarray, stream: RngStream, row0: int, rows: int, modes: int) -> None:
    n_words = 2 * modes
    if n_words % 4:
        n_words += 4 - (n_words % 4)  # keep whole blocks, discard extras
    sub = RngStream(stream.seed, stream.stream_id + row0)
    words = raw_words(sub, rows, n_words)
    z = _gaussian_pairs(words)
    out[row0:row0 + rows] = 0.5 * (z[:, 0:2 * modes:2] + 1j * z[:, 1:2 * modes:2])


def sample_vacuum(rng: RngStream, reps: int, modes: int, threads: int = 1,
                  chunk: int = 1 << 16) -> FieldEnsemble:
    """Sample independent vacuum fields, one stream per repetition.

    Each amplitude is a circular complex Gaussian with <E E*> = 1/2 and
    <E E> = 0; distinct modes and repetitions are uncorrelated.  The result
    depends only on ``rng`` and the shape, never on ``threads`` or
    ``chunk``.
    """
    if reps < 1 or modes < 1:
        raise ValueError("reps and modes must both be >= 1")
    out = np.empty((reps, modes), dtype=np.complex128)
    starts = list(range(0, reps, chunk))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_fill_rows, out, rng, a, min(chunk, reps - a), modes)
                for a in starts
            ]
            for f in futures:
                f.result()
    else:
        for a in starts:
            _fill_rows(out, rng, a, min(chunk, reps - a), modes)
    return FieldEnsemble(data=out, seed=rng.seed, stream_base=rng.stream_id)
