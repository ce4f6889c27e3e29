"""Ensemble statistics with symmetric-to-normal ordering corrections.

Estimators consume columns of complex field samples (one repetition per
row).  Sampled intensities |E|^2 are symmetric-order quantities; the
estimators subtract the ordering constants (1/2 for means, 1/4 for
variances, nothing for covariances) so that reported values are
normal-ordered observables.  Standard errors of ratio statistics come from
a vectorised delete-one jackknife over repetitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sampling import ORDERING
from . import theory

__all__ = [
    "DegenerateStatisticError",
    "FourfoldResult",
    "MomentEstimate",
    "chsh_coefficient",
    "correlation_coefficient",
    "covariance_intensity",
    "field_pair_moment",
    "fourfold_covariance",
    "gaussian_moment_check",
    "intensity_snr",
    "jackknife_se",
    "mean_intensity",
    "moment_theorem_residual",
    "normal_intensities",
    "variance_intensity",
]


class DegenerateStatisticError(ValueError):
    """Raised when a ratio statistic has no usable denominator."""


@dataclass(frozen=True)
class MomentEstimate:
    """A statistic with its standard error and sample count."""

    value: float | complex
    std_error: float
    n_samples: int

    def deviation(self, oracle: float | complex) -> float:
        """Distance from an oracle value in units of the standard error."""
        if self.std_error <= 0:
            return float("inf")
        return float(abs(self.value - oracle) / self.std_error)


def _check_column(col: np.ndarray, min_n: int = 2) -> np.ndarray:
    col = np.asarray(col)
    if col.ndim != 1:
        raise ValueError("estimators expect 1-D ensemble columns")
    if col.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} samples, got {col.shape[0]}")
    return col


def _check_equal(*cols):
    cols = [_check_column(c) for c in cols]
    n = cols[0].shape[0]
    if any(c.shape[0] != n for c in cols):
        raise ValueError("ensemble columns must have equal lengths")
    return cols


def normal_intensities(col: np.ndarray) -> np.ndarray:
    """Per-sample normal-ordered intensities |E|^2 - 1/2 (may be negative)."""
    col = np.asarray(col)
    return np.abs(col) ** 2 - ORDERING.intensity_offset


def jackknife_se(func, *samples: np.ndarray) -> float:
    """Delete-one jackknife standard error of ``func`` of sample means.

    ``func`` must accept the means of each column in ``samples`` and be
    numpy-broadcastable; it is evaluated on all leave-one-out means at
    once.
    """
    samples = [np.asarray(s) for s in samples]
    n = samples[0].shape[0]
    loo = [(s.sum() - s) / (n - 1) for s in samples]
    theta = func(*loo)
    theta = np.asarray(theta, dtype=np.float64)
    return float(np.sqrt((n - 1) * np.mean((theta - theta.mean()) ** 2)))


def mean_intensity(col: np.ndarray) -> MomentEstimate:
    """Normal-ordered mean intensity of one ensemble column."""
    col = _check_column(col)
    x = np.abs(col) ** 2
    n = x.shape[0]
    value = float(x.mean() - ORDERING.intensity_offset)
    se = float(x.std(ddof=1) / np.sqrt(n))
    return MomentEstimate(value, se, n)


def _variance_from_intensities(x: np.ndarray) -> MomentEstimate:
    n = x.shape[0]
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    m4 = np.mean(d ** 4)
    value = float(x.var(ddof=1) - ORDERING.variance_offset)
    se = float(np.sqrt(max(m4 - m2 ** 2, 0.0) / n))
    return MomentEstimate(value, se, n)


def variance_intensity(col: np.ndarray) -> MomentEstimate:
    """Normal-ordered intensity variance of one ensemble column.

    The sampled variance of |E|^2 minus the 1/4 ordering offset; the
    standard error uses the delta-method formula sqrt((m4 - m2^2)/n).
    """
    col = _check_column(col)
    return _variance_from_intensities(np.abs(col) ** 2)


def covariance_intensity(col_a: np.ndarray, col_b: np.ndarray) -> MomentEstimate:
    """Sample covariance of two intensity columns (no ordering correction)."""
    a, b = _check_equal(col_a, col_b)
    xa = np.abs(a) ** 2
    xb = np.abs(b) ** 2
    n = xa.shape[0]
    prod = (xa - xa.mean()) * (xb - xb.mean())
    value = float(prod.sum() / (n - 1))
    se = float(prod.std(ddof=1) / np.sqrt(n))
    return MomentEstimate(value, se, n)


def correlation_coefficient(col_a: np.ndarray, col_b: np.ndarray) -> MomentEstimate:
    """Intensity correlation coefficient with normal-ordered variances."""
    a, b = _check_equal(col_a, col_b)
    xa = np.abs(a) ** 2
    xb = np.abs(b) ** 2
    n = xa.shape[0]
    off = ORDERING.variance_offset

    def rho(ma, mb, maa, mbb, mab):
        va = maa - ma ** 2 - off
        vb = mbb - mb ** 2 - off
        return (mab - ma * mb) / np.sqrt(va * vb)

    for x in (xa, xb):
        est = _variance_from_intensities(x)
        if est.value <= 0 or est.value < 5.0 * est.std_error:
            raise DegenerateStatisticError(
                "normal-ordered variance consistent with zero")
    value = float(rho(xa.mean(), xb.mean(), np.mean(xa ** 2), np.mean(xb ** 2),
                      np.mean(xa * xb)))
    se = jackknife_se(rho, xa, xb, xa ** 2, xb ** 2, xa * xb)
    return MomentEstimate(value, se, n)


def field_pair_moment(col_a: np.ndarray, col_b: np.ndarray,
                      conjugate_second: bool = False) -> MomentEstimate:
    """Mean field product <E_a E_b> or <E_a E_b*> (symmetric order)."""
    a, b = _check_equal(col_a, col_b)
    prod = a * (np.conj(b) if conjugate_second else b)
    n = prod.shape[0]
    value = complex(prod.mean())
    se = float(np.sqrt((prod.real.var(ddof=1) + prod.imag.var(ddof=1)) / n))
    return MomentEstimate(value, se, n)


def moment_theorem_residual(col_a: np.ndarray, col_b: np.ndarray) -> MomentEstimate:
    """Residual of the Gaussian factorisation of <I_a I_b>.

    For jointly Gaussian fields the symmetric-order intensity product
    factorises as <I_a><I_b> + |<E_a E_b*>|^2 + |<E_a E_b>|^2; the returned
    estimate is the sampled difference with a jackknife standard error.
    """
    a, b = _check_equal(col_a, col_b)
    xa = np.abs(a) ** 2
    xb = np.abs(b) ** 2
    prod = xa * xb
    cross = a * np.conj(b)
    pair = a * b

    def resid(mp, ma, mb, mc_re, mc_im, mq_re, mq_im):
        return mp - ma * mb - (mc_re ** 2 + mc_im ** 2) - (mq_re ** 2 + mq_im ** 2)

    value = float(resid(prod.mean(), xa.mean(), xb.mean(),
                        cross.real.mean(), cross.imag.mean(),
                        pair.real.mean(), pair.imag.mean()))
    se = jackknife_se(resid, prod, xa, xb, cross.real, cross.imag,
                      pair.real, pair.imag)
    return MomentEstimate(value, se, xa.shape[0])


def gaussian_moment_check(col_a: np.ndarray, col_b: np.ndarray) -> float:
    """|moment-theorem residual| in multiples of its standard error."""
    est = moment_theorem_residual(col_a, col_b)
    return est.deviation(0.0)


def chsh_coefficient(e1p: np.ndarray, e1m: np.ndarray,
                     e2p: np.ndarray, e2m: np.ndarray) -> MomentEstimate:
    """Polarisation correlation coefficient E from intensity products.

    Uses raw per-sample normal-ordered intensities; the product of mean
    intensities is deliberately not subtracted (covariances are not a
    valid ingredient of this statistic).
    """
    cols = _check_equal(e1p, e1m, e2p, e2m)
    i1p, i1m, i2p, i2m = (normal_intensities(c) for c in cols)
    num = i1p * i2p + i1m * i2m - i1p * i2m - i1m * i2p
    den = i1p * i2p + i1m * i2m + i1p * i2m + i1m * i2p
    n = num.shape[0]
    den_mean = den.mean()
    den_se = den.std(ddof=1) / np.sqrt(n)
    if abs(den_mean) < 5.0 * den_se:
        raise DegenerateStatisticError("intensity-product denominator consistent with zero")
    value = float(num.mean() / den_mean)
    se = jackknife_se(lambda mn, md: mn / md, num, den)
    return MomentEstimate(value, se, n)


@dataclass(frozen=True)
class FourfoldResult:
    """Direct four-detector covariance plus its nine-term factorisation."""

    direct: MomentEstimate
    terms: np.ndarray
    term_classes: dict = field(default_factory=dict)
    terms_total: MomentEstimate | None = None
    class_estimates: dict = field(default_factory=dict)

    def class_sum(self, name: str) -> complex:
        return complex(sum(self.terms[i] for i in self.term_classes[name]))


def _terms_from_parts(ss_re, ss_im, ii_re, ii_im, m11r, m11i,
                      m12r, m12i, m21r, m21i, m22r, m22i):
    terms, _ = theory.fourfold_terms(
        m_ss=ss_re + 1j * ss_im, m_ii=ii_re + 1j * ii_im,
        mu11=m11r + 1j * m11i, mu12=m12r + 1j * m12i,
        mu21=m21r + 1j * m21i, mu22=m22r + 1j * m22i,
    )
    return terms


def fourfold_covariance(s1: np.ndarray, s2: np.ndarray,
                        i1: np.ndarray, i2: np.ndarray) -> FourfoldResult:
    """Four-fold intensity covariance <prod_k (I_k - <I_k>)>.

    The direct Monte Carlo estimate uses symmetric-order intensities
    (centering cancels every ordering constant for four distinct
    detectors).  The nine pair-moment products that reproduce it for
    Gaussian fields are evaluated from the sampled field moments and
    grouped into bunching / low-gain / mixed classes, each with a
    jackknife standard error.
    """
    cols = _check_equal(s1, s2, i1, i2)
    ints = [np.abs(c) ** 2 for c in cols]
    n = ints[0].shape[0]
    centered = [x - x.mean() for x in ints]
    prod = centered[0] * centered[1] * centered[2] * centered[3]
    direct = MomentEstimate(float(prod.mean()),
                            float(prod.std(ddof=1) / np.sqrt(n)), n)

    a, b, c, d = cols
    pm = {
        "m_ss": a * np.conj(b),
        "m_ii": np.conj(c) * d,
        "mu11": a * c,
        "mu12": a * d,
        "mu21": b * c,
        "mu22": b * d,
    }
    terms, classes = theory.fourfold_terms(**{k: complex(v.mean()) for k, v in pm.items()})

    parts = []
    for key in ("m_ss", "m_ii", "mu11", "mu12", "mu21", "mu22"):
        parts.extend([pm[key].real, pm[key].imag])

    total_se = jackknife_se(lambda *p: sum(_terms_from_parts(*p)).real, *parts)
    terms_total = MomentEstimate(float(np.sum(terms).real), total_se, n)
    class_estimates = {}
    for name, idx in classes.items():
        value = float(sum(terms[i] for i in idx).real)
        se = jackknife_se(
            lambda *p, _idx=tuple(idx): sum(_terms_from_parts(*p)[list(_idx)]).real,
            *parts)
        class_estimates[name] = MomentEstimate(value, se, n)
    return FourfoldResult(direct=direct, terms=terms, term_classes=classes,
                          terms_total=terms_total, class_estimates=class_estimates)


def intensity_snr(col: np.ndarray) -> float:
    """Single-repetition SNR: mean over std of normal-ordered intensities."""
    x = normal_intensities(_check_column(col))
    return float(x.mean() / x.std(ddof=1))
