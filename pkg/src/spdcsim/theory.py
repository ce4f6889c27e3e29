"""Closed-form predictions the Monte Carlo results are checked against."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elements import BeamSplitterParams, GainParams

__all__ = [
    "BellPrediction",
    "CHSH_ANGLES",
    "CHSH_B0",
    "CHSH_THRESHOLD_GAIN",
    "bell_correlation",
    "bell_chsh_coefficient",
    "bell_prediction",
    "chsh_gain_factor",
    "coincident_fourfold_moments",
    "fourfold_terms",
    "hom_covariance_ratio",
    "twin_beam_moments",
]

#: CHSH value of the ideal polarisation-entangled pair at vanishing gain.
CHSH_B0 = 2.0 * math.sqrt(2.0)

#: Gain at which the CHSH bound 2 is reached: solves (1+G)/(1+3G) = 1/sqrt(2).
CHSH_THRESHOLD_GAIN = (2.0 * math.sqrt(2.0) - 1.0) / 7.0

#: Polariser settings (theta1, theta1', theta2, theta2') reaching B(0) = 2 sqrt(2)
#: for sin^2-law correlations, combined as
#:   B = E(theta1', theta2) + E(theta1', theta2') + E(theta1, theta2') - E(theta1, theta2).
CHSH_ANGLES = (0.0, math.pi / 4.0, math.pi / 8.0, 3.0 * math.pi / 8.0)


def twin_beam_moments(gain: GainParams, eta: float = 1.0) -> dict:
    """Mean, variance and covariance of twin-beam intensities at efficiency eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    s2 = gain.S ** 2
    return {
        "mean": eta * s2,
        "var": eta ** 2 * s2 ** 2 + eta * s2,
        "cov": eta ** 2 * s2 ** 2 + eta ** 2 * s2,
    }


def hom_covariance_ratio(bs: BeamSplitterParams) -> float:
    """Covariance suppression factor |t_s1 t_i2 + r_i1 r_s2|^2 of a splitter."""
    return float(abs(bs.t_s1 * bs.t_i2 + bs.r_i1 * bs.r_s2) ** 2)


def chsh_gain_factor(G: float) -> float:
    """Multiplicative reduction (1+G)/(1+3G) of the CHSH coefficient at gain G."""
    if G < 0:
        raise ValueError("gain G must be >= 0")
    return (1.0 + G) / (1.0 + 3.0 * G)


def bell_correlation(theta1: float, theta2: float) -> float:
    """Intensity correlation coefficient sin^2(theta1 + theta2)."""
    return math.sin(theta1 + theta2) ** 2


def bell_chsh_coefficient(theta1: float, theta2: float, G: float) -> float:
    """CHSH ingredient E(theta1, theta2) from intensity products at gain G."""
    s = math.sin(theta1 + theta2) ** 2
    return chsh_gain_factor(G) * (2.0 * s - 1.0)


@dataclass(frozen=True)
class BellPrediction:
    """CHSH coefficient B at gain G together with the violation threshold."""

    G: float
    b0: float = CHSH_B0
    b_of_g: float = field(init=False)
    threshold_g: float = CHSH_THRESHOLD_GAIN

    def __post_init__(self):
        if self.G < 0:
            raise ValueError("gain G must be >= 0")
        object.__setattr__(self, "b_of_g", chsh_gain_factor(self.G) * self.b0)


def chsh_b_value(coefficients: dict) -> float:
    """Combine the four E coefficients of the standard angle set into B."""
    a, ap, b, bp = CHSH_ANGLES
    return (coefficients[(ap, b)] + coefficients[(ap, bp)]
            + coefficients[(a, bp)] - coefficients[(a, b)])


def bell_prediction(theta1: float, theta2: float, G: float) -> dict:
    """Predictions for one polariser setting plus the standard-angle CHSH value."""
    return {
        "rho": bell_correlation(theta1, theta2),
        "E": bell_chsh_coefficient(theta1, theta2, G),
        "B": BellPrediction(G).b_of_g,
        "threshold_G": CHSH_THRESHOLD_GAIN,
    }


def fourfold_terms(m_ss, m_ii, mu11, mu12, mu21, mu22):
    """Nine pair-moment products forming the four-fold intensity covariance.

    Arguments are the six independent second moments of the four detector
    fields: ``m_ss`` = <E_s1 E_s2*>, ``m_ii`` = <E_i1* E_i2> and the four
    signal-idler products ``mu_jk`` = <E_sj E_ik>.  Conjugates are derived
    internally.  Returns the nine products (any argument may be an array)
    and the index partition into the bunching term, the four terms that
    survive at low gain, and the four mixed terms.
    """
    c = np.conj
    terms = [
        m_ss * c(m_ss) * m_ii * c(m_ii),          # incoherent bunching
        m_ss * mu21 * m_ii * c(mu12),             # mixed
        m_ss * mu22 * c(mu11) * c(m_ii),          # mixed
        c(m_ss) * mu11 * m_ii * c(mu22),          # mixed (conj of previous)
        mu11 * c(mu11) * mu22 * c(mu22),          # low gain
        mu11 * mu22 * c(mu21) * c(mu12),          # low gain
        c(m_ss) * mu12 * c(mu21) * c(m_ii),       # mixed (conj of second)
        mu12 * mu21 * c(mu11) * c(mu22),          # low gain
        mu12 * c(mu12) * mu21 * c(mu21),          # low gain
    ]
    classes = {"bunching": [0], "mixed": [1, 2, 3, 6], "low_gain": [4, 5, 7, 8]}
    return np.asarray(terms), classes


def coincident_fourfold_moments(gain: GainParams) -> dict:
    """Exact pair moments when both signal and both idler detectors coincide."""
    s2 = gain.S ** 2
    mu = -1j * gain.C * gain.S
    return {
        "m_ss": s2 + 0.5,
        "m_ii": s2 + 0.5,
        "mu11": mu,
        "mu12": mu,
        "mu21": mu,
        "mu22": mu,
    }


def coincident_fourfold_total(gain: GainParams) -> float:
    """Exact four-fold covariance of the coincident single-mode configuration."""
    terms, _ = fourfold_terms(**coincident_fourfold_moments(gain))
    return float(np.sum(terms).real)
