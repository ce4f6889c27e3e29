"""Sample-wise propagation rules for the optical elements.

All operations are pure per-sample transforms and accept scalars or numpy
arrays of complex amplitudes.  Phases are defined relative to the pump,
whose phase is fixed to zero throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BeamSplitterParams",
    "DetectorParams",
    "GainParams",
    "beam_split",
    "detector_loss",
    "parametric_amplify",
    "polarizer_project",
]


@dataclass(frozen=True)
class GainParams:
    """Parametric-amplifier gain triple (gL, cosh gL, sinh gL)."""

    gl: float
    C: float = field(init=False)
    S: float = field(init=False)

    def __post_init__(self):
        if not (self.gl >= 0.0 and math.isfinite(self.gl)):
            raise ValueError(f"gain-length product must be finite and >= 0, got {self.gl}")
        object.__setattr__(self, "C", math.cosh(self.gl))
        object.__setattr__(self, "S", math.sinh(self.gl))

    @classmethod
    def from_mean_photons(cls, G: float) -> "GainParams":
        """Gain producing G = sinh^2(gL) photons per mode."""
        if G < 0:
            raise ValueError("mean photon number must be >= 0")
        return cls(gl=math.asinh(math.sqrt(G)))

    @property
    def mean_photons(self) -> float:
        return self.S * self.S


def parametric_amplify(es0, ei0, gain: GainParams):
    """Amplify a signal/idler pair of vacuum inputs.

    Returns ``(C es0 - i S conj(ei0), C ei0 - i S conj(es0))``.  The
    transform is linear and deterministic; the sample-wise difference
    |E_s|^2 - |E_i|^2 is conserved exactly.
    """
    es = gain.C * np.asarray(es0) - 1j * gain.S * np.conj(ei0)
    ei = gain.C * np.asarray(ei0) - 1j * gain.S * np.conj(es0)
    return es, ei


_UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class BeamSplitterParams:
    """Complex transmission/reflection amplitudes of a lossless splitter.

    ``t_s1`` (``r_s2``) couples input s to output 1 (2); ``t_i2``
    (``r_i1``) couples input i to output 2 (1).
    """

    t_s1: complex
    r_s2: complex
    r_i1: complex
    t_i2: complex

    def __post_init__(self):
        a1 = abs(self.t_s1) ** 2 + abs(self.r_s2) ** 2
        a2 = abs(self.t_i2) ** 2 + abs(self.r_i1) ** 2
        cross = self.t_s1 * np.conj(self.r_s2) + self.r_i1 * np.conj(self.t_i2)
        if abs(a1 - 1.0) > _UNITARITY_TOL or abs(a2 - 1.0) > _UNITARITY_TOL \
                or abs(cross) > _UNITARITY_TOL:
            raise ValueError("beam-splitter amplitudes are not unitary")

    @classmethod
    def balanced(cls) -> "BeamSplitterParams":
        """Symmetric 50/50 splitter: t = 1/sqrt(2), r = i/sqrt(2)."""
        t = 1.0 / math.sqrt(2.0)
        r = 1j / math.sqrt(2.0)
        return cls(t_s1=t, r_s2=r, r_i1=r, t_i2=t)

    @classmethod
    def from_transmittance(cls, T: float) -> "BeamSplitterParams":
        """Splitter with intensity transmittance T on both inputs."""
        if not 0.0 <= T <= 1.0:
            raise ValueError("transmittance must lie in [0, 1]")
        t = math.sqrt(T)
        r = 1j * math.sqrt(1.0 - T)
        return cls(t_s1=t, r_s2=r, r_i1=r, t_i2=t)


def beam_split(e_s, e_i, bs: BeamSplitterParams):
    """Mix two fields on a lossless splitter; conserves |E1|^2 + |E2|^2."""
    e1 = bs.t_s1 * np.asarray(e_s) + bs.r_i1 * np.asarray(e_i)
    e2 = bs.r_s2 * np.asarray(e_s) + bs.t_i2 * np.asarray(e_i)
    return e1, e2


def polarizer_project(e_x, e_y, theta: float):
    """Project onto the polarizer axis at angle theta.

    The orthogonal output is obtained by calling with theta + pi/2.
    """
    return np.cos(theta) * np.asarray(e_x) + np.sin(theta) * np.asarray(e_y)


@dataclass(frozen=True)
class DetectorParams:
    """Quantum efficiency of a detector, modelled as vacuum admixture."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"quantum efficiency must lie in [0, 1], got {self.eta}")


def detector_loss(e, det: DetectorParams, vac):
    """Mix a field with fresh vacuum: sqrt(eta) e + sqrt(1-eta) vac.

    ``vac`` must come from an independent vacuum stream, one per detector;
    vacua are never shared between call sites.
    """
    return math.sqrt(det.eta) * np.asarray(e) + math.sqrt(1.0 - det.eta) * np.asarray(vac)
