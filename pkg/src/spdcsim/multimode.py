"""Spatially multimode SPDC: joint kernel, Schmidt modes, pixel fields, HOM dip.

The joint field-moment kernel K[l, m] ~ <Es_l Ei_m> is built per transverse
axis on ``n_pixels`` momentum pixels:

    K(q_s, q_i) = pump(q_s + q_i) * lambda(qbar),   qbar = (q_s - q_i)/2,

with a Gaussian pump angular spectrum of width 1/pump_waist and a
phase-matched parametric gain profile.  The default profile is the
plane-wave mismatch solution

    S_eff(qbar) = g0 * sinhc(sqrt(g0^2 - M(qbar)^2)),  M = (qbar/qc)^2,

whose amplified band grows with gain (sinhc turns into an oscillatory
sinc-like decay outside it), together with a gain-guided broadening of the
phase-matching bandwidth, qc_eff = qc (1 + g0/g_ref)^alpha: at high gain
amplification confines the near field towards the pump-waist centre, so
the emitted far field broadens.  ``lambda = S_eff sqrt(1 + S_eff^2)``
equals C*S of an equivalent per-mode squeezer.  A purely Gaussian envelope
(exp(-M/2) in place of the sinhc profile) is kept as an option.

Two-dimensional far-field images (n_pixels x n_pixels per detection plane)
use the separable product of the two axis kernels, so the Schmidt modes of
the image planes are products of axis modes with lambda_ij = lambda_i
lambda_j and per-mode gains g_ij = asinh(2 lambda_ij)/2.  This keeps the
decomposition at axis size while the image statistics aggregate every
pixel pair.

The HOM dip ordinate aggregates the cross-port field coherence
|<E1 E2*>|^2 + |<E1 E2>|^2 over the bright matched pixel pairs (signal
pixel q with idler pixel -q) of the two output images.  For Gaussian
fields this equals the aggregated intensity covariance by the moment
theorem, but the pair-moment estimates (bias-corrected for their own
sampling variance) resolve the dip far below the vacuum noise floor of
raw intensity products, which matters at low photon number.  The
aggregate is normalised by the same statistic at a reference tilt far
outside the phase-matching band, so the curve tends to 1 for
distinguishable beams at every gain and to 0 at zero tilt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, curve_fit

from .sampling import RngStream, sample_vacuum

__all__ = [
    "DipCurve",
    "Hom2dConfig",
    "JointAmplitudeKernel",
    "SchmidtDecomposition",
    "build_kernel",
    "calibrate_gain",
    "image_mean_intensities",
    "pixel_mean_intensities",
    "run_hom2d",
    "sample_image_planes",
    "sample_multimode",
    "schmidt_decompose",
    "shift_field",
]

#: Crystal length (mm) at which ``pm_bandwidth`` is quoted.
REFERENCE_LENGTH_MM = 0.8


@dataclass(frozen=True)
class Hom2dConfig:
    """Geometry, gain and sweep settings of the multimode HOM experiment.

    ``n_pixels`` counts momentum pixels per transverse axis; detection
    planes are ``n_pixels x n_pixels`` images.
    """

    n_pixels: int = 64
    pitch: float = 0.25
    crystal_length_mm: float = 0.8
    pump_waist: float = 4.0
    pm_bandwidth: float = 0.7
    pm_broadening_exponent: float = 1.1
    pm_broadening_gain: float = 0.7
    phase_matching: str = "sinc"
    gain_scale: float = 0.8814
    theta_sweep: tuple = tuple(np.linspace(-3.6, 3.6, 33))
    reps: int = 100
    seed: int = 42
    band_floor: float = 0.05
    mode_floor: float = 1e-8

    def __post_init__(self):
        if self.n_pixels < 1:
            raise ValueError("n_pixels must be >= 1")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if len(self.theta_sweep) == 0:
            raise ValueError("theta_sweep must not be empty")
        if self.crystal_length_mm <= 0 or self.pump_waist <= 0 or self.pm_bandwidth <= 0:
            raise ValueError("crystal length, pump waist and bandwidth must be positive")
        if self.gain_scale < 0:
            raise ValueError("gain_scale must be >= 0")
        if self.phase_matching not in ("sinc", "gaussian"):
            raise ValueError("phase_matching must be 'sinc' or 'gaussian'")

    @property
    def q_axis(self) -> np.ndarray:
        n = self.n_pixels
        return (np.arange(n) - (n - 1) / 2.0) * self.pitch


@dataclass(frozen=True)
class JointAmplitudeKernel:
    """Joint signal-idler field-moment matrix over one momentum axis."""

    matrix: np.ndarray
    pitch: float

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("kernel must be a 2-D matrix")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("kernel entries must be finite")


def _sinhc(x: np.ndarray) -> np.ndarray:
    """sinh(x)/x continued through imaginary arguments (sin(y)/y)."""
    out = np.ones_like(x, dtype=complex)
    nz = x != 0
    out[nz] = np.sinh(x[nz]) / x[nz]
    return out.real


def build_kernel(config: Hom2dConfig) -> JointAmplitudeKernel:
    """Deterministic axis kernel for the configured geometry and gain."""
    q = config.q_axis
    qs = q[:, None]
    qi = q[None, :]
    qbar = 0.5 * (qs - qi)
    g0 = config.gain_scale
    # bandwidth narrows with crystal length, broadens with gain (gain guiding)
    qc = config.pm_bandwidth * math.sqrt(REFERENCE_LENGTH_MM / config.crystal_length_mm)
    qc_eff = qc * (1.0 + g0 / config.pm_broadening_gain) ** config.pm_broadening_exponent
    if config.phase_matching == "sinc":
        mismatch = (qbar / qc_eff) ** 2
        s_eff = g0 * _sinhc(np.sqrt((g0 ** 2 - mismatch ** 2).astype(complex)))
    else:
        s_eff = np.sinh(g0 * np.exp(-(qbar ** 2) / (2.0 * qc_eff ** 2)))
    lam = np.abs(s_eff) * np.sqrt(1.0 + s_eff ** 2)
    sigma_pump = 1.0 / config.pump_waist
    pump = np.exp(-((qs + qi) ** 2) / (2.0 * sigma_pump ** 2))
    return JointAmplitudeKernel(matrix=pump * lam, pitch=config.pitch)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Column-orthonormal mode matrices with singular values and mode gains."""

    U: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    g: np.ndarray
    residual: float

    @property
    def n_modes(self) -> int:
        return self.lam.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.lam) @ self.V.T


def schmidt_decompose(kernel: JointAmplitudeKernel,
                      floor: float = 1e-8) -> SchmidtDecomposition:
    """SVD of the kernel with per-mode gains g_k = asinh(2 lambda_k)/2.

    Modes whose singular value falls below ``floor`` times the largest are
    truncated.  The kept factors satisfy K ~ U diag(lambda) V^T.
    """
    try:
        U, lam, Vh = np.linalg.svd(kernel.matrix)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"SVD of {kernel.matrix.shape} kernel failed: {exc}") from exc
    lam_max = lam[0] if lam.size else 0.0
    keep = lam > floor * lam_max if lam_max > 0 else np.zeros_like(lam, dtype=bool)
    U = U[:, keep]
    lam = lam[keep]
    V = Vh[keep].T
    g = 0.5 * np.arcsinh(2.0 * lam)
    norm = np.linalg.norm(kernel.matrix)
    resid = np.linalg.norm((U * lam) @ V.T - kernel.matrix) / norm if norm > 0 else 0.0
    return SchmidtDecomposition(U=U, V=V, lam=lam, g=g, residual=float(resid))


def pixel_mean_intensities(dec: SchmidtDecomposition) -> np.ndarray:
    """Normal-ordered mean intensity per signal pixel, sum_k |U_lk|^2 sinh^2 g_k."""
    return (np.abs(dec.U) ** 2) @ np.sinh(dec.g) ** 2


def image_mean_intensities(dec: SchmidtDecomposition) -> np.ndarray:
    """Mean intensity image of the separable two-axis synthesis."""
    s2 = np.sinh(_product_gains(dec)) ** 2
    w = np.abs(dec.U) ** 2
    return w @ s2 @ w.T


def _product_gains(dec: SchmidtDecomposition) -> np.ndarray:
    """Per-mode gains of the product modes of two identical axes."""
    lam2 = np.outer(dec.lam, dec.lam)
    return 0.5 * np.arcsinh(2.0 * lam2)


def calibrate_gain(config: Hom2dConfig, photons_per_pixel: float,
                   g_max: float = 9.0) -> Hom2dConfig:
    """Tune ``gain_scale`` so the brightest image pixel carries the target
    mean photon number."""
    if photons_per_pixel <= 0:
        raise ValueError("photons_per_pixel must be positive")

    def brightest(g0):
        dec = schmidt_decompose(build_kernel(replace(config, gain_scale=g0)),
                                floor=0.0)
        return image_mean_intensities(dec).max() - photons_per_pixel

    g0 = brentq(brightest, 1e-9, g_max, xtol=1e-12, rtol=1e-12)
    return replace(config, gain_scale=float(g0))


def sample_multimode(dec: SchmidtDecomposition, rng: RngStream, reps: int,
                     threads: int = 1):
    """Synthesise single-axis pixel-plane field ensembles from Schmidt modes.

    Per repetition: draw a vacuum pair per Schmidt mode, amplify it with
    the per-mode gain, map to pixels through U and V, and add the
    orthogonal-complement vacuum so every pixel carries the full vacuum.
    Returns ``(signal, idler)`` arrays of shape (reps, n_pixels).
    """
    K = dec.n_modes
    ns = dec.U.shape[0]
    ni = dec.V.shape[0]
    ens = sample_vacuum(rng, reps, 2 * K + ns + ni, threads=threads)
    es0 = ens.data[:, :K]
    ei0 = ens.data[:, K:2 * K]
    vs = ens.data[:, 2 * K:2 * K + ns]
    vi = ens.data[:, 2 * K + ns:]
    C = np.cosh(dec.g)
    S = np.sinh(dec.g)
    amp_s = C * es0 - 1j * S * np.conj(ei0)
    amp_i = C * ei0 - 1j * S * np.conj(es0)
    signal = amp_s @ dec.U.T + vs - (vs @ np.conj(dec.U)) @ dec.U.T
    idler = amp_i @ dec.V.T + vi - (vi @ np.conj(dec.V)) @ dec.V.T
    return signal, idler


def sample_image_planes(dec: SchmidtDecomposition, rng: RngStream, reps: int,
                        threads: int = 1):
    """Synthesise two-axis far-field images from the product Schmidt modes.

    The decomposition must keep the full axis basis (build it with
    ``floor=0.0``) so the product modes span the whole image plane; modes
    with vanishing singular value then simply pass vacuum through.
    Returns ``(signal, idler)`` arrays of shape (reps, n, n).
    """
    n = dec.U.shape[0]
    if dec.n_modes != n or dec.V.shape[0] != n:
        raise ValueError("image synthesis needs the untruncated axis basis")
    g2 = _product_gains(dec)
    C = np.cosh(g2)
    S = np.sinh(g2)
    ens = sample_vacuum(rng, reps, 2 * n * n, threads=threads)
    es0 = ens.data[:, :n * n].reshape(reps, n, n)
    ei0 = ens.data[:, n * n:].reshape(reps, n, n)
    amp_s = C * es0 - 1j * S * np.conj(ei0)
    amp_i = C * ei0 - 1j * S * np.conj(es0)
    signal = np.einsum("xi,rij,yj->rxy", dec.U, amp_s, dec.U, optimize=True)
    idler = np.einsum("xi,rij,yj->rxy", dec.V, amp_i, dec.V, optimize=True)
    return signal, idler


def shift_field(fields: np.ndarray, shift_px: float, axis: int = -1) -> np.ndarray:
    """Displace a pixel-plane field by ``shift_px`` pixels along one axis.

    Integer shifts reduce to a circular roll; fractional shifts use the
    unitary Fourier phase ramp, which preserves the vacuum level exactly
    (linear interpolation of amplitudes would not).
    """
    if shift_px == int(shift_px):
        return np.roll(fields, int(shift_px), axis=axis)
    n = fields.shape[axis]
    k = np.fft.fftfreq(n)
    shape = [1] * fields.ndim
    shape[axis] = n
    ramp = np.exp(-2j * np.pi * k * shift_px).reshape(shape)
    return np.fft.ifft(np.fft.fft(fields, axis=axis) * ramp, axis=axis)


@dataclass(frozen=True)
class DipCurve:
    """Normalised HOM dip amplitude against beam-splitter tilt."""

    theta: np.ndarray
    amplitude: np.ndarray
    std_error: np.ndarray
    sigma_theta: float | None
    photons_per_pixel: float
    n_modes: int
    seed: int


def _pair_stats(e1: np.ndarray, e2: np.ndarray):
    """Cross-port pair-moment samples (reps x pairs): both field products
    and their squared magnitudes (for the sampling-variance correction)."""
    z1 = e1 * np.conj(e2)
    z2 = e1 * e2
    return (z1.real, z1.imag, np.abs(z1) ** 2,
            z2.real, z2.imag, np.abs(z2) ** 2)


def _coherence_aggregate(n_eff, m1r, m1i, s1, m2r, m2i, s2):
    """Unbiased aggregate of |<E1 E2*>|^2 + |<E1 E2>|^2 over pairs.

    ``(n |m|^2 - mean|z|^2) / (n - 1)`` removes the O(1/n) sampling
    variance of each squared pair-moment estimate.
    """
    c1 = (n_eff * (m1r ** 2 + m1i ** 2) - s1) / (n_eff - 1)
    c2 = (n_eff * (m2r ** 2 + m2i ** 2) - s2) / (n_eff - 1)
    return (c1 + c2).sum(axis=-1)


def _ratio_with_jackknife(stats_num, stats_den):
    """Dip ratio at one tilt over the reference tilt, with a delete-one-rep
    jackknife standard error."""
    reps = stats_num[0].shape[0]
    value = float(
        _coherence_aggregate(reps, *[s.mean(axis=0) for s in stats_num])
        / _coherence_aggregate(reps, *[s.mean(axis=0) for s in stats_den]))
    loo_n = [(s.sum(axis=0)[None, :] - s) / (reps - 1) for s in stats_num]
    loo_d = [(s.sum(axis=0)[None, :] - s) / (reps - 1) for s in stats_den]
    theta_i = (_coherence_aggregate(reps - 1, *loo_n)
               / _coherence_aggregate(reps - 1, *loo_d))
    se = math.sqrt((reps - 1) * np.mean((theta_i - theta_i.mean()) ** 2))
    return value, se


def _band_pair_stats(signal, idler, band_l, band_m, shift_px):
    """Matched-pair statistics of the mixed output images at one tilt.

    The tilt displaces the two reflected beams by +/- ``shift_px`` along
    the horizontal image axis (opposite senses, as unitarity of a tilted
    splitter requires).
    """
    ei_refl = shift_field(idler, shift_px, axis=-1)
    es_refl = shift_field(signal, -shift_px, axis=-1)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    e1 = (signal + 1j * ei_refl) * inv_sqrt2
    e2 = (1j * es_refl + idler) * inv_sqrt2
    reps = e1.shape[0]
    return _pair_stats(e1.reshape(reps, -1)[:, band_l],
                       e2.reshape(reps, -1)[:, band_m])


def run_hom2d(config: Hom2dConfig) -> DipCurve:
    """Run the multimode HOM sweep and fit the dip width.

    For each tilt theta the reflected beams are displaced by 2*theta in
    transverse momentum along the horizontal axis and mixed on the
    balanced splitter; the bright matched pixel pairs of the two output
    images are correlated in aggregate and normalised by the same
    statistic at a reference tilt of half the grid.
    """
    if config.n_pixels < 8:
        raise ValueError("the HOM sweep needs n_pixels >= 8")
    kernel = build_kernel(config)
    dec = schmidt_decompose(kernel, floor=0.0)
    signal, idler = sample_image_planes(dec, RngStream(config.seed, 0),
                                        config.reps)

    n = config.n_pixels
    image = image_mean_intensities(dec)
    band = (image >= config.band_floor * image.max()).ravel()
    idx = np.arange(n * n)[band]
    lx, ly = np.divmod(idx, n)
    band_m = (n - 1 - lx) * n + (n - 1 - ly)  # mirrored partner pixels
    band_l = idx

    ref_stats = _band_pair_stats(signal, idler, band_l, band_m, n // 2)
    thetas = np.asarray(config.theta_sweep, dtype=float)
    amps = np.empty_like(thetas)
    errs = np.empty_like(thetas)
    for j, theta in enumerate(thetas):
        shift_px = 2.0 * theta / config.pitch
        stats = _band_pair_stats(signal, idler, band_l, band_m, shift_px)
        amps[j], errs[j] = _ratio_with_jackknife(stats, ref_stats)

    sigma = _fit_dip_width(thetas, amps, errs)
    return DipCurve(theta=thetas, amplitude=amps, std_error=errs,
                    sigma_theta=sigma, photons_per_pixel=float(image.max()),
                    n_modes=dec.n_modes ** 2, seed=config.seed)


def _fit_dip_width(thetas: np.ndarray, amps: np.ndarray,
                   errs: np.ndarray | None = None) -> float | None:
    """Gaussian-dip fit 1 - a exp(-theta^2 / 2 sigma^2); None if it fails."""

    def model(t, a, sigma):
        return 1.0 - a * np.exp(-(t ** 2) / (2.0 * sigma ** 2))

    weights = None
    if errs is not None and np.all(np.isfinite(errs)) and np.all(errs > 0):
        weights = errs
    try:
        width0 = max(np.ptp(thetas) / 8.0, 1e-3)
        popt, _ = curve_fit(model, thetas, amps, p0=[1.0, width0],
                            sigma=weights, maxfev=20000)
    except (RuntimeError, ValueError):
        return None
    sigma = float(abs(popt[1]))
    if not math.isfinite(sigma) or sigma <= 0:
        return None
    return sigma
