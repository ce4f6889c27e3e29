"""Monte Carlo simulator of Gaussian quantum-optics experiments.

Vacuum fields are sampled as classical complex Gaussians (symmetric-order
convention), propagated through optical elements sample by sample, and
reduced to intensity-moment statistics that closed-form predictions verify.
"""

from .elements import (BeamSplitterParams, DetectorParams, GainParams,
                       beam_split, detector_loss, parametric_amplify,
                       polarizer_project)
from .estimators import (DegenerateStatisticError, FourfoldResult, MomentEstimate,
                         chsh_coefficient, correlation_coefficient,
                         covariance_intensity, field_pair_moment,
                         fourfold_covariance, gaussian_moment_check,
                         intensity_snr, mean_intensity, moment_theorem_residual,
                         normal_intensities, variance_intensity)
from .experiments import ExperimentConfig, run_experiment
from .multimode import (DipCurve, Hom2dConfig, JointAmplitudeKernel,
                        SchmidtDecomposition, build_kernel, calibrate_gain,
                        image_mean_intensities, pixel_mean_intensities,
                        run_hom2d, sample_image_planes, sample_multimode,
                        schmidt_decompose, shift_field)
from .reporting import RunReport, StatisticRow, emit_results
from .sampling import (ORDERING, FieldEnsemble, OrderingConstants, RngStream,
                       derive_stream, sample_vacuum)
from . import theory

__version__ = "0.1.0"
