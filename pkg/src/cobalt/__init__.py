"""Sparse-array, sub-Nyquist ultrasound beamforming toolkit.

Reconstructs B-mode scan lines from thinned-array channel data sampled far
below the traditional rate, via delay-and-sum, frequency-domain,
convolutional and compressed convolutional beamformers, together with the
point-scatterer simulator and metrics used to verify them.
"""

from .cfcoba import (CobaSpectrum, RecoveryError, RecoveryModel,
                     RecoveryResult, SolverConfig, build_recovery_model,
                     cfcoba_spectrum, consistency_with_fullrate,
                     estimate_epsilon, recover_line)
from .coba import NormalizedFrame, coba_beamform, lateral_convolution, normalize
from .das import (BeamformedLine, apply_dynamic_delay, das_beamform,
                  delay_map, interpolate_channel)
from .fourier import (BandSpec, DistortionLUT, SpectralFrame, beam_support,
                      build_distortion_lut, effective_nyquist,
                      extract_coefficients, fd_beamform, fd_delay,
                      get_or_build_lut, spectrum_to_time)
from .geometry import (Apodization, ArrayGeometry, beampattern,
                       intrinsic_apodization, make_fractal, make_ula, sumset)
from .imaging import (BModeImage, MetricsReport, assemble_image, cnr,
                      envelope, envelope_logcompress, fwhm, nrmse,
                      reduction_factor, scan_convert)
from .params import ImagingSetup
from .pipelines import band_for_setup, beamform_line, sub_band_for_setup
from .simulator import (ChannelFrame, Pulse, Scatterer, ScattererScene,
                        render_pulse, simulate_channels)

__version__ = "0.1.0"
