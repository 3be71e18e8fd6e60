"""Photonic FMCW radar receiver with optical-domain leakage cancellation."""

__version__ = "0.1.0"

from .chirp import C, ChirpParams, PointTarget, SampledSignal, Scene, echo_delay, lfm_phase, lfm_waveform
from .photonic import (FilterSpec, ModulatorConfig, OpticalEnvelope, PdConfig, apply_filter, bessel_sidebands,
                       ddmzm_field_exact, decimate, design_fir, optical_spectrum, photodetect)
from .spectral import SpectrumEstimate, periodogram
from .dechirp import (DechirpTrace, NoiseSpec, SpectrumPeak, concatenate, dechirp_frequency, find_peak,
                      frequency_to_range, list_peaks, spectrum, synth_dechirped)
from .cancellation import (DepthReport, MatchResult, MismatchConfig, auto_match, cancellation_depth, depth_sweep,
                           optical_cancellation_depth)
from .isar import (DataCube, IsarImage, IsarParams, ResolutionReport, build_cube, extract_peaks, form_image,
                   resolutions)
from .errors import (ConfigError, EmptyBand, IndexOutOfRange, InvalidCutoff, MismatchedGrids, NotConverged,
                     NyquistViolation, RaggedInput, SimulationError)
