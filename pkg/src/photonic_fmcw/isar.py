"""Turntable ISAR imaging from de-chirped slow-time traces."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

from . import _kernels
from .chirp import C
from .errors import RaggedInput
from .photonic import FilterSpec, design_fir, fir_filter

FLOOR_DB = -120.0
# 140 kHz 3-dB point; the narrow transition puts a 120 kHz leakage tone in the stopband
DEFAULT_HIGHPASS = FilterSpec(140e3, "highpass", transition_width=30e3)


@dataclass
class DataCube:
    """Fast time down the rows (M samples), slow time across columns (N periods)."""

    matrix: np.ndarray = field(repr=False)
    fs: float = 4e6
    period: float = 1e-4
    slow_time_interval: float = None
    first_index: int = 0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[1] < 1:
            raise ValueError("matrix must be M x N with N >= 1")
        if self.slow_time_interval is None:
            self.slow_time_interval = self.period

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class IsarParams:
    bandwidth: float
    center_wavelength: float
    integration_time: float
    rotation_rate: float

    def __post_init__(self):
        for name in ("bandwidth", "center_wavelength", "integration_time", "rotation_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class ResolutionReport:
    range_resolution: float
    cross_range_resolution: float


@dataclass
class IsarImage:
    """Magnitude in dB relative to the image peak, clamped at the floor.

    ``peak_level`` is the linear peak amplitude (window-gain normalised), so
    ``magnitude + 20*log10(peak_level)`` gives absolute levels. With no
    rotation rate the cross-range axis holds Doppler frequency in Hz.
    """

    magnitude: np.ndarray = field(repr=False)
    range_axis: np.ndarray = field(repr=False)
    cross_range_axis: np.ndarray = field(repr=False)
    peak_level: float = 1.0
    cross_range_unit: str = "m"

    def absolute_db(self):
        return self.magnitude + 20.0 * np.log10(max(self.peak_level, 1e-300))


@dataclass(frozen=True)
class ImagePeak:
    range: float
    cross_range: float
    power: float
    row: int
    col: int


def build_cube(traces):
    """Stack traces column-wise; slow-time indices must be evenly spaced."""
    if not traces:
        raise RaggedInput("no traces")
    m = len(traces[0])
    fs = traces[0].sample_rate
    for t in traces:
        if len(t) != m or t.sample_rate != fs:
            raise RaggedInput("all traces need the same length and sample rate")
    idx = np.array([t.slow_time_index for t in traces])
    step = 1
    if len(idx) > 1:
        steps = np.diff(idx)
        if steps[0] < 1 or np.any(steps != steps[0]):
            raise RaggedInput("slow-time indices must be increasing and evenly spaced")
        step = int(steps[0])
    period = traces[0].period if traces[0].period is not None else m / fs
    matrix = np.stack([t.samples for t in traces], axis=1)
    return DataCube(matrix, fs, period, step * period, int(idx[0]))


def resolutions(p):
    return ResolutionReport(C / (2.0 * p.bandwidth),
                            p.center_wavelength / (2.0 * p.integration_time * p.rotation_rate))


def form_image(cube, highpass, chirp, rotation_rate=None, *, range_offset=0.0, pad_factor=1,
               window="hann", floor_db=FLOOR_DB, max_range=None):
    """Range/cross-range image of a data cube.

    Each column is optionally high-passed, then both axes are windowed and
    Fourier transformed. Fast-time frequency maps to range through
    ``c f / 2k`` (minus ``range_offset``); slow-time Doppler maps to
    cross-range through ``lambda / (2 Omega)`` with lambda at the chirp
    centre. No motion compensation is applied.
    """
    x = cube.matrix
    m, n = x.shape
    if highpass is not None:
        x = fir_filter(x, design_fir(highpass, float(cube.fs)), axis=0)
    w_f = get_window(window, m)
    w_s = get_window(window, n) if n > 1 else np.ones(1)
    spec = np.fft.rfft(x * w_f[:, None], n=m * pad_factor, axis=0)
    spec = np.fft.fftshift(np.fft.fft(spec * w_s[None, :], n=n * pad_factor, axis=1), axes=1)
    mag = np.abs(spec) / (np.sum(w_f) * np.sum(w_s))

    range_axis = C * np.fft.rfftfreq(m * pad_factor, 1.0 / cube.fs) / (2.0 * chirp.chirp_rate) - range_offset
    doppler = np.fft.fftshift(np.fft.fftfreq(n * pad_factor, cube.slow_time_interval))
    if rotation_rate:
        # approaching scatterers (positive lever arm) sit at negative Doppler
        cross = -doppler * chirp.center_wavelength / (2.0 * rotation_rate)
        unit = "m"
    else:
        cross = -doppler
        unit = "Hz"
    mag = mag[:, ::-1]
    cross = cross[::-1] + 0.0  # no -0.0 in outputs

    if max_range is not None:
        keep = range_axis <= max_range
        mag, range_axis = mag[keep], range_axis[keep]

    peak = float(mag.max())
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak) if peak > 0 else np.full(mag.shape, floor_db)
    db = np.maximum(db, floor_db)
    return IsarImage(db, range_axis, cross, peak, unit)


def extract_peaks(img, threshold_db=-20.0, min_separation_cells=3):
    """Local maxima above ``threshold_db`` with greedy non-maximum suppression.

    Sorted by power (descending), ties broken by (range, cross-range) cell.
    A candidate within ``min_separation_cells`` (Chebyshev distance) of an
    accepted peak is dropped.
    """
    mag = np.ascontiguousarray(img.magnitude, dtype=float)
    mask = _kernels.local_maxima(mag, float(threshold_db))
    rows, cols = np.nonzero(mask)
    order = sorted(zip(rows.tolist(), cols.tolist()), key=lambda rc: (-mag[rc], rc[0], rc[1]))
    kept = []
    for r, c in order:
        if all(max(abs(r - kr), abs(c - kc)) > min_separation_cells for kr, kc in kept):
            kept.append((r, c))
    return [ImagePeak(float(img.range_axis[r]), float(img.cross_range_axis[c]), float(mag[r, c]), r, c)
            for r, c in kept]
