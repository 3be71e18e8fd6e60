"""Windowed periodogram shared by the electrical and optical analyses."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

FLOOR_DB = -300.0


@dataclass
class SpectrumEstimate:
    """Power per bin in dB re 1 unit^2.

    One-sided spectra of real signals fold negative frequencies onto the
    positive axis, so summing ``10**(power/10)`` over all bins recovers the
    mean square of the input (Parseval) up to window leakage.
    """

    freq_axis: np.ndarray = field(repr=False)
    power: np.ndarray = field(repr=False)
    window_name: str = "hann"
    bin_width: float = 0.0

    def __post_init__(self):
        self.freq_axis = np.asarray(self.freq_axis, dtype=float)
        self.power = np.asarray(self.power, dtype=float)
        if self.freq_axis.shape != self.power.shape:
            raise ValueError("freq_axis and power must have equal length")
        if np.any(np.diff(self.freq_axis) <= 0):
            raise ValueError("freq_axis must be strictly increasing")

    @property
    def linear(self):
        return 10.0 ** (self.power / 10.0)

    def power_at(self, freq):
        """Power of the bin nearest ``freq``."""
        return float(self.power[int(np.argmin(np.abs(self.freq_axis - freq)))])

    def band_power(self, lo, hi):
        """Total linear power in ``[lo, hi]``, in dB."""
        sel = (self.freq_axis >= lo) & (self.freq_axis <= hi)
        return to_db(np.sum(self.linear[sel]))


def to_db(p, floor_db=FLOOR_DB):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(p)
    out = np.maximum(out, floor_db)
    return float(out) if out.ndim == 0 else out


def periodogram(x, fs, window="hann", floor_db=FLOOR_DB):
    """Windowed periodogram of ``x``.

    Real input yields a one-sided spectrum on ``[0, fs/2]``; complex input a
    two-sided spectrum with the axis centred on zero.
    """
    x = np.asarray(x)
    n = x.shape[0]
    w = get_window(window, n) if window not in (None, "boxcar", "rect") else np.ones(n)
    name = window or "boxcar"
    norm = n * np.sum(w * w)
    if np.iscomplexobj(x):
        spec = np.fft.fftshift(np.fft.fft(x * w))
        p = np.abs(spec) ** 2 / norm
        freqs = np.fft.fftshift(np.fft.fftfreq(n, 1.0 / fs))
    else:
        spec = np.fft.rfft(x * w)
        p = np.abs(spec) ** 2 / norm
        if n % 2 == 0:
            p[1:-1] *= 2.0
        else:
            p[1:] *= 2.0
        freqs = np.fft.rfftfreq(n, 1.0 / fs)
    return SpectrumEstimate(freqs, to_db(p, floor_db), name, fs / n)
