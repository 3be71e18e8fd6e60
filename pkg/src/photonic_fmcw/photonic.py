"""Optical-field model of the dual-drive MZM link.

The optical carrier ``exp(j w_c t)`` is factored out: every field here is a
complex baseband envelope, and square-law detection does not depend on the
carrier phase, so only RF-rate sampling is needed.
"""

from dataclasses import dataclass, field
import functools
import math
import warnings

import numpy as np
from scipy import special
from scipy.optimize import brentq
from scipy.signal import firwin, kaiserord, oaconvolve, upfirdn

from . import _kernels
from .chirp import SampledSignal
from .errors import IndexOutOfRange, InvalidCutoff, MismatchedGrids
from .spectral import periodogram

SMALL_SIGNAL_WARN = 0.3
SMALL_SIGNAL_MAX = 0.5


@dataclass(frozen=True)
class ModulatorConfig:
    v_pi: float = 4.0
    bias_phase: float = math.pi  # minimum transmission point
    input_power_scale: float = 1.0

    def __post_init__(self):
        if not self.v_pi > 0:
            raise ValueError("v_pi must be > 0")

    def modulation_index(self, amplitude):
        return math.pi * amplitude / self.v_pi

    def amplitude_for_index(self, m):
        return m * self.v_pi / math.pi


@dataclass
class OpticalEnvelope:
    sample_rate: float
    samples: np.ndarray = field(repr=False)
    start_time: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        self.samples = np.asarray(self.samples, dtype=complex)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class PdConfig:
    responsivity: float = 0.8  # A/W

    def __post_init__(self):
        if not self.responsivity > 0:
            raise ValueError("responsivity must be > 0")


@dataclass(frozen=True)
class FilterSpec:
    """Linear-phase FIR request.

    ``cutoff`` is the 3-dB frequency. ``taps`` defaults to the Kaiser
    estimate for ``stopband_attenuation`` over ``transition_width`` (which
    defaults to half the cutoff).
    """

    cutoff: float
    kind: str = "lowpass"
    taps: int = None
    stopband_attenuation: float = 60.0
    transition_width: float = None

    def __post_init__(self):
        if self.kind not in ("lowpass", "highpass"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.taps is not None and self.taps < 1:
            raise ValueError("taps must be positive")


@dataclass(frozen=True)
class SidebandSet:
    """Carrier and per-drive first-order sideband coefficients of the output field.

    Each drive ``x`` contributes ``coef * (exp(j theta_x) + exp(-j theta_x))``.
    """

    carrier: complex
    dechirp_ref: complex
    cancel_ref: complex
    leakage: complex
    echo: complex

    @property
    def leakage_net(self):
        """Combined leakage sideband when reference and leakage share a delay."""
        return self.cancel_ref + self.leakage


def ddmzm_field_exact(upper_drive, lower_drive, cfg):
    """Output envelope ``(s/sqrt2)[exp(j pi u/Vpi) + exp(j(pi l/Vpi + bias))]``."""
    if upper_drive.sample_rate != lower_drive.sample_rate or len(upper_drive) != len(lower_drive):
        raise MismatchedGrids("upper and lower drives must share sample_rate and length")
    env = _kernels.ddmzm_envelope(
        np.ascontiguousarray(upper_drive.samples, dtype=float),
        np.ascontiguousarray(lower_drive.samples, dtype=float),
        cfg.v_pi, cfg.bias_phase, cfg.input_power_scale,
    )
    return OpticalEnvelope(upper_drive.sample_rate, env, upper_drive.start_time)


def check_small_signal(*indices):
    for m in indices:
        if m < 0 or m > SMALL_SIGNAL_MAX:
            raise IndexOutOfRange(f"modulation index {m:g} outside [0, {SMALL_SIGNAL_MAX}]")
    worst = max(indices) if indices else 0.0
    if worst > SMALL_SIGNAL_WARN:
        warnings.warn(
            f"modulation index {worst:.3g} > {SMALL_SIGNAL_WARN}: first-order expansion error exceeds ~1%",
            stacklevel=3,
        )


def bessel_sidebands(m_d, m_r, m_l, m_e, bias_phase=math.pi, same_arm_j0=False):
    """First-order Jacobi-Anger coefficients for the four drive terms.

    Upper arm carries the de-chirp and cancellation references, lower arm the
    leakage and echo. The lower arm is rotated by ``exp(j*bias_phase)``, which
    at the minimum transmission point flips its sideband signs.

    With ``same_arm_j0=False`` the cross factors ``J0`` of the other drive in
    the same arm are set to 1, so matched leakage and reference coefficients
    cancel exactly. The carrier always keeps its ``J0`` products.
    """
    check_small_signal(m_d, m_r, m_l, m_e)
    j0 = {k: special.j0(v) for k, v in (("d", m_d), ("r", m_r), ("l", m_l), ("e", m_e))}
    j1 = {k: special.j1(v) for k, v in (("d", m_d), ("r", m_r), ("l", m_l), ("e", m_e))}
    rot = complex(math.cos(bias_phase), math.sin(bias_phase))
    g = 1.0 / math.sqrt(2.0)
    carrier = g * (j0["d"] * j0["r"] + rot * j0["l"] * j0["e"])

    def side(name, partner, arm_rot):
        cross = j0[partner] if same_arm_j0 else 1.0
        return g * arm_rot * 1j * j1[name] * cross

    return SidebandSet(
        carrier=complex(carrier),
        dechirp_ref=side("d", "r", 1.0),
        cancel_ref=side("r", "d", 1.0),
        leakage=side("l", "e", rot),
        echo=side("e", "l", rot),
    )


def photodetect(env, pd):
    """Square-law detection: ``i = R |E|^2``."""
    current = _kernels.intensity(np.ascontiguousarray(env.samples), pd.responsivity)
    return SampledSignal(env.sample_rate, env.start_time, current)


def _response(taps, f, fs):
    n = np.arange(len(taps))
    return abs(np.sum(taps * np.exp(-2j * np.pi * f / fs * n)))


@functools.lru_cache(maxsize=64)
def design_fir(spec, sample_rate):
    """Kaiser-window FIR taps (odd length) with the 3-dB point at ``spec.cutoff``."""
    nyq = 0.5 * sample_rate
    fc = spec.cutoff
    if not 0 < fc < nyq:
        raise InvalidCutoff(f"cutoff {fc:g} Hz outside (0, {nyq:g})")
    tw = spec.transition_width if spec.transition_width is not None else 0.5 * fc
    # keep the whole transition band inside (0, nyq)
    tw = min(tw, 1.9 * fc, 1.9 * (nyq - fc))
    numtaps, beta = kaiserord(spec.stopband_attenuation, tw / nyq)
    if spec.taps is not None:
        numtaps = spec.taps
    numtaps |= 1
    pass_zero = spec.kind == "lowpass"

    def make(c6):
        return firwin(numtaps, c6, window=("kaiser", beta), pass_zero=pass_zero, fs=sample_rate)

    target = 1.0 / math.sqrt(2.0)
    if pass_zero:
        lo, hi = fc, min(fc + 0.5 * tw, nyq * 0.999999)
    else:
        lo, hi = max(fc - 0.5 * tw, nyq * 1e-6), fc
    g_lo = _response(make(lo), fc, sample_rate) - target
    g_hi = _response(make(hi), fc, sample_rate) - target
    if g_lo * g_hi < 0:
        c6 = brentq(lambda c: _response(make(c), fc, sample_rate) - target, lo, hi, xtol=fc * 1e-9)
    else:
        c6 = fc
    taps = make(c6)
    taps.setflags(write=False)
    return taps


def fir_filter(x, taps, axis=0):
    """Linear convolution trimmed so the output is time-aligned with ``x``."""
    x = np.asarray(x, dtype=float)
    delay = (len(taps) - 1) // 2
    shape = [1] * x.ndim
    shape[axis] = len(taps)
    full = oaconvolve(x, np.reshape(taps, shape), mode="full", axes=axis)
    return np.take(full, np.arange(delay, delay + x.shape[axis]), axis=axis)


def apply_filter(sig, spec):
    """Filter a :class:`SampledSignal` with the linear-phase FIR from ``spec``."""
    taps = design_fir(spec, float(sig.sample_rate))
    return SampledSignal(sig.sample_rate, sig.start_time, fir_filter(sig.samples, taps))


def _stage_factors(q):
    primes = []
    n, p = q, 2
    while n > 1:
        while n % p == 0:
            primes.append(p)
            n //= p
        p += 1
    primes.sort(reverse=True)
    stages = []
    for p in primes:
        for i, s in enumerate(stages):
            if s * p <= 10:
                stages[i] = s * p
                break
        else:
            stages.append(p)
    return sorted(stages, reverse=True)


def decimate(sig, factor, passband, stopband_attenuation=60.0):
    """Multistage anti-aliased decimation by an integer ``factor``.

    Content up to ``passband`` is preserved; aliases into ``[0, passband]``
    are suppressed by ``stopband_attenuation``. Output sample ``i`` sits at
    ``start_time + i*factor/fs`` exactly.
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError("factor must be a positive integer")
    x = np.asarray(sig.samples, dtype=float)
    fs = float(sig.sample_rate)
    for q in _stage_factors(int(factor)):
        fs_out = fs / q
        stop = fs_out - passband
        if stop <= passband:
            raise InvalidCutoff(f"passband {passband:g} Hz too wide for output rate {fs_out:g} Hz")
        spec = FilterSpec(cutoff=0.5 * (passband + stop), transition_width=0.9 * (stop - passband),
                          stopband_attenuation=stopband_attenuation)
        taps = design_fir(spec, fs)
        delay = (len(taps) - 1) // 2
        shifted = np.concatenate([x[delay:], np.zeros(delay)])
        x = upfirdn(taps, shifted, up=1, down=q)[: (len(x) + q - 1) // q]
        fs = fs_out
    return SampledSignal(fs, sig.start_time, x)


def optical_spectrum(env, window="hann"):
    """Two-sided power spectrum of the envelope; 0 Hz is the optical carrier."""
    if len(env) < 2:
        raise ValueError("envelope needs at least 2 samples")
    return periodogram(env.samples, env.sample_rate, window)
