"""Leakage cancellation depth, mismatch sweeps, and reference auto-matching."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .chirp import SampledSignal, lfm_waveform
from .dechirp import DEFAULT_TRACE_RATE, concatenate, find_peak, spectrum, synth_dechirped
from .errors import NotConverged
from .photonic import ModulatorConfig, ddmzm_field_exact, optical_spectrum
from .spectral import to_db

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MismatchConfig:
    """Cancellation reference relative to the leakage.

    ``amplitude_ratio`` is A_R/A_L, ``delay_error`` is tau_R - tau_L and
    ``bias_error`` the modulator bias offset from the minimum transmission
    point. ``enabled=False`` disconnects the reference.
    """

    amplitude_ratio: float = 1.0
    delay_error: float = 0.0
    bias_error: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not self.amplitude_ratio >= 0:
            raise ValueError("amplitude_ratio must be >= 0")


@dataclass
class DepthReport:
    depth: float
    leakage_peak_on: float
    leakage_peak_off: float
    residual_spectrum: object


@dataclass(frozen=True)
class MatchResult:
    gain: float
    delay_shift: float
    depth: float
    iterations: int
    net_ratio: float
    net_delay_error: float
    converged: bool = True


def leakage_peak(scene, chirp, mismatch, fs=DEFAULT_TRACE_RATE, n_periods=1, **kw):
    """(power dB, spectrum) of the de-chirped leakage tone at ``k * tau_L``."""
    traces = synth_dechirped(scene, chirp, mismatch, n_periods=n_periods, fs=fs, noise=None, **kw)
    spec = spectrum(concatenate(traces))
    f_l = chirp.chirp_rate * scene.leakage_delay
    band = (f_l - spec.bin_width, f_l + spec.bin_width)
    return find_peak(spec, band, interpolate=False).power, spec


def cancellation_depth(scene, chirp, mismatch, fs=DEFAULT_TRACE_RATE, n_periods=1, **kw):
    """Drop of the de-chirped leakage peak when the reference is switched on."""
    on, spec_on = leakage_peak(scene, chirp, replace(mismatch, enabled=True), fs, n_periods, **kw)
    off, _ = leakage_peak(scene, chirp, replace(mismatch, enabled=False), fs, n_periods, **kw)
    return DepthReport(off - on, on, off, spec_on)


SWEEP_AXES = {"amplitude": "amplitude_ratio", "delay": "delay_error", "bias": "bias_error"}


def depth_sweep(scene, chirp, axis, grid, base=None, fs=DEFAULT_TRACE_RATE, n_periods=1, **kw):
    """Depth at each grid value of one mismatch axis, others held at ``base``.

    Only amplitude and delay errors break the optical subtraction. A bias
    offset rotates the whole lower arm, so the leakage still cancels in the
    arm phase difference and the de-chirped depth stays flat along ``bias``.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {sorted(SWEEP_AXES)}")
    grid = [float(v) for v in grid]
    if not grid or not all(math.isfinite(v) for v in grid):
        raise ValueError("grid must be non-empty and finite")
    base = base or MismatchConfig()
    rows = []
    for v in grid:
        mm = replace(base, **{SWEEP_AXES[axis]: v})
        rows.append((v, cancellation_depth(scene, chirp, mm, fs, n_periods, **kw).depth))
    return rows


def golden_section(fn, a, b, tol):
    """Minimise a unimodal ``fn`` on ``[a, b]``; returns ``(x, fn(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while abs(b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def _line_search(fn, x0, f0, lo, hi, tol, n_scan=17):
    # coarse scan first: the delay objective is periodic in 1/f_c and only
    # unimodal within one carrier cycle
    xs = np.linspace(lo, hi, n_scan)
    vals = np.array([fn(x) for x in xs])
    i = int(np.argmin(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_scan - 1)]
    x, fx = golden_section(fn, a, b, tol)
    best = min([(fx, x), (vals[i], xs[i]), (f0, x0)], key=lambda p: p[0])
    return best[1], best[0]


def auto_match(scene, chirp, mismatch=None, ratio_bounds=(0.8, 1.2), delay_bounds=(-50e-12, 50e-12), *,
               fs=DEFAULT_TRACE_RATE, n_periods=1, tol_ratio=1e-4, tol_delay=0.1e-12, max_iter=50, **kw):
    """Tune the reference gain and delay to minimise the residual leakage peak.

    ``mismatch`` is the untuned state; the search runs over a gain multiplier
    in ``ratio_bounds`` and a delay shift in ``delay_bounds`` by coordinate
    descent with golden-section line searches. Raises :class:`NotConverged`
    (with ``best``) when the optimum sits on a bound or the iteration budget
    runs out.
    """
    mismatch = replace(mismatch or MismatchConfig(), enabled=True)

    def residual(gain, shift):
        mm = replace(mismatch, amplitude_ratio=mismatch.amplitude_ratio * gain,
                     delay_error=mismatch.delay_error + shift)
        return leakage_peak(scene, chirp, mm, fs, n_periods, **kw)[0]

    def clip(v, lo, hi):
        return min(max(v, lo), hi)

    gain = clip(1.0, *ratio_bounds)
    shift = clip(0.0, *delay_bounds)
    f = residual(gain, shift)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g_new, f = _line_search(lambda g: residual(g, shift), gain, f, *ratio_bounds, tol_ratio * 1e-2)
        s_new, f = _line_search(lambda s: residual(g_new, s), shift, f, *delay_bounds, tol_delay * 1e-2)
        step_g, step_s = abs(g_new - gain), abs(s_new - shift)
        gain, shift = g_new, s_new
        if step_g < tol_ratio and step_s < tol_delay:
            converged = True
            break

    net = replace(mismatch, amplitude_ratio=mismatch.amplitude_ratio * gain,
                  delay_error=mismatch.delay_error + shift)
    depth = cancellation_depth(scene, chirp, net, fs, n_periods, **kw).depth
    on_edge = (min(abs(gain - ratio_bounds[0]), abs(gain - ratio_bounds[1])) < tol_ratio
               or min(abs(shift - delay_bounds[0]), abs(shift - delay_bounds[1])) < tol_delay)
    result = MatchResult(gain, shift, depth, it, net.amplitude_ratio, net.delay_error,
                         converged and not on_edge)
    if not converged:
        raise NotConverged(f"no convergence after {max_iter} iterations", best=result)
    if on_edge:
        raise NotConverged("optimum lies on the search bounds", best=result)
    return result


def optical_cancellation_depth(scene, chirp, mismatch, modulator=None, sample_rate=64e9):
    """Optical-domain depth of the leakage sidebands over one chirp period.

    Only the leakage (lower arm) and cancellation reference (upper arm) are
    applied. Returns ``(depth_db, spectrum_on, spectrum_off)``; sideband
    power is summed over ``|f| in [f_start, f_stop]``.
    """
    modulator = modulator or ModulatorConfig()
    mod = replace(modulator, bias_phase=modulator.bias_phase + mismatch.bias_error)
    lower = lfm_waveform(chirp.delayed(scene.leakage_delay, scene.leakage_amplitude), sample_rate, chirp.period)
    specs = []
    for enabled in (True, False):
        if enabled and mismatch.enabled:
            amp = mismatch.amplitude_ratio * scene.leakage_amplitude
            upper = lfm_waveform(chirp.delayed(scene.leakage_delay + mismatch.delay_error, amp),
                                 sample_rate, chirp.period)
        else:
            upper = SampledSignal(sample_rate, 0.0, np.zeros(len(lower)))
        specs.append(optical_spectrum(ddmzm_field_exact(upper, lower, mod)))

    def sideband_power(spec):
        fa = np.abs(spec.freq_axis)
        sel = (fa >= chirp.f_start) & (fa <= chirp.f_stop)
        return to_db(np.sum(spec.linear[sel]))

    on, off = specs
    return sideband_power(off) - sideband_power(on), on, off
