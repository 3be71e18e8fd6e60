"""De-chirped photocurrent synthesis, spectra, and range mapping.

Two engines produce the same :class:`DechirpTrace` list:

``fast``
    Closed-form low-pass photocurrent. The detected intensity of the DD-MZM
    depends only on the arm phase difference ``D(t)``::

        i(t) = R s^2 [1 + cos(D(t) - bias)]

    ``D`` is a sum of chirp tones (de-chirp reference and cancellation
    reference with sign +1, leakage and echoes with sign -1). Expanding
    ``cos D`` by Jacobi-Anger and keeping the difference-frequency products
    gives the tones at ``k |tau_a - tau_b|``. The odd part ``sin D`` only
    holds RF products and is removed by the low-pass filter. The
    cancellation reference and leakage are merged into one residual tone
    with complex index ``m_L - m_R exp(j(theta_R - theta_L))``, so a matched
    pair vanishes exactly.

``physical``
    Samples the RF drives at ``physical_rate`` (64 GSa/s default), applies
    the exact modulator field, square-law detection, and multistage FIR
    decimation down to the trace rate.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special

from . import _kernels
from .chirp import C, echo_delay, check_nyquist
from .errors import EmptyBand, NyquistViolation
from .photonic import ModulatorConfig, PdConfig, check_small_signal, ddmzm_field_exact, decimate, photodetect
from .chirp import SampledSignal
from .spectral import SpectrumEstimate, periodogram  # noqa: F401  (re-exported)

DEFAULT_TRACE_RATE = 4e6
DEFAULT_PHYSICAL_RATE = 64e9
DEFAULT_MARGIN = 20e-6


@dataclass
class DechirpTrace:
    sample_rate: float
    slow_time_index: int
    samples: np.ndarray = field(repr=False)
    period: float = None

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        self.samples = np.asarray(self.samples, dtype=float)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class SpectrumPeak:
    frequency: float
    power: float
    interpolated: bool = False


@dataclass(frozen=True)
class NoiseSpec:
    enabled: bool = False
    std_dev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.std_dev >= 0:
            raise ValueError("std_dev must be >= 0")


@dataclass(frozen=True)
class _Drives:
    """Amplitudes (V) and delays (s) of every drive term for one scenario."""

    a_d: float
    tau_d: float
    a_r: float
    tau_r: float
    a_l: float
    tau_l: float
    a_e: tuple
    bias_phase: float


def _drives(scene, chirp, mismatch, modulator):
    ratio, delay_err, bias_err, enabled = 1.0, 0.0, 0.0, True
    if mismatch is not None:
        ratio = mismatch.amplitude_ratio
        delay_err = mismatch.delay_error
        bias_err = mismatch.bias_error
        enabled = mismatch.enabled
    a_r = ratio * scene.leakage_amplitude if enabled else 0.0
    return _Drives(
        a_d=chirp.amplitude,
        tau_d=chirp.delay,
        a_r=a_r,
        tau_r=scene.leakage_delay + delay_err,
        a_l=scene.leakage_amplitude,
        tau_l=scene.leakage_delay,
        a_e=tuple(scene.echo_amplitude(i) for i in range(len(scene.targets))),
        bias_phase=modulator.bias_phase + bias_err,
    )


def _slow_indices(n_periods, start_period, stride):
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return start_period + stride * np.arange(n_periods)


def _echo_delays(scene, chirp, idx):
    mids = (idx + 0.5) * chirp.period
    if not scene.targets:
        return np.zeros((len(idx), 0))
    return np.stack([np.atleast_1d(echo_delay(scene, i, mids)) for i in range(len(scene.targets))], axis=1)


def _add_noise(block, noise):
    if noise is not None and noise.enabled and noise.std_dev > 0:
        rng = np.random.default_rng(noise.seed)
        block = block + rng.normal(0.0, noise.std_dev, size=block.shape)
    return block


def _fast_block(chirp, drv, tau_e, fs, m, modulator, pd):
    """(n_traces, M) low-pass photocurrent from the closed form."""
    n_tr = tau_e.shape[0]
    n_echo = tau_e.shape[1]
    tf = np.arange(m) / fs
    k = chirp.chirp_rate
    omega_s = 2.0 * math.pi * chirp.f_start

    m_d = modulator.modulation_index(drv.a_d)
    m_l = modulator.modulation_index(drv.a_l)
    m_r = modulator.modulation_index(drv.a_r)
    m_e = np.array([modulator.modulation_index(a) for a in drv.a_e])
    check_small_signal(m_d, m_l, m_r, *m_e)

    # residual leakage: m_R cos(theta_R) - m_L cos(theta_L) = -Re{rho e^{j theta_L}}
    dt = drv.tau_l - drv.tau_r
    phi_rl = omega_s * dt + math.pi * k * dt * (2.0 * tf - drv.tau_r - drv.tau_l)
    rho = m_l - m_r * np.exp(1j * phi_rl)
    rho_abs = np.abs(rho)
    rho_arg = np.angle(rho)

    n_comp = 2 + n_echo
    eps = np.array([1.0, -1.0] + [-1.0] * n_echo)
    tau = np.empty((n_tr, n_comp))
    tau[:, 0] = drv.tau_d
    tau[:, 1] = drv.tau_l
    tau[:, 2:] = tau_e
    idx = np.empty((n_comp, m))
    idx[0] = m_d
    idx[1] = rho_abs
    idx[2:] = m_e[:, None]
    psi = np.zeros((n_tr, n_comp, m))
    psi[:, 1, :] = rho_arg
    j0 = np.broadcast_to(special.j0(idx), (n_tr, n_comp, m)).copy()
    j1 = np.broadcast_to(special.j1(idx), (n_tr, n_comp, m)).copy()

    ac = _kernels.beat_sum(tf, omega_s, k, eps, tau, j0, j1, psi)
    prod_j0 = np.prod(j0, axis=1)
    scale = pd.responsivity * modulator.input_power_scale ** 2
    return scale * (1.0 + math.cos(drv.bias_phase) * (prod_j0 - ac))


def _physical_trace(chirp, drv, tau_e_row, fs, m, modulator, pd, physical_rate, margin):
    q = physical_rate / fs
    if abs(q - round(q)) > 1e-9 or abs(margin * fs - round(margin * fs)) > 1e-9:
        raise ValueError("physical_rate/fs and margin*fs must be integers")
    q = int(round(q))
    n_margin = int(round(margin * fs))
    n_total = (m + 2 * n_margin) * q
    t = -margin + np.arange(n_total) / physical_rate
    upper = _kernels.chirp_sum(t, chirp.f_start, chirp.chirp_rate, chirp.period,
                               np.array([drv.tau_d, drv.tau_r]), np.array([drv.a_d, drv.a_r]))
    lower = _kernels.chirp_sum(t, chirp.f_start, chirp.chirp_rate, chirp.period,
                               np.concatenate([[drv.tau_l], tau_e_row]),
                               np.concatenate([[drv.a_l], np.asarray(drv.a_e, dtype=float)]))
    del t
    mod = ModulatorConfig(modulator.v_pi, drv.bias_phase, modulator.input_power_scale)
    env = ddmzm_field_exact(SampledSignal(physical_rate, -margin, upper),
                            SampledSignal(physical_rate, -margin, lower), mod)
    del upper, lower
    current = photodetect(env, pd)
    del env
    low = decimate(current, q, passband=0.4 * fs)
    return low.samples[n_margin:n_margin + m]


def synth_dechirped(scene, chirp, mismatch=None, pd=None, n_periods=1, fs=DEFAULT_TRACE_RATE, noise=None, *,
                    modulator=None, start_period=0, stride=1, engine="fast",
                    physical_rate=DEFAULT_PHYSICAL_RATE, margin=DEFAULT_MARGIN, guard=False):
    """De-chirped low-pass photocurrent, one trace per chirp period.

    Trace ``i`` covers slow-time period ``start_period + i*stride``; target
    delays are frozen at that period's midpoint. ``mismatch=None`` means a
    perfectly matched cancellation reference. ``guard=True`` replaces the
    first ``ceil(max delay * fs)`` samples of each trace by the trace mean.
    """
    pd = pd or PdConfig()
    modulator = modulator or ModulatorConfig()
    idx = _slow_indices(n_periods, start_period, stride)
    tau_e = _echo_delays(scene, chirp, idx)
    drv = _drives(scene, chirp, mismatch, modulator)

    max_tau = max([drv.tau_l, drv.tau_r, drv.tau_d] + ([float(tau_e.max())] if tau_e.size else []))
    if fs < 2.0 * chirp.chirp_rate * max_tau:
        raise NyquistViolation(f"trace rate {fs:g} Hz too low for delays up to {max_tau:g} s")
    m = int(round(fs * chirp.period))

    if engine == "fast":
        block = _fast_block(chirp, drv, tau_e, fs, m, modulator, pd)
    elif engine == "physical":
        check_nyquist(chirp, physical_rate)
        block = np.stack([
            _physical_trace(chirp, drv, tau_e[i], fs, m, modulator, pd, physical_rate, margin)
            for i in range(len(idx))
        ])
    else:
        raise ValueError(f"unknown engine {engine!r}")

    block = _add_noise(block, noise)
    if guard:
        g = min(int(math.ceil(max_tau * fs)), m - 1)
        if g > 0:
            block[:, :g] = block[:, g:].mean(axis=1, keepdims=True)
    return [DechirpTrace(fs, int(j), block[i], chirp.period) for i, j in enumerate(idx)]


def concatenate(traces):
    """Join consecutive traces into one long record."""
    if not traces:
        raise ValueError("no traces")
    fs = traces[0].sample_rate
    if any(t.sample_rate != fs for t in traces):
        raise ValueError("traces must share sample_rate")
    return DechirpTrace(fs, traces[0].slow_time_index, np.concatenate([t.samples for t in traces]),
                        traces[0].period)


def spectrum(trace, window="hann"):
    """Windowed periodogram of a trace (one-sided, dB re 1 unit^2 per bin)."""
    if len(trace) < 16:
        raise ValueError("spectrum needs at least 16 samples")
    return periodogram(trace.samples, trace.sample_rate, window)


def dechirp_frequency(tau, chirp):
    return chirp.chirp_rate * tau


def frequency_to_range(f, chirp):
    return C * f / (2.0 * chirp.chirp_rate)


def find_peak(spec, band, interpolate=True):
    """Strongest bin inside ``band`` (inclusive), lowest frequency on ties.

    When the bin is a local maximum of the whole spectrum, a parabola
    through it and its neighbours (in dB) refines the frequency and power.
    """
    lo, hi = band
    f = spec.freq_axis
    sel = np.flatnonzero((f >= lo) & (f <= hi))
    if sel.size == 0:
        raise EmptyBand(f"no spectrum bins in [{lo:g}, {hi:g}] Hz")
    i = int(sel[np.argmax(spec.power[sel])])
    p = spec.power
    if interpolate and 0 < i < len(p) - 1 and p[i] >= p[i - 1] and p[i] >= p[i + 1]:
        a, b, c = p[i - 1], p[i], p[i + 1]
        den = a - 2.0 * b + c
        if den < 0:
            delta = 0.5 * (a - c) / den
            freq = f[i] + delta * (f[i + 1] - f[i])
            freq = min(max(freq, lo), hi)
            return SpectrumPeak(float(freq), float(b - 0.25 * (a - c) * delta), True)
    return SpectrumPeak(float(f[i]), float(p[i]), False)


def list_peaks(spec, band=None, threshold_db=-40.0, min_separation_bins=2):
    """Local maxima within ``threshold_db`` of the strongest in-band bin, by frequency."""
    f, p = spec.freq_axis, spec.power
    lo, hi = band if band is not None else (f[0], f[-1])
    sel = (f >= lo) & (f <= hi)
    if not np.any(sel):
        raise EmptyBand(f"no spectrum bins in [{lo:g}, {hi:g}] Hz")
    top = p[sel].max()
    cand = []
    for i in np.flatnonzero(sel):
        left = p[i - 1] if i > 0 else -np.inf
        right = p[i + 1] if i < len(p) - 1 else -np.inf
        if p[i] > left and p[i] >= right and p[i] >= top + threshold_db:
            cand.append(i)
    cand.sort(key=lambda i: (-p[i], i))
    kept = []
    for i in cand:
        if all(abs(i - j) >= min_separation_bins for j in kept):
            kept.append(i)
    return [SpectrumPeak(float(f[i]), float(p[i])) for i in sorted(kept)]
