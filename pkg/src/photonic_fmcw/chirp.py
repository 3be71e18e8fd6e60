"""LFM drive signals and the turntable radar scene."""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import _kernels
from .errors import NyquistViolation

C = 299792458.0  # speed of light in vacuum, m/s


@dataclass(frozen=True)
class ChirpParams:
    """Sawtooth LFM signal: ``A cos(2 pi f0 u + pi k u^2)``, ``u = (t mod T) - delay``."""

    f_start: float
    chirp_rate: float
    period: float
    amplitude: float = 1.0
    delay: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be > 0")
        if not self.chirp_rate > 0:
            raise ValueError("chirp_rate must be > 0")
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be >= 0")
        if not self.delay >= 0:
            raise ValueError("delay must be >= 0")
        if not self.f_start >= 0:
            raise ValueError("f_start must be >= 0")

    @property
    def bandwidth(self):
        return self.chirp_rate * self.period

    @property
    def f_stop(self):
        return self.f_start + self.bandwidth

    @property
    def f_center(self):
        return self.f_start + 0.5 * self.bandwidth

    @property
    def center_wavelength(self):
        return C / self.f_center

    def delayed(self, delay, amplitude=None):
        """Copy of this chirp with another delay (and optionally amplitude)."""
        if amplitude is None:
            amplitude = self.amplitude
        return replace(self, delay=delay, amplitude=amplitude)


@dataclass(frozen=True)
class PointTarget:
    radius: float
    initial_angle: float = 0.0
    reflectivity: float = 1.0

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError("radius must be >= 0")
        if not self.reflectivity >= 0:
            raise ValueError("reflectivity must be >= 0")


@dataclass(frozen=True)
class Scene:
    """Leakage path plus point scatterers on a clockwise turntable.

    ``turntable_period = inf`` freezes the rotation. Echo amplitudes are
    ``reflectivity * leakage_amplitude``; there is no range-dependent path
    loss.
    """

    antenna_to_center: float
    turntable_period: float
    targets: tuple = ()
    leakage_delay: float = 6e-9
    leakage_amplitude: float = 1.0
    system_delay_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.turntable_period > 0:
            raise ValueError("turntable_period must be > 0")
        if not self.leakage_delay >= 0:
            raise ValueError("leakage_delay must be >= 0")
        if not self.leakage_amplitude >= 0:
            raise ValueError("leakage_amplitude must be >= 0")
        for tgt in self.targets:
            if not tgt.radius < self.antenna_to_center:
                raise ValueError("target radius must be smaller than antenna_to_center")

    @property
    def rotation_rate(self):
        """Turntable angular speed in rad/s (0 when frozen)."""
        if math.isinf(self.turntable_period):
            return 0.0
        return 2.0 * math.pi / self.turntable_period

    def target_angle(self, index, slow_time):
        tgt = self.targets[index]
        return tgt.initial_angle - self.rotation_rate * np.asarray(slow_time, dtype=float)

    def target_distance(self, index, slow_time):
        """One-way antenna-to-scatterer distance in metres."""
        r = self.targets[index].radius
        l1 = self.antenna_to_center
        phi = self.target_angle(index, slow_time)
        d2 = l1 * l1 + r * r - 2.0 * l1 * r * np.cos(phi)
        return np.sqrt(np.maximum(d2, 0.0))

    def target_cross_range(self, index, slow_time):
        """Lever arm seen by the radar: radial velocity divided by the rotation rate.

        Equals ``L1 r sin(phi) / d``; this is the coordinate a Doppler image
        measures.
        """
        r = self.targets[index].radius
        phi = self.target_angle(index, slow_time)
        return self.antenna_to_center * r * np.sin(phi) / self.target_distance(index, slow_time)

    def echo_amplitude(self, index):
        return self.targets[index].reflectivity * self.leakage_amplitude


@dataclass
class SampledSignal:
    sample_rate: float
    start_time: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        self.samples = np.asarray(self.samples)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def times(self):
        return self.start_time + np.arange(len(self)) / self.sample_rate


def lfm_phase(params, t):
    """Instantaneous phase (rad) of ``params`` at time(s) ``t``.

    The chirp restarts every ``params.period``; the fast time is wrapped
    before the delay is subtracted.
    """
    t_arr = np.asarray(t, dtype=float)
    flat = np.ascontiguousarray(t_arr.reshape(-1))
    out = _kernels.chirp_phase(flat, params.f_start, params.chirp_rate, params.period, params.delay)
    if t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def check_nyquist(params, sample_rate):
    need = 2.0 * (params.f_start + params.chirp_rate * params.period)
    if sample_rate < need:
        raise NyquistViolation(f"sample_rate {sample_rate:g} Hz below required {need:g} Hz")


def lfm_waveform(params, sample_rate, duration, start_time=0.0):
    """Real passband samples ``A cos(lfm_phase(t))`` on a uniform grid."""
    check_nyquist(params, sample_rate)
    n = int(round(duration * sample_rate))
    t = start_time + np.arange(n) / sample_rate
    samples = _kernels.chirp_sum(
        t, params.f_start, params.chirp_rate, params.period,
        np.array([params.delay]), np.array([float(params.amplitude)]),
    )
    return SampledSignal(sample_rate, start_time, samples)


def echo_delay(scene, target_index, slow_time):
    """Round-trip delay (s) of a target at the given slow time."""
    if not 0 <= target_index < len(scene.targets):
        raise IndexError(f"target_index {target_index} out of range")
    d = scene.target_distance(target_index, slow_time)
    tau = 2.0 * d / C + scene.system_delay_offset
    if np.ndim(tau) == 0:
        return float(tau)
    return tau
