"""Desk-scale scenario presets for the turntable radar experiments.

Drive amplitudes are set through modulation indices at ``v_pi = 4 V``:
de-chirp reference 0.25, leakage 0.2. Echo levels are reflectivities
relative to the leakage amplitude.
"""

import math

from .config import (AcquisitionSection, ChirpSection, ExperimentConfig, ImagingSection, MismatchSection,
                     NoiseSection, RangingSection, SceneSection, SpectrumSection, TargetSection, validate)
from .errors import ConfigError

V_PI = 4.0
M_DECHIRP = 0.25
M_LEAKAGE = 0.2
TURNTABLE_PERIOD = 24.56
# amplitude-only mismatch giving a 23 dB residual, the depth seen on the bench
PRESET_RATIO = 0.9292

# three-target layout: cuboid on the far side, two cylinders 35 deg either side of the near axis
IMAGING_L1 = 1.89
IMAGING_TARGETS = ((0.30, math.pi, 0.10), (0.30, math.radians(35.0), 0.07), (0.30, -math.radians(35.0), 0.07))


def volts(m):
    return m * V_PI / math.pi


def _chirp():
    return ChirpSection(amplitude_v=volts(M_DECHIRP))


def _imaging_targets(angle_shift=0.0):
    return [TargetSection(r, a + angle_shift, g) for r, a, g in IMAGING_TARGETS]


def fig4():
    """Leakage only, cancellation with and without the reference, one period."""
    return ExperimentConfig(
        name="fig4", kind="spectrum", chirp=_chirp(),
        scene=SceneSection(antenna_to_center_m=IMAGING_L1, leakage_delay_s=6e-9, leakage_amplitude_v=volts(M_LEAKAGE)),
        mismatch=MismatchSection(amplitude_ratio=PRESET_RATIO),
        acquisition=AcquisitionSection(n_periods=1),
        spectrum=SpectrumSection(compare_cancellation=True, band_hz=[20e3, 500e3]),
    )


def fig7():
    """Three frozen targets plus leakage: echo, leakage and interference tones."""
    return ExperimentConfig(
        name="fig7", kind="spectrum", chirp=_chirp(),
        scene=SceneSection(antenna_to_center_m=IMAGING_L1, turntable_period_s=math.inf, leakage_delay_s=6e-9,
                           leakage_amplitude_v=volts(M_LEAKAGE), targets=_imaging_targets()),
        mismatch=MismatchSection(amplitude_ratio=PRESET_RATIO),
        acquisition=AcquisitionSection(n_periods=1),
        spectrum=SpectrumSection(compare_cancellation=True, band_hz=[20e3, 500e3]),
    )


def fig8():
    """ISAR image of the three targets over 512 periods, one every 1 ms.

    Initial angles are advanced so the nominal layout holds at the middle
    of the aperture.
    """
    img = ImagingSection(n_periods=512, stride=10, start_period=0, max_range_m=3.0)
    t_mid = (img.start_period + 0.5 * img.stride * (img.n_periods - 1) + 0.5) * 1e-4
    shift = 2.0 * math.pi / TURNTABLE_PERIOD * t_mid
    return ExperimentConfig(
        name="fig8", kind="image", chirp=_chirp(),
        scene=SceneSection(antenna_to_center_m=IMAGING_L1, turntable_period_s=TURNTABLE_PERIOD, leakage_delay_s=6e-9,
                           leakage_amplitude_v=volts(M_LEAKAGE), targets=_imaging_targets(shift)),
        mismatch=MismatchSection(amplitude_ratio=PRESET_RATIO),
        imaging=img,
    )


def fig9():
    """Single cylinder ranging, 33 captures of 10 ms, one every 1/32 turn.

    The leakage path is 6.2 ns long, so its de-chirped tone is not
    phase-continuous across periods and its comb skirt reaches into the
    145-300 kHz search band.
    """
    return ExperimentConfig(
        name="fig9", kind="ranging", chirp=_chirp(),
        scene=SceneSection(antenna_to_center_m=1.55, turntable_period_s=TURNTABLE_PERIOD, leakage_delay_s=6.2e-9,
                           leakage_amplitude_v=volts(M_LEAKAGE), targets=[TargetSection(0.45, 0.0, 0.0316)]),
        mismatch=MismatchSection(amplitude_ratio=PRESET_RATIO),
        noise=NoiseSection(enabled=True, std_dev_a=8e-3),
        ranging=RangingSection(n_samples=33, capture_periods=100, band_hz=[145e3, 300e3]),
    )


def empty():
    """No leakage, no targets, no noise: only the de-chirp reference drives the link."""
    return ExperimentConfig(
        name="empty", kind="spectrum", chirp=_chirp(),
        scene=SceneSection(leakage_amplitude_v=0.0, targets=[]),
        acquisition=AcquisitionSection(n_periods=1),
        spectrum=SpectrumSection(compare_cancellation=False),
    )


PRESETS = {"fig4": fig4, "fig7": fig7, "fig8": fig8, "fig9": fig9, "empty": empty}


def get(name):
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return validate(PRESETS[name]())
