"""Experiment configuration: TOML in, typed sections out.

Keys carry their units (``period_s``, ``f_start_hz``). Unknown keys and
wrongly typed values raise :class:`ConfigError` with the dotted field path,
so a typo never silently falls back to a default.
"""

from dataclasses import asdict, dataclass, field, fields
import math
import typing
from typing import Optional

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .chirp import ChirpParams, PointTarget, Scene
from .dechirp import NoiseSpec
from .errors import ConfigError
from .photonic import FilterSpec, ModulatorConfig, PdConfig

KINDS = ("spectrum", "sweep", "match", "image", "ranging")
ENGINES = ("fast", "physical", "both")


@dataclass
class ChirpSection:
    f_start_hz: float = 10.5e9
    chirp_rate_hz_per_s: float = 2e13
    period_s: float = 1e-4
    amplitude_v: float = 0.3
    delay_s: float = 0.0

    def build(self):
        return ChirpParams(self.f_start_hz, self.chirp_rate_hz_per_s, self.period_s, self.amplitude_v, self.delay_s)


@dataclass
class ModulatorSection:
    v_pi_v: float = 4.0
    bias_phase_rad: float = math.pi
    input_power_scale: float = 1.0

    def build(self):
        return ModulatorConfig(self.v_pi_v, self.bias_phase_rad, self.input_power_scale)


@dataclass
class PhotodetectorSection:
    responsivity_a_per_w: float = 0.8

    def build(self):
        return PdConfig(self.responsivity_a_per_w)


@dataclass
class TargetSection:
    radius_m: float = 0.0
    initial_angle_rad: float = 0.0
    reflectivity: float = 1.0

    def build(self):
        return PointTarget(self.radius_m, self.initial_angle_rad, self.reflectivity)


@dataclass
class SceneSection:
    antenna_to_center_m: float = 1.89
    turntable_period_s: float = 24.56
    leakage_delay_s: float = 6e-9
    leakage_amplitude_v: float = 0.25
    system_delay_offset_s: float = 0.0
    targets: typing.List[TargetSection] = field(default_factory=list)

    def build(self):
        return Scene(self.antenna_to_center_m, self.turntable_period_s, [t.build() for t in self.targets],
                     self.leakage_delay_s, self.leakage_amplitude_v, self.system_delay_offset_s)


@dataclass
class MismatchSection:
    enabled: bool = True
    amplitude_ratio: float = 1.0
    delay_error_s: float = 0.0
    bias_error_rad: float = 0.0

    def build(self, enabled=None):
        from .cancellation import MismatchConfig
        on = self.enabled if enabled is None else enabled
        return MismatchConfig(self.amplitude_ratio, self.delay_error_s, self.bias_error_rad, on)


@dataclass
class NoiseSection:
    enabled: bool = False
    std_dev_a: float = 0.0

    def build(self, seed):
        return NoiseSpec(self.enabled, self.std_dev_a, seed)


@dataclass
class AcquisitionSection:
    sample_rate_hz: float = 4e6
    n_periods: int = 1
    start_period: int = 0
    stride: int = 1
    physical_rate_hz: float = 64e9
    margin_s: float = 20e-6


@dataclass
class SpectrumSection:
    compare_cancellation: bool = True
    band_hz: typing.List[float] = field(default_factory=lambda: [20e3, 500e3])
    threshold_db: float = -60.0


@dataclass
class SweepSection:
    axis: str = "amplitude"
    amplitude_values: typing.List[float] = field(default_factory=lambda: [0.7, 0.8, 0.9, 0.95, 0.99, 1.0])
    delay_values_s: typing.List[float] = field(default_factory=lambda: [-2e-12, -1e-12, -0.5e-12, 0.0, 0.5e-12,
                                                                        1e-12, 2e-12])
    bias_values_rad: typing.List[float] = field(default_factory=lambda: [-0.1, -0.05, 0.0, 0.05, 0.1])

    def grid(self, axis=None):
        axis = axis or self.axis
        return {"amplitude": self.amplitude_values, "delay": self.delay_values_s,
                "bias": self.bias_values_rad}[axis]


@dataclass
class MatchSection:
    ratio_bounds: typing.List[float] = field(default_factory=lambda: [0.8, 1.2])
    delay_bounds_s: typing.List[float] = field(default_factory=lambda: [-50e-12, 50e-12])
    max_iter: int = 50


@dataclass
class ImagingSection:
    n_periods: int = 512
    stride: int = 10
    start_period: int = 0
    highpass_enabled: bool = True
    highpass_cutoff_hz: float = 140e3
    highpass_transition_hz: float = 30e3
    highpass_attenuation_db: float = 60.0
    pad_factor: int = 1
    max_range_m: Optional[float] = None
    threshold_db: float = -20.0
    min_separation_cells: int = 3
    compare_cancellation: bool = True

    def highpass(self):
        if not self.highpass_enabled:
            return None
        return FilterSpec(self.highpass_cutoff_hz, "highpass", stopband_attenuation=self.highpass_attenuation_db,
                          transition_width=self.highpass_transition_hz)


@dataclass
class RangingSection:
    n_samples: int = 33
    interval_s: Optional[float] = None  # default: turntable period / 32
    capture_periods: int = 100
    band_hz: typing.List[float] = field(default_factory=lambda: [145e3, 300e3])
    compare_cancellation: bool = True


@dataclass
class ExperimentConfig:
    name: str = "custom"
    kind: str = "spectrum"
    seed: int = 0
    engine: str = "fast"
    output_dir: Optional[str] = None
    chirp: ChirpSection = field(default_factory=ChirpSection)
    modulator: ModulatorSection = field(default_factory=ModulatorSection)
    photodetector: PhotodetectorSection = field(default_factory=PhotodetectorSection)
    scene: SceneSection = field(default_factory=SceneSection)
    mismatch: MismatchSection = field(default_factory=MismatchSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    acquisition: AcquisitionSection = field(default_factory=AcquisitionSection)
    spectrum: SpectrumSection = field(default_factory=SpectrumSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    match: MatchSection = field(default_factory=MatchSection)
    imaging: ImagingSection = field(default_factory=ImagingSection)
    ranging: RangingSection = field(default_factory=RangingSection)


def _convert(value, tp, path):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:  # Optional[...]
        inner = [a for a in args if a is not type(None)][0]
        return _convert(value, inner, path)
    if origin in (list, typing.List):
        if not isinstance(value, list):
            raise ConfigError(path, "expected an array")
        return [_convert(v, args[0], f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(tp, type) and hasattr(tp, "__dataclass_fields__"):
        if not isinstance(value, dict):
            raise ConfigError(path, "expected a table")
        return _from_dict(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, "expected true or false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, "expected a string")
        return value
    raise ConfigError(path, f"unsupported type {tp!r}")  # pragma: no cover


def _from_dict(cls, data, prefix=""):
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in known:
            raise ConfigError(path, "unknown key")
        kwargs[key] = _convert(value, hints[key], path)
    return cls(**kwargs)


def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, list):
        return [_strip_none(v) for v in obj]
    return obj


def validate(cfg):
    """Cross-field checks that a TOML schema cannot express."""
    if cfg.kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
    if cfg.engine not in ENGINES:
        raise ConfigError("engine", f"must be one of {', '.join(ENGINES)}")
    if cfg.engine != "fast" and cfg.kind != "spectrum":
        raise ConfigError("engine", "the physical engine is only available for spectrum scenarios")
    if cfg.sweep.axis not in ("amplitude", "delay", "bias"):
        raise ConfigError("sweep.axis", "must be amplitude, delay or bias")
    for name in ("amplitude_values", "delay_values_s", "bias_values_rad"):
        vals = getattr(cfg.sweep, name)
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"sweep.{name}", "must be a non-empty list of finite numbers")
    for path, pair in (("spectrum.band_hz", cfg.spectrum.band_hz), ("ranging.band_hz", cfg.ranging.band_hz),
                       ("match.ratio_bounds", cfg.match.ratio_bounds),
                       ("match.delay_bounds_s", cfg.match.delay_bounds_s)):
        if len(pair) != 2 or not pair[0] < pair[1]:
            raise ConfigError(path, "expected [low, high] with low < high")
    if cfg.kind == "ranging" and len(cfg.scene.targets) != 1:
        raise ConfigError("scene.targets", "ranging needs exactly one target")
    for path, v in (("acquisition.n_periods", cfg.acquisition.n_periods), ("acquisition.stride", cfg.acquisition.stride),
                    ("imaging.n_periods", cfg.imaging.n_periods), ("imaging.stride", cfg.imaging.stride),
                    ("imaging.pad_factor", cfg.imaging.pad_factor), ("ranging.n_samples", cfg.ranging.n_samples),
                    ("ranging.capture_periods", cfg.ranging.capture_periods)):
        if v < 1:
            raise ConfigError(path, "must be >= 1")
    # domain invariants surface as ValueError from the typed constructors
    for path, build in (("chirp", cfg.chirp.build), ("modulator", cfg.modulator.build),
                        ("photodetector", cfg.photodetector.build), ("scene", cfg.scene.build),
                        ("mismatch", cfg.mismatch.build), ("noise", lambda: cfg.noise.build(cfg.seed)),
                        ("imaging", cfg.imaging.highpass)):
        try:
            build()
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    return cfg


def from_dict(data):
    return validate(_from_dict(ExperimentConfig, data))


def to_dict(cfg):
    return _strip_none(asdict(cfg))


def loads(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<toml>", str(exc)) from None
    return from_dict(data)


def load(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<toml>", str(exc)) from None
    return from_dict(data)


def dumps(cfg):
    return tomli_w.dumps(to_dict(cfg))
