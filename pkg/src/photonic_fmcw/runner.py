"""Scenario execution and deterministic file export."""

from dataclasses import dataclass, field, replace
import hashlib
import json
import math
import os
import time

import numpy as np

from . import __version__
from . import config as cfgmod
from .cancellation import auto_match, cancellation_depth, depth_sweep
from .chirp import C, echo_delay
from .dechirp import concatenate, find_peak, frequency_to_range, list_peaks, spectrum, synth_dechirped
from .errors import EmptyBand, NotConverged
from .isar import build_cube, extract_peaks, form_image

OUT_ENV = "PHOTONIC_FMCW_OUT"
DEFAULT_OUT = "sim_out"
PGM_MAX = 65535


@dataclass
class OutputRecord:
    path: str
    sha256: str
    bytes: int


@dataclass
class RunManifest:
    config: dict
    version: str
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps({
            "tool": "photonic_fmcw", "version": self.version, "config": self.config,
            "outputs": [vars(o) for o in self.outputs], "timings_s": self.timings, "results": self.results,
        }, indent=2, sort_keys=True, default=_json_default) + "\n"


@dataclass(frozen=True)
class RangingRow:
    sample: int
    slow_time: float
    theoretical: float
    estimated: float
    error: float
    frequency: float


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def resolve_output_dir(out_dir=None, cfg=None):
    """``out_dir`` argument, else the config's, else the environment default."""
    if out_dir:
        return out_dir
    if cfg is not None and cfg.output_dir:
        return cfg.output_dir
    return os.environ.get(OUT_ENV) or DEFAULT_OUT


# --- encoders -------------------------------------------------------------

def _num(v):
    return repr(float(v))


def csv_bytes(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (bool, int, np.integer))
                                                              else _num(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def spectrum_csv(spec):
    return csv_bytes(("freq_hz", "power_db"), zip(spec.freq_axis, spec.power))


def sweep_csv(rows):
    return csv_bytes(("mismatch", "depth_db"), rows)


def pgm_bytes(img):
    """16-bit binary PGM; row 0 is the first range bin, gray 0 is the dB floor."""
    mag = np.asarray(img.magnitude, dtype=float)
    floor = float(mag.min()) if mag.size else 0.0
    lo = min(floor, -120.0)
    scaled = np.rint((mag - lo) / (0.0 - lo) * PGM_MAX)
    data = np.clip(scaled, 0, PGM_MAX).astype(">u2")
    rows, cols = data.shape
    return f"P5\n{cols} {rows}\n{PGM_MAX}\n".encode("ascii") + data.tobytes(order="C"), lo


def axes_csv(img, level_floor):
    rows = [("range_m", i, v) for i, v in enumerate(img.range_axis)]
    rows += [("cross_range_" + img.cross_range_unit.lower(), i, v) for i, v in enumerate(img.cross_range_axis)]
    rows += [("level_db", 0, level_floor), ("level_db", PGM_MAX, 0.0)]
    return csv_bytes(("axis", "index", "value"), rows)


def image_peaks_csv(peaks):
    return csv_bytes(("range_m", "cross_range", "power_db"), [(p.range, p.cross_range, p.power) for p in peaks])


class _Writer:
    def __init__(self, out_dir, manifest):
        self.out_dir = out_dir
        self.manifest = manifest
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name, data):
        path = os.path.join(self.out_dir, name)
        with open(path, "wb") as fh:
            fh.write(data)
        self.manifest.outputs.append(OutputRecord(name, hashlib.sha256(data).hexdigest(), len(data)))
        return path


# --- scenario pieces --------------------------------------------------------

def _domain(cfg):
    return (cfg.chirp.build(), cfg.scene.build(), cfg.modulator.build(), cfg.photodetector.build())


def _states(enabled, compare):
    if compare:
        return [("on", True), ("off", False)]
    return [("on" if enabled else "off", enabled)]


def _noise_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def ranging_protocol(cfg, enabled=None):
    """Per-capture peak search in the ranging band, mapped to one-way range.

    Capture ``i`` starts at ``i * interval`` and concatenates
    ``capture_periods`` chirp periods. The theoretical distance comes from the
    echo delay at the capture midpoint.
    """
    chirp, scene, modulator, pd = _domain(cfg)
    rc = cfg.ranging
    mismatch = cfg.mismatch.build(enabled)
    interval = rc.interval_s if rc.interval_s is not None else cfg.scene.turntable_period_s / 32.0
    if not math.isfinite(interval):
        interval = 0.0
    rows = []
    for i in range(rc.n_samples):
        start = int(round(i * interval / chirp.period))
        noise = cfg.noise.build(_noise_seed(cfg.seed, i))
        traces = synth_dechirped(scene, chirp, mismatch, pd, rc.capture_periods, cfg.acquisition.sample_rate_hz,
                                 noise, modulator=modulator, start_period=start)
        peak = find_peak(spectrum(concatenate(traces)), tuple(rc.band_hz))
        mid = (start + 0.5 * rc.capture_periods) * chirp.period
        truth = C * (echo_delay(scene, 0, mid) - scene.system_delay_offset) / 2.0
        est = frequency_to_range(peak.frequency, chirp) - C * scene.system_delay_offset / 2.0
        rows.append(RangingRow(i, mid, truth, est, est - truth, peak.frequency))
    return rows


def image_for(cfg, enabled, highpass=True):
    chirp, scene, modulator, pd = _domain(cfg)
    ic = cfg.imaging
    noise = cfg.noise.build(cfg.seed)
    traces = synth_dechirped(scene, chirp, cfg.mismatch.build(enabled), pd, ic.n_periods,
                             cfg.acquisition.sample_rate_hz, noise, modulator=modulator,
                             start_period=ic.start_period, stride=ic.stride)
    hp = ic.highpass() if highpass else None
    img = form_image(build_cube(traces), hp, chirp, scene.rotation_rate, range_offset=C * scene.system_delay_offset / 2,
                     pad_factor=ic.pad_factor, max_range=ic.max_range_m)
    return img, extract_peaks(img, ic.threshold_db, ic.min_separation_cells)


def _run_spectrum(cfg, writer, manifest):
    chirp, scene, modulator, pd = _domain(cfg)
    acq = cfg.acquisition
    engines = ["fast", "physical"] if cfg.engine == "both" else [cfg.engine]
    peak_rows = []
    for engine in engines:
        for state, enabled in _states(cfg.mismatch.enabled, cfg.spectrum.compare_cancellation):
            t0 = time.perf_counter()
            traces = synth_dechirped(scene, chirp, cfg.mismatch.build(enabled), pd, acq.n_periods,
                                     acq.sample_rate_hz, cfg.noise.build(cfg.seed), modulator=modulator,
                                     start_period=acq.start_period, stride=acq.stride, engine=engine,
                                     physical_rate=acq.physical_rate_hz, margin=acq.margin_s)
            spec = spectrum(concatenate(traces))
            manifest.timings[f"spectrum_{state}_{engine}"] = time.perf_counter() - t0
            writer.write(f"spectrum_{state}_{engine}.csv", spectrum_csv(spec))
            try:
                peaks = list_peaks(spec, tuple(cfg.spectrum.band_hz), cfg.spectrum.threshold_db)
            except EmptyBand:
                peaks = []
            peaks = [p for p in peaks if p.power > -250.0]
            peak_rows += [(state, engine, p.frequency, p.power) for p in peaks]
        if cfg.spectrum.compare_cancellation and scene.leakage_amplitude > 0:
            rep = cancellation_depth(scene, chirp, cfg.mismatch.build(True), acq.sample_rate_hz, acq.n_periods,
                                     pd=pd, modulator=modulator, engine=engine, physical_rate=acq.physical_rate_hz,
                                     margin=acq.margin_s)
            manifest.results[f"depth_db_{engine}"] = rep.depth
    writer.write("peaks.csv", csv_bytes(("state", "engine", "freq_hz", "power_db"), peak_rows))


def _run_sweep(cfg, writer, manifest, axis=None):
    chirp, scene, modulator, pd = _domain(cfg)
    axis = axis or cfg.sweep.axis
    t0 = time.perf_counter()
    rows = depth_sweep(scene, chirp, axis, cfg.sweep.grid(axis), cfg.mismatch.build(True),
                       cfg.acquisition.sample_rate_hz, cfg.acquisition.n_periods, pd=pd, modulator=modulator)
    manifest.timings["sweep"] = time.perf_counter() - t0
    writer.write(f"sweep_{axis}.csv", sweep_csv(rows))
    manifest.results["sweep_axis"] = axis


def _run_match(cfg, writer, manifest):
    chirp, scene, modulator, pd = _domain(cfg)
    mc = cfg.match
    t0 = time.perf_counter()
    try:
        res = auto_match(scene, chirp, cfg.mismatch.build(True), tuple(mc.ratio_bounds), tuple(mc.delay_bounds_s),
                         fs=cfg.acquisition.sample_rate_hz, n_periods=cfg.acquisition.n_periods,
                         max_iter=mc.max_iter, pd=pd, modulator=modulator)
    except NotConverged as exc:
        res = exc.best
    manifest.timings["match"] = time.perf_counter() - t0
    writer.write("match.csv", csv_bytes(
        ("gain", "delay_shift_s", "net_ratio", "net_delay_error_s", "depth_db", "iterations", "converged"),
        [(res.gain, res.delay_shift, res.net_ratio, res.net_delay_error, res.depth, res.iterations,
          str(res.converged).lower())]))
    manifest.results["match_converged"] = res.converged
    manifest.results["match_depth_db"] = res.depth


def _run_image(cfg, writer, manifest):
    for state, enabled in _states(cfg.mismatch.enabled, cfg.imaging.compare_cancellation):
        t0 = time.perf_counter()
        img, peaks = image_for(cfg, enabled)
        manifest.timings[f"image_{state}"] = time.perf_counter() - t0
        data, floor = pgm_bytes(img)
        writer.write(f"image_{state}.pgm", data)
        writer.write(f"image_{state}_axes.csv", axes_csv(img, floor))
        writer.write(f"image_{state}_peaks.csv", image_peaks_csv(peaks))
        manifest.results[f"image_{state}_peaks"] = len(peaks)


def _run_ranging(cfg, writer, manifest):
    for state, enabled in _states(cfg.mismatch.enabled, cfg.ranging.compare_cancellation):
        t0 = time.perf_counter()
        rows = ranging_protocol(cfg, enabled)
        manifest.timings[f"ranging_{state}"] = time.perf_counter() - t0
        writer.write(f"ranging_{state}.csv", csv_bytes(
            ("sample", "slow_time_s", "theoretical_m", "estimated_m", "error_m", "peak_hz"),
            [(r.sample, r.slow_time, r.theoretical, r.estimated, r.error, r.frequency) for r in rows]))
        manifest.results[f"ranging_{state}_within_10cm"] = sum(abs(r.error) <= 0.10 for r in rows)


RUNNERS = {"spectrum": _run_spectrum, "sweep": _run_sweep, "match": _run_match,
           "image": _run_image, "ranging": _run_ranging}


def run_scenario(cfg, out_dir=None, *, kind=None, sweep_axis=None):
    """Run ``cfg`` and write its outputs plus ``config.toml`` and ``manifest.json``.

    ``kind`` overrides ``cfg.kind`` (used by the ``sweep`` and ``match``
    commands). Output files other than the manifest are byte-identical for
    identical configs.
    """
    if kind is not None:
        cfg = replace(cfg, kind=kind)
    if sweep_axis is not None:
        cfg = replace(cfg, sweep=replace(cfg.sweep, axis=sweep_axis))
    cfgmod.validate(cfg)
    out = resolve_output_dir(out_dir, cfg)
    manifest = RunManifest(cfgmod.to_dict(cfg), __version__)
    writer = _Writer(out, manifest)
    writer.write("config.toml", cfgmod.dumps(cfg).encode("utf-8"))
    t0 = time.perf_counter()
    RUNNERS[cfg.kind](cfg, writer, manifest)
    manifest.timings["total"] = time.perf_counter() - t0
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
    return manifest
