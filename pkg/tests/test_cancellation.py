import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from photonic_fmcw.cancellation import (MismatchConfig, auto_match, cancellation_depth, depth_sweep,
                                        golden_section, optical_cancellation_depth)
from photonic_fmcw.chirp import C, ChirpParams, PointTarget, Scene
from photonic_fmcw.dechirp import find_peak, spectrum, synth_dechirped
from photonic_fmcw.errors import NotConverged

from conftest import volts


@pytest.fixture
def leak_scene():
    return Scene(1.89, math.inf, [], 6e-9, volts(0.2))


def amp_oracle(ratio):
    return -20 * math.log10(abs(1 - ratio))


def test_perfect_match_depth(leak_scene, chirp):
    assert cancellation_depth(leak_scene, chirp, MismatchConfig()).depth >= 60


def test_preset_ratio_depth(leak_scene, chirp):
    rep = cancellation_depth(leak_scene, chirp, MismatchConfig(0.9292))
    assert rep.depth == pytest.approx(23.0, abs=0.5)
    assert rep.depth == pytest.approx(rep.leakage_peak_off - rep.leakage_peak_on)


def test_delay_error_depth(leak_scene, chirp):
    oracle = -20 * math.log10(2 * math.pi * chirp.f_center * 1e-12)
    depth = cancellation_depth(leak_scene, chirp, MismatchConfig(1.0, 1e-12)).depth
    assert depth == pytest.approx(22.8, abs=1.0)
    assert depth == pytest.approx(oracle, abs=0.3)


def test_amplitude_sweep_examples(leak_scene, chirp):
    rows = depth_sweep(leak_scene, chirp, "amplitude", [0.99, 0.9, 0.7])
    for (v, d), want in zip(rows, (40.0, 20.0, 10.5)):
        assert d == pytest.approx(want, abs=0.5)
    depths = [d for _, d in rows]
    assert depths == sorted(depths, reverse=True)


def test_delay_sweep_peaks_at_zero(leak_scene, chirp):
    grid = [-2e-12, -1e-12, 0.0, 0.5e-12, 2e-12]
    rows = depth_sweep(leak_scene, chirp, "delay", grid)
    best = max(rows, key=lambda r: r[1])
    assert best[0] == 0.0
    right = [d for v, d in rows if v >= 0]
    assert right == sorted(right, reverse=True)


@given(st.floats(0.01, 0.3))
def test_symmetric_amplitude_error(delta):
    sc = Scene(1.89, math.inf, [], 6e-9, volts(0.2))
    ch = ChirpParams(10.5e9, 2e13, 1e-4, volts(0.25))
    (_, lo), (_, hi) = depth_sweep(sc, ch, "amplitude", [1 - delta, 1 + delta])
    assert abs(lo - hi) <= 0.2


@given(st.floats(0.01, 0.3))
def test_depth_law(delta):
    sc = Scene(1.89, math.inf, [], 6e-9, volts(0.2))
    ch = ChirpParams(10.5e9, 2e13, 1e-4, volts(0.25))
    d = cancellation_depth(sc, ch, MismatchConfig(1 - delta)).depth
    assert d == pytest.approx(amp_oracle(1 - delta), abs=0.5)


@given(st.floats(0.1, 1.0), st.floats(0.9, 0.99))
def test_depth_invariant_to_leakage_power(s, ratio):
    # leakage index capped at 0.3 keeps the small-signal regime across the scale range
    ch = ChirpParams(10.5e9, 2e13, 1e-4, volts(0.25))
    ref = cancellation_depth(Scene(1.89, math.inf, [], 6e-9, volts(0.03)), ch, MismatchConfig(ratio)).depth
    scaled = cancellation_depth(Scene(1.89, math.inf, [], 6e-9, volts(0.03) * 10 * s), ch,
                                MismatchConfig(ratio)).depth
    assert abs(scaled - ref) <= 0.2


def test_bias_sweep_is_flat(leak_scene, chirp):
    rows = depth_sweep(leak_scene, chirp, "bias", [-0.1, 0.0, 0.1], base=MismatchConfig(0.95))
    depths = [d for _, d in rows]
    assert max(depths) - min(depths) < 1e-6


def test_sweep_validation(leak_scene, chirp):
    with pytest.raises(ValueError):
        depth_sweep(leak_scene, chirp, "phase", [0.1])
    with pytest.raises(ValueError):
        depth_sweep(leak_scene, chirp, "amplitude", [])
    with pytest.raises(ValueError):
        depth_sweep(leak_scene, chirp, "amplitude", [float("nan")])


def test_interference_drops_with_leakage(chirp):
    # echo at 14.5 ns (290 kHz) and leakage at 6 ns: interference at 170 kHz
    sc = Scene(C * 14.5e-9 / 2, math.inf, [PointTarget(0.0, 0.0, 0.3)], 6e-9, volts(0.2))

    def tone(mm, f):
        spec = spectrum(synth_dechirped(sc, chirp, mm)[0])
        return find_peak(spec, (f - spec.bin_width, f + spec.bin_width), interpolate=False).power

    for ratio in (0.9292, 0.99):
        mm = MismatchConfig(ratio)
        depth = cancellation_depth(sc, chirp, mm).depth
        drop = tone(MismatchConfig(enabled=False), 170e3) - tone(mm, 170e3)
        assert drop >= depth - 3.0


def test_golden_section_finds_minimum():
    x, fx = golden_section(lambda v: (v - 0.3) ** 2, -1.0, 2.0, 1e-9)
    assert x == pytest.approx(0.3, abs=1e-8) and fx < 1e-16


def test_auto_match_recovers_ground_truth(leak_scene, chirp):
    start = MismatchConfig(0.95, 5e-12)
    res = auto_match(leak_scene, chirp, start, (0.8, 1.2), (-50e-12, 50e-12))
    assert res.converged
    assert res.net_ratio == pytest.approx(1.0, abs=1e-4)
    assert abs(res.net_delay_error) <= 0.1e-12
    assert res.depth >= 40


def test_auto_match_already_matched(leak_scene, chirp):
    res = auto_match(leak_scene, chirp, MismatchConfig())
    assert res.iterations == 1 and res.depth >= 60


def test_auto_match_optimum_on_bound(leak_scene, chirp):
    with pytest.raises(NotConverged) as info:
        auto_match(leak_scene, chirp, MismatchConfig(0.7), (0.8, 1.2), (-50e-12, 50e-12))
    best = info.value.best
    assert best is not None and not best.converged
    assert best.gain == pytest.approx(1.2, abs=1e-3)


@given(st.floats(0.85, 1.15), st.floats(-20e-12, 20e-12))
def test_auto_match_never_worse(ratio, delay):
    sc = Scene(1.89, math.inf, [], 6e-9, volts(0.2))
    ch = ChirpParams(10.5e9, 2e13, 1e-4, volts(0.25))
    start = MismatchConfig(ratio, delay)
    before = cancellation_depth(sc, ch, start).depth
    try:
        res = auto_match(sc, ch, start, max_iter=3)
    except NotConverged as exc:
        res = exc.best
    assert res.depth >= before - 1e-9


def test_optical_depth_from_bias_error():
    scene = Scene(1.89, math.inf, [], 6e-9, volts(0.2))
    chirp = ChirpParams(10.5e9, 2e13, 1e-4, volts(0.25))
    depth, on, off = optical_cancellation_depth(scene, chirp, MismatchConfig(bias_error=0.07), sample_rate=26e9)
    assert depth == pytest.approx(-20 * math.log10(2 * math.sin(0.035)), abs=0.1)
    assert np.all(np.diff(on.freq_axis) > 0)
