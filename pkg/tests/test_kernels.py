import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from photonic_fmcw import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@given(st.integers(1, 300), st.floats(0, 20e-9), st.integers(0, 2**32 - 1))
def test_chirp_phase_parity(n, delay, seed):
    t = np.random.default_rng(seed).uniform(0, 3e-4, n)
    a = K.chirp_phase_np(t, 10.5e9, 2e13, 1e-4, delay)
    b = K.chirp_phase_nb(t, 10.5e9, 2e13, 1e-4, delay)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)


@given(st.integers(1, 200), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_chirp_sum_parity(n, k, seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 2e-4, n)
    delays, amps = rng.uniform(0, 15e-9, k), rng.uniform(0, 1, k)
    np.testing.assert_allclose(K.chirp_sum_np(t, 10.5e9, 2e13, 1e-4, delays, amps),
                               K.chirp_sum_nb(t, 10.5e9, 2e13, 1e-4, delays, amps), atol=1e-9)


@given(st.integers(1, 200), st.floats(0, 2 * math.pi), st.integers(0, 2**32 - 1))
def test_ddmzm_and_intensity_parity(n, bias, seed):
    rng = np.random.default_rng(seed)
    u, lo = rng.normal(0, 1, n), rng.normal(0, 1, n)
    a = K.ddmzm_envelope_np(u, lo, 4.0, bias, 1.3)
    b = K.ddmzm_envelope_nb(u, lo, 4.0, bias, 1.3)
    np.testing.assert_allclose(a, b, atol=1e-14)
    np.testing.assert_allclose(K.intensity_np(a, 0.8), K.intensity_nb(a, 0.8), atol=1e-14)


@given(st.integers(1, 4), st.integers(2, 5), st.integers(16, 64), st.integers(0, 2**32 - 1))
def test_beat_sum_parity(n_tr, n_comp, m, seed):
    rng = np.random.default_rng(seed)
    tf = np.arange(m) / 4e6
    eps = rng.choice([-1.0, 1.0], n_comp)
    tau = rng.uniform(0, 15e-9, (n_tr, n_comp))
    j0 = rng.uniform(0.9, 1.0, (n_tr, n_comp, m))
    j1 = rng.uniform(0.0, 0.15, (n_tr, n_comp, m))
    psi = rng.uniform(-math.pi, math.pi, (n_tr, n_comp, m))
    args = (tf, 2 * math.pi * 10.5e9, 2e13, eps, tau, j0, j1, psi)
    np.testing.assert_allclose(K.beat_sum_np(*args), K.beat_sum_nb(*args), atol=1e-12)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_local_maxima_parity(rows, cols, seed):
    img = np.round(np.random.default_rng(seed).normal(0, 1, (rows, cols)), 1)  # rounding makes plateaus
    np.testing.assert_array_equal(K.local_maxima_np(img, 0.0), K.local_maxima_nb(img, 0.0))


def test_local_maxima_plateau_and_threshold():
    img = np.zeros((5, 5))
    img[2, 2] = img[2, 3] = 3.0
    img[0, 0] = 0.5
    mask = K.local_maxima_np(img, 1.0)
    assert mask[2, 2] and mask[2, 3]
    assert not mask[0, 0]


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, PHOTONIC_FMCW_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from photonic_fmcw import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
