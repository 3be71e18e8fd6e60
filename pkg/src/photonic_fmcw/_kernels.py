"""Hot numeric kernels.

Every kernel exists twice: a vectorized numpy version (``*_np``) and a
loop version compiled with numba (``*_nb``). The public names point at the
numba versions unless numba is missing or ``PHOTONIC_FMCW_NUMBA=0`` is set
in the environment. Both paths must agree to floating-point rounding; the
test suite checks this.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

ENV_FLAG = "PHOTONIC_FMCW_NUMBA"

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")

TWO_PI = 2.0 * math.pi
INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# chirp phase / waveform


def chirp_phase_np(t, f_start, rate, period, delay):
    u = np.mod(t, period) - delay
    return TWO_PI * f_start * u + math.pi * rate * u * u


def _chirp_phase_loop(t, f_start, rate, period, delay):
    out = np.empty(t.shape[0])
    w = TWO_PI * f_start
    for i in range(t.shape[0]):
        tf = t[i] % period
        u = tf - delay
        out[i] = w * u + math.pi * rate * u * u
    return out


chirp_phase_nb = _njit(_chirp_phase_loop)


def chirp_sum_np(t, f_start, rate, period, delays, amps):
    """Sum of delayed chirps ``sum_i amps[i] * cos(phase(t - delays[i]))``."""
    out = np.zeros(t.shape[0])
    tf = np.mod(t, period)
    w = TWO_PI * f_start
    for d, a in zip(delays, amps):
        if a == 0.0:
            continue
        u = tf - d
        out += a * np.cos(w * u + math.pi * rate * u * u)
    return out


def _chirp_sum_loop(t, f_start, rate, period, delays, amps):
    n = t.shape[0]
    out = np.zeros(n)
    w = TWO_PI * f_start
    for i in range(n):
        tf = t[i] % period
        acc = 0.0
        for c in range(delays.shape[0]):
            a = amps[c]
            if a == 0.0:
                continue
            u = tf - delays[c]
            acc += a * math.cos(w * u + math.pi * rate * u * u)
        out[i] = acc
    return out


chirp_sum_nb = _njit(_chirp_sum_loop)


# ---------------------------------------------------------------------------
# modulator and detector


def ddmzm_envelope_np(upper, lower, v_pi, bias_phase, scale):
    k = math.pi / v_pi
    return (scale * INV_SQRT2) * (np.exp(1j * (k * upper)) + np.exp(1j * (k * lower + bias_phase)))


def _ddmzm_envelope_loop(upper, lower, v_pi, bias_phase, scale):
    n = upper.shape[0]
    out = np.empty(n, dtype=np.complex128)
    k = math.pi / v_pi
    g = scale * INV_SQRT2
    for i in range(n):
        a = k * upper[i]
        b = k * lower[i] + bias_phase
        out[i] = complex(g * (math.cos(a) + math.cos(b)), g * (math.sin(a) + math.sin(b)))
    return out


ddmzm_envelope_nb = _njit(_ddmzm_envelope_loop)


def intensity_np(env, responsivity):
    return responsivity * (env.real * env.real + env.imag * env.imag)


def _intensity_loop(env, responsivity):
    n = env.shape[0]
    out = np.empty(n)
    for i in range(n):
        z = env[i]
        out[i] = responsivity * (z.real * z.real + z.imag * z.imag)
    return out


intensity_nb = _njit(_intensity_loop)


# ---------------------------------------------------------------------------
# analytic de-chirp synthesis


def beat_sum_np(tf, omega_s, rate, eps, tau, j0, j1, psi):
    """Pairwise low-pass beat terms for a batch of traces.

    Shapes: ``tf`` (M,), ``eps`` (K,), ``tau`` (T, K), ``j0``/``j1``/``psi``
    (T, K, M). Returns (T, M)::

        sum_{a<b} 2 eps_a eps_b J1_a J1_b prod_{c!=a,b} J0_c
                  * cos(theta_a - theta_b + psi_a - psi_b)
    """
    n_tr, n_comp, m = j0.shape
    out = np.zeros((n_tr, m))
    prod = np.prod(j0, axis=1)
    for a in range(n_comp):
        for b in range(a + 1, n_comp):
            dt = (tau[:, b] - tau[:, a])[:, None]
            st = (tau[:, a] + tau[:, b])[:, None]
            phase = omega_s * dt + math.pi * rate * dt * (2.0 * tf[None, :] - st)
            amp = 2.0 * eps[a] * eps[b] * j1[:, a] * j1[:, b] * prod / (j0[:, a] * j0[:, b])
            out += amp * np.cos(phase + psi[:, a] - psi[:, b])
    return out


def _beat_sum_loop(tf, omega_s, rate, eps, tau, j0, j1, psi):
    n_tr, n_comp, m = j0.shape
    out = np.zeros((n_tr, m))
    prod = np.empty(m)
    for r in range(n_tr):
        for i in range(m):
            prod[i] = 1.0
        for c in range(n_comp):
            for i in range(m):
                prod[i] *= j0[r, c, i]
        for a in range(n_comp):
            for b in range(a + 1, n_comp):
                dt = tau[r, b] - tau[r, a]
                st = tau[r, a] + tau[r, b]
                p0 = omega_s * dt - math.pi * rate * dt * st
                slope = 2.0 * math.pi * rate * dt
                sgn = 2.0 * eps[a] * eps[b]
                for i in range(m):
                    amp = sgn * j1[r, a, i] * j1[r, b, i] * prod[i] / (j0[r, a, i] * j0[r, b, i])
                    out[r, i] += amp * math.cos(p0 + slope * tf[i] + psi[r, a, i] - psi[r, b, i])
    return out


beat_sum_nb = _njit(_beat_sum_loop)


# ---------------------------------------------------------------------------
# image peak candidates


def local_maxima_np(img, threshold):
    """Boolean mask of cells >= all 8 neighbours and > threshold."""
    padded = np.pad(img, 1, mode="constant", constant_values=-np.inf)
    mask = img > threshold
    rows, cols = img.shape
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            mask &= img >= padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    return mask


def _local_maxima_loop(img, threshold):
    rows, cols = img.shape
    mask = np.zeros((rows, cols), dtype=np.bool_)
    for r in range(rows):
        for c in range(cols):
            v = img[r, c]
            if not v > threshold:
                continue
            ok = True
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    if dr == 0 and dc == 0:
                        continue
                    rr = r + dr
                    cc = c + dc
                    if rr < 0 or rr >= rows or cc < 0 or cc >= cols:
                        continue
                    if img[rr, cc] > v:
                        ok = False
            mask[r, c] = ok
    return mask


local_maxima_nb = _njit(_local_maxima_loop)


if USE_NUMBA:
    chirp_phase = chirp_phase_nb
    chirp_sum = chirp_sum_nb
    ddmzm_envelope = ddmzm_envelope_nb
    intensity = intensity_nb
    beat_sum = beat_sum_nb
    local_maxima = local_maxima_nb
else:
    chirp_phase = chirp_phase_np
    chirp_sum = chirp_sum_np
    ddmzm_envelope = ddmzm_envelope_np
    intensity = intensity_np
    beat_sum = beat_sum_np
    local_maxima = local_maxima_np


def backend():
    """Name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
