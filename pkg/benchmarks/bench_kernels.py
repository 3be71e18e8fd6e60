"""Time each hot kernel on its numpy and numba paths.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba path is warmed up once before timing, so compile time is excluded
(it is cached on disk after the first run anyway).
"""

import argparse
import math
import time

import numpy as np

from photonic_fmcw import _kernels as K


def _cases(rng):
    t = np.arange(640_000) / 64e9  # 10 us at the physical-engine rate
    drive = rng.normal(0.0, 0.3, t.size)
    env = drive + 1j * rng.normal(0.0, 0.3, t.size)
    tf = np.arange(400) / 4e6
    n_tr, n_comp = 512, 5
    tau = rng.uniform(5e-9, 15e-9, (n_tr, n_comp))
    j0 = rng.uniform(0.9, 1.0, (n_tr, n_comp, tf.size))
    j1 = rng.uniform(0.0, 0.1, (n_tr, n_comp, tf.size))
    psi = np.zeros((n_tr, n_comp, tf.size))
    eps = np.array([1.0, -1.0, -1.0, -1.0, -1.0])
    img = rng.normal(0.0, 1.0, (201, 512))
    return {
        "chirp_phase": lambda f: f(t, 10.5e9, 2e13, 1e-4, 6e-9),
        "chirp_sum": lambda f: f(t, 10.5e9, 2e13, 1e-4, np.array([6e-9, 14e-9]), np.array([0.3, 0.02])),
        "ddmzm_envelope": lambda f: f(drive, drive[::-1].copy(), 4.0, math.pi, 1.0),
        "intensity": lambda f: f(env, 0.8),
        "beat_sum": lambda f: f(tf, 2 * math.pi * 10.5e9, 2e13, eps, tau, j0, j1, psi),
        "local_maxima": lambda f: f(img, 1.0),
    }


def _best(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, call in _cases(rng).items():
        f_np = getattr(K, name + "_np")
        f_nb = getattr(K, name + "_nb")
        call(f_nb)  # compile
        t_np = _best(lambda: call(f_np), args.repeat)
        t_nb = _best(lambda: call(f_nb), args.repeat)
        print(f"{name:<16}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
