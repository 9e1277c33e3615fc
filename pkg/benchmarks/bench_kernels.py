"""Compiled vs NumPy pyramid kernel: wall time and agreement.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from friedrichs import _backend
from friedrichs.form_factor import FormFactor
from friedrichs.fredholm import _numerator
from friedrichs.torus_quadrature import DEFAULT_SPEC, _peaked_value

CASES = [
    ("origin, w=0", FormFactor.constant(1.0), (0.0, 0.0, 0.0), 0.0),
    ("origin, w=0.01", FormFactor.constant(1.0), (0.0, 0.0, 0.0), 0.01),
    ("p=(1,1,1), w=0.5", FormFactor.epsilon_type(), (1.0, 1.0, 1.0), 0.5),
    ("p=(3,0.1,0), w=1e-3", FormFactor.cosine_poly(1.0, 0.5, -0.25, 0.1), (3.0, 0.1, 0.0), 1e-3),
]


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return value, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}  (active: {_backend.name()})")
    if "cython" not in backends:
        print("compiled extension not built; only the NumPy path is timed")
    print(f"{'case':24s} " + " ".join(f"{b + ' [ms]':>14s}" for b in backends) + f" {'speedup':>8s} {'max |diff|':>11s}")
    for label, ff, p, w in CASES:
        g = _numerator(ff, p)
        results = {}
        for b in backends:
            with _backend.use(b):
                (value, _), dt = timed(lambda: _peaked_value(g, p, w, DEFAULT_SPEC), args.repeat)
            results[b] = (value, dt)
        times = " ".join(f"{results[b][1] * 1e3:14.2f}" for b in backends)
        if len(backends) > 1:
            speedup = results["python"][1] / results["cython"][1]
            diff = abs(results["python"][0] - results["cython"][0])
            print(f"{label:24s} {times} {speedup:8.1f} {diff:11.2e}")
        else:
            print(f"{label:24s} {times}")


if __name__ == "__main__":
    main()
