#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times each hot kernel on representative inputs plus one end-to-end garage
run, checks that both backends agree, and prints a table:

    python benchmarks/bench_backends.py [--repeat 5]

The numba column excludes JIT compilation (one warm-up call first).
"""
from __future__ import annotations

import argparse
import contextlib
import time

import numpy as np

from radsense import _kernels
from radsense.constants import GEOM_TOL
from radsense.pipeline import run_sensing
from radsense.raytrace import Geometry
from radsense.scene import expand_geometry, load_scenario

KERNELS = ("trace_sequences", "occluded_segments", "sinc_sample", "ellipse_accumulate")


@contextlib.contextmanager
def use_backend(name):
    impl = _kernels.get_backend(name)
    saved = {k: getattr(_kernels, k) for k in KERNELS}
    for k in KERNELS:
        setattr(_kernels, k, getattr(impl, k))
    try:
        yield impl
    finally:
        for k, fn in saved.items():
            setattr(_kernels, k, fn)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def workloads():
    garage = load_scenario("parking_garage")
    g = Geometry(expand_geometry(garage))
    seqs, orders = g.sequences(2)
    tx = np.array(garage.nodes[0].position)
    rx = np.array(garage.nodes[10].position)

    rng = np.random.default_rng(0)
    a = rng.uniform((0, 0, 0.2), (30, 20, 2.4), size=(2000, 3))
    b = rng.uniform((0, 0, 0.2), (30, 20, 2.4), size=(2000, 3))
    skip = np.full((2000, 2), -1, dtype=np.int64)

    delays = np.sort(rng.uniform(5e-9, 600e-9, 60))
    amps = rng.normal(size=60) + 1j * rng.normal(size=60)

    xs, ys = garage.grid.cell_centers()
    weights = np.abs(rng.normal(size=512)) ** 2
    weights[rng.random(512) < 0.8] = 0.0

    return {
        "trace_sequences (garage, order 2, 1 link)":
            lambda k: k.trace_sequences(*g.arrays, seqs, orders, tx, rx, GEOM_TOL)[2],
        "occluded_segments (2000 segments)":
            lambda k: k.occluded_segments(a, b, skip, *g.arrays, GEOM_TOL),
        "sinc_sample (60 taps, 512 samples)":
            lambda k: k.sinc_sample(delays, amps, 0.0, 400e6, 512),
        "ellipse_accumulate (300x200 grid)":
            lambda k: k.ellipse_accumulate(xs, ys, 1.0, tx, rx, 0.0, 400e6, weights, 0.375, 3.75),
        "run_sensing (garage, 210 links)":
            lambda k: run_sensing(garage).heatmap.values,
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    print(f"{'workload':<44}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}  agree")
    for label, work in workloads().items():
        results = {}
        for name in _kernels.BACKENDS:
            with use_backend(name) as impl:
                if name == "numba":
                    work(impl)  # compile
                results[name] = best_of(lambda: work(impl), args.repeat)
        (t_nb, out_nb), (t_np, out_np) = results["numba"], results["numpy"]
        agree = np.allclose(out_nb, out_np, rtol=1e-10, atol=1e-12)
        print(f"{label:<44}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
