"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints per-call time for each backend and the speed-up. Inputs are fixed so
runs are comparable across machines.
"""
import argparse
import math
import timeit

import numpy as np

from rtrlbench._kernels import compiled_backend, python_backend


def cases(rng):
    n = 4096
    r, v, nv = rng.normal(size=(3, n))
    ends = rng.random(n) < 0.02
    bearings = np.radians([65.0, 40.0, 15.0, -15.0, -40.0, -65.0])
    charging = rng.random(20) < 0.5
    bumps = rng.random((20, 2)) < 0.1
    dist = rng.normal(size=20)
    ir = rng.random((20, 9)) < 0.3
    weights = np.linspace(0.1, 1.0, 9)
    return {
        "gae (4096 steps)": (lambda b: b.gae(r, v, nv, ends, 0.99, 0.97), 20),
        "discount_cumsum (4096)": (lambda b: b.discount_cumsum(r, 0.99), 20),
        "dxl_integrate": (lambda b: b.dxl_integrate(0.1, 2.0, 300.0, 0.04, 0.0045, 0.002,
                                                   0.0008, -math.pi, math.pi), 20000),
        "create_integrate": (lambda b: b.create_integrate(0.4, 0.3, 0.5, 200.0, 150.0, 0.015,
                                                         0.235, 0.17, 0.914, 0.762), 20000),
        "ray_distances (6 rays)": (lambda b: b.ray_distances(0.4, 0.3, 0.5, bearings, 0.17,
                                                            0.914, 0.762), 5000),
        "docker_terms (20 packets)": (lambda b: b.docker_terms(charging, bumps, dist, ir, 3,
                                                              weights), 5000),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = [python_backend] + ([compiled_backend] if compiled_backend else [])
    if compiled_backend is None:
        print("compiled backend not built; timing the Python fallback only")
    print(f"{'kernel':28s}" + "".join(f"{b.BACKEND + ' (us)':>16s}" for b in backends)
          + ("     speed-up" if len(backends) == 2 else ""))
    for name, (fn, number) in cases(np.random.default_rng(0)).items():
        times = []
        for b in backends:
            best = min(timeit.repeat(lambda: fn(b), number=number, repeat=args.repeat))
            times.append(best / number * 1e6)
        line = f"{name:28s}" + "".join(f"{t:16.2f}" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:12.1f}x"
        print(line)


if __name__ == "__main__":
    main()
