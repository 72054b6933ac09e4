"""Time one explicit step with the compiled and pure-Python kernels.

    python3 benchmarks/bench_backends.py --n 256 --repeat 20
"""
import argparse
import time

import numpy as np

from ksplap import _backend
from ksplap.scheme import stable_dt, step
from ksplap.simulator import initial_state, preset


def time_backend(name, state, mesh, cs, dt, repeat):
    step(state, mesh, cs, dt, backend=name)  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = step(state, mesh, cs, dt, backend=name)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--p", type=float, nargs="+", default=[2.0, 6.0, 2.5])
    args = parser.parse_args(argv)

    names = _backend.available()
    print(f"backends: {', '.join(names)}; mesh {args.n}x{args.n}; best of {args.repeat}")
    print(f"{'p':>5} " + " ".join(f"{n + ' [ms]':>14}" for n in names) + f" {'speedup':>8} {'max diff':>10}")
    for p in args.p:
        config = preset("example2", n=args.n, p=p)
        mesh = config.build_mesh()
        state = initial_state(config, mesh)
        cs = config.coefficients
        dt = stable_dt(state, mesh, cs)
        res = {name: time_backend(name, state, mesh, cs, dt, args.repeat) for name in names}
        times = [res[n][0] * 1e3 for n in names]
        speed = res["python"][0] / res["cython"][0] if "cython" in res else 1.0
        ref = res[names[0]][1]
        diff = max(float(np.max(np.abs(r[1].u - ref.u))) for r in res.values())
        print(f"{p:5g} " + " ".join(f"{t:14.3f}" for t in times) + f" {speed:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
