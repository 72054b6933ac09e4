"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 solver abort.  The output
directory is taken from ``--output-dir``, then ``$KSPLAP_OUTPUT_DIR``, then
the config file, then ``runs/<preset>``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import _backend
from .diagnostics import (
    check_run,
    heat_reference_error,
    observed_order,
    oscillation_probe,
    plateau_fraction,
)
from .errors import ConfigurationError, SolverAbort
from .io import (
    load_snapshots,
    parse_config,
    save_snapshot,
    write_config,
    write_snapshot_csv,
    write_summary,
)
from .simulator import preset, run

log = logging.getLogger("ksplap")

OUTPUT_ENV = "KSPLAP_OUTPUT_DIR"


def _floats(text, count=None):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _output_dir(args, config):
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    if os.environ.get(OUTPUT_ENV):
        return Path(os.environ[OUTPUT_ENV])
    if config.output_dir:
        return Path(config.output_dir)
    return Path("runs") / (config.preset if config.preset != "none" else "run")


def _execute(config, args):
    out = _output_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    config = config.replace(output_dir=str(out))
    (out / "config.toml").write_text(write_config(config))
    snap_dir = out / "snapshots"

    def on_snapshot(snap, mesh):
        save_snapshot(snap_dir, snap.state, mesh, vtk=not args.no_vtk)

    print(f"running {config.preset} on {config.nx}x{config.ny}, p={config.coefficients.p:g}, "
          f"t_end={config.t_end:g} [{_backend.BACKEND} kernels]", flush=True)
    t0 = time.perf_counter()
    try:
        result = run(config, on_snapshot=on_snapshot)
    except SolverAbort as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        if exc.state is not None:
            mesh = config.build_mesh()
            dump = out / "abort_state.csv"
            dump.write_text(write_snapshot_csv(exc.state, mesh))
            print(f"last accepted state written to {dump}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0
    (out / "summary.json").write_text(write_summary(result.summary))
    report = check_run(result.summary)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    s = result.summary
    print(f"{s.accepted_steps} steps ({s.rejected_steps} rejected) in {elapsed:.1f}s")
    for snap in result.snapshots:
        print(f"  t={snap.time:g}: plateau fraction (u>=0.99) = "
              f"{plateau_fraction(snap.state.u, result.mesh):.5f}")
    print(report.to_text())
    print(f"output written to {out}")
    return 0


def _preset_config(args, name):
    config = preset(name, n=args.n, p=args.p)
    if getattr(args, "t_end", None) is not None:
        times = tuple(t for t in config.snapshot_times if t <= args.t_end) or (args.t_end,)
        config = config.replace(t_end=args.t_end, snapshot_times=times)
    if getattr(args, "drift", None):
        config = config.replace(drift=args.drift)
    return config


def cmd_run(args):
    config = parse_config(Path(args.config).read_text(encoding="utf-8"))
    return _execute(config, args)


def cmd_example(args):
    return _execute(_preset_config(args, args.command), args)


def cmd_heat_verify(args):
    config = preset("heat_verify", n=args.n)
    result = run(config)
    err = heat_reference_error(result.final, result.mesh, config.coefficients)
    print(f"heat_verify n={args.n} t={result.final.t:g}: L2 error = {err:.6e} "
          f"({result.summary.accepted_steps} steps)")
    return 0


def cmd_convergence(args):
    levels = [int(x) for x in _floats(args.levels)]
    if len(levels) < 2:
        raise ConfigurationError("levels: need at least two resolutions")
    errors = []
    print(f"{'n':>6} {'L2 error':>14} {'order':>8}")
    for i, n in enumerate(levels):
        config = preset("heat_verify", n=n)
        result = run(config)
        err = heat_reference_error(result.final, result.mesh, config.coefficients)
        errors.append(err)
        order = ""
        if i:
            order = f"{observed_order(errors[i - 1], err, n / levels[i - 1]):8.3f}"
        print(f"{n:6d} {err:14.6e} {order}")
    return 0


def cmd_osc_probe(args):
    centers, snaps = load_snapshots(args.snapshot_dir)
    x0, y0, t0 = args.center
    data = [(t, u) for t, u, _ in snaps]
    rows, alpha, resid = oscillation_probe(
        data, centers, (x0, y0, t0), args.radii, p=args.p, m=args.m,
        outer_eps=args.outer_eps, trivial_envelope=args.trivial_envelope,
    )
    print(f"{'R':>10} {'omega_outer':>12} {'a0':>12} {'height':>12} {'omega':>12}")
    for r in rows:
        a0 = f"{r.a0:12.4e}" if r.a0 is not None else f"{'-':>12}"
        flag = " (clipped)" if r.clipped else ""
        print(f"{r.radius:10.4g} {r.omega_outer:12.5e} {a0} {r.height:12.4e} {r.omega:12.5e}{flag}")
    if alpha is None:
        print("holder fit: fewer than three positive oscillations, no estimate")
    else:
        print(f"holder fit: alpha = {alpha:.4f}, residual = {resid:.3e}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ksplap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_opts(p):
        p.add_argument("--output-dir")
        p.add_argument("--no-vtk", action="store_true", help="write CSV snapshots only")

    p = sub.add_parser("run", help="run from a config file")
    p.add_argument("--config", required=True)
    run_opts(p)
    p.set_defaults(func=cmd_run)

    for name in ("example1", "example2"):
        p = sub.add_parser(name, help=f"{name} preset")
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--n", type=int, default=256, help="cells per dimension")
        p.add_argument("--t-end", type=float)
        p.add_argument("--drift", choices=["volume_filling", "full_upwind"])
        run_opts(p)
        p.set_defaults(func=cmd_example)

    p = sub.add_parser("heat-verify", help="linear heat-equation check")
    p.add_argument("--n", type=int, default=128)
    p.set_defaults(func=cmd_heat_verify)

    p = sub.add_parser("convergence", help="observed order on heat_verify")
    p.add_argument("--levels", default="32,64,128")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("osc-probe", help="oscillation decay in intrinsic cylinders")
    p.add_argument("--snapshot-dir", required=True)
    p.add_argument("--center", type=lambda s: _floats(s, 3), required=True, help="x,y,t")
    p.add_argument("--radii", type=_floats, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--outer-eps", type=float, default=0.5)
    p.add_argument("--trivial-envelope", action="store_true")
    p.set_defaults(func=cmd_osc_probe)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverAbort as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
