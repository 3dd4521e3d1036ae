"""Command-line entry point: runs, probes, kernel dumps, verification suites.

Heavy imports happen inside the handlers so that thread caps requested on
the command line take effect before the numerics libraries initialize
their pools.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure.
"""

import argparse
import hashlib
import json
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if path.endswith(".json"):
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _require(cfg, key, kind, where):
    if key not in cfg:
        raise ConfigError(f"{where}: missing field {key!r}")
    val = cfg[key]
    if kind is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


# ----------------------------------------------------------------------------
# run configuration

GRID_DEFAULTS = {"n_r": 128, "n_z": 256, "r_max": 12.0, "z_half": 12.0}
SOLVER_DEFAULTS = {
    "dt": 0.1,
    "duhamel_nodes": 4,
    "picard_tol": 1e-10,
    "picard_max_iter": 12,
}


def _build_grid(cfg):
    from .fields import HalfPlaneGrid

    g = {**GRID_DEFAULTS, **cfg.get("grid", {})}
    try:
        return HalfPlaneGrid(int(g["n_r"]), int(g["n_z"]), float(g["r_max"]), float(g["z_half"]))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _build_initial(cfg, grid):
    import numpy as np

    from .fields import VortexMeasure, read_field

    init = cfg.get("initial", None)
    if init is None:
        raise ConfigError("initial: section required")
    kind = _require(init, "kind", str, "initial")
    if kind == "gaussian_ring":
        center = float(init.get("center", 2.0))
        z_center = float(init.get("z_center", 0.0))
        width = float(init.get("width", 0.7))
        amplitude = float(init.get("amplitude", 0.1))
        # amplitude is the planar L1 mass of the ring
        norm = amplitude / (np.pi * width ** 2)
        f = grid.sample(
            lambda r, z: norm * np.exp(-((r - center) ** 2 + (z - z_center) ** 2) / width ** 2)
        )
        return f
    if kind == "field_file":
        path = _require(init, "path", str, "initial")
        return read_field(path)
    if kind == "atoms":
        atoms = init.get("atoms", [])
        if not atoms:
            raise ConfigError("initial.atoms: need at least one [r, z, strength] triple")
        try:
            triples = [(float(a[0]), float(a[1]), float(a[2])) for a in atoms]
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(f"initial.atoms: {exc}") from exc
        return VortexMeasure(atoms=tuple(triples))
    raise ConfigError(f"initial.kind: unknown preset {kind!r}")


def _snapshot_times(cfg, t_final):
    sched = cfg.get("snapshots", {})
    if "times" in sched:
        times = [float(t) for t in sched["times"]]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigError("snapshots.times: must be strictly increasing")
        if times and times[-1] > t_final + 1e-12:
            raise ConfigError("snapshots.times: beyond t_final")
        return times
    count = int(sched.get("log_spaced", 0))
    if count:
        import numpy as np

        t0 = float(sched.get("first", min(0.1, t_final / 10)))
        return list(np.geomspace(t0, t_final, count))
    return [t_final]


def cmd_evolve(args):
    cfg = _load_config(args.config)
    import numpy as np

    from .fields import field_to_csv, write_field
    from .mild_solver import SolverConfig, StepFailure, evolve

    grid = _build_grid(cfg)
    initial = _build_initial(cfg, grid)
    run = cfg.get("run", {})
    t_final = float(run.get("t_final", 1.0))
    outdir = run.get("output_dir", "out")
    seed = int(args.seed if args.seed is not None else run.get("rng_seed", 0))
    solver = {**SOLVER_DEFAULTS, **cfg.get("solver", {})}
    try:
        config = SolverConfig(
            dt=float(solver["dt"]),
            duhamel_nodes=int(solver["duhamel_nodes"]),
            picard_tol=float(solver["picard_tol"]),
            picard_max_iter=int(solver["picard_max_iter"]),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc
    times = _snapshot_times(cfg, t_final)

    os.makedirs(outdir, exist_ok=True)
    outputs = []
    try:
        traj = evolve(initial, t_final, config, grid=grid, snapshot_times=times)
    except StepFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for t, snap in traj.snapshots:
        if t == 0.0 and times and times[0] > 0:
            continue
        path = os.path.join(outdir, f"field_t{t:012.6f}.bin")
        write_field(snap, path)
        outputs.append(path)

    diag_path = os.path.join(outdir, "diagnostics.csv")
    rows = [rec.as_dict() for rec in traj.records]
    cols = list(rows[0].keys())
    with open(diag_path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join("" if row[c] is None else repr(row[c]) for c in cols) + "\n")
    outputs.append(diag_path)

    summary = {
        "t_final": t_final,
        "l1_initial": traj.records[0].l1_2d,
        "l1_final": traj.records[-1].l1_2d,
        "impulse_initial": traj.records[0].impulse,
        "impulse_final": traj.records[-1].impulse,
        "max_sqrt_t_u_sup": max(
            (rec.time ** 0.5 * rec.u_sup for rec in traj.records), default=0.0
        ),
        "xt_norm_max": max((v for _, v in traj.xt_norm_history), default=0.0),
    }
    summary_path = os.path.join(outdir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    outputs.append(summary_path)

    manifest = {
        "config": cfg,
        "defaults": {"grid": GRID_DEFAULTS, "solver": SOLVER_DEFAULTS},
        "rng_seed": seed,
        "outputs": [{"path": os.path.relpath(p, outdir), "sha256": _sha256(p)} for p in outputs],
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"wrote {len(outputs)} artifacts to {outdir}")
    return EXIT_OK


def cmd_linear(args):
    from .fields import HalfPlaneGrid, VortexMeasure, read_field, write_field
    from .semigroup import apply as apply_semigroup
    from .semigroup import apply_to_measure

    if (args.infile is None) == (args.atom is None):
        raise ConfigError("need exactly one of --in or --atom")
    if args.atom is not None:
        try:
            triples = [tuple(float(x) for x in spec.split(",")) for spec in args.atom]
            measure = VortexMeasure(atoms=tuple(triples))
        except ValueError as exc:
            raise ConfigError(f"--atom: {exc}") from exc
        grid = HalfPlaneGrid(args.n_r, args.n_z, args.r_max, args.z_half)
        out = apply_to_measure(args.t, measure, grid)
    else:
        out = apply_semigroup(args.t, read_field(args.infile))
    write_field(out, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_biot_savart(args):
    import numpy as np

    from .biot_savart import velocity
    from .fields import read_field, write_velocity

    f = read_field(args.infile)
    vel = velocity(f)
    if args.out:
        write_velocity(vel, args.out)
        print(f"wrote {args.out}")
    for probe in args.probe or []:
        try:
            r0, z0 = (float(x) for x in probe.split(","))
        except ValueError as exc:
            raise ConfigError(f"--probe: {exc}") from exc
        from .fields import ScalarField, bilinear_sample

        fr = ScalarField(vel.grid, vel.u_r)
        fz = ScalarField(vel.grid, vel.u_z)
        u_r = float(bilinear_sample(fr, np.array([r0]), np.array([z0]))[0])
        u_z = float(bilinear_sample(fz, np.array([r0]), np.array([z0]))[0])
        print(json.dumps({"r": r0, "z": z0, "u_r": u_r, "u_z": u_z}))
    return EXIT_OK


def cmd_kernels(args):
    import numpy as np

    from . import kernels

    s = np.geomspace(args.min, args.max, args.points)
    if args.dump == "F":
        cols = (s, kernels.stream_kernel(s), kernels.stream_kernel_deriv(s))
        header = "s,F,F_prime"
    else:
        cols = (s, kernels.heat_kernel(s), kernels.heat_kernel_deriv(s))
        header = "tau,H,H_prime"
    out = args.out or "-"
    lines = [header] + [",".join(repr(float(v)) for v in row) for row in zip(*cols)]
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_suite

    report = {"suites": {}, "rng_seed": args.seed if args.seed is not None else 0}
    ok = True
    for name in args.suite:
        suite = run_suite(name, rng_seed=report["rng_seed"])
        report["suites"][name] = suite
        ok = ok and suite["passed"]
        state = "pass" if suite["passed"] else "FAIL"
        print(f"[{state}] suite {name}")
        for check in suite["checks"]:
            mark = "ok " if check["passed"] else "BAD"
            print(f"   {mark} {check['name']}: value={check['value']:.6g} "
                  f"threshold={check['threshold']:.6g}")
    report["passed"] = ok
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        print(f"wrote {args.out}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_plot(args):
    with open(args.infile) as fh:
        report = json.load(fh)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for sname, suite in report.get("suites", {}).items():
        for series_name, series in suite.get("series", {}).items():
            path = os.path.join(args.out_dir, f"{sname}_{series_name}.csv")
            keys = list(series.keys())
            rows = zip(*(series[k] for k in keys))
            with open(path, "w") as fh:
                fh.write(",".join(keys) + "\n")
                for row in rows:
                    fh.write(",".join(repr(v) for v in row) + "\n")
            written.append(path)
    print(f"wrote {len(written)} series files to {args.out_dir}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="axivort",
        description="Axisymmetric vorticity dynamics: evolution, probes, and verification",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap the numerics thread pools")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run a configured nonlinear evolution")
    p.add_argument("--config", required=True, help="TOML or JSON run configuration")
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("linear", help="apply the linearized propagator")
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--atom", action="append", default=None, metavar="R,Z,STRENGTH")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-r", type=int, default=GRID_DEFAULTS["n_r"])
    p.add_argument("--n-z", type=int, default=GRID_DEFAULTS["n_z"])
    p.add_argument("--r-max", type=float, default=GRID_DEFAULTS["r_max"])
    p.add_argument("--z-half", type=float, default=GRID_DEFAULTS["z_half"])
    p.set_defaults(fn=cmd_linear)

    p = sub.add_parser("biot-savart", help="reconstruct velocity from vorticity")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--probe", action="append", default=None, metavar="R,Z")
    p.set_defaults(fn=cmd_biot_savart)

    p = sub.add_parser("kernels", help="dump kernel profiles as CSV")
    p.add_argument("--dump", choices=("F", "H"), required=True)
    p.add_argument("--min", type=float, default=1e-6)
    p.add_argument("--max", type=float, default=1e6)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_kernels)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument(
        "--suite",
        action="append",
        required=True,
        choices=("kernels", "biotsavart", "semigroup", "decay", "selfsimilar", "inequalities"),
    )
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("plot", help="export report series as CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", default="plots")
    p.set_defaults(fn=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numerical and IO failures
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
