"""Command-line front end: transforms, kinematics, sampling and simulation.

Subcommands: matrix, transform, fk, ik, sample, bench, simulate,
noise-report. Every randomized subcommand takes an explicit --seed
(default 0, echoed in the output) so results are replayable. Exit codes:
0 success, 2 usage error, 3 domain/precondition error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .arcspace import SegmentGeometry
from .clarke import JointLayout, build_transform, inverse_transform, transform
from .control import (
    ControllerConfig,
    NoiseModel,
    PT1Plant,
    TrajectorySpec,
    clarke_tracking_rms,
    generate_trajectory,
    noise_propagation,
    run_simulation,
    save_trace_csv,
    trace_to_dict,
)
from .kinematics import Pose, fk_direct, ik
from .sampling import (
    ALL_METHODS,
    SamplerConfig,
    benchmark,
    histogram_csv,
    sample,
    sample_direct_batched,
    save_batch_csv,
    stats_csv,
)

USAGE_ERROR = 2
DOMAIN_ERROR = 3


class UsageError(Exception):
    """Inconsistent or missing arguments; maps to exit code 2."""


def _fmt(x: float, digits: int = 17) -> str:
    return format(float(x), f".{digits}g")


def _parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(";", ",").split(",") if v.strip()])
    except ValueError as exc:
        raise ValueError(f"could not parse float list {text!r}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _geometry(args) -> SegmentGeometry:
    return SegmentGeometry(layout=JointLayout(n=args.n, d=args.d), l=args.l)


def cmd_matrix(args) -> int:
    t = build_transform(args.n)
    lines = [f"forward (2 x {t.n}):"]
    for row in t.forward:
        lines.append("  " + "  ".join(_fmt(v, 15) for v in row))
    lines.append(f"inverse ({t.n} x 2):")
    for row in t.inverse:
        lines.append("  " + "  ".join(_fmt(v, 15) for v in row))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_transform(args) -> int:
    t = build_transform(args.n)
    if (args.rho is None) == (args.xi is None):
        raise UsageError("give exactly one of --rho (forward) or --xi (inverse)")
    if args.rho is not None:
        xi = transform(t, _parse_floats(args.rho))
        payload = {"rho_re": xi[0], "rho_im": xi[1]}
    else:
        rho = inverse_transform(t, _parse_floats(args.xi))
        payload = {"rho": list(rho)}
    _emit(_format_payload(payload, args.format), args.out)
    return 0


def _pose_payload(pose: Pose) -> dict:
    return {
        "rotation": [list(map(float, row)) for row in pose.rotation],
        "position": [float(v) for v in pose.position],
    }


def _format_payload(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, default=float) + "\n"
    lines = []
    for key, value in payload.items():
        flat = np.asarray(value, dtype=float).ravel()
        lines.append(key + "," + ",".join(_fmt(v) for v in flat))
    return "\n".join(lines) + "\n"


def _read_csv_rows(path: str) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return header, np.array(rows) if rows else np.empty((0, len(header)))


def cmd_fk(args) -> int:
    geom = _geometry(args)
    if (args.rho is None) == (args.infile is None):
        raise UsageError("give exactly one of --rho or --in FILE")
    if args.rho is not None:
        pose = fk_direct(geom, _parse_floats(args.rho))
        _emit(_format_payload(_pose_payload(pose), args.format), args.out)
        return 0
    _, rows = _read_csv_rows(args.infile)
    header = [f"r{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)] + ["px", "py", "pz"]
    lines = [",".join(header)]
    for row in rows:
        pose = fk_direct(geom, row)
        flat = list(pose.rotation.ravel()) + list(pose.position)
        lines.append(",".join(_fmt(v) for v in flat))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _target_from_args(args, row: np.ndarray | None = None):
    if row is not None:
        if len(row) == 3:
            return row
        if len(row) == 12:
            return Pose(rotation=row[:9].reshape(3, 3), position=row[9:])
        raise ValueError(f"batch ik rows need 3 (position) or 12 (pose) values, got {len(row)}")
    given = [v for v in (args.position, args.rotation, args.pose) if v is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --position, --rotation or --pose")
    if args.position is not None:
        return _parse_floats(args.position)
    if args.rotation is not None:
        vals = _parse_floats(args.rotation)
        if len(vals) != 9:
            raise ValueError(f"--rotation needs 9 row-major values, got {len(vals)}")
        return vals.reshape(3, 3)
    vals = _parse_floats(args.pose)
    if len(vals) != 12:
        raise ValueError(f"--pose needs 9 rotation + 3 position values, got {len(vals)}")
    return Pose(rotation=vals[:9].reshape(3, 3), position=vals[9:])


def cmd_ik(args) -> int:
    geom = _geometry(args)
    if args.infile is not None:
        _, rows = _read_csv_rows(args.infile)
        lines = [",".join(f"rho_{i + 1}" for i in range(args.n))]
        for row in rows:
            rho = ik(geom, _target_from_args(args, row))
            lines.append(",".join(_fmt(v) for v in rho))
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    rho = ik(geom, _target_from_args(args))
    _emit(_format_payload({"rho": list(rho)}, args.format), args.out)
    return 0


def _sampler_config(args, method: str | None = None) -> SamplerConfig:
    layout = JointLayout(n=args.n, d=args.d)
    rho_max = args.rho_max if args.rho_max is not None else layout.d * np.pi
    if args.rho_min is not None:
        rho_min = args.rho_min
    elif method == "e":
        # The annulus needs a positive inner radius; a tenth of the outer
        # radius is the documented default when no bound is given.
        rho_min = 0.1 * rho_max
    else:
        rho_min = -rho_max
    return SamplerConfig(
        layout=layout,
        rho_min=rho_min,
        rho_max=rho_max,
        rounding_epsilon=args.rounding_eps,
        seed=args.seed,
    )


def cmd_sample(args) -> int:
    cfg = _sampler_config(args, method=args.method)
    if args.vectorized:
        from .sampling import _RADIAL_BY_METHOD

        if args.method not in _RADIAL_BY_METHOD:
            raise ValueError(f"--vectorized applies to direct methods c/d/e, not {args.method!r}")
        batch = sample_direct_batched(cfg, args.k, _RADIAL_BY_METHOD[args.method])
        stats_line = f"method {args.method}: k={args.k} vectorized seed={args.seed}\n"
    else:
        batch, stats = sample(cfg, args.k, args.method)
        stats_line = (
            f"method {stats.method}: k={args.k} iterations={stats.iterations} "
            f"resamples={stats.resamples} success_rate={_fmt(stats.success_rate)} "
            f"time_s={_fmt(stats.wall_time)} seed={args.seed}\n"
        )
    if args.out:
        save_batch_csv(batch, args.out)
    else:
        save_batch_csv(batch, "/dev/stdout")
    sys.stderr.write(stats_line)
    return 0


def cmd_bench(args) -> int:
    cfg = _sampler_config(args)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in ALL_METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {','.join(ALL_METHODS)}")
    annulus_min = 0.1 * cfg.rho_max if args.rho_min is None else None
    results = benchmark(
        cfg,
        args.k,
        methods=methods,
        runs=args.runs,
        vectorized=args.vectorized,
        annulus_rho_min=annulus_min,
    )
    if args.format == "json":
        payload = []
        for r in results:
            payload.append(
                {
                    "method": r.method,
                    "time_s_mean": r.time_mean,
                    "time_s_std": r.time_std,
                    "factor": r.factor,
                    "iterations_mean": r.iterations_mean,
                    "iterations_std": r.iterations_std,
                    "resamples_mean": r.resamples_mean,
                    "success_rate": r.success_rate,
                }
            )
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(stats_csv(results), args.out)
    if args.hist_dir:
        import os

        os.makedirs(args.hist_dir, exist_ok=True)
        for r in results:
            for j in range(cfg.layout.n):
                path = os.path.join(args.hist_dir, f"hist_{r.method}_joint{j + 1}.csv")
                with open(path, "w") as fh:
                    fh.write(histogram_csv(r, j))
    return 0


def _default_waypoints(layout: JointLayout, seed: int, count: int = 5) -> tuple:
    # Start, goal and vias drawn on the annulus between 10% and 100% of the
    # half-circle displacement d*pi.
    cfg = SamplerConfig(
        layout=layout,
        rho_min=0.1 * layout.d * np.pi,
        rho_max=layout.d * np.pi,
        seed=seed,
    )
    batch = sample_direct_batched(cfg, count, "annulus")
    t = build_transform(layout.n)
    return tuple(t.forward @ batch.columns[:, i] for i in range(count))


def cmd_simulate(args) -> int:
    geom = _geometry(args)
    cfg = ControllerConfig(kp=args.kp, dt=args.dt, geometry=geom, feedforward=not args.pure_p)
    layout = geom.layout
    if args.waypoints:
        vals = _parse_floats(args.waypoints)
        if len(vals) < 4 or len(vals) % 2:
            raise ValueError("--waypoints needs an even number (>= 4) of values: re1,im1,re2,im2,...")
        waypoints = tuple(vals.reshape(-1, 2))
    else:
        waypoints = _default_waypoints(layout, args.seed)
    spec = TrajectorySpec(
        waypoints=waypoints,
        v_max=args.v_max,
        a_max=args.a_max,
        d_max=args.d_max,
    )
    trajectory = generate_trajectory(layout, spec, args.dt)
    plant = PT1Plant(tau=args.tau, state=np.zeros(layout.n))
    noise = NoiseModel(epsilon=args.noise, seed=args.seed)
    closed = run_simulation(cfg, plant, noise, trajectory, closed_loop=True)
    opened = run_simulation(cfg, plant, noise, trajectory, closed_loop=False)
    t = build_transform(layout.n)
    summary = {
        "seed": args.seed,
        "ticks": int(len(closed.time)),
        "duration_s": float(closed.time[-1]) if len(closed.time) else 0.0,
        "rms_closed_loop": clarke_tracking_rms(closed, t),
        "rms_open_loop": clarke_tracking_rms(opened, t),
        "config": {
            "n": layout.n,
            "d": layout.d,
            "l": geom.l,
            "kp": args.kp,
            "dt": args.dt,
            "tau": args.tau,
            "noise": args.noise,
            "feedforward": not args.pure_p,
        },
    }
    if args.trace_out:
        if args.format == "json":
            with open(args.trace_out, "w") as fh:
                json.dump(trace_to_dict(closed), fh)
        else:
            save_trace_csv(closed, args.trace_out)
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return 0


def cmd_noise_report(args) -> int:
    layout = JointLayout(n=args.n, d=args.d)
    report = noise_propagation(layout, args.sigma, args.joint)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return 0


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected KEY = VALUE, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise UsageError(f"{path}:{lineno}: empty key")
            values[key.replace("-", "_")] = value
    return values


def _add_common(p: argparse.ArgumentParser, *, n: int = 3, d: float = 0.01, l: float = 0.1) -> None:
    # Sampling subcommands default to the 1 mm benchmark radius; the
    # kinematics and control ones to the 10 mm segment geometry.
    p.add_argument("--n", type=int, default=n, help="number of displacement joints")
    p.add_argument("--d", type=float, default=d, help="joint radius from the center-line, m")
    p.add_argument("--l", type=float, default=l, help="segment length, m")
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (printed with the output)")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="output format")
    p.add_argument("--out", default=None, help="write the primary output to this path")
    p.add_argument("--config", default=None, help="KEY = VALUE defaults file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clarkekin",
        description="Clarke-transform toolkit for displacement-actuated continuum robots",
    )
    parser.add_argument("--version", action="version", version=f"clarkekin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="print the transform matrix pair for n joints")
    _add_common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("transform", help="apply the transform or its inverse to a vector")
    _add_common(p)
    p.add_argument("--rho", help="comma-separated displacements, forward direction")
    p.add_argument("--xi", help="comma-separated Clarke pair, inverse direction")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("fk", help="forward kinematics from displacements")
    _add_common(p)
    p.add_argument("--rho", help="comma-separated displacements")
    p.add_argument("--in", dest="infile", help="batch CSV with one displacement row per line")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("ik", help="inverse kinematics to a position, rotation or pose")
    _add_common(p)
    p.add_argument("--position", help="px,py,pz")
    p.add_argument("--rotation", help="9 row-major rotation entries")
    p.add_argument("--pose", help="9 rotation entries followed by px,py,pz")
    p.add_argument("--in", dest="infile", help="batch CSV: rows of 3 (position) or 12 (pose) values")
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("sample", help="draw displacement samples with one method")
    _add_common(p, d=0.001)
    p.add_argument("--method", choices=ALL_METHODS, default="e")
    p.add_argument("--k", type=int, default=1000, help="number of samples")
    p.add_argument("--rho-min", type=float, default=None, help="lower bound, m (default -d*pi)")
    p.add_argument("--rho-max", type=float, default=None, help="upper bound, m (default d*pi)")
    p.add_argument("--rounding-eps", type=float, default=1e-5, help="method (a) sum granularity, m")
    p.add_argument("--vectorized", action="store_true", help="use the batched path (c/d/e)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bench", help="time the sampling methods and emit stats/histograms")
    _add_common(p, d=0.001)
    p.add_argument("--methods", default=",".join(ALL_METHODS), help="comma list from a,b,c,d,e")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--rho-min", type=float, default=None)
    p.add_argument("--rho-max", type=float, default=None)
    p.add_argument("--rounding-eps", type=float, default=1e-5)
    p.add_argument("--vectorized", action="store_true", help="time direct methods batched")
    p.add_argument("--hist-dir", default=None, help="write per-joint histogram CSVs here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="closed-loop displacement control simulation")
    _add_common(p, n=5)
    p.add_argument("--kp", type=float, default=125.0, help="proportional gain")
    p.add_argument("--dt", type=float, default=1e-3, help="sample time, s")
    p.add_argument("--tau", type=float, default=0.25, help="actuator time constant, s")
    p.add_argument("--noise", type=float, default=2.5e-3, help="measurement noise half-width, m")
    p.add_argument("--v-max", type=float, default=0.01 * np.pi, help="Clarke speed limit, m/s")
    p.add_argument("--a-max", type=float, default=0.1 * np.pi, help="acceleration limit, m/s^2")
    p.add_argument("--d-max", type=float, default=0.1 * np.pi, help="deceleration limit, m/s^2")
    p.add_argument("--waypoints", default=None, help="re1,im1,re2,im2,... (default: 5 seeded draws)")
    p.add_argument("--pure-p", action="store_true", help="drop the reference feedforward term")
    p.add_argument("--trace-out", default=None, help="write the closed-loop trace here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("noise-report", help="single-joint error spread over the manifold")
    _add_common(p)
    p.add_argument("--sigma", type=float, default=1.0, help="error size on the faulty joint, m")
    p.add_argument("--joint", type=int, default=0, help="zero-based faulty joint index")
    p.set_defaults(func=cmd_noise_report)

    return parser


def _explicit_flags(argv: list[str]) -> set[str]:
    flags = set()
    for token in argv:
        if token.startswith("--"):
            flags.add(token[2:].split("=", 1)[0].replace("-", "_"))
    return flags


def _apply_config(args, argv: list[str], file_values: dict) -> None:
    # Flags given on the command line win over the config file.
    given = _explicit_flags(argv)
    for key, raw in file_values.items():
        if key in given or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes", "on"))
        elif isinstance(current, int):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            # Flags defaulting to None (paths, bounds): guess numbers first.
            for caster in (int, float):
                try:
                    setattr(args, key, caster(raw))
                    break
                except ValueError:
                    continue
            else:
                setattr(args, key, raw)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config(args, argv, _load_config_file(args.config))
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    except (ValueError, RuntimeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
