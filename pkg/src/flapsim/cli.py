"""Command-line surface.

Subcommands bind configuration files to deterministic runs with CSV and
structured-text outputs::

    flapsim simulate      one wing run: trajectory CSV + summary
    flapsim sweep         family of runs over one parameter + combined summary
    flapsim couple        wing-abdomen coupling pipeline, all series
    flapsim static-stroke wing angles at the slider travel limits
    flapsim aero-table    lift/drag coefficient sweep over angle of attack
    flapsim analyze-mocap marker-CSV flight record -> metrics + series
    flapsim self-test     integrator convergence and invariant checks

Exit codes: 0 success, 2 validation/parse error, 3 simulation divergence.

Every result file is written through a temp-file-then-rename so failures
leave no partial outputs; every CSV starts with a comment line carrying the
SHA-256 hash of the resolved inputs; a run manifest (with the timestamp
isolated on its own line) is written before any result file.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, abdomen, aero, flapdyn, linkage, mocap
from .configfile import describe_defaults, parse_config, serialize_config
from .errors import (
    FlapsimError,
    PipelineStageError,
    SimulationDivergedError,
    ValidationError,
)
from .params import PRESET_NAMES, Preset, preset

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3

SWEEP_PARAMS = {
    # name -> (section, field, scale to SI); values are given in config-key units
    "tau": ("sim", "tau", 1.0),
    "K": ("linkage", "K", 1e-3),
    "m2": ("abdomen", "m2", 1e-3),
    "d5": ("abdomen", "d5", 1e-3),
}


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, input_hash: str, header: str, columns) -> None:
    rows = [f"# input_hash={input_hash}", header]
    data = [np.asarray(c) for c in columns]
    for k in range(len(data[0])):
        rows.append(",".join(_fmt(c[k]) for c in data))
    _write_text(path, "\n".join(rows) + "\n")


def _write_summary(path: Path, input_hash: str, pairs) -> None:
    lines = [f"# input_hash={input_hash}"]
    for key, value in pairs:
        text = _fmt(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {text}")
    _write_text(path, "\n".join(lines) + "\n")


def _hash_inputs(*parts: str) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part.encode())
        digest.update(b"\x00")
    return digest.hexdigest()


def _resolve(args) -> tuple[Preset, str]:
    p = preset(args.preset)
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from exc
        p = parse_config(text, p)
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.duration is not None:
        overrides["duration"] = args.duration
    if overrides:
        p = p.with_sim(**overrides)
    return p, serialize_config(p)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, p: Preset, config_text: str,
                    input_hash: str, outputs: list) -> None:
    lines = [
        "# flapsim run manifest",
        f"tool_version = {__version__}",
        f"command = {command}",
        f"preset = {p.name}",
        f"input_hash = {input_hash}",
        f"outputs = {', '.join(outputs)}",
        f"timestamp = {datetime.now(timezone.utc).isoformat()}",
        "# resolved configuration",
        config_text.rstrip("\n"),
    ]
    _write_text(out / "manifest.txt", "\n".join(lines) + "\n")


def _trajectory_csv(path: Path, input_hash: str, traj: flapdyn.Trajectory) -> None:
    _write_csv(
        path,
        input_hash,
        "t_s,theta_A_rad,theta_dot_rad_s,x_m,F1_N,F_lift_N,F_drag_N,M_Fdrag_Nm",
        (traj.t, traj.theta_A, traj.theta_dot, traj.x,
         traj.F1, traj.F_lift, traj.F_drag, traj.M_Fdrag),
    )


def _run_summary(traj: flapdyn.Trajectory) -> list:
    freq = flapdyn.flapping_frequency(traj)
    avg = aero.average_lift(traj.t, traj.F_lift, 1.0 / freq)
    return [
        ("frequency_hz", float(freq)),
        ("avg_lift_N", float(avg)),
        ("stroke_max_deg", math.degrees(float(traj.theta_A.max()))),
        ("stroke_min_deg", math.degrees(float(traj.theta_A.min()))),
    ]


# -- commands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    p, config_text = _resolve(args)
    input_hash = _hash_inputs("simulate", p.name, config_text)
    out = _out_dir(args)
    _write_manifest(out, "simulate", p, config_text, input_hash,
                    ["trajectory.csv", "summary.txt"])
    traj = flapdyn.simulate(p.sim, p.linkage, p.wing, p.env)
    _trajectory_csv(out / "trajectory.csv", input_hash, traj)
    summary = _run_summary(traj)
    _write_summary(out / "summary.txt", input_hash, summary)
    for key, value in summary:
        print(f"{key} = {_fmt(value) if isinstance(value, float) else value}")
    return EXIT_OK


def _sweep_member(packed):
    """Run one sweep member; executed in a worker process."""
    preset_bytes, token, param, out_dir, input_hash = packed
    p: Preset = preset_bytes
    out = Path(out_dir)
    if p.sim.abdomen_mode == "undulating":
        result = abdomen.coupled_pipeline(p.sim, p.linkage, p.wing, p.abdomen, p.env)
        traj = result.baseline
        freq = result.freq_baseline
        avg = result.mean_lift_baseline
        gain = result.lift_gain * 100.0
    else:
        traj = flapdyn.simulate(p.sim, p.linkage, p.wing, p.env)
        freq = flapdyn.flapping_frequency(traj)
        avg = aero.average_lift(traj.t, traj.F_lift, 1.0 / freq)
        gain = None
    _trajectory_csv(out / f"trajectory_{param}_{token}.csv", input_hash, traj)
    return token, float(freq), float(avg), gain


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ValidationError(
            f"unknown sweep parameter {args.param!r}; expected one of {sorted(SWEEP_PARAMS)}"
        )
    section, fieldname, scale = SWEEP_PARAMS[args.param]
    tokens = [v.strip() for v in args.values.split(",") if v.strip()]
    if not tokens:
        raise ValidationError("sweep: --values is empty")
    base, _ = _resolve(args)
    members = []
    for token in tokens:
        try:
            raw = float(token)
        except ValueError:
            raise ValidationError(f"sweep: unparsable value {token!r}") from None
        part = replace(getattr(base, section), **{fieldname: raw * scale})
        members.append((token, replace(base, **{section: part})))
    out = _out_dir(args)
    sweep_hash = _hash_inputs("sweep", base.name, serialize_config(base),
                              args.param, args.values)
    outputs = [f"trajectory_{args.param}_{t}.csv" for t, _ in members] + ["sweep_summary.csv"]
    _write_manifest(out, "sweep", base, serialize_config(base), sweep_hash, outputs)
    packed = [
        (p, token, args.param, str(out), _hash_inputs("simulate", p.name, serialize_config(p)))
        for token, p in members
    ]
    jobs = args.jobs if args.jobs else min(len(packed), os.cpu_count() or 1)
    if jobs > 1 and len(packed) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_member, packed))
    else:
        results = [_sweep_member(item) for item in packed]
    has_gain = any(r[3] is not None for r in results)
    header = "value,frequency_hz,avg_lift_N" + (",lift_gain_percent" if has_gain else "")
    lines = [f"# input_hash={sweep_hash}", header]
    for token, freq, avg, gain in results:
        row = f"{token},{_fmt(freq)},{_fmt(avg)}"
        if has_gain:
            row += f",{_fmt(gain)}"
        lines.append(row)
        print(lines[-1])
    _write_text(out / "sweep_summary.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_couple(args) -> int:
    p, config_text = _resolve(args)
    input_hash = _hash_inputs("couple", p.name, config_text)
    out = _out_dir(args)
    outputs = ["abdomen_trace.csv", "forces.csv", "lifts.csv", "moments.csv", "summary.txt"]
    _write_manifest(out, "couple", p, config_text, input_hash, outputs)
    result = abdomen.coupled_pipeline(p.sim, p.linkage, p.wing, p.abdomen, p.env)
    antiphase = abdomen.antiphase_check(result.baseline, result.trace)
    base, corr, trace = result.baseline, result.corrected, result.trace
    _write_csv(
        out / "abdomen_trace.csv", input_hash,
        "t_s,theta_D_rad,theta_Ddot,theta_Dddot,F2_N",
        (trace.t, trace.theta_D, trace.theta_D_dot, trace.theta_D_ddot, trace.F2),
    )
    _write_csv(out / "forces.csv", input_hash, "t_s,F1_N,F2_N,F3_N",
               (base.t, base.F1, trace.F2, result.F3))
    _write_csv(out / "lifts.csv", input_hash, "t_s,F_lift_N,F_lift_prime_N",
               (base.t, base.F_lift, corr.F_lift))
    _write_csv(out / "moments.csv", input_hash, "t_s,M_abdomen_Nm,M_drag_Nm,M_total_Nm",
               (corr.t, result.M_abdomen, result.M_drag, result.M_total))
    summary = [
        ("lift_gain_percent", result.lift_gain * 100.0),
        ("freq_baseline_hz", result.freq_baseline),
        ("freq_coupled_hz", result.freq_corrected),
        ("antiphase_fraction", antiphase),
        ("mean_lift_baseline_N", result.mean_lift_baseline),
        ("mean_lift_coupled_N", result.mean_lift_corrected),
    ]
    _write_summary(out / "summary.txt", input_hash, summary)
    for key, value in summary:
        print(f"{key} = {_fmt(value)}")
    return EXIT_OK


def cmd_static_stroke(args) -> int:
    p, config_text = _resolve(args)
    input_hash = _hash_inputs("static-stroke", p.name, config_text, repr(args.x_max))
    out = _out_dir(args)
    _write_manifest(out, "static-stroke", p, config_text, input_hash, ["static_stroke.txt"])
    theta_up, theta_down = linkage.static_stroke(p.linkage, args.x_max)
    summary = [
        ("x_max_m", float(args.x_max)),
        ("theta_up_deg", math.degrees(theta_up)),
        ("theta_down_deg", math.degrees(theta_down)),
    ]
    _write_summary(out / "static_stroke.txt", input_hash, summary)
    for key, value in summary:
        print(f"{key} = {_fmt(value)}")
    return EXIT_OK


def cmd_aero_table(args) -> int:
    p, config_text = _resolve(args)
    if args.re is not None:
        re_value = args.re
    else:
        re_value, _, _ = flapdyn._reynolds_prepass(p.sim, p.linkage, p.wing, p.env)
    coeffs = aero.coefficients_from_re(re_value)
    input_hash = _hash_inputs("aero-table", p.name, config_text, repr(float(re_value)))
    out = _out_dir(args)
    _write_manifest(out, "aero-table", p, config_text, input_hash, ["aero_table.csv"])
    alphas = np.arange(0.0, 90.5, 1.0)
    c_lt = np.empty_like(alphas)
    c_dt = np.empty_like(alphas)
    for i, a_deg in enumerate(alphas):
        c_lt[i], c_dt[i] = aero.lift_drag_coeff(coeffs, math.radians(a_deg))
    _write_csv(out / "aero_table.csv", input_hash, "alpha_deg,C_Lt,C_Dt", (alphas, c_lt, c_dt))
    print(f"aero_table.csv written (Re = {_fmt(re_value)})")
    return EXIT_OK


def cmd_analyze_mocap(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read mocap file: {exc}") from exc
    p, config_text = _resolve(args)
    input_hash = _hash_inputs("analyze-mocap", text, repr(args.rate), repr(args.ground_z))
    out = _out_dir(args)
    _write_manifest(out, "analyze-mocap", p, config_text, input_hash,
                    ["mocap_series.csv", "mocap_summary.txt"])
    rec = mocap.parse_record(text, rate=args.rate)
    metrics = mocap.flight_metrics(rec, ground_z=args.ground_z)
    vel = mocap.velocity_series(rec)
    _write_csv(
        out / "mocap_series.csv", input_hash,
        "t_s,px_m,py_m,pz_m,vx_ms,vy_ms,vz_ms,pitch_rad",
        (rec.pose_t, rec.pose_position[:, 0], rec.pose_position[:, 1],
         rec.pose_position[:, 2], vel[:, 0], vel[:, 1], vel[:, 2], rec.pose_pitch),
    )
    summary = [
        ("forward_distance_m", metrics.forward_distance),
        ("flight_duration_s", metrics.flight_duration),
        ("final_altitude_drop_m", metrics.final_altitude_drop),
        ("pitch_p2p_rad", metrics.pitch_p2p),
        ("pitch_dominant_freq_hz", metrics.pitch_dominant_freq),
        ("mean_vertical_velocity_ms", metrics.mean_vertical_velocity),
    ]
    _write_summary(out / "mocap_summary.txt", input_hash, summary)
    for key, value in summary:
        print(f"{key} = {_fmt(value)}")
    return EXIT_OK


def cmd_self_test(args) -> int:
    p, _ = _resolve(args)
    link, wing, env = p.linkage, p.wing, p.env
    checks = []

    def check(name: str, ok: bool, detail: str):
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")

    # dt-halving convergence on the conservative configuration
    def final_angle(dt: float) -> float:
        cfg = replace(p.sim, tau=0.0, aero_enabled=False, hinges_enabled=True,
                      initial_angle=math.radians(30.0), dt=dt, duration=0.01)
        return float(flapdyn.simulate(cfg, link, wing, env).theta_A[-1])

    ref = final_angle(1e-5)
    e1 = abs(final_angle(8e-5) - ref)
    e2 = abs(final_angle(4e-5) - ref)
    ratio = e1 / e2 if e2 > 0 else math.inf
    check("dt-halving convergence", ratio >= 8.0, f"error ratio {ratio:.1f} (need >= 8)")

    # crank closure identity over the operating window (inverse trig is
    # ill-conditioned in the last few microns before the dead centers)
    margin = flapdyn.DEAD_CENTER_MARGIN
    worst = 0.0
    for x in np.linspace(link.slider_min + margin, link.slider_max - margin, 512):
        pose = linkage.crank_pose(link, float(x))
        lhs = link.l5 * math.sin(pose.psi)
        rhs = (link.d2 + x) * math.sin(pose.phi)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    check("crank closure identity", worst < 1e-12, f"max rel residual {worst:.2e}")

    # wing angle <-> slider round trip
    worst = 0.0
    for theta in np.linspace(math.radians(-36.0), math.radians(49.0), 256):
        x = linkage.slider_from_wing(link, float(theta))
        worst = max(worst, abs(linkage.wing_from_slider(link, x) - theta))
    check("wing/slider round trip", worst < 1e-8, f"max residual {worst:.2e} rad")

    # quadrature stability of the second-moment radius
    from .params import mean_chord, second_moment_radius

    r_a = second_moment_radius(wing, 4096)
    r_b = second_moment_radius(wing, 8192)
    rel = abs(r_a - r_b) / r_b
    check("second-moment quadrature", rel < 1e-6, f"rel change {rel:.2e}")

    # closed-form mean chord vs quadrature of the chord distribution
    from .params import chord_at

    r = np.linspace(0.0, wing.l6, 100_001)
    quad = float(np.trapezoid(chord_at(wing, r), r)) / wing.l6
    rel = abs(quad - mean_chord(wing)) / mean_chord(wing)
    check("mean chord quadrature", rel < 1e-9, f"rel difference {rel:.2e}")

    # short driven run: single-DOF constraint and determinism
    cfg = replace(p.sim, duration=0.2)
    t1 = flapdyn.simulate(cfg, link, wing, env)
    t2 = flapdyn.simulate(cfg, link, wing, env)
    worst = max(
        abs(float(t1.x[k]) - linkage.slider_from_wing(link, float(t1.theta_A[k])))
        for k in range(0, len(t1.t), 50)
    )
    check("single-DOF constraint", worst < 1e-12, f"max |x - x(theta)| {worst:.2e} m")
    identical = all(
        np.array_equal(getattr(t1, name), getattr(t2, name))
        for name in ("t", "theta_A", "theta_dot", "x", "F1", "F_lift", "F_drag", "M_Fdrag")
    )
    check("determinism", identical, "bit-identical repeat run" if identical else "runs differ")

    if all(checks):
        print(f"self-test: {len(checks)} checks passed")
        return EXIT_OK
    print(f"self-test: {checks.count(False)} of {len(checks)} checks FAILED")
    return 1


# -- argument parsing ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", default="model", choices=PRESET_NAMES,
                        help="named parameter preset (default: model)")
    common.add_argument("--config", default=None,
                        help="configuration file overriding preset values per key")
    common.add_argument("--out-dir", default="out", help="output directory (default: out)")
    common.add_argument("--dt", type=float, default=None, help="integration step override, s")
    common.add_argument("--duration", type=float, default=None,
                        help="simulated duration override, s")
    common.add_argument("--seedless", action="store_true",
                        help="assert that runs use no randomness (always true; no-op)")

    parser = argparse.ArgumentParser(
        prog="flapsim",
        description="Compliant-mechanism flapping-wing simulator and flight-record analyzer",
    )
    parser.add_argument("--version", action="version", version=f"flapsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common], help="run one wing simulation")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", parents=[common], help="run a one-parameter family")
    sp.add_argument("--param", required=True, help="one of: tau, K, m2, d5")
    sp.add_argument("--values", required=True,
                    help="comma-separated values in config-key units (tau N*m, K mN*m, m2 g, d5 mm)")
    sp.add_argument("--jobs", type=int, default=0,
                    help="worker processes (default: available parallelism)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("couple", parents=[common], help="run the wing-abdomen coupling pipeline")
    sp.set_defaults(func=cmd_couple)

    sp = sub.add_parser("static-stroke", parents=[common],
                        help="wing angles at +/-x_max slider travel")
    sp.add_argument("--x-max", type=float, default=0.010, help="slider travel, m (default 0.010)")
    sp.set_defaults(func=cmd_static_stroke)

    sp = sub.add_parser("aero-table", parents=[common],
                        help="coefficient table over angle of attack at fixed Re")
    sp.add_argument("--re", type=float, default=None,
                    help="Reynolds number (default: pre-pass estimate from the configuration)")
    sp.set_defaults(func=cmd_aero_table)

    sp = sub.add_parser("analyze-mocap", parents=[common],
                        help="analyze a motion-capture marker CSV")
    sp.add_argument("file", help="marker CSV path")
    sp.add_argument("--rate", type=float, default=200.0,
                    help="sampling rate when the file has no time column (default 200 Hz)")
    sp.add_argument("--ground-z", type=float, default=0.0,
                    help="ground plane height, m (default 0)")
    sp.set_defaults(func=cmd_analyze_mocap)

    sp = sub.add_parser("self-test", parents=[common],
                        help="dt-halving convergence and invariant suite")
    sp.set_defaults(func=cmd_self_test)

    sp = sub.add_parser("config-keys", parents=[common],
                        help="print all configuration keys with defaults")
    sp.set_defaults(func=lambda a: (print(describe_defaults(preset(a.preset)), end=""), EXIT_OK)[1])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimulationDivergedError as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        if exc.last_state is not None:
            s = exc.last_state
            print(
                "last valid state: "
                f"t={_fmt(s.t)} s, theta_A={_fmt(s.theta_A)} rad, "
                f"theta_dot={_fmt(s.theta_dot)} rad/s, x={_fmt(s.x)} m",
                file=sys.stderr,
            )
        return EXIT_DIVERGED
    except PipelineStageError as exc:
        cause = exc.cause
        if isinstance(cause, SimulationDivergedError):
            print(f"error: simulation diverged: {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FlapsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
