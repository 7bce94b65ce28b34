"""Command-line entry point: ``flexsmc <subcommand> [--config FILE]``.

Exit codes: 0 success, 1 configuration error, 2 observer synthesis or
verification failure, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import tomli

from . import config as cfgmod
from . import io, workflow
from .errors import ConfigError, SimulationError, SynthesisError
from .observer import check_conditions, build_F, spectral_gap

log = logging.getLogger("flexsmc")

EXIT_OK, EXIT_CONFIG, EXIT_SYNTH, EXIT_SIM = 0, 1, 2, 3


def _out_dir(cfg, args) -> Path:
    return Path(args.out or cfg.output.directory)


def _synthesis_report(obs, design) -> dict:
    items = {"realization": obs.realization, "v": obs.v,
             "spectral_gap": spectral_gap(design.A, obs.N)}
    for i, c in enumerate(obs.conditions, start=1):
        items[f"condition{i}.{c.name}.residual"] = c.residual
        items[f"condition{i}.{c.name}.tolerance"] = c.tolerance
        items[f"condition{i}.{c.name}.pass"] = c.passed
    items["all_conditions_hold"] = obs.all_conditions_hold
    items["composite.max_real"] = obs.composite.max_real
    items["composite.stable"] = obs.composite.stable
    items["composite.eigenvalues"] = sorted(obs.composite.eigenvalues, key=lambda z: (z.real, z.imag))
    return items


def cmd_modes(cfg, args) -> int:
    modal = workflow.modal_data(cfg, cfg.modes.n_plant)
    out = _out_dir(cfg, args)
    text = io.mode_table_text(modal)
    path = io.atomic_write_text(out / "modes.csv", text)
    sys.stdout.write(text)
    log.info("wrote %s", path)
    if args.state_space:
        design, plant = workflow.plants(cfg)
        blocks = {"A": plant.A, "B": plant.B, "C": plant.C}
        path = io.atomic_write_text(out / "state_space.csv", io.csv_blocks_text(blocks))
        log.info("wrote %s", path)
    return EXIT_OK


def _observer_blocks(obs, P) -> dict:
    # written in the configured output order so the file round-trips through `verify`
    return {"N": obs.N, "L": obs.L @ P.T, "H": obs.H, "G": obs.G @ P.T,
            "D_obs": obs.D_obs, "T": obs.T, "F": obs.F}


def cmd_synth(cfg, args) -> int:
    design, _ = workflow.plants(cfg)
    spec = workflow.sliding_spec(cfg, design)
    obs = workflow.synthesize_observer(cfg, design, spec)
    out = _out_dir(cfg, args)
    P = workflow.output_permutation(cfg.observer.output_order)
    report = io.report_text(_synthesis_report(obs, design))
    mpath = io.atomic_write_text(out / "observer_matrices.csv", io.csv_blocks_text(_observer_blocks(obs, P)))
    rpath = io.atomic_write_text(Path(args.report) if args.report else out / "synth_report.txt", report)
    sys.stdout.write(report)
    log.info("wrote %s and %s", mpath, rpath)
    if not obs.all_conditions_hold:
        failed = [c.name for c in obs.conditions if not c.passed]
        log.warning("%s realization leaves conditions %s above tolerance", obs.realization, failed)
    return EXIT_OK


def _summary_text(result, extra: dict) -> str:
    items = dict(extra)
    items.update(result.summary)
    return io.report_text(items)


def cmd_simulate(cfg, args) -> int:
    overrides = {}
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.mode:
        overrides["mode"] = args.mode
    result = workflow.run(cfg, **overrides)
    sc = workflow.sim_config(cfg, **overrides)
    out = _out_dir(cfg, args)
    stem = f"trace_{sc.scenario}_{sc.mode}"
    summary = _summary_text(result, {"scenario": sc.scenario, "mode": sc.mode,
                                     "n_plant": sc.n_plant, "dt": sc.dt, "t_final": sc.t_final})
    if cfg.output.emit_plot_data:
        io.write_trace(out / f"{stem}.csv", result)
    io.atomic_write_text(out / f"{stem}_summary.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK


def _load_matrices(path: Path) -> dict:
    if path.suffix == ".toml":
        data = tomli.loads(path.read_text())
        mats = {k: np.array(v, dtype=float) for k, v in data.items() if k != "output_order"}
        if "D" in mats and "D_obs" not in mats:
            mats["D_obs"] = mats.pop("D")
        mats["output_order"] = tuple(data.get("output_order", cfgmod.OUTPUT_NAMES))
        return mats
    mats = io.read_csv_blocks(path)
    mats.setdefault("output_order", None)
    return mats


def cmd_verify(cfg, args) -> int:
    design, _ = workflow.plants(cfg)
    mats = _load_matrices(Path(args.matrices))
    order = mats.get("output_order") or cfg.observer.output_order
    P = workflow.output_permutation(order)
    missing = {"N", "L", "H", "G", "D_obs", "T"} - set(mats)
    if missing:
        raise ConfigError(f"{args.matrices}: missing matrices {sorted(missing)}")
    F = mats["F"] if "F" in mats else build_F(design, cfg.controller.Gamma, cfg.controller.k1).F
    checks = check_conditions(design, F, mats["N"], mats["L"] @ P, mats["H"], mats["G"] @ P,
                              mats["D_obs"], mats["T"], tol=args.tol)
    items = {"tolerance": args.tol}
    for i, c in enumerate(checks, start=1):
        items[f"condition{i}.{c.name}.residual"] = c.residual
        items[f"condition{i}.{c.name}.pass"] = c.passed
    ok = all(c.passed for c in checks)
    items["all_conditions_hold"] = ok
    report = io.report_text(items)
    if args.report:
        io.atomic_write_text(args.report, report)
    sys.stdout.write(report)
    return EXIT_OK if ok else EXIT_SYNTH


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _sweep_member(cfg, param, raw, out):
    try:
        member = cfgmod.with_override(cfg, param, _parse_value(raw))
        result = workflow.run(member)
    except ConfigError as exc:
        return raw, EXIT_CONFIG, str(exc)
    except SynthesisError as exc:
        return raw, EXIT_SYNTH, str(exc)
    except SimulationError as exc:
        return raw, EXIT_SIM, str(exc)
    safe = raw.replace("/", "_")
    if member.output.emit_plot_data:
        io.write_trace(out / f"sweep_{param}={safe}.csv", result)
    return raw, EXIT_OK, result.summary


def cmd_sweep(cfg, args) -> int:
    out = _out_dir(cfg, args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_member, [cfg] * len(values), [args.param] * len(values),
                                    values, [out] * len(values)))
    else:
        results = [_sweep_member(cfg, args.param, v, out) for v in values]
    items, worst = {}, EXIT_OK
    for raw, code, info in results:
        items[f"{args.param}={raw}.exit"] = code
        if code == EXIT_OK:
            for k in ("max_abs_u", "settling_time", "final_tip_error"):
                items[f"{args.param}={raw}.{k}"] = info[k]
        else:
            items[f"{args.param}={raw}.error"] = info
        worst = max(worst, code)
    report = io.report_text(items)
    io.atomic_write_text(out / f"sweep_{args.param}_summary.txt", report)
    sys.stdout.write(report)
    return worst


COMMANDS = {
    "modes": cmd_modes,
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file (defaults to the bundled fixture)")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="flexsmc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", parents=[common], help="mode table as CSV")
    p.add_argument("--state-space", action="store_true", help="also dump A, B, C")

    p = sub.add_parser("synth", parents=[common], help="synthesize and verify the functional observer")
    p.add_argument("--report", help="path of the verification report")

    p = sub.add_parser("simulate", parents=[common], help="closed-loop simulation")
    p.add_argument("--scenario", choices=("regulation", "tracking"))
    p.add_argument("--mode", choices=("full_state", "observer_fed"))

    p = sub.add_parser("verify", parents=[common], help="check observer matrices against the existence conditions")
    p.add_argument("--matrices", required=True, help="TOML or CSV-block file of N, L, H, G, D, T [, F]")
    p.add_argument("--tol", type=float, default=1e-2,
                   help="relative residual tolerance (default 1e-2 suits 4-decimal printouts)")
    p.add_argument("--report", help="also write the report here")

    p = sub.add_parser("sweep", parents=[common], help="one simulation per parameter value")
    p.add_argument("--param", required=True, help="dotted config key, e.g. controller.k1")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def run_subcommand(name: str, cfg, args=None) -> int:
    """Dispatch ``name`` with a loaded config; returns the exit code."""
    if args is None:
        args = build_parser().parse_args([name] + ([] if name != "verify" else ["--matrices", ""]))
    try:
        return COMMANDS[name](cfg, args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SynthesisError as exc:
        log.error("synthesis failed: %s: %s", type(exc).__name__, exc)
        return EXIT_SYNTH
    except SimulationError as exc:
        log.error("simulation failed: %s: %s", type(exc).__name__, exc)
        return EXIT_SIM


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(args.config) if args.config else cfgmod.ProjectConfig()
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return run_subcommand(args.command, cfg, args)


if __name__ == "__main__":
    sys.exit(main())
