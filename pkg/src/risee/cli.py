"""Command-line entry point: ``risee run`` for one scenario, ``risee sweep`` for Monte Carlo sweeps."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ao import ao_run
from .channel import draw_channels
from .config import Architecture, ConfigError, Scenario, load_scenario, scenario_from_mapping
from .harness import ALL_ARCHS, SweepSpec, emit, preset, run_sweep

log = logging.getLogger("risee")


def _parse_sets(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _load_base(args) -> Scenario:
    base = Scenario()
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file: {exc}") from None
        base = load_scenario(text)
    overrides = _parse_sets(args.set)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return scenario_from_mapping(overrides, base) if overrides else base


def _cmd_run(args) -> int:
    s = _load_base(args)
    if args.arch:
        s = s.replace(architecture=Architecture.parse(args.arch))
    cs = draw_channels(s, args.trial)
    started = time.time()
    state, report = ao_run(cs, s)
    result = {
        "architecture": s.architecture.value,
        "seed": s.seed,
        "trial": args.trial,
        "status": state.status.value,
        "iterations": state.iteration,
        "seconds": round(time.time() - started, 3),
        "channels": cs.digest(),
        **report.to_dict(),
        "history": [float(v) for v in state.history],
    }
    text = json.dumps(result, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "run.json").write_text(text + "\n")
        trace = {"scenario": s.to_dict(), "trace": report.trace,
                 "psi": {"re": np.real(state.psi).tolist(), "im": np.imag(state.psi).tolist()},
                 "W": {"re": np.real(state.W).tolist(), "im": np.imag(state.W).tolist()}}
        (out / "run_trace.json").write_text(json.dumps(trace, indent=1) + "\n")
    print(text)
    return 0


def _parse_grid(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}; expected comma-separated numbers", "grid") from None


def _cmd_sweep(args) -> int:
    base = _load_base(args)
    archs = tuple(Architecture.parse(a) for a in args.arch.split(",")) if args.arch else ALL_ARCHS
    if args.preset:
        spec = preset(args.preset, args.trials, base)
        if args.arch:
            spec = SweepSpec(spec.param, spec.grid, archs, spec.trials, spec.base)
        stem = args.preset
    else:
        spec = SweepSpec(args.param, _parse_grid(args.grid), archs, args.trials, base)
        stem = f"sweep_{args.param}"
    workers = args.workers or 1

    def progress(done, total):
        log.info("%d/%d runs done", done, total)

    result = run_sweep(spec, workers=workers, progress=progress)
    paths = emit(result, args.out, stem)
    for c in result.cells:
        print(f"{c.arch.value:6s} {spec.param}={c.value:g}: mean min-EE {c.mean_min_ee:.6g} "
              f"(stderr {c.stderr:.3g}, {c.successes} ok, {c.failures} failed)")
    print(f"wrote {paths['csv']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risee", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a scenario field (repeatable; applied after --config)")
        sp.add_argument("--seed", type=int, help="master RNG seed")
        sp.add_argument("--verbose", "-v", action="count", default=0, help="-v for progress, -vv for solver traces")

    r = sub.add_parser("run", help="optimize one scenario on one channel realization")
    r.add_argument("--config", required=True, help="YAML/JSON file of scenario keys")
    r.add_argument("--arch", help="LPD, GPD, GPBD or NoRIS (overrides the file)")
    r.add_argument("--trial", type=int, default=0, help="trial index selecting the channel realization")
    r.add_argument("--out", help="directory for run.json and run_trace.json")
    common(r)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="Monte Carlo sweep of one parameter across architectures")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=("fig1", "fig2"))
    g.add_argument("--param", help="parameter to sweep: P_t, P_t_dBm, P_risn, P_risn_dBm, N, P, P_dB")
    s.add_argument("--grid", help="comma-separated ascending values (with --param)")
    s.add_argument("--config", help="YAML/JSON file with the base scenario")
    s.add_argument("--arch", help="comma-separated architectures (default: all four)")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="parallel processes")
    s.add_argument("--out", default="results", help="output directory")
    common(s)
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and args.param and not args.grid:
        parser.error("--param requires --grid")
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"error{key}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
