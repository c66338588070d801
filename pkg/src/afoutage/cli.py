"""Command-line entry point: ``afoutage <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .gga import GGAFitError, fit_gga
from .interference import aggregate_moments_random
from .montecarlo import McSpec
from .scenario import (
    PRESET_NAMES,
    RUN_METHODS,
    ConfigError,
    figure_methods,
    figure_preset,
    load_scenarios,
    run,
)

OUTPUT_ENV = "AFOUTAGE_OUTPUT_DIR"


def _output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _resolve_out(path: str | None, default_name: str) -> Path:
    if path is None:
        return _output_dir() / default_name
    return Path(path)


def _write(path: Path, scenarios, methods, mc=None) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        results, total_failure = run(scenarios, methods, fh, mc)
    for r in results:
        if r.error:
            print(f"warning: {r.method}: {r.error}", file=sys.stderr)
    print(str(path))
    return 1 if total_failure else 0


def _methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in RUN_METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {', '.join(RUN_METHODS)}")
    return methods


def cmd_fit_gga(args) -> int:
    out = []
    status = 0
    for scn in load_scenarios(args.config):
        if scn.track != "random":
            out.append({"scenario_id": scn.scenario_id, "error": "fixed track has no GGA fit"})
            status = 1
            continue
        for hop, name in ((0, "sr"), (1, "rd")):
            moments = aggregate_moments_random(scn.interference_field(hop), scn.quadrature)
            entry = {"scenario_id": scn.scenario_id, "hop": name, "moments": list(moments.as_tuple())}
            try:
                rep = fit_gga(moments)
                entry.update(params=asdict(rep.params), residuals=list(rep.residuals),
                             iterations=rep.iterations, converged=rep.converged)
            except GGAFitError as exc:
                entry["error"] = str(exc)
                status = 1
            out.append(entry)
    print(json.dumps(out, indent=2))
    return status


def cmd_outage(args) -> int:
    scns = load_scenarios(args.config)
    return _write(_resolve_out(args.out, f"{scns[0].scenario_id.replace('/', '_')}.csv"),
                  scns, _methods(args.methods))


def cmd_mc(args) -> int:
    scns = load_scenarios(args.config)
    base = scns[0].mc
    mc = McSpec(args.trials if args.trials is not None else base.trials,
                args.seed if args.seed is not None else base.seed,
                args.batch if args.batch is not None else base.batch)
    scns = [replace(s, mc=mc) for s in scns]
    return _write(_resolve_out(args.out, f"{scns[0].scenario_id.replace('/', '_')}_mc.csv"),
                  scns, ["mc"])


def cmd_figure(args) -> int:
    scns = figure_preset(args.name)
    methods = _methods(args.methods) if args.methods else list(figure_methods(args.name))
    mc = None
    if args.trials is not None or args.seed is not None:
        base = scns[0].mc
        mc = McSpec(args.trials if args.trials is not None else base.trials,
                    args.seed if args.seed is not None else base.seed)
    out_dir = Path(args.out) if args.out else _output_dir()
    return _write(out_dir / f"{args.name}.csv", scns, methods, mc)


def cmd_validate(args) -> int:
    for scn in load_scenarios(args.config):
        link = scn.link()
        report = {"scenario_id": scn.scenario_id, "track": scn.track}
        for name, hop in (("sr", link.hop_sr), ("rd", link.hop_rd)):
            info = {"signal_m": hop.signal_m, "signal_omega": hop.signal_omega,
                    "noise_power": hop.noise_power}
            if hop.gg is not None:
                info["gga"] = asdict(hop.gg)
            report[name] = info
        print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afoutage",
                                description="Outage of dual-hop AF relay selection under interference.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit-gga", help="fit the generalized-Gamma law to each hop's interference")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_fit_gga)

    s = sub.add_parser("outage", help="evaluate outage methods and write a CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--methods", default="lower_bound",
                   help=f"comma-separated subset of: {', '.join(RUN_METHODS)}")
    s.add_argument("--out", help=f"CSV path (default: ${OUTPUT_ENV}/<scenario>.csv)")
    s.set_defaults(func=cmd_outage)

    s = sub.add_parser("mc", help="Monte Carlo outage estimate")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--batch", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("figure", help="compute every curve of a figure preset")
    s.add_argument("name", choices=PRESET_NAMES)
    s.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or .)")
    s.add_argument("--methods")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_figure)

    s = sub.add_parser("validate", help="check a config and print the calibrated hops")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
