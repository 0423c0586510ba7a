"""Command-line interface: run a scenario, sweep a parameter, dump topology."""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from lcdpf.harness import (
    ScenarioError,
    build_topology,
    deployment_positions,
    load_config,
    run_scenario,
    write_results,
)
from lcdpf.network import topology_to_json
from lcdpf.pf import VARIANTS

SWEEP_PARAMS = {"rp": ("rp", int), "particles": ("particles", int)}


def _apply_overrides(cfg, args):
    overrides = {}
    for name in ("runs", "steps", "seed", "variant"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "rejitter_per_run", False):
        overrides["rejitter_per_run"] = True
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _add_common(parser):
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--runs", type=int)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--seed", type=int)


def cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    record, summary = run_scenario(cfg)
    write_results(args.out, cfg, record, summary)
    print(f"variant={cfg.variant} armse={summary.armse:.4f} m "
          f"network_scalars_per_step={summary.network_scalars_per_step}")


def cmd_sweep(args):
    field, conv = SWEEP_PARAMS[args.param]
    values = [conv(v) for v in args.values.split(",")]
    base = _apply_overrides(load_config(args.config), args)
    out_root = Path(args.out)
    table = []
    for value in values:
        cfg = dataclasses.replace(base, **{field: value})
        record, summary = run_scenario(cfg)
        write_results(out_root / f"{args.param}_{value}", cfg, record, summary)
        table.append({args.param: value, "armse": summary.armse})
        print(f"{args.param}={value} armse={summary.armse:.4f} m")
    (out_root / "sweep.json").write_text(
        json.dumps({"param": args.param, "points": table}, indent=2) + "\n"
    )


def cmd_topology(args):
    cfg = load_config(args.config)
    cfg.validate()
    topology = build_topology(deployment_positions(cfg), cfg.comm_range)
    Path(args.out).write_text(topology_to_json(topology) + "\n")
    print(f"wrote {args.out} ({topology.size} sensors)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lcdpf")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario")
    _add_common(run_p)
    run_p.add_argument("--variant", choices=VARIANTS)
    run_p.add_argument("--rejitter-per-run", action="store_true",
                       dest="rejitter_per_run")
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="sweep rp or particle count")
    _add_common(sweep_p)
    sweep_p.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 2,4,6")
    sweep_p.add_argument("--variant", choices=VARIANTS)
    sweep_p.add_argument("--out", default="out", help="output directory")
    sweep_p.set_defaults(func=cmd_sweep)

    topo_p = sub.add_parser("topology", help="export the deployment graph")
    topo_p.add_argument("--config", required=True)
    topo_p.add_argument("--out", default="topology.json")
    topo_p.set_defaults(func=cmd_topology)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
