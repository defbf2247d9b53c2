"""Command-line interface: simulate, sweep, bounds, verify-mc, fit.

Config files are JSON documents. A run file holds one config object under
"run"; a sweep file holds shared values under "defaults" and a list of
override objects under "runs". Keys mirror SimConfig fields:

    {"defaults": {"scheme": "fast", "W": 18, "super_slots": 20},
     "runs": [{"n": 1024, "D": 32, "seed": 1}, {"n": 4096, "D": 64, "seed": 2}]}

Exit code 0 on success; errors print one JSON object to stderr and exit 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import SimConfig, validate_regime
from .errors import SimError
from .harness import fit_scaling, generator_for, read_csv, run, sweep, write_csv
from .mcverify import run_grid
from .theory import bound_report


def _config_from_dict(d: dict) -> SimConfig:
    fields = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(d) - fields
    if unknown:
        raise SimError(f"unknown config keys: {sorted(unknown)}")
    return SimConfig(**d).validate()


def load_run_config(path: str, seed_override: int | None = None) -> SimConfig:
    with open(path) as fh:
        doc = json.load(fh)
    cfg = _config_from_dict(doc.get("run", doc))
    if seed_override is not None:
        cfg = cfg.with_overrides(seed=seed_override)
    return cfg.validate()


def load_sweep_configs(path: str) -> list[SimConfig]:
    with open(path) as fh:
        doc = json.load(fh)
    defaults = doc.get("defaults", {})
    runs = doc.get("runs")
    if not runs:
        raise SimError("sweep config needs a nonempty 'runs' list")
    return [_config_from_dict({**defaults, **r}) for r in runs]


def _cmd_simulate(args) -> int:
    cfg = load_run_config(args.config, args.seed)
    report = validate_regime(cfg)
    for w in report.warnings:
        print(f"regime warning: {w}", file=sys.stderr)
    result = run(cfg)
    write_csv([result.row()], args.out)
    print(json.dumps({
        "run_id": result.run_id,
        "lambda_min": result.lambda_min,
        "lambda_mean": result.lambda_mean,
        "delivery_prob": result.delivery_prob,
        "bound_per_pair": result.bound_per_pair,
        "out": args.out,
        **result.extras,
    }))
    return 0


def _cmd_sweep(args) -> int:
    configs = load_sweep_configs(args.config)
    rows = sweep(configs, args.out, jobs=args.jobs)
    errors = sum(1 for r in rows if r["status"] != "ok")
    print(json.dumps({"runs": len(rows), "errors": errors, "out": args.out}))
    return 0


def _cmd_bounds(args) -> int:
    rep = bound_report(args.scheme, args.n, args.d, W=args.w, delta=args.delta,
                       T=args.t, c=args.c)
    print(json.dumps(dataclasses.asdict(rep)))
    return 0


def _cmd_verify_mc(args) -> int:
    grid = None
    if args.config:
        with open(args.config) as fh:
            grid = json.load(fh)["instances"]
    rng = generator_for(args.seed)
    results = run_grid(grid, args.trials, rng)
    rows = [r.row() for r in results]
    if args.out:
        import csv as _csv

        with open(args.out, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    failed = sum(1 for r in results if not r.passed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.lemma} "
              f"empirical={r.empirical_tail:.3g} bound={r.bound:.3g}")
    print(json.dumps({"instances": len(results), "failed": failed}))
    return 0 if failed == 0 else 1


def _cmd_fit(args) -> int:
    rows = read_csv(args.infile)
    fit = fit_scaling(rows, args.scheme)
    print(fit.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manetsim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one configuration")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.set_defaults(fn=_cmd_simulate)

    sw = sub.add_parser("sweep", help="run a grid of configurations")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(fn=_cmd_sweep)

    bd = sub.add_parser("bounds", help="print closed-form heuristics and bounds as JSON")
    bd.add_argument("--scheme", choices=["fast", "slow"], required=True)
    bd.add_argument("--n", type=float, required=True)
    bd.add_argument("--d", type=float, required=True)
    bd.add_argument("--w", type=float, default=1.0)
    bd.add_argument("--delta", type=float, default=0.4)
    bd.add_argument("--t", type=float, default=1.0)
    bd.add_argument("--c", type=float, default=1.0)
    bd.set_defaults(fn=_cmd_bounds)

    mc = sub.add_parser("verify-mc", help="Monte-Carlo checks of the tail-bound lemmas")
    mc.add_argument("--config", default=None, help="JSON with an 'instances' list")
    mc.add_argument("--out", default=None)
    mc.add_argument("--trials", type=int, default=10_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.set_defaults(fn=_cmd_verify_mc)

    ft = sub.add_parser("fit", help="fit the scaling exponent from a results CSV")
    ft.add_argument("--in", dest="infile", required=True)
    ft.add_argument("--scheme", choices=["fast", "slow"], required=True)
    ft.set_defaults(fn=_cmd_fit)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SimError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
