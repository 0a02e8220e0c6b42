"""Command-line interface.

Subcommands: ``estimate``, ``bounds``, ``flow``, ``simulate`` and ``oracle``.
Settings come from an optional ``--config`` file of ``key = value`` lines;
command-line flags override the file. A human-readable summary goes to
stdout and ``--output PATH`` writes the JSON report (``-`` for stdout). Any
library error exits with status 1 and a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .core import DataScenario, DesignKind, ExposureLimits, validate_sample
from .errors import ConfigError, PersuasionError
from .inference import Target, decision_flow
from .io import read_config, read_csv
from .locpoly import KernelKind, Variant
from .oracle import PopulationLimits
from .runner import RunConfig, dumps, parse_bool, run_estimate, run_oracle, run_simulate

# config key -> (RunConfig field, converter)
_CONFIG_KEYS = {
    "cutoff": float,
    "bandwidth": float,
    "kernel": KernelKind,
    "order": int,
    "alpha": float,
    "mtr": parse_bool,
    "design": DesignKind,
    "target": Target,
    "variant": Variant,
    "cluster_col": str,
    "epsilon_den": float,
    "seed": int,
    "exposure_plus": float,
    "exposure_minus": float,
}


def _common(p):
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--kernel", choices=[k.value for k in KernelKind])
    p.add_argument("--order", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mtr", dest="mtr", action="store_const", const=True)
    p.add_argument("--no-mtr", dest="mtr", action="store_const", const=False)
    p.add_argument("--design", choices=[d.value for d in DesignKind])
    p.add_argument("--target", choices=[t.value for t in Target])
    p.add_argument("--exposure-plus", type=float)
    p.add_argument("--exposure-minus", type=float)
    p.add_argument("--variant", choices=[v.value for v in Variant])
    p.add_argument("--cluster-col")
    p.add_argument("--epsilon-den", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="write the JSON report here ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdpersuasion",
        description="Persuasion rates at a regression-discontinuity cutoff.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("estimate", "estimate the planned persuasion parameters"),
                        ("bounds", "like estimate, always reporting the identified set")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("data", help="CSV file with a header row")
        p.add_argument("--y-col", default="y")
        p.add_argument("--d-col", default="d")
        p.add_argument("--w-col", default="w")
        _common(p)
    p = sub.add_parser("flow", help="print the analysis plan for the given flags")
    _common(p)
    p.add_argument("--scenario", choices=[s.value for s in DataScenario])
    p = sub.add_parser("simulate", help="Monte Carlo study of a simulated design")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p = sub.add_parser("oracle", help="check the complier bounds by enumeration")
    p.add_argument("--p-plus", type=float, required=True)
    p.add_argument("--p-minus", type=float, required=True)
    p.add_argument("--e-plus", type=float, required=True)
    p.add_argument("--e-minus", type=float, required=True)
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--output")
    return parser


def _settings(args) -> dict:
    """Config-file values overridden by explicit flags, as raw strings/values."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if v is not None}
    if "cluster_col" in flags:
        cfg["cluster_col"] = flags["cluster_col"]
    for key in _CONFIG_KEYS:
        if key in flags:
            cfg[key] = flags[key]
    return cfg


def _run_config(cfg: dict) -> RunConfig:
    kw = {}
    for key, conv in _CONFIG_KEYS.items():
        if key in cfg and key not in ("exposure_plus", "exposure_minus"):
            try:
                value = conv(cfg[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {cfg[key]!r}") from exc
            kw["cluster_column" if key == "cluster_col" else key] = value
    ep, em = cfg.get("exposure_plus"), cfg.get("exposure_minus")
    if (ep is None) != (em is None):
        raise ConfigError("give both --exposure-plus and --exposure-minus, or neither")
    if ep is not None:
        kw["exposure"] = ExposureLimits(float(ep), float(em))
    return RunConfig(**kw)


def _emit(obj_json: str, human: str, output):
    if output == "-":
        sys.stdout.write(obj_json)
        return
    print(human)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(obj_json)


def _cmd_estimate(args, force_interval):
    cfg = _settings(args)
    config = _run_config(cfg)
    records = read_csv(args.data, args.y_col, args.d_col, args.w_col, config.cluster_column)
    sample = validate_sample(records, config.cutoff)
    report = run_estimate(config, sample, force_interval=force_interval)
    _emit(report.to_json(), report.table(), args.output)


def _cmd_flow(args):
    cfg = _settings(args)
    config = _run_config(cfg)
    if args.scenario:
        scenario = DataScenario(args.scenario)
    elif config.design is DesignKind.SHARP:
        scenario = DataScenario.FULL_TRIPLET
    else:
        scenario = (DataScenario.AGGREGATE_WITH_EXPOSURE if config.exposure is not None
                    else DataScenario.OUTCOME_ONLY)
    plan = decision_flow(config.design, config.mtr, scenario, config.target)
    d = plan.to_dict()
    human = "\n".join(f"{k:<15}{v}" for k, v in d.items())
    _emit(dumps(d), human, args.output)


def _cmd_simulate(args):
    cfg = read_config(args.config) if args.config else {}
    for key in ("bandwidth", "order", "kernel", "alpha", "mtr", "design", "target",
                "variant", "epsilon_den"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    n = args.n if args.n is not None else int(cfg.get("n", 50000))
    reps = args.reps if args.reps is not None else int(cfg.get("reps", 200))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = run_simulate(cfg, n, reps, seed)
    human = (f"{out['plan']['identification']} via {', '.join(out['estimands'])}: "
             f"coverage={out['coverage']:.3f} target={out['target_value']:.4f} "
             f"reps={out['reps']} failures={out['failures']}")
    for name, s in out["estimands"].items():
        human += f"\n  {name}: mean={s['mean']:.4f} bias={s['bias']:+.4f} rmse={s['rmse']:.4f}"
    _emit(dumps(out), human, args.output)


def _cmd_oracle(args):
    pop = PopulationLimits(args.p_plus, args.p_minus, args.e_plus, args.e_minus)
    out = run_oracle(pop, args.grid_step)
    c = out["complete_tables"]
    human = (f"{out['verdict']}: closed form [{out['closed_form'][0]:.4f}, {out['closed_form'][1]:.4f}]"
             f", enumerated [{out['enumerated'][0]:.4f}, {out['enumerated'][1]:.4f}]\n"
             f"complete tables: [{c['enumerated'][0]:.4f}, {c['enumerated'][1]:.4f}]"
             f" (agrees with closed form: {c['agrees_with_closed_form']})")
    _emit(dumps(out), human, args.output)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            _cmd_estimate(args, force_interval=False)
        elif args.command == "bounds":
            _cmd_estimate(args, force_interval=True)
        elif args.command == "flow":
            _cmd_flow(args)
        elif args.command == "simulate":
            _cmd_simulate(args)
        else:
            _cmd_oracle(args)
    except PersuasionError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": {"code": "io_error", "type": type(exc).__name__,
                                               "message": str(exc)}}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
