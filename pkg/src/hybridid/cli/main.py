"""Command-line entry point: ``hybridid <command> [config] [options]``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 an
acceptance criterion failed (``reproduce`` only).
"""
import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError, DivergenceError, HybridIdError, NumericError
from . import stages
from .config import ExperimentConfig, default_config, load_config

log = logging.getLogger("hybridid")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4

STAGE_COMMANDS = {
    "simulate": stages.simulate,
    "train-sim": stages.train_sim,
    "retrain": stages.retrain,
    "identify-baseline": stages.identify_baseline,
    "train-ppo": stages.train_ppo,
    "evaluate": stages.evaluate,
}
PENDULUM_STAGES = ("simulate", "train-sim", "retrain", "identify-baseline", "evaluate")
BUILDING_STAGES = ("simulate", "train-sim", "retrain", "train-ppo", "evaluate")


def run_stage(name, cfg, out, seed=None, overwrite=False):
    exp = cfg.experiment_for(seed)
    fn = STAGE_COMMANDS[name]
    if name == "train-ppo":
        return fn(exp, out, overwrite, pendulum_ppo=cfg.pendulum_ppo_config(), seed=exp.seed)
    return fn(exp, out, overwrite)


# -- reproduce ---------------------------------------------------------------------

def _write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("criterion", "passed", "detail"))
        for name, ok, detail in rows:
            w.writerow([name, "pass" if ok else "fail", detail])


def reproduce_pendulum(cfg, out, overwrite=False):
    """Identification over ``cfg.seeds`` master seeds plus the PPO sanity run."""
    from ..experiments.pendulum_control import ppo_pendulum, sanity_check
    seeds = [cfg.seed + k for k in range(cfg.seeds)]
    checks = []
    for s in seeds:
        d = out / f"seed_{s}"
        for name in PENDULUM_STAGES:
            log.info("seed %d: %s", s, name)
            res = run_stage(name, cfg, d, seed=s, overwrite=overwrite)
        checks.append(res[1])
    need = math.ceil(0.8 * len(seeds))
    ordering = sum(all(c[k] for k in ("beats_ssm", "beats_sim_and_hist", "delta1_below_sim"))
                   for c in checks)
    rows = [("identification-ordering", ordering >= need,
             f"{ordering}/{len(seeds)} seeds hold every ordering (need {need})"),
            ("delta1-bound", all(c["delta1_bound"] for c in checks),
             f"{sum(c['delta1_bound'] for c in checks)}/{len(seeds)} seeds with delta1 <= 0.1")]
    if cfg.pendulum_ppo.get("enabled", True):
        ppo_cfg = cfg.pendulum_ppo_config()
        d = stages.stage_dir(out, "ppo", overwrite)
        before, after = [], []
        with open(d / "returns.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("seed", "untrained", "trained"))
            for s in seeds:
                log.info("seed %d: ppo", s)
                b, a, bundle = ppo_pendulum(s, ppo_cfg)
                bundle.save(d / f"seed_{s}", "policy")
                before.append(b)
                after.append(a)
                w.writerow([s, repr(b), repr(a)])
        ok, gain, spread = sanity_check(before, after)
        rows.append(("ppo-pendulum", ok, f"gain {gain:.4g} vs 5 x std {5 * spread:.4g}"))
    return rows


def reproduce_building(cfg, out, overwrite=False):
    for name in BUILDING_STAGES:
        log.info("building: %s", name)
        res = run_stage(name, cfg, out, overwrite=overwrite)
    checks = res[1]
    return [("building-comfort", checks["mdev_below_blinds1"],
             "learned Mdev below blinds-1 on every held-out model"),
            ("building-energy", checks["energy_ordering"],
             "3x energy weight uses less energy than no energy weight")]


def reproduce(cfg, overwrite=False):
    out = cfg.output_path
    out.mkdir(parents=True, exist_ok=True)
    cfg.dump(out / "config.yaml")
    rows = (reproduce_pendulum if cfg.system == "pendulum" else reproduce_building)(
        cfg, out, overwrite)
    d = stages.stage_dir(out, "summary", overwrite)
    _write_summary(d / "criteria.csv", rows)
    for name, ok, detail in rows:
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return all(ok for _, ok, _ in rows)


# -- argument parsing ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hybridid", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in STAGE_COMMANDS:
        s = sub.add_parser(name, help=f"run the {name} stage")
        s.add_argument("config", help="YAML experiment configuration")
        s.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (dotted path)")
        s.add_argument("--overwrite", action="store_true")
    r = sub.add_parser("reproduce", help="run every stage with pinned defaults")
    r.add_argument("experiment", choices=("pendulum", "building-desk"))
    r.add_argument("--config", help="optional YAML overriding the pinned defaults")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--overwrite", action="store_true")
    return p


def _reproduce_config(args):
    base = default_config(args.experiment)
    if args.config:
        cfg = load_config(args.config, args.overrides)
    elif args.overrides:
        import tempfile
        with tempfile.NamedTemporaryFile("w", suffix=".yaml", delete=False) as fh:
            base.dump(fh.name)
        cfg = load_config(fh.name, args.overrides)
        Path(fh.name).unlink()
    else:
        cfg = base
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    np.seterr(over="ignore")
    try:
        if args.command == "reproduce":
            ok = reproduce(_reproduce_config(args), args.overwrite)
            return EXIT_OK if ok else EXIT_ACCEPTANCE
        cfg = load_config(args.config, args.overrides)
        out = cfg.output_path
        out.mkdir(parents=True, exist_ok=True)
        res = run_stage(args.command, cfg, out, overwrite=args.overwrite)
        print(res[0] if isinstance(res, tuple) else res)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DivergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HybridIdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
