"""Command line entry point: ``bactcfd {convergence,cauchy,simulate,bench,check}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from . import checks, harness
from .harness import ConfigError, RunConfig, StudyError

log = logging.getLogger("bactcfd")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3

DEFAULT_M_LISTS = {"cncfd": "10,20,40", "adi": "20,40,80,160"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON file of RunConfig fields")
    common.add_argument("--scheme", choices=sorted(harness.SCHEMES))
    common.add_argument("--example", choices=sorted(harness.EXAMPLES))
    common.add_argument("--M", type=int)
    common.add_argument("--M-list", dest="M_list", help="comma-separated grid sizes")
    common.add_argument("--tau", type=float)
    common.add_argument("--tau-rule", dest="tau_rule", choices=["h2", "fixed"])
    common.add_argument("--T", type=float)
    common.add_argument("--snapshots", dest="snapshot_times", help="comma-separated times")
    common.add_argument("--out", dest="out_dir")
    common.add_argument("--tol", dest="solver_tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bactcfd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("convergence", parents=[common], help="errors against the exact solution")
    sub.add_parser("cauchy", parents=[common], help="nested-grid Cauchy errors (ADI)")
    sub.add_parser("simulate", parents=[common], help="long-time run with snapshots")
    sub.add_parser("bench", parents=[common], help="time both schemes at one M")
    sub.add_parser("check", parents=[common], help="run the property suites")
    return parser


def load_config(args: argparse.Namespace, defaults: dict) -> RunConfig:
    explicit: dict = {}
    if args.config:
        try:
            loaded = yaml.safe_load(Path(args.config).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {args.config} must hold a flat mapping")
        explicit.update(loaded)
    for key in ("scheme", "example", "M", "M_list", "tau", "tau_rule", "T", "snapshot_times",
                "out_dir", "solver_tol", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            explicit[key] = value
    if explicit.get("tau_rule") == "h2":
        if explicit.get("tau") is not None:
            raise ConfigError("tau and tau_rule h2 are mutually exclusive")
        defaults = {k: v for k, v in defaults.items() if k != "tau"}
    return RunConfig.from_mapping({**defaults, **explicit})


def _emit_table(table, cfg: RunConfig, name: str):
    print(table.pretty())
    if cfg.out_dir:
        for path in harness.write_outputs(table, cfg.out_dir, name):
            print(f"wrote {path}")


def cmd_convergence(cfg: RunConfig) -> int:
    M_list = cfg.M_list or harness.parse_list(DEFAULT_M_LISTS[cfg.scheme], int)
    table = harness.run_convergence_study(cfg.scheme, M_list, cfg.T, cfg.solver_tol,
                                          harness.make_problem(cfg.example))
    _emit_table(table, cfg, f"convergence_{cfg.scheme}.csv")
    return EXIT_OK


def cmd_cauchy(cfg: RunConfig) -> int:
    table = harness.run_cauchy_study(cfg.M_list or [20, 40], cfg.T, cfg.scheme, cfg.solver_tol,
                                     harness.make_problem(cfg.example))
    _emit_table(table, cfg, f"cauchy_{cfg.scheme}.csv")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    result = harness.run_simulation(cfg)
    for s in result.snapshots:
        note = f" (requested {s.requested_t:g})" if s.offset else ""
        print(f"t={s.t:g}{note}: max U={s.U.max():.6e} max V={s.V.max():.6e}")
    print(f"final: max U={result.max_u[-1]:.6e} max V={result.max_v[-1]:.6e}")
    if cfg.out_dir:
        paths = harness.write_outputs(result, cfg.out_dir)
        print(f"wrote {len(paths)} files to {cfg.out_dir}")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    cn, adi = harness.run_benchmark(cfg.M, cfg.T, cfg.solver_tol)
    print(f"M={cfg.M} cncfd={cn:.3f}s adi={adi:.3f}s ratio={cn / adi:.2f}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    results = checks.run_all(cfg.seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


COMMANDS = {
    "convergence": (cmd_convergence, {"example": "accuracy", "scheme": "adi"}),
    "cauchy": (cmd_cauchy, {"example": "noise", "scheme": "adi"}),
    "simulate": (cmd_simulate, {"example": "noise", "scheme": "adi", "M": 64, "tau": 0.1, "T": 25.0}),
    "bench": (cmd_bench, {"example": "accuracy", "M": 40}),
    "check": (cmd_check, {}),
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    func, defaults = COMMANDS[args.command]
    try:
        cfg = load_config(args, defaults)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("running %s with %s", args.command, cfg)
    try:
        return func(cfg)
    except StudyError as exc:
        if exc.table.rows:
            print(exc.table.pretty())
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ArithmeticError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
