"""Command-line entry point.

    kdv5 run <scenario> [--config PATH] [--seed S] [--out DIR]
    kdv5 sweep --config PATH [--out DIR]
    kdv5 calibrate [--out FILE]

Exit codes: 0 all assertions passed; 2 an assertion failed; 3 solver
failure (blow-up / no contraction); 4 config error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from pathlib import Path

from .calibration import compute_calibration, save_calibration
from .config import SCENARIOS, ScenarioConfig, parse_config, parse_config_text
from .errors import BlowUpError, ConfigError, NoContractionError
from .experiments import emit, run_scenario

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4


def _build_config(args, scenario: str | None = None) -> ScenarioConfig:
    overrides = {"seed": args.seed, "out": args.out}
    if args.config:
        return parse_config(args.config, scenario=scenario, **overrides)
    if scenario is None:
        raise ConfigError("missing required key 'scenario'")
    clean = {k: v for k, v in overrides.items() if v is not None}
    return ScenarioConfig(scenario=scenario, **clean)


def _execute(cfg: ScenarioConfig) -> int:
    outdir = Path(cfg.out) if cfg.out else Path("out") / cfg.scenario
    try:
        result = run_scenario(cfg)
    except (BlowUpError, NoContractionError) as exc:
        print(f"kdv5: solver failure in {cfg.scenario}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    emit(result, outdir)
    status = "pass" if result.passed else "FAIL"
    print(f"{cfg.scenario}: {status}  ->  {outdir}")
    return EXIT_OK if result.passed else EXIT_ASSERTION


def _cmd_run(args) -> int:
    cfg = _build_config(args, scenario=args.scenario)
    return _execute(cfg)


def _sweep_worker(payload) -> int:
    cfg_path, scenario, seed, outdir = payload
    args = argparse.Namespace(config=cfg_path, seed=seed, out=str(outdir))
    try:
        cfg = _build_config(args, scenario=scenario)
    except ConfigError as exc:
        print(f"kdv5: config error for {scenario}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute(cfg)


def _cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    scenarios = values.get("scenarios")
    if not scenarios:
        raise ConfigError("sweep config must list scenarios = name1, name2, ...")
    for name in scenarios:
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r} in sweep list")
    base = Path(args.out) if args.out else Path("out")
    payloads = [(args.config, name, args.seed, base / name) for name in scenarios]
    codes = []
    with concurrent.futures.ProcessPoolExecutor(max_workers=min(4, len(payloads))) as pool:
        for code in pool.map(_sweep_worker, payloads):
            codes.append(code)
    return max(codes)


def _cmd_calibrate(args) -> int:
    data = compute_calibration()
    out = Path(args.out) if args.out else Path("calibration.json")
    save_calibration(data, out)
    print(f"calibration written to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kdv5",
        description="Fifth-order KdV simulator and weighted-norm diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("scenario", choices=SCENARIOS)
    p_run.add_argument("--config", help="key = value config file")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenarios listed in a config")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cal = sub.add_parser("calibrate", help="recompute fitted constants and locks")
    p_cal.add_argument("--config", default=None, help="unused; reserved")
    p_cal.add_argument("--out", default=None, help="output file")
    p_cal.set_defaults(func=_cmd_calibrate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"kdv5: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
