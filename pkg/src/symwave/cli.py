"""``symwave`` command line.

Exit codes: 0 when every criterion passes (or every equation meets the
parity hypotheses), 1 when something fails, 2 for configuration or input
errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, PdeSyntaxError, UnsupportedEquation
from .harness import (EXPERIMENT_NAMES, config_to_json, default_config, list_experiments,
                      load_config, run_experiment, validate_config)


def _run_one(config):
    rep = run_experiment(config)
    return config.name, str(config.resolved_output_dir), rep.passed, rep.summary_lines()


def cmd_run(args) -> int:
    try:
        configs = [load_config(p) for p in args.configs]
        configs += [default_config(n, seed=args.seed) for n in args.experiment or []]
        if args.all:
            configs += [default_config(n, seed=args.seed) for n in EXPERIMENT_NAMES]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not configs:
        print("error: give a config file, --experiment NAME or --all", file=sys.stderr)
        return 2
    dirs = [str(c.resolved_output_dir) for c in configs]
    if len(set(dirs)) != len(dirs):
        print("error: two experiments would share an output directory", file=sys.stderr)
        return 2
    try:
        if args.jobs > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                outcomes = list(pool.map(_run_one, configs))
        else:
            outcomes = [_run_one(c) for c in configs]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = True
    for name, out, passed, lines in outcomes:
        for line in lines:
            print(line)
        print(f"{name}: {'PASS' if passed else 'FAIL'} -> {out}/report.json")
        ok &= passed
    return 0 if ok else 1


def cmd_validate(args) -> int:
    status = 0
    for path in args.configs:
        try:
            problems = validate_config(path)
        except OSError as exc:
            print(f"{path}: cannot read ({exc})", file=sys.stderr)
            status = 2
            continue
        if problems:
            status = max(status, 1)
            for msg in problems:
                print(f"{path}: {msg}")
        else:
            print(f"{path}: ok")
    return status


def cmd_list(args) -> int:
    entries = list_experiments()
    width = max(len(n) for n, _ in entries)
    for name, desc in entries:
        print(f"{name:<{width}}  {desc}")
    return 0


def cmd_config(args) -> int:
    sys.stdout.write(config_to_json(default_config(args.name)))
    return 0


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--param expects NAME=VALUE, got {item!r}")
        out[key.strip()] = Fraction(value.strip())
    return out


def cmd_parity(args) -> int:
    from .pde_parity import BUILTIN_CORPUS, BUILTIN_PARAMS, check_equation, read_equation_file

    try:
        params = dict(BUILTIN_PARAMS, **_params(args.param))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sources = []
    if args.builtin:
        sources += list(BUILTIN_CORPUS.values())
    for item in args.equations:
        path = Path(item)
        if "=" not in item and path.is_file():
            sources += read_equation_file(path)
        else:
            sources.append(item)
    if not sources:
        print("error: no equations given", file=sys.stderr)
        return 2
    status = 0
    for src in sources:
        try:
            rep = check_equation(src, params)
        except (PdeSyntaxError, UnsupportedEquation) as exc:
            print(json.dumps({"source": src, "error": f"{type(exc).__name__}: {exc}"}, sort_keys=True))
            status = 2
            continue
        print(rep.to_json())
        if not rep.hypotheses_met:
            status = max(status, 1)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symwave", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run experiments from config files or defaults")
    r.add_argument("configs", nargs="*", help="JSON config files")
    r.add_argument("--experiment", "-e", action="append", choices=EXPERIMENT_NAMES,
                   help="run an experiment with its default parameters (repeatable)")
    r.add_argument("--all", action="store_true", help="run every experiment with defaults")
    r.add_argument("--seed", type=int, default=0, help="seed for --experiment/--all runs")
    r.add_argument("--jobs", "-j", type=int, default=1, help="run experiments in parallel processes")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="check config files without running them")
    v.add_argument("configs", nargs="+")
    v.set_defaults(func=cmd_validate)

    li = sub.add_parser("list", help="list the experiments")
    li.set_defaults(func=cmd_list)

    c = sub.add_parser("config", help="print the default config of an experiment")
    c.add_argument("name", choices=EXPERIMENT_NAMES)
    c.set_defaults(func=cmd_config)

    p = sub.add_parser("parity", help="check the x-parity hypotheses of equations")
    p.add_argument("equations", nargs="*", help="equation strings or files (one per line, # comments)")
    p.add_argument("--builtin", action="store_true", help="include the KdV, BBM, DP and KP corpus")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="bind a named constant, e.g. kappa=1/2")
    p.set_defaults(func=cmd_parity)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
