"""Command line: ``hfwaves <experiment> [--config FILE] [overrides]``.

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 usage or config
error, 3 numerical failure at run time.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import KINDS, ConfigError, ExperimentConfig

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _override_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", dest="formats", help="comma-separated subset of json,csv,svg")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--flux", help="catalog key or flux spec such as '[u^2/2, u^3/3]'")
    p.add_argument("--M", type=float)
    p.add_argument("--u-bar", dest="u_bar", type=float)
    p.add_argument("--v", type=_floats, help="direction, e.g. 0,1")
    p.add_argument("--gamma", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--profile", help="initial profile, e.g. 'sine(amp=1,k=1)'")
    p.add_argument("--s", type=_floats, help="smoothness indices, e.g. 0.25,0.5")
    p.add_argument("--p", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--eps", type=_floats)
    p.add_argument("--N", type=int)
    p.add_argument("--t-eval", dest="t_eval", type=float)
    p.add_argument("--t-factor", dest="t_factor", type=float)
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="set any config field, e.g. --set 'tolerances={\"alpha\": 0.05}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hfwaves", description="High-frequency wave experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        _override_flags(sub.add_parser(kind))
    cat = sub.add_parser("catalog", help="list built-in fluxes with expected d_F and alpha_sup")
    cat.add_argument("--format", dest="formats", default="text", choices=["text", "json"])
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError({"--config": str(exc)})
        data = ExperimentConfig.from_json(text).to_dict()
        if data["kind"] != args.command:
            raise ConfigError({"kind": f"config is for {data['kind']!r}, command is {args.command!r}"})
    data["kind"] = args.command
    for key in ("out", "threads", "seed", "flux", "M", "u_bar", "v", "gamma", "q", "profile", "s", "p", "A", "eps",
                "N", "t_eval", "t_factor"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.formats is not None:
        data["formats"] = [f.strip() for f in args.formats.split(",") if f.strip()]
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError({"--set": f"expected KEY=JSON, got {item!r}"})
        try:
            data[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            data[key.strip()] = raw
    return ExperimentConfig.from_dict(data)


def write_outputs(record, cfg: ExperimentConfig) -> Path:
    from .plotting import line_plot_svg

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if "json" in cfg.formats:
        (out / "results.json").write_text(json.dumps(record.results_document(), sort_keys=True, indent=1) + "\n")
    if "csv" in cfg.formats:
        for name, table in record.tables.items():
            (out / f"{_safe(name)}.csv").write_text(table.to_csv())
    if "svg" in cfg.formats:
        for name, spec in record.plots.items():
            spec = dict(spec)
            xl, yl, log = spec.pop("xlabel", "x"), spec.pop("ylabel", "y"), spec.pop("log", True)
            (out / f"{_safe(name)}.svg").write_text(line_plot_svg(spec, name, xl, yl, log))
    with open(out / "runs.jsonl", "a") as fh:
        fh.write(json.dumps(record.log_line(), sort_keys=True) + "\n")
    return out


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def _print_catalog(fmt: str) -> None:
    from .experiments import catalog_listing, jsonable

    rows = catalog_listing()
    if fmt == "json":
        print(json.dumps(jsonable(rows), indent=1))
        return
    for r in rows:
        print(f"{r['key']:<22} d_F = {str(r['expected_d_F']):<4} alpha_sup = {r['alpha_sup']:<4} {r['spec']}  ({r['note']})")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command == "catalog":
        _print_catalog(args.formats)
        return EXIT_OK
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        for k, msg in exc.problems.items():
            print(f"config error: {k}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(cfg.threads))

    from .experiments import run_experiment
    from .flux import FluxSyntaxError

    try:
        record = run_experiment(cfg)
    except FluxSyntaxError as exc:
        print(f"flux error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"{cfg.kind}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, __import__("numpy").linalg.LinAlgError) as exc:
        print(f"{cfg.kind}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = write_outputs(record, cfg)
    for name, ok in record.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"results in {out}  (config {record.config_hash})")
    return EXIT_OK if record.passed else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
