"""Run every config in scripts/configs through the CLI and summarize exit codes.

    python3 scripts/run_experiments.py [--out runs] [config.json ...]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from hfwaves import cli

HERE = Path(__file__).resolve().parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    args = ap.parse_args()
    paths = args.configs or sorted((HERE / "configs").glob("*.json"))
    worst = 0
    for path in paths:
        kind = json.loads(path.read_text())["kind"]
        t0 = time.perf_counter()
        code = cli.main([kind, "--config", str(path), "--out", str(args.out / path.stem)])
        print(f"== {path.name}: exit {code} in {time.perf_counter() - t0:.1f} s\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
