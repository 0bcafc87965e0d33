"""Solve, audit and plot both worked examples from the bundled configs.

Usage: python scripts/reproduce_examples.py [--out DIR]
"""

import argparse
import dataclasses
import json
from pathlib import Path

from plasma_riemann.cli import cmd_check, cmd_solve, load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out", help="root output directory")
    args = parser.parse_args()
    for name in ("example1", "example2"):
        cfg = dataclasses.replace(load_config(CONFIGS / f"{name}.json"), out=str(Path(args.out) / name))
        cmd_solve(cfg)
        status = cmd_check(cfg)
        summary = json.loads((Path(cfg.out) / "summary.json").read_text())
        audit = json.loads((Path(cfg.out) / "audit.json").read_text())
        print(f"{name}: T*={summary['T_star']:.10f} U={summary['U']:.10f} K={summary['K']:.3g} t0={summary['t0']}")
        print(f"  audits failed: {audit['failed'] or 'none'} (exit {status}); outputs in {cfg.out}")


if __name__ == "__main__":
    main()
