"""Run every CLI command on every shipped config and summarize the exit codes."""

import argparse
import sys
from pathlib import Path

from wiggly.cli import main

HERE = Path(__file__).resolve().parent
COMMANDS = ["kinetic-relation", "contact-surface", "flow", "verify"]


def run(out_root: Path, with_sweep: bool) -> int:
    commands = COMMANDS + (["sweep"] if with_sweep else [])
    worst = 0
    table = []
    for cfg in sorted((HERE / "configs").glob("*.json")):
        for cmd in commands:
            out = out_root / cfg.stem
            print(f"== {cfg.stem} {cmd}", flush=True)
            code = main([cmd, "--config", str(cfg), "--out", str(out)])
            table.append((cfg.stem, cmd, code))
            worst = max(worst, code)
    print()
    for name, cmd, code in table:
        print(f"{name:16s} {cmd:18s} exit {code}")
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--sweep", action="store_true", help="also run the eps sweep per config")
    args = ap.parse_args()
    # coarse_ode.json is expected to fail verification, so do not propagate its code
    run(args.out, args.sweep)
    sys.exit(0)
