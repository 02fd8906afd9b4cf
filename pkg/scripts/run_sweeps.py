#!/usr/bin/env python3
"""Run every sweep config under configs/ and write CSVs into an output directory.

    python scripts/run_sweeps.py --out results [--trials 200] [config.toml ...]
"""
import argparse
import sys
import time
from pathlib import Path

from subsetcodec.cli import read_config
from subsetcodec.experiments import SweepConfig, locate_transition, run_ambiguity_sweep

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--trials", type=int, help="override the trial count (quick runs)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    paths = args.configs or sorted((ROOT / "configs").glob("*.toml"))
    args.out.mkdir(parents=True, exist_ok=True)
    for path in paths:
        cfg = read_config(str(path))
        cfg["output"] = str(args.out / Path(cfg.get("output", path.stem + ".csv")).name)
        cfg["threads"] = args.threads
        if args.trials:
            cfg["trials"] = args.trials
        config = SweepConfig.from_dict(cfg)
        t0 = time.perf_counter()
        result = run_ambiguity_sweep(config)
        result.write(config.output)
        try:
            tr = locate_transition(result)
            where = f"transition at {tr.rate:.3f} +- {tr.uncertainty:.2f}"
        except ValueError as exc:
            where = str(exc)
        print(f"{path.name}: {config.output} ({time.perf_counter() - t0:.1f} s), {where}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
