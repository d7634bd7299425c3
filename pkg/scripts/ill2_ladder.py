"""Ill2 ladder: blockwise initial-data estimates for large N plus norm growth
runs on the resolvable rungs.

    python3 scripts/ill2_ladder.py --estimate-N 8 16 32 --run-N 8 10 12 --q 2 inf
"""
import argparse
import json
import math
from pathlib import Path

from fochlab.experiments import Ill2Config, ill2_estimates_blockwise, run_inflation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--estimate-N", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--run-N", type=int, nargs="*", default=[8, 10, 12])
    ap.add_argument("--q", type=float, nargs="+", default=[2.0, math.inf])
    ap.add_argument("--out", type=Path, default=Path("ill2-out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    report = {"estimates": [], "runs": []}
    for q in args.q:
        for N in args.estimate_N:
            row = ill2_estimates_blockwise(N, q)
            report["estimates"].append(row)
            print(json.dumps(row, sort_keys=True))
        for N in args.run_N:
            rep = run_inflation(Ill2Config(N, q))
            tag = f"N={N}_q={q:g}"
            for name, series in rep.series.items():
                series.to_csv(args.out / f"{tag}_{name}.csv")
            report["runs"].append(rep.scalars())
            print(tag, f"growth {rep.growth_ratio:.6f}", f"steepening {rep.steepening:.3f}")
    (args.out / "ladder.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")


if __name__ == "__main__":
    main()
