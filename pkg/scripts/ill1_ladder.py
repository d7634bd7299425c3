"""Ill1 ladder: initial-data estimates and norm growth at b = 5/3.

    python3 scripts/ill1_ladder.py --N 5 6 7 --out ill1-out
"""
import argparse
import json
from pathlib import Path

from fochlab.experiments import Ill1Config, ill1_estimates, run_inflation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[5, 6, 7])
    ap.add_argument("--estimates-only", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("ill1-out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for N in args.N:
        cfg = Ill1Config(N)
        row = {"N": N, "n": cfg.n, **ill1_estimates(cfg)}
        row["B1_inf_1_scaled"] = row["B1_inf_1"] * N ** 0.1
        row["ux2_B0_inf_1_scaled"] = row["ux2_B0_inf_1"] * N ** -0.6
        if not args.estimates_only:
            rep = run_inflation(cfg)
            row.update(rep.scalars())
            for name, series in rep.series.items():
                series.to_csv(args.out / f"N={N}_{name}.csv")
        rows.append(row)
        print(json.dumps(row, sort_keys=True))
    (args.out / "ladder.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
