"""Momentum-norm drift and the pointwise Lagrangian identity for b in [0, 1].

    python3 scripts/conservation_study.py --b 0 0.5 1 --n 2048 --t-end 0.5
"""
import argparse
import json
from pathlib import Path

from fochlab.experiments import run_conservation_study


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--t-end", type=float, default=0.5)
    ap.add_argument("--amplitude", type=float, default=0.05)
    ap.add_argument("--no-identity", action="store_true", help="skip the flow-map identity check")
    ap.add_argument("--out", type=Path, default=Path("conservation-out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for b in args.b:
        rep = run_conservation_study(b, amplitude=args.amplitude, t_end=args.t_end, n=args.n,
                                     identity=not args.no_identity)
        for name, series in rep.series.items():
            series.to_csv(args.out / f"b={b:g}_{name}.csv")
        rows.append(rep.scalars())
        print(json.dumps(rep.scalars(), sort_keys=True))
    (args.out / "summary.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
