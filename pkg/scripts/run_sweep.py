"""Print the 16-row convention matrix as a table."""

import argparse

from qhverify import qdouble


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--t", default="2", help="p/q or 'symbolic'")
    args = p.parse_args()
    dp = qdouble.load_default(args.t)
    rows = qdouble.convention_sweep(dp, args.order, args.degree)
    cols = qdouble.SWEEP_COLUMNS
    width = max(map(len, rows))
    print(f"{'convention':{width}}  " + "  ".join(cols))
    for label, row in rows.items():
        cells = "  ".join(f"{('pass' if row[c] else 'FAIL'):{len(c)}}" for c in cols)
        print(f"{label:{width}}  {cells}")


if __name__ == "__main__":
    main()
