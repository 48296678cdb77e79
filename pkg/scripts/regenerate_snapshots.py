"""Rewrite the golden files under tests/snapshots from the current code."""

import json
from pathlib import Path

from qhverify import qdouble

OUT = Path(__file__).resolve().parent.parent / "tests" / "snapshots"


def dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def main():
    dp = qdouble.load_default("2")
    OUT.mkdir(exist_ok=True)
    (OUT / "bialgebra_N4.json").write_text(dump(qdouble.verify_bialgebra(dp, 4).to_json()))
    (OUT / "sweep_N3_D2_t2.json").write_text(dump(qdouble.convention_sweep(dp, 3, 2)))
    print(f"wrote snapshots to {OUT}")


if __name__ == "__main__":
    main()
