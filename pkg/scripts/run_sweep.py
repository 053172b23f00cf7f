#!/usr/bin/env python3
"""3x3 (chi, mu) sweep with fixed initial data.

Produces results/sweep/summary.csv (one row per cell: sup norms, the
composite bounds L and N, ratio diagnostics, per-check verdicts) and
digest.json with the ratio spread across cells.
"""

import sys
from pathlib import Path

from kslogistic.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "sweep",
                "--config", str(HERE.parent / "configs" / "sweep.json"),
                "--out", str(HERE.parent / "results" / "sweep"),
                "--workers", "4",
            ]
            + sys.argv[1:]
        )
    )
