#!/usr/bin/env python3
"""Canonical bounded run: chi=5, mu=1 on the unit square, all checks on.

Writes trajectory.csv, checks.json and final snapshots under
results/canonical/ and exits nonzero if any bound check fails.
"""

import sys
from pathlib import Path

from kslogistic.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "run",
                "--config", str(HERE.parent / "configs" / "canonical.json"),
                "--out", str(HERE.parent / "results" / "canonical"),
            ]
            + sys.argv[1:]
        )
    )
