#!/usr/bin/env python3
"""Critical-mass study in the undamped regime (mu = 0, r = 0, chi = 1).

Runs the same boundary-centered Gaussian at masses 2*pi and 6*pi.  With
reflecting walls a boundary bump acts like a doubled interior mass, so
4*pi/chi is the dichotomy line: the low mass spreads out and completes,
the high mass aggregates until the sup-norm trigger fires.  Writes both
trajectories and blowup_report.json under results/blowup/.
"""

import sys
from pathlib import Path

from kslogistic.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "blowup",
                "--config", str(HERE.parent / "configs" / "blowup.json"),
                "--out", str(HERE.parent / "results" / "blowup"),
            ]
            + sys.argv[1:]
        )
    )
