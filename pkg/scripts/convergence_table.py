#!/usr/bin/env python3
"""Reproduce the convergence table: estimates over growing path lengths.

Thin wrapper over ``dexpou experiment`` with the reference configuration
(theta=2, p=0.6, eta=1.2, phi=1.6, h=0.02, lengths 50..3000, 20 seeds).
Pass extra flags through, e.g. ``--seeds 50 --out mytable.csv``.
"""

import sys

from dexpou.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "--out", "convergence_table.csv", *sys.argv[1:]]))
