#!/usr/bin/env python3
"""Run the bundled QLED 2x2 BER/NMSE sweep and write CSV next to this script.

Equivalent to `dstc simulate --config configs/qled2x2.cfg --out out/ber`;
kept as a script so the sweep can be tweaked in code.
"""

import sys
from pathlib import Path

from dstc.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    config = ROOT / "configs" / "qled2x2.cfg"
    out = ROOT / "out" / "ber"
    sys.exit(main(["simulate", "--config", str(config), "--out", str(out), *sys.argv[1:]]))
