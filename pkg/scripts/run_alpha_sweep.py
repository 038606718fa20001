#!/usr/bin/env python3
"""Run the bundled dimming-depth sweep (BER and conditioning versus alpha)."""

import sys
from pathlib import Path

from dstc.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    config = ROOT / "configs" / "alpha_qled2x2.cfg"
    out = ROOT / "out" / "alpha"
    sys.exit(main(["simulate", "--config", str(config), "--out", str(out), *sys.argv[1:]]))
