#!/usr/bin/env python3
"""Audit the optical side of a dimming code: average power and chromaticity
before and after dimming, over a long uniform symbol stream.

Usage: audit_dimming.py [config] [n_rows]
Defaults to the bundled TLED 2x2 design with 10^4 symbol rows.
"""

import sys
from pathlib import Path

from dstc.configio import load_config
from dstc.experiments import audit_power_color

ROOT = Path(__file__).resolve().parent.parent


def run(config_path: str, n_rows: int) -> int:
    bundle = load_config(config_path)
    audit = audit_power_color(bundle.scenario, n_rows=n_rows, table=bundle.chromaticity)
    print(f"scenario: {bundle.scenario}")
    print(f"average power target (p_m):   {audit.power_target}")
    print(f"average power after dimming:  {audit.relative_power:.6f}")
    print(f"chromaticity before dimming:  ({audit.chroma_before[0]:.6f}, {audit.chroma_before[1]:.6f})")
    print(f"chromaticity after dimming:   ({audit.chroma_after[0]:.6f}, {audit.chroma_after[1]:.6f})")
    print(f"chromaticity shift:           ({audit.chroma_shift[0]:.3e}, {audit.chroma_shift[1]:.3e})")
    return 0


if __name__ == "__main__":
    config = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "configs" / "tled2x2_design.cfg")
    n_rows = int(sys.argv[2]) if len(sys.argv) > 2 else 10_000
    sys.exit(run(config, n_rows))
