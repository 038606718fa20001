"""Command-line front end: design codes, run sweeps, print efficiency tables.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible code
design, 3 failed identifiability check, 4 simulation producing a sweep point
where every trial failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .configio import ConfigBundle, ConfigError, load_config
from .dimming import ConstraintViolationError, build_dimming_matrix, validate_dimming_matrix
from .experiments import (
    IdentifiabilityError,
    check_scenario_identifiability,
    flatten_curves,
    run_alpha_sweep,
    run_ber_nmse_sweep,
    spectral_efficiency,
    write_curves_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_UNIQUE = 3
EXIT_DEGENERATE = 4

# Reference operating points printed by `eta --table2` (block_len = 10).
_TABLE2_CASES = ((3, 2, 8), (3, 6, 20), (3, 10, 32), (4, 2, 12), (4, 2, 16))
_TABLE2_BLOCK_LEN = 10

_CONFIG_HELP = """\
configuration file keys (see configs/qled2x2.cfg for an annotated example):
  [scenario]      k_t, l_t, k_r, l_r, n_states, block_len
  [dimming]       p_m, alpha, columns (optional)
  [experiment]    mode (ber|alpha|both), snr_grid_db, alpha_grid,
                  alpha_sweep_snr_db, n_symbols_total, base_seed,
                  receivers (ZF VLC-KRF plain-CSK), channel_model
                  (gaussian|diagonal), noiseless
  [chromaticity]  channel_0 = x, y  ... one pair per color channel
  [constellation] point_00 ... point_11 = one intensity level per channel
"""


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this tool reserves 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _load(path: str) -> ConfigBundle:
    return load_config(path)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_eta(args) -> int:
    if args.table2:
        if args.dims:
            return _fail("eta: --table2 takes no positional arguments", EXIT_USAGE)
        print("k_t l_t n_states | eta_zf | eta_krf | gain_%")
        for k_t, l_t, n_states in _TABLE2_CASES:
            se = spectral_efficiency(k_t, l_t, n_states, _TABLE2_BLOCK_LEN)
            print(
                f"{k_t:3d} {l_t:3d} {n_states:8d} | {se.zf:.4f} | {se.krf:.4f} | {se.gain_percent:.2f}"
            )
        return EXIT_OK
    if len(args.dims) != 4:
        return _fail("eta: expected k_t l_t n_states block_len (or --table2)", EXIT_USAGE)
    if any(v < 1 for v in args.dims):
        return _fail("eta: all arguments must be positive integers", EXIT_USAGE)
    se = spectral_efficiency(*args.dims)
    print(f"eta_zf={se.zf:.4f} eta_krf={se.krf:.4f} gain_percent={se.gain_percent:.2f}")
    return EXIT_OK


def cmd_design(args) -> int:
    try:
        bundle = _load(args.config)
        spec = bundle.scenario.dimming_spec()
        code = build_dimming_matrix(spec)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except ConstraintViolationError as exc:
        return _fail(f"infeasible dimming code: {exc}", EXIT_INFEASIBLE)

    report = validate_dimming_matrix(code, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix_path = out / "dimming_matrix.csv"
    with matrix_path.open("w") as fh:
        for row in code:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def verdict(ok: bool) -> str:
        return "pass" if ok else "FAIL"

    lines = [
        "dimming code design report",
        f"n_states={spec.n_states} leds={spec.n_tx} p_m={spec.p_m} alpha={spec.alpha}",
        f"entries within [0, 1]: {verdict(report.entries_in_range)}",
        f"column means equal p_m (max error {report.column_mean_error:.3e}): "
        f"{verdict(report.column_mean_error <= 1e-12)}",
        f"rank {report.rank} of {report.n_tx}: {verdict(report.rank == report.n_tx)}",
        f"kruskal rank {report.kruskal} of {report.n_tx}: {verdict(report.kruskal == report.n_tx)}",
        f"condition number: {report.condition_number:.6f}",
        f"all checks: {verdict(report.ok)}",
    ]
    report_path = out / "design_report.txt"
    report_path.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {matrix_path} and {report_path}")
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def _summary_lines(name: str, curves) -> list[str]:
    lines = [f"[{name}]"]
    for p in flatten_curves(curves):
        lines.append(
            f"x={p.x:g} receiver={p.receiver} ber={p.ber:.6e} nmse={p.nmse:.6e} "
            f"cond={p.cond:.6f} bits={p.n_bits} errors={p.n_errors} "
            f"trials={p.n_trials} failures={p.failures}"
        )
    return lines


def _degenerate(curves) -> bool:
    return any(p.failures == p.n_trials for p in flatten_curves(curves))


def cmd_simulate(args) -> int:
    started = _utc_now()
    try:
        bundle = _load(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)
    if bundle.experiment is None:
        return _fail(f"{args.config}: missing [experiment] section", EXIT_USAGE)
    cfg = bundle.experiment
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    if args.noiseless:
        cfg = dataclasses.replace(cfg, noiseless=True)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    summary: list[str] = []
    degenerate = False
    try:
        if bundle.mode in ("ber", "both"):
            curves = run_ber_nmse_sweep(cfg, constellation=bundle.constellation)
            outputs.append(write_curves_csv(curves, out / "ber_nmse.csv"))
            summary += _summary_lines("ber_nmse", curves)
            degenerate |= _degenerate(curves)
        if bundle.mode in ("alpha", "both"):
            curves = run_alpha_sweep(cfg, constellation=bundle.constellation)
            outputs.append(write_curves_csv(curves, out / "alpha_sweep.csv"))
            summary += _summary_lines("alpha_sweep", curves)
            degenerate |= _degenerate(curves)
    except IdentifiabilityError as exc:
        return _fail(f"identifiability check failed: {exc}", EXIT_NOT_UNIQUE)
    except ConstraintViolationError as exc:
        return _fail(f"infeasible dimming code: {exc}", EXIT_INFEASIBLE)

    summary_path = out / "summary.txt"
    summary_path.write_text("\n".join(summary) + "\n")
    outputs.append(summary_path)

    manifest = {
        "config": str(args.config),
        "tool_version": __version__,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": [p.name for p in outputs],
        "experiment": {
            "scenario": dataclasses.asdict(cfg.scenario),
            "mode": bundle.mode,
            "snr_grid_db": list(cfg.snr_grid_db),
            "alpha_grid": list(cfg.alpha_grid),
            "alpha_sweep_snr_db": cfg.alpha_sweep_snr_db,
            "n_symbols_total": cfg.n_symbols_total,
            "n_trials": cfg.n_trials,
            "base_seed": cfg.base_seed,
            "receivers": list(cfg.receivers),
            "channel_model": cfg.channel_model,
            "noiseless": cfg.noiseless,
        },
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    for line in summary:
        print(line)
    print(f"wrote {', '.join(str(p) for p in outputs + [manifest_path])}")
    if degenerate:
        return _fail("at least one sweep point lost every trial to receiver failures",
                     EXIT_DEGENERATE)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        bundle = _load(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)
    if bundle.experiment is None:
        return _fail(f"{args.config}: missing [experiment] section", EXIT_USAGE)
    cfg = bundle.experiment
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=args.seed)
    report = check_scenario_identifiability(cfg)
    need = 2 * report.n_columns + 2
    total = report.k_gains + report.k_symbols + report.k_code
    print(f"k-rank(channel)={report.k_gains}")
    print(f"k-rank(symbols)={report.k_symbols}")
    print(f"k-rank(code)={report.k_code}")
    print(f"columns={report.n_columns}")
    print(f"k-rank sum {total} >= {need}: {'yes' if report.kruskal_sum_ok else 'no'}")
    print(f"full-rank symbol shortcut: {'yes' if report.full_rank_symbol_path else 'no'}")
    print(f"diagonal-channel shortcut: {'yes' if report.diagonal_channel_path else 'no'}")
    print(f"uniqueness: {'unique' if report.unique else 'NOT unique'}")
    return EXIT_OK if report.unique else EXIT_NOT_UNIQUE


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="dstc",
        description="Dimming-aware space-time coded VLC link toolbox.",
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p_design = sub.add_parser("design", help="build and validate a dimming code")
    p_design.add_argument("--config", required=True, help="configuration file")
    p_design.add_argument("--out", default=".", help="output directory")
    p_design.set_defaults(func=cmd_design)

    p_sim = sub.add_parser("simulate", help="run the Monte Carlo sweeps of a config")
    p_sim.add_argument("--config", required=True, help="configuration file")
    p_sim.add_argument("--seed", type=int, default=None, help="override base_seed")
    p_sim.add_argument("--noiseless", action="store_true", help="disable channel noise")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_eta = sub.add_parser("eta", help="print spectral efficiencies")
    p_eta.add_argument("dims", nargs="*", type=int, metavar="N",
                       help="k_t l_t n_states block_len")
    p_eta.add_argument("--table2", action="store_true",
                       help="print the five reference rows (block_len=10)")
    p_eta.set_defaults(func=cmd_eta)

    p_check = sub.add_parser("check", help="run the identifiability check of a config")
    p_check.add_argument("--config", required=True, help="configuration file")
    p_check.add_argument("--seed", type=int, default=None, help="override base_seed")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
