"""Command-line entry point.

Exit codes: 0 success, 2 configuration or protocol error, 3 numerical or
convergence error, 4 I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .config import load_config
from .exceptions import ConfigError, NumericError, OutputError
from .presets import load_preset
from .spectrum import spectrum_to_table
from .tomography import counts_from_csv, counts_to_csv, simulate_counts

log = logging.getLogger("esdrevival")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    log.info("wrote %s", path)


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def _load(args):
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = load_preset(args.preset or "fig2a")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args, cfg):
    return args.out if args.out is not None else cfg.output_path


def cmd_sweep(args):
    cfg = _load(args)
    rows, report = harness.run_sweep(cfg)
    out = _out(args, cfg)
    _write(out, harness.sweep_to_csv(rows))
    summary = harness.to_json(harness.sweep_summary(cfg, rows, report))
    if out is None:
        sys.stderr.write(summary)
    else:
        _write(Path(out).with_suffix(".crossings.json"), summary)


def cmd_state(args):
    cfg = _load(args)
    _write(_out(args, cfg), harness.to_json(harness.dump_state(cfg, args.x)))


def cmd_tomography(args):
    cfg = _load(args)
    counts = counts_from_csv(_read(args.counts)) if args.counts else None
    if args.save_counts:
        if counts is None:
            rho, _ = harness.state_at(cfg, args.x)
            t = cfg.tomography
            counts = simulate_counts(rho, t.n_per_setting, t.seed, t.noiseless)
        _write(args.save_counts, counts_to_csv(counts))
    _write(_out(args, cfg), harness.to_json(harness.run_tomography(cfg, args.x, counts)))


def cmd_chsh(args):
    cfg = _load(args)
    _write(_out(args, cfg), harness.to_json(harness.run_chsh(cfg, args.x)))


def cmd_spectrum(args):
    cfg = _load(args)
    _write(_out(args, cfg), spectrum_to_table(cfg.spectrum))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="esdrevival",
        description="Entanglement collapse and revival in an etalon-filtered dephasing channel.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_x=False, default_x=0.0):
        p.add_argument("--config", help="scenario config file (key = value)")
        p.add_argument("--preset", choices=("fig2a", "fig2b"), help="built-in scenario")
        p.add_argument("--out", help="output path (default: output.path or stdout)")
        p.add_argument("--seed", type=int, help="override tomography.seed")
        if with_x:
            p.add_argument("--x", type=float, default=default_x, help="evolution parameter in lambda0 units")
        return p

    common(sub.add_parser("sweep", help="CSV of kappa_b, gamma, C, P over the sweep range")).set_defaults(
        func=cmd_sweep
    )
    common(sub.add_parser("state", help="model density matrix at --x as JSON"), True).set_defaults(
        func=cmd_state
    )
    p = common(sub.add_parser("tomography", help="simulated 16-setting tomography at --x"), True)
    p.add_argument("--counts", help="read counts CSV instead of simulating")
    p.add_argument("--save-counts", help="also write the counts CSV used")
    p.set_defaults(func=cmd_tomography)
    common(sub.add_parser("chsh", help="CHSH report at --x"), True, 560.0).set_defaults(func=cmd_chsh)
    common(sub.add_parser("spectrum", help="spectral line table of the scenario")).set_defaults(
        func=cmd_spectrum
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except NumericError as exc:
        log.error("numerical error: %s", exc)
        return EXIT_NUMERIC
    except OutputError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
