"""Command-line front end.

Subcommands ``feasibility``, ``certify``, ``sweep`` and ``dof``. Exit codes:
0 success, 1 certification failure, 2 infeasible configuration, 64 usage
error, 74 I/O error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import run_campaign
from .linalg import DEFAULT_RANK_TOL
from .model import check_feasibility, config_from_dict, config_to_dict

__all__ = ["Invocation", "UsageError", "parse_invocation", "run", "main"]

log = logging.getLogger("xrelay")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_IO = 74

DEFAULT_SEED = 0
DEFAULT_SNR = "30:60:10"
DEFAULT_TRIALS = {"certify": 100, "sweep": 200, "dof": 200}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _antenna_list(text):
    text = text.strip()
    if not text:
        return []
    try:
        values = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed antenna list {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"antenna counts must be positive: {text!r}")
    return values


def parse_snr_grid(text):
    """``start:stop:step`` in dB, stop included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric SNR grid {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"SNR grid {text!r} is empty")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (keys m, n, relay_antennas, "
                        "channel_mode, seed, constellation); flags override it")
    common.add_argument("--tx", type=int, help="number of transmitters")
    common.add_argument("--rx", type=int, help="number of receivers")
    common.add_argument("--relay-antennas", type=_antenna_list,
                        help="comma-separated antenna count per relay")
    common.add_argument("--channel", choices=["varying", "constant"])
    common.add_argument("--constellation", choices=["gaussian", "qpsk"])
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default: stdout)")

    trials = _Parser(add_help=False)
    trials.add_argument("--trials", type=int)
    trials.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: all cores)")

    snr = _Parser(add_help=False)
    snr.add_argument("--snr", type=parse_snr_grid, default=None,
                     help=f"SNR grid start:stop:step in dB (default {DEFAULT_SNR})")

    parser = _Parser(prog="xrelay", description="Relay-aided interference alignment "
                     "for X-networks without transmitter CSI.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("feasibility", parents=[common], help="check the antenna condition")
    c = sub.add_parser("certify", parents=[common, trials], help="certify alignment per trial")
    c.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance")
    sub.add_parser("sweep", parents=[common, trials, snr], help="sum rate vs SNR (CSV)")
    sub.add_parser("dof", parents=[common, trials, snr], help="DoF slope estimate (CSV)")
    return parser


@dataclass(frozen=True)
class Invocation:
    subcommand: str
    config: object
    out: str = None
    trials: int = 0
    snr_grid: tuple = ()
    jobs: int = None
    tol: float = DEFAULT_RANK_TOL


def parse_invocation(argv):
    """Parse and validate command-line arguments.

    Raises
    ------
    UsageError
        With the offending flag or value in the message.
    OSError
        If the ``--config`` file cannot be read.
    """
    args = _build_parser().parse_args(argv)
    doc = {}
    if args.config:
        with open(args.config) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"--config: {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"--config: {args.config}: expected a JSON object")
    overrides = {"m": args.tx, "n": args.rx, "relay_antennas": args.relay_antennas,
                 "channel_mode": args.channel, "seed": args.seed,
                 "constellation": args.constellation}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if "m" not in doc or "n" not in doc:
        raise UsageError("--tx and --rx are required unless given by --config")
    doc.setdefault("seed", DEFAULT_SEED)
    try:
        cfg = config_from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None

    cmd = args.subcommand
    trials = getattr(args, "trials", None)
    if trials is None:
        trials = DEFAULT_TRIALS.get(cmd, 0)
    if cmd != "feasibility" and trials < 1:
        raise UsageError(f"--trials must be at least 1, got {trials}")
    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        raise UsageError(f"--jobs must be at least 1, got {jobs}")
    snr = getattr(args, "snr", None)
    if snr is None:
        snr = parse_snr_grid(DEFAULT_SNR)
    tol = getattr(args, "tol", DEFAULT_RANK_TOL)
    if tol < 0:
        raise UsageError("--tol must be non-negative")
    return Invocation(cmd, cfg, args.out, trials, tuple(snr), jobs, tol)


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run(inv):
    """Execute an invocation and return the process exit code."""
    cfg = inv.config
    log.info("resolved config: %s", json.dumps(config_to_dict(cfg), sort_keys=True))
    feas = check_feasibility(cfg)
    if inv.subcommand == "feasibility":
        doc = {"config": config_to_dict(cfg), "feasible": feas.feasible, "margin": feas.margin,
               "unknowns": cfg.num_unknowns, "equations": cfg.num_equations,
               "dof": cfg.num_tx * cfg.num_rx / cfg.num_slots}
        _emit(json.dumps(doc, indent=2) + "\n", inv.out)
        return EXIT_OK if feas else EXIT_INFEASIBLE
    if not feas:
        log.error("infeasible: %d unknowns < %d equations (margin %d)",
                  cfg.num_unknowns, cfg.num_equations, feas.margin)
        return EXIT_INFEASIBLE
    params = {"trials": inv.trials, "snr_grid": list(inv.snr_grid), "rank_tol": inv.tol}
    result = run_campaign(cfg, inv.subcommand, params, cfg.seed, inv.jobs)
    if result.redraws:
        log.info("%d channel redraws", result.redraws)
    _emit(result.render(), inv.out)
    if inv.subcommand == "certify":
        log.info("pass rate %.3f over %d trials", result.pass_rate, result.trials)
    elif inv.subcommand == "dof":
        log.info("slope %.4f vs %.4f (rel error %.2e)", result.dof.slope,
                 result.dof.theoretical, result.dof.rel_error)
    return EXIT_OK if result.passed else EXIT_FAIL


def main(argv=None):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    pkg_log = logging.getLogger("xrelay")
    pkg_log.addHandler(handler)
    pkg_log.setLevel(logging.INFO)
    try:
        inv = parse_invocation(sys.argv[1:] if argv is None else argv)
        return run(inv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        pkg_log.removeHandler(handler)
