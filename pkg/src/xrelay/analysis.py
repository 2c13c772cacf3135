"""Trial orchestration: alignment certificates, sum-rate sweeps and DoF slopes."""

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .aligner import PrecoderSet, solve_precoders, verify_alignment_condition
from .linalg import DEFAULT_RANK_TOL, numerical_rank
from .model import (InfeasibleConfigError, NoiseModel, check_feasibility, config_to_dict,
                    derive_seed, draw_channels, draw_symbols, stream_rng)
from .receiver import build_U, decode, effective_channel, zf_filter
from .scheme import assemble_extended_channel, relay_noise_map, simulate_slots

__all__ = [
    "CERTIFY_TOL",
    "AlignmentReport",
    "RatePoint",
    "DofEstimate",
    "CampaignResult",
    "certify",
    "sum_rate_trial",
    "post_zf_noise",
    "post_zf_sinr",
    "sum_rate_curve",
    "sweep",
    "fit_dof",
    "estimate_dof",
    "run_campaign",
]

log = logging.getLogger(__name__)

CERTIFY_TOL = 1e-8
MAX_REDRAWS = 20

# stream used for the random precoders of the misaligned control
_CONTROL_STREAM = 3


@dataclass
class AlignmentReport:
    """Outcome of one noiseless run of the scheme on one channel realisation."""

    config: dict
    seed: int
    feasible: bool
    interference_rank: list = field(default_factory=list)
    effective_rank: list = field(default_factory=list)
    max_eq12_violation: float = math.inf
    max_decode_error: float = math.inf
    relay_power: float = 0.0
    error: str = ""
    passed: bool = False

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def certify(cfg, seed=None, *, misalign=False, rank_tol=DEFAULT_RANK_TOL):
    """Run draw, solve, transmit and decode once and check every alignment property.

    With ``misalign=True`` the solved precoders are replaced by random ones,
    which should make the certificate fail.

    Never raises on numerical trouble; failures are recorded in the report.
    """
    if seed is not None:
        cfg = cfg.with_seed(seed)
    N, T = cfg.num_rx, cfg.num_slots
    feas = check_feasibility(cfg)
    report = AlignmentReport(config_to_dict(cfg), cfg.seed, feas.feasible)
    if not feas:
        report.error = "infeasible"
        return report
    ch = draw_channels(cfg)
    try:
        if misalign:
            pre = PrecoderSet.random(cfg, stream_rng(cfg, _CONTROL_STREAM))
        else:
            pre = solve_precoders(ch, cfg, rank_tol=rank_tol)
        d = draw_symbols(cfg)
        trace = simulate_slots(ch, pre, d, cfg)
        ext = assemble_extended_channel(ch, pre, cfg)
        U = build_U(cfg)
        report.relay_power = trace.relay_power()
        report.max_eq12_violation = verify_alignment_condition(ch, pre, cfg)
        errs = []
        for n in range(N):
            eff = effective_channel(n, ext, U, cfg)
            report.interference_rank.append(numerical_rank(eff.interference, rank_tol))
            report.effective_rank.append(numerical_rank(eff.H_hat, rank_tol))
            d_hat = decode(n, trace.per_rx[n], eff, rank_tol)
            errs.append(float(np.linalg.norm(d_hat - d[n]) / np.linalg.norm(d[n])))
        report.max_decode_error = max(errs)
    except np.linalg.LinAlgError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        return report
    report.passed = (all(r == N - 1 for r in report.interference_rank)
                     and all(r == T for r in report.effective_rank)
                     and report.max_eq12_violation <= CERTIFY_TOL
                     and report.max_decode_error <= CERTIFY_TOL)
    return report


def post_zf_noise(cfg, ch, pre, noise_var=1.0):
    """Noise power on every symbol estimate after zero-forcing, shape ``(num_rx, num_tx)``.

    Covers receiver noise and relay noise forwarded by the precoders; the
    aligned interference is removed exactly by the filter.
    """
    ext = assemble_extended_channel(ch, pre, cfg)
    U = build_U(cfg)
    T = cfg.num_slots
    out = np.zeros((cfg.num_rx, cfg.num_tx))
    for n in range(cfg.num_rx):
        W = zf_filter(effective_channel(n, ext, U, cfg))
        A = relay_noise_map(n, ch, pre, cfg)
        K = noise_var * (np.eye(T) + A @ A.conj().T)
        out[n] = np.real(np.einsum("it,ts,is->i", W, K, W.conj()))
    return out


def post_zf_sinr(cfg, ch, pre, snr_db, noise_var=1.0):
    """Per-symbol SINR ``(num_rx, num_tx)`` at transmit power ``10**(snr_db/10)``."""
    return 10.0 ** (snr_db / 10.0) / post_zf_noise(cfg, ch, pre, noise_var)


def _sum_rates(cfg, ch, pre, snr_db, noise_var=1.0):
    """Sum rate in bits per channel use for each SNR in `snr_db`."""
    noise = post_zf_noise(cfg, ch, pre, noise_var).reshape(-1)
    power = 10.0 ** (np.atleast_1d(np.asarray(snr_db, dtype=float)) / 10.0)
    rates = np.log2(1.0 + power[:, None] / noise[None, :]).sum(axis=1)
    return rates / cfg.num_slots


def sum_rate_trial(cfg, seed, snr_db, noise_var=1.0):
    """Sum rate of one channel realisation at `snr_db`, in bits per channel use.

    Aligned interference is nulled exactly by the zero-forcing filter, so the
    per-symbol SINR is ``P`` over the filtered noise power, where the noise
    includes relay noise forwarded by the precoders.

    Raises
    ------
    InfeasibleConfigError, numpy.linalg.LinAlgError
    """
    cfg = cfg.with_seed(seed)
    ch = draw_channels(cfg)
    pre = solve_precoders(ch, cfg)
    return float(_sum_rates(cfg, ch, pre, [snr_db], noise_var)[0])


def sum_rate_curve(cfg, seed, snr_grid, noise_var=1.0):
    """Sum rates of one realisation over a whole SNR grid."""
    cfg = cfg.with_seed(seed)
    ch = draw_channels(cfg)
    pre = solve_precoders(ch, cfg)
    return _sum_rates(cfg, ch, pre, snr_grid, noise_var)


@dataclass(frozen=True)
class RatePoint:
    snr_db: float
    sum_rate: float
    trials: int
    std_err: float


@dataclass(frozen=True)
class DofEstimate:
    slope: float
    theoretical: float
    rel_error: float
    fit_points: int


def theoretical_dof(cfg):
    return cfg.num_tx * cfg.num_rx / cfg.num_slots


def fit_dof(points, cfg):
    """Least-squares slope of sum rate against ``log2(SNR)`` over the upper half of the grid."""
    pts = sorted(points, key=lambda p: p.snr_db)
    k = math.ceil(len(pts) / 2)
    window = pts[len(pts) - k:]
    if len(window) < 2:
        raise ValueError(f"need at least 2 SNR points in the fit window, got {len(window)}")
    x = np.array([p.snr_db for p in window]) / 10.0 * np.log2(10.0)
    y = np.array([p.sum_rate for p in window])
    slope = float(np.polyfit(x, y, 1)[0])
    theory = theoretical_dof(cfg)
    return DofEstimate(slope, theory, abs(slope - theory) / theory, len(window))


# Worker functions live at module level so process pools can pickle them.

def _trial_cfg(cfg, master, index, attempt):
    return cfg.with_seed(derive_seed(master, index, attempt))


def _certify_work(args):
    cfg, master, index, misalign, rank_tol = args
    for attempt in range(MAX_REDRAWS):
        report = certify(_trial_cfg(cfg, master, index, attempt), misalign=misalign,
                         rank_tol=rank_tol)
        redrawable = "RankDeficient" in report.error or "IllConditioned" in report.error
        if misalign or not redrawable:
            return report, attempt
        log.info("trial %d: %s, redrawing", index, report.error)
    return report, attempt


def _sweep_work(args):
    cfg, master, index, snr_grid = args
    for attempt in range(MAX_REDRAWS):
        try:
            return sum_rate_curve(cfg, derive_seed(master, index, attempt), snr_grid), attempt
        except np.linalg.LinAlgError as exc:
            log.info("trial %d: %s, redrawing", index, exc)
    raise np.linalg.LinAlgError(f"trial {index}: no usable channel after {MAX_REDRAWS} draws")


def _map(fn, items, jobs):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def sweep(cfg, snr_grid, trials, seed, jobs=1):
    """Average sum rate over `trials` realisations at every SNR of the grid.

    Every realisation is evaluated at all grid points. Returns the rate
    points and the number of redraws.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    snr_grid = [float(s) for s in snr_grid]
    if not snr_grid:
        raise ValueError("empty SNR grid")
    _require_feasible(cfg)
    out = _map(_sweep_work, [(cfg, seed, i, snr_grid) for i in range(trials)], jobs)
    rates = np.array([r for r, _ in out])
    redraws = sum(a for _, a in out)
    mean = rates.mean(axis=0)
    if trials > 1:
        se = rates.std(axis=0, ddof=1) / np.sqrt(trials)
    else:
        se = np.zeros_like(mean)
    points = [RatePoint(s, float(m), trials, float(e)) for s, m, e in zip(snr_grid, mean, se)]
    return points, redraws


def estimate_dof(cfg, snr_grid, trials, seed, jobs=1):
    """Estimate the DoF as the high-SNR slope of the averaged sum rate."""
    points, _ = sweep(cfg, snr_grid, trials, seed, jobs)
    return fit_dof(points, cfg)


def _require_feasible(cfg):
    feas = check_feasibility(cfg)
    if not feas:
        raise InfeasibleConfigError(
            f"{cfg.num_unknowns} precoder unknowns < {cfg.num_equations} alignment equations "
            f"(margin {feas.margin})")


@dataclass
class CampaignResult:
    """Aggregated outcome of a campaign, with serialisers for the report files."""

    mode: str
    config: dict
    seed: int
    trials: int
    redraws: int = 0
    reports: list = field(default_factory=list)
    points: list = field(default_factory=list)
    dof: DofEstimate = None

    @property
    def passed(self):
        if self.mode == "certify":
            return all(r.passed for r in self.reports)
        if self.mode == "dof":
            return self.dof is not None
        return True

    @property
    def pass_rate(self):
        if not self.reports:
            return 0.0
        return sum(r.passed for r in self.reports) / len(self.reports)

    def to_json(self):
        doc = {
            "mode": self.mode,
            "config": self.config,
            "seed": self.seed,
            "trials": self.trials,
            "redraws": self.redraws,
            "passed": sum(r.passed for r in self.reports),
            "pass_rate": self.pass_rate,
            "pass": self.passed,
            "reports": [r.to_dict() for r in self.reports],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.mode == "sweep":
            w.writerow(["snr_db", "sum_rate", "trials", "std_err"])
            for p in self.points:
                w.writerow([repr(p.snr_db), repr(p.sum_rate), p.trials, repr(p.std_err)])
        elif self.mode == "dof":
            w.writerow(["slope", "theoretical", "rel_error", "fit_points"])
            e = self.dof
            w.writerow([repr(e.slope), repr(e.theoretical), repr(e.rel_error), e.fit_points])
        else:
            raise ValueError("certify campaigns are reported as JSON")
        return buf.getvalue()

    def render(self):
        return self.to_json() if self.mode == "certify" else self.to_csv()


def run_campaign(cfg, mode, params, seed, jobs=1):
    """Run a certify, sweep or dof campaign.

    Parameters
    ----------
    cfg : NetworkConfig
    mode : {"certify", "sweep", "dof"}
    params : dict
        ``trials`` for every mode; ``snr_grid`` (dB values) for sweep and
        dof; optional ``misalign`` and ``rank_tol`` for certify.
    seed : int
        Master seed; trial ``i`` uses a seed derived from ``(seed, i)``.
    jobs : int or None
        Worker processes; ``None`` uses every core. Results do not depend
        on it.

    Raises
    ------
    InfeasibleConfigError
        Before any trial runs, if the config fails the feasibility check.
    """
    trials = int(params.get("trials", 0))
    if trials < 1:
        raise ValueError("trials must be at least 1")
    _require_feasible(cfg)
    result = CampaignResult(mode, config_to_dict(cfg), seed, trials)
    if mode == "certify":
        items = [(cfg, seed, i, bool(params.get("misalign", False)),
                  float(params.get("rank_tol", DEFAULT_RANK_TOL))) for i in range(trials)]
        out = _map(_certify_work, items, jobs)
        result.reports = [r for r, _ in out]
        result.redraws = sum(a for _, a in out)
    elif mode in ("sweep", "dof"):
        result.points, result.redraws = sweep(cfg, params["snr_grid"], trials, seed, jobs)
        if mode == "dof":
            result.dof = fit_dof(result.points, cfg)
    else:
        raise ValueError(f"unknown campaign mode {mode!r}")
    return result
