"""Monte Carlo sweep engine and command-line interface.

Averages per-realization sum rates over a random channel ensemble across an
SNR grid, for the feedback designs and the reference schemes. The ensemble is
paired: the channel of trial ``i`` is a pure function of
``(master_seed, i)``, so every scheme and every SNR point sees the identical
set of channels and results are bit-identical for any worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from .alignment import build_system
from .channel import ChannelDistribution, check_nondegeneracy, sample_channel
from .errors import ConfigError, DegenerateChannel
from .optimizer import direction_pair, exact_ia_svd, line_search_theta
from .rates import baseline_rates

SCHEMES = ("max-sinr", "exact-ia-svd", "time-sharing", "treat-as-noise", "ergodic-ia")
FEEDBACK_SCHEMES = frozenset({"max-sinr", "exact-ia-svd"})
BASELINE_SCHEMES = frozenset({"time-sharing", "treat-as-noise", "ergodic-ia"})

CSV_HEADER = "snr_db,scheme,avg_sum_rate_bits,std_error,trials_used,degenerate_count"

_MASK64 = (1 << 64) - 1


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Mix ``(master_seed, trial_index)`` into a 64-bit channel seed.

    SplitMix64 finalizer over a golden-ratio stride, so trial seeds are
    well spread and independent of execution order.
    """
    x = (int(master_seed) + (int(trial_index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True)
class SweepConfig:
    """Sweep settings; defaults match the CLI defaults."""

    snr_db_min: float = 0.0
    snr_db_max: float = 40.0
    snr_db_step: float = 5.0
    trials: int = 1000
    master_seed: int = 1
    cross_gain_db: float = 0.0
    schemes: tuple = SCHEMES
    grid_points: int = 181
    output_path: str | None = None

    def validate(self):
        if self.snr_db_step <= 0:
            raise ConfigError(f"snr-step must be positive, got {self.snr_db_step}")
        if self.snr_db_max < self.snr_db_min:
            raise ConfigError("snr-max must not be below snr-min")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.grid_points < 2:
            raise ConfigError(f"grid-points must be at least 2, got {self.grid_points}")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(
                f"unknown scheme(s) {', '.join(unknown)}; valid schemes: {', '.join(SCHEMES)}"
            )
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("schemes must not repeat")

    def snr_grid_db(self) -> np.ndarray:
        count = int(math.floor((self.snr_db_max - self.snr_db_min) / self.snr_db_step + 1e-9)) + 1
        return self.snr_db_min + self.snr_db_step * np.arange(count)

    def distribution(self) -> ChannelDistribution:
        return ChannelDistribution(
            direct_gain_std=1.0, cross_gain_std=10.0 ** (self.cross_gain_db / 20.0)
        )


@dataclass
class TrialRecord:
    """One channel realization's per-scheme rates across the SNR grid."""

    trial_index: int
    channel_seed: int
    degenerate: bool
    rates: dict = field(default_factory=dict)        # scheme -> (n_snr,) array
    theta_star: dict = field(default_factory=dict)   # feedback scheme -> (n_snr,) array


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    scheme: str
    avg_sum_rate_bits: float
    std_error: float
    trials_used: int
    degenerate_count: int


@dataclass
class SweepResult:
    """Aggregated sweep output: one row per (snr_db, scheme), plus the config echo."""

    config: SweepConfig
    rows: list


def _run_trial(trial_index: int, config: SweepConfig) -> TrialRecord:
    seed = derive_trial_seed(config.master_seed, trial_index)
    H = sample_channel(seed, config.distribution())
    snr_db = config.snr_grid_db()
    powers = 10.0 ** (snr_db / 10.0)
    n = len(powers)
    record = TrialRecord(trial_index=trial_index, channel_seed=seed, degenerate=False)

    if BASELINE_SCHEMES & set(config.schemes):
        base = [baseline_rates(H, float(P)) for P in powers]
        if "time-sharing" in config.schemes:
            record.rates["time-sharing"] = np.array([b.time_sharing for b in base])
        if "treat-as-noise" in config.schemes:
            record.rates["treat-as-noise"] = np.array([b.treat_as_noise for b in base])
        if "ergodic-ia" in config.schemes:
            record.rates["ergodic-ia"] = np.array([b.ergodic_ia for b in base])

    feedback = [s for s in config.schemes if s in FEEDBACK_SCHEMES]
    if feedback:
        for s in feedback:
            record.rates[s] = np.full(n, np.nan)
            record.theta_star[s] = np.full(n, np.nan)
        try:
            report = check_nondegeneracy(H)
            if not report.overall:
                raise DegenerateChannel("degenerate trial", report)
            dirs = direction_pair(build_system(H)) if "max-sinr" in feedback else None
            for j, P in enumerate(powers):
                if "exact-ia-svd" in feedback:
                    res = exact_ia_svd(H, float(P))
                    record.rates["exact-ia-svd"][j] = res.sum_rate
                    record.theta_star["exact-ia-svd"][j] = res.theta_star
                if "max-sinr" in feedback:
                    res = line_search_theta(H, float(P), dirs, grid_points=config.grid_points)
                    record.rates["max-sinr"][j] = res.sum_rate
                    record.theta_star["max-sinr"][j] = res.theta_star
        except DegenerateChannel:
            record.degenerate = True
    return record


def _aggregate(records, config: SweepConfig):
    snr_db = config.snr_grid_db()
    rows = []
    trials = len(records)
    degenerate_total = sum(1 for rec in records if rec.degenerate)
    keep = np.array([not rec.degenerate for rec in records], dtype=bool)
    for j, snr in enumerate(snr_db):
        for scheme in sorted(set(config.schemes)):
            values = np.array([rec.rates[scheme][j] for rec in records])
            if scheme in FEEDBACK_SCHEMES:
                values = values[keep]
                used = int(keep.sum())
                degenerate = degenerate_total
            else:
                used = trials
                degenerate = 0
            avg = float(values.mean()) if used > 0 else float("nan")
            std_err = float(values.std(ddof=1) / math.sqrt(used)) if used > 1 else 0.0
            rows.append(
                SweepRow(
                    snr_db=float(snr),
                    scheme=scheme,
                    avg_sum_rate_bits=avg,
                    std_error=std_err,
                    trials_used=used,
                    degenerate_count=degenerate,
                )
            )
    return rows


def run_sweep(config: SweepConfig, workers: int = 1, keep_records: bool = False) -> SweepResult:
    """Run the Monte Carlo sweep; deterministic for a fixed config at any worker count.

    Trials are independent work units reduced in trial-index order. With
    ``keep_records`` the per-trial records are attached to the result as
    ``result.records`` for diagnostics.
    """
    config.validate()
    if workers < 1:
        raise ValueError("workers must be at least 1")
    task = partial(_run_trial, config=config)
    indices = range(config.trials)
    if workers == 1:
        records = [task(i) for i in indices]
    else:
        chunk = max(1, config.trials // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(task, indices, chunksize=chunk))
    result = SweepResult(config=config, rows=_aggregate(records, config))
    if keep_records:
        result.records = records
    return result


def _fmt(x: float) -> str:
    return format(x, ".10g")


def render_csv(result: SweepResult) -> str:
    """Render rows as CSV text, sorted by (snr_db, scheme), 10 significant digits."""
    lines = [CSV_HEADER]
    for row in result.rows:
        lines.append(
            f"{_fmt(row.snr_db)},{row.scheme},{_fmt(row.avg_sum_rate_bits)},"
            f"{_fmt(row.std_error)},{row.trials_used},{row.degenerate_count}"
        )
    return "\n".join(lines) + "\n"


def render_json(result: SweepResult) -> str:
    """JSON mirror of the sweep result with the same field names as the CSV."""
    payload = {"config": asdict(result.config), "rows": [asdict(row) for row in result.rows]}
    return json.dumps(payload, indent=2) + "\n"


def emit_csv(result: SweepResult, path: str):
    """Write the CSV rendering to ``path``."""
    with open(path, "w", newline="") as handle:
        handle.write(render_csv(result))


def emit_json(result: SweepResult, path: str):
    """Write the JSON rendering to ``path``."""
    with open(path, "w", newline="") as handle:
        handle.write(render_json(result))


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config problems exit 1, not argparse's 2
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="fbia",
        description="Average sum rate of the feedback alignment designs and reference "
        "schemes over random 3-user interference channels, swept across SNR.",
    )
    p.add_argument("--snr-min", type=float, default=0.0, help="lowest SNR in dB (default 0)")
    p.add_argument("--snr-max", type=float, default=40.0, help="highest SNR in dB (default 40)")
    p.add_argument("--snr-step", type=float, default=5.0, help="SNR grid step in dB (default 5)")
    p.add_argument("--trials", type=int, default=1000, help="channel realizations (default 1000)")
    p.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    p.add_argument(
        "--cross-gain-db",
        type=float,
        default=None,
        help="mean square of cross gains in dB (default 0; -3 for the weak-interference scenario)",
    )
    p.add_argument(
        "--schemes",
        type=str,
        default=",".join(SCHEMES),
        help=f"comma-separated subset of: {', '.join(SCHEMES)} (default all)",
    )
    p.add_argument(
        "--grid-points", type=int, default=181, help="theta line-search grid size (default 181)"
    )
    p.add_argument("--output", type=str, default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument(
        "--scenario",
        choices=("fig1", "fig2"),
        default=None,
        help="preset: fig1 = unit cross gains, fig2 = cross gains at -3 dB",
    )
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes (default 1)")
    return p


def parse_config(argv=None):
    """Parse CLI arguments into a validated (SweepConfig, options) pair."""
    args = _build_parser().parse_args(argv)
    cross = args.cross_gain_db
    if cross is None:
        cross = -3.0 if args.scenario == "fig2" else 0.0
    schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    config = SweepConfig(
        snr_db_min=args.snr_min,
        snr_db_max=args.snr_max,
        snr_db_step=args.snr_step,
        trials=args.trials,
        master_seed=args.seed,
        cross_gain_db=cross,
        schemes=schemes,
        grid_points=args.grid_points,
        output_path=args.output,
    )
    config.validate()
    if args.workers < 1:
        raise ConfigError(f"workers must be at least 1, got {args.workers}")
    return config, args


def cli_main(argv=None) -> int:
    """CLI entry point. Exit codes: 0 success, 1 config error, 2 I/O error."""
    try:
        config, opts = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    try:
        result = run_sweep(config, workers=opts.workers)
        text = render_json(result) if opts.format == "json" else render_csv(result)
        if config.output_path:
            with open(config.output_path, "w", newline="") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    raise SystemExit(cli_main(sys.argv[1:]))
