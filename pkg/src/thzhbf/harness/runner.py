"""Monte Carlo execution of an experiment and CSV emission of the results."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..channel import generate_channel
from ..errors import ConfigError, DegenerateChannelError, DegenerateStepError, SimulationError
from ..ici import none_profile
from ..mathcore import derive_stream
from ..objectives import sum_rate
from ..precoding import HybridPrecoder, run_conventional, run_no_ici_baseline, run_reduced
from .config import ExperimentConfig, SweepPoint

__all__ = [
    "CSV_HEADER",
    "MAX_REDRAWS",
    "ResultRow",
    "ResultTable",
    "run_experiment",
    "timing_comparison",
    "format_csv",
    "write_csv",
    "write_precoder_csv",
]

log = logging.getLogger(__name__)

CSV_HEADER = [
    "sweep_param", "sweep_value", "snr_db", "method", "se_mean_bps_hz",
    "se_std", "realizations", "time_ms_mean", "seed",
]
MAX_REDRAWS = 10


@dataclass(frozen=True)
class ResultRow:
    sweep_param: str
    sweep_value: float
    snr_db: float
    method: str
    se_mean: float
    se_std: float
    realizations: int
    time_ms_mean: float
    seed: int

    def sort_key(self):
        return (self.sweep_value, self.snr_db, self.method)


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)

    def sorted_rows(self) -> list[ResultRow]:
        return sorted(self.rows, key=ResultRow.sort_key)

    def lookup(self, method: str, sweep_value: float | None = None, snr_db: float | None = None):
        """Rows matching the given method (and optionally sweep value / SNR)."""
        return [
            r for r in self.sorted_rows()
            if r.method == method
            and (sweep_value is None or r.sweep_value == sweep_value)
            and (snr_db is None or r.snr_db == snr_db)
        ]


@dataclass
class _Outcome:
    se: dict            # (snr, method) -> spectral efficiency
    millis: dict        # (snr, method) -> precoder wall-clock
    traces: dict        # (snr, method) -> OptTrace
    precoders: dict     # (snr, method) -> HybridPrecoder
    redraws: int = 0


def _psi(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def _run_method(method, H, ici_eval, psi, settings, init_stream):
    if method == "conventional":
        return run_conventional(H, ici_eval, psi, settings, init_stream)
    if method == "reduced":
        return run_reduced(H, ici_eval, psi, settings, init_stream)
    return run_no_ici_baseline(H, psi, settings, init_stream)


def _realization(cfg: ExperimentConfig, point: SweepPoint, r: int) -> _Outcome:
    base = derive_stream(cfg.seed, r)
    settings = cfg.pipeline_for(point)
    K = point.channel.num_subcarriers
    ici_eval = point.ici.profile(K)
    last_error = None
    for attempt in range(MAX_REDRAWS + 1):
        draw = base.child(attempt)
        H = generate_channel(point.channel, draw.child(0))
        out = _Outcome({}, {}, {}, {}, attempt)
        try:
            for method in cfg.methods:
                cached = None
                for snr in point.snr_db:
                    psi = _psi(snr)
                    if cached is None or method != "reduced":
                        t0 = time.perf_counter()
                        # every method starts from the same analog initialization
                        precoder, trace = _run_method(method, H, ici_eval, psi, settings, draw.child(1))
                        millis = 1e3 * (time.perf_counter() - t0)
                        cached = (precoder, trace, millis)
                    precoder, trace, millis = cached
                    profile = none_profile(K) if method == "no-ici-ideal" else ici_eval
                    key = (snr, method)
                    out.se[key] = sum_rate(H, precoder.W, precoder.F, profile, psi)
                    out.millis[key] = millis
                    out.traces[key] = trace
                    out.precoders[key] = precoder
            return out
        except (DegenerateChannelError, DegenerateStepError) as exc:
            last_error = exc
            log.info("realization %d attempt %d degenerate (%s); redrawing", r, attempt, exc)
    raise SimulationError(
        f"realization {r} at {cfg.sweep.axis}={point.value}: "
        f"{MAX_REDRAWS} redraws all degenerate (last error: {last_error})"
    )


def _fmt_value(v: float) -> str:
    return f"{v:.12g}"


def run_experiment(
    cfg: ExperimentConfig,
    threads: int = 1,
    trace_dir=None,
    keep_precoders: bool = False,
):
    """Run every sweep point x SNR x method over ``cfg.realizations`` draws.

    Realization ``r`` uses streams derived from ``(cfg.seed, r)`` only, so
    all methods and all sweep points share the same random draws, and the
    result does not depend on ``threads``.

    Returns the :class:`ResultTable`; with ``keep_precoders`` a second value
    maps ``(sweep_value, realization)`` to the per-realization outcome.
    """
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    table = ResultTable()
    kept = {}
    trace_dir = Path(trace_dir) if trace_dir is not None else None
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)

    for point in cfg.points():
        indices = range(cfg.realizations)
        if threads == 1:
            outcomes = [_realization(cfg, point, r) for r in indices]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(lambda r: _realization(cfg, point, r), indices))
        redraws = sum(o.redraws for o in outcomes)
        if redraws:
            log.warning("%s=%s: %d degenerate draws redrawn", cfg.sweep.axis, point.value, redraws)
        for snr in point.snr_db:
            for method in cfg.methods:
                key = (snr, method)
                se = np.array([o.se[key] for o in outcomes])
                ms = np.array([o.millis[key] for o in outcomes])
                table.rows.append(
                    ResultRow(cfg.sweep.axis, point.value, float(snr), method,
                              float(np.mean(se)), float(np.std(se)), len(outcomes),
                              float(np.mean(ms)), cfg.seed)
                )
                if trace_dir is not None:
                    for r, o in enumerate(outcomes):
                        name = (f"trace_{cfg.sweep.axis}-{_fmt_value(point.value)}"
                                f"_snr{_fmt_value(snr)}_{method}_r{r}.csv")
                        o.traces[key].write_csv(trace_dir / name)
        if keep_precoders:
            for r, o in enumerate(outcomes):
                kept[(point.value, r)] = o
    return (table, kept) if keep_precoders else table


def timing_comparison(cfg: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Per-method wall-clock of the conventional and reduced pipelines on
    identical channels; channel generation is outside the timed region."""
    both = replace(cfg, methods=("conventional", "reduced"))
    return run_experiment(both, threads=threads)


def format_csv(table: ResultTable, include_timing: bool = True) -> str:
    """CSV text of ``table``: fixed header, sorted rows, 12 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.sorted_rows():
        t = r.time_ms_mean if include_timing else math.nan
        w.writerow([
            r.sweep_param, _fmt_value(r.sweep_value), _fmt_value(r.snr_db), r.method,
            _fmt_value(r.se_mean), _fmt_value(r.se_std), r.realizations,
            _fmt_value(t), r.seed,
        ])
    return buf.getvalue()


def write_csv(table: ResultTable, path, include_timing: bool = True) -> None:
    """Write ``table`` with a fixed header and deterministic row order.

    Wall-clock numbers vary between runs; pass ``include_timing=False`` to
    write ``nan`` in ``time_ms_mean`` and get byte-identical files.
    """
    path = Path(path)
    text = format_csv(table, include_timing)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def write_precoder_csv(precoder: HybridPrecoder, directory, prefix: str = "") -> None:
    """Export ``W`` (``row,col,re,im``) and ``F`` (``subcarrier,row,col,re,im``)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / f"{prefix}W.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        for (n, m), z in np.ndenumerate(precoder.W):
            w.writerow([n, m, repr(float(z.real)), repr(float(z.imag))])
    with (directory / f"{prefix}F.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subcarrier", "row", "col", "re", "im"])
        for (k, n, u), z in np.ndenumerate(precoder.F):
            w.writerow([k, n, u, repr(float(z.real)), repr(float(z.imag))])
