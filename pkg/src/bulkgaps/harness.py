"""Monte Carlo experiments for the rescaled largest gaps.

Each replica r is sampled from the stream keyed by (seed, r), so results do
not depend on the worker count or on the order in which shards finish.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import sample
from .equilibrium import IntervalUnion, Kind, MinimizerReport, get_ensemble, report_for
from .errors import ConfigError, DomainError
from .gapstats import RescaleParams, extract_gaps, rescale_gap
from .limitlaws import GammaGumbel, ks_distance

MIN_N = 50


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: Kind
    n: int
    replicas: int
    interval: IntervalUnion
    k_list: tuple[int, ...] = (1,)
    x_list: tuple[float, ...] = (0.0,)
    seed: int = 0
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        try:
            kind = Kind.parse(self.ensemble)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if kind is Kind.CUSTOM:
            raise ConfigError("only GUE, LUE and JUE can be sampled")
        object.__setattr__(self, "ensemble", kind)
        if isinstance(self.interval, str):
            object.__setattr__(self, "interval", IntervalUnion.parse(self.interval))
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "x_list", tuple(float(x) for x in self.x_list))
        if self.replicas < 1:
            raise ConfigError("replicas must be at least 1")
        if self.n < MIN_N:
            raise ConfigError(f"n must be at least {MIN_N}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.k_list or min(self.k_list) < 1:
            raise ConfigError("k_list needs positive gap orders")
        if not self.x_list:
            raise ConfigError("x_list must be nonempty")
        try:
            self.interval.validate_for(get_ensemble(kind))
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        return {
            "ensemble": self.ensemble.value,
            "n": self.n,
            "replicas": self.replicas,
            "interval": str(self.interval),
            "k_list": list(self.k_list),
            "x_list": list(self.x_list),
            "seed": self.seed,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    report: MinimizerReport
    taus: dict                  # k -> array over replicas, NaN where the replica has < k gaps
    counts: np.ndarray          # replicas x len(x_list)
    mean_counts: np.ndarray
    var_counts: np.ndarray
    theory_means: np.ndarray
    ks: dict                    # k -> KS distance of tau_k to GammaGumbel(k, c_VI)
    missing: dict               # k -> number of replicas with fewer than k gaps
    metadata: dict = field(default_factory=dict)

    def law(self, k: int) -> GammaGumbel:
        return GammaGumbel(k, self.report.c_VI)

    def summary(self) -> dict:
        return {
            "config": self.config.echo(),
            "constants": self.report.as_dict(),
            "x": list(self.config.x_list),
            "mean_count": self.mean_counts.tolist(),
            "var_count": self.var_counts.tolist(),
            "theory_mean": self.theory_means.tolist(),
            "ks": {str(k): v for k, v in self.ks.items()},
            "missing": {str(k): v for k, v in self.missing.items()},
            "versions": self.metadata.get("versions", {}),
        }


def _replica_block(kind, n, seed, replicas, interval_text, q, S_I, k_max, x_list):
    # runs in a worker; returns (tau_k table, exceedance counts) for the given replicas
    I = IntervalUnion.parse(interval_text)
    params = RescaleParams(n, q, S_I)
    xs = np.asarray(x_list)
    top = np.full((len(replicas), k_max), np.nan)
    counts = np.zeros((len(replicas), xs.size), dtype=np.int64)
    for row, r in enumerate(replicas):
        gaps = extract_gaps(sample(kind, n, seed, r), I)
        taus = rescale_gap(params, gaps.values)
        taus = np.atleast_1d(taus)
        m = min(k_max, taus.size)
        top[row, :m] = taus[:m]
        # taus are sorted descending, so #{tau >= x} is a binary search
        counts[row] = np.searchsorted(-taus, -xs, side="right")
    return top, counts


def _shards(replicas: int, workers: int) -> list[list[int]]:
    size = max(1, math.ceil(replicas / (4 * workers)))
    return [list(range(s, min(s + size, replicas))) for s in range(0, replicas, size)]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    start = time.perf_counter()
    spec = get_ensemble(config.ensemble)
    report = report_for(spec, config.interval)
    k_max = max(config.k_list)
    args = (config.ensemble, config.n, config.seed)
    tail = (str(config.interval), report.q, report.S_I, k_max, config.x_list)
    shards = _shards(config.replicas, config.workers)
    if config.workers == 1:
        blocks = [_replica_block(*args, s, *tail) for s in shards]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_replica_block, *args, s, *tail) for s in shards]
            blocks = [f.result() for f in futures]
    top = np.vstack([b[0] for b in blocks])
    counts = np.vstack([b[1] for b in blocks])

    xs = np.asarray(config.x_list)
    taus = {k: top[:, k - 1].copy() for k in config.k_list}
    missing = {k: int(np.count_nonzero(np.isnan(v))) for k, v in taus.items()}
    ks = {}
    for k, v in taus.items():
        present = v[~np.isnan(v)]
        ks[k] = ks_distance(present, GammaGumbel(k, report.c_VI).cdf) if present.size else float("nan")
    ddof = 1 if config.replicas > 1 else 0
    return ExperimentResult(
        config=config,
        report=report,
        taus=taus,
        counts=counts,
        mean_counts=counts.mean(axis=0),
        var_counts=counts.var(axis=0, ddof=ddof),
        theory_means=np.exp(report.c_VI - xs),
        ks=ks,
        missing=missing,
        metadata={
            "versions": {"bulkgaps": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
            "wall_time": time.perf_counter() - start,
        },
    )


def convergence_sweep(config: ExperimentConfig, n_list) -> list[dict]:
    """KS distance of tau_1 to the k=1 limit law for each n in n_list."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list must be strictly increasing")
    rows = []
    for n in n_list:
        cfg = ExperimentConfig(config.ensemble, n, config.replicas, config.interval, (1,),
                               config.x_list, config.seed, config.workers)
        res = run_experiment(cfg)
        rows.append({"n": n, "ks_tau1": res.ks[1], "mean_count": res.mean_counts.tolist(),
                     "theory_mean": res.theory_means.tolist(), "missing": res.missing[1]})
    return rows


# ---------------------------------------------------------------------------
# persistence


def fmt(v) -> str:
    """Float with 17 significant digits; integers and strings verbatim."""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_result(result: ExperimentResult, output_dir, emit_cdf: bool = False) -> list[Path]:
    """Write summary.json, taus.csv, exceedance.csv (and cdf_k<k>.csv).

    Wall time is deliberately kept out of the files so that a fixed seed gives
    byte-identical output.
    """
    out = Path(output_dir)
    written = []
    summary = json.dumps(_json_safe(result.summary()), indent=2, sort_keys=True) + "\n"
    _atomic_write(out / "summary.json", summary)
    written.append(out / "summary.json")

    rows = []
    for r in range(result.config.replicas):
        for k in result.config.k_list:
            tau = result.taus[k][r]
            if not np.isnan(tau):
                rows.append((r, k, tau))
    _atomic_write(out / "taus.csv", csv_text(["replica", "k", "tau"], rows))
    written.append(out / "taus.csv")

    ex_rows = zip(result.config.x_list, result.mean_counts, result.var_counts, result.theory_means)
    _atomic_write(out / "exceedance.csv",
                  csv_text(["x", "mean_count", "var_count", "theory_mean"], ex_rows))
    written.append(out / "exceedance.csv")

    if emit_cdf:
        for k in result.config.k_list:
            v = np.sort(result.taus[k][~np.isnan(result.taus[k])])
            emp = np.arange(1, v.size + 1) / max(v.size, 1)
            theory = np.atleast_1d(result.law(k).cdf(v)) if v.size else v
            path = out / f"cdf_k{k}.csv"
            _atomic_write(path, csv_text(["tau", "empirical_cdf", "theory_cdf"], zip(v, emp, theory)))
            written.append(path)
    return written
