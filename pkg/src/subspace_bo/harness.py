"""Seeded batch experiments: config parsing, execution, CSV/manifest output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .acquisition import InnerOptBudget
from .benchmarks import BenchmarkSpec, make_benchmark
from .bounds import BoundParams, regret_bound_curve
from .errors import InvalidConfigError
from .gp import KernelFamily
from .optimizers import (
    MsUcbConfig,
    RunRecord,
    run_gpucb,
    run_line_baseline,
    run_msucb,
    run_random_search,
)
from .subspace import SplitSpec

log = logging.getLogger(__name__)

RAW_HEADER = ["t", "best_observed", "best_true", "log_dist", "r_t", "R_t",
              "pool_size", "acq_evals", "elapsed_s"]
SUMMARY_HEADER = ["optimizer", "t", "n_runs", "n_failed",
                  "log_dist_mean", "log_dist_std", "log_dist_median",
                  "R_t_mean", "R_t_std", "R_t_median"]
WORKERS_ENV = "SUBSPACE_BO_WORKERS"

_TOP_KEYS = {"benchmark", "optimizers", "horizon", "repeats", "base_seed", "output_dir",
             "noise_std", "parallel_workers", "init_points", "record_timing"}
_BENCH_KEYS = {"family", "dim"}
_BUDGET_KEYS = {"restarts_per_subspace", "max_evals_per_restart", "total_eval_cap",
                "local_starts"}
_BO_KEYS = {"kind", "label", "delta", "a_const", "b_const", "kernel", "refit_every",
            "hyper_budget", "budget"}
_OPT_KEYS = {
    "msucb": _BO_KEYS | {"low_dim", "n0", "alpha", "permute"},
    "gpucb": _BO_KEYS,
    "line": _BO_KEYS | {"permute"},
    "random": {"kind", "label"},
}


def fmt(v) -> str:
    """CSV cell: 17 significant digits for floats, empty for missing."""
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return format(v, ".17g")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str
    label: str
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: BenchmarkSpec
    optimizers: tuple[OptimizerSpec, ...]
    horizon: int
    repeats: int = 1
    base_seed: int = 0
    output_dir: Path = Path("results")
    noise_std: float = 0.01
    parallel_workers: int = 1
    init_points: int = 20
    record_timing: bool = False

    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.repeats)]


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise InvalidConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidConfigError(f"{WORKERS_ENV} must be >= 1")
    return n


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed TOML document.  Unknown keys are errors."""
    _reject_unknown(raw, _TOP_KEYS, "top level")
    for key in ("benchmark", "optimizers", "horizon"):
        if key not in raw:
            raise InvalidConfigError(f"missing required key {key!r}")
    bench = raw["benchmark"]
    if not isinstance(bench, dict):
        raise InvalidConfigError("[benchmark] must be a table")
    _reject_unknown(bench, _BENCH_KEYS, "[benchmark]")
    try:
        spec = BenchmarkSpec(bench["family"], int(bench["dim"]))
    except KeyError as exc:
        raise InvalidConfigError(f"[benchmark] missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise InvalidConfigError(str(exc)) from None

    opts = raw["optimizers"]
    if not isinstance(opts, list) or not opts:
        raise InvalidConfigError("[[optimizers]] must list at least one optimizer")
    parsed = []
    for i, table in enumerate(opts):
        kind = table.get("kind")
        if kind not in _OPT_KEYS:
            raise InvalidConfigError(
                f"optimizers[{i}].kind must be one of {sorted(_OPT_KEYS)}, got {kind!r}"
            )
        _reject_unknown(table, _OPT_KEYS[kind], f"optimizers[{i}]")
        if "budget" in table:
            _reject_unknown(table["budget"], _BUDGET_KEYS, f"optimizers[{i}].budget")
        options = {k: v for k, v in table.items() if k not in ("kind", "label")}
        parsed.append(OptimizerSpec(kind, str(table.get("label", kind)), options))
    labels = [o.label for o in parsed]
    if len(set(labels)) != len(labels):
        raise InvalidConfigError(f"optimizer labels must be unique: {labels}")

    cfg = ExperimentConfig(
        benchmark=spec,
        optimizers=tuple(parsed),
        horizon=int(raw["horizon"]),
        repeats=int(raw.get("repeats", 1)),
        base_seed=int(raw.get("base_seed", 0)),
        output_dir=Path(raw.get("output_dir", "results")),
        noise_std=float(raw.get("noise_std", 0.01)),
        parallel_workers=int(raw.get("parallel_workers", _default_workers())),
        init_points=int(raw.get("init_points", 20)),
        record_timing=bool(raw.get("record_timing", False)),
    )
    if cfg.horizon < 1 or cfg.repeats < 1 or cfg.init_points < 1:
        raise InvalidConfigError("horizon, repeats and init_points must be >= 1")
    if cfg.parallel_workers < 1:
        raise InvalidConfigError("parallel_workers must be >= 1")
    if cfg.noise_std < 0:
        raise InvalidConfigError("noise_std must be >= 0")
    # build every optimizer config once so errors surface before any run
    for o in cfg.optimizers:
        if o.kind != "random":
            _bo_config(o, cfg, cfg.base_seed)
    return cfg


def load_config(path: str | Path) -> tuple[ExperimentConfig, bytes]:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise InvalidConfigError(f"{path}: {exc}") from None
    return parse_config(raw), text


def _bo_config(o: OptimizerSpec, cfg: ExperimentConfig, seed: int) -> MsUcbConfig:
    opt = o.options
    D = cfg.benchmark.dim
    d = int(opt.get("low_dim", 1))
    try:
        perm = None
        if opt.get("permute", False):
            perm = tuple(int(i) for i in np.random.default_rng(seed).permutation(D))
        return MsUcbConfig(
            split=SplitSpec(D, d if o.kind == "msucb" else min(1, D - 1), perm),
            horizon=cfg.horizon,
            n0=int(opt.get("n0", 1)),
            alpha=int(opt.get("alpha", 0)),
            delta=float(opt.get("delta", 0.1)),
            a_const=float(opt.get("a_const", 1.0)),
            b_const=float(opt.get("b_const", 1.0)),
            init_points=cfg.init_points,
            budget=InnerOptBudget(**opt.get("budget", {})),
            kernel=KernelFamily(opt.get("kernel", "matern52")),
            refit_every=int(opt.get("refit_every", 5)),
            hyper_budget=int(opt.get("hyper_budget", 60)),
            seed=seed,
        )
    except (ValueError, TypeError) as exc:
        raise InvalidConfigError(f"optimizer {o.label!r}: {exc}") from None


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def execute(o: OptimizerSpec, cfg: ExperimentConfig, seed: int) -> RunRecord:
    obj = make_benchmark(cfg.benchmark, noise_std=cfg.noise_std)
    if o.kind == "random":
        rec = run_random_search(obj, cfg.horizon, seed, init_points=cfg.init_points)
    else:
        runner = {"msucb": run_msucb, "gpucb": run_gpucb, "line": run_line_baseline}[o.kind]
        rec = runner(obj, _bo_config(o, cfg, seed))
    rec.optimizer = o.label
    return rec


def raw_csv(record: RunRecord, record_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RAW_HEADER)
    for row in record.rows:
        w.writerow([
            fmt(row.t),
            fmt(row.best_observed),
            fmt(row.best_true),
            fmt(record.log_dist(row)),
            fmt(row.r_t),
            fmt(row.R_t),
            fmt(row.pool_size),
            fmt(row.acq_evals),
            fmt(row.elapsed) if record_timing else "",
        ])
    return buf.getvalue()


def raw_path(out_dir: Path, label: str, run_index: int) -> Path:
    return out_dir / "raw" / f"{label}_run{run_index:03d}.csv"


def _run_task(task) -> dict:
    o, cfg, run_index = task
    seed = cfg.base_seed + run_index
    path = raw_path(cfg.output_dir, o.label, run_index)
    try:
        rec = execute(o, cfg, seed)
    except Exception as exc:  # noqa: BLE001 - isolate the failing repeat
        log.exception("run %s #%d failed", o.label, run_index)
        return {"label": o.label, "run": run_index, "seed": seed, "ok": False,
                "error": f"{type(exc).__name__}: {exc}", "file": None}
    path.write_text(raw_csv(rec, cfg.record_timing), encoding="utf-8", newline="")
    return {"label": o.label, "run": run_index, "seed": seed, "ok": rec.complete,
            "error": rec.error, "file": str(path.relative_to(cfg.output_dir))}


def read_raw(path: Path) -> dict[str, list]:
    """Column-wise parse of a raw CSV; empty cells become None."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cols = {k: [] for k in RAW_HEADER}
    for r in rows:
        for k in RAW_HEADER:
            cell = r[k]
            cols[k].append(None if cell == "" else (int(cell) if k in ("t", "pool_size", "acq_evals") else float(cell)))
    return cols


def summarize(out_dir: Path, results: list[dict], labels: list[str]) -> list[list[str]]:
    """Per (optimizer, t >= 1) statistics across repeats, read back from raw files."""
    table = []
    for label in labels:
        mine = [r for r in results if r["label"] == label]
        good = [r for r in mine if r["ok"]]
        n_failed = len(mine) - len(good)
        series = [read_raw(out_dir / r["file"]) for r in good]
        if not series:
            continue
        ts = [t for t in series[0]["t"] if t >= 1]
        for t in ts:
            ld, Rt = [], []
            for s in series:
                i = s["t"].index(t)
                if s["log_dist"][i] is not None:
                    ld.append(s["log_dist"][i])
                if s["R_t"][i] is not None:
                    Rt.append(s["R_t"][i])
            table.append([label, fmt(t), fmt(len(series)), fmt(n_failed),
                          *_stats(ld), *_stats(Rt)])
    return table


def _stats(values: list[float]) -> list[str]:
    if not values:
        return ["", "", ""]
    a = np.asarray(values, dtype=float)
    return [fmt(np.mean(a)), fmt(np.std(a)), fmt(np.median(a))]


def _ensure_writable(out_dir: Path) -> None:
    try:
        (out_dir / "raw").mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("ok")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out_dir} is not writable: {exc}") from exc


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "benchmark": {"family": cfg.benchmark.family.value, "dim": cfg.benchmark.dim},
        "optimizers": [{"kind": o.kind, "label": o.label, **o.options} for o in cfg.optimizers],
        "horizon": cfg.horizon,
        "repeats": cfg.repeats,
        "base_seed": cfg.base_seed,
        "output_dir": str(cfg.output_dir),
        "noise_std": cfg.noise_std,
        "parallel_workers": cfg.parallel_workers,
        "init_points": cfg.init_points,
        "record_timing": cfg.record_timing,
    }


def run_experiment(cfg: ExperimentConfig, config_bytes: bytes | None = None) -> Path:
    """Run every (optimizer, repeat) pair and write raw CSVs, summary and manifest.

    Returns the summary path.
    """
    out_dir = Path(cfg.output_dir)
    _ensure_writable(out_dir)
    tasks = [(o, cfg, i) for o in cfg.optimizers for i in range(cfg.repeats)]
    if cfg.parallel_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel_workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    labels = [o.label for o in cfg.optimizers]
    summary = summarize(out_dir, results, labels)
    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(summary)

    canonical = json.dumps(_config_dict(cfg), sort_keys=True).encode()
    manifest = {
        "library": "subspace_bo",
        "version": __version__,
        "config": _config_dict(cfg),
        "config_sha256": hashlib.sha256(config_bytes or canonical).hexdigest(),
        "seeds": cfg.seeds(),
        "runs": results,
        "failed_runs": [r for r in results if not r["ok"]],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return summary_path


def emit_bounds(params: BoundParams, horizon: int, out: str | Path) -> Path:
    """Write (t, B(t), B(t)/t) rows for the regret bound curve."""
    curve = regret_bound_curve(params, horizon)
    out = Path(out)
    if out.parent:
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "bound", "bound_per_t"])
        for t, b, bt in zip(curve.t, curve.bound, curve.per_step):
            w.writerow([fmt(int(t)), fmt(b), fmt(bt)])
    return out
