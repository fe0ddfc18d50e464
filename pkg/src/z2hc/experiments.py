"""Graph ensembles: batch sweeps, a restartable results journal, aggregation and fits."""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .adiabatic import REDUCED_SCHEDULE, FINE_SCHEDULE, Schedule, run_forward_sweep
from .critical import DEFAULT_WINDOW, detect_critical
from .errors import InvalidArgumentError, Z2HCError
from .gauge_model import complexity_estimate
from .graph_core import Graph, count_hamiltonian_cycles, degree_stats, random_connected_graph, write_graph

log = logging.getLogger(__name__)

JOURNAL_NAME = "journal.jsonl"
GRAPH_DIR = "graphs"
REFERENCE_SLOPE = 0.1513
REFERENCE_INTERCEPTS = (0.007536, 0.07536)
REFERENCE_SQRT_FIT = {"A": 0.0049005, "B": 0.345178}


@dataclass
class EnsembleSpec:
    n_vertices: int = 9
    n_edges: list[int] = field(default_factory=lambda: [18])
    samples_per_n_edges: int = 50
    schedule: Schedule = REDUCED_SCHEDULE
    seed: int = 2024
    window: int = DEFAULT_WINDOW
    backend: str = "sector"
    workers: int = 1
    paper_scale: bool = False

    def __post_init__(self):
        if self.paper_scale:
            self.samples_per_n_edges = 1000 if len(self.n_edges) == 1 else 200
            self.schedule = FINE_SCHEDULE
        for ne in self.n_edges:
            if not (self.n_vertices - 1 <= ne <= self.n_vertices * (self.n_vertices - 1) // 2):
                raise InvalidArgumentError(f"N_e={ne} infeasible for N_v={self.n_vertices}")
        if self.samples_per_n_edges < 0:
            raise InvalidArgumentError("samples_per_n_edges must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        d = dict(d)
        sched = d.pop("schedule", None)
        if isinstance(sched, dict):
            d["schedule"] = Schedule(**{"direction": "forward_g", **sched})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"unknown ensemble spec keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "EnsembleSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def jobs(self) -> list[tuple[int, int]]:
        return [(ne, i) for ne in self.n_edges for i in range(self.samples_per_n_edges)]


@dataclass
class SampleRecord:
    graph_digest: str
    n_vertices: int
    n_edges: int
    n_hc: int
    min_deg: int
    max_deg: int
    g_c_H: float | None
    g_c_Z: float | None
    lambda_c_H: float | None
    lambda_c_Z: float | None
    schedule: dict
    seed: list[int]
    flags: list[str] = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.graph_digest, Schedule(**self.schedule).digest, tuple(self.seed))

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "SampleRecord":
        return cls(**json.loads(line))


def sample_graph(spec: EnsembleSpec, n_edges: int, index: int) -> Graph:
    return random_connected_graph(spec.n_vertices, n_edges, [spec.seed, n_edges, index])


def analyse_graph(graph: Graph, schedule: Schedule, window: int, backend: str, seed: list[int]) -> SampleRecord:
    lo, hi, _ = degree_stats(graph)
    rec = SampleRecord(graph.digest, graph.n_vertices, graph.n_edges, -1, lo, hi, None, None, None, None,
                       schedule.descriptor(), list(seed))
    try:
        rec.n_hc = count_hamiltonian_cycles(graph)
        cp = detect_critical(run_forward_sweep(graph, schedule, backend), window)
    except Z2HCError as exc:
        rec.flags.append(f"error:{type(exc).__name__}:{exc}")
        return rec
    rec.g_c_H, rec.g_c_Z = cp.g_c_H, cp.g_c_Z
    rec.lambda_c_H, rec.lambda_c_Z = cp.lambda_c_H, cp.lambda_c_Z
    rec.flags.extend(cp.flags)
    return rec


def _run_job(args) -> SampleRecord:
    spec, ne, i = args
    return analyse_graph(sample_graph(spec, ne, i), spec.schedule, spec.window, spec.backend, [spec.seed, ne, i])


def load_journal(path) -> list[SampleRecord]:
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as fh:
        return [SampleRecord.from_json(line) for line in fh if line.strip()]


def runtime_advisory(spec: EnsembleSpec) -> dict:
    """Up-front cost estimate: total Trotter substeps and the adiabatic figure of merit."""
    n_jobs = len(spec.jobs())
    substeps = n_jobs * spec.schedule.n_steps * spec.schedule.substeps
    merit = 0.0
    if n_jobs:
        # largest graph of the ensemble, at a typical g_c and 1% precision
        merit = complexity_estimate(sample_graph(spec, max(spec.n_edges), 0), 0.35, 0.01)
    return {"samples": n_jobs, "trotter_substeps": substeps, "complexity_figure": merit}


def run_ensemble(spec: EnsembleSpec, out_dir, workers: int | None = None) -> list[SampleRecord]:
    """Generate, sweep and analyse every sample; already-journaled samples are skipped."""
    out = Path(out_dir)
    (out / GRAPH_DIR).mkdir(parents=True, exist_ok=True)
    journal = out / JOURNAL_NAME
    done = {r.key: r for r in load_journal(journal)}
    if spec.paper_scale:
        log.warning("full-scale ensemble: %d samples with the full schedule; expect a long run", len(spec.jobs()))
    adv = runtime_advisory(spec)
    log.info("ensemble advisory: %s", adv)
    sched_digest = spec.schedule.digest
    pending = []
    results: dict[tuple, SampleRecord] = {}
    for ne, i in spec.jobs():
        graph = sample_graph(spec, ne, i)
        key = (graph.digest, sched_digest, (spec.seed, ne, i))
        gpath = out / GRAPH_DIR / f"{graph.digest}.graph"
        if not gpath.exists():
            write_graph(graph, gpath)
        if key in done:
            results[(ne, i)] = done[key]
        else:
            pending.append((ne, i))
    workers = workers or spec.workers
    args = [(spec, ne, i) for ne, i in pending]
    with open(journal, "a", encoding="utf-8") as fh:
        if workers > 1 and len(args) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for (ne, i), rec in zip(pending, pool.map(_run_job, args)):
                    fh.write(rec.to_json() + "\n")
                    fh.flush()
                    results[(ne, i)] = rec
        else:
            for a in args:
                rec = _run_job(a)
                fh.write(rec.to_json() + "\n")
                fh.flush()
                results[(a[1], a[2])] = rec
    return [results[j] for j in spec.jobs()]


# --- aggregation and fits ------------------------------------------------------

KEYS = ("n_hc", "n_edges", "min_deg", "max_deg")
VALUES = ("g_c_H", "g_c_Z", "lambda_c_H", "lambda_c_Z")


@dataclass(frozen=True)
class GroupMean:
    key: int
    mean: float
    count: int
    stderr: float | None


@dataclass(frozen=True)
class Aggregate:
    key: str
    value: str
    groups: list[GroupMean]
    n_excluded: int

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([g.key for g in self.groups], float), np.array([g.mean for g in self.groups])


def usable(rec: SampleRecord) -> bool:
    return not rec.flags and rec.g_c_H is not None


def aggregate_mean(records, key: str, value: str) -> Aggregate:
    """Group-by mean with standard error; flagged records are excluded and counted."""
    if key not in KEYS or value not in VALUES:
        raise InvalidArgumentError(f"key must be one of {KEYS}, value one of {VALUES}")
    records = list(records)
    if not records:
        raise InvalidArgumentError("no records to aggregate")
    buckets: dict[int, list[float]] = {}
    excluded = 0
    for r in records:
        if not usable(r):
            excluded += 1
            continue
        buckets.setdefault(getattr(r, key), []).append(getattr(r, value))
    groups = []
    for k in sorted(buckets):
        v = np.array(buckets[k])
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
        groups.append(GroupMean(int(k), float(v.mean()), int(v.size), se))
    return Aggregate(key, value, groups, excluded)


@dataclass(frozen=True)
class FitResult:
    model: str
    coefficients: dict
    rss: float
    n_points: int

    def predict(self, x):
        x = np.asarray(x, float)
        if self.model == "sqrt_nhc":
            return self.coefficients["A"] * np.sqrt(x) + self.coefficients["B"]
        return self.coefficients["slope"] * x + self.coefficients["intercept"]


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    if x.size != y.size or x.size < 2:
        raise InvalidArgumentError("need at least two points")
    if np.unique(x).size < 2:
        raise InvalidArgumentError("degenerate regressor: all x values equal")
    design = np.column_stack([x, np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((y - (a * x + b)) ** 2))
    return float(a), float(b), rss


def fit_sqrt_nhc(n_hc, g_c) -> FitResult:
    """Least squares ``g_c = A sqrt(N_hc) + B``."""
    x = np.sqrt(np.asarray(n_hc, float))
    a, b, rss = _ols(x, np.asarray(g_c, float))
    return FitResult("sqrt_nhc", {"A": a, "B": b}, rss, x.size)


def fit_linear_ne(n_e, lam_c) -> FitResult:
    """Least squares ``lambda_c = slope N_e + intercept``."""
    x = np.asarray(n_e, float)
    a, b, rss = _ols(x, np.asarray(lam_c, float))
    return FitResult("linear_ne", {"slope": a, "intercept": b}, rss, x.size)


def compare_linear_to_reference(fit: FitResult) -> dict:
    """Informational comparison; both published intercept variants are reported."""
    return {
        "slope": fit.coefficients["slope"],
        "reference_slope": REFERENCE_SLOPE,
        "slope_delta": fit.coefficients["slope"] - REFERENCE_SLOPE,
        "intercept": fit.coefficients["intercept"],
        "reference_intercepts": list(REFERENCE_INTERCEPTS),
        "flags": ["reference_intercept_ambiguous"],
    }


def mean_nhc_by_ne(records) -> list[GroupMean]:
    buckets: dict[int, list[int]] = {}
    for r in records:
        if r.n_hc >= 0:
            buckets.setdefault(r.n_edges, []).append(r.n_hc)
    out = []
    for k in sorted(buckets):
        v = np.array(buckets[k], float)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
        out.append(GroupMean(k, float(v.mean()), int(v.size), se))
    return out


def trend_statistics(records) -> dict:
    """Spearman rank correlations of ``g_c^H`` with ``N_hc`` and ``N_e``."""
    rs = [r for r in records if usable(r)]
    out = {}
    for key in ("n_hc", "n_edges"):
        x = np.array([getattr(r, key) for r in rs], float)
        y = np.array([r.g_c_H for r in rs], float)
        if x.size >= 3 and np.unique(x).size > 1 and np.unique(y).size > 1:
            res = stats.spearmanr(x, y)
            out[key] = {"rho": float(res.statistic), "p": float(res.pvalue), "n": int(x.size)}
    return out


# --- plots ---------------------------------------------------------------------

PLOT_KINDS = (
    "trace",
    "nhc_hist",
    "gc_h_vs_nhc",
    "gc_z_vs_nhc",
    "gc_h_vs_max_deg",
    "gc_h_vs_min_deg",
    "lambda_h_vs_ne",
    "nhc_vs_ne",
)
BATCH_PLOTS = ("nhc_hist", "gc_h_vs_nhc", "gc_z_vs_nhc", "gc_h_vs_max_deg", "gc_h_vs_min_deg", "lambda_h_vs_ne")

_AXES = {
    "gc_h_vs_nhc": ("n_hc", "g_c_H", "sqrt"),
    "gc_z_vs_nhc": ("n_hc", "g_c_Z", None),
    "gc_h_vs_max_deg": ("max_deg", "g_c_H", None),
    "gc_h_vs_min_deg": ("min_deg", "g_c_H", None),
    "lambda_h_vs_ne": ("n_edges", "lambda_c_H", "linear"),
}


def _figure():
    import matplotlib

    matplotlib.rcParams["svg.hashsalt"] = "z2hc"
    matplotlib.rcParams["svg.fonttype"] = "none"
    from matplotlib.figure import Figure

    fig = Figure(figsize=(6.0, 4.2))
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig, path: Path, header: list[str], rows: list[list]) -> list[Path]:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join("" if v is None else format(v, ".17g") if isinstance(v, float) else str(v) for v in r) + "\n")
    return [path, csv_path]


def emit_plots(data, kind: str, path) -> list[Path]:
    """Render one plot as SVG plus a CSV of the plotted points.

    ``data`` is a ``SweepTrace`` for ``kind="trace"`` and a list of
    ``SampleRecord`` otherwise.
    """
    if kind not in PLOT_KINDS:
        raise InvalidArgumentError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    path = Path(path)
    fig, ax = _figure()
    if kind == "trace":
        g = data.column("g")
        for name, label in (("energy", "<H>"), ("z", "<Z>"), ("x", "<X>")):
            ax.plot(g, data.column(name), label=label)
        ax.set_xlabel("g")
        ax.set_ylabel("expectation")
        ax.legend()
        rows = [[r.g, r.energy, r.z, r.x] for r in data.rows]
        return _save(fig, path, ["g", "energy", "z", "x"], rows)
    records = list(data)
    if not records:
        raise InvalidArgumentError("no records to plot")
    if kind == "nhc_hist":
        counts: dict[int, int] = {}
        for r in records:
            counts[r.n_hc] = counts.get(r.n_hc, 0) + 1
        keys = sorted(counts)
        ax.bar([str(k) for k in keys], [counts[k] for k in keys])
        ax.set_xlabel("N_hc")
        ax.set_ylabel("samples")
        return _save(fig, path, ["n_hc", "count"], [[k, counts[k]] for k in keys])
    if kind == "nhc_vs_ne":
        table = mean_nhc_by_ne(records)
        ax.errorbar([t.key for t in table], [t.mean for t in table], yerr=[t.stderr or 0.0 for t in table], fmt="o-")
        ax.set_xlabel("N_e")
        ax.set_ylabel("mean N_hc")
        return _save(fig, path, ["n_edges", "mean_n_hc", "count", "stderr"], [[t.key, t.mean, t.count, t.stderr] for t in table])
    key, value, fit_kind = _AXES[kind]
    agg = aggregate_mean(records, key, value)
    if not agg.groups:
        raise InvalidArgumentError(f"no unflagged records for {kind}")
    x, y = agg.points()
    ax.errorbar(x, y, yerr=[g.stderr or 0.0 for g in agg.groups], fmt="o")
    ax.set_xlabel(key)
    ax.set_ylabel(f"mean {value}")
    if fit_kind and np.unique(x).size >= 2:
        fit = fit_sqrt_nhc(x, y) if fit_kind == "sqrt" else fit_linear_ne(x, y)
        xs = np.linspace(x.min(), x.max(), 200)
        coeffs = ", ".join(f"{k}={v:.4g}" for k, v in fit.coefficients.items())
        ax.plot(xs, fit.predict(xs), "-", label=coeffs)
        ax.legend()
    rows = [[g.key, g.mean, g.count, g.stderr] for g in agg.groups]
    return _save(fig, path, [key, f"mean_{value}", "count", "stderr"], rows)


def ensemble_summary(records) -> dict:
    """Fits, trend statistics and tables for a finished ensemble."""
    out: dict = {"n_records": len(records), "n_flagged": sum(1 for r in records if not usable(r))}
    agg = aggregate_mean(records, "n_hc", "g_c_H")
    x, y = agg.points()
    if np.unique(x).size >= 2:
        out["sqrt_nhc_fit"] = fit_sqrt_nhc(x, y).coefficients
    agg_ne = aggregate_mean(records, "n_edges", "lambda_c_H")
    x, y = agg_ne.points()
    if np.unique(x).size >= 2:
        out["linear_ne_fit"] = compare_linear_to_reference(fit_linear_ne(x, y))
    out["mean_nhc_by_ne"] = [asdict(t) for t in mean_nhc_by_ne(records)]
    out["spearman"] = trend_statistics(records)
    return out


def run_batch(spec: EnsembleSpec, out_dir, workers: int | None = None) -> tuple[list[SampleRecord], dict, list[Path]]:
    """Ensemble, summary JSON and the standard plot set."""
    out = Path(out_dir)
    records = run_ensemble(spec, out, workers)
    files: list[Path] = []
    summary: dict = {"n_records": 0}
    if records:
        summary = ensemble_summary(records)
        kinds = BATCH_PLOTS + (("nhc_vs_ne",) if len(spec.n_edges) > 1 else ())
        for kind in kinds:
            try:
                files += emit_plots(records, kind, out / "plots" / f"{kind}.svg")
            except InvalidArgumentError as exc:
                log.warning("skipping plot %s: %s", kind, exc)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return records, summary, files
