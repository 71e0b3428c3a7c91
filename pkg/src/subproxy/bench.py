"""Scoring and the experiment grid."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .discovery import discover
from .graph_core import SummaryGraph, format_summary, parse_summary, write_text
from .svar_sim import FUNCTIONS, NOISES, random_mechanism, random_summary_graph, simulate

RESULT_COLUMNS = ["k", "n", "seed", "precision", "recall", "f1", "runtime_ms", "error"]
SUMMARY_COLUMNS = ["k", "n", "runs", "errors", "f1_mean", "f1_std", "precision_mean", "recall_mean"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GraphScore:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def score(estimated: SummaryGraph, truth: SummaryGraph) -> GraphScore:
    """Precision, recall and F1 over directed cross edges; self loops are ignored.

    An empty estimate has precision 1 and an empty truth has recall 1, so two
    empty graphs score 1 throughout. F1 is 0 when precision and recall are both 0.
    """
    if estimated.d != truth.d:
        raise ValueError(f"vertex counts differ: {estimated.d} vs {truth.d}")
    tp = len(estimated.edges & truth.edges)
    fp = len(estimated.edges - truth.edges)
    fn = len(truth.edges - estimated.edges)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return GraphScore(precision, recall, f1, tp, fp, fn)


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 5
    edge_prob: float = 0.3
    k: tuple = (2, 3, 4, 5)
    n: tuple = (600, 800, 1000, 1200)
    seeds: tuple = tuple(range(100))
    alpha: float = 0.05
    backend: str = "data"
    mechanism_menus: dict = field(default_factory=lambda: {"functions": list(FUNCTIONS), "noises": list(NOISES)})
    burn_in: int = 100
    frames: int = 2
    max_cond: int | None = None
    record_runtime: bool = False
    plots: bool = False

    def __post_init__(self):
        for name in ("k", "n", "seeds"):
            val = getattr(self, name)
            if isinstance(val, int) and name == "seeds":
                val = tuple(range(val))
            val = tuple(int(v) for v in val)
            if not val:
                raise ConfigError(f"{name} must be non-empty")
            object.__setattr__(self, name, val)
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if any(k < 2 for k in self.k):
            raise ConfigError("subsampling factors must satisfy k >= 2")
        if any(n < 1 for n in self.n):
            raise ConfigError("sample sizes must be positive")
        if self.backend not in ("oracle", "data"):
            raise ConfigError("backend must be 'oracle' or 'data'")
        if self.d < 1 or not 0 <= self.edge_prob <= 1 or not 0 < self.alpha < 1:
            raise ConfigError("need d >= 1, edge_prob in [0, 1] and alpha in (0, 1)")
        if self.frames < 2:
            raise ConfigError("frames must be >= 2")
        menus = dict(self.mechanism_menus)
        for key, allowed in (("functions", FUNCTIONS), ("noises", NOISES)):
            vals = list(menus.get(key, allowed))
            if not vals or any(v not in allowed for v in vals):
                raise ConfigError(f"mechanism_menus.{key} must be a non-empty subset of {list(allowed)}")
            menus[key] = vals
        object.__setattr__(self, "mechanism_menus", menus)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("k", "n", "seeds"):
            out[key] = list(out[key])
        return out

    def digest(self) -> str:
        """Hash of everything that affects results (not runtime recording or plotting)."""
        obj = self.to_dict()
        obj.pop("record_runtime")
        obj.pop("plots")
        blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def truth_graph(cfg: ExperimentConfig, seed: int) -> SummaryGraph:
    return random_summary_graph(cfg.d, cfg.edge_prob, seed=[seed, 0])


def _run_one(cfg_dict: dict, k: int, n: int, seed: int, run_dir: str) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    run_path = Path(run_dir)
    cached = run_path / "row.json"
    if cached.exists():
        return json.loads(cached.read_text())
    row = {"k": k, "n": n, "seed": seed, "precision": None, "recall": None, "f1": None,
           "runtime_ms": None, "error": ""}
    start = time.perf_counter()
    try:
        g = truth_graph(cfg, seed)
        if cfg.backend == "oracle":
            source = g
        else:
            mech = random_mechanism(g, seed=[seed, 1], functions=tuple(cfg.mechanism_menus["functions"]),
                                    noises=tuple(cfg.mechanism_menus["noises"]))
            T = (cfg.frames - 1) * k + 1
            source = simulate(g, mech, n, T, k, burn_in=cfg.burn_in, seed=seed)
        result = discover(source, k=k, alpha=cfg.alpha, max_cond=cfg.max_cond)
        sc = score(result.graph, g)
        row.update(precision=sc.precision, recall=sc.recall, f1=sc.f1)
        artifacts = {"truth.graph": format_summary(g), "estimate.graph": format_summary(result.graph),
                     "trace.jsonl": result.trace_jsonl()}
    except Exception as exc:  # a failed run becomes an error row
        row["error"] = f"{type(exc).__name__}: {exc}"
        artifacts = {}
    if cfg.record_runtime:
        row["runtime_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
    run_path.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        write_text(run_path / name, text)
    write_text(cached, json.dumps(row, sort_keys=True) + "\n")
    return row


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def summarize(rows: list[dict]) -> list[dict]:
    cells: dict = {}
    for r in rows:
        cells.setdefault((r["k"], r["n"]), []).append(r)
    out = []
    for (k, n), rs in sorted(cells.items()):
        ok = [r for r in rs if not r["error"]]
        f1 = np.array([r["f1"] for r in ok], dtype=float)
        out.append({
            "k": k, "n": n, "runs": len(rs), "errors": len(rs) - len(ok),
            "f1_mean": float(f1.mean()) if len(ok) else None,
            "f1_std": float(f1.std()) if len(ok) else None,
            "precision_mean": float(np.mean([r["precision"] for r in ok])) if ok else None,
            "recall_mean": float(np.mean([r["recall"] for r in ok])) if ok else None,
        })
    return out


def _plots(summary: list[dict], out: Path) -> list[Path]:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return []
    written = []
    ks = sorted({r["k"] for r in summary})
    ns = sorted({r["n"] for r in summary})
    cell = {(r["k"], r["n"]): r["f1_mean"] for r in summary}
    for name, xs, series, xlabel in (
        ("f1_vs_k.png", ks, [(f"n={n}", [cell.get((k, n)) for k in ks]) for n in ns], "k"),
        ("f1_vs_n.png", ns, [(f"k={k}", [cell.get((k, n)) for n in ns]) for k in ks], "n"),
    ):
        fig, ax = plt.subplots(figsize=(4, 3))
        for label, ys in series:
            ax.plot(xs, [np.nan if y is None else y for y in ys], marker="o", label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("F1")
        ax.set_ylim(0, 1.05)
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(out / name, metadata={"Software": None})
        plt.close(fig)
        written.append(out / name)
    return written


def run_grid(cfg: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Run every (k, n, seed) cell and write results.csv, summary.csv and manifest.json.

    Finished runs are cached under ``runs/<config digest>/`` and reused, so an
    interrupted grid resumes where it stopped. Output bytes do not depend on
    ``threads``; ``runtime_ms`` is only written when ``record_runtime`` is set.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()
    cfg_dict = cfg.to_dict()
    tasks = [(k, n, s) for k in cfg.k for n in cfg.n for s in cfg.seeds]
    run_root = out / "runs" / digest
    args = [(cfg_dict, k, n, s, str(run_root / f"k{k}_n{n}_s{s}")) for k, n, s in tasks]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_one, *zip(*args)))
    else:
        rows = [_run_one(*a) for a in args]
    if not cfg.record_runtime:
        rows = [dict(r, runtime_ms=None) for r in rows]
    summary = summarize(rows)
    results_text = _csv(rows, RESULT_COLUMNS)
    summary_text = _csv(summary, SUMMARY_COLUMNS)
    write_text(out / "results.csv", results_text)
    write_text(out / "summary.csv", summary_text)
    manifest = {
        "version": __version__,
        "config": cfg_dict,
        "config_digest": digest,
        "sha256": {
            "results.csv": hashlib.sha256(results_text.encode()).hexdigest(),
            "summary.csv": hashlib.sha256(summary_text.encode()).hexdigest(),
        },
    }
    write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    plots = _plots(summary, out) if cfg.plots else []
    return {"rows": rows, "summary": summary, "out_dir": str(out), "plots": [str(p) for p in plots]}


def read_results(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({
                "k": int(r["k"]), "n": int(r["n"]), "seed": int(r["seed"]),
                "precision": float(r["precision"]) if r["precision"] else None,
                "recall": float(r["recall"]) if r["recall"] else None,
                "f1": float(r["f1"]) if r["f1"] else None,
                "runtime_ms": float(r["runtime_ms"]) if r["runtime_ms"] else None,
                "error": r["error"],
            })
    return rows


def score_files(est_path, truth_path) -> GraphScore:
    return score(parse_summary(Path(est_path).read_text()), parse_summary(Path(truth_path).read_text()))
