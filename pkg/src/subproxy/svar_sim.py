"""Random summary graphs and subsampled SVAR(1) simulation.

Each replicate is an independent restart of the process. Noise for replicate
``r`` comes from its own generator seeded by ``(seed, r)`` and is drawn one
time step at a time, so a longer horizon extends a replicate without
changing its earlier values, and replicates can be produced in any order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph_core import SummaryGraph, format_summary, write_text
from .graph_core.types import SubsamplingError

FUNCTIONS = ("linear", "sin", "tanh", "sqrt")
NOISES = ("uniform", "gauss", "exp", "gamma")
WEIGHT_RANGE = (0.3, 0.8)
LINEAR_SELF_RANGE = (0.3, 0.7)
BLOWUP_THRESHOLD = 1e8
MAX_RETRIES = 3


class SimulationError(ValueError):
    pass


class BlowUpError(SimulationError):
    def __init__(self, message: str, weights: dict):
        super().__init__(message)
        self.weights = weights


def _apply(tag: str, x: np.ndarray) -> np.ndarray:
    if tag == "linear":
        return x
    if tag == "sin":
        return np.sin(x)
    if tag == "tanh":
        return np.tanh(x)
    if tag == "sqrt":
        return np.sign(x) * np.sqrt(np.abs(x))
    raise SimulationError(f"unknown function tag {tag!r}")


def _noise(tag: str, scale: float, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance (times ``scale``) noise from two uniform streams."""
    if tag == "uniform":
        z = np.sqrt(3.0) * (2.0 * u1 - 1.0)
    elif tag == "gauss":
        # Box-Muller; log1p(-u) keeps u = 0 finite
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
    elif tag == "exp":
        z = -np.log1p(-u1) - 1.0
    elif tag == "gamma":
        # shape 2 as a sum of two exponentials, scaled to unit variance
        z = (-np.log1p(-u1) - np.log1p(-u2)) / np.sqrt(2.0) - np.sqrt(2.0)
    else:
        raise SimulationError(f"unknown noise tag {tag!r}")
    return scale * z


def random_summary_graph(d: int, edge_prob: float, seed=0) -> SummaryGraph:
    """Erdos-Renyi DAG: cross edges only forward along a random order, all self loops."""
    if d < 1:
        raise SimulationError("d must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise SimulationError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(d)
    draws = rng.random((d, d))
    edges = {
        (int(order[i]), int(order[j]))
        for i in range(d)
        for j in range(i + 1, d)
        if draws[i, j] < edge_prob
    }
    return SummaryGraph(d, frozenset(edges))


def _key(i: int, j: int) -> str:
    return f"{i}->{j}"


@dataclass(frozen=True)
class MechanismSpec:
    """Per-edge function tag and weight (self loops keyed ``i->i``) and per-variable noise."""

    functions: dict
    weights: dict
    noises: tuple
    noise_scales: tuple = None  # type: ignore[assignment]
    w_min: float = 1e-3

    def __post_init__(self):
        if self.noise_scales is None:
            object.__setattr__(self, "noise_scales", tuple(1.0 for _ in self.noises))
        for key, w in self.weights.items():
            if abs(w) < self.w_min:
                raise SimulationError(f"weight {key}={w} too close to zero")
        for tag in self.functions.values():
            if tag not in FUNCTIONS:
                raise SimulationError(f"unknown function tag {tag!r}")
        for tag in self.noises:
            if tag not in NOISES:
                raise SimulationError(f"unknown noise tag {tag!r}")

    def check_covers(self, g: SummaryGraph) -> None:
        wanted = {_key(i, j) for i, j in g.edges} | {_key(i, i) for i in g.self_loops}
        if set(self.functions) != wanted or set(self.weights) != wanted:
            missing = sorted(wanted - set(self.functions) - set(self.weights))
            raise SimulationError(f"mechanism does not match graph edges (missing: {missing})")
        if len(self.noises) != g.d or len(self.noise_scales) != g.d:
            raise SimulationError("need one noise tag per variable")

    def scaled(self, factor: float) -> "MechanismSpec":
        return MechanismSpec(
            dict(self.functions),
            {k: w * factor for k, w in self.weights.items()},
            self.noises,
            self.noise_scales,
            self.w_min * factor,
        )

    def to_dict(self) -> dict:
        return {
            "functions": dict(sorted(self.functions.items())),
            "weights": dict(sorted(self.weights.items())),
            "noises": list(self.noises),
            "noise_scales": list(self.noise_scales),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MechanismSpec":
        return cls(dict(obj["functions"]), {k: float(v) for k, v in obj["weights"].items()},
                   tuple(obj["noises"]), tuple(float(s) for s in obj["noise_scales"]))


def random_mechanism(g: SummaryGraph, seed=0, functions=FUNCTIONS, noises=NOISES,
                     weight_range=WEIGHT_RANGE) -> MechanismSpec:
    rng = np.random.default_rng(seed)
    lo, hi = weight_range
    funcs, weights = {}, {}
    for i, j in sorted(g.edges | {(i, i) for i in g.self_loops}):
        tag = functions[rng.integers(len(functions))]
        w = rng.uniform(lo, hi) * rng.choice((-1.0, 1.0))
        if i == j and tag == "linear":
            w = float(np.sign(w) * np.clip(abs(w), *LINEAR_SELF_RANGE))
        funcs[_key(i, j)] = str(tag)
        weights[_key(i, j)] = float(w)
    noise = tuple(str(noises[rng.integers(len(noises))]) for _ in range(g.d))
    return MechanismSpec(funcs, weights, noise)


@dataclass
class TimeSeriesDataset:
    """``data[r, f, i]``: replicate ``r``, observed frame ``f`` (time ``1 + f*k``), series ``i``."""

    data: np.ndarray
    k: int
    names: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 3:
            raise SimulationError("data must be replicates x frames x variables")
        if self.data.shape[2] != len(self.names):
            raise SimulationError("names do not match variable count")
        if not np.all(np.isfinite(self.data)):
            raise SimulationError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    @property
    def d(self) -> int:
        return self.data.shape[2]

    def frame_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """All adjacent observed frame pairs pooled across replicates: (earlier, later)."""
        if self.m < 2:
            raise SimulationError("need at least two observed frames")
        early = self.data[:, :-1, :].reshape(-1, self.d)
        late = self.data[:, 1:, :].reshape(-1, self.d)
        return early, late

    def to_csv(self) -> str:
        lines = ["replicate,frame," + ",".join(self.names)]
        for r in range(self.n):
            for f in range(self.m):
                vals = ",".join(repr(float(x)) for x in self.data[r, f])
                lines.append(f"{r},{f},{vals}")
        return "\n".join(lines) + "\n"

    def save(self, out_dir, truth: SummaryGraph | None = None) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "data.csv", out / "meta.json"]
        write_text(written[0], self.to_csv())
        meta = dict(self.meta, k=self.k, names=list(self.names), n=self.n, frames=self.m)
        write_text(written[1], json.dumps(meta, indent=2, sort_keys=True) + "\n")
        if truth is not None:
            written.append(out / "truth.graph")
            write_text(written[2], format_summary(truth))
        return written

    @classmethod
    def load(cls, in_dir) -> "TimeSeriesDataset":
        src = Path(in_dir)
        meta = json.loads((src / "meta.json").read_text())
        rows = (src / "data.csv").read_text().splitlines()
        header = rows[0].split(",")
        if header[:2] != ["replicate", "frame"]:
            raise SimulationError("bad data.csv header")
        names = tuple(header[2:])
        table = np.array([[float(x) for x in row.split(",")] for row in rows[1:] if row], dtype=float)
        n, m = int(meta["n"]), int(meta["frames"])
        if table.shape != (n * m, len(names) + 2):
            raise SimulationError("data.csv shape disagrees with meta.json")
        data = table[:, 2:].reshape(n, m, len(names))
        return cls(data, int(meta["k"]), names, meta)


def _run(g: SummaryGraph, mech: MechanismSpec, n: int, steps: int, seed: int) -> np.ndarray:
    d = g.d
    u = np.empty((n, steps, d, 2))
    for r in range(n):
        # one stream per replicate, filled time-major so prefixes are stable in ``steps``
        u[r] = np.random.default_rng([seed, r]).random((steps, d, 2))
    noise = np.empty((n, steps, d))
    for i in range(d):
        noise[:, :, i] = _noise(mech.noises[i], mech.noise_scales[i], u[:, :, i, 0], u[:, :, i, 1])
    terms = [(i, j, mech.functions[_key(i, j)], mech.weights[_key(i, j)])
             for i, j in sorted(g.edges | {(i, i) for i in g.self_loops})]
    x = np.zeros((n, steps + 1, d))
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(steps):
            prev = x[:, s, :]
            cur = noise[:, s, :].copy()
            for i, j, tag, w in terms:
                cur[:, j] += w * _apply(tag, prev[:, i])
            x[:, s + 1, :] = cur
    return x[:, 1:, :]


def simulate(g: SummaryGraph, mech: MechanismSpec, n: int, T: int, k: int, burn_in: int = 100,
             seed=0, max_retries: int = MAX_RETRIES) -> TimeSeriesDataset:
    """Simulate ``n`` replicates of ``T`` post-burn-in steps, keeping times ``1, 1+k, ...``.

    On overflow all weights are halved and the run repeated, at most
    ``max_retries`` times; :class:`BlowUpError` is raised after that.
    """
    if k < 2:
        raise SubsamplingError(f"subsampling factor must satisfy k >= 2, got {k}")
    if T < 1 or n < 1 or burn_in < 0:
        raise SimulationError("need n >= 1, T >= 1 and burn_in >= 0")
    mech.check_covers(g)
    factor = 1.0
    keep = np.arange(0, T, k) + burn_in
    for attempt in range(max_retries + 1):
        cur = mech if factor == 1.0 else mech.scaled(factor)
        x = _run(g, cur, n, burn_in + T, seed)
        if np.all(np.isfinite(x)) and np.max(np.abs(x), initial=0.0) <= BLOWUP_THRESHOLD:
            meta = {
                "T": T, "burn_in": burn_in, "seed": seed, "weight_scale": factor,
                "mechanism": mech.to_dict(),
            }
            return TimeSeriesDataset(x[:, keep, :], k, g.names, meta)
        if attempt == max_retries:
            raise BlowUpError(
                f"simulation diverged after {max_retries} weight halvings; weights: "
                + ", ".join(f"{key}={w:.4g}" for key, w in sorted(cur.weights.items())),
                dict(cur.weights),
            )
        factor /= 2.0
    raise AssertionError("unreachable")
