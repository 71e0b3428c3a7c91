"""Summary-graph recovery: window MAG, PD-DAG and edge resolution."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .ci_engine import CiError, DataBackend, OracleBackend
from .graph_core import (
    Mag,
    PdDag,
    SummaryGraph,
    TimeVertex,
    confounding_structure_within,
    directed_path_within,
)
from .svar_sim import TimeSeriesDataset


class DiscoveryError(RuntimeError):
    def __init__(self, message: str, context: dict | None = None):
        super().__init__(message)
        self.context = context or {}


@dataclass(frozen=True)
class SeparationSets:
    m_set: frozenset
    s_set: frozenset


@dataclass
class DiscoveryResult:
    graph: SummaryGraph
    mag: Mag
    pd_dag: PdDag
    trace: list = field(default_factory=list)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.trace)


def _tok(v: TimeVertex) -> list:
    return [v.var, v.t]


def recover_mag(backend, d: int, k: int, alpha: float | None = None, max_cond: int | None = None,
                trace: list | None = None) -> Mag:
    """Window MAG over frames ``1`` and ``1 + k`` from CI queries.

    Candidate edges are lagged pairs ``X_i(1), X_j(1+k)`` and instantaneous
    pairs at ``1 + k``. Conditioning sets come from the earlier frame only
    and grow from size 0 to ``max_cond`` (default ``d + 2``); an edge is
    dropped at the first independence verdict. Lagged edges are oriented
    forward in time, instantaneous ones bidirected. ``alpha`` is carried by
    the backend and only recorded here.
    """
    if max_cond is None:
        max_cond = d + 2
    early = [TimeVertex(i, 1) for i in range(d)]
    late = [TimeVertex(i, 1 + k) for i in range(d)]
    candidates = [(x, y) for x in early for y in late] + list(itertools.combinations(late, 2))
    alive = set(candidates)
    for size in range(max_cond + 1):
        if not any(len(early) - (x in early) >= size for x, _ in alive):
            break
        for x, y in candidates:
            if (x, y) not in alive:
                continue
            pool = [v for v in early if v != x]
            for z in itertools.combinations(pool, size):
                try:
                    verdict = backend.ci(x, y, z)
                except CiError as exc:
                    raise DiscoveryError(f"CI query {x}-{y} | {list(z)} failed: {exc}",
                                         {"x": _tok(x), "y": _tok(y), "z": [_tok(v) for v in z]}) from exc
                if trace is not None:
                    rec = verdict.to_record({"x": _tok(x), "y": _tok(y), "z": [_tok(v) for v in z]})
                    rec.update(kind="ci", stage="mag")
                    trace.append(rec)
                if verdict.independent:
                    alive.discard((x, y))
                    break
    directed = {(x, y) for x, y in alive if x.t != y.t}
    bidirected = {(x, y) for x, y in alive if x.t == y.t}
    return Mag(frozenset(early + late), frozenset(directed), frozenset(bidirected), k)


def build_pd_dag(mag: Mag) -> PdDag:
    """Dashed ``a -> b`` wherever the lagged edge and the instantaneous bidirected edge both exist."""
    d = mag.d
    dashed = {(a, b) for a in range(d) for b in range(d)
              if a != b and mag.lagged(a, b) and mag.instantaneous(a, b)}
    return PdDag(d, frozenset(), frozenset(dashed))


def _lagged_descendants(mag: Mag, b: int) -> set[int]:
    d = mag.d
    seen, stack = set(), [b]
    while stack:
        v = stack.pop()
        for w in range(d):
            if w not in seen and mag.lagged(v, w):
                seen.add(w)
                stack.append(w)
    return seen


def separation_sets(mag: Mag, a: int, b: int, k: int | None = None) -> SeparationSets:
    """Mediator and conditioning sets for the step-(b) query on ``a -> b``."""
    if a == b:
        raise ValueError("endpoints must differ")
    d = mag.d
    de_b = _lagged_descendants(mag, b)
    m_set = {a} | {m for m in range(d) if m not in (a, b) and mag.lagged(a, m) and m not in de_b}
    s_set = {s for s in range(d) if s != a and (mag.lagged(s, b) or any(mag.lagged(s, m) for m in m_set))}
    return SeparationSets(frozenset(m_set), frozenset(s_set))


def _step_a_keeps(pd: PdDag, a: int, b: int, k: int) -> str | None:
    if directed_path_within(pd, a, b, k - 2, exclude_direct=True):
        return "alternative directed path"
    if directed_path_within(pd, a, b, k - 1, exclude_direct=True) and \
            confounding_structure_within(pd, a, b, k - 2, k - 2):
        return "directed path with confounding structure"
    return None


def resolve(pd: PdDag, mag: Mag, backend, k: int | None, alpha: float | None = None, seed=None,
            names=None, trace: list | None = None) -> SummaryGraph:
    """Turn every dashed edge solid or drop it.

    Step (a) promotes dashed edges that no alternative structure can explain;
    with ``k`` unknown (``None``) it is skipped. Step (b) picks one dashed edge
    (smallest first, or a seeded random pick when ``seed`` is given) and asks
    the backend's mediator test.
    """
    trace = trace if trace is not None else []
    rng = np.random.default_rng(seed) if seed is not None else None
    while pd.dashed:
        if k is not None:
            for edge in sorted(pd.dashed):
                reason = _step_a_keeps(pd, *edge, k)
                if reason is None:
                    pd = pd.promote(edge)
                    trace.append({"kind": "rule", "rule": "a:promote", "edge": list(edge),
                                  "justification": "no alternative explanation within the path bounds"})
            if not pd.dashed:
                break
        order = sorted(pd.dashed)
        edge = order[0] if rng is None else order[int(rng.integers(len(order)))]
        a, b = edge
        sets = separation_sets(mag, a, b, k)
        try:
            verdict = backend.mediator_test(a, b, sets.m_set, sets.s_set)
        except CiError as exc:
            raise DiscoveryError(f"mediator test for edge {a}->{b} failed: {exc}",
                                 {"edge": [a, b], "m_set": sorted(sets.m_set), "s_set": sorted(sets.s_set)}) from exc
        rec = verdict.to_record({"a": a, "b": b, "m_set": sorted(sets.m_set), "s_set": sorted(sets.s_set)})
        rec.update(kind="ci", stage="resolve")
        trace.append(rec)
        if verdict.independent:
            pd = pd.remove(edge)
            rule = "b:remove"
        else:
            pd = pd.promote(edge)
            rule = "b:promote"
        trace.append({"kind": "rule", "rule": rule, "edge": [a, b],
                      "justification": "mediator test " + rec["verdict"]})
    return SummaryGraph(pd.d, pd.solid, frozenset(range(pd.d)), names)


def make_backend(source, k: int | None = None, alpha: float = 0.05, **options):
    if isinstance(source, SummaryGraph):
        if k is None:
            raise ValueError("the graphical oracle needs the true k")
        return OracleBackend(source, k, **options)
    if isinstance(source, TimeSeriesDataset):
        return DataBackend(source, alpha, **options)
    return source


def discover(source, d: int | None = None, k: int | None = None, alpha: float = 0.05, seed=None,
             names=None, max_cond: int | None = None, oracle_k: int | None = None,
             backend_options: dict | None = None) -> DiscoveryResult:
    """End-to-end recovery from a ground-truth graph (oracle), a dataset, or a backend object.

    ``k=None`` means the subsampling factor is unknown: step (a) is skipped.
    The window still needs a frame gap, taken from ``oracle_k`` (oracle), the
    dataset, or the backend.
    """
    window_k = k if k is not None else oracle_k
    if isinstance(source, TimeSeriesDataset):
        window_k = source.k
        names = names or source.names
    elif isinstance(source, SummaryGraph):
        names = names or source.names
    backend = make_backend(source, window_k, alpha, **(backend_options or {}))
    window_k = backend.k
    d = backend.d if d is None else d
    trace: list = []
    mag = recover_mag(backend, d, window_k, alpha, max_cond, trace)
    pd = build_pd_dag(mag)
    trace.append({"kind": "rule", "rule": "pd:init", "dashed": sorted(map(list, pd.dashed)),
                  "justification": "lagged and instantaneous MAG edges"})
    graph = resolve(pd, mag, backend, k, alpha, seed, names, trace)
    return DiscoveryResult(graph, mag, pd, trace)
