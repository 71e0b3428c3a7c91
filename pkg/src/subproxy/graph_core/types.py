"""Graph containers: summary graphs, time-indexed DAGs, MAGs and PD-DAGs.

All containers are immutable once built. Vertices of time-indexed graphs are
:class:`TimeVertex` values; internally :class:`Dag` keeps dense integer
indices so the traversal code in :mod:`.separation` can stay index based.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence


class GraphError(ValueError):
    """Invalid graph construction or query."""


class UnknownVertexError(GraphError, KeyError):
    pass


class SubsamplingError(GraphError):
    """Unrolling/subsampling parameters that leave fewer than two observed frames."""


def default_names(d: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(d))


@dataclass(frozen=True)
class SummaryGraph:
    """Directed graph over the ``d`` series of an SVAR process.

    ``edges`` never contains ``(i, i)``; lag-one self causation is tracked in
    ``self_loops``. Directed cycles between distinct vertices are allowed.
    """

    d: int
    edges: frozenset = frozenset()
    self_loops: frozenset = None  # type: ignore[assignment]
    names: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.d < 0:
            raise GraphError("d must be non-negative")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise GraphError(f"self edge {i}->{i} belongs in self_loops")
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise GraphError(f"edge {i}->{j} out of range for d={self.d}")
        loops = frozenset(range(self.d)) if self.self_loops is None else frozenset(int(i) for i in self.self_loops)
        for i in loops:
            if not 0 <= i < self.d:
                raise GraphError(f"self loop {i} out of range for d={self.d}")
        names = default_names(self.d) if self.names is None else tuple(self.names)
        if len(names) != self.d:
            raise GraphError("names must have length d")
        if len(set(names)) != len(names):
            raise GraphError("duplicate vertex names")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "self_loops", loops)
        object.__setattr__(self, "names", names)

    def parents(self, j: int) -> set[int]:
        return {i for i, jj in self.edges if jj == j}

    def children(self, i: int) -> set[int]:
        return {j for ii, j in self.edges if ii == i}

    def is_acyclic(self) -> bool:
        indeg = [0] * self.d
        for _, j in self.edges:
            indeg[j] += 1
        stack = [v for v in range(self.d) if indeg[v] == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for j in self.children(v):
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        return seen == self.d

    def two_cycles(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i, j in self.edges if i < j and (j, i) in self.edges)

    def relabel(self, perm: Sequence[int]) -> "SummaryGraph":
        """Vertex ``i`` becomes ``perm[i]``."""
        return SummaryGraph(
            self.d,
            frozenset((perm[i], perm[j]) for i, j in self.edges),
            frozenset(perm[i] for i in self.self_loops),
        )


@functools.total_ordering
@dataclass(frozen=True)
class TimeVertex:
    """Series ``var`` at time step ``t``; ordered by ``(t, var)``."""

    var: int
    t: int

    def __lt__(self, other):
        if not isinstance(other, TimeVertex):
            return NotImplemented
        return (self.t, self.var) < (other.t, other.var)

    def shift(self, dt: int) -> "TimeVertex":
        return TimeVertex(self.var, self.t + dt)

    def __repr__(self):
        return f"TimeVertex({self.var}, {self.t})"


class Dag:
    """A DAG over arbitrary hashable vertices with a dense index.

    Vertex order is the order given at construction; ``index(v)`` returns the
    position. ``parents_idx``/``children_idx`` are tuples of index tuples.
    """

    def __init__(self, vertices: Iterable[Hashable], edges: Iterable[tuple], check_acyclic: bool = True):
        self._vertices = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self._vertices)}
        if len(self._index) != len(self._vertices):
            raise GraphError("duplicate vertices")
        parents: list[list[int]] = [[] for _ in self._vertices]
        children: list[list[int]] = [[] for _ in self._vertices]
        edge_set = set()
        for u, v in edges:
            iu, iv = self._index_or_raise(u), self._index_or_raise(v)
            if iu == iv:
                raise GraphError(f"self edge at {u!r}")
            if (iu, iv) in edge_set:
                continue
            edge_set.add((iu, iv))
            parents[iv].append(iu)
            children[iu].append(iv)
        self.parents_idx = tuple(tuple(sorted(p)) for p in parents)
        self.children_idx = tuple(tuple(sorted(c)) for c in children)
        self._edge_idx = frozenset(edge_set)
        if check_acyclic and not self._acyclic():
            raise GraphError("graph contains a directed cycle")

    def _index_or_raise(self, v) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {v!r}") from None

    def _acyclic(self) -> bool:
        indeg = [len(p) for p in self.parents_idx]
        stack = [i for i, n in enumerate(indeg) if n == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for c in self.children_idx[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    stack.append(c)
        return seen == len(indeg)

    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def edges(self) -> frozenset:
        vs = self._vertices
        return frozenset((vs[i], vs[j]) for i, j in self._edge_idx)

    def __len__(self):
        return len(self._vertices)

    def __contains__(self, v):
        return v in self._index

    def index(self, v) -> int:
        return self._index_or_raise(v)

    def has_edge(self, u, v) -> bool:
        return (self.index(u), self.index(v)) in self._edge_idx

    def adjacent(self, u, v) -> bool:
        return self.has_edge(u, v) or self.has_edge(v, u)

    def parents(self, v) -> tuple:
        return tuple(self._vertices[i] for i in self.parents_idx[self.index(v)])

    def children(self, v) -> tuple:
        return tuple(self._vertices[i] for i in self.children_idx[self.index(v)])


class FullTimeDag(Dag):
    """The unrolled DAG of a first-order SVAR over ``d`` series and ``T`` steps.

    Vertex ``TimeVertex(var, t)`` has index ``(t - 1) * d + var``. A vertex is
    observed iff ``t = 1 (mod k)``.
    """

    def __init__(self, d: int, T: int, k: int, edges: Iterable[tuple[TimeVertex, TimeVertex]]):
        self.d, self.T, self.k = d, T, k
        verts = [TimeVertex(v, t) for t in range(1, T + 1) for v in range(d)]
        edges = list(edges)
        for u, v in edges:
            if v.t != u.t + 1:
                raise GraphError(f"edge {u}->{v} does not span exactly one step")
        # forward-in-time edges cannot close a cycle
        super().__init__(verts, edges, check_acyclic=False)

    def is_observed(self, v: TimeVertex) -> bool:
        self.index(v)
        return (v.t - 1) % self.k == 0

    @property
    def observed_times(self) -> tuple[int, ...]:
        return tuple(range(1, self.T + 1, self.k))

    @property
    def observed(self) -> frozenset:
        return frozenset(v for v in self.vertices if (v.t - 1) % self.k == 0)

    @property
    def latent(self) -> frozenset:
        return frozenset(v for v in self.vertices if (v.t - 1) % self.k != 0)

    def frame(self, t: int) -> tuple[TimeVertex, ...]:
        return tuple(TimeVertex(v, t) for v in range(self.d))


def _pair(a: TimeVertex, b: TimeVertex) -> tuple[TimeVertex, TimeVertex]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Mag:
    """Mixed graph of directed and bidirected edges over observed time vertices.

    ``k`` is the time span of every directed (lagged) edge. Bidirected edges
    are stored as ordered pairs ``(min, max)`` under the ``(t, var)`` order.
    """

    vertices: frozenset
    directed: frozenset
    bidirected: frozenset
    k: int

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "directed", frozenset(self.directed))
        object.__setattr__(self, "bidirected", frozenset(_pair(a, b) for a, b in self.bidirected))
        self.validate()

    def validate(self) -> None:
        und = set()
        for a, b in self.directed:
            if a not in self.vertices or b not in self.vertices:
                raise GraphError(f"directed edge {a}->{b} references unknown vertex")
            if b.t != a.t + self.k:
                raise GraphError(f"directed edge {a}->{b} does not span k={self.k}")
            und.add(_pair(a, b))
        for a, b in self.bidirected:
            if a not in self.vertices or b not in self.vertices:
                raise GraphError(f"bidirected edge {a}<->{b} references unknown vertex")
            if a.t != b.t:
                raise GraphError(f"bidirected edge {a}<->{b} is not instantaneous")
            if a == b:
                raise GraphError("bidirected self edge")
            if (a, b) in und:
                raise GraphError(f"{a} and {b} joined by both edge types")

    def adjacent(self, a: TimeVertex, b: TimeVertex) -> bool:
        return (a, b) in self.directed or (b, a) in self.directed or _pair(a, b) in self.bidirected

    def has_bidirected(self, a: TimeVertex, b: TimeVertex) -> bool:
        return _pair(a, b) in self.bidirected

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(sorted({v.t for v in self.vertices}))

    @property
    def d(self) -> int:
        return max((v.var for v in self.vertices), default=-1) + 1

    def window(self, t: int) -> "Mag":
        """Edges between frames ``t`` and ``t + k``, shifted so the frames become 1 and ``1 + k``.

        Keeps lagged edges ``t -> t + k`` and instantaneous edges at ``t + k``.
        """
        dt = 1 - t
        verts = {v.shift(dt) for v in self.vertices if v.t in (t, t + self.k)}
        directed = {(a.shift(dt), b.shift(dt)) for a, b in self.directed if a.t == t}
        bidirected = {(a.shift(dt), b.shift(dt)) for a, b in self.bidirected if a.t == t + self.k}
        return Mag(frozenset(verts), frozenset(directed), frozenset(bidirected), self.k)

    # window-level lookups by series index; the window's frames are the two smallest times
    def lagged(self, i: int, j: int) -> bool:
        t0 = self.times[0]
        return (TimeVertex(i, t0), TimeVertex(j, t0 + self.k)) in self.directed

    def instantaneous(self, i: int, j: int) -> bool:
        t1 = self.times[0] + self.k
        return _pair(TimeVertex(i, t1), TimeVertex(j, t1)) in self.bidirected


@dataclass(frozen=True)
class PdDag:
    """Partially determined DAG: solid (decided) and dashed (undecided) edges over ``d`` series."""

    d: int
    solid: frozenset = frozenset()
    dashed: frozenset = frozenset()

    def __post_init__(self):
        solid = frozenset((int(a), int(b)) for a, b in self.solid)
        dashed = frozenset((int(a), int(b)) for a, b in self.dashed)
        for a, b in solid | dashed:
            if a == b:
                raise GraphError("PD-DAG cannot hold self edges")
            if not (0 <= a < self.d and 0 <= b < self.d):
                raise GraphError(f"edge {a}->{b} out of range")
        if solid & dashed:
            raise GraphError("edge both solid and dashed")
        object.__setattr__(self, "solid", solid)
        object.__setattr__(self, "dashed", dashed)

    @property
    def edges(self) -> frozenset:
        return self.solid | self.dashed

    def successors(self, a: int) -> list[int]:
        return sorted(b for x, b in self.edges if x == a)

    def promote(self, edge: tuple[int, int]) -> "PdDag":
        if edge not in self.dashed:
            raise GraphError(f"{edge} is not a dashed edge")
        return PdDag(self.d, self.solid | {edge}, self.dashed - {edge})

    def remove(self, edge: tuple[int, int]) -> "PdDag":
        if edge not in self.dashed:
            raise GraphError(f"{edge} is not a dashed edge")
        return PdDag(self.d, self.solid, self.dashed - {edge})
