"""Line-oriented edge-list format.

One item per line: a bare vertex token declares a vertex, ``A -> B``,
``A <-> B`` and ``A --> B`` declare directed, bidirected and dashed edges.
Time-indexed vertices are written ``name@t``. Lines starting with ``#`` and
blank lines are ignored. Writers emit vertex declarations first (index
order), then edges sorted by endpoint index, so writing a parsed canonical
file reproduces it byte for byte.
"""

from __future__ import annotations

import re
from pathlib import Path

from .types import GraphError, Mag, PdDag, SummaryGraph, TimeVertex, default_names

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_OPS = ("->", "<->", "-->")


class GraphFormatError(GraphError):
    pass


def _check_names(names):
    for n in names:
        if not _NAME.match(n) or n in _OPS:
            raise GraphFormatError(f"invalid vertex name {n!r}")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            yield lineno, parts[0], None, None
        elif len(parts) == 3 and parts[1] in _OPS:
            yield lineno, parts[0], parts[1], parts[2]
        else:
            raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}")


def _split_time(token: str, lineno: int) -> tuple[str, int]:
    name, sep, t = token.partition("@")
    if not sep:
        raise GraphFormatError(f"line {lineno}: expected name@t, got {token!r}")
    try:
        return name, int(t)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: bad time index in {token!r}") from None


class _Names:
    def __init__(self):
        self.order: list[str] = []
        self.index: dict[str, int] = {}

    def __call__(self, name: str, lineno: int) -> int:
        if name not in self.index:
            if not _NAME.match(name):
                raise GraphFormatError(f"line {lineno}: invalid vertex name {name!r}")
            self.index[name] = len(self.order)
            self.order.append(name)
        return self.index[name]


# summary graphs

def format_summary(g: SummaryGraph) -> str:
    _check_names(g.names)
    out = [g.names[i] for i in range(g.d)]
    edges = sorted(g.edges | {(i, i) for i in g.self_loops})
    out += [f"{g.names[i]} -> {g.names[j]}" for i, j in edges]
    return "".join(line + "\n" for line in out)


def parse_summary(text: str) -> SummaryGraph:
    names = _Names()
    edges, loops = set(), set()
    for lineno, a, op, b in _lines(text):
        if "@" in a or (b and "@" in b):
            raise GraphFormatError(f"line {lineno}: time-indexed vertex in a summary graph")
        ia = names(a, lineno)
        if op is None:
            continue
        if op != "->":
            raise GraphFormatError(f"line {lineno}: summary graphs only hold '->' edges")
        ib = names(b, lineno)
        if ia == ib:
            loops.add(ia)
        else:
            edges.add((ia, ib))
    return SummaryGraph(len(names.order), frozenset(edges), frozenset(loops), tuple(names.order))


# PD-DAGs

def format_pd_dag(pd: PdDag, names=None) -> str:
    names = default_names(pd.d) if names is None else tuple(names)
    _check_names(names)
    out = list(names)
    tagged = sorted([(e, "->") for e in pd.solid] + [(e, "-->") for e in pd.dashed])
    out += [f"{names[a]} {op} {names[b]}" for (a, b), op in tagged]
    return "".join(line + "\n" for line in out)


def parse_pd_dag(text: str) -> tuple[PdDag, tuple[str, ...]]:
    names = _Names()
    solid, dashed = set(), set()
    for lineno, a, op, b in _lines(text):
        ia = names(a, lineno)
        if op is None:
            continue
        if op == "<->":
            raise GraphFormatError(f"line {lineno}: PD-DAGs hold no bidirected edges")
        (solid if op == "->" else dashed).add((ia, names(b, lineno)))
    return PdDag(len(names.order), frozenset(solid), frozenset(dashed)), tuple(names.order)


# MAGs

def format_mag(m: Mag, names=None) -> str:
    names = default_names(m.d) if names is None else tuple(names)
    _check_names(names)

    def tok(v: TimeVertex) -> str:
        return f"{names[v.var]}@{v.t}"

    out = [tok(v) for v in sorted(m.vertices)]
    items = [((a, b), "->") for a, b in m.directed] + [((a, b), "<->") for a, b in m.bidirected]
    items.sort(key=lambda it: (it[0][0].t, it[0][0].var, it[0][1].t, it[0][1].var, it[1]))
    out += [f"{tok(a)} {op} {tok(b)}" for (a, b), op in items]
    return "".join(line + "\n" for line in out)


def parse_mag(text: str, k: int | None = None) -> tuple[Mag, tuple[str, ...]]:
    """Parse a MAG; ``k`` defaults to the gap between the two earliest frames."""
    names = _Names()
    verts, directed, bidirected = set(), set(), set()
    for lineno, a, op, b in _lines(text):
        na, ta = _split_time(a, lineno)
        va = TimeVertex(names(na, lineno), ta)
        verts.add(va)
        if op is None:
            continue
        if op == "-->":
            raise GraphFormatError(f"line {lineno}: MAGs hold no dashed edges")
        nb, tb = _split_time(b, lineno)
        vb = TimeVertex(names(nb, lineno), tb)
        verts.add(vb)
        (directed if op == "->" else bidirected).add((va, vb))
    if k is None:
        times = sorted({v.t for v in verts})
        if len(times) < 2:
            raise GraphFormatError("cannot infer k from a single frame")
        k = times[1] - times[0]
    return Mag(frozenset(verts), frozenset(directed), frozenset(bidirected), k), tuple(names.order)


def detect_kind(text: str) -> str:
    """'mag', 'pd_dag' or 'summary' from the tokens present."""
    kind = "summary"
    for _, a, op, b in _lines(text):
        if "@" in a:
            return "mag"
        if op == "-->":
            kind = "pd_dag"
    return kind


def read_summary(path) -> SummaryGraph:
    return parse_summary(Path(path).read_text())


def write_text(path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
