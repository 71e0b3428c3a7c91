"""Ancestry and d-separation by reachability (Bayes ball)."""

from __future__ import annotations

from typing import Collection, Iterable

from .types import Dag, GraphError

_UP = 0    # arrived from a child: the traversed edge has its tail at the current vertex
_DOWN = 1  # arrived from a parent: arrowhead at the current vertex


def ancestor_idx(g: Dag, targets: Iterable[int]) -> set[int]:
    seen: set[int] = set()
    stack = list(targets)
    parents = g.parents_idx
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(parents[v])
    return seen


def descendant_idx(g: Dag, sources: Iterable[int]) -> set[int]:
    seen: set[int] = set()
    stack = list(sources)
    children = g.children_idx
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(children[v])
    return seen


def ancestors(g: Dag, v) -> set:
    """Reflexive-transitive closure of the parent relation at ``v``."""
    verts = g.vertices
    return {verts[i] for i in ancestor_idx(g, [g.index(v)])}


def descendants(g: Dag, v) -> set:
    verts = g.vertices
    return {verts[i] for i in descendant_idx(g, [g.index(v)])}


def reachable_idx(g: Dag, sources: Collection[int], z: Collection[int]) -> set[int]:
    """Indices d-connected to some source given ``z`` (sources included unless in ``z``)."""
    z = set(z)
    an_z = ancestor_idx(g, z)
    parents, children = g.parents_idx, g.children_idx
    visited: set[tuple[int, int]] = set()
    out: set[int] = set()
    stack = [(s, _UP) for s in sources]
    while stack:
        state = stack.pop()
        if state in visited:
            continue
        visited.add(state)
        v, direction = state
        blocked = v in z
        if not blocked:
            out.add(v)
        if direction == _UP:
            if not blocked:
                stack.extend((p, _UP) for p in parents[v])
                stack.extend((c, _DOWN) for c in children[v])
        else:
            if not blocked:
                stack.extend((c, _DOWN) for c in children[v])
            if v in an_z:
                stack.extend((p, _UP) for p in parents[v])
    return out


def d_separated(g: Dag, A: Iterable, B: Iterable, Z: Iterable = ()) -> bool:
    """True iff every path between ``A`` and ``B`` is blocked by ``Z``."""
    a = {g.index(v) for v in A}
    b = {g.index(v) for v in B}
    z = {g.index(v) for v in Z}
    if a & b or a & z or b & z:
        raise GraphError("A, B and Z must be pairwise disjoint")
    if not a or not b:
        return True
    return not (reachable_idx(g, a, z) & b)
