"""Inducing paths and MAG construction for subsampled full time DAGs."""

from __future__ import annotations

from collections import deque
from typing import Collection, Sequence

from .separation import ancestor_idx
from .types import Dag, FullTimeDag, GraphError, Mag, TimeVertex

_UP, _DOWN = 0, 1


def _collider_flags(g: Dag, idx: Sequence[int]) -> list[bool]:
    """Per interior position, whether both neighbouring edges point into it."""
    flags = []
    for i in range(1, len(idx) - 1):
        prev, v, nxt = idx[i - 1], idx[i], idx[i + 1]
        flags.append(prev in g.parents_idx[v] and nxt in g.parents_idx[v])
    return flags


def _path_indices(g: Dag, path: Sequence) -> list[int]:
    idx = [g.index(v) for v in path]
    if len(idx) < 2:
        raise GraphError("a path needs at least two vertices")
    if len(set(idx)) != len(idx):
        raise GraphError("path vertices must be distinct")
    for u, v in zip(idx, idx[1:]):
        if v not in g.parents_idx[u] and v not in g.children_idx[u]:
            raise GraphError(f"{g.vertices[u]!r} and {g.vertices[v]!r} are not adjacent")
    return idx


def is_inducing_path(g: Dag, path: Sequence, latent: Collection) -> bool:
    """Check the inducing-path conditions for ``path`` relative to ``latent``.

    Every interior vertex must be latent or a collider, and every collider must
    be an ancestor of one of the endpoints.
    """
    idx = _path_indices(g, path)
    lat = {g.index(v) for v in latent}
    if idx[0] in lat or idx[-1] in lat:
        raise GraphError("path endpoints must be observed")
    an_ends = ancestor_idx(g, [idx[0], idx[-1]])
    for v, coll in zip(idx[1:-1], _collider_flags(g, idx)):
        if coll:
            if v not in an_ends:
                return False
        elif v not in lat:
            return False
    return True


def _inducing_reachable(g: Dag, a: int, b: int, latent: Collection[int], an_ab: Collection[int]) -> bool:
    """Whether some walk from ``a`` to ``b`` meets the inducing-path conditions.

    Walks avoid re-entering ``a`` and stop at ``b``. A qualifying walk exists iff
    ``a`` and ``b`` are d-connected given every observed set, i.e. iff a simple
    inducing path exists.
    """
    parents, children = g.parents_idx, g.children_idx
    seen: set[tuple[int, int]] = set()
    queue = deque()
    for p in parents[a]:
        queue.append((p, _UP))
    for c in children[a]:
        queue.append((c, _DOWN))
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        v, direction = state
        if v == b:
            return True
        if v == a:
            continue
        if direction == _UP:
            # tail at v: v is a non-collider whatever comes next
            if v in latent:
                queue.extend((p, _UP) for p in parents[v])
                queue.extend((c, _DOWN) for c in children[v])
        else:
            if v in latent:
                queue.extend((c, _DOWN) for c in children[v])
            if v in an_ab:
                queue.extend((p, _UP) for p in parents[v])
    return False


def has_inducing_path(g: FullTimeDag, a: TimeVertex, b: TimeVertex) -> bool:
    """Inducing path between observed ``a`` and ``b`` relative to the unobserved vertices."""
    if not (g.is_observed(a) and g.is_observed(b)):
        raise GraphError("endpoints must be observed")
    ia, ib = g.index(a), g.index(b)
    latent = {g.index(v) for v in g.latent}
    return _inducing_reachable(g, ia, ib, latent, ancestor_idx(g, [ia, ib]))


def mag_from_full_time_dag(g: FullTimeDag) -> Mag:
    """MAG over the observed vertices of ``g``.

    Adjacent iff an inducing path exists; ``A -> B`` when ``A`` is an ancestor
    of ``B``, otherwise ``A <-> B``.
    """
    obs = sorted(g.observed)
    if len({v.t for v in obs}) < 2:
        raise GraphError("need at least two observed frames")
    latent = {g.index(v) for v in g.latent}
    idx = [g.index(v) for v in obs]
    anc = {i: ancestor_idx(g, [i]) for i in idx}
    directed, bidirected = set(), set()
    for p, ia in enumerate(idx):
        for ib in idx[p + 1:]:
            if not _inducing_reachable(g, ia, ib, latent, anc[ia] | anc[ib]):
                continue
            va, vb = g.vertices[ia], g.vertices[ib]
            if ia in anc[ib]:
                directed.add((va, vb))
            elif ib in anc[ia]:
                directed.add((vb, va))
            else:
                bidirected.add((va, vb))
    return Mag(frozenset(obs), frozenset(directed), frozenset(bidirected), g.k)


def _shortest_directed(g: Dag, src: int, dst: int) -> list[int] | None:
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v == dst:
            out = []
            while v is not None:
                out.append(v)
                v = prev[v]
            return out[::-1]
        for c in g.children_idx[v]:
            if c not in prev:
                prev[c] = v
                queue.append(c)
    return None


def confounder_paths(g: Dag, u, a, b) -> tuple[list, list] | None:
    """Directed paths ``u => a`` and ``u => b`` sharing only ``u``, moving ``u`` down if needed.

    Returns ``None`` when ``u`` is not a common ancestor. The returned paths
    start at the (possibly refined) confounder.
    """
    iu, ia, ib = g.index(u), g.index(a), g.index(b)
    pa, pb = _shortest_directed(g, iu, ia), _shortest_directed(g, iu, ib)
    if pa is None or pb is None:
        return None
    on_b = set(pb)
    # the last vertex of pa that is also on pb gives disjoint tails (acyclicity)
    cut = max(i for i, v in enumerate(pa) if v in on_b)
    w = pa[cut]
    tail_a = pa[cut:]
    tail_b = pb[pb.index(w):]
    verts = g.vertices
    return [verts[i] for i in tail_a], [verts[i] for i in tail_b]


def find_latent_confounder(g: FullTimeDag, path: Sequence[TimeVertex]) -> TimeVertex:
    """Latent common cause of the endpoints of an inducing path.

    Scans colliders from the ``A`` end and takes the confounder just before the
    first collider that is an ancestor of ``B``, or the last confounder. The
    pick is then moved down to where its directed paths to the endpoints split,
    so the two paths share only the returned vertex.
    """
    if not is_inducing_path(g, path, g.latent):
        raise GraphError("not an inducing path")
    idx = _path_indices(g, path)
    a, b = idx[0], idx[-1]
    an_a, an_b = ancestor_idx(g, [a]), ancestor_idx(g, [b])
    if a in an_b or b in an_a:
        raise GraphError("an endpoint is an ancestor of the other")
    interior = idx[1:-1]
    colliders = _collider_flags(g, idx)
    confounders, coll_list = [], []
    for pos, v in enumerate(interior, start=1):
        if colliders[pos - 1]:
            coll_list.append(v)
        elif idx[pos - 1] in g.children_idx[v] and idx[pos + 1] in g.children_idx[v]:
            confounders.append(v)
    if not confounders:
        raise GraphError("inducing path carries no confounder")
    pick = confounders[-1]
    for i, c in enumerate(coll_list):
        if c in an_b:
            pick = confounders[i]
            break
    paths = confounder_paths(g, g.vertices[pick], g.vertices[a], g.vertices[b])
    if paths is None:
        raise GraphError("confounder scan failed; path assumptions violated")
    return paths[0][0]
