"""Path and confounding-structure queries on PD-DAGs.

Solid and dashed edges both count. Lengths count intermediate vertices, so a
single edge is a path of length 0.
"""

from __future__ import annotations

from collections import deque

from .types import PdDag


def _successors(pd: PdDag) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {v: [] for v in range(pd.d)}
    for a, b in sorted(pd.edges):
        succ[a].append(b)
    return succ


def directed_path_within(pd: PdDag, a: int, b: int, max_len: int, exclude_direct: bool = False) -> bool:
    if a == b:
        raise ValueError("endpoints must differ")
    if max_len < 0:
        return False
    succ = _successors(pd)
    dist = {a: 0}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        if dist[v] > max_len:
            break
        for w in succ[v]:
            if exclude_direct and v == a and w == b:
                continue
            if w == b:
                return True
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return False


def _paths_to(succ: dict[int, list[int]], src: int, dst: int, max_len: int) -> list[tuple[int, ...]]:
    """All simple directed paths src => dst with at most ``max_len`` intermediate vertices."""
    out = []
    stack = [(src, (src,))]
    while stack:
        v, path = stack.pop()
        for w in succ[v]:
            if w == dst:
                out.append(path + (w,))
            elif w not in path and len(path) <= max_len:
                stack.append((w, path + (w,)))
    return out


def confounding_structure_within(pd: PdDag, a: int, b: int, max_r: int, max_q: int) -> bool:
    """Some third vertex reaches ``a`` within ``max_r`` and ``b`` within ``max_q`` by paths sharing only itself."""
    if a == b:
        raise ValueError("endpoints must differ")
    if max_r < 0 or max_q < 0:
        return False
    succ = _successors(pd)
    for u in range(pd.d):
        if u in (a, b):
            continue
        to_a = _paths_to(succ, u, a, max_r)
        if not to_a:
            continue
        to_b = _paths_to(succ, u, b, max_q)
        for pa in to_a:
            used = set(pa[1:])
            if any(used.isdisjoint(pb[1:]) for pb in to_b):
                return True
    return False
