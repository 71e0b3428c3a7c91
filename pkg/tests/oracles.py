"""Brute-force reference implementations used as test oracles.

These work on plain ``(n, edges)`` descriptions and share no code with the
package, so agreement is meaningful.
"""

from __future__ import annotations

import itertools

import numpy as np


def closure(n, edges):
    """Reflexive-transitive reachability matrix: reach[i, j] iff i => j."""
    reach = np.eye(n, dtype=bool)
    for i, j in edges:
        reach[i, j] = True
    for m in range(n):
        reach |= reach[:, [m]] & reach[[m], :]
    return reach


def _neighbours(n, edges):
    nb = [set() for _ in range(n)]
    for i, j in edges:
        nb[i].add(j)
        nb[j].add(i)
    return nb


def simple_paths(n, edges, src, dst, accept_prefix=None):
    """Yield every simple path src..dst in the skeleton.

    ``accept_prefix(path, nxt)`` may veto extending ``path`` by ``nxt``;
    it is only used to skip prefixes that can never satisfy a local rule.
    """
    nb = _neighbours(n, edges)
    stack = [(src,)]
    while stack:
        path = stack.pop()
        for w in sorted(nb[path[-1]]):
            if w in path:
                continue
            if accept_prefix is not None and not accept_prefix(path, w):
                continue
            if w == dst:
                yield path + (w,)
            else:
                stack.append(path + (w,))


def bf_d_separated(n, edges, x, y, z):
    eset = set(edges)
    reach = closure(n, edges)
    z = set(z)

    def collider(p, v, w):
        return (p, v) in eset and (w, v) in eset

    def ok(path, w):
        # judge the vertex that just became interior
        if len(path) < 2:
            return True
        p, v = path[-2], path[-1]
        if collider(p, v, w):
            return any(reach[v, q] for q in z)
        return v not in z

    for _ in simple_paths(n, edges, x, y, ok):
        return False
    return True


def bf_has_inducing(n, edges, a, b, latent):
    eset = set(edges)
    reach = closure(n, edges)
    latent = set(latent)

    def ok(path, w):
        if len(path) < 2:
            return True
        p, v = path[-2], path[-1]
        if (p, v) in eset and (w, v) in eset:
            return bool(reach[v, a] or reach[v, b])
        return v in latent

    for _ in simple_paths(n, edges, a, b, ok):
        return True
    return False


def bf_mag(n, edges, observed):
    """Return (directed, bidirected) index-pair sets of the MAG over ``observed``."""
    reach = closure(n, edges)
    latent = set(range(n)) - set(observed)
    directed, bidirected = set(), set()
    obs = sorted(observed)
    for a, b in itertools.combinations(obs, 2):
        if not bf_has_inducing(n, edges, a, b, latent):
            continue
        if reach[a, b]:
            directed.add((a, b))
        elif reach[b, a]:
            directed.add((b, a))
        else:
            bidirected.add((min(a, b), max(a, b)))
    return directed, bidirected


def time_dag_edges(d, T, lagged):
    """Index edge list of the unrolled DAG; vertex (var, t) -> (t-1)*d + var."""
    return [((t - 2) * d + i, (t - 1) * d + j) for t in range(2, T + 1) for i, j in lagged]


def bf_paths_pd(n, edges, a, b, max_len, exclude_direct):
    """Enumerate directed simple paths a => b by brute force over vertex sequences."""
    eset = set(edges)
    others = [v for v in range(n) if v not in (a, b)]
    for m in range(0, max_len + 1):
        for mid in itertools.permutations(others, m):
            seq = (a,) + mid + (b,)
            if m == 0 and exclude_direct:
                continue
            if all((u, v) in eset for u, v in zip(seq, seq[1:])):
                return True
    return False


def bf_confounding(n, edges, a, b, max_r, max_q):
    eset = set(edges)

    def paths(u, dst, max_len):
        others = [v for v in range(n) if v not in (u, dst)]
        for m in range(0, max_len + 1):
            for mid in itertools.permutations(others, m):
                seq = (u,) + mid + (dst,)
                if all((x, y) in eset for x, y in zip(seq, seq[1:])):
                    yield seq

    for u in range(n):
        if u in (a, b):
            continue
        for pa in paths(u, a, max_r):
            for pb in paths(u, b, max_q):
                if set(pa[1:]).isdisjoint(pb[1:]):
                    return True
    return False


def f1_by_hand(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 1.0
    r = tp / (tp + fn) if tp + fn else 1.0
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)
