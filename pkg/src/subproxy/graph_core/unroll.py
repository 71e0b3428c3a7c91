from __future__ import annotations

from .types import FullTimeDag, SubsamplingError, SummaryGraph, TimeVertex


def unroll(g: SummaryGraph, T: int, k: int) -> FullTimeDag:
    """Time-unrolled DAG of ``g`` over steps ``1..T`` with every ``k``-th frame observed."""
    if k < 2:
        raise SubsamplingError(f"subsampling factor must satisfy k >= 2, got {k}")
    if T < k + 1:
        raise SubsamplingError(f"T={T} gives fewer than two observed frames for k={k} (need T >= k+1)")
    lagged = sorted(g.edges | {(i, i) for i in g.self_loops})
    edges = [
        (TimeVertex(i, t - 1), TimeVertex(j, t))
        for t in range(2, T + 1)
        for i, j in lagged
    ]
    return FullTimeDag(g.d, T, k, edges)
