"""CI sources used by discovery.

A backend answers two kinds of question over a two-frame window whose
frames are ``t = 1`` (earlier) and ``t = 1 + k`` (later):

* ``ci(x, y, z)``: an ordinary conditional-independence query.
* ``mediator_test(a, b, m_set, s_set)``: whether ``a`` at the earlier frame is
  independent of ``b`` at the later frame given the unobserved values of
  ``m_set`` one step after the earlier frame and ``s_set`` at the earlier frame.
"""

from __future__ import annotations

from ..graph_core import SummaryGraph, TimeVertex, d_separated, unroll
from ..svar_sim import TimeSeriesDataset
from .oracle import oracle_ci
from .plain import plain_ci_test
from .proxy import proxy_linearity_test
from .types import CiError, CiQuery, CiVerdict


class OracleBackend:
    """d-separation in the unrolled graph, with ``history`` steps before the window."""

    method = "oracle"

    def __init__(self, g: SummaryGraph, k: int, history: int | None = None):
        if history is None:
            history = k * max(g.d, 2)
        if history % k:
            raise ValueError("history must be a multiple of k")
        self.g, self.k, self.d = g, k, g.d
        self.t0 = 1 + history
        self.full = unroll(g, self.t0 + k, k)

    def _shift(self, v: TimeVertex) -> TimeVertex:
        return TimeVertex(v.var, v.t - 1 + self.t0)

    def ci(self, x, y, z) -> CiVerdict:
        q = CiQuery(self._shift(x), self._shift(y), frozenset(self._shift(v) for v in z))
        return oracle_ci(self.full, q)

    def mediator_sets(self, a, b, m_set, s_set):
        t = self.t0
        cond = {TimeVertex(m, t + 1) for m in m_set} | {TimeVertex(s, t) for s in s_set}
        return TimeVertex(a, t), TimeVertex(b, t + self.k), cond

    def mediator_test(self, a, b, m_set, s_set) -> CiVerdict:
        x, y, cond = self.mediator_sets(a, b, m_set, s_set)
        if y in cond:
            # only possible when k == 1; the window never produces it for k >= 2
            raise CiError("outcome vertex inside the conditioning set")
        sep = d_separated(self.full, {x}, {y}, cond - {x})
        return CiVerdict(sep, 0.0 if sep else 1.0, 0.5, "oracle")

    def proxy_valid(self, a, m_set, s_set) -> bool:
        """Whether the later-frame copies of ``m_set`` are valid proxies for the query."""
        x, _, cond = self.mediator_sets(a, a, m_set, s_set)
        proxies = {TimeVertex(m, self.t0 + self.k) for m in m_set}
        return d_separated(self.full, {x}, proxies, cond - {x})


class DataBackend:
    """Statistical tests on a dataset, pooling all adjacent frame pairs."""

    def __init__(self, data: TimeSeriesDataset, alpha: float = 0.05, ci_method: str = "rank",
                 proxy_options: dict | None = None, seed: int = 0):
        self.data, self.alpha, self.ci_method = data, alpha, ci_method
        self.k, self.d = data.k, data.d
        self.proxy_options = dict(proxy_options or {})
        self.seed = seed
        self.method = f"data:{ci_method}"

    def ci(self, x, y, z) -> CiVerdict:
        return plain_ci_test(self.data, CiQuery(x, y, frozenset(z)), self.alpha, self.ci_method, seed=self.seed)

    def mediator_test(self, a, b, m_set, s_set) -> CiVerdict:
        k = self.k
        w = [TimeVertex(m, 1 + k) for m in sorted(m_set)]
        s = [TimeVertex(v, 1) for v in sorted(s_set) if v != a]
        return proxy_linearity_test(self.data, TimeVertex(a, 1), TimeVertex(b, 1 + k), w, s,
                                    self.alpha, **self.proxy_options)
