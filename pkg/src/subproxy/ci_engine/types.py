from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..graph_core import TimeVertex


class CiError(RuntimeError):
    """A CI backend could not produce a verdict."""


class InsufficientSamplesError(CiError):
    pass


@dataclass(frozen=True)
class CiQuery:
    x: TimeVertex
    y: TimeVertex
    z: frozenset = frozenset()
    proxy_map: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "z", frozenset(self.z))
        if self.x in self.z or self.y in self.z:
            raise ValueError("x and y must not be in the conditioning set")
        if self.x == self.y:
            raise ValueError("x and y must differ")

    def to_dict(self) -> dict:
        def tok(v):
            return [v.var, v.t]

        return {
            "x": tok(self.x),
            "y": tok(self.y),
            "z": [tok(v) for v in sorted(self.z)],
            "proxy_map": [[tok(u), tok(p)] for u, p in sorted(self.proxy_map.items())],
        }


@dataclass(frozen=True)
class CiVerdict:
    independent: bool
    statistic: float
    threshold_or_pvalue: float
    method: str
    dof: float | None = None

    def to_record(self, query=None, seed=None) -> dict:
        rec = {
            "method": self.method,
            "statistic": float(self.statistic),
            "threshold": float(self.threshold_or_pvalue),
            "verdict": "independent" if self.independent else "dependent",
            "seed": seed,
        }
        if self.dof is not None:
            rec["dof"] = self.dof
        if query is not None:
            rec["query"] = query.to_dict() if isinstance(query, CiQuery) else query
        return rec

    def to_json(self, query=None, seed=None) -> str:
        return json.dumps(self.to_record(query, seed), sort_keys=True)
