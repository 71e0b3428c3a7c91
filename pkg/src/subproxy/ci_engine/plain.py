"""Rank-based partial correlation test on pooled frame pairs."""

from __future__ import annotations

import numpy as np
from scipy import special, stats

from ..svar_sim import TimeSeriesDataset
from .types import CiError, CiQuery, CiVerdict, InsufficientSamplesError

MIN_SAMPLES = 20
MIN_PER_CONDITIONING = 10


def pooled_columns(data: TimeSeriesDataset, vertices) -> np.ndarray:
    """Stack observations of time-indexed vertices, pooling every admissible frame offset.

    Times must be observed (``t = 1 mod k``) and lie within one frame step of
    each other; the earliest time is aligned with frame 0, 1, ... in turn.
    """
    vertices = list(vertices)
    times = {v.t for v in vertices}
    for t in times:
        if (t - 1) % data.k:
            raise CiError(f"time {t} is not an observed frame for k={data.k}")
    t0 = min(times)
    offsets = [(v.t - t0) // data.k for v in vertices]
    span = max(offsets)
    if span >= data.m:
        raise CiError("query spans more frames than the dataset holds")
    for v in vertices:
        if not 0 <= v.var < data.d:
            raise CiError(f"variable {v.var} out of range")
    blocks = []
    for base in range(data.m - span):
        blocks.append(np.stack([data.data[:, base + o, v.var] for v, o in zip(vertices, offsets)], axis=1))
    return np.concatenate(blocks, axis=0)


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Column-wise van der Waerden scores (average ranks for ties)."""
    x = np.atleast_2d(np.asarray(x, dtype=float).T).T
    n = x.shape[0]
    ranks = stats.rankdata(x, axis=0)
    return special.ndtri(ranks / (n + 1.0))


def residualize(y: np.ndarray, z: np.ndarray | None) -> np.ndarray:
    """OLS residuals of the columns of ``y`` on ``z`` plus an intercept."""
    y = np.asarray(y, dtype=float)
    if z is None or z.shape[1] == 0:
        return y - y.mean(axis=0)
    design = np.column_stack([np.ones(len(z)), z])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return y - design @ coef


def min_samples(n_cond: int) -> int:
    return MIN_SAMPLES + MIN_PER_CONDITIONING * n_cond


def plain_ci_test(data: TimeSeriesDataset, q: CiQuery, alpha: float = 0.05, method: str = "rank",
                  n_perm: int = 200, seed: int = 0) -> CiVerdict:
    """Conditional independence of ``q.x`` and ``q.y`` given ``q.z``.

    ``method="rank"`` uses Fisher's z on the partial correlation of normal
    scores; ``method="permutation"`` permutes the residualised ``x`` instead.
    """
    if q.proxy_map:
        raise CiError("plain_ci_test does not take proxies")
    zs = sorted(q.z)
    cols = pooled_columns(data, [q.x, q.y] + zs)
    n = cols.shape[0]
    if n < min_samples(len(zs)):
        raise InsufficientSamplesError(
            f"{n} samples for a conditioning set of size {len(zs)}; need {min_samples(len(zs))}"
        )
    scores = normal_scores(cols)
    res = residualize(scores[:, :2], scores[:, 2:] if zs else None)
    rx, ry = res[:, 0], res[:, 1]
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    r = 0.0 if denom == 0 else float(np.clip(rx @ ry / denom, -1.0, 1.0))
    if method == "rank":
        dof = n - len(zs) - 3
        stat = float(np.sqrt(dof) * np.arctanh(min(abs(r), 1 - 1e-15)))
        p = float(2.0 * special.ndtr(-stat))
        return CiVerdict(p >= alpha, stat, p, "rank-partial-corr")
    if method == "permutation":
        rng = np.random.default_rng(seed)
        obs = abs(r)
        hits = 0
        for _ in range(n_perm):
            perm = rx[rng.permutation(n)]
            hits += abs(perm @ ry / denom) >= obs
        p = (1.0 + hits) / (1.0 + n_perm)
        return CiVerdict(p >= alpha, obs, p, "rank-partial-corr-permutation")
    raise ValueError(f"unknown method {method!r}")
