"""Proxy linearity test for conditioning on an unobserved mediator.

Under the null, the profile of ``b`` given ``a`` is a fixed linear image of
the profiles of the proxies ``w`` given ``a``. Everything is discretised:
``a`` into quantile bins that act as instruments, ``b`` and each ``w`` into
a few quantile bins encoded as indicators. The fit is two-step GMM with
per-bin covariance weights, and the overidentification statistic (Hansen's
J) is referred to a chi-square distribution. Conditioning variables enter
by linear residualisation of the normal scores.

``calibration="permutation"`` instead regresses the binned profile matrix of
``b`` on that of ``w`` by least squares and calibrates the residual norm by
permuting the ``a`` bins. It is kept for comparison: permuting ``a`` flattens
both profiles at once, so its null distribution is too narrow and the test
over-rejects when the proxies carry signal.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .plain import normal_scores, pooled_columns, residualize
from .types import CiError, CiVerdict

MIN_BINS = 3


class ProxyTestError(CiError):
    pass


def quantile_bins(x: np.ndarray, n_bins: int) -> np.ndarray:
    """Equal-count bins from ranks (ties broken by position, so every bin is filled)."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=np.int64)
    ranks[order] = np.arange(len(x))
    return (ranks * n_bins) // len(x)


def _indicators(bins: np.ndarray, n_bins: int, drop_first: bool) -> np.ndarray:
    out = np.zeros((len(bins), n_bins))
    out[np.arange(len(bins)), bins] = 1.0
    return out[:, 1:] if drop_first else out


def _gmm_j(groups: np.ndarray, n_groups: int, y: np.ndarray, x: np.ndarray, steps: int = 2):
    """Hansen J for E[y - G'x | group] = 0 with group indicators as instruments."""
    n, q = y.shape
    p = x.shape[1]
    counts = np.bincount(groups, minlength=n_groups).astype(float)
    ybar = np.zeros((n_groups, q))
    xbar = np.zeros((n_groups, p))
    np.add.at(ybar, groups, y)
    np.add.at(xbar, groups, x)
    ybar /= counts[:, None]
    xbar /= counts[:, None]
    eye = np.eye(q)
    omega_inv = np.broadcast_to(eye, (n_groups, q, q)).copy()
    theta = None
    for _ in range(steps):
        # theta = vec(G') ; the group-mean residual is ybar_g - kron(xbar_g', I_q) theta
        lhs = np.zeros((p * q, p * q))
        rhs = np.zeros(p * q)
        for g in range(n_groups):
            dg = np.kron(xbar[g][None, :], eye)
            wg = counts[g] * omega_inv[g]
            lhs += dg.T @ wg @ dg
            rhs += dg.T @ wg @ ybar[g]
        theta = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
        gamma_t = theta.reshape(p, q)
        resid = y - x @ gamma_t
        for g in range(n_groups):
            rg = resid[groups == g]
            cov = np.cov(rg, rowvar=False, bias=True).reshape(q, q)
            omega_inv[g] = np.linalg.pinv(cov + 1e-10 * np.eye(q))
    gamma_t = theta.reshape(p, q)
    stat = 0.0
    for g in range(n_groups):
        e = ybar[g] - xbar[g] @ gamma_t
        stat += counts[g] * e @ omega_inv[g] @ e
    return float(stat)


def _profile(groups: np.ndarray, n_groups: int, ind: np.ndarray) -> np.ndarray:
    counts = np.bincount(groups, minlength=n_groups)[:, None]
    out = np.zeros((n_groups, ind.shape[1]))
    np.add.at(out, groups, ind)
    return out / counts


def _ls_residual(groups: np.ndarray, n_groups: int, y: np.ndarray, x: np.ndarray) -> float:
    pb, pw = _profile(groups, n_groups, y), _profile(groups, n_groups, x)
    coef = np.linalg.lstsq(pw, pb, rcond=None)[0]
    return float(np.sum((pb - pw @ coef) ** 2))


def proxy_linearity_arrays(a, b, w_set, s_set=None, alpha: float = 0.05, n_bins: int = 8,
                         proxy_bins: int = 3, outcome_bins: int = 3, min_per_bin: int = 25,
                         calibration: str = "gmm", n_perm: int = 200, seed=0) -> CiVerdict:
    """Test ``a`` independent of ``b`` given the mediator proxied by ``w_set`` (and ``s_set``).

    Parameters
    ----------
    a, b : array of shape (n,)
    w_set : array of shape (n, n_w), n_w >= 1
        Observed proxies of the unobserved mediators.
    s_set : array of shape (n, n_s) or None
        Observed conditioning variables.
    n_bins : int
        Requested number of ``a`` bins. Raised to keep the model
        overidentified and lowered when bins would hold fewer than
        ``min_per_bin`` samples.
    calibration : {"gmm", "permutation"}
        Chi-square reference for Hansen's J, or a permutation threshold for
        the least-squares profile residual (``n_perm`` draws from ``seed``).

    Returns
    -------
    CiVerdict
        ``independent`` is True when the linear relation is not rejected.
    """
    if calibration not in ("gmm", "permutation"):
        raise ValueError(f"unknown calibration {calibration!r}")
    a = np.asarray(a, float).ravel()
    b = np.asarray(b, float).ravel()
    w = np.asarray(w_set, float)
    if w.ndim == 1:
        w = w[:, None]
    if w.size == 0 or w.shape[1] == 0:
        raise ProxyTestError("proxy test needs at least one proxy variable")
    n = len(a)
    if len(b) != n or w.shape[0] != n:
        raise ProxyTestError("inputs must have equal length")
    s = None
    if s_set is not None:
        s = np.asarray(s_set, float)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape[1] == 0:
            s = None
    cols = np.column_stack([a, b, w] + ([s] if s is not None else []))
    scores = normal_scores(cols)
    n_w = w.shape[1]
    res = residualize(scores[:, : 2 + n_w], scores[:, 2 + n_w:] if s is not None else None)

    level_w = proxy_bins
    while True:
        p = 1 + n_w * (level_w - 1)
        n_a = max(n_bins, p + 2)
        n_a = min(n_a, n // min_per_bin)
        if n_a > p or level_w == 2:
            break
        level_w -= 1
    if n_a < MIN_BINS or n_a <= p:
        raise ProxyTestError(
            f"{n} samples cannot support {p} proxy columns with {min_per_bin} per bin (need {MIN_BINS}+ bins)"
        )
    groups = quantile_bins(res[:, 0], n_a)
    y = _indicators(quantile_bins(res[:, 1], outcome_bins), outcome_bins, drop_first=True)
    x = np.column_stack([np.ones(n)] + [
        _indicators(quantile_bins(res[:, 2 + i], level_w), level_w, drop_first=True) for i in range(n_w)
    ])
    if calibration == "permutation":
        stat = _ls_residual(groups, n_a, y, x)
        rng = np.random.default_rng(seed)
        null = np.array([_ls_residual(rng.permutation(groups), n_a, y, x) for _ in range(n_perm)])
        pval = float((1 + np.sum(null >= stat)) / (n_perm + 1))
        return CiVerdict(pval >= alpha, stat, pval, "proxy-linearity-permutation")
    stat = _gmm_j(groups, n_a, y, x)
    dof = (n_a - p) * (outcome_bins - 1)
    pval = float(stats.chi2.sf(stat, dof))
    return CiVerdict(pval >= alpha, stat, pval, "proxy-linearity-gmm", dof=dof)


def proxy_linearity_test(data, a, b, w_set, s_set=(), alpha: float = 0.05, **options) -> CiVerdict:
    """Dataset form: vertices are observed time vertices, pooled over frame offsets."""
    w_set, s_set = sorted(w_set), sorted(s_set)
    if not w_set:
        raise ProxyTestError("proxy test needs at least one proxy variable")
    cols = pooled_columns(data, [a, b] + w_set + s_set)
    n_w = len(w_set)
    s = cols[:, 2 + n_w:] if s_set else None
    return proxy_linearity_arrays(cols[:, 0], cols[:, 1], cols[:, 2:2 + n_w], s, alpha, **options)
