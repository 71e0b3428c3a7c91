import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subproxy.ci_engine import (
    CiQuery,
    CiVerdict,
    InsufficientSamplesError,
    OracleBackend,
    ProxyTestError,
    oracle_ci,
    plain_ci_test,
    proxy_linearity_arrays,
    proxy_linearity_test,
    quantile_bins,
)
from subproxy.graph_core import SummaryGraph, TimeVertex as V, d_separated, unroll
from subproxy.svar_sim import TimeSeriesDataset, random_mechanism, random_summary_graph, simulate


def frames_dataset(early, late, k=2):
    """Two-frame dataset from per-variable arrays at the earlier and later frame."""
    data = np.stack([np.column_stack(early), np.column_stack(late)], axis=1)
    return TimeSeriesDataset(data, k, tuple(f"X{i + 1}" for i in range(data.shape[2])))


# -- oracle -------------------------------------------------------------------

def test_oracle_examples(chain):
    bare = unroll(SummaryGraph(3, chain.edges, self_loops=()), T=3, k=2)
    v = oracle_ci(bare, CiQuery(V(0, 1), V(2, 3), {V(1, 2)}))
    assert v.independent and v.statistic == 0.0
    full = unroll(chain, T=3, k=2)
    for z in [set(), {V(0, 2)}, {V(2, 2), V(1, 1)}]:
        assert not oracle_ci(full, CiQuery(V(0, 1), V(1, 2), z)).independent


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_matches_d_separation(seed):
    rnd = random.Random(seed)
    g = unroll(random_summary_graph(4, 0.4, seed=seed), T=5, k=2)
    x, y, *rest = rnd.sample(list(g.vertices), 6)
    z = {v for v in rest if rnd.random() < 0.5}
    assert oracle_ci(g, CiQuery(x, y, z)).independent == d_separated(g, {x}, {y}, z)


def test_oracle_backend_is_stable_under_longer_history(diamond):
    short = OracleBackend(diamond, 2, history=4)
    long = OracleBackend(diamond, 2, history=16)
    early = [V(i, 1) for i in range(4)]
    late = [V(i, 3) for i in range(4)]
    for x in early + late:
        for y in late:
            if x == y:
                continue
            for z in ([], [v for v in early if v != x]):
                assert short.ci(x, y, z).independent == long.ci(x, y, z).independent
    assert short.mediator_test(1, 3, {1, 2}, {0, 2, 3}) == long.mediator_test(1, 3, {1, 2}, {0, 2, 3})


# -- plain test -----------------------------------------------------------------

def test_plain_size_on_independent_columns():
    rej = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        ds = frames_dataset([rng.normal(size=2000) for _ in range(2)], [rng.normal(size=2000) for _ in range(2)])
        rej += not plain_ci_test(ds, CiQuery(V(0, 1), V(1, 3))).independent
    assert 0.02 <= rej / 200 <= 0.09


def test_plain_power_on_lagged_parent():
    rej = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=2000)
        ds = frames_dataset([x, rng.normal(size=2000)], [rng.normal(size=2000), 0.5 * x + rng.normal(size=2000)])
        rej += not plain_ci_test(ds, CiQuery(V(0, 1), V(1, 3))).independent
    assert rej / 40 >= 0.95


def test_plain_collider_signature():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=3000), rng.normal(size=3000)
    c = x + y + 0.5 * rng.normal(size=3000)
    ds = frames_dataset([x, y], [c, rng.normal(size=3000)])
    assert plain_ci_test(ds, CiQuery(V(0, 1), V(1, 1))).independent
    assert not plain_ci_test(ds, CiQuery(V(0, 1), V(1, 1), {V(0, 3)})).independent


def test_plain_permutation_agrees_and_is_deterministic():
    rng = np.random.default_rng(2)
    a = rng.normal(size=500)
    ds = frames_dataset([a, rng.normal(size=500)], [a + rng.normal(size=500), rng.normal(size=500)])
    q = CiQuery(V(0, 1), V(0, 3))
    v1 = plain_ci_test(ds, q, method="permutation", seed=3)
    assert not v1.independent and v1 == plain_ci_test(ds, q, method="permutation", seed=3)
    q0 = CiQuery(V(1, 1), V(1, 3))
    assert plain_ci_test(ds, q0, method="permutation", seed=3).independent == plain_ci_test(ds, q0).independent


def test_plain_rejects_tiny_samples():
    rng = np.random.default_rng(0)
    ds = frames_dataset([rng.normal(size=25)] * 3, [rng.normal(size=25)] * 3)
    with pytest.raises(InsufficientSamplesError):
        plain_ci_test(ds, CiQuery(V(0, 1), V(1, 3), {V(1, 1), V(2, 1)}))


# -- proxy test -------------------------------------------------------------------

def test_quantile_bins_equal_counts():
    b = quantile_bins(np.arange(100.0)[::-1], 8)
    assert np.bincount(b).min() >= 12 and b[0] == 7 and b[-1] == 0


def test_proxy_requires_proxy_and_enough_bins():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=500), rng.normal(size=500)
    with pytest.raises(ProxyTestError):
        proxy_linearity_arrays(a, b, np.empty((500, 0)))
    with pytest.raises(ProxyTestError):
        proxy_linearity_arrays(a[:60], b[:60], rng.normal(size=(60, 1)))


def test_proxy_invariant_to_monotone_proxy_rescaling():
    g = SummaryGraph(3, {(0, 1), (1, 2)}, self_loops={1})
    ds = simulate(g, random_mechanism(g, seed=4), n=1500, T=3, k=2, seed=4)
    q = dict(a=V(0, 1), b=V(2, 3), w_set=[V(1, 3)], s_set=[V(1, 1)])
    v1 = proxy_linearity_test(ds, **q)
    data = ds.data.copy()
    data[:, :, 1] = 2 * data[:, :, 1] + 1
    v2 = proxy_linearity_test(TimeSeriesDataset(data, 2, ds.names), **q)
    assert v1 == v2


def test_proxy_permutation_calibration_is_seeded():
    rng = np.random.default_rng(5)
    a = rng.normal(size=1200)
    m = np.sin(a) + rng.normal(size=1200)
    b = m + rng.normal(size=1200)
    w = (m + 0.3 * rng.normal(size=1200))[:, None]
    v1 = proxy_linearity_arrays(a, b, w, calibration="permutation", seed=3)
    v2 = proxy_linearity_arrays(a, b, w, calibration="permutation", seed=3)
    assert v1 == v2
    assert v1.method == "proxy-linearity-permutation"
    assert 0 < v1.threshold_or_pvalue <= 1
    assert proxy_linearity_arrays(a, b, 2 * w + 1, calibration="permutation", seed=3) == v1
    with pytest.raises(ValueError):
        proxy_linearity_arrays(a, b, w, calibration="bootstrap")


def test_proxy_retains_mediated_null():
    g = SummaryGraph(3, {(0, 1), (1, 2)}, self_loops={1})
    rej = 0
    for seed in range(60):
        ds = simulate(g, random_mechanism(g, seed=seed), n=2000, T=3, k=2, seed=seed)
        rej += not proxy_linearity_test(ds, V(0, 1), V(2, 3), [V(1, 3)]).independent
    assert rej / 60 <= 0.12


def test_proxy_with_mediator_as_its_own_proxy_matches_plain_test():
    agree = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=2000)
        m = a + rng.normal(size=2000)
        direct = seed % 2
        b = np.tanh(m) + direct * a + 0.5 * rng.normal(size=2000)
        proxy = proxy_linearity_arrays(a, b, m[:, None])
        plain = plain_ci_test(frames_dataset([a, m], [b, m]), CiQuery(V(0, 1), V(0, 3), {V(1, 1)}))
        agree += proxy.independent == plain.independent
    assert agree / 40 >= 0.8


def test_verdict_serialises():
    v = CiVerdict(True, 1.5, 0.3, "rank-partial-corr")
    rec = json.loads(v.to_json(CiQuery(V(0, 1), V(1, 3), {V(2, 1)}), seed=7))
    assert rec == {
        "method": "rank-partial-corr", "statistic": 1.5, "threshold": 0.3, "verdict": "independent",
        "seed": 7, "query": {"x": [0, 1], "y": [1, 3], "z": [[2, 1]], "proxy_map": []},
    }
