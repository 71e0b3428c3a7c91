import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from subproxy.graph_core import SubsamplingError, SummaryGraph
from subproxy.svar_sim import (
    BlowUpError,
    MechanismSpec,
    SimulationError,
    TimeSeriesDataset,
    random_mechanism,
    random_summary_graph,
    simulate,
)


def linear_mech(g, w_self=0.5, w_edge=0.6, noise="gauss"):
    funcs, weights = {}, {}
    for i, j in sorted(g.edges | {(i, i) for i in g.self_loops}):
        funcs[f"{i}->{j}"] = "linear"
        weights[f"{i}->{j}"] = w_self if i == j else w_edge
    return MechanismSpec(funcs, weights, (noise,) * g.d)


def test_random_graph_extremes():
    g0 = random_summary_graph(6, 0.0, seed=1)
    assert not g0.edges and g0.self_loops == set(range(6))
    g1 = random_summary_graph(6, 1.0, seed=1)
    assert len(g1.edges) == 15 and g1.is_acyclic()
    g = random_summary_graph(5, 0.3, seed=3)
    assert g.d == 5 and g.is_acyclic()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.floats(0, 1), st.integers(0, 2**31))
def test_random_graph_is_dag_with_self_loops(d, p, seed):
    g = random_summary_graph(d, p, seed=seed)
    assert g.is_acyclic()
    assert g.self_loops == set(range(d))
    assert g == random_summary_graph(d, p, seed=seed)


def test_random_mechanism_ranges():
    g = random_summary_graph(5, 0.6, seed=2)
    mech = random_mechanism(g, seed=4)
    mech.check_covers(g)
    for key, w in mech.weights.items():
        i, j = key.split("->")
        assert 0.3 <= abs(w) <= 0.8
        if i == j and mech.functions[key] == "linear":
            assert abs(w) <= 0.7


def test_pure_noise_moments():
    g = SummaryGraph(2, self_loops=())
    mech = MechanismSpec({}, {}, ("gauss", "gauss"))
    ds = simulate(g, mech, n=2000, T=9, k=2, seed=5)
    assert ds.data.shape == (2000, 5, 2)
    vals = ds.data.ravel()
    tol = 3 / np.sqrt(ds.n * ds.m)
    assert abs(vals.mean()) < 3 * tol
    assert abs(vals.std() - 1) < 3 * tol


@pytest.mark.parametrize("noise", ["uniform", "gauss", "exp", "gamma"])
def test_noise_families_are_standardised(noise):
    g = SummaryGraph(1, self_loops=())
    ds = simulate(g, MechanismSpec({}, {}, (noise,)), n=20000, T=3, k=2, seed=1)
    x = ds.data.ravel()
    assert abs(x.mean()) < 0.03 and abs(x.var() - 1) < 0.05


def test_ar1_stationary_variance():
    g = SummaryGraph(1)
    mech = linear_mech(g, w_self=0.5)
    ds = simulate(g, mech, n=10000, T=19, k=2, seed=8)
    assert ds.n * ds.m >= 10**5
    assert abs(ds.data.var() / (1 / 0.75) - 1) < 0.05


def test_chain_directionality():
    g = SummaryGraph(3, {(0, 1), (1, 2)})
    ds = simulate(g, linear_mech(g), n=2000, T=3, k=2, seed=9)
    early, late = ds.frame_pairs()
    fwd = stats.pearsonr(early[:, 0], late[:, 2])
    bwd = stats.pearsonr(early[:, 2], late[:, 0])
    assert fwd.pvalue < 1e-6
    assert bwd.pvalue > 0.001


def test_determinism_and_prefix_stability():
    g = random_summary_graph(4, 0.5, seed=0)
    mech = random_mechanism(g, seed=0)
    a = simulate(g, mech, n=50, T=7, k=3, seed=11)
    b = simulate(g, mech, n=50, T=7, k=3, seed=11)
    assert np.array_equal(a.data, b.data)
    longer = simulate(g, mech, n=60, T=13, k=3, seed=11)
    assert np.array_equal(longer.data[:50, : a.m], a.data)
    other = simulate(g, mech, n=50, T=7, k=3, seed=12)
    assert not np.array_equal(a.data, other.data)


def test_frame_times_follow_k():
    g = SummaryGraph(1)
    mech = linear_mech(g)
    assert simulate(g, mech, n=3, T=10, k=3, seed=0).m == 4  # t = 1, 4, 7, 10
    with pytest.raises(SubsamplingError):
        simulate(g, mech, n=3, T=10, k=1, seed=0)


def test_blowup_retry_and_error():
    g = SummaryGraph(1)
    ok = simulate(g, linear_mech(g, w_self=1.5), n=10, T=3, k=2, seed=0)
    assert ok.meta["weight_scale"] == 0.5
    with pytest.raises(BlowUpError, match="0->0"):
        simulate(g, linear_mech(g, w_self=40.0), n=10, T=3, k=2, seed=0)


def test_mechanism_must_cover_graph():
    g = SummaryGraph(2, {(0, 1)})
    with pytest.raises(SimulationError):
        simulate(g, linear_mech(SummaryGraph(2)), n=5, T=3, k=2)


def test_dataset_round_trip(tmp_path):
    g = random_summary_graph(3, 0.5, seed=1)
    ds = simulate(g, random_mechanism(g, seed=1), n=7, T=5, k=2, seed=3)
    files = ds.save(tmp_path, truth=g)
    assert [f.name for f in files] == ["data.csv", "meta.json", "truth.graph"]
    back = TimeSeriesDataset.load(tmp_path)
    assert np.array_equal(back.data, ds.data) and back.k == 2 and back.names == g.names
    assert (tmp_path / "data.csv").read_text().splitlines()[0] == "replicate,frame,X1,X2,X3"
    mech = MechanismSpec.from_dict(back.meta["mechanism"])
    assert mech == random_mechanism(g, seed=1)
