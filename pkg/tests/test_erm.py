import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_erm, naive_risk, naive_stump_scan
from pu_risklab.erm import (
    ApproximationError,
    erm,
    erm_finite,
    erm_stump,
    excess_of_erm,
    select_minimum,
    stump_thresholds,
    table_excess,
)
from pu_risklab.model import (
    AllLabelingsOfPoints,
    FiniteEnumeration,
    PUSample,
    Stumps1D,
    TableHypothesis,
    assouad_scenario,
    continuous_margin_scenario,
    discrete_scenario,
    excess_risk,
    sample,
)


def test_select_minimum_ties():
    best, low, ties = select_minimum(np.array([0.3, 0.1, 0.1 + 1e-14, 0.2]))
    assert best == 1 and low == 0.1 and ties == 2


def test_empty_sample_returns_first_hypothesis():
    data = PUSample(np.zeros((0, 3)), [], [], [], 0.5, idx=np.zeros(0, dtype=int))
    res = erm_finite(AllLabelingsOfPoints(3), data, "sar")
    assert res.minimizer.encoding == "table:000" and res.min_emp_risk == 0.0 and res.num_ties == 8


def test_single_point_labeled():
    data = PUSample(np.eye(3)[[0]], [1], [1.0], [1], 1.0, idx=[0])
    res = erm_finite(AllLabelingsOfPoints(3), data, "sar")
    assert res.minimizer.bits[0] == 1 and res.min_emp_risk == 0.0


def test_v8_matches_brute_force():
    sc = assouad_scenario(8, 0.1, 0.3, (1, 0, 1, 1, 0, 0, 1), [0.3, 0.5, 0.7, 0.9, 0.4, 0.6, 0.8])
    data = sample(sc, 500, np.random.default_rng(8))
    cls = AllLabelingsOfPoints(8)
    res = erm_finite(cls, data, "sar")
    enc, low, ties = brute_force_erm(cls.members(), data, "sar")
    assert res.minimizer.encoding == enc and res.num_ties == ties
    assert res.min_emp_risk == pytest.approx(low, abs=1e-12)


def test_result_json():
    sc = assouad_scenario(3, 0.2, 0.4, (1, 0), 0.5)
    res = erm(AllLabelingsOfPoints(3), sample(sc, 50, np.random.default_rng(0)), "nontrad")
    d = json.loads(res.to_json())
    assert set(d) == {"loss_kind", "min_emp_risk", "num_ties", "hypothesis_encoding"}
    assert d["loss_kind"] == "nontrad"


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["sar", "scar-em", "scar-alpha", "nontrad", "standard"]))
def test_finite_enumeration_subclass(seed, kind):
    rng = np.random.default_rng(seed)
    V = int(rng.integers(2, 6))
    sc = discrete_scenario(rng.dirichlet(np.ones(V)), rng.uniform(0, 1, V), rng.uniform(0.1, 1, V))
    members = {tuple(rng.integers(0, 2, V)) for _ in range(int(rng.integers(1, 2**V + 1)))}
    cls = FiniteEnumeration([TableHypothesis(b) for b in members])
    data = sample(sc, int(rng.integers(0, 60)), rng)
    res = erm_finite(cls, data, kind, alpha=sc.alpha, e_m=sc.e_m)
    enc, low, ties = brute_force_erm(cls.members(), data, kind, sc.alpha, sc.e_m)
    assert res.minimizer.encoding == enc and res.num_ties == ties
    assert res.min_emp_risk == pytest.approx(low, abs=1e-12)


def test_stump_examples():
    data = PUSample([[0.5]], [1], [0.5], [1], 0.5)
    res = erm_stump(data, "sar")
    assert res.minimizer(np.array([[0.5]]))[0] == 1 and res.min_emp_risk == -1.0
    x = np.array([0.1, 0.2, 0.3, 0.7, 0.8, 0.9])
    y = (x > 0.5).astype(int)
    sep = PUSample(x[:, None], y, np.where(y == 1, 1.0, np.nan), y, 1.0)
    res = erm(Stumps1D(), sep, "sar")
    assert res.min_emp_risk == 0.0 and res.minimizer.threshold == pytest.approx(0.5)


def test_stump_thresholds_with_duplicates():
    ks, t = stump_thresholds(np.array([0.3, 0.1, 0.3, 0.5]))
    np.testing.assert_array_equal(ks, [0, 1, 3, 4])
    assert t[0] == -np.inf and t[-1] == np.inf and t[1] == pytest.approx(0.2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["sar", "nontrad", "scar-alpha"]))
def test_stump_matches_naive_scan(seed, kind):
    rng = np.random.default_rng(seed)
    sc = continuous_margin_scenario(0.4, eta_edges=(0.0, 0.4, 1.0), eta_labels=(0, 1),
                                    e_edges=(0.0, 0.7, 1.0), e_values=(0.3, 0.8))
    data = sample(sc, int(rng.integers(1, 60)), rng)
    res = erm_stump(data, kind, alpha=sc.alpha)
    assert res.min_emp_risk == pytest.approx(naive_stump_scan(data, kind, alpha=sc.alpha), abs=1e-12)
    pred = res.minimizer.predict(data)
    assert naive_risk(pred, data.s, data.e, data.y, kind, alpha=sc.alpha) == pytest.approx(res.min_emp_risk, abs=1e-12)


def test_excess_of_erm_noiseless_and_deterministic():
    sc = assouad_scenario(4, 0.3, 1.0, (1, 0, 1), 1.0)
    ex = excess_of_erm(sc, AllLabelingsOfPoints(4), 500, "sar", 600, seed=1)
    assert np.all(ex == 0.0)
    sc = assouad_scenario(4, 0.05, 0.3, (1, 0, 1), 0.5)
    a = excess_of_erm(sc, AllLabelingsOfPoints(4), 300, "sar", 1200, seed=2)
    b = excess_of_erm(sc, AllLabelingsOfPoints(4), 300, "sar", 1200, seed=2, workers=2)
    np.testing.assert_array_equal(a, b)


def test_excess_fast_path_matches_explicit_samples():
    sc = assouad_scenario(3, 0.1, 0.3, (1, 0), [0.4, 0.8])
    cls = AllLabelingsOfPoints(3)
    fast = excess_of_erm(sc, cls, 200, "sar", 3000, seed=4)
    rng = np.random.default_rng(123)
    slow = np.array([excess_risk(sc, erm(cls, sample(sc, 200, rng), "sar").minimizer) for _ in range(3000)])
    se = np.sqrt(fast.var(ddof=1) / len(fast) + slow.var(ddof=1) / len(slow))
    assert abs(fast.mean() - slow.mean()) <= 4 * se


def test_excess_of_erm_stumps():
    sc = continuous_margin_scenario(0.8, eta_edges=(0.0, 0.5, 1.0), eta_labels=(0, 1))
    ex = excess_of_erm(sc, Stumps1D(), 200, "sar", 20, seed=0)
    assert ex.shape == (20,) and np.all(ex >= 0) and ex.mean() < 0.05


def test_table_excess_and_approximation_error():
    sc = assouad_scenario(3, 0.2, 0.4, (1, 0), 0.5)
    bits = AllLabelingsOfPoints(3).bits_matrix()
    np.testing.assert_allclose(table_excess(sc, bits), [excess_risk(sc, TableHypothesis(b)) for b in bits],
                               atol=1e-15)
    cls = FiniteEnumeration([TableHypothesis((0, 0, 0))])
    with pytest.raises(ApproximationError):
        excess_of_erm(sc, cls, 10, "sar", 10, seed=0)
