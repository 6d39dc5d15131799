import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pu_risklab.losses import (
    InvalidPropensityError,
    LossKind,
    MissingPropensityError,
    emp_risk,
    emp_risk_nontraditional,
    emp_risk_sar,
    emp_risk_scar_alpha,
    emp_risk_scar_em,
    emp_risk_standard,
    loss_sar,
    nontraditional_bayes,
    nontraditional_true_risk,
    observation_losses,
    point_loss_sums,
    risk_report,
    sar_increment_moments,
)
from pu_risklab.model import (
    PUSample,
    TableHypothesis,
    assouad_scenario,
    bayes_classifier,
    counts_of,
    discrete_scenario,
    sample,
    true_risk,
)


def _table_sample(V, idx, s, e, y, e_m):
    idx = np.asarray(idx)
    return PUSample(np.eye(V)[idx], s, e, y, e_m, idx=idx)


def test_loss_sar_values():
    assert loss_sar(1, 1, 0.5) == -1.0
    assert loss_sar(0, 0, None) == 0.0
    assert loss_sar(0, 1, 0.25) == 4.0
    assert loss_sar(1, 1, 1.0) == 0.0 and loss_sar(0, 1, 1.0) == 1.0
    assert loss_sar(1, 0, None) == 1.0


def test_loss_sar_vectorised_and_checked():
    out = loss_sar(np.array([1, 0, 1]), np.array([1, 1, 0]), np.array([0.5, 0.25, np.nan]))
    np.testing.assert_array_equal(out, [-1.0, 4.0, 1.0])
    with pytest.raises(InvalidPropensityError):
        loss_sar(1, 1, 0.0)
    with pytest.raises(MissingPropensityError):
        loss_sar(1, 1, np.nan)


def test_empirical_risk_edge_cases():
    g1 = TableHypothesis((1, 1))
    unl = _table_sample(2, [0, 1, 1, 0], [0, 0, 0, 0], [np.nan] * 4, [0, 1, 0, 0], 0.5)
    assert emp_risk_sar(unl, TableHypothesis((1, 0))) == 0.5
    assert emp_risk_scar_alpha(unl, g1, 0.3) == 1.0
    assert emp_risk_nontraditional(unl, TableHypothesis((0, 0))) == 0.0
    one = _table_sample(2, [0], [1], [0.5], [1], 0.5)
    assert emp_risk_sar(one, g1) == -1.0
    empty = _table_sample(2, np.zeros(0, dtype=int), [], [], [], 0.5)
    assert emp_risk_sar(empty, g1) == 0.0


def test_degenerate_propensity_reductions():
    full = discrete_scenario([0.2, 0.3, 0.5], [0.9, 0.4, 0.1], 1.0)
    data = sample(full, 300, np.random.default_rng(0))
    for bits in [(1, 0, 0), (0, 1, 1), (1, 1, 1)]:
        g = TableHypothesis(bits)
        std = emp_risk_standard(data, g)
        assert emp_risk_sar(data, g) == pytest.approx(std, abs=1e-12)
        assert emp_risk_nontraditional(data, g) == pytest.approx(std, abs=1e-12)
        assert emp_risk_scar_alpha(data, g, data.y.mean()) == pytest.approx(std, abs=1e-12)
    scar = assouad_scenario(3, 0.2, 0.4, (1, 0), 0.5)
    data = sample(scar, 300, np.random.default_rng(1))
    for g in [TableHypothesis((1, 0, 0)), TableHypothesis((0, 1, 1))]:
        assert emp_risk_scar_em(data, g) == emp_risk_sar(data, g)


def test_emp_risk_dispatch():
    sc = assouad_scenario(3, 0.2, 0.4, (1, 0), 0.5)
    data = sample(sc, 100, np.random.default_rng(2))
    g = TableHypothesis((1, 0, 1))
    assert emp_risk(data, g, "sar") == emp_risk_sar(data, g)
    assert emp_risk(data, g, LossKind.SCAR_ALPHA, alpha=0.2) == emp_risk_scar_alpha(data, g, 0.2)
    with pytest.raises(ValueError):
        emp_risk(data, g, "scar-alpha")
    with pytest.raises(ValueError):
        emp_risk(data, g, "hinge")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(list(LossKind)))
def test_observation_losses_reproduce_risk(seed, kind):
    sc = discrete_scenario([0.3, 0.3, 0.4], [0.9, 0.3, 0.6], [0.2, 0.9, 0.5])
    data = sample(sc, 40, np.random.default_rng(seed))
    alpha, e_m = sc.alpha, 0.5
    l0, l1 = observation_losses(data, kind, alpha=alpha, e_m=e_m)
    g = TableHypothesis((1, 0, 1))
    via_losses = np.mean(np.where(g.predict(data) == 1, l1, l0))
    assert via_losses == pytest.approx(emp_risk(data, g, kind, alpha=alpha, e_m=e_m), abs=1e-12)
    w, rest = point_loss_sums(counts_of(data, 3), sc.propensity, kind, alpha=alpha, e_m=e_m)
    np.testing.assert_allclose(w, np.bincount(data.idx, weights=l0, minlength=3), atol=1e-12)
    np.testing.assert_allclose(rest, np.bincount(data.idx, weights=l1, minlength=3), atol=1e-12)


def test_nontraditional_target_and_bayes():
    sc = discrete_scenario([0.3, 0.7], [0.6, 0.2], [0.5, 0.8])
    g = TableHypothesis((1, 0))
    expected = 0.3 * (1 - 0.3) + 0.7 * 0.16
    assert nontraditional_true_risk(sc, g) == pytest.approx(expected)
    assert nontraditional_bayes(sc).bits == (0, 0)
    assert bayes_classifier(sc).bits == (1, 0)


def test_nontraditional_mc_targets_label_not_class():
    sc = discrete_scenario([0.3, 0.7], [0.6, 0.2], [0.5, 0.8])
    g = TableHypothesis((1, 0))
    rng = np.random.default_rng(9)
    vals = np.array([emp_risk_nontraditional(sample(sc, 50, rng), g) for _ in range(4000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - nontraditional_true_risk(sc, g)) <= 4 * se
    assert abs(vals.mean() - true_risk(sc, g)) > 4 * se


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_increment_moments_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    V = int(rng.integers(2, 6))
    sc = discrete_scenario(rng.dirichlet(np.ones(V)), rng.uniform(0, 1, V), rng.uniform(0.05, 1, V))
    g = TableHypothesis(tuple(rng.integers(0, 2, V)))
    g2 = TableHypothesis(tuple(rng.integers(0, 2, V)))
    m = sar_increment_moments(sc, g, g2)
    assert m.variance <= m.bound + 1e-12
    assert m.second_moment == pytest.approx(m.second_moment_formula, abs=1e-12)
    assert m.mean == pytest.approx(true_risk(sc, g) - true_risk(sc, g2), abs=1e-12)


def test_risk_report_columns():
    sc = assouad_scenario(3, 0.2, 0.4, (1, 0), 0.5)
    data = sample(sc, 50, np.random.default_rng(4))
    g = bayes_classifier(sc)
    rep = risk_report(sc, data, g, alpha=sc.alpha, e_m=sc.e_m)
    assert rep.r_excess == 0.0 and rep.r_true == pytest.approx(0.12)
    assert rep.r_emp_scar_em == rep.r_emp_sar
    row = rep.to_row("s", g.encoding, 50, 4)
    assert list(row)[:4] == ["scenario_id", "g_id", "n", "seed"]
    assert risk_report(sc, data, g).to_row("s", "g", 50, 4)["r_emp_scar_alpha"] == ""
