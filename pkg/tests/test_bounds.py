import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pu_risklab import bounds
from pu_risklab.experiments import hellinger_grid
from pu_risklab.model import assouad_scenario, discrete_scenario, bayes_classifier
from pu_risklab.losses import nontraditional_bayes


def test_c_e():
    assert bounds.c_e(1.0) == 1.0 and bounds.c_e(0.5) == 3.0 and bounds.c_e(0.1) == pytest.approx(19.0)
    for bad in (0.0, 1.5, -0.2):
        with pytest.raises(ValueError):
            bounds.c_e(bad)


def test_upper_examples():
    value, regime = bounds.upper_bound(1000, 2, 0.2, 0.5)
    assert regime == "Slow" and value == pytest.approx(math.sqrt(0.004), rel=1e-12)
    assert bounds.upper_fast(1000, 2, 0.2, 0.5) == pytest.approx(0.02 * (1 + math.log(20)), rel=1e-12)
    value, regime = bounds.upper_bound(100_000, 2, 0.2, 0.5)
    assert regime == "Fast" and value == pytest.approx(2e-4 * (1 + math.log(2000)), rel=1e-12)
    assert value == pytest.approx(1.7202e-3, rel=1e-4)
    assert bounds.upper_bound(1000, 2, 0.2, 0.5, kappa1=3.0)[0] == pytest.approx(3 * math.sqrt(0.004))


def test_upper_standard_case():
    n, V, h = 5000, 3, 0.4
    value, _ = bounds.upper_bound(n, V, h, 1.0)
    assert value == pytest.approx(min(V / (n * h) * (1 + math.log(n * h * h / V)), math.sqrt(V / n)))


GRID_N = (100, 300, 1000, 3000, 10_000, 100_000)
GRID_V = (1, 2, 4, 8)
GRID_H = tuple(np.linspace(0.01, 1.0, 40))
GRID_E = (0.05, 0.1, 0.25, 0.5, 0.75, 1.0)


def test_upper_monotone():
    for V, h, e in itertools.product(GRID_V, GRID_H, GRID_E):
        vals = [bounds.upper_bound(n, V, h, e)[0] for n in GRID_N]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    for n, V, h in itertools.product(GRID_N, GRID_V, GRID_H):
        vals = [bounds.upper_bound(n, V, h, e)[0] for e in GRID_E]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    for n, V, e in itertools.product(GRID_N, GRID_V, GRID_E):
        reps = [bounds.upper_bound(n, V, h, e) for h in GRID_H]
        vals = [r[0] for r in reps]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
        for (h1, r1), (h2, r2) in zip(zip(GRID_H, reps), zip(GRID_H[1:], reps[1:])):
            if r1[1] == r2[1] == "Fast":
                assert bounds.upper_fast(n, V, h2, e) <= bounds.upper_fast(n, V, h1, e) * (1 + 1e-12)


def test_regime_flips_once_in_h():
    for n, V, e in itertools.product(GRID_N, GRID_V, GRID_E):
        regimes = "".join(bounds.upper_bound(n, V, h, e)[1][0] for h in GRID_H)
        assert "FS" not in regimes
        for h, r in zip(GRID_H, regimes):
            fast, slow = bounds.upper_fast(n, V, h, e), bounds.upper_slow(n, V, e)
            assert (r == "F") == (fast <= slow)


def test_lower_examples():
    value, case = bounds.lower_bound(1000, 3, 0.2, 0.5)
    assert case == "C1" and value == pytest.approx(2 / (54 * 0.2 * 1000 * 0.5), rel=1e-12)
    assert value == pytest.approx(3.7037e-4, rel=1e-4)
    value, case = bounds.lower_bound(1000, 3, 0.01, 0.5)
    assert case == "C2" and value == pytest.approx(math.sqrt(2 / 500) / (54 * math.sqrt(2)), rel=1e-12)
    assert value == pytest.approx(8.2817e-4, rel=1e-4)
    hp = bounds.h_prime(1000, 3, 0.5)
    assert bounds.lower_bound(1000, 3, hp, 0.5)[1] == "C1"
    with pytest.raises(bounds.HypothesisViolatedError):
        bounds.lower_bound(10, 8, 0.5, 0.5)


def test_lower_below_upper():
    for n, V, h, e in itertools.product(GRID_N, (2, 4, 8), GRID_H[::4], GRID_E):
        if n * e < V:
            continue
        assert bounds.lower_bound(n, V, h, e)[0] <= bounds.upper_bound(n, V, h, e)[0]


def test_assouad_lower():
    assert bounds.assouad_lower(5, 0.0, 100) == 2.0
    assert bounds.assouad_lower(5, 0.01, 100) == 0.0
    n, h, e = 1000, 0.3, 0.5
    p = bounds.least_favorable_p(n, h, e)
    assert bounds.assouad_lower(3, 2 * p * e * h * h, n) == pytest.approx(1 / 3, rel=1e-12)
    assert bounds.assouad_lower(3, 1.0, 100) < 0


def test_hellinger_example():
    b, b2 = (1, 0, 1), (0, 0, 1)
    res = bounds.hellinger_sq_exact(assouad_scenario(4, 0.1, 0.3, b, 0.5), assouad_scenario(4, 0.1, 0.3, b2, 0.5))
    expected = 0.05 * (2 - 0.5 * math.sqrt(0.91) - 2 * math.sqrt(0.556875))
    assert res.closed_form == pytest.approx(expected, abs=1e-15)
    assert res.brute_force == pytest.approx(expected, abs=1e-12)
    assert res.closed_form == pytest.approx(1.5275e-3, rel=1e-4)
    assert res.bound == pytest.approx(9e-3) and res.coordinate == 0
    zero = bounds.hellinger_sq_exact(assouad_scenario(4, 0.1, 0.0, b, 0.5), assouad_scenario(4, 0.1, 0.0, b2, 0.5))
    assert zero.closed_form == pytest.approx(0.0, abs=1e-15) and zero.brute_force == 0.0


def test_hellinger_grid():
    for p, e, h in hellinger_grid(4):
        res = bounds.hellinger_sq_exact(assouad_scenario(4, p, h, (1, 1, 0), e), assouad_scenario(4, p, h, (1, 0, 0), e))
        assert abs(res.closed_form - res.brute_force) <= 1e-12
        assert res.closed_form <= res.bound


def test_hellinger_not_adjacent():
    with pytest.raises(bounds.NotAdjacentError):
        bounds.hellinger_sq_exact(assouad_scenario(4, 0.1, 0.3, (1, 1, 0), 0.5),
                                  assouad_scenario(4, 0.1, 0.3, (0, 0, 0), 0.5))
    with pytest.raises(bounds.NotAdjacentError):
        bounds.hellinger_sq_exact(assouad_scenario(4, 0.1, 0.3, (1, 1, 0), 0.5),
                                  assouad_scenario(4, 0.1, 0.3, (1, 1, 0), 0.5))


def test_cannings():
    holds = discrete_scenario([1.0], [0.9], 0.6)
    assert bounds.cannings_holds(holds) == (True, None)
    assert nontraditional_bayes(holds).bits == bayes_classifier(holds).bits
    violated = discrete_scenario([0.5, 0.5], [0.2, 0.6], 0.5)
    ok, witness = bounds.cannings_holds(violated)
    assert not ok and np.array_equal(witness, [0.0, 1.0])
    assert nontraditional_bayes(violated).bits == (0, 0) and bayes_classifier(violated).bits == (0, 1)
    assert bounds.cannings_holds(discrete_scenario([0.5, 0.5], [0.1, 0.4], 0.1))[0]


def test_phi():
    assert bounds.phi(5.0, 4, 3.0, 2.0) == pytest.approx(2 * 5 * 2)
    assert bounds.phi(1.0, 4, 3.0) == pytest.approx(2 * math.sqrt(1 + math.log(3)), rel=1e-12)
    sig = np.geomspace(1e-4, 100, 300)
    ratio = [bounds.phi(s, 4, 3.0) / s for s in sig]
    assert all(b <= a + 1e-12 for a, b in zip(ratio, ratio[1:]))
    with pytest.raises(ValueError):
        bounds.phi(0.0, 4, 3.0)


def test_w_functions():
    assert bounds.w_margin(0.0, 3.0, 0.5) == 0.0
    assert bounds.w_margin(1.0, 3.0, 0.5) == pytest.approx(math.sqrt(12))
    assert bounds.w_zero(1e-3, 3.0, 0.1) == pytest.approx(math.sqrt(6))
    assert bounds.w_zero(1.0, 3.0, 0.1) == pytest.approx(math.sqrt(60))


def test_fixed_point_example():
    eps2 = bounds.solve_fixed_point(10_000, 2, 1.0, 1.0)
    lo, hi = bounds.margin_sandwich(10_000, 2, 1.0, 1.0)
    assert lo == pytest.approx(4e-4) and hi == pytest.approx(8e-4 * (1 + math.log(5000)))
    assert lo <= eps2 <= hi
    resid = bounds.fixed_point_residual(math.sqrt(eps2), 10_000, 2, 1.0, 1.0)
    assert abs(resid) < 1e-9 * 100 * eps2


FP_GRID = list(itertools.product((100, 1000, 10_000, 1_000_000), (1, 2, 4, 16), (0.05, 0.3, 1.0), (0.05, 0.4, 1.0)))


def test_fixed_point_brackets():
    for n, V, h, e in FP_GRID:
        for which in ("Margin", "Zero"):
            assert bounds.fixed_point_residual(1e-9, n, V, h, e, which_w=which) < 0
            eps2 = bounds.solve_fixed_point(n, V, h, e, which_w=which)
            assert abs(bounds.fixed_point_residual(math.sqrt(eps2), n, V, h, e, which_w=which)) < 1e-9 * math.sqrt(n) * eps2


def _zero_envelope(n, V, e_m, K=1.0):
    """max(h', 4K^2 sqrt(V/(n e_m)) (1 + log(sqrt(C_e/2) v 1)))."""
    ce = bounds.c_e(e_m)
    return max(bounds.h_prime(n, V, e_m),
               4 * K * K * math.sqrt(V / (n * e_m)) * (1 + math.log(max(math.sqrt(ce / 2), 1.0))))


def test_zero_case_envelope():
    for n, V, h, e in FP_GRID:
        if n * e < V:
            continue
        eps2 = bounds.solve_fixed_point(n, V, h, e, which_w="Zero")
        assert eps2 <= _zero_envelope(n, V, e) * (1 + 1e-9)
        if bounds.c_e(e) <= 2:
            # without the log factor when C_e <= 2
            assert eps2 <= max(bounds.h_prime(n, V, e), 4 * math.sqrt(V / (n * e))) * (1 + 1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(10, 10**7), st.integers(1, 50), st.floats(0.01, 1.0), st.floats(0.01, 1.0),
       st.floats(1.0, 3.0))
def test_margin_sandwich_property(n, V, h, e, K):
    eps2 = bounds.solve_fixed_point(n, V, h, e, K)
    lo, hi = bounds.margin_sandwich(n, V, h, e, K)
    assert lo * (1 - 1e-9) <= eps2 <= hi


def test_series_bound():
    lhs, rhs = bounds.lemma1_series_check(3.0, 1.0, 60)
    assert lhs <= rhs and rhs == pytest.approx(2 * (1 + math.log(2)) * math.sqrt(1 + math.log(3)))
    lhs, rhs = bounds.lemma1_series_check(1.5, 10.0, 60)
    assert lhs <= rhs and rhs == pytest.approx(2 * (1 + math.log(2)))
    for c, s in itertools.product((1.5, 3.0, 19.0), (0.01, 0.1, 1.0, 10.0)):
        lhs, rhs = bounds.lemma1_series_check(c, s, 60)
        assert lhs <= rhs
    with pytest.raises(ValueError):
        bounds.lemma1_series_check(1.0, 1.0)


def test_bound_report():
    rep = bounds.bound_report(1000, 2, 0.2, 0.5)
    assert rep.upper == min(rep.upper_fast, rep.upper_slow) and rep.regime == "Slow"
    assert rep.h_prime == pytest.approx(math.sqrt(2 / 500)) and rep.c_e == 3.0
    assert rep.lower_case == "C1" and rep.kappa2 == bounds.KAPPA2_C1
    assert rep.eps_star_sq > 0
    assert list(rep.to_row()) == list(bounds.BOUND_CSV_COLUMNS)
    assert bounds.bound_report(10, 8, 0.5, 0.5).lower is None
