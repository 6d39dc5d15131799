"""Closed-form excess-risk bounds for propensity-weighted ERM and their building blocks.

Logarithms are natural. The absolute constants (kappa1, kappa2, K) are not
determined by the theory; defaults are kappa1 = K = 1 and the explicit
constants of the Assouad construction for kappa2.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .model import DiscreteScenario

KAPPA2_C1 = 1.0 / 54.0
KAPPA2_C2 = 1.0 / (54.0 * math.sqrt(2.0))


class HypothesisViolatedError(ValueError):
    pass


class NotAdjacentError(ValueError):
    pass


def _check_em(e_m: float):
    if not 0 < e_m <= 1:
        raise ValueError(f"e_m must lie in (0, 1], got {e_m}")


def c_e(e_m: float) -> float:
    """Length 2/e_m - 1 of the range of the SAR loss."""
    _check_em(e_m)
    return 2.0 / e_m - 1.0


def h_prime(n: int, V: int, e_m: float) -> float:
    return math.sqrt(V / (n * e_m))


def upper_fast(n, V, h, e_m) -> float:
    return V / (n * e_m * h) * (1.0 + math.log(max(n * h * h / V, 1.0)))


def upper_slow(n, V, e_m) -> float:
    return math.sqrt(V / (n * e_m))


def upper_bound(n: int, V: int, h: float, e_m: float, kappa1: float = 1.0) -> tuple[float, str]:
    """kappa1 * min(fast, slow) and the name of the branch attaining the minimum."""
    if n < 1 or V < 1 or not 0 < h <= 1:
        raise ValueError("need n >= 1, V >= 1 and h in (0, 1]")
    _check_em(e_m)
    fast, slow = upper_fast(n, V, h, e_m), upper_slow(n, V, e_m)
    if fast <= slow:
        return kappa1 * fast, "Fast"
    return kappa1 * slow, "Slow"


def lower_bound(n: int, V: int, h: float, e_m: float, kappa2: float | None = None) -> tuple[float, str]:
    """Minimax lower bound; case C1 when h >= h', C2 otherwise.

    With ``kappa2=None`` the explicit constants 1/54 (C1) and 1/(54 sqrt 2) (C2)
    are used.
    """
    _check_em(e_m)
    if V < 2:
        raise HypothesisViolatedError("lower bound needs V >= 2")
    if n * e_m < V:
        raise HypothesisViolatedError(f"lower bound needs n*e_m >= V, got n*e_m = {n * e_m}")
    if h >= h_prime(n, V, e_m):
        k = KAPPA2_C1 if kappa2 is None else kappa2
        return k * (V - 1) / (h * n * e_m), "C1"
    k = KAPPA2_C2 if kappa2 is None else kappa2
    return k * math.sqrt((V - 1) / (n * e_m)), "C2"


def assouad_lower(V: int, gamma: float, n: int) -> float:
    """(V-1)/2 (1 - sqrt(gamma n)); negative values (vacuous) are returned as-is."""
    if V < 2 or gamma < 0:
        raise ValueError("need V >= 2 and gamma >= 0")
    return (V - 1) / 2.0 * (1.0 - math.sqrt(gamma * n))


def assouad_family_lower(V: int, p: float, h: float, e_max: float, n: int) -> float:
    """Lower bound p h / 4 (V-1)(1 - sqrt(2 p e h^2 n)) for the P_b family with mass p."""
    return p * h / 2.0 * assouad_lower(V, 2 * p * e_max * h * h, n)


def least_favorable_p(n: int, h: float, e_m: float) -> float:
    """Mass p = 2 / (9 e_m h^2 n) that turns the Assouad bound into the C1 rate."""
    return 2.0 / (9.0 * e_m * h * h * n)


# --------------------------------------------------------------------------- #
# Hellinger distance between adjacent members of the Assouad family
# --------------------------------------------------------------------------- #


class HellingerResult(NamedTuple):
    closed_form: float
    brute_force: float
    bound: float
    coordinate: int


def hellinger_sq_closed_form(p: float, e: float, h: float) -> float:
    return p / 2.0 * (2.0 - e * math.sqrt(1 - h * h) - 2.0 * math.sqrt(1 - e + e * e / 4.0 * (1 - h * h)))


def joint_xs(scenario: DiscreteScenario) -> np.ndarray:
    """P(X = x_j, S = s) as a (V, 2) array with columns s = 0, s = 1."""
    lab = scenario.probs * scenario.eta * scenario.propensity
    return np.stack([scenario.probs - lab, lab], axis=1)


def hellinger_sq_brute(P: np.ndarray, Q: np.ndarray) -> float:
    """1/2 sum (sqrt P - sqrt Q)^2 over all outcomes."""
    P = np.clip(np.asarray(P, dtype=float), 0.0, None)
    Q = np.clip(np.asarray(Q, dtype=float), 0.0, None)
    return 0.5 * math.fsum(((np.sqrt(P) - np.sqrt(Q)) ** 2).ravel())


def hellinger_sq_exact(scenario_b: DiscreteScenario, scenario_b_prime: DiscreteScenario) -> HellingerResult:
    """Squared Hellinger distance of (X, S) laws under adjacent P_b, P_b'.

    Returns the closed form, the brute-force sum over the 2V outcomes and the
    bound 2 p e(x_i) h^2.
    """
    for s in (scenario_b, scenario_b_prime):
        if s.kind != "DiscreteAssouad":
            raise ValueError("Hellinger closed form needs Assouad scenarios")
    a, b = scenario_b, scenario_b_prime
    if (a.size, a.p, a.h) != (b.size, b.p, b.h) or not np.array_equal(a.propensity, b.propensity):
        raise NotAdjacentError("scenarios differ in more than the bit vector")
    diff = [i for i, (u, v) in enumerate(zip(a.b, b.b)) if u != v]
    if len(diff) != 1:
        raise NotAdjacentError(f"bit vectors differ in {len(diff)} coordinates, expected 1")
    i = diff[0]
    e_i = float(a.propensity[i])
    closed = hellinger_sq_closed_form(a.p, e_i, a.h)
    brute = hellinger_sq_brute(joint_xs(a), joint_xs(b))
    return HellingerResult(closed, brute, 2.0 * a.p * e_i * a.h**2, i)


# --------------------------------------------------------------------------- #
# Cannings condition
# --------------------------------------------------------------------------- #


def cannings_holds(scenario: DiscreteScenario) -> tuple[bool, np.ndarray | None]:
    """True iff e(x) >= 1/(2 eta(x)) wherever eta(x) >= 1/2; else the first violating point."""
    for j in range(scenario.size):
        eta, e = scenario.eta[j], scenario.propensity[j]
        if eta >= 0.5 and e < 1.0 / (2.0 * eta):
            return False, scenario.support[j].copy()
    return True, None


# --------------------------------------------------------------------------- #
# Fixed-point machinery behind the upper bound
# --------------------------------------------------------------------------- #


def phi(sigma: float, V: int, c_e: float, K: float = 1.0) -> float:
    """K sigma sqrt(V (1 + log(C_e/sigma v 1)))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if K < 1:
        raise ValueError("K must be at least 1")
    return K * sigma * math.sqrt(V * (1.0 + math.log(max(c_e / sigma, 1.0))))


def w_margin(x: float, c_e: float, h: float) -> float:
    return math.sqrt(2.0 * c_e / h) * x


def w_zero(x: float, c_e: float, h_prime: float) -> float:
    return max(math.sqrt(2.0 * c_e), x * math.sqrt(2.0 * c_e / h_prime))


class NonBracketingError(RuntimeError):
    pass


def fixed_point_residual(eps: float, n, V, h, e_m, K=1.0, which_w="Margin") -> float:
    """F(eps) = sqrt(n) eps^2 - Phi(w(eps))."""
    ce = c_e(e_m)
    if which_w == "Margin":
        w = w_margin(eps, ce, h)
    elif which_w == "Zero":
        w = w_zero(eps, ce, h_prime(n, V, e_m))
    else:
        raise ValueError("which_w must be 'Margin' or 'Zero'")
    return math.sqrt(n) * eps * eps - phi(w, V, ce, K)


def solve_fixed_point(n: int, V: int, h: float, e_m: float, K: float = 1.0, which_w: str = "Margin",
                      rel_width: float = 1e-10) -> float:
    """eps*^2 for the unique positive root of sqrt(n) eps^2 = Phi(w(eps)), by bisection.

    The bracket starts at [1e-9, C_e + 1] and the right end is doubled until the
    residual turns positive.
    """
    if n < 1 or V < 1 or not 0 < h <= 1:
        raise ValueError("need n >= 1, V >= 1 and h in (0, 1]")
    ce = c_e(e_m)
    F = lambda eps: fixed_point_residual(eps, n, V, h, e_m, K, which_w)  # noqa: E731
    lo, hi = 1e-9, ce + 1.0
    if F(lo) >= 0:
        raise NonBracketingError("residual not negative near zero")
    for _ in range(200):
        if F(hi) > 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise NonBracketingError("no sign change found")
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if F(mid) > 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    return root * root


def margin_sandwich(n, V, h, e_m, K=1.0) -> tuple[float, float]:
    """Bounds 2 C_e V/(n h) <= eps*^2 <= 4 K^2 V/(n h e_m) (1 + log(n h^2/V v 1))."""
    lo = 2 * c_e(e_m) * V / (n * h)
    hi = 4 * K * K * V / (n * h * e_m) * (1 + math.log(max(n * h * h / V, 1.0)))
    return lo, hi


# --------------------------------------------------------------------------- #
# Series inequality used in the chaining step
# --------------------------------------------------------------------------- #


def lemma1_series_check(c_e: float, sigma: float, terms: int = 60) -> tuple[float, float]:
    """Partial sum of sum_j 2^-j sqrt(1 + log(2^{j+1} C_e/sigma v 1)) and the closed-form majorant."""
    if c_e <= 1 or sigma <= 0:
        raise ValueError("need C_e > 1 and sigma > 0")
    if terms < 50:
        raise ValueError("use at least 50 terms")
    lhs = math.fsum(
        2.0**-j * math.sqrt(1.0 + math.log(max(2.0 ** (j + 1) * c_e / sigma, 1.0))) for j in range(terms)
    )
    rhs = 2.0 * (1.0 + math.log(2.0)) * math.sqrt(1.0 + math.log(max(c_e / sigma, 1.0)))
    return lhs, rhs


# --------------------------------------------------------------------------- #
# Report
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class BoundReport:
    n: int
    V: int
    h: float
    e_m: float
    c_e: float
    upper_fast: float
    upper_slow: float
    upper: float
    regime: str
    lower: float | None
    lower_case: str | None
    h_prime: float
    kappa1: float
    kappa2: float | None
    eps_star_sq: float | None

    def to_row(self) -> dict:
        return {k: ("" if v is None else v) for k, v in asdict(self).items()}


BOUND_CSV_COLUMNS = tuple(BoundReport.__dataclass_fields__)


def bound_report(n: int, V: int, h: float, e_m: float, kappa1: float = 1.0, kappa2: float | None = None,
                 K: float = 1.0, solve: bool = True) -> BoundReport:
    """Evaluate every bound at one parameter point.

    ``lower`` is absent when the minimax hypotheses (V >= 2, n e_m >= V) fail.
    ``regime`` names the branch attaining the upper-bound minimum; ``lower_case``
    compares h with h'.
    """
    upper, regime = upper_bound(n, V, h, e_m, kappa1)
    try:
        lower, case = lower_bound(n, V, h, e_m, kappa2)
        k2 = kappa2 if kappa2 is not None else (KAPPA2_C1 if case == "C1" else KAPPA2_C2)
    except HypothesisViolatedError:
        lower, case, k2 = None, None, kappa2
    return BoundReport(
        n=n, V=V, h=h, e_m=e_m, c_e=c_e(e_m),
        upper_fast=kappa1 * upper_fast(n, V, h, e_m), upper_slow=kappa1 * upper_slow(n, V, e_m),
        upper=upper, regime=regime, lower=lower, lower_case=case, h_prime=h_prime(n, V, e_m),
        kappa1=kappa1, kappa2=k2,
        eps_star_sq=solve_fixed_point(n, V, h, e_m, K) if solve else None,
    )
