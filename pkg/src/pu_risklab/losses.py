"""Per-observation losses and empirical risk estimators for PU data.

Every estimator here is the mean of a per-observation loss, except the
alpha-weighted SCAR form whose labeled term is normalised by N_L. Negative
values are legitimate outputs of the weighted estimators and are never clipped.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .model import (
    DiscreteScenario,
    PUSample,
    TableHypothesis,
    excess_risk,
    predictions_on_support,
    true_risk,
)


class InvalidPropensityError(ValueError):
    pass


class MissingPropensityError(ValueError):
    pass


class LossKind(str, Enum):
    STANDARD = "standard"
    NONTRADITIONAL = "nontrad"
    SCAR_ALPHA = "scar-alpha"
    SCAR_EM = "scar-em"
    SAR = "sar"


def _check_propensity(e, where=None):
    e = np.asarray(e, dtype=float)
    sel = e if where is None else e[where]
    if np.any(np.isnan(sel)):
        raise MissingPropensityError("labeled observation without recorded propensity")
    if np.any((sel <= 0) | (sel > 1)):
        raise InvalidPropensityError("propensity must lie in (0, 1]")


def loss_sar(g_of_x, s, e_at_x):
    """(1[s=1]/e)(2 1[g=0] - 1) + 1[g=1]; vectorised over numpy inputs.

    ``e_at_x`` is only read where s = 1 and may be NaN/None elsewhere.
    """
    g = np.asarray(g_of_x)
    s_arr = np.asarray(s)
    e = np.asarray(np.nan if e_at_x is None else e_at_x, dtype=float)
    shape = np.broadcast_shapes(g.shape, s_arr.shape, e.shape)
    g, s_arr, e = (np.broadcast_to(a, shape) for a in (g, s_arr, e))
    labeled = s_arr == 1
    _check_propensity(e, where=labeled)
    weight = np.divide(1.0, e, out=np.zeros(shape), where=labeled)
    out = weight * (2.0 * (g == 0) - 1.0) + (g == 1)
    return float(out) if out.ndim == 0 else out


def sar_risk_arrays(pred, s, e, axis=-1):
    """SAR empirical risk of predictions ``pred`` along ``axis``; 0 for empty samples."""
    if np.shape(pred)[axis] == 0:
        return 0.0
    return np.mean(loss_sar(pred, s, e), axis=axis)


def scar_em_risk_arrays(pred, s, e_m, axis=-1):
    if not 0 < e_m <= 1:
        raise InvalidPropensityError("e_m must lie in (0, 1]")
    return sar_risk_arrays(pred, s, np.full(np.shape(s), float(e_m)), axis=axis)


def scar_alpha_risk_arrays(pred, s, alpha, axis=-1):
    """alpha/N_L sum_{s=1}[1(g=0) - 1(g=1)] + mean 1(g=1), labeled term 0 when N_L = 0."""
    pred = np.asarray(pred)
    s = np.asarray(s)
    n = pred.shape[axis]
    if n == 0:
        return 0.0
    n_l = s.sum(axis=axis)
    labeled = ((s == 1) * ((pred == 0).astype(float) - (pred == 1))).sum(axis=axis)
    first = alpha * np.divide(labeled, n_l, out=np.zeros(np.shape(labeled)), where=n_l > 0)
    out = first + (pred == 1).mean(axis=axis)
    return float(out) if np.ndim(out) == 0 else out


def nontraditional_risk_arrays(pred, s, axis=-1):
    if np.shape(pred)[axis] == 0:
        return 0.0
    return np.mean(np.asarray(pred) != np.asarray(s), axis=axis)


def standard_risk_arrays(pred, y, axis=-1):
    if np.shape(pred)[axis] == 0:
        return 0.0
    return np.mean(np.asarray(pred) != np.asarray(y), axis=axis)


def emp_risk_sar(sample: PUSample, g) -> float:
    labeled = sample.s == 1
    _check_propensity(sample.e, where=labeled)
    return float(sar_risk_arrays(g.predict(sample), sample.s, sample.e))


def emp_risk_scar_em(sample: PUSample, g, e_m: float | None = None) -> float:
    """SAR risk with every propensity replaced by the constant e_m (sample's e_m by default)."""
    e_m = sample.e_m if e_m is None else e_m
    return float(scar_em_risk_arrays(g.predict(sample), sample.s, e_m))


def emp_risk_scar_alpha(sample: PUSample, g, alpha: float) -> float:
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return float(scar_alpha_risk_arrays(g.predict(sample), sample.s, alpha))


def emp_risk_nontraditional(sample: PUSample, g) -> float:
    """Treats the observed label s as the class."""
    return float(nontraditional_risk_arrays(g.predict(sample), sample.s))


def emp_risk_standard(sample: PUSample, g) -> float:
    """0-1 risk against the hidden class; diagnostics only."""
    return float(standard_risk_arrays(g.predict(sample), sample.y))


def emp_risk(sample: PUSample, g, kind, alpha=None, e_m=None) -> float:
    kind = LossKind(kind)
    if kind is LossKind.SAR:
        return emp_risk_sar(sample, g)
    if kind is LossKind.SCAR_EM:
        return emp_risk_scar_em(sample, g, e_m)
    if kind is LossKind.SCAR_ALPHA:
        if alpha is None:
            raise ValueError("scar-alpha risk needs alpha")
        return emp_risk_scar_alpha(sample, g, alpha)
    if kind is LossKind.NONTRADITIONAL:
        return emp_risk_nontraditional(sample, g)
    return emp_risk_standard(sample, g)


def observation_losses(sample: PUSample, kind, alpha=None, e_m=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-observation losses if the classifier outputs 0 and if it outputs 1.

    For every loss kind the empirical risk of g is mean(where(g(x_i), l1_i, l0_i)).
    The alpha form is rescaled by n / N_L so that this holds with a plain mean.
    """
    kind = LossKind(kind)
    s = sample.s.astype(float)
    if kind is LossKind.STANDARD:
        pos = sample.y.astype(float)
        return pos, 1.0 - pos
    if kind is LossKind.NONTRADITIONAL:
        return s, 1.0 - s
    if kind is LossKind.SAR:
        _check_propensity(sample.e, where=sample.s == 1)
        w = np.divide(1.0, sample.e, out=np.zeros(sample.n), where=sample.s == 1)
    elif kind is LossKind.SCAR_EM:
        e_m = sample.e_m if e_m is None else e_m
        if not 0 < e_m <= 1:
            raise InvalidPropensityError("e_m must lie in (0, 1]")
        w = s / e_m
    else:
        if alpha is None:
            raise ValueError("scar-alpha risk needs alpha")
        n_l = sample.n_labeled
        w = s * (sample.n * alpha / n_l) if n_l else np.zeros(sample.n)
    return w, 1.0 - w


def point_loss_sums(counts: np.ndarray, propensity: np.ndarray, kind, alpha=None, e_m=None):
    """Per-support-point loss totals (l0, l1) from cell counts of shape (..., V, 3).

    Cells are (y=0), (y=1, s=0), (y=1, s=1) as produced by ``sample_counts``.
    """
    kind = LossKind(kind)
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1)
    labeled = counts[..., 2]
    if kind is LossKind.STANDARD:
        w_sum = counts[..., 1] + counts[..., 2]
    elif kind is LossKind.NONTRADITIONAL:
        w_sum = labeled
    elif kind is LossKind.SAR:
        w_sum = labeled / np.asarray(propensity, dtype=float)
    elif kind is LossKind.SCAR_EM:
        if e_m is None or not 0 < e_m <= 1:
            raise InvalidPropensityError("e_m must lie in (0, 1]")
        w_sum = labeled / e_m
    else:
        if alpha is None:
            raise ValueError("scar-alpha risk needs alpha")
        n = total.sum(axis=-1, keepdims=True)
        n_l = labeled.sum(axis=-1, keepdims=True)
        scale = np.divide(n * alpha, n_l, out=np.zeros(n_l.shape), where=n_l > 0)
        w_sum = labeled * scale
    return w_sum, total - w_sum


# --------------------------------------------------------------------------- #
# Exact moments on discrete scenarios
# --------------------------------------------------------------------------- #


def nontraditional_true_risk(scenario: DiscreteScenario, g) -> float:
    """P(g(X) != S), using P(S=1 | X=x) = e(x) eta(x)."""
    t = predictions_on_support(scenario, g)
    eta_s = scenario.eta * scenario.propensity
    return math.fsum(scenario.probs * np.where(t == 1, 1 - eta_s, eta_s))


def nontraditional_bayes(scenario: DiscreteScenario):
    """Bayes rule for S given X: 1[e(x) eta(x) >= 1/2]."""
    return TableHypothesis(tuple((scenario.eta * scenario.propensity >= 0.5).astype(int)))


@dataclass(frozen=True)
class IncrementMoments:
    mean: float
    second_moment: float
    variance: float
    second_moment_formula: float
    sq_distance: float
    c_e: float

    @property
    def bound(self) -> float:
        return 2 * self.c_e * self.sq_distance


def sar_increment_moments(scenario: DiscreteScenario, g, g_prime) -> IncrementMoments:
    """Exact moments of r_SAR(g) - r_SAR(g') by enumeration of the 2V outcomes (x, s)."""
    a = predictions_on_support(scenario, g)
    b = predictions_on_support(scenario, g_prime)
    p, eta, e = scenario.probs, scenario.eta, scenario.propensity
    p_lab = p * eta * e
    p_unl = p - p_lab
    d_lab = loss_sar(a, 1, e) - loss_sar(b, 1, e)
    d_unl = loss_sar(a, 0, None) - loss_sar(b, 0, None)
    mean = math.fsum(np.concatenate([p_lab * d_lab, p_unl * d_unl]))
    second = math.fsum(np.concatenate([p_lab * d_lab**2, p_unl * d_unl**2]))
    diff_sq = (a - b).astype(float) ** 2
    formula = math.fsum(p * diff_sq * (1 + 4 * eta * (1 - e) / e))
    c_e = 2.0 / scenario.e_m - 1.0
    return IncrementMoments(mean, second, second - mean**2, formula, math.fsum(p * diff_sq), c_e)


# --------------------------------------------------------------------------- #
# Reports
# --------------------------------------------------------------------------- #

RISK_CSV_COLUMNS = (
    "scenario_id", "g_id", "n", "seed", "r_true", "r_excess", "r_emp_sar",
    "r_emp_scar_alpha", "r_emp_scar_em", "r_emp_nontraditional", "r_emp_standard",
)


@dataclass(frozen=True)
class RiskReport:
    r_true: float
    r_excess: float
    r_emp_standard: float
    r_emp_nontraditional: float
    r_emp_scar_alpha: float | None
    r_emp_scar_em: float | None
    r_emp_sar: float

    def to_row(self, scenario_id: str, g_id: str, n: int, seed: int) -> dict:
        row = {"scenario_id": scenario_id, "g_id": g_id, "n": n, "seed": seed}
        row.update(asdict(self))
        return {k: ("" if row[k] is None else row[k]) for k in RISK_CSV_COLUMNS}


def risk_report(scenario, sample: PUSample, g, alpha: float | None = None, e_m: float | None = None) -> RiskReport:
    return RiskReport(
        r_true=true_risk(scenario, g),
        r_excess=excess_risk(scenario, g),
        r_emp_standard=emp_risk_standard(sample, g),
        r_emp_nontraditional=emp_risk_nontraditional(sample, g),
        r_emp_scar_alpha=None if alpha is None else emp_risk_scar_alpha(sample, g, alpha),
        r_emp_scar_em=None if e_m is None else emp_risk_scar_em(sample, g, e_m),
        r_emp_sar=emp_risk_sar(sample, g),
    )
