"""Exact empirical risk minimisation over small hypothesis classes.

Every loss kind is separable given the predictions: the empirical risk of g is
mean(where(g(x_i), l1_i, l0_i)). A table classifier over V support points
therefore has risk (sum_j l0_j + sum_j g_j (l1_j - l0_j)) / n in terms of the
per-point totals, and the whole class is scored with one matrix product.

Ties are resolved by the smallest encoding, which for tables is the
lexicographically smallest bit string.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .losses import LossKind, observation_losses, point_loss_sums
from .model import (
    AllLabelingsOfPoints,
    DiscreteScenario,
    FiniteEnumeration,
    PUSample,
    Stump,
    Stumps1D,
    TableHypothesis,
    bayes_classifier,
    excess_risk,
    sample,
    sample_counts,
)
from .runtime import blocks, run_tasks, stream



class ApproximationError(ValueError):
    """The Bayes classifier is not in the hypothesis class."""


# Risks closer than this (relative to max(1, |min|)) are treated as tied.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ERMResult:
    minimizer: object
    min_emp_risk: float
    num_ties: int
    loss_kind: LossKind

    def to_dict(self) -> dict:
        return {
            "loss_kind": LossKind(self.loss_kind).value,
            "min_emp_risk": self.min_emp_risk,
            "num_ties": self.num_ties,
            "hypothesis_encoding": self.minimizer.encoding,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def select_minimum(risks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise (first minimiser index, minimum, tie count) for risks of shape (..., H)."""
    risks = np.asarray(risks, dtype=float)
    low = risks.min(axis=-1, keepdims=True)
    tied = risks <= low + TIE_TOL * np.maximum(1.0, np.abs(low))
    return tied.argmax(axis=-1), low[..., 0], tied.sum(axis=-1)


def table_risks(l0: np.ndarray, l1: np.ndarray, bits: np.ndarray, n) -> np.ndarray:
    """Empirical risks of every table in ``bits`` (H, V) from per-point totals of shape (..., V)."""
    totals = l0.sum(axis=-1, keepdims=True) + (l1 - l0) @ bits.T.astype(float)
    n = np.asarray(n, dtype=float)[..., None]
    return np.divide(totals, n, out=np.zeros(np.broadcast_shapes(totals.shape, n.shape)), where=n > 0)


def _table_class_bits(cls) -> np.ndarray | None:
    if isinstance(cls, AllLabelingsOfPoints):
        return cls.bits_matrix()
    if isinstance(cls, FiniteEnumeration) and cls.all_tables:
        return cls.bits_matrix()
    return None


def erm_finite(cls, sample: PUSample, loss_kind, alpha=None, e_m=None) -> ERMResult:
    """Global minimiser of the chosen empirical risk by full enumeration of ``cls``.

    An empty sample gives risk 0 to every hypothesis, so the first hypothesis in
    encoding order is returned.
    """
    kind = LossKind(loss_kind)
    bits = _table_class_bits(cls)
    l0, l1 = observation_losses(sample, kind, alpha=alpha, e_m=e_m)
    if bits is not None:
        V = bits.shape[1]
        if sample.n and sample.idx is None:
            raise ValueError("table classes need a sample drawn on a discrete support")
        idx = sample.idx if sample.idx is not None else np.zeros(0, dtype=np.int64)
        p0 = np.bincount(idx, weights=l0, minlength=V)
        p1 = np.bincount(idx, weights=l1, minlength=V)
        risks = table_risks(p0, p1, bits, sample.n)
        members = None
    else:
        members = list(cls.members())
        preds = np.array([g.predict(sample) for g in members], dtype=float).reshape(len(members), sample.n)
        risks = (preds @ (l1 - l0) + l0.sum()) / sample.n if sample.n else np.zeros(len(members))
    best, low, ties = select_minimum(risks)
    g = TableHypothesis(tuple(bits[best])) if members is None else members[best]
    return ERMResult(g, float(low), int(ties), kind)


def stump_thresholds(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Valid split counts k (points strictly below the threshold) and their thresholds.

    k = 0 and k = n map to -inf and +inf; interior splits sit midway between
    consecutive distinct sorted values.
    """
    xs = np.sort(x)
    n = len(xs)
    ks = [0] + [k for k in range(1, n) if xs[k - 1] < xs[k]] + ([n] if n else [])
    ks = np.array(sorted(set(ks)), dtype=np.int64)
    t = np.empty(len(ks))
    for i, k in enumerate(ks):
        if k == 0:
            t[i] = -np.inf
        elif k == n:
            t[i] = np.inf
        else:
            t[i] = 0.5 * (xs[k - 1] + xs[k])
    return ks, t


def erm_stump(sample: PUSample, loss_kind, alpha=None, e_m=None) -> ERMResult:
    """Exact minimiser over 1-D stumps of both polarities, via one sort and prefix sums.

    Ties go to the smallest threshold, then to polarity ">=".
    """
    kind = LossKind(loss_kind)
    if sample.x.shape[1] != 1:
        raise ValueError("stump ERM needs 1-D covariates")
    x = sample.x[:, 0]
    n = sample.n
    l0, l1 = observation_losses(sample, kind, alpha=alpha, e_m=e_m)
    order = np.argsort(x, kind="stable")
    c0 = np.concatenate([[0.0], np.cumsum(l0[order])])
    c1 = np.concatenate([[0.0], np.cumsum(l1[order])])
    ks, thresholds = stump_thresholds(x)
    # ">=": points at sorted positions >= k predicted 1;  "<": positions < k predicted 1
    ge = c0[ks] + (c1[-1] - c1[ks])
    lt = c1[ks] + (c0[-1] - c0[ks])
    risks = np.stack([ge, lt], axis=1).reshape(-1)
    if n:
        risks = risks / n
    else:
        risks = np.zeros_like(risks)
    best, low, ties = select_minimum(risks)
    pos, pol = divmod(int(best), 2)
    return ERMResult(Stump(float(thresholds[pos]), 1 if pol == 0 else -1), float(low), int(ties), kind)


def erm(cls, sample: PUSample, loss_kind, alpha=None, e_m=None) -> ERMResult:
    if isinstance(cls, Stumps1D):
        return erm_stump(sample, loss_kind, alpha=alpha, e_m=e_m)
    return erm_finite(cls, sample, loss_kind, alpha=alpha, e_m=e_m)


def _resolve_weights(scenario, kind: LossKind, alpha, e_m):
    if kind is LossKind.SCAR_ALPHA and alpha is None:
        alpha = scenario.alpha
    if kind is LossKind.SCAR_EM and e_m is None:
        e_m = scenario.e_m
    return alpha, e_m


def table_excess(scenario: DiscreteScenario, bits: np.ndarray) -> np.ndarray:
    """Exact excess risk of every table in ``bits`` via E[|g - g*| |2 eta - 1|]."""
    gstar = np.asarray(bayes_classifier(scenario).bits)
    weights = scenario.probs * np.abs(2 * scenario.eta - 1)
    return (bits != gstar).astype(float) @ weights


def _excess_block(task) -> np.ndarray:
    scenario, cls, n, kind, alpha, e_m, seed, grid_index, block_index, count = task
    rng = stream(seed, grid_index, block_index)
    bits = _table_class_bits(cls)
    if isinstance(scenario, DiscreteScenario) and bits is not None:
        counts = sample_counts(scenario, n, count, rng)
        l0, l1 = point_loss_sums(counts, scenario.propensity, kind, alpha=alpha, e_m=e_m)
        best, _, _ = select_minimum(table_risks(l0, l1, bits, n))
        return table_excess(scenario, bits)[best]
    out = np.empty(count)
    for r in range(count):
        res = erm(cls, sample(scenario, n, rng), kind, alpha=alpha, e_m=e_m)
        out[r] = excess_risk(scenario, res.minimizer)
    return out


def excess_of_erm(scenario, cls, n: int, loss_kind, replicates: int, seed: int,
                  grid_index: int = 0, workers: int = 1, alpha=None, e_m=None) -> np.ndarray:
    """Exact excess risk l(g_hat, g*) of the ERM for each of ``replicates`` fresh samples.

    Discrete scenarios with table classes draw cell counts instead of expanding
    observations; the ERM only depends on those counts. Output order follows the
    replicate index and does not depend on ``workers``.
    """
    kind = LossKind(loss_kind)
    if not cls.contains(bayes_classifier(scenario)):
        raise ApproximationError("Bayes classifier is not in the class; approximation error would be nonzero")
    alpha, e_m = _resolve_weights(scenario, kind, alpha, e_m)
    tasks = [(scenario, cls, n, kind, alpha, e_m, seed, grid_index, b, c) for b, c in blocks(replicates)]
    parts = run_tasks(_excess_block, tasks, workers)
    return np.concatenate(parts) if parts else np.zeros(0)
