"""Scenarios, samples and classifiers for PU-learning experiments.

A scenario fixes the joint law of (X, Y, S): the marginal of X, the regression
function eta(x) = P(Y=1 | X=x) and the propensity e(x) = P(S=1 | Y=1, X=x).
Discrete scenarios support exact risk computation by enumeration; the 1-D
continuous family is piecewise constant, so its risks are exact integrals.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

# Slack for margin certificates: 2*(0.5*(1+h)) - 1 is not always exactly h.
MARGIN_TOL = 1e-12
ENUMERATION_GUARD = 2**20


class ScenarioError(ValueError):
    """A scenario or sample violates one of its invariants."""


class NotRepresentableError(ValueError):
    """The requested object has no representation in the available hypothesis kinds."""


class RiskNotComputableError(ValueError):
    """Exact risk requested where no closed form or enumeration applies."""


class EnumerationGuardError(ValueError):
    """A hypothesis class is too large to enumerate."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------- #
# Scenarios
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class DiscreteScenario:
    """Distribution of (X, Y, S) on a finite support.

    ``kind`` is ``"DiscreteGeneral"`` or ``"DiscreteAssouad"``; the latter also
    carries the construction parameters ``p``, ``h`` and ``b``.
    """

    support: np.ndarray
    probs: np.ndarray
    eta: np.ndarray
    propensity: np.ndarray
    margin_h: float = 0.0
    name: str = "discrete"
    kind: str = "DiscreteGeneral"
    p: float | None = None
    h: float | None = None
    b: tuple[int, ...] | None = None

    def __post_init__(self):
        support = np.array(self.support, dtype=float)
        if support.ndim == 1:
            support = support[:, None]
        probs = np.array(self.probs, dtype=float)
        eta = np.array(self.eta, dtype=float)
        prop = np.array(self.propensity, dtype=float)
        V = len(probs)
        if support.shape[0] != V or eta.shape != (V,) or prop.shape != (V,):
            raise ScenarioError("support, probs, eta and propensity must have matching lengths")
        if V == 0:
            raise ScenarioError("empty support")
        if not np.all(np.isfinite(support)):
            raise ScenarioError("support coordinates must be finite")
        if len({tuple(row) for row in support}) != V:
            raise ScenarioError("support points must be distinct")
        if np.any(probs < 0) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ScenarioError("probs must be non-negative and sum to 1")
        if np.any((eta < 0) | (eta > 1)):
            raise ScenarioError("eta must lie in [0, 1]")
        if np.any((prop <= 0) | (prop > 1)):
            raise ScenarioError("propensity must lie in (0, 1]")
        if not 0.0 <= self.margin_h <= 1.0:
            raise ScenarioError("margin_h must lie in [0, 1]")
        if self.margin_h > 0 and np.min(np.abs(2 * eta - 1)) < self.margin_h - MARGIN_TOL:
            raise ScenarioError(
                f"declared margin {self.margin_h} violated: min |2 eta - 1| = {np.min(np.abs(2 * eta - 1))}"
            )
        object.__setattr__(self, "support", _frozen(support))
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "eta", _frozen(eta))
        object.__setattr__(self, "propensity", _frozen(prop))
        if self.b is not None:
            object.__setattr__(self, "b", tuple(int(v) for v in self.b))

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @property
    def alpha(self) -> float:
        return math.fsum(self.probs * self.eta)

    @property
    def e_m(self) -> float:
        return float(np.min(self.propensity))

    @property
    def is_scar(self) -> bool:
        return bool(np.all(self.propensity == self.propensity[0]))

    @property
    def labeled_rate(self) -> float:
        """P(S = 1) = sum_x P(X=x) eta(x) e(x)."""
        return math.fsum(self.probs * self.eta * self.propensity)

    def index_of(self, coords) -> np.ndarray:
        """Map covariate rows to support indices; raises on points off the support."""
        X = np.atleast_2d(np.asarray(coords, dtype=float))
        match = np.all(X[:, None, :] == self.support[None, :, :], axis=2)
        if not np.all(match.any(axis=1)):
            raise ScenarioError("covariate not on the scenario support")
        return match.argmax(axis=1)

    def eta_at(self, coords) -> np.ndarray:
        return self.eta[self.index_of(coords)]

    def propensity_at(self, coords) -> np.ndarray:
        return self.propensity[self.index_of(coords)]


def discrete_scenario(probs, eta, propensity, support=None, margin_h=0.0, name="discrete") -> DiscreteScenario:
    """General discrete scenario; support defaults to the standard basis of R^V."""
    V = len(probs)
    if np.ndim(propensity) == 0:
        propensity = np.full(V, float(propensity))
    if support is None:
        support = np.eye(V)
    return DiscreteScenario(support, probs, eta, propensity, margin_h=margin_h, name=name)


def assouad_scenario(V: int, p: float, h: float, b: Sequence[int], e=1.0, name: str | None = None) -> DiscreteScenario:
    """Member P_b of the lower-bound family on V basis vectors of R^V.

    Points x_1..x_{V-1} have mass p and eta = (1 + (2 b_i - 1) h) / 2; x_V takes
    the remaining mass and is negative almost surely. ``e`` is a scalar, or one
    propensity per shattered point (length V-1), or per support point (length V).
    The propensity at x_V never matters and is set to the minimum over x_1..x_{V-1}
    when not given.
    """
    if V < 2:
        raise ScenarioError("V must be at least 2")
    if not 0 < p <= 1.0 / (V - 1) + 1e-15:
        raise ScenarioError(f"p must lie in (0, 1/(V-1)], got {p}")
    if not 0 <= h <= 1:
        raise ScenarioError("h must lie in [0, 1]")
    b = tuple(int(v) for v in b)
    if len(b) != V - 1 or any(v not in (0, 1) for v in b):
        raise ScenarioError("b must be a bit vector of length V-1")
    e_arr = np.atleast_1d(np.asarray(e, dtype=float))
    if e_arr.size == 1:
        e_arr = np.full(V - 1, e_arr[0])
    if e_arr.size == V - 1:
        e_arr = np.append(e_arr, e_arr.min())
    if e_arr.size != V:
        raise ScenarioError("e must be scalar or have length V-1 or V")
    probs = np.full(V, p)
    probs[-1] = max(0.0, 1.0 - p * (V - 1))
    eta = np.zeros(V)
    eta[:-1] = 0.5 * (1 + (2 * np.asarray(b) - 1) * h)
    return DiscreteScenario(
        np.eye(V), probs, eta, e_arr,
        margin_h=h, name=name or f"assouad-V{V}-b{''.join(map(str, b))}",
        kind="DiscreteAssouad", p=p, h=h, b=b,
    )


def _piecewise(edges: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(edges, x, side="right") - 1
    return values[np.clip(pos, 0, len(values) - 1)]


@dataclass(frozen=True, eq=False)
class ContinuousMarginScenario:
    """X ~ U[0, 1] with piecewise-constant eta in {(1-h)/2, (1+h)/2} and piecewise-constant e."""

    h: float
    eta_edges: np.ndarray
    eta_labels: tuple[int, ...]
    e_edges: np.ndarray
    e_values: np.ndarray
    name: str = "continuous"
    kind: str = field(default="ContinuousMargin", init=False)

    def __post_init__(self):
        eta_edges = np.array(self.eta_edges, dtype=float)
        e_edges = np.array(self.e_edges, dtype=float)
        e_values = np.array(self.e_values, dtype=float)
        labels = tuple(int(v) for v in self.eta_labels)
        for edges in (eta_edges, e_edges):
            if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
                raise ScenarioError("edges must increase strictly from 0 to 1")
        if len(labels) != len(eta_edges) - 1 or any(v not in (0, 1) for v in labels):
            raise ScenarioError("one 0/1 label per eta segment required")
        if len(e_values) != len(e_edges) - 1 or np.any((e_values <= 0) | (e_values > 1)):
            raise ScenarioError("one propensity in (0, 1] per e segment required")
        if not 0 < self.h <= 1:
            raise ScenarioError("h must lie in (0, 1]")
        object.__setattr__(self, "eta_edges", _frozen(eta_edges))
        object.__setattr__(self, "e_edges", _frozen(e_edges))
        object.__setattr__(self, "e_values", _frozen(e_values))
        object.__setattr__(self, "eta_labels", labels)

    @property
    def margin_h(self) -> float:
        return self.h

    @property
    def dim(self) -> int:
        return 1

    @property
    def eta_values(self) -> np.ndarray:
        return 0.5 * (1 + (2 * np.asarray(self.eta_labels) - 1) * self.h)

    @property
    def e_m(self) -> float:
        return float(np.min(self.e_values))

    @property
    def is_scar(self) -> bool:
        return bool(np.all(self.e_values == self.e_values[0]))

    def eta_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return _piecewise(self.eta_edges, self.eta_values, x)

    def propensity_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return _piecewise(self.e_edges, self.e_values, x)

    def cells(self, extra_edges=()) -> tuple[np.ndarray, np.ndarray]:
        """Cell lengths and midpoints of the common refinement of all edges."""
        extra = [t for t in extra_edges if 0.0 < t < 1.0]
        edges = np.unique(np.concatenate([self.eta_edges, self.e_edges, extra]))
        return np.diff(edges), 0.5 * (edges[1:] + edges[:-1])

    @property
    def alpha(self) -> float:
        lengths, mids = self.cells()
        return math.fsum(lengths * self.eta_at(mids))

    @property
    def labeled_rate(self) -> float:
        lengths, mids = self.cells()
        return math.fsum(lengths * self.eta_at(mids) * self.propensity_at(mids))


def continuous_margin_scenario(h, eta_edges=(0.0, 0.5, 1.0), eta_labels=(0, 1),
                               e_edges=(0.0, 1.0), e_values=(1.0,), name="continuous") -> ContinuousMarginScenario:
    return ContinuousMarginScenario(h, eta_edges, eta_labels, e_edges, e_values, name=name)


Scenario = DiscreteScenario | ContinuousMarginScenario


# --------------------------------------------------------------------------- #
# Hypotheses and classes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class TableHypothesis:
    """Classifier given by its labels on the points of a discrete support."""

    bits: tuple[int, ...]
    kind = "TableOnSupport"

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(v) for v in self.bits))
        if any(v not in (0, 1) for v in self.bits):
            raise ValueError("table entries must be 0 or 1")

    @property
    def encoding(self) -> str:
        return "table:" + "".join(map(str, self.bits))

    @property
    def table(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.int8)

    def predict(self, sample: "PUSample") -> np.ndarray:
        if sample.idx is None:
            raise ValueError("table hypotheses need a sample drawn on a discrete support")
        return self.table[sample.idx]


@dataclass(frozen=True)
class Stump:
    """x -> 1[x_f >= t] (polarity +1) or x -> 1[x_f < t] (polarity -1)."""

    threshold: float
    polarity: int = 1
    feature: int = 0
    kind = "Stump"

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValueError("polarity must be +1 or -1")

    @property
    def encoding(self) -> str:
        return f"stump:{self.feature}:{self.threshold!r}:{'ge' if self.polarity > 0 else 'lt'}"

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        col = X[..., self.feature] if X.ndim >= 2 else X
        out = col >= self.threshold if self.polarity > 0 else col < self.threshold
        return out.astype(np.int8)

    def predict(self, sample: "PUSample") -> np.ndarray:
        return self(sample.x)


@dataclass(frozen=True, eq=False)
class ExplicitHypothesis:
    """Arbitrary decision rule on covariate rows."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    kind = "Explicit"

    @property
    def encoding(self) -> str:
        return f"explicit:{self.name}"

    def __call__(self, X) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(X, dtype=float)), dtype=np.int8)

    def predict(self, sample: "PUSample") -> np.ndarray:
        return self(sample.x)


Hypothesis = TableHypothesis | Stump | ExplicitHypothesis


def _bits_matrix(V: int) -> np.ndarray:
    # row k holds the binary digits of k, most significant first: row order == lexicographic order
    k = np.arange(2**V, dtype=np.int64)[:, None]
    shifts = np.arange(V - 1, -1, -1, dtype=np.int64)[None, :]
    return ((k >> shifts) & 1).astype(np.int8)


class AllLabelingsOfPoints:
    """Every labeling of V support points; VC dimension V."""

    kind = "AllLabelingsOfPoints"

    def __init__(self, V: int):
        if V < 1:
            raise ValueError("V must be positive")
        self.V = V

    @property
    def vc_dim(self) -> int:
        return self.V

    def __len__(self) -> int:
        return 2**self.V

    def bits_matrix(self) -> np.ndarray:
        if len(self) > ENUMERATION_GUARD:
            raise EnumerationGuardError(f"class of size 2^{self.V} exceeds the 2^20 enumeration guard")
        return _bits_matrix(self.V)

    def members(self) -> Iterator[TableHypothesis]:
        for row in self.bits_matrix():
            yield TableHypothesis(tuple(row))

    def contains(self, g) -> bool:
        return isinstance(g, TableHypothesis) and len(g.bits) == self.V


def _shatters(tables: np.ndarray, points: tuple[int, ...]) -> bool:
    patterns = {tuple(row) for row in tables[:, list(points)]}
    return len(patterns) == 2 ** len(points)


def table_vc_dim(tables: np.ndarray) -> int:
    """Largest number of support points shattered by a set of tables (brute force)."""
    tables = np.asarray(tables)
    V = tables.shape[1]
    best = 0
    for k in range(1, V + 1):
        if 2**k > len(tables):
            break
        if any(_shatters(tables, pts) for pts in itertools.combinations(range(V), k)):
            best = k
        else:
            break
    return best


class FiniteEnumeration:
    """Explicit finite class; members are kept sorted by encoding."""

    kind = "FiniteEnumeration"

    def __init__(self, members: Sequence, vc_dim: int | None = None):
        uniq = {g.encoding: g for g in members}
        self._members = [uniq[k] for k in sorted(uniq)]
        if not self._members:
            raise ValueError("empty hypothesis class")
        if len(self._members) > ENUMERATION_GUARD:
            raise EnumerationGuardError("class exceeds the 2^20 enumeration guard")
        if vc_dim is None:
            if not all(isinstance(g, TableHypothesis) for g in self._members):
                raise ValueError("vc_dim must be given for non-table members")
            vc_dim = table_vc_dim(np.array([g.bits for g in self._members]))
        self._vc_dim = vc_dim

    @property
    def vc_dim(self) -> int:
        return self._vc_dim

    def __len__(self) -> int:
        return len(self._members)

    def members(self):
        return iter(self._members)

    @property
    def all_tables(self) -> bool:
        return all(isinstance(g, TableHypothesis) for g in self._members)

    def bits_matrix(self) -> np.ndarray:
        if not self.all_tables:
            raise ValueError("class has non-table members")
        return np.array([g.bits for g in self._members], dtype=np.int8)

    def contains(self, g) -> bool:
        return any(m.encoding == g.encoding for m in self._members)


class Stumps1D:
    """Both polarities of 1-D threshold classifiers; VC dimension 2."""

    kind = "Stumps1D"
    vc_dim = 2

    def contains(self, g) -> bool:
        return isinstance(g, Stump) and g.feature == 0


HypothesisClass = AllLabelingsOfPoints | FiniteEnumeration | Stumps1D


# --------------------------------------------------------------------------- #
# Samples
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PUObservation:
    x: tuple[float, ...]
    s: int
    e_at_x: float | None
    y_hidden: int

    def __post_init__(self):
        if self.s == 1 and self.y_hidden != 1:
            raise ScenarioError("a labeled observation must be positive")
        if self.e_at_x is not None and not 0 < self.e_at_x <= 1:
            raise ScenarioError("propensity must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class PUSample:
    """n observations stored column-wise.

    ``e`` holds the recorded propensity (NaN where absent); ``y`` is the hidden
    class, kept for evaluation only; ``idx`` is the support index for samples
    drawn from a discrete scenario.
    """

    x: np.ndarray
    s: np.ndarray
    e: np.ndarray
    y: np.ndarray
    e_m: float
    idx: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        s = np.asarray(self.s, dtype=np.int8).reshape(-1)
        y = np.asarray(self.y, dtype=np.int8).reshape(-1)
        e = np.asarray(self.e, dtype=float).reshape(-1)
        n = len(s)
        if x.shape[0] != n or len(y) != n or len(e) != n:
            raise ScenarioError("sample columns must have equal length")
        if not 0 < self.e_m <= 1:
            raise ScenarioError("e_m must lie in (0, 1]")
        if np.any((s == 1) & (y != 1)):
            raise ScenarioError("negatives are never labeled")
        present = ~np.isnan(e)
        if np.any((e[present] <= 0) | (e[present] > 1)):
            raise ScenarioError("recorded propensity outside (0, 1]")
        if np.any(e[present] < self.e_m):
            raise ScenarioError("recorded propensity below e_m")
        for name, arr in (("x", x), ("s", s), ("y", y), ("e", e)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.idx is not None:
            idx = np.asarray(self.idx, dtype=np.int64).reshape(-1)
            idx.setflags(write=False)
            object.__setattr__(self, "idx", idx)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def n_labeled(self) -> int:
        return int(self.s.sum())

    @property
    def observations(self) -> list[PUObservation]:
        return [
            PUObservation(tuple(self.x[i]), int(self.s[i]),
                          None if math.isnan(self.e[i]) else float(self.e[i]), int(self.y[i]))
            for i in range(self.n)
        ]

    @classmethod
    def from_observations(cls, observations: Sequence[PUObservation], e_m: float, idx=None) -> "PUSample":
        d = len(observations[0].x) if observations else 1
        x = np.array([o.x for o in observations], dtype=float).reshape(-1, d)
        s = [o.s for o in observations]
        y = [o.y_hidden for o in observations]
        e = [np.nan if o.e_at_x is None else o.e_at_x for o in observations]
        return cls(x, s, e, y, e_m, idx)


def draw_arrays(scenario: Scenario, n: int, rng: np.random.Generator, size: int | None = None):
    """Raw i.i.d. draws: (position, y, s, e) arrays of shape (n,) or (size, n).

    ``position`` is the support index for discrete scenarios and the covariate
    value for the continuous family.
    """
    shape = (n,) if size is None else (size, n)
    if isinstance(scenario, DiscreteScenario):
        pos = rng.choice(scenario.size, size=shape, p=scenario.probs)
        eta = scenario.eta[pos]
        e = scenario.propensity[pos]
    else:
        pos = rng.random(shape)
        eta = scenario.eta_at(pos.reshape(-1)).reshape(shape)
        e = scenario.propensity_at(pos.reshape(-1)).reshape(shape)
    y = rng.random(shape) < eta
    s = y & (rng.random(shape) < e)
    return pos, y.astype(np.int8), s.astype(np.int8), e


def sample(scenario: Scenario, n: int, rng: np.random.Generator) -> PUSample:
    """Draw n i.i.d. observations: x ~ P_X, y ~ Bernoulli(eta(x)), s = y * Bernoulli(e(x))."""
    if n < 0:
        raise ValueError("n must be non-negative")
    pos, y, s, e = draw_arrays(scenario, n, rng)
    if isinstance(scenario, DiscreteScenario):
        return PUSample(scenario.support[pos], s, e, y, scenario.e_m, idx=pos)
    return PUSample(pos[:, None], s, e, y, scenario.e_m)


def sample_counts(scenario: DiscreteScenario, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Cell counts of ``size`` independent samples of size n, shape (size, V, 3).

    The cells per support point are (y=0), (y=1, s=0), (y=1, s=1). For any
    procedure that only depends on these counts this is equal in law to
    expanding i.i.d. draws, and orders of magnitude cheaper.
    """
    p, eta, e = scenario.probs, scenario.eta, scenario.propensity
    cells = np.stack([p * (1 - eta), p * eta * (1 - e), p * eta * e], axis=1).reshape(-1)
    cells = np.clip(cells, 0.0, None)
    cells /= cells.sum()
    return rng.multinomial(n, cells, size=size).reshape(size, scenario.size, 3)


def counts_of(sample_: PUSample, V: int) -> np.ndarray:
    """Cell counts (V, 3) of a discrete sample, matching :func:`sample_counts`."""
    cell = np.where(sample_.y == 0, 0, np.where(sample_.s == 0, 1, 2))
    flat = np.bincount(sample_.idx * 3 + cell, minlength=3 * V)
    return flat.reshape(V, 3)


# --------------------------------------------------------------------------- #
# Exact quantities
# --------------------------------------------------------------------------- #


def bayes_classifier(scenario: Scenario):
    """g*(x) = 1[eta(x) >= 1/2]; ties go to class 1."""
    if isinstance(scenario, DiscreteScenario):
        return TableHypothesis(tuple((scenario.eta >= 0.5).astype(int)))
    labels = list(scenario.eta_labels)
    edges = list(scenario.eta_edges)
    switches = [edges[i + 1] for i in range(len(labels) - 1) if labels[i] != labels[i + 1]]
    if not switches:
        return Stump(0.0, 1 if labels[0] == 1 else -1)
    if len(switches) == 1:
        return Stump(switches[0], 1 if labels[-1] == 1 else -1)
    raise NotRepresentableError("Bayes classifier is not a single threshold")


def _table_of(scenario: DiscreteScenario, g) -> np.ndarray:
    if isinstance(g, TableHypothesis):
        if len(g.bits) != scenario.size:
            raise ValueError("table length does not match the support")
        return g.table
    return np.asarray(g(scenario.support), dtype=np.int8)


def predictions_on_support(scenario: DiscreteScenario, g) -> np.ndarray:
    return _table_of(scenario, g)


def true_risk(scenario: Scenario, g) -> float:
    """R(g) = P(g(X) != Y), exact."""
    if isinstance(scenario, DiscreteScenario):
        t = _table_of(scenario, g)
        return math.fsum(scenario.probs * np.where(t == 1, 1 - scenario.eta, scenario.eta))
    if isinstance(g, Stump):
        lengths, mids = scenario.cells(extra_edges=(g.threshold,))
        pred = g(mids)
        eta = scenario.eta_at(mids)
        return math.fsum(lengths * np.where(pred == 1, 1 - eta, eta))
    raise RiskNotComputableError(f"no exact risk for {type(g).__name__} on a continuous scenario")


def excess_risk(scenario: Scenario, g) -> float:
    """l(g, g*) = R(g) - R(g*)."""
    return true_risk(scenario, g) - true_risk(scenario, bayes_classifier(scenario))


def excess_risk_by_margin(scenario: Scenario, g) -> float:
    """E[|g - g*|^2 |2 eta - 1|], the margin form of the excess risk."""
    gstar = bayes_classifier(scenario)
    if isinstance(scenario, DiscreteScenario):
        diff = _table_of(scenario, g) != _table_of(scenario, gstar)
        return math.fsum(scenario.probs * diff * np.abs(2 * scenario.eta - 1))
    if isinstance(g, Stump):
        lengths, mids = scenario.cells(extra_edges=(g.threshold, gstar.threshold))
        diff = g(mids) != gstar(mids)
        return math.fsum(lengths * diff * np.abs(2 * scenario.eta_at(mids) - 1))
    raise RiskNotComputableError(f"no exact risk for {type(g).__name__} on a continuous scenario")


def expected_labeled_count(scenario: Scenario, n: int) -> float:
    """E[N_L] = n * P(S=1); equals n * alpha * e_m under SCAR."""
    if scenario.is_scar:
        return n * scenario.alpha * scenario.e_m
    return n * scenario.labeled_rate


# --------------------------------------------------------------------------- #
# Serialization
# --------------------------------------------------------------------------- #


def scenario_to_dict(scenario: Scenario) -> dict:
    if isinstance(scenario, ContinuousMarginScenario):
        return {
            "kind": scenario.kind, "name": scenario.name, "h": scenario.h,
            "eta_edges": scenario.eta_edges.tolist(), "eta_labels": list(scenario.eta_labels),
            "e_edges": scenario.e_edges.tolist(), "e_values": scenario.e_values.tolist(),
        }
    out = {
        "kind": scenario.kind, "name": scenario.name,
        "support": scenario.support.tolist(), "probs": scenario.probs.tolist(),
        "eta": scenario.eta.tolist(), "propensity": scenario.propensity.tolist(),
        "margin_h": scenario.margin_h,
    }
    if scenario.kind == "DiscreteAssouad":
        out.update(p=scenario.p, h=scenario.h, b=list(scenario.b))
    return out


def scenario_from_dict(d: dict) -> Scenario:
    kind = d.get("kind")
    if kind == "ContinuousMargin":
        return ContinuousMarginScenario(d["h"], d["eta_edges"], d["eta_labels"], d["e_edges"], d["e_values"],
                                        name=d.get("name", "continuous"))
    if kind == "DiscreteAssouad":
        if "support" not in d:
            return assouad_scenario(len(d["b"]) + 1, d["p"], d["h"], d["b"], d.get("e", d.get("propensity", 1.0)),
                                    name=d.get("name"))
        return DiscreteScenario(d["support"], d["probs"], d["eta"], d["propensity"], margin_h=d.get("margin_h", 0.0),
                                name=d.get("name", "discrete"), kind=kind, p=d["p"], h=d["h"], b=d["b"])
    if kind == "DiscreteGeneral":
        return DiscreteScenario(d.get("support", np.eye(len(d["probs"]))), d["probs"], d["eta"], d["propensity"],
                                margin_h=d.get("margin_h", 0.0), name=d.get("name", "discrete"))
    raise ScenarioError(f"unknown scenario kind {kind!r}")


def scenario_to_json(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))
