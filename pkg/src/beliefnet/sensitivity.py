"""Sensitivity of posteriors and decisions to errors in assessed probabilities.

The central quantity is the sensitivity range SR(y, x) = P(y|x) - P(y|x-bar):
when y is conditionally independent of the assessment error given x, the
posterior P(y|e) is affine in P(x|e) with slope SR, so |SR| bounds the damage
any error in P(x) can do. The odds/likelihood forms cover the diagnostic
direction, where conflicting evidence can push sensitivity above one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .decision import DecisionRecommendation, recommend
from .inference import InferenceError, Query, posterior
from .model import Cpt, Evidence, Network, NetworkError, Node, d_separated


class ChainPathError(InferenceError):
    """The given nodes do not form a directed chain in the network."""


@dataclass(frozen=True)
class Event:
    """A binary event on a variable: "variable takes one of these levels"."""

    var: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise InferenceError(f"event on {self.var!r} needs at least one level")

    def __str__(self) -> str:
        return f"{self.var}={'|'.join(self.levels)}"


@dataclass(frozen=True)
class LinkSensitivity:
    """Sensitivity range of a target event with respect to a pivot event.

    ``premise_ok`` is False when the target is not d-separated from the
    pivot's parents given the pivot (plus background evidence); the two-point
    difference is still returned but the affine-slope reading needs care.
    """

    target: Event
    pivot: Event
    value: float
    premise_ok: bool

    def __float__(self) -> float:
        return self.value


def sensitivity_range(
    net: Network,
    target: Event,
    pivot: Event,
    evidence: Optional[Evidence] = None,
) -> LinkSensitivity:
    """SR(target, pivot) = P(target | pivot, e) - P(target | not-pivot, e).

    Both terms come from one joint posterior over the two variables. Raises
    when either pivot polarity has zero probability under the evidence.
    """
    evidence = evidence if evidence is not None else Evidence()
    if target.var == pivot.var:
        raise InferenceError("target and pivot must be different variables")
    joint = posterior(net, Query((target.var, pivot.var), evidence))
    y_levels = net.variable(target.var).levels
    x_levels = net.variable(pivot.var).levels
    y_idx = [y_levels.index(l) for l in target.levels]
    x_idx = [x_levels.index(l) for l in pivot.levels]
    x_comp = [i for i in range(len(x_levels)) if i not in x_idx]
    if not x_comp:
        raise InferenceError(f"pivot {pivot} covers every level; no complement")

    mass_x = float(joint.table[:, x_idx].sum())
    mass_not = float(joint.table[:, x_comp].sum())
    if mass_x <= 0.0 or mass_not <= 0.0:
        raise InferenceError(
            f"pivot {pivot} has zero probability in one polarity under the evidence"
        )
    p_given_x = float(joint.table[np.ix_(y_idx, x_idx)].sum()) / mass_x
    p_given_not = float(joint.table[np.ix_(y_idx, x_comp)].sum()) / mass_not

    pivot_parents = set(net.node(pivot.var).parents)
    given = {pivot.var} | {v for v, _ in evidence.items()}
    ok = d_separated(net, {target.var}, pivot_parents - given, given)
    return LinkSensitivity(target, pivot, p_given_x - p_given_not, ok)


def chain_sensitivity(
    net: Network,
    chain: Sequence[Event],
    evidence: Optional[Evidence] = None,
) -> float:
    """Product of link sensitivity ranges along a directed chain of events.

    On a pure chain this equals the end-to-end sensitivity range, and since
    each non-deterministic link has |SR| < 1, every link attenuates the rest.
    """
    if len(chain) < 2:
        raise ChainPathError("chain needs at least two events")
    for a, b in zip(chain, chain[1:]):
        if a.var not in net.node(b.var).parents:
            raise ChainPathError(f"{a.var!r} is not a parent of {b.var!r}")
    product = 1.0
    for a, b in zip(chain, chain[1:]):
        product *= sensitivity_range(net, b, a, evidence).value
    return product


# ---------------------------------------------------------------------------
# Odds / likelihood-ratio forms for a single diagnostic link
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OddsForm:
    """Bayes' theorem restated over odds: posterior = L*O / (L*O + 1)."""

    prior_odds: float
    likelihood_ratio: float

    def __post_init__(self):
        if self.prior_odds < 0 or self.likelihood_ratio < 0:
            raise InferenceError("odds and likelihood ratio must be non-negative")
        if math.isinf(self.prior_odds) and math.isinf(self.likelihood_ratio):
            raise InferenceError("prior odds and likelihood ratio both infinite")

    @classmethod
    def from_probabilities(
        cls, prior: float, p_b_given_a: float, p_b_given_not_a: float
    ) -> "OddsForm":
        odds = math.inf if prior >= 1.0 else prior / (1.0 - prior)
        ratio = (
            math.inf
            if p_b_given_not_a == 0.0 and p_b_given_a > 0.0
            else p_b_given_a / p_b_given_not_a
            if p_b_given_not_a > 0.0
            else 0.0
        )
        return cls(odds, ratio)

    @property
    def posterior(self) -> float:
        return posterior_from_odds(self.prior_odds, self.likelihood_ratio)


def posterior_from_odds(prior_odds: float, likelihood_ratio: float) -> float:
    """posterior = L*O / (L*O + 1); an infinite product saturates at 1."""
    if prior_odds < 0 or likelihood_ratio < 0:
        raise InferenceError("odds and likelihood ratio must be non-negative")
    product = likelihood_ratio * prior_odds
    if math.isinf(product):
        return 1.0
    return product / (product + 1.0)


def likelihood_sensitivity(prior_odds: float, likelihood_ratio: float) -> float:
    """d posterior / d L = O / (L*O + 1)^2.

    Large when the prior odds are high and the likelihood ratio is small,
    i.e. exactly when two sources of evidence conflict.
    """
    product = likelihood_ratio * prior_odds
    if math.isinf(product) or math.isinf(prior_odds):
        return 0.0
    return prior_odds / (product + 1.0) ** 2


@dataclass(frozen=True)
class LogOddsDecomposition:
    """Additive form: posterior log-odds = prior log-odds + log-likelihood.

    In this metric the sensitivity of the posterior to either term is exactly
    one. ``saturated`` flags zero or infinite odds (certainty), where the
    additive reading degenerates; the sentinels are +-inf, never silent NaNs.
    """

    prior_log_odds: float
    log_likelihood: float
    posterior_log_odds: float
    saturated: bool


def log_odds_decomposition(
    prior_odds: float, likelihood_ratio: float
) -> LogOddsDecomposition:
    if prior_odds < 0 or likelihood_ratio < 0:
        raise InferenceError("odds and likelihood ratio must be non-negative")
    saturated = (
        prior_odds == 0.0
        or likelihood_ratio == 0.0
        or math.isinf(prior_odds)
        or math.isinf(likelihood_ratio)
    )
    ln_o = math.log(prior_odds) if prior_odds > 0 else -math.inf
    ln_l = math.log(likelihood_ratio) if likelihood_ratio > 0 else -math.inf
    return LogOddsDecomposition(ln_o, ln_l, ln_o + ln_l, saturated)


# ---------------------------------------------------------------------------
# Empirical parameter sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CptCell:
    """One entry of a node's compiled CPT: row (parent-assignment odometer
    index) and column (child level index)."""

    node: str
    row: int
    col: int


@dataclass(frozen=True)
class SweepPoint:
    cell_value: float
    posterior: float
    expected_utilities: Optional[dict[str, float]]
    recommended: Optional[str]


@dataclass(frozen=True)
class SweepTrace:
    cell: CptCell
    points: tuple[SweepPoint, ...]
    crossings: tuple[tuple[float, float], ...]  # cell values bracketing a flip


def cpt_parameter_sweep(
    net: Network,
    target: Event,
    evidence: Evidence,
    cell: CptCell,
    grid: Sequence[float],
) -> SweepTrace:
    """Trace the target-event posterior (and, when the network carries a
    decision and utility node, per-alternative expected utilities) as one CPT
    cell moves over ``grid``; the row's remaining mass rescales
    proportionally. Consecutive grid points whose recommendation differs are
    reported as decision-threshold crossings."""
    base = net.compiled_cpt(cell.node)
    rows = base.rows()
    if not 0 <= cell.row < rows.shape[0]:
        raise NetworkError(f"row {cell.row} out of range for {cell.node!r}")
    if not 0 <= cell.col < rows.shape[1]:
        raise NetworkError(f"column {cell.col} out of range for {cell.node!r}")
    rest = np.delete(rows[cell.row], cell.col)
    if rest.sum() <= 0.0 and any(abs(v - rows[cell.row, cell.col]) > 0 for v in grid):
        raise NetworkError(
            f"row {cell.row} of {cell.node!r} is degenerate at column "
            f"{cell.col}; remaining mass cannot be rescaled"
        )

    has_decision = bool(net.decision_nodes()) and net.utility_node() is not None
    points: list[SweepPoint] = []
    for value in grid:
        if not 0.0 <= value <= 1.0:
            raise NetworkError(f"grid value {value} outside [0, 1]")
        swept = _with_cell(net, cell, float(value))
        post = posterior(swept, Query((target.var,), evidence))
        marg = post.marginal(target.var)
        p = sum(marg[l] for l in target.levels)
        if has_decision:
            rec: Optional[DecisionRecommendation] = recommend(swept, evidence)
        else:
            rec = None
        points.append(
            SweepPoint(
                cell_value=float(value),
                posterior=p,
                expected_utilities=dict(rec.expected_utilities) if rec else None,
                recommended=rec.recommended if rec else None,
            )
        )
    crossings = tuple(
        (a.cell_value, b.cell_value)
        for a, b in zip(points, points[1:])
        if a.recommended is not None and a.recommended != b.recommended
    )
    return SweepTrace(cell, tuple(points), crossings)


def _with_cell(net: Network, cell: CptCell, value: float) -> Network:
    """Copy of the network with one compiled-CPT cell set to ``value`` and the
    rest of that row rescaled to keep the row normalized."""
    base = net.compiled_cpt(cell.node)
    rows = base.rows().copy()
    row = rows[cell.row]
    old = row[cell.col]
    rest = 1.0 - old
    if rest <= 0.0:
        if value == old:
            scale = 0.0
        else:
            raise NetworkError(
                f"row {cell.row} of {cell.node!r} has no remaining mass to rescale"
            )
    else:
        scale = (1.0 - value) / rest
    new_row = row * scale
    new_row[cell.col] = value
    rows[cell.row] = new_row
    new_cpt = Cpt(base.parent_cards, rows.reshape(base.table.shape))
    nodes = []
    for node in net.nodes.values():
        if node.name == cell.node:
            nodes.append(
                Node(
                    name=node.name,
                    kind="chance",
                    variable=node.variable,
                    parents=node.parents,
                    cpd=new_cpt,
                    tags=node.tags,
                )
            )
        else:
            nodes.append(node)
    return Network(nodes)
