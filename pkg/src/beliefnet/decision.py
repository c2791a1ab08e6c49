"""Expected-utility evaluation of decision alternatives.

Utilities are negated costs (higher is better), so maximizing expected
utility minimizes expected cost. Single-stage only: one decision node,
evaluated by enumerating its alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import InferenceError, Query, posterior
from .model import Evidence, Network, UtilityTable

__all__ = [
    "UtilityTable",
    "DecisionRecommendation",
    "TIE_TOLERANCE",
    "expected_utility",
    "recommend",
]

#: Alternatives within this absolute EU distance count as tied.
TIE_TOLERANCE = 1e-9


class DecisionError(InferenceError):
    """The influence diagram cannot support the requested evaluation."""


@dataclass(frozen=True)
class DecisionRecommendation:
    """Per-alternative expected utilities and the argmax choice. The tie flag
    is set when another alternative lies within TIE_TOLERANCE."""

    expected_utilities: dict[str, float]
    recommended: str
    tie: bool


def expected_utility(
    net: Network, evidence: Evidence, alternative: dict[str, str]
) -> float:
    """Expected utility with every decision variable fixed by ``alternative``
    (or already by ``evidence``): the utility-parent posterior weighted into
    the utility table."""
    util = net.utility_node()
    if util is None or not isinstance(util.cpd, UtilityTable):
        raise DecisionError("network has no utility node")
    combined = evidence
    for var, level in alternative.items():
        if var in combined and combined.get(var) != level:
            raise DecisionError(f"decision {var!r} fixed twice with different levels")
        combined = combined.with_assignment(var, level)
    for name in net.decision_nodes():
        if name not in combined:
            raise DecisionError(f"decision {name!r} not assigned")

    table: UtilityTable = util.cpd
    values = table.values
    free: list[str] = []
    for axis, parent in enumerate(util.parents):
        level = combined.get(parent)
        if level is None:
            free.append(parent)
        else:
            idx = net.variable(parent).level_index(level)
            values = np.take(values, [idx], axis=axis)
    if not free:
        return float(values.reshape(()))
    post = posterior(net, Query(tuple(free), combined))
    return float(np.sum(post.table * values.reshape(post.table.shape)))


def recommend(net: Network, evidence: Evidence) -> DecisionRecommendation:
    """Evaluate every alternative of the single decision node and pick the
    best, breaking near-ties (TIE_TOLERANCE) toward declaration order."""
    decisions = net.decision_nodes()
    if not decisions:
        raise DecisionError("network has no decision node")
    if len(decisions) > 1:
        raise DecisionError("multiple decision nodes are not supported")
    decision = decisions[0]
    if decision in evidence:
        raise DecisionError(f"decision {decision!r} is already fixed by evidence")
    utilities: dict[str, float] = {}
    for level in net.variable(decision).levels:
        utilities[level] = expected_utility(net, evidence, {decision: level})
    best = max(utilities.values())
    contenders = [l for l, u in utilities.items() if u >= best - TIE_TOLERANCE]
    return DecisionRecommendation(
        expected_utilities=utilities,
        recommended=contenders[0],
        tie=len(contenders) > 1,
    )
