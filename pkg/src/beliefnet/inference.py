"""Exact posterior computation by variable elimination, plus a brute-force
joint-enumeration oracle kept deliberately separate from the production path.

All arithmetic is plain double precision in the linear domain; diagnostic
networks at this scale do not underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import Evidence, Network, check_evidence

#: enumerate_joint refuses joint state spaces larger than this.
MAX_ENUMERATION_STATES = 10**7


class InferenceError(Exception):
    """Query cannot be evaluated against this network."""


class ZeroProbabilityEvidenceError(InferenceError):
    """The evidence assignment has probability zero (conflicting evidence)."""

    def __init__(self, evidence: Evidence):
        self.evidence = evidence
        detail = ", ".join(f"{v}={l}" for v, l in evidence.items())
        super().__init__(f"evidence has probability zero: {detail}")


class UnresolvedDecisionError(InferenceError):
    """A decision variable that influences the query is not fixed."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(
            f"decision {name!r} influences the query but is not assigned"
        )


class StateSpaceOverflowError(InferenceError):
    """Joint enumeration would exceed MAX_ENUMERATION_STATES."""


@dataclass(frozen=True)
class Query:
    """Posterior request: joint distribution of ``targets`` given ``evidence``."""

    targets: tuple[str, ...]
    evidence: Evidence = field(default_factory=Evidence)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise InferenceError("query needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise InferenceError("duplicate query target")


@dataclass(frozen=True)
class Posterior:
    """Normalized joint distribution over the target variables."""

    targets: tuple[str, ...]
    levels: tuple[tuple[str, ...], ...]
    table: np.ndarray

    def probability(self, assignment: dict[str, str]) -> float:
        idx = []
        for var, var_levels in zip(self.targets, self.levels):
            if var not in assignment:
                raise InferenceError(f"assignment missing target {var!r}")
            idx.append(var_levels.index(assignment[var]))
        return float(self.table[tuple(idx)])

    def marginal(self, var: str) -> dict[str, float]:
        """Marginal distribution of one target, by level name."""
        axis = self.targets.index(var)
        other = tuple(i for i in range(self.table.ndim) if i != axis)
        mass = self.table.sum(axis=other) if other else self.table
        return {level: float(p) for level, p in zip(self.levels[axis], mass)}

    def as_dict(self) -> dict[tuple[str, ...], float]:
        out = {}
        for idx in np.ndindex(*self.table.shape):
            key = tuple(self.levels[i][j] for i, j in enumerate(idx))
            out[key] = float(self.table[idx])
        return out


class Factor:
    """Non-negative table over a tuple of variables; the unit of elimination."""

    __slots__ = ("scope", "table")

    def __init__(self, scope: Sequence[str], table: np.ndarray):
        self.scope = tuple(scope)
        self.table = np.asarray(table, dtype=float)
        if self.table.ndim != len(self.scope):
            raise InferenceError(
                f"factor table has {self.table.ndim} axes for scope {self.scope}"
            )

    def product(self, other: "Factor") -> "Factor":
        scope = list(self.scope) + [v for v in other.scope if v not in self.scope]
        return Factor(
            scope,
            _aligned(self, scope) * _aligned(other, scope),
        )

    def marginalize(self, var: str) -> "Factor":
        axis = self.scope.index(var)
        return Factor(
            self.scope[:axis] + self.scope[axis + 1:],
            self.table.sum(axis=axis),
        )

    def reduce(self, var: str, level: int) -> "Factor":
        axis = self.scope.index(var)
        return Factor(
            self.scope[:axis] + self.scope[axis + 1:],
            np.take(self.table, level, axis=axis),
        )

    def __repr__(self) -> str:
        return f"Factor{self.scope}"


def _aligned(factor: Factor, scope: list[str]) -> np.ndarray:
    """View of the factor's table transposed/expanded to the union scope."""
    order = [factor.scope.index(v) for v in scope if v in factor.scope]
    table = np.transpose(factor.table, order)
    shape = []
    k = 0
    for v in scope:
        if v in factor.scope:
            shape.append(table.shape[k])
            k += 1
        else:
            shape.append(1)
    return table.reshape(shape)


def posterior(
    net: Network,
    query: Query,
    elimination_order: Optional[Sequence[str]] = None,
) -> Posterior:
    """Exact joint posterior of the query targets given its evidence.

    Variable elimination over the sub-network relevant to the query, with a
    min-degree elimination ordering unless one is supplied. Raises
    ZeroProbabilityEvidenceError when the evidence is jointly impossible.
    """
    check_evidence(net, query.evidence)
    for t in query.targets:
        node = net.node(t)
        if t in query.evidence:
            raise InferenceError(f"target {t!r} is fixed by evidence")
        if node.kind == "utility":
            raise InferenceError("utility node has no distribution to query")
        if node.kind == "decision":
            raise UnresolvedDecisionError(t)

    factors = _reduced_relevant_factors(
        net, set(query.targets), query.evidence
    )
    keep = set(query.targets)
    factors = _eliminate_all_but(net, factors, keep, elimination_order)

    result = None
    for f in factors:
        result = f if result is None else result.product(f)
    if result is None:
        raise InferenceError("no factors relevant to query")
    for t in query.targets:  # degenerate one-var factors may be missing a target
        if t not in result.scope:
            raise InferenceError(f"target {t!r} dropped during elimination")
    order = [result.scope.index(t) for t in query.targets]
    table = np.transpose(result.table, order)
    z = float(table.sum())
    if z <= 0.0:
        raise ZeroProbabilityEvidenceError(query.evidence)
    levels = tuple(tuple(net.variable(t).levels) for t in query.targets)
    return Posterior(tuple(query.targets), levels, table / z)


def prob_of_evidence(net: Network, evidence: Evidence) -> float:
    """Marginal probability of the evidence assignment; 1 for no evidence."""
    check_evidence(net, evidence)
    if len(evidence) == 0:
        return 1.0
    factors = _reduced_relevant_factors(net, set(), evidence)
    factors = _eliminate_all_but(net, factors, set(), None)
    result = 1.0
    for f in factors:
        result *= float(f.table.sum()) if f.scope else float(f.table)
    return max(result, 0.0)


def _reduced_relevant_factors(
    net: Network, targets: set[str], evidence: Evidence
) -> list[Factor]:
    """CPT factors of the nodes relevant to targets+evidence, with evidence
    levels sliced in. Unassigned decisions in the relevant set are an error."""
    roots = targets | set(v for v, _ in evidence.items())
    relevant = roots | net.ancestors_of(roots)
    factors = []
    for name in net.names:
        if name not in relevant:
            continue
        node = net.node(name)
        if node.kind == "utility":
            continue
        if node.kind == "decision":
            if name not in evidence:
                raise UnresolvedDecisionError(name)
            continue  # fixed by evidence; other factors lose the axis below
        cpt = net.compiled_cpt(name)
        factor = Factor(tuple(node.parents) + (name,), cpt.table)
        for var in factor.scope:
            level = evidence.get(var)
            if level is not None:
                factor = factor.reduce(var, net.variable(var).level_index(level))
        factors.append(factor)
    return factors


def _eliminate_all_but(
    net: Network,
    factors: list[Factor],
    keep: set[str],
    elimination_order: Optional[Sequence[str]],
) -> list[Factor]:
    in_scope = sorted(
        {v for f in factors for v in f.scope if v not in keep},
        key=net.names.index,
    )
    if elimination_order is not None:
        missing = [v for v in in_scope if v not in elimination_order]
        if missing:
            raise InferenceError(f"elimination order misses {missing}")
        order = [v for v in elimination_order if v in in_scope]
        for var in order:
            factors = _eliminate_one(factors, var)
        return factors
    # min-degree: eliminate the variable touching the fewest other variables,
    # declaration order breaking ties
    position = {name: i for i, name in enumerate(net.names)}
    pending = set(in_scope)
    while pending:
        neighbors: dict[str, set[str]] = {v: set() for v in pending}
        for f in factors:
            for v in f.scope:
                if v in pending:
                    neighbors[v].update(u for u in f.scope if u != v)
        var = min(pending, key=lambda v: (len(neighbors[v]), position[v]))
        factors = _eliminate_one(factors, var)
        pending.discard(var)
    return factors


def _eliminate_one(factors: list[Factor], var: str) -> list[Factor]:
    touching = [f for f in factors if var in f.scope]
    rest = [f for f in factors if var not in f.scope]
    if not touching:
        return rest
    product = touching[0]
    for f in touching[1:]:
        product = product.product(f)
    rest.append(product.marginalize(var))
    return rest


# ---------------------------------------------------------------------------
# Enumeration oracle (independent of the Factor/elimination path)
# ---------------------------------------------------------------------------

def enumerate_joint(net: Network, query: Query) -> Posterior:
    """Same contract as :func:`posterior`, computed by materializing the full
    joint as one broadcast product of CPT entries and summing it out.

    Guarded at MAX_ENUMERATION_STATES unobserved joint states; exists as a
    test oracle, not a production path.
    """
    check_evidence(net, query.evidence)
    evidence = query.evidence
    for t in query.targets:
        if t in evidence:
            raise InferenceError(f"target {t!r} is fixed by evidence")
        kind = net.node(t).kind
        if kind == "utility":
            raise InferenceError("utility node has no distribution to query")
        if kind == "decision":
            raise UnresolvedDecisionError(t)

    stochastic = [
        n for n in net.names if net.node(n).kind in ("chance", "deterministic")
    ]
    for name in net.decision_nodes():
        if name not in evidence and any(
            c in stochastic for c in net.children_of(name)
        ):
            raise UnresolvedDecisionError(name)

    axes = {name: i for i, name in enumerate(stochastic)}
    size = 1
    for name in stochastic:
        if name not in evidence:
            size *= net.variable(name).cardinality
        if size > MAX_ENUMERATION_STATES:
            raise StateSpaceOverflowError(
                f"joint state space exceeds {MAX_ENUMERATION_STATES}"
            )

    joint = np.ones((1,) * len(stochastic))
    for name in stochastic:
        node = net.node(name)
        table = net.compiled_cpt(name).table
        scope = list(node.parents) + [name]
        for var in list(scope):
            level = evidence.get(var)
            if level is not None:
                pos = scope.index(var)
                table = np.take(table, net.variable(var).level_index(level), axis=pos)
                scope.pop(pos)
        shape = [1] * len(stochastic)
        perm = sorted(range(len(scope)), key=lambda i: axes[scope[i]])
        table = np.transpose(table, perm)
        for i, var in enumerate(sorted(scope, key=axes.get)):
            shape[axes[var]] = table.shape[i]
        joint = joint * table.reshape(shape)

    sum_axes = tuple(
        axes[name] for name in stochastic if name not in query.targets
    )
    marginal = joint.sum(axis=sum_axes) if sum_axes else joint
    # joint axes follow declaration order; reorder to the query's target order
    target_axes_order = [name for name in stochastic if name in query.targets]
    perm = [target_axes_order.index(t) for t in query.targets]
    if marginal.ndim > 1:
        marginal = np.transpose(marginal, perm)
    z = float(marginal.sum())
    if z <= 0.0:
        raise ZeroProbabilityEvidenceError(evidence)
    levels = tuple(tuple(net.variable(t).levels) for t in query.targets)
    return Posterior(tuple(query.targets), levels, marginal / z)
