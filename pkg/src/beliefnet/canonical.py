"""Canonical multi-cause models: noisy-OR, leaky noisy-OR, noisy-MAX.

Each cause, at each of its active levels, is independently *sufficient* to
produce the effect (or, for graded effects, to produce each effect level).
The realized effect level is the maximum of the levels produced by the
individual causes, so a compact set of per-cause sufficiency numbers expands
into a full conditional probability table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .model import Cpt, NetworkError, VariableSpec, ROW_SUM_TOL


class ParameterError(NetworkError):
    """Canonical-model parameters are inconsistent."""


@dataclass(frozen=True)
class NoisyOrSpec:
    """Binary-effect gate over binary causes.

    ``causes`` holds ``(parent name, sufficiency probability)`` pairs; ``leak``
    is the base-rate probability of the effect with no modeled cause present.
    With ``marginals_include_leak`` (the default) each sufficiency number is
    read as the assessed marginal P(effect | that cause alone), which already
    contains the leak, so expansion divides it back out; with the flag off the
    numbers are leak-free mechanism strengths.
    """

    causes: tuple[tuple[str, float], ...]
    leak: float = 0.0
    marginals_include_leak: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "causes", tuple((str(n), float(p)) for n, p in self.causes)
        )
        if not 0.0 <= self.leak < 1.0:
            raise ParameterError(f"leak must be in [0, 1), got {self.leak}")
        for name, p in self.causes:
            if not 0.0 <= p <= 1.0:
                raise ParameterError(f"sufficiency for {name!r} outside [0, 1]: {p}")

    def cause_names(self) -> list[str]:
        return [name for name, _ in self.causes]

    def probability(self, name: str) -> float:
        for cause, p in self.causes:
            if cause == name:
                return p
        raise ParameterError(f"no cause named {name!r} in spec")


@dataclass(frozen=True)
class MaxCause:
    """Sufficiency distributions of one parent: ``level_effects[l - 1]`` is the
    distribution over child levels produced by parent level ``l`` acting alone
    (parent level 0 produces child level 0 with certainty)."""

    parent: str
    level_effects: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "level_effects",
            tuple(tuple(float(x) for x in dist) for dist in self.level_effects),
        )


@dataclass(frozen=True)
class NoisyMaxSpec:
    """Graded-effect gate over multi-level causes; child level 0 is "none".

    ``leak`` is a distribution over child levels for the unmodeled background
    cause; None means degenerate at "none".
    """

    child_card: int
    causes: tuple[MaxCause, ...]
    leak: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "causes", tuple(self.causes))
        if self.leak is not None:
            object.__setattr__(self, "leak", tuple(float(x) for x in self.leak))
        if self.child_card < 2:
            raise ParameterError("child needs at least 2 levels")

    def cause(self, name: str) -> MaxCause:
        for c in self.causes:
            if c.parent == name:
                return c
        raise ParameterError(f"no cause named {name!r} in spec")

    def assessed_values(self) -> Iterator[float]:
        for c in self.causes:
            for dist in c.level_effects:
                yield from dist
        if self.leak is not None:
            yield from self.leak


def expand_noisy_or(spec: NoisyOrSpec, present: Iterable[str]) -> float:
    """P(effect | exactly the named causes present), plain gate (leak 0):
    ``1 - prod(1 - p_i)`` over the present causes."""
    if spec.leak != 0.0:
        raise ParameterError("plain noisy-OR requires leak 0; use the leaky form")
    acc = 1.0
    for name in _unique(present):
        acc *= 1.0 - spec.probability(name)
    return 1.0 - acc


def expand_leaky_noisy_or(spec: NoisyOrSpec, present: Iterable[str]) -> float:
    """Leaky gate. With assessed-marginal numbers (the default convention):

        P(effect | X) = 1 - (1 - p0) * prod((1 - p_i) / (1 - p0))

    so an empty X returns the leak exactly and each singleton returns its
    assessed p_i exactly. Requires every p_i >= p0 under that convention.
    """
    p0 = spec.leak
    acc = 1.0 - p0
    for name in _unique(present):
        p = spec.probability(name)
        if spec.marginals_include_leak:
            if p < p0:
                raise ParameterError(
                    f"sufficiency {p} for {name!r} below leak {p0}; assessed "
                    "marginals cannot undercut the base rate"
                )
            acc *= (1.0 - p) / (1.0 - p0)
        else:
            acc *= 1.0 - p
    return 1.0 - acc


def expand_noisy_max(spec: NoisyMaxSpec, assignment: Sequence[int]) -> np.ndarray:
    """Distribution over child levels for one joint parent-level assignment.

    Each active cause draws a child level from its sufficiency distribution
    (level-0 parents and an absent leak draw "none"); the realized level is
    the maximum draw. Computed exactly through cumulative products:
    P(child <= k) = prod_j P_j(child <= k).
    """
    if len(assignment) != len(spec.causes):
        raise ParameterError(
            f"assignment has {len(assignment)} levels for {len(spec.causes)} causes"
        )
    cdf = np.ones(spec.child_card)
    for cause, level in zip(spec.causes, assignment):
        if level == 0:
            continue
        if not 1 <= level <= len(cause.level_effects):
            raise ParameterError(
                f"cause {cause.parent!r} has no sufficiency for level {level}"
            )
        cdf *= np.cumsum(cause.level_effects[level - 1])
    if spec.leak is not None:
        cdf *= np.cumsum(spec.leak)
    pmf = np.diff(cdf, prepend=0.0)
    return np.clip(pmf, 0.0, None)


def compile_to_cpt(
    spec: NoisyOrSpec | NoisyMaxSpec, parent_specs: Sequence[VariableSpec]
) -> Cpt:
    """Expand a canonical spec to the full CPT, one row per parent assignment
    in odometer order (last parent fastest)."""
    if isinstance(spec, NoisyOrSpec):
        problems = check_noisy_or(spec, parent_specs)
        if problems:
            raise ParameterError("; ".join(problems))
        cards = tuple(s.cardinality for s in parent_specs)
        expand = expand_leaky_noisy_or if spec.leak > 0 else expand_noisy_or
        rows = []
        for assignment in np.ndindex(*cards) if cards else [()]:
            present = [
                s.name for s, level in zip(parent_specs, assignment) if level == 1
            ]
            p = expand(spec, present)
            rows.append((1.0 - p, p))
        return Cpt(cards, np.array(rows))
    if isinstance(spec, NoisyMaxSpec):
        ordered = _ordered_max_spec(spec, parent_specs)
        cards = tuple(s.cardinality for s in parent_specs)
        table = np.empty(cards + (spec.child_card,))
        for assignment in np.ndindex(*cards) if cards else [()]:
            table[assignment] = expand_noisy_max(ordered, assignment)
        return Cpt(cards, table)
    raise ParameterError(f"not a canonical spec: {type(spec).__name__}")


def check_noisy_or(spec: NoisyOrSpec, parent_specs: Sequence[VariableSpec]) -> list[str]:
    """Consistency problems between a noisy-OR spec and its parent variables."""
    problems = []
    names = spec.cause_names()
    parent_names = [s.name for s in parent_specs]
    if sorted(names) != sorted(parent_names):
        problems.append(
            f"causes {names} do not match parents {parent_names}"
        )
    for s in parent_specs:
        if s.cardinality != 2:
            problems.append(
                f"cause {s.name!r} has {s.cardinality} levels; noisy-OR causes "
                "are binary (use the multi-level form)"
            )
    if spec.marginals_include_leak:
        for name, p in spec.causes:
            if p < spec.leak:
                problems.append(
                    f"sufficiency {p:g} for {name!r} below leak {spec.leak:g}"
                )
    return problems


def check_noisy_max(
    spec: NoisyMaxSpec, parent_specs: Sequence[VariableSpec], child: VariableSpec
) -> list[str]:
    problems = []
    names = [c.parent for c in spec.causes]
    parent_names = [s.name for s in parent_specs]
    if sorted(names) != sorted(parent_names):
        problems.append(f"causes {names} do not match parents {parent_names}")
        return problems
    if spec.child_card != child.cardinality:
        problems.append(
            f"spec is over {spec.child_card} child levels, variable has "
            f"{child.cardinality}"
        )
        return problems
    for s in parent_specs:
        cause = spec.cause(s.name)
        if len(cause.level_effects) != s.cardinality - 1:
            problems.append(
                f"cause {s.name!r} needs a distribution for each of its "
                f"{s.cardinality - 1} active levels, got {len(cause.level_effects)}"
            )
            continue
        for l, dist in enumerate(cause.level_effects, start=1):
            problems.extend(_check_dist(dist, spec.child_card, f"{s.name}:{l}"))
    if spec.leak is not None:
        problems.extend(_check_dist(spec.leak, spec.child_card, "leak"))
    return problems


def _check_dist(dist: Sequence[float], card: int, where: str) -> list[str]:
    problems = []
    if len(dist) != card:
        problems.append(f"{where}: distribution has {len(dist)} entries for {card} levels")
        return problems
    total = float(sum(dist))
    if abs(total - 1.0) > ROW_SUM_TOL:
        problems.append(f"{where}: distribution sums to {total:.6g}")
    if any(x < 0 or x > 1 for x in dist):
        problems.append(f"{where}: entries outside [0, 1]")
    return problems


def _ordered_max_spec(
    spec: NoisyMaxSpec, parent_specs: Sequence[VariableSpec]
) -> NoisyMaxSpec:
    child = VariableSpec("_child", tuple(f"l{i}" for i in range(spec.child_card)))
    problems = check_noisy_max(spec, parent_specs, child)
    if problems:
        raise ParameterError("; ".join(problems))
    ordered = tuple(spec.cause(s.name) for s in parent_specs)
    return NoisyMaxSpec(spec.child_card, ordered, spec.leak)


# ---------------------------------------------------------------------------
# Bookkeeping over parameterizations
# ---------------------------------------------------------------------------

class ParameterCounts(NamedTuple):
    full_cpt: int
    canonical: int


def parameter_counts(
    parent_cards: Sequence[int], child_card: int, leak: bool = False
) -> ParameterCounts:
    """Free parameters of the full CPT versus the canonical form.

    Full table: ``prod(parent cards) * (child card - 1)``. Canonical:
    ``sum(card - 1) * (child card - 1)``, plus ``child card - 1`` more when a
    leak is declared.
    """
    if child_card < 2 or any(c < 2 for c in parent_cards):
        raise ParameterError("cardinalities must be at least 2")
    full = int(np.prod([int(c) for c in parent_cards], dtype=np.int64)) * (child_card - 1)
    canonical = sum(c - 1 for c in parent_cards) * (child_card - 1)
    if leak:
        canonical += child_card - 1
    return ParameterCounts(full, canonical)


@dataclass(frozen=True)
class CountDiscrepancy:
    """A configuration whose historical hand count disagrees with the factored
    formula; the formula values are authoritative here."""

    parent_cards: tuple[int, ...]
    child_card: int
    formula: ParameterCounts
    hand_count: tuple[int, int]
    note: str


#: The graded tissue-damage example was originally hand-counted as 54 full /
#: 10 canonical parameters; the counting basis of that tally is unstated and
#: does not match the factored formula, so the case is flagged rather than
#: reverse-engineered.
KNOWN_COUNT_DISCREPANCIES = (
    CountDiscrepancy(
        parent_cards=(3, 3, 3),
        child_card=4,
        formula=parameter_counts((3, 3, 3), 4),
        hand_count=(54, 10),
        note=(
            "hand count from the original orchard assessment; basis unstated, "
            "formula values reported"
        ),
    ),
)


def count_discrepancy(
    parent_cards: Sequence[int], child_card: int
) -> Optional[CountDiscrepancy]:
    """The documented discrepancy entry for a configuration, if one exists."""
    key = (tuple(parent_cards), child_card)
    for entry in KNOWN_COUNT_DISCREPANCIES:
        if (entry.parent_cards, entry.child_card) == key:
            return entry
    return None


def diff_cpts(a: Cpt, b: Cpt) -> tuple[float, float]:
    """Element-wise comparison over all probability entries: maximum absolute
    difference and the standard deviation of the differences."""
    if a.table.shape != b.table.shape:
        raise NetworkError(
            f"CPT shapes differ: {a.table.shape} vs {b.table.shape}"
        )
    diffs = a.table - b.table
    return float(np.abs(diffs).max()), float(np.std(diffs))


def _unique(names: Iterable[str]) -> list[str]:
    seen = []
    for n in names:
        if n in seen:
            raise ParameterError(f"cause {n!r} listed twice")
        seen.append(n)
    return seen
