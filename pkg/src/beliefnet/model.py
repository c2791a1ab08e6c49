"""Core network representation: variables, nodes, CPTs, structural validation.

A network is a DAG of named nodes over multi-level discrete variables. Level 0
is by convention the "absent/none" state for causal variables; level order is
significant (severity-ordered, which the max-style canonical models rely on).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

#: Row sums must match 1 within this tolerance; closer rows are renormalized.
ROW_SUM_TOL = 1e-9

#: Probability palette used as an assessment aid; off-palette values lint.
ASSESSMENT_PALETTE = (
    0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0,
)

NODE_KINDS = ("chance", "deterministic", "decision", "utility")


class NetworkError(Exception):
    """Structural problem that prevents use of a network."""


class CycleError(NetworkError):
    """The graph has a directed cycle."""

    def __init__(self, nodes: Iterable[str]):
        self.nodes = sorted(nodes)
        super().__init__(f"cycle through nodes {{{', '.join(self.nodes)}}}")


@dataclass(frozen=True)
class VariableSpec:
    """A named discrete variable with an ordered tuple of level names."""

    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) < 2:
            raise NetworkError(f"variable {self.name!r} needs at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise NetworkError(f"variable {self.name!r} has duplicate level names")

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    def level_index(self, level: str) -> int:
        try:
            return self.levels.index(level)
        except ValueError:
            raise NetworkError(
                f"variable {self.name!r} has no level {level!r} "
                f"(levels: {', '.join(self.levels)})"
            ) from None


class Cpt:
    """Full conditional probability table.

    Stored as an array of shape ``(*parent_cards, child_card)``. Rows follow
    odometer order over the parents as declared, last parent fastest, which is
    exactly C order of the leading axes.
    """

    def __init__(self, parent_cards: Iterable[int], table: np.ndarray):
        self.parent_cards = tuple(int(c) for c in parent_cards)
        table = np.asarray(table, dtype=float)
        expected = self.parent_cards + (table.shape[-1],)
        if table.ndim == 2 and table.shape[0] == _prod(self.parent_cards):
            table = table.reshape(expected)
        if table.shape != expected:
            raise NetworkError(
                f"CPT shape {table.shape} does not match parents {self.parent_cards}"
            )
        self.table = table

    @classmethod
    def from_rows(cls, parent_cards: Iterable[int], rows: Iterable[Iterable[float]]) -> "Cpt":
        """Build from one distribution per parent assignment, renormalizing
        rows whose sum is already within ``ROW_SUM_TOL`` of 1."""
        arr = np.array([list(r) for r in rows], dtype=float)
        if arr.ndim != 2:
            raise NetworkError("CPT rows must all have the same length")
        sums = arr.sum(axis=1, keepdims=True)
        # Renormalize rows that are off by more than float round-off but
        # within tolerance; leaving already-normalized rows untouched keeps
        # serialize/parse a fixpoint.
        needs = (np.abs(sums - 1.0) > 1e-14) & (np.abs(sums - 1.0) <= ROW_SUM_TOL)
        arr = np.where(needs & (sums > 0), arr / np.where(sums == 0, 1.0, sums), arr)
        return cls(parent_cards, arr)

    @property
    def child_card(self) -> int:
        return self.table.shape[-1]

    @property
    def n_rows(self) -> int:
        return _prod(self.parent_cards)

    def rows(self) -> np.ndarray:
        """2-D view, one row per parent assignment in odometer order."""
        return self.table.reshape(self.n_rows, self.child_card)

    def row(self, assignment: tuple[int, ...]) -> np.ndarray:
        return self.table[tuple(assignment)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cpt)
            and self.parent_cards == other.parent_cards
            and self.table.shape == other.table.shape
            and bool(np.array_equal(self.table, other.table))
        )

    def __repr__(self) -> str:
        return f"Cpt(parents={self.parent_cards}, child={self.child_card})"


@dataclass(frozen=True)
class DeterministicRule:
    """Functional CPD. Only ``max`` is defined: the child level is the maximum
    of the parent level indices (all variables must share one level set)."""

    rule: str = "max"

    def __post_init__(self):
        if self.rule != "max":
            raise NetworkError(f"unknown deterministic rule {self.rule!r}")


class UtilityTable:
    """Real-valued outcome per parent assignment. Values are utilities (cost
    negated), so higher is better throughout the engine."""

    def __init__(self, parent_cards: Iterable[int], values: np.ndarray):
        self.parent_cards = tuple(int(c) for c in parent_cards)
        values = np.asarray(values, dtype=float)
        if values.size != _prod(self.parent_cards):
            raise NetworkError(
                f"utility table has {values.size} values, expected "
                f"{_prod(self.parent_cards)} for parents {self.parent_cards}"
            )
        self.values = values.reshape(self.parent_cards)

    def value(self, assignment: tuple[int, ...]) -> float:
        return float(self.values[tuple(assignment)])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, UtilityTable)
            and self.parent_cards == other.parent_cards
            and bool(np.array_equal(self.values, other.values))
        )

    def __repr__(self) -> str:
        return f"UtilityTable(parents={self.parent_cards})"


@dataclass
class Node:
    """One network node. ``variable`` is None only for the utility node."""

    name: str
    kind: str
    variable: Optional[VariableSpec] = None
    parents: tuple[str, ...] = ()
    cpd: object = None
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        self.parents = tuple(self.parents)
        self.tags = frozenset(self.tags)
        if self.kind not in NODE_KINDS:
            raise NetworkError(f"node {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "utility":
            if self.variable is not None:
                raise NetworkError(f"utility node {self.name!r} carries no variable")
        elif self.variable is None:
            raise NetworkError(f"node {self.name!r} needs a variable")
        elif self.variable.name != self.name:
            raise NetworkError(
                f"node {self.name!r} bound to variable {self.variable.name!r}"
            )


@dataclass(frozen=True)
class Evidence:
    """Observed levels, one per variable. Decision variables may be assigned
    (policy instantiation); the utility node may not."""

    assignments: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def items(self):
        return self.assignments.items()

    def __contains__(self, var: str) -> bool:
        return var in self.assignments

    def __len__(self) -> int:
        return len(self.assignments)

    def get(self, var: str) -> Optional[str]:
        return self.assignments.get(var)

    def with_assignment(self, var: str, level: str) -> "Evidence":
        merged = dict(self.assignments)
        merged[var] = level
        return Evidence(merged)

    def without(self, var: str) -> "Evidence":
        remaining = {k: v for k, v in self.assignments.items() if k != var}
        return Evidence(remaining)


class Network:
    """Named node collection; edges are implied by parent lists. A validated
    network is immutable and safe for concurrent readers (the compiled-CPT
    cache fills idempotently)."""

    def __init__(self, nodes: Iterable[Node]):
        self.nodes: dict[str, Node] = {}
        for node in nodes:
            if node.name in self.nodes:
                raise NetworkError(f"duplicate node name {node.name!r}")
            self.nodes[node.name] = node
        self._children: dict[str, list[str]] = {name: [] for name in self.nodes}
        for node in self.nodes.values():
            for p in node.parents:
                if p in self._children:
                    self._children[p].append(node.name)
        self._compiled: dict[str, Cpt] = {}

    @property
    def names(self) -> list[str]:
        """Node names in declaration order."""
        return list(self.nodes)

    def node(self, name: str) -> Node:
        try:
            return self.nodes[name]
        except KeyError:
            raise NetworkError(f"no node named {name!r}") from None

    def variable(self, name: str) -> VariableSpec:
        node = self.node(name)
        if node.variable is None:
            raise NetworkError(f"node {name!r} has no variable (utility node)")
        return node.variable

    def children_of(self, name: str) -> list[str]:
        return list(self._children.get(name, []))

    def utility_node(self) -> Optional[Node]:
        for node in self.nodes.values():
            if node.kind == "utility":
                return node
        return None

    def decision_nodes(self) -> list[str]:
        return [n.name for n in self.nodes.values() if n.kind == "decision"]

    def tagged(self, tag: str) -> list[str]:
        return [n.name for n in self.nodes.values() if tag in n.tags]

    def ancestors_of(self, names: Iterable[str]) -> set[str]:
        """All strict ancestors of the given nodes."""
        seen: set[str] = set()
        stack = [p for n in names for p in self.node(n).parents if p in self.nodes]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(p for p in self.nodes[cur].parents if p in self.nodes)
        return seen

    def compiled_cpt(self, name: str) -> Cpt:
        """The full CPT of a chance or deterministic node, compiling canonical
        forms (noisy gates, max rule) on first use."""
        cached = self._compiled.get(name)
        if cached is not None:
            return cached
        node = self.node(name)
        cpt = _compile_node_cpt(self, node)
        self._compiled[name] = cpt
        return cpt


def _compile_node_cpt(net: Network, node: Node) -> Cpt:
    from . import canonical  # circular at import time only

    if node.kind not in ("chance", "deterministic"):
        raise NetworkError(f"node {node.name!r} ({node.kind}) has no CPT")
    parent_specs = [net.variable(p) for p in node.parents]
    cpd = node.cpd
    if isinstance(cpd, Cpt):
        return cpd
    if isinstance(cpd, DeterministicRule):
        assert node.variable is not None
        return expand_deterministic_max(parent_specs, node.variable)
    if isinstance(cpd, (canonical.NoisyOrSpec, canonical.NoisyMaxSpec)):
        return canonical.compile_to_cpt(cpd, parent_specs)
    raise NetworkError(f"node {node.name!r} has no usable CPD")


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning" | "lint"
    message: str
    node: Optional[str] = None

    def __str__(self) -> str:
        where = f" [{self.node}]" if self.node else ""
        return f"{self.severity}{where}: {self.message}"


class ValidationReport:
    """Ordered list of validation issues. The network is well-formed iff there
    are no error-severity entries; lints (palette hints) never block."""

    def __init__(self, issues: Iterable[ValidationIssue] = ()):
        self.issues = list(issues)

    @property
    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def lints(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "lint"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    def __repr__(self) -> str:
        return f"ValidationReport({len(self.errors)} errors, {len(self.issues)} issues)"


def validate(net: Network) -> ValidationReport:
    """Check the whole network; every problem becomes a report entry, nothing
    raises. Palette deviations are non-fatal lints."""
    from . import canonical

    issues: list[ValidationIssue] = []

    def err(msg: str, node: Optional[str] = None):
        issues.append(ValidationIssue("error", msg, node))

    def lint(msg: str, node: Optional[str] = None):
        issues.append(ValidationIssue("lint", msg, node))

    # Parent references and per-kind CPD discipline.
    utility_nodes = [n for n in net.nodes.values() if n.kind == "utility"]
    for node in net.nodes.values():
        missing = [p for p in node.parents if p not in net.nodes]
        for p in missing:
            err(f"parent {p!r} is not declared", node.name)
        for p in node.parents:
            if p in net.nodes and net.nodes[p].kind == "utility":
                err(f"utility node {p!r} cannot be a parent", node.name)
        if len(set(node.parents)) != len(node.parents):
            err("duplicate parent", node.name)
        if node.kind == "chance":
            if not isinstance(node.cpd, (Cpt, canonical.NoisyOrSpec, canonical.NoisyMaxSpec)):
                err("chance node needs a probability table or canonical model", node.name)
        elif node.kind == "deterministic":
            if not isinstance(node.cpd, DeterministicRule):
                err("deterministic node needs a rule (max)", node.name)
        elif node.kind == "decision":
            if node.cpd is not None:
                err("decision node carries no distribution", node.name)
        elif node.kind == "utility":
            if not isinstance(node.cpd, UtilityTable):
                err("utility node needs a utility table", node.name)
            if net.children_of(node.name):
                err("utility node cannot have children", node.name)
    if len(utility_nodes) > 1:
        err(f"at most one utility node supported, found {len(utility_nodes)}")

    # Acyclicity (only meaningful once parents resolve).
    if not any(i.severity == "error" for i in issues):
        try:
            topological_order(net)
        except CycleError as exc:
            err(str(exc))

    # Shape and normalization checks per node.
    for node in net.nodes.values():
        if any(p not in net.nodes for p in node.parents):
            continue
        parent_specs = [
            net.nodes[p].variable for p in node.parents if net.nodes[p].variable is not None
        ]
        if len(parent_specs) != len(node.parents):
            continue  # utility parent already reported
        cards = tuple(s.cardinality for s in parent_specs)
        _check_cpd_shape(node, cards, parent_specs, err, lint)

    return ValidationReport(issues)


def _check_cpd_shape(node: Node, cards, parent_specs, err, lint) -> None:
    from . import canonical

    cpd = node.cpd
    if isinstance(cpd, Cpt):
        if cpd.parent_cards != cards:
            err(f"CPT shaped for parents {cpd.parent_cards}, node has {cards}", node.name)
            return
        assert node.variable is not None
        if cpd.child_card != node.variable.cardinality:
            err(
                f"CPT has {cpd.child_card} columns, variable has "
                f"{node.variable.cardinality} levels",
                node.name,
            )
            return
        rows = cpd.rows()
        for idx, row in enumerate(rows):
            total = float(row.sum())
            if abs(total - 1.0) > ROW_SUM_TOL:
                err(f"row {idx} sums to {total:.6g}, expected 1", node.name)
            if ((row < 0) | (row > 1)).any():
                err(f"row {idx} has entries outside [0, 1]", node.name)
        for value in np.unique(rows):
            _palette_lint(float(value), node.name, lint)
    elif isinstance(cpd, canonical.NoisyOrSpec):
        problems = canonical.check_noisy_or(cpd, parent_specs)
        for msg in problems:
            err(msg, node.name)
        if node.variable is not None and node.variable.cardinality != 2:
            err("noisy-OR requires a binary child; use the multi-level form", node.name)
        for value in [cpd.leak, *(p for _, p in cpd.causes)]:
            _palette_lint(float(value), node.name, lint)
    elif isinstance(cpd, canonical.NoisyMaxSpec):
        assert node.variable is not None
        problems = canonical.check_noisy_max(cpd, parent_specs, node.variable)
        for msg in problems:
            err(msg, node.name)
        for value in cpd.assessed_values():
            _palette_lint(float(value), node.name, lint)
    elif isinstance(cpd, DeterministicRule):
        assert node.variable is not None
        for spec in parent_specs:
            if spec.levels != node.variable.levels:
                err(
                    f"max rule needs identical level sets; parent {spec.name!r} "
                    f"differs",
                    node.name,
                )
    elif isinstance(cpd, UtilityTable):
        if cpd.parent_cards != cards:
            err(
                f"utility table shaped for parents {cpd.parent_cards}, node has {cards}",
                node.name,
            )
        elif not np.isfinite(cpd.values).all():
            err("utility table has non-finite values", node.name)


def _palette_lint(value: float, node: str, lint) -> None:
    if not any(abs(value - p) <= 1e-9 for p in ASSESSMENT_PALETTE):
        lint(f"probability {value:g} is off the assessment palette", node)


# ---------------------------------------------------------------------------
# Graph operations
# ---------------------------------------------------------------------------

def topological_order(net: Network) -> list[str]:
    """Parents-before-children order, deterministic with ties broken by
    declaration order. Raises CycleError naming the strongly connected set."""
    names = net.names
    position = {name: i for i, name in enumerate(names)}
    indegree = {
        name: sum(1 for p in net.nodes[name].parents if p in net.nodes)
        for name in names
    }
    ready = sorted((n for n in names if indegree[n] == 0), key=position.__getitem__)
    order: list[str] = []
    while ready:
        current = ready.pop(0)
        order.append(current)
        inserted = False
        for child in net.children_of(current):
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
                inserted = True
        if inserted:
            ready.sort(key=position.__getitem__)
    if len(order) < len(names):
        remaining = [n for n in names if n not in set(order)]
        raise CycleError(_cyclic_nodes(net, remaining))
    return order


def _cyclic_nodes(net: Network, remaining: list[str]) -> set[str]:
    # Nodes of the leftover subgraph that sit on a directed cycle: iteratively
    # strip nodes with no in- or out-edges inside the subgraph.
    members = set(remaining)
    changed = True
    while changed:
        changed = False
        for name in list(members):
            preds = [p for p in net.nodes[name].parents if p in members]
            succs = [c for c in net.children_of(name) if c in members]
            if not preds or not succs:
                members.discard(name)
                changed = True
    return members or set(remaining)


def d_separated(net: Network, xs: Iterable[str], ys: Iterable[str], given: Iterable[str]) -> bool:
    """True when every path between ``xs`` and ``ys`` is blocked by ``given``
    (moralized-ancestral-graph criterion)."""
    xs, ys, given = set(xs), set(ys), set(given)
    relevant = xs | ys | given
    keep = relevant | net.ancestors_of(relevant)
    adj: dict[str, set[str]] = {n: set() for n in keep}
    for name in keep:
        parents = [p for p in net.nodes[name].parents if p in keep]
        for p in parents:
            adj[name].add(p)
            adj[p].add(name)
        for a in parents:  # moralize: marry co-parents
            for b in parents:
                if a != b:
                    adj[a].add(b)
    for g in given:  # conditioning removes the node entirely
        for other in adj.pop(g, ()):  # pragma: no branch
            adj.get(other, set()).discard(g)
    seen = set()
    stack = [x for x in xs if x in adj]
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        if cur in ys:
            return False
        seen.add(cur)
        stack.extend(adj.get(cur, ()))
    return True


def expand_deterministic_max(parents: list[VariableSpec], child: VariableSpec) -> Cpt:
    """CPT putting probability 1 on the child level equal to the maximum
    parent level index. All variables must share one ordered level set."""
    for spec in parents:
        if spec.levels != child.levels:
            raise NetworkError(
                f"max rule: parent {spec.name!r} levels differ from child "
                f"{child.name!r}"
            )
    cards = tuple(s.cardinality for s in parents)
    table = np.zeros(cards + (child.cardinality,))
    for assignment in np.ndindex(*cards) if cards else [()]:
        table[assignment + (max(assignment, default=0),)] = 1.0
    return Cpt(cards, table)


def check_evidence(net: Network, evidence: Evidence) -> None:
    """Raise NetworkError unless every assignment names a real variable level
    and no utility node is assigned."""
    for var, level in evidence.items():
        node = net.node(var)
        if node.kind == "utility":
            raise NetworkError(f"utility node {var!r} cannot be observed")
        assert node.variable is not None
        node.variable.level_index(level)


def _prod(values: Iterable[int]) -> int:
    return int(math.prod(values))
