"""Parser and serializer for the network-description language.

Line-oriented blocks, hand-writable and diff-friendly:

    variable WaterStress { levels none recoverable beyond-recovery }
    node WaterStress {
      kind chance
      parents RecentRain
      cpd table {
        row 0.9 0.1 0
        row 0.5 0.3 0.2
      }
    }

CPDs: ``table`` (one row per parent assignment, odometer order over parents as
declared, last parent fastest), ``noisy_or`` (canonical gates; entries are
``Cause p`` for binary causes or ``Cause:level d0 d1 ...`` for graded ones,
plus optional ``leak`` and ``mode mechanism``), ``max``, and ``utility``
(rows over all-but-last parent, columns over the last parent's levels).
``#`` starts a comment; newline or ``;`` separates items. Evidence files hold
one ``Variable = level`` per line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import canonical
from .model import (
    Cpt,
    DeterministicRule,
    Evidence,
    Network,
    NetworkError,
    Node,
    UtilityTable,
    VariableSpec,
    validate,
)

_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_NUMBER = re.compile(r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_PUNCT = "{};:="


@dataclass(frozen=True)
class SourceSpan:
    """1-based location of a token or construct in the source text."""

    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning" | "lint"
    message: str
    span: SourceSpan
    hint: Optional[str] = None

    def __str__(self) -> str:
        text = f"{self.span}: {self.severity}: {self.message}"
        if self.hint:
            text += f" ({self.hint})"
        return text


@dataclass
class ParseResult:
    network: Optional[Network]
    diagnostics: list[ParseDiagnostic]

    @property
    def ok(self) -> bool:
        return self.network is not None

    @property
    def errors(self) -> list[ParseDiagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


@dataclass
class EvidenceResult:
    evidence: Optional[Evidence]
    diagnostics: list[ParseDiagnostic]

    @property
    def ok(self) -> bool:
        return self.evidence is not None


@dataclass(frozen=True)
class _Token:
    kind: str  # word | number | punct | newline | eof
    text: str
    line: int
    column: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.column, max(len(self.text), 1))


def _tokenize(text: str, file: str, diagnostics: list[ParseDiagnostic]) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        col = 0
        while col < len(line):
            ch = line[col]
            if ch == "#":
                break
            if ch.isspace():
                col += 1
                continue
            if ch in _PUNCT:
                tokens.append(_Token("punct", ch, lineno, col + 1))
                col += 1
                continue
            m = _WORD.match(line, col)
            if m:
                tokens.append(_Token("word", m.group(), lineno, col + 1))
                col = m.end()
                continue
            m = _NUMBER.match(line, col)
            if m:
                tokens.append(_Token("number", m.group(), lineno, col + 1))
                col = m.end()
                continue
            diagnostics.append(
                ParseDiagnostic(
                    "error",
                    f"unexpected character {ch!r}",
                    SourceSpan(file, lineno, col + 1, 1),
                )
            )
            col += 1
        tokens.append(_Token("newline", "", lineno, len(line) + 1))
    tokens.append(_Token("eof", "", text.count("\n") + 1, 1))
    return tokens


# Raw (pre-semantic) parse tree -------------------------------------------

@dataclass
class _NoisyEntry:
    kind: str  # "leak" | "cause" | "mode"
    name: Optional[str]
    level: Optional[str]
    values: list[float]
    mode: Optional[str]
    span: SourceSpan


@dataclass
class _RawCpd:
    form: str  # table | noisy | max | utility
    rows: list[tuple[SourceSpan, list[float]]] = field(default_factory=list)
    entries: list[_NoisyEntry] = field(default_factory=list)
    span: Optional[SourceSpan] = None


@dataclass
class _RawNode:
    name: str
    span: SourceSpan
    kind: Optional[str] = None
    kind_span: Optional[SourceSpan] = None
    parents: list[tuple[str, SourceSpan]] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    cpd: Optional[_RawCpd] = None


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.diagnostics: list[ParseDiagnostic] = []
        self.tokens = _tokenize(text, file, self.diagnostics)
        self.pos = 0
        self.variables: dict[str, tuple[VariableSpec, SourceSpan]] = {}
        self.raw_nodes: list[_RawNode] = []

    # token helpers

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def skip_separators(self) -> None:
        while self.peek().kind == "newline" or (
            self.peek().kind == "punct" and self.peek().text == ";"
        ):
            self.advance()

    def error(self, message: str, tok: Optional[_Token] = None, hint: Optional[str] = None):
        tok = tok or self.peek()
        self.diagnostics.append(
            ParseDiagnostic("error", message, tok.span(self.file), hint)
        )

    def expect_punct(self, ch: str) -> bool:
        if self.peek().kind == "punct" and self.peek().text == ch:
            self.advance()
            return True
        self.error(f"expected {ch!r}")
        return False

    def expect_word(self) -> Optional[_Token]:
        if self.peek().kind == "word":
            return self.advance()
        self.error("expected a name")
        return None

    def skip_block(self) -> None:
        """Resync after an error: skip to the matching close brace."""
        depth = 0
        while self.peek().kind != "eof":
            tok = self.advance()
            if tok.kind == "punct" and tok.text == "{":
                depth += 1
            elif tok.kind == "punct" and tok.text == "}":
                if depth <= 1:
                    return
                depth -= 1

    def words_until_break(self) -> list[_Token]:
        out = []
        while self.peek().kind == "word":
            out.append(self.advance())
        return out

    def numbers_until_break(self) -> list[tuple[float, _Token]]:
        out = []
        while self.peek().kind == "number":
            tok = self.advance()
            out.append((float(tok.text), tok))
        return out

    # grammar

    def parse(self) -> None:
        while True:
            self.skip_separators()
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "word" and tok.text == "variable":
                self.advance()
                self.parse_variable(tok)
            elif tok.kind == "word" and tok.text == "node":
                self.advance()
                self.parse_node(tok)
            else:
                self.error(
                    f"expected 'variable' or 'node', got {tok.text or tok.kind!r}"
                )
                self.advance()

    def parse_variable(self, kw: _Token) -> None:
        name = self.expect_word()
        if name is None or not self.expect_punct("{"):
            self.skip_block()
            return
        levels: list[str] = []
        while True:
            self.skip_separators()
            tok = self.peek()
            if tok.kind == "punct" and tok.text == "}":
                self.advance()
                break
            if tok.kind == "eof":
                self.error("unterminated variable block", tok)
                break
            if tok.kind == "word" and tok.text == "levels":
                self.advance()
                levels = [t.text for t in self.words_until_break()]
                if not levels:
                    self.error("'levels' needs at least two level names")
            else:
                self.error(f"unexpected {tok.text!r} in variable block")
                self.advance()
        if name.text in self.variables:
            self.error(f"variable {name.text!r} declared twice", name)
            return
        if len(levels) < 2:
            self.error(f"variable {name.text!r} needs at least 2 levels", name)
            return
        if len(set(levels)) != len(levels):
            self.error(f"variable {name.text!r} has duplicate levels", name)
            return
        self.variables[name.text] = (
            VariableSpec(name.text, tuple(levels)),
            name.span(self.file),
        )

    def parse_node(self, kw: _Token) -> None:
        name = self.expect_word()
        if name is None or not self.expect_punct("{"):
            self.skip_block()
            return
        raw = _RawNode(name.text, name.span(self.file))
        while True:
            self.skip_separators()
            tok = self.peek()
            if tok.kind == "punct" and tok.text == "}":
                self.advance()
                break
            if tok.kind == "eof":
                self.error("unterminated node block", tok)
                break
            if tok.kind != "word":
                self.error(f"unexpected {tok.text!r} in node block")
                self.advance()
                continue
            if tok.text == "kind":
                self.advance()
                kind = self.expect_word()
                if kind is not None:
                    raw.kind = kind.text
                    raw.kind_span = kind.span(self.file)
            elif tok.text == "parents":
                self.advance()
                raw.parents = [
                    (t.text, t.span(self.file)) for t in self.words_until_break()
                ]
                if not raw.parents:
                    self.error("'parents' needs at least one name", tok)
            elif tok.text == "tag":
                self.advance()
                tags = self.words_until_break()
                if not tags:
                    self.error("'tag' needs at least one word", tok)
                raw.tags.extend(t.text for t in tags)
            elif tok.text == "cpd":
                self.advance()
                raw.cpd = self.parse_cpd()
            else:
                self.error(f"unexpected {tok.text!r} in node block")
                self.advance()
        self.raw_nodes.append(raw)

    def parse_cpd(self) -> Optional[_RawCpd]:
        tok = self.peek()
        if tok.kind != "word":
            self.error("expected a CPD form (table, noisy_or, max, utility)")
            return None
        self.advance()
        span = tok.span(self.file)
        if tok.text == "max":
            return _RawCpd("max", span=span)
        if tok.text in ("table", "utility"):
            form = tok.text
            if not self.expect_punct("{"):
                return None
            rows: list[tuple[SourceSpan, list[float]]] = []
            while True:
                self.skip_separators()
                t = self.peek()
                if t.kind == "punct" and t.text == "}":
                    self.advance()
                    break
                if t.kind == "eof":
                    self.error("unterminated block", t)
                    break
                if t.kind == "word" and t.text == "row":
                    self.advance()
                    numbers = self.numbers_until_break()
                    if not numbers:
                        self.error("'row' needs at least one number", t)
                    rows.append((t.span(self.file), [v for v, _ in numbers]))
                else:
                    self.error(f"expected 'row', got {t.text!r}")
                    self.advance()
            return _RawCpd(form, rows=rows, span=span)
        if tok.text == "noisy_or":
            if not self.expect_punct("{"):
                return None
            entries: list[_NoisyEntry] = []
            while True:
                self.skip_separators()
                t = self.peek()
                if t.kind == "punct" and t.text == "}":
                    self.advance()
                    break
                if t.kind == "eof":
                    self.error("unterminated noisy_or block", t)
                    break
                if t.kind != "word":
                    self.error(f"unexpected {t.text!r} in noisy_or block")
                    self.advance()
                    continue
                self.advance()
                if t.text == "mode":
                    mode = self.expect_word()
                    entries.append(
                        _NoisyEntry(
                            "mode", None, None, [],
                            mode.text if mode else None, t.span(self.file),
                        )
                    )
                    continue
                level = None
                if self.peek().kind == "punct" and self.peek().text == ":":
                    self.advance()
                    level_tok = self.expect_word()
                    level = level_tok.text if level_tok else None
                numbers = self.numbers_until_break()
                if not numbers:
                    self.error(f"{t.text!r} needs at least one number", t)
                    continue
                kind = "leak" if t.text == "leak" and level is None else "cause"
                entries.append(
                    _NoisyEntry(
                        kind,
                        None if kind == "leak" else t.text,
                        level,
                        [v for v, _ in numbers],
                        None,
                        t.span(self.file),
                    )
                )
            return _RawCpd("noisy", entries=entries, span=span)
        self.error(f"unknown CPD form {tok.text!r}", tok)
        return None


def parse_network(text: str, file: str = "<input>") -> ParseResult:
    """Parse and validate a network description. The returned network is only
    present when there are no error diagnostics; warnings and lints
    (including palette hints) never block."""
    parser = _Parser(text, file)
    parser.parse()
    diagnostics = parser.diagnostics

    def err(message: str, span: SourceSpan, hint: Optional[str] = None):
        diagnostics.append(ParseDiagnostic("error", message, span, hint))

    node_spans: dict[str, SourceSpan] = {}
    nodes: list[Node] = []
    seen: set[str] = set()
    used_variables: set[str] = set()
    for raw in parser.raw_nodes:
        if raw.name in seen:
            err(f"node {raw.name!r} declared twice", raw.span)
            continue
        seen.add(raw.name)
        node_spans[raw.name] = raw.span
        kind = raw.kind
        if kind is None:
            err(f"node {raw.name!r} has no kind", raw.span)
            continue
        if kind not in ("chance", "deterministic", "decision", "utility"):
            err(f"unknown kind {kind!r}", raw.kind_span or raw.span)
            continue
        variable = None
        if kind != "utility":
            if raw.name not in parser.variables:
                err(
                    f"node {raw.name!r} has no variable declaration",
                    raw.span,
                    hint=f"add: variable {raw.name} {{ levels ... }}",
                )
                continue
            variable = parser.variables[raw.name][0]
            used_variables.add(raw.name)
        parent_specs: list[Optional[VariableSpec]] = []
        parents_ok = True
        for pname, pspan in raw.parents:
            if pname in parser.variables:
                parent_specs.append(parser.variables[pname][0])
                used_variables.add(pname)
            else:
                err(f"unknown parent {pname!r}", pspan)
                parent_specs.append(None)
                parents_ok = False
        cpd = None
        if raw.cpd is not None and parents_ok:
            cpd = _build_cpd(raw, variable, [s for s in parent_specs if s], err)
        elif raw.cpd is not None:
            cpd = None  # parent errors already reported
        try:
            nodes.append(
                Node(
                    name=raw.name,
                    kind=kind,
                    variable=variable,
                    parents=tuple(p for p, _ in raw.parents),
                    cpd=cpd,
                    tags=frozenset(raw.tags),
                )
            )
        except NetworkError as exc:
            err(str(exc), raw.span)

    for vname, (_, vspan) in parser.variables.items():
        if vname not in used_variables:
            diagnostics.append(
                ParseDiagnostic(
                    "warning", f"variable {vname!r} is never used", vspan
                )
            )

    network: Optional[Network] = None
    if not any(d.severity == "error" for d in diagnostics):
        try:
            network = Network(nodes)
        except NetworkError as exc:
            err(str(exc), SourceSpan(file, 1, 1, 1))
    if network is not None:
        anchor = SourceSpan(file, 1, 1, 1)
        for issue in validate(network):
            span = node_spans.get(issue.node or "", anchor)
            diagnostics.append(
                ParseDiagnostic(issue.severity, issue.message, span)
            )
        if any(d.severity == "error" for d in diagnostics):
            network = None
    return ParseResult(network, diagnostics)


def _build_cpd(raw, variable, parent_specs, err):
    """Turn a raw CPD block into a model CPD object, or None on error."""
    assert raw.cpd is not None
    cpd = raw.cpd
    span = cpd.span or raw.span
    cards = tuple(s.cardinality for s in parent_specs)
    n_rows = 1
    for c in cards:
        n_rows *= c

    if cpd.form == "max":
        return DeterministicRule("max")

    if cpd.form == "table":
        if variable is None:
            err("table CPD on a node without a variable", span)
            return None
        if len(cpd.rows) != n_rows:
            err(
                f"expected {n_rows} rows (one per parent assignment), got "
                f"{len(cpd.rows)}",
                span,
            )
            return None
        ok = True
        for rspan, values in cpd.rows:
            if len(values) != variable.cardinality:
                err(
                    f"row has {len(values)} entries, variable has "
                    f"{variable.cardinality} levels",
                    rspan,
                )
                ok = False
        if not ok:
            return None
        return Cpt.from_rows(cards, [values for _, values in cpd.rows])

    if cpd.form == "utility":
        head_rows = n_rows // cards[-1] if cards else 1
        width = cards[-1] if cards else 1
        if len(cpd.rows) != head_rows:
            err(f"expected {head_rows} utility rows, got {len(cpd.rows)}", span)
            return None
        flat: list[float] = []
        ok = True
        for rspan, values in cpd.rows:
            if len(values) != width:
                err(f"utility row has {len(values)} values, expected {width}", rspan)
                ok = False
            flat.extend(values)
        if not ok:
            return None
        return UtilityTable(cards, np.array(flat))

    if cpd.form == "noisy":
        return _build_noisy(cpd, variable, parent_specs, err, span)
    err(f"unsupported CPD form {cpd.form!r}", span)
    return None


def _build_noisy(cpd, variable, parent_specs, err, span):
    if variable is None:
        err("noisy_or CPD on a node without a variable", span)
        return None
    mode = None
    leak_entry = None
    cause_entries = []
    for entry in cpd.entries:
        if entry.kind == "mode":
            if entry.mode not in ("marginal", "mechanism"):
                err("mode must be 'marginal' or 'mechanism'", entry.span)
            elif mode is not None:
                err("mode given twice", entry.span)
            else:
                mode = entry.mode
        elif entry.kind == "leak":
            if leak_entry is not None:
                err("leak given twice", entry.span)
            else:
                leak_entry = entry
        else:
            cause_entries.append(entry)

    parent_names = [s.name for s in parent_specs]
    by_parent: dict[str, list] = {}
    ok = True
    for entry in cause_entries:
        if entry.name not in parent_names:
            err(f"{entry.name!r} is not a parent of this node", entry.span)
            ok = False
            continue
        by_parent.setdefault(entry.name, []).append(entry)
    if not ok:
        return None

    simple = (
        variable.cardinality == 2
        and all(s.cardinality == 2 for s in parent_specs)
        and all(e.level is None and len(e.values) == 1 for e in cause_entries)
        and (leak_entry is None or len(leak_entry.values) == 1)
    )
    if simple:
        causes = []
        for s in parent_specs:
            entries = by_parent.get(s.name, [])
            if len(entries) != 1:
                err(
                    f"cause {s.name!r} needs exactly one sufficiency entry",
                    span,
                )
                return None
            causes.append((s.name, entries[0].values[0]))
        leak = leak_entry.values[0] if leak_entry else 0.0
        try:
            return canonical.NoisyOrSpec(
                tuple(causes), leak, marginals_include_leak=(mode != "mechanism")
            )
        except canonical.ParameterError as exc:
            err(str(exc), span)
            return None

    # graded form
    if mode is not None:
        err("mode applies only to the binary noisy_or form", span)
        return None
    child_card = variable.cardinality
    causes = []
    for s in parent_specs:
        dists: dict[int, tuple[float, ...]] = {}
        for entry in by_parent.get(s.name, []):
            if entry.level is None:
                if s.cardinality != 2:
                    err(
                        f"cause {s.name!r} has {s.cardinality} levels; name one "
                        "with Cause:level",
                        entry.span,
                    )
                    return None
                level_idx = 1
            else:
                try:
                    level_idx = s.level_index(entry.level)
                except NetworkError as exc:
                    err(str(exc), entry.span)
                    return None
                if level_idx == 0:
                    err(
                        f"level {entry.level!r} is the absent level; it cannot "
                        "carry a sufficiency distribution",
                        entry.span,
                    )
                    return None
            if level_idx in dists:
                err(
                    f"duplicate entry for {s.name}:{s.levels[level_idx]}",
                    entry.span,
                )
                return None
            dist = _as_distribution(entry.values, child_card, err, entry.span)
            if dist is None:
                return None
            dists[level_idx] = dist
        level_effects = []
        for level_idx in range(1, s.cardinality):
            if level_idx not in dists:
                err(
                    f"cause {s.name!r} is missing a distribution for level "
                    f"{s.levels[level_idx]!r}",
                    span,
                )
                return None
            level_effects.append(dists[level_idx])
        causes.append(canonical.MaxCause(s.name, tuple(level_effects)))
    leak = None
    if leak_entry is not None:
        leak = _as_distribution(leak_entry.values, child_card, err, leak_entry.span)
        if leak is None:
            return None
    try:
        return canonical.NoisyMaxSpec(child_card, tuple(causes), leak)
    except canonical.ParameterError as exc:
        err(str(exc), span)
        return None


def _as_distribution(values, child_card, err, span):
    if len(values) == 1 and child_card == 2:
        p = values[0]
        return (1.0 - p, p)
    if len(values) != child_card:
        err(
            f"distribution has {len(values)} entries for {child_card} child levels",
            span,
        )
        return None
    return tuple(values)


# ---------------------------------------------------------------------------
# Evidence files
# ---------------------------------------------------------------------------

def parse_evidence(text: str, net: Network, file: str = "<input>") -> EvidenceResult:
    """Parse ``Variable = level`` lines against a network."""
    diagnostics: list[ParseDiagnostic] = []
    tokens = _tokenize(text, file, diagnostics)
    assignments: dict[str, str] = {}
    pos = 0
    while tokens[pos].kind != "eof":
        tok = tokens[pos]
        if tok.kind == "newline" or (tok.kind == "punct" and tok.text == ";"):
            pos += 1
            continue
        if tok.kind != "word":
            diagnostics.append(
                ParseDiagnostic(
                    "error", f"expected a variable name, got {tok.text!r}",
                    tok.span(file),
                )
            )
            pos += 1
            continue
        var = tok
        pos += 1
        if not (tokens[pos].kind == "punct" and tokens[pos].text == "="):
            diagnostics.append(
                ParseDiagnostic("error", "expected '='", tokens[pos].span(file))
            )
            continue
        pos += 1
        if tokens[pos].kind != "word":
            diagnostics.append(
                ParseDiagnostic(
                    "error", "expected a level name", tokens[pos].span(file)
                )
            )
            continue
        level = tokens[pos]
        pos += 1

        if var.text not in net.nodes:
            diagnostics.append(
                ParseDiagnostic(
                    "error", f"unknown variable {var.text!r}", var.span(file)
                )
            )
            continue
        node = net.nodes[var.text]
        if node.kind == "utility" or node.variable is None:
            diagnostics.append(
                ParseDiagnostic(
                    "error", f"{var.text!r} cannot be observed", var.span(file)
                )
            )
            continue
        if level.text not in node.variable.levels:
            diagnostics.append(
                ParseDiagnostic(
                    "error",
                    f"variable {var.text!r} has no level {level.text!r}",
                    level.span(file),
                )
            )
            continue
        if var.text in assignments:
            diagnostics.append(
                ParseDiagnostic(
                    "error",
                    f"variable {var.text!r} assigned twice",
                    var.span(file),
                )
            )
            continue
        assignments[var.text] = level.text
    if any(d.severity == "error" for d in diagnostics):
        return EvidenceResult(None, diagnostics)
    return EvidenceResult(Evidence(assignments), diagnostics)


def serialize_evidence(evidence: Evidence) -> str:
    lines = [f"{var} = {level}" for var, level in evidence.items()]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

def serialize_network(net: Network) -> str:
    """Canonical text form; parsing it back reproduces the network
    structurally, with probabilities at full precision and canonical specs
    kept unexpanded."""
    out: list[str] = []
    for node in net.nodes.values():
        if node.variable is not None:
            levels = " ".join(node.variable.levels)
            out.append(f"variable {node.name} {{ levels {levels} }}")
    for node in net.nodes.values():
        out.append("")
        out.append(f"node {node.name} {{")
        out.append(f"  kind {node.kind}")
        if node.parents:
            out.append(f"  parents {' '.join(node.parents)}")
        for tag in sorted(node.tags):
            out.append(f"  tag {tag}")
        _serialize_cpd(net, node, out)
        out.append("}")
    return "\n".join(out) + "\n"


def _serialize_cpd(net: Network, node: Node, out: list[str]) -> None:
    cpd = node.cpd
    if cpd is None:
        return
    if isinstance(cpd, DeterministicRule):
        out.append("  cpd max")
    elif isinstance(cpd, Cpt):
        out.append("  cpd table {")
        for row in cpd.rows():
            out.append(f"    row {' '.join(_fmt(v) for v in row)}")
        out.append("  }")
    elif isinstance(cpd, UtilityTable):
        out.append("  cpd utility {")
        width = cpd.parent_cards[-1] if cpd.parent_cards else 1
        flat = cpd.values.reshape(-1, width)
        for row in flat:
            out.append(f"    row {' '.join(_fmt(v) for v in row)}")
        out.append("  }")
    elif isinstance(cpd, canonical.NoisyOrSpec):
        out.append("  cpd noisy_or {")
        if not cpd.marginals_include_leak:
            out.append("    mode mechanism")
        if cpd.leak != 0.0:
            out.append(f"    leak {_fmt(cpd.leak)}")
        for name, p in cpd.causes:
            out.append(f"    {name} {_fmt(p)}")
        out.append("  }")
    elif isinstance(cpd, canonical.NoisyMaxSpec):
        out.append("  cpd noisy_or {")
        if cpd.leak is not None:
            out.append(f"    leak {' '.join(_fmt(v) for v in cpd.leak)}")
        for cause in cpd.causes:
            spec = net.variable(cause.parent)
            for level_idx, dist in enumerate(cause.level_effects, start=1):
                level = spec.levels[level_idx]
                out.append(
                    f"    {cause.parent}:{level} {' '.join(_fmt(v) for v in dist)}"
                )
        out.append("  }")


def _fmt(value: float) -> str:
    value = float(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)
