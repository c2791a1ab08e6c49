"""Command-line front end.

Subcommands: ``validate``, ``expand``, ``infer``, ``decide``, ``sense``,
``scenario``, ``serve``. Text mode prints probabilities with 4 decimal
places; ``--format json`` emits the same numbers at full precision on
stdout. Parse and validation diagnostics go to stderr. Exit codes: 0 on
success, 1 on validation/assertion/engine failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import netlang
from .decision import recommend
from .inference import InferenceError, Query, posterior, prob_of_evidence
from .model import Evidence, Network, NetworkError
from .sensitivity import (
    ChainPathError,
    CptCell,
    Event,
    cpt_parameter_sweep,
    sensitivity_range,
)


class _Failure(Exception):
    """Engine or input failure: message to stderr, exit 1."""


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except _Failure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (NetworkError, InferenceError, ChainPathError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


def run(argv: Optional[Sequence[str]] = None) -> None:
    raise SystemExit(main(argv))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefnet",
        description="Belief-network diagnosis engine: validation, CPT "
        "expansion, inference, decisions, sensitivity, scenarios, service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, handler):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("network", help="network file (.bn)")
        p.add_argument(
            "--format", choices=("text", "json"), default="text",
            help="output format (default: text)",
        )
        p.set_defaults(handler=handler)
        return p

    add("validate", "check a network file, printing diagnostics", _cmd_validate)

    p = add("expand", "print the compiled CPT of one node", _cmd_expand)
    p.add_argument("--node", required=True, help="node name")

    p = add("infer", "print posterior marginals for target variables", _cmd_infer)
    p.add_argument(
        "--target", action="append", required=True, metavar="VAR",
        help="target variable (repeatable)",
    )
    p.add_argument("--evidence", help="evidence file (.ev)")

    p = add("decide", "print expected utilities and the recommendation", _cmd_decide)
    p.add_argument("--evidence", help="evidence file (.ev)")

    p = add("sense", "sensitivity of a target event to assessments", _cmd_sense)
    p.add_argument("--target", required=True, metavar="VAR=LEVEL",
                   help="target event, e.g. Phytophthora=beyond-recovery "
                        "(levels may be joined with '|')")
    p.add_argument("--pivot", metavar="VAR=LEVEL",
                   help="pivot event for a single-link sensitivity range")
    p.add_argument("--chain", nargs="+", metavar="VAR=LEVEL",
                   help="chain of events ending at the target")
    p.add_argument("--sweep", metavar="NODE/ROW/COL",
                   help="CPT cell to sweep: node name, row index, column index")
    p.add_argument("--grid", metavar="A:B:N",
                   help="sweep grid: N points from A to B (default 0:1:11)")
    p.add_argument("--evidence", help="evidence file (.ev)")

    p = add("scenario", "run a scenario assertion suite", _cmd_scenario)
    p.add_argument("suite", help="scenario suite file (.toml)")

    p = add("serve", "start the HTTP session service", _cmd_serve)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Failure(f"cannot read {path}: {exc.strerror or exc}")


def _load_network(path: str) -> Network:
    result = netlang.parse_network(_read(path), file=path)
    for diag in result.diagnostics:
        print(diag, file=sys.stderr)
    if result.network is None:
        raise _Failure(f"{path}: network has errors")
    return result.network


def _load_evidence(path: Optional[str], net: Network) -> Evidence:
    if path is None:
        return Evidence({})
    result = netlang.parse_evidence(_read(path), net, file=path)
    for diag in result.diagnostics:
        print(diag, file=sys.stderr)
    if result.evidence is None:
        raise _Failure(f"{path}: evidence has errors")
    return result.evidence


def _parse_event(text: str, net: Network, parser, flag: str) -> Event:
    var, sep, levels = text.partition("=")
    if not sep or not var or not levels:
        parser.error(f"{flag} must look like VAR=LEVEL, got {text!r}")
    try:
        node = net.node(var)
    except NetworkError:
        parser.error(f"{flag}: unknown variable {var!r}")
    if node.variable is None:
        parser.error(f"{flag}: {var!r} has no observable levels")
    parts = tuple(levels.split("|"))
    for level in parts:
        if level not in node.variable.levels:
            parser.error(f"{flag}: variable {var!r} has no level {level!r}")
    return Event(var, parts)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _evidence_dict(evidence: Evidence) -> dict[str, str]:
    return dict(evidence.items())


def _describe_evidence(evidence: Evidence) -> str:
    return ", ".join(f"{v} = {l}" for v, l in evidence.items())


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args, parser) -> int:
    result = netlang.parse_network(_read(args.network), file=args.network)
    if args.format == "json":
        _emit_json(
            {
                "ok": result.network is not None,
                "diagnostics": [
                    {
                        "severity": d.severity,
                        "message": d.message,
                        "file": d.span.file,
                        "line": d.span.line,
                        "column": d.span.column,
                        "length": d.span.length,
                        "hint": d.hint,
                    }
                    for d in result.diagnostics
                ],
            }
        )
    else:
        for diag in result.diagnostics:
            print(diag, file=sys.stderr)
        print("ok" if result.network is not None else "invalid")
    return 0 if result.network is not None else 1


def _cmd_expand(args, parser) -> int:
    net = _load_network(args.network)
    try:
        node = net.node(args.node)
    except NetworkError:
        parser.error(f"--node: unknown node {args.node!r}")
    if node.kind not in ("chance", "deterministic") or node.variable is None:
        raise _Failure(f"node {args.node!r} has no conditional probability table")
    cpt = net.compiled_cpt(args.node)
    parent_levels = [net.variable(p).levels for p in node.parents]
    assignments = _odometer(parent_levels)
    rows = cpt.rows()
    if args.format == "json":
        _emit_json(
            {
                "node": node.name,
                "parents": list(node.parents),
                "child_levels": list(node.variable.levels),
                "rows": [
                    {
                        "assignment": dict(zip(node.parents, combo)),
                        "probabilities": [float(v) for v in row],
                    }
                    for combo, row in zip(assignments, rows)
                ],
            }
        )
    else:
        header = " ".join(node.parents) if node.parents else "(no parents)"
        print(f"P({node.name} | {header})" if node.parents else f"P({node.name})")
        print(f"{header} | {' '.join(node.variable.levels)}")
        for combo, row in zip(assignments, rows):
            label = " ".join(combo) if combo else "-"
            print(f"{label} | {' '.join(f'{v:.4f}' for v in row)}")
    return 0


def _odometer(level_lists: Sequence[Sequence[str]]) -> list[tuple[str, ...]]:
    combos: list[tuple[str, ...]] = [()]
    for levels in level_lists:
        combos = [c + (l,) for c in combos for l in levels]
    return combos


def _cmd_infer(args, parser) -> int:
    net = _load_network(args.network)
    evidence = _load_evidence(args.evidence, net)
    targets = list(dict.fromkeys(args.target))
    for var in targets:
        try:
            node = net.node(var)
        except NetworkError:
            parser.error(f"--target: unknown variable {var!r}")
        if node.variable is None:
            parser.error(f"--target: {var!r} has no distribution")
    marginals = {}
    for var in targets:
        post = posterior(net, Query((var,), evidence))
        marginals[var] = post.marginal(var)
    p_e = prob_of_evidence(net, evidence)
    if args.format == "json":
        _emit_json(
            {
                "evidence": _evidence_dict(evidence),
                "posteriors": marginals,
                "prob_of_evidence": p_e,
            }
        )
    else:
        given = _describe_evidence(evidence)
        for var in targets:
            print(f"P({var} | {given})" if given else f"P({var})")
            for level, p in marginals[var].items():
                print(f"  {level} {p:.4f}")
        if len(evidence) > 0:
            print(f"P(evidence) = {p_e:.4f}")
    return 0


def _cmd_decide(args, parser) -> int:
    net = _load_network(args.network)
    evidence = _load_evidence(args.evidence, net)
    rec = recommend(net, evidence)
    decision = net.decision_nodes()[0]
    if args.format == "json":
        _emit_json(
            {
                "evidence": _evidence_dict(evidence),
                "decision": decision,
                "expected_utilities": rec.expected_utilities,
                "recommended": rec.recommended,
                "tie": rec.tie,
            }
        )
    else:
        for alt, eu in rec.expected_utilities.items():
            print(f"EU({decision} = {alt}) = {eu:.4f}")
        print(f"recommendation: {rec.recommended}")
        if rec.tie:
            print("note: tie within tolerance")
    return 0


def _cmd_sense(args, parser) -> int:
    net = _load_network(args.network)
    evidence = _load_evidence(args.evidence, net)
    modes = [m for m in (args.pivot, args.chain, args.sweep) if m]
    if len(modes) != 1:
        parser.error("give exactly one of --pivot, --chain, --sweep")
    target = _parse_event(args.target, net, parser, "--target")

    if args.pivot:
        pivot = _parse_event(args.pivot, net, parser, "--pivot")
        link = sensitivity_range(net, target, pivot, evidence)
        if args.format == "json":
            _emit_json(
                {
                    "mode": "range",
                    "target": str(target),
                    "pivot": str(pivot),
                    "value": link.value,
                    "premise_ok": link.premise_ok,
                }
            )
        else:
            print(f"SR({target}; {pivot}) = {link.value:.4f}")
            print(
                "premise: "
                + (
                    "holds (bounds the posterior swing)"
                    if link.premise_ok
                    else "does not hold (pivot's causes reach the target "
                    "another way; treat as an approximation)"
                )
            )
        return 0

    if args.chain:
        events = [_parse_event(e, net, parser, "--chain") for e in args.chain]
        chain = events + [target]
        links = []
        value = 1.0
        for a, b in zip(chain, chain[1:]):
            if a.var not in net.node(b.var).parents:
                raise _Failure(f"{a.var!r} is not a parent of {b.var!r}")
            link = sensitivity_range(net, b, a, evidence)
            links.append((a, b, link.value))
            value *= link.value
        if args.format == "json":
            _emit_json(
                {
                    "mode": "chain",
                    "links": [
                        {"pivot": str(a), "target": str(b), "value": v}
                        for a, b, v in links
                    ],
                    "value": value,
                }
            )
        else:
            for a, b, v in links:
                print(f"link SR({b}; {a}) = {v:.4f}")
            print(f"chain sensitivity = {value:.4f}")
        return 0

    parts = args.sweep.split("/")
    if len(parts) != 3:
        parser.error("--sweep must look like NODE/ROW/COL")
    try:
        cell = CptCell(parts[0], int(parts[1]), int(parts[2]))
    except ValueError:
        parser.error("--sweep row and column must be integers")
    grid_spec = args.grid or "0:1:11"
    try:
        a, b, n = grid_spec.split(":")
        grid = [float(v) for v in np.linspace(float(a), float(b), int(n))]
    except ValueError:
        parser.error("--grid must look like A:B:N")
    trace = cpt_parameter_sweep(net, target, evidence, cell, grid)
    if args.format == "json":
        _emit_json(
            {
                "mode": "sweep",
                "cell": {"node": cell.node, "row": cell.row, "col": cell.col},
                "target": str(target),
                "points": [
                    {
                        "cell_value": pt.cell_value,
                        "posterior": pt.posterior,
                        "expected_utilities": pt.expected_utilities,
                        "recommended": pt.recommended,
                    }
                    for pt in trace.points
                ],
                "crossings": [list(c) for c in trace.crossings],
            }
        )
    else:
        print(f"sweep {cell.node} row {cell.row} col {cell.col}")
        for pt in trace.points:
            line = f"  cell {pt.cell_value:.4f}  P({target}) = {pt.posterior:.4f}"
            if pt.recommended is not None:
                line += f"  recommend {pt.recommended}"
            print(line)
        if trace.crossings:
            for lo, hi in trace.crossings:
                print(
                    f"decision threshold between {lo:.4f} and {hi:.4f}"
                )
        else:
            print("no decision-threshold crossings")
    return 0


# ---------------------------------------------------------------------------
# scenario suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PosteriorAssertion:
    variable: str
    level: str
    value: float
    tolerance: float


@dataclass(frozen=True)
class Scenario:
    name: str
    evidence_path: str
    assertions: tuple[PosteriorAssertion, ...]
    recommendation: Optional[str]


@dataclass(frozen=True)
class ScenarioSuite:
    scenarios: tuple[Scenario, ...]

    @classmethod
    def load(cls, path: str) -> "ScenarioSuite":
        try:
            data = tomllib.loads(_read(path))
        except tomllib.TOMLDecodeError as exc:
            raise _Failure(f"{path}: {exc}")
        base = Path(path).parent
        default_tol = float(data.get("tolerance", 1e-3))
        scenarios = []
        for i, entry in enumerate(data.get("scenario", [])):
            name = entry.get("name")
            if not name:
                raise _Failure(f"{path}: scenario #{i + 1} has no name")
            evidence = entry.get("evidence")
            if not evidence:
                raise _Failure(f"{path}: scenario {name!r} has no evidence file")
            tol = float(entry.get("tolerance", default_tol))
            assertions = []
            for check in entry.get("assert", []):
                try:
                    assertions.append(
                        PosteriorAssertion(
                            variable=check["variable"],
                            level=check["level"],
                            value=float(check["value"]),
                            tolerance=float(check.get("tolerance", tol)),
                        )
                    )
                except KeyError as exc:
                    raise _Failure(
                        f"{path}: scenario {name!r} assertion missing {exc}"
                    )
            scenarios.append(
                Scenario(
                    name=name,
                    evidence_path=str(base / evidence),
                    assertions=tuple(assertions),
                    recommendation=entry.get("recommendation"),
                )
            )
        if not scenarios:
            raise _Failure(f"{path}: suite has no scenarios")
        return cls(tuple(scenarios))

    def check_against(self, net: Network) -> None:
        """Suite invariant: every referenced variable and level exists."""
        for sc in self.scenarios:
            for check in sc.assertions:
                try:
                    node = net.node(check.variable)
                except NetworkError:
                    raise _Failure(
                        f"scenario {sc.name!r}: unknown variable "
                        f"{check.variable!r}"
                    )
                if node.variable is None or check.level not in node.variable.levels:
                    raise _Failure(
                        f"scenario {sc.name!r}: variable {check.variable!r} "
                        f"has no level {check.level!r}"
                    )
            if sc.recommendation is not None:
                decisions = net.decision_nodes()
                if not decisions:
                    raise _Failure(
                        f"scenario {sc.name!r} expects a recommendation but "
                        "the network has no decision node"
                    )
                alt_levels = net.variable(decisions[0]).levels
                if sc.recommendation not in alt_levels:
                    raise _Failure(
                        f"scenario {sc.name!r}: no alternative "
                        f"{sc.recommendation!r}"
                    )


def _cmd_scenario(args, parser) -> int:
    net = _load_network(args.network)
    suite = ScenarioSuite.load(args.suite)
    suite.check_against(net)
    results = []
    for sc in suite.scenarios:
        evidence = _load_evidence(sc.evidence_path, net)
        checks = []
        for check in sc.assertions:
            got = posterior(net, Query((check.variable,), evidence)).marginal(
                check.variable
            )[check.level]
            checks.append(
                {
                    "kind": "posterior",
                    "variable": check.variable,
                    "level": check.level,
                    "got": got,
                    "want": check.value,
                    "tolerance": check.tolerance,
                    "passed": abs(got - check.value) <= check.tolerance,
                }
            )
        if sc.recommendation is not None:
            rec = recommend(net, evidence)
            checks.append(
                {
                    "kind": "recommendation",
                    "got": rec.recommended,
                    "want": sc.recommendation,
                    "passed": rec.recommended == sc.recommendation,
                }
            )
        results.append(
            {"name": sc.name, "passed": all(c["passed"] for c in checks),
             "checks": checks}
        )
    all_passed = all(r["passed"] for r in results)
    if args.format == "json":
        _emit_json({"passed": all_passed, "scenarios": results})
    else:
        for r in results:
            print(("PASS " if r["passed"] else "FAIL ") + r["name"])
            if not r["passed"]:
                for c in r["checks"]:
                    if c["passed"]:
                        continue
                    if c["kind"] == "posterior":
                        print(
                            f"  {c['variable']}={c['level']}: got "
                            f"{c['got']:.6f}, want {c['want']:.6f} "
                            f"± {c['tolerance']:g}"
                        )
                    else:
                        print(
                            f"  recommendation: got {c['got']!r}, "
                            f"want {c['want']!r}"
                        )
        n_pass = sum(1 for r in results if r["passed"])
        print(f"{len(results)} scenarios, {n_pass} passed, "
              f"{len(results) - n_pass} failed")
    return 0 if all_passed else 1


def _cmd_serve(args, parser) -> int:
    import uvicorn

    from .service import create_app

    net_source = _read(args.network)
    app = create_app(preload={"source": net_source, "file": args.network})
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
