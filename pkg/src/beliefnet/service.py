"""HTTP session service for interactive consultations.

Networks are uploaded (or preloaded at startup under the id ``default``) and
sessions hold a network reference plus mutable evidence behind a revision
counter. Every evidence mutation returns the full consultation summary:
posteriors for all ``tag diagnosis`` variables, per-alternative expected
utilities, and the evidence-probability conflict indicator. What-if queries
return the same payload shape for a hypothetical evidence set, without
mutating the session, plus per-indicant sensitivity rankings toward a
queried disorder. Sessions are in-memory only; ``GET /sessions/:id/export``
returns the evidence file for durability.

All probabilities are JSON numbers, never strings, and every numeric field
equals the command-line structured output for the same network and evidence.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import netlang
from .decision import expected_utility, recommend
from .inference import InferenceError, Query, posterior, prob_of_evidence
from .model import Evidence, Network
from .sensitivity import Event, sensitivity_range

# A joint observation is flagged as conflicting when it is less probable than
# its observations would be if they were independent (surprise ratio > 1).
_SURPRISE_EPS = 1e-9


class NetworkIn(BaseModel):
    source: str
    file: str = "<upload>"


class SessionIn(BaseModel):
    network_id: Optional[str] = None


class EvidenceIn(BaseModel):
    variable: str
    level: str


class WhatIfIn(BaseModel):
    assignments: dict[str, str] = {}
    target: Optional[str] = None


@dataclass
class _StoredNetwork:
    id: str
    network: Network
    source: str
    diagnostics: list


@dataclass
class _Session:
    id: str
    network_id: str
    evidence: Evidence
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(preload: Optional[dict] = None) -> FastAPI:
    """Build the service app. ``preload`` may carry ``source`` (and ``file``)
    for a network registered at startup under the id ``default``."""
    app = FastAPI(title="beliefnet service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    networks: dict[str, _StoredNetwork] = {}
    sessions: dict[str, _Session] = {}

    def _error(status: int, code: str, message: str, **extra):
        return JSONResponse(
            status_code=status,
            content={"error": code, "message": message, **extra},
        )

    def _diag_json(diagnostics) -> list[dict]:
        return [
            {
                "severity": d.severity,
                "message": d.message,
                "file": d.span.file,
                "line": d.span.line,
                "column": d.span.column,
                "length": d.span.length,
                "hint": d.hint,
            }
            for d in diagnostics
        ]

    def _register(source: str, file: str, net_id: str):
        result = netlang.parse_network(source, file=file)
        if result.network is None:
            return None, result.diagnostics
        stored = _StoredNetwork(
            net_id, result.network, source, result.diagnostics
        )
        networks[net_id] = stored
        return stored, result.diagnostics

    if preload is not None:
        stored, diags = _register(
            preload["source"], preload.get("file", "<preload>"), "default"
        )
        if stored is None:
            messages = "; ".join(str(d) for d in diags)
            raise ValueError(f"preloaded network has errors: {messages}")

    # -- catalog ----------------------------------------------------------

    def _catalog(stored: _StoredNetwork) -> dict:
        net = stored.network
        return {
            "id": stored.id,
            "nodes": [
                {
                    "name": node.name,
                    "kind": node.kind,
                    "levels": list(node.variable.levels)
                    if node.variable
                    else None,
                    "parents": list(node.parents),
                    "tags": sorted(node.tags),
                }
                for node in net.nodes.values()
            ],
            "diagnosis": net.tagged("diagnosis"),
            "decision": (net.decision_nodes() or [None])[0],
            "diagnostics": _diag_json(stored.diagnostics),
        }

    # -- consultation summary --------------------------------------------

    def _marginal(net: Network, var: str, evidence: Evidence) -> dict[str, float]:
        spec = net.variable(var)
        observed = evidence.get(var)
        if observed is not None:
            return {l: (1.0 if l == observed else 0.0) for l in spec.levels}
        post = posterior(net, Query((var,), evidence))
        return post.marginal(var)

    def _decision_block(net: Network, evidence: Evidence) -> dict:
        decisions = net.decision_nodes()
        if len(decisions) != 1 or net.utility_node() is None:
            return {
                "decision": decisions[0] if decisions else None,
                "expected_utilities": None,
                "recommended": None,
                "tie": None,
            }
        name = decisions[0]
        observed = evidence.get(name)
        if observed is not None:
            eu = expected_utility(net, evidence, {})
            return {
                "decision": name,
                "expected_utilities": {observed: eu},
                "recommended": None,
                "tie": None,
            }
        rec = recommend(net, evidence)
        return {
            "decision": name,
            "expected_utilities": rec.expected_utilities,
            "recommended": rec.recommended,
            "tie": rec.tie,
        }

    def _conflict_block(net: Network, evidence: Evidence) -> dict:
        p_e = prob_of_evidence(net, evidence)
        product = 1.0
        for var, level in evidence.items():
            product *= prob_of_evidence(net, Evidence({var: level}))
        surprise = product / p_e if p_e > 0 else float("inf")
        return {
            "prob_of_evidence": p_e,
            "conflict": {
                "surprise": surprise,
                "flagged": surprise > 1.0 + _SURPRISE_EPS,
            },
        }

    def _summary(session: _Session, evidence: Evidence, revision: int) -> dict:
        net = networks[session.network_id].network
        payload = {
            "session": session.id,
            "network": session.network_id,
            "revision": revision,
            "evidence": dict(evidence.items()),
            "posteriors": {
                var: _marginal(net, var, evidence)
                for var in net.tagged("diagnosis")
            },
        }
        payload.update(_conflict_block(net, evidence))
        payload.update(_decision_block(net, evidence))
        return payload

    # -- endpoints --------------------------------------------------------

    @app.post("/networks", status_code=201)
    def post_network(body: NetworkIn):
        net_id = uuid.uuid4().hex[:12]
        stored, diags = _register(body.source, body.file, net_id)
        if stored is None:
            return _error(
                422,
                "invalid_network",
                "network source has errors",
                diagnostics=_diag_json(diags),
            )
        return _catalog(stored)

    @app.get("/networks/{net_id}")
    def get_network(net_id: str):
        stored = networks.get(net_id)
        if stored is None:
            return _error(404, "unknown_network", f"no network {net_id!r}")
        return _catalog(stored)

    @app.post("/sessions", status_code=201)
    def post_session(body: SessionIn):
        net_id = body.network_id or "default"
        if net_id not in networks:
            return _error(404, "unknown_network", f"no network {net_id!r}")
        session = _Session(uuid.uuid4().hex[:12], net_id, Evidence({}))
        sessions[session.id] = session
        return _summary(session, session.evidence, session.revision)

    def _get_session(session_id: str) -> Optional[_Session]:
        return sessions.get(session_id)

    @app.get("/sessions/{session_id}/posteriors")
    def get_posteriors(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return _summary(session, session.evidence, session.revision)

    @app.get("/sessions/{session_id}/decision")
    def get_decision(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        net = networks[session.network_id].network
        block = _decision_block(net, session.evidence)
        block.update(
            {
                "session": session.id,
                "revision": session.revision,
                "evidence": dict(session.evidence.items()),
            }
        )
        return block

    @app.put("/sessions/{session_id}/evidence")
    def put_evidence(session_id: str, body: EvidenceIn):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        net = networks[session.network_id].network
        if body.variable not in net.nodes:
            return _error(
                422, "unknown_variable", f"no variable {body.variable!r}"
            )
        node = net.nodes[body.variable]
        if node.variable is None or node.kind == "utility":
            return _error(
                422, "unknown_variable", f"{body.variable!r} cannot be observed"
            )
        if body.level not in node.variable.levels:
            return _error(
                422,
                "unknown_level",
                f"variable {body.variable!r} has no level {body.level!r}",
                variable=body.variable,
            )
        with session.lock:
            candidate = session.evidence.with_assignment(
                body.variable, body.level
            )
            if prob_of_evidence(net, candidate) <= 0.0:
                return _error(
                    409,
                    "zero_probability_evidence",
                    f"observing {body.variable} = {body.level} contradicts "
                    "the current evidence",
                    variable=body.variable,
                    level=body.level,
                    prob_of_evidence=0.0,
                )
            session.evidence = candidate
            session.revision += 1
            return _summary(session, candidate, session.revision)

    @app.delete("/sessions/{session_id}/evidence/{variable}")
    def delete_evidence(session_id: str, variable: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        net = networks[session.network_id].network
        if variable not in net.nodes:
            return _error(422, "unknown_variable", f"no variable {variable!r}")
        with session.lock:
            session.evidence = session.evidence.without(variable)
            session.revision += 1
            return _summary(session, session.evidence, session.revision)

    @app.post("/sessions/{session_id}/whatif")
    def post_whatif(session_id: str, body: WhatIfIn):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        net = networks[session.network_id].network
        for var, level in body.assignments.items():
            if var not in net.nodes:
                return _error(422, "unknown_variable", f"no variable {var!r}")
            node = net.nodes[var]
            if node.variable is None or level not in node.variable.levels:
                return _error(
                    422,
                    "unknown_level",
                    f"variable {var!r} has no level {level!r}",
                    variable=var,
                )
        diagnosis = net.tagged("diagnosis")
        target_var = body.target or (diagnosis[0] if diagnosis else None)
        if target_var is None:
            return _error(
                422, "no_target", "network has no diagnosis-tagged variable"
            )
        if target_var not in net.nodes or net.nodes[target_var].variable is None:
            return _error(
                422, "unknown_variable", f"no variable {target_var!r}"
            )

        current = session.evidence
        hypothetical = current
        for var, level in body.assignments.items():
            hypothetical = hypothetical.with_assignment(var, level)
        if prob_of_evidence(net, hypothetical) <= 0.0:
            return _error(
                409,
                "zero_probability_evidence",
                "the hypothetical evidence set has zero probability",
                prob_of_evidence=0.0,
            )

        payload = _summary(session, hypothetical, session.revision)
        base = _summary(session, current, session.revision)
        deltas: dict = {
            "posteriors": {
                var: {
                    level: payload["posteriors"][var][level]
                    - base["posteriors"][var][level]
                    for level in payload["posteriors"][var]
                }
                for var in payload["posteriors"]
            }
        }
        if (
            payload["expected_utilities"] is not None
            and base["expected_utilities"] is not None
        ):
            deltas["expected_utilities"] = {
                alt: payload["expected_utilities"][alt]
                - base["expected_utilities"][alt]
                for alt in payload["expected_utilities"]
                if alt in base["expected_utilities"]
            }
        else:
            deltas["expected_utilities"] = None

        target_event = _target_event(net, target_var, hypothetical)
        indicants = _indicant_ranking(net, target_event, hypothetical)
        return {
            "hypothetical": dict(hypothetical.items()),
            "payload": payload,
            "deltas": deltas,
            "target": {
                "variable": target_event.var,
                "levels": list(target_event.levels),
            },
            "indicants": indicants,
        }

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        session = _get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return PlainTextResponse(netlang.serialize_evidence(session.evidence))

    return app


def _target_event(net: Network, target_var: str, evidence: Evidence) -> Event:
    """Disorder event of interest: every level except the leading
    absent/none level (or the most severe level for a binary variable —
    the two coincide)."""
    spec = net.variable(target_var)
    return Event(target_var, spec.levels[1:])


def _indicant_ranking(net: Network, target: Event, evidence: Evidence) -> list:
    """Per-indicant sensitivity toward the target disorder event: for every
    unobserved non-diagnosis variable, the posterior at each hypothetical
    level and the largest single-level sensitivity range, ranked most
    sensitive first (declaration order on ties)."""
    diagnosis = set(net.tagged("diagnosis"))
    rows = []
    for position, node in enumerate(net.nodes.values()):
        if node.variable is None or node.kind not in ("chance", "deterministic"):
            continue
        if node.name in diagnosis or node.name == target.var:
            continue
        if node.name in evidence:
            continue
        levels = {}
        best = 0.0
        for level in node.variable.levels:
            try:
                link = sensitivity_range(
                    net, target, Event(node.name, (level,)), evidence
                )
            except InferenceError:
                levels[level] = None
                continue
            hyp = evidence.with_assignment(node.name, level)
            post = posterior(net, Query((target.var,), hyp))
            marg = post.marginal(target.var)
            levels[level] = sum(marg[l] for l in target.levels)
            best = max(best, abs(link.value))
        rows.append(
            {
                "variable": node.name,
                "posteriors": levels,
                "sensitivity": best,
                "_position": position,
            }
        )
    rows.sort(key=lambda r: (-r["sensitivity"], r["_position"]))
    for row in rows:
        del row["_position"]
    return rows
