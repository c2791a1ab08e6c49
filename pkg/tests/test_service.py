"""HTTP session service: lifecycle, revision semantics, isolation, conflict
and what-if payloads, and number-for-number agreement with the command-line
structured output."""

import json

import pytest
from fastapi.testclient import TestClient

from beliefnet.cli import main as cli_main
from beliefnet.service import create_app


@pytest.fixture()
def client(orchard_source):
    app = create_app(preload={"source": orchard_source, "file": "orchard-mini.bn"})
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def coldstress_id(client, coldstress_source):
    resp = client.post(
        "/networks", json={"source": coldstress_source, "file": "coldstress.bn"}
    )
    assert resp.status_code == 201
    return resp.json()["id"]


def open_session(client, network_id=None):
    body = {} if network_id is None else {"network_id": network_id}
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201
    return resp.json()


def put_evidence(client, session_id, variable, level):
    return client.put(
        f"/sessions/{session_id}/evidence",
        json={"variable": variable, "level": level},
    )


CLASSIC = {
    "RecentRain": "yes",
    "ReducedRootHairs": "yes",
    "CankerMargin": "present",
    "LabTest": "positive",
}


class TestNetworks:
    def test_upload_returns_catalog(self, client, coldstress_source):
        resp = client.post(
            "/networks",
            json={"source": coldstress_source, "file": "coldstress.bn"},
        )
        assert resp.status_code == 201
        catalog = resp.json()
        names = [n["name"] for n in catalog["nodes"]]
        assert names == ["ColdStressRegion", "ReportsOfColdStress"]
        assert catalog["diagnosis"] == ["ColdStressRegion"]
        assert catalog["decision"] is None
        assert all(d["severity"] == "lint" for d in catalog["diagnostics"])

    def test_get_network(self, client, coldstress_id):
        resp = client.get(f"/networks/{coldstress_id}")
        assert resp.status_code == 200
        assert resp.json()["id"] == coldstress_id

    def test_unknown_network(self, client):
        resp = client.get("/networks/nope")
        assert resp.status_code == 404
        assert resp.json()["error"] == "unknown_network"

    def test_invalid_source_rejected_with_diagnostics(self, client):
        resp = client.post(
            "/networks", json={"source": "node A { kind chance }", "file": "x.bn"}
        )
        assert resp.status_code == 422
        payload = resp.json()
        assert payload["error"] == "invalid_network"
        assert payload["diagnostics"]

    def test_preloaded_default_network(self, client):
        resp = client.get("/networks/default")
        assert resp.status_code == 200
        node_names = [n["name"] for n in resp.json()["nodes"]]
        assert "Phytophthora" in node_names

    def test_preload_with_errors_refused(self):
        with pytest.raises(ValueError, match="errors"):
            create_app(preload={"source": "node A { kind chance }"})


class TestSessionLifecycle:
    def test_new_session_summary(self, client):
        summary = open_session(client)
        assert summary["revision"] == 0
        assert summary["evidence"] == {}
        assert set(summary["posteriors"]) == {"Phytophthora", "OtherRootProblems"}
        assert summary["prob_of_evidence"] == 1.0
        assert summary["conflict"]["flagged"] is False
        assert summary["decision"] == "FungicideTreatment"
        assert summary["recommended"] == "none"
        for dist in summary["posteriors"].values():
            assert all(isinstance(p, float) for p in dist.values())
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)

    def test_session_needs_known_network(self, client):
        resp = client.post("/sessions", json={"network_id": "nope"})
        assert resp.status_code == 404

    def test_evidence_updates_posteriors_and_revision(
        self, client, coldstress_id
    ):
        session = open_session(client, coldstress_id)
        sid = session["session"]
        assert session["posteriors"]["ColdStressRegion"]["present"] == 0.95

        resp = put_evidence(client, sid, "ReportsOfColdStress", "none")
        assert resp.status_code == 200
        summary = resp.json()
        assert summary["revision"] == 1
        assert summary["evidence"] == {"ReportsOfColdStress": "none"}
        assert summary["posteriors"]["ColdStressRegion"]["present"] == (
            pytest.approx(1.0 / 3.0, abs=1e-12)
        )

    def test_set_then_clear_equals_never_set(self, client, coldstress_id):
        session = open_session(client, coldstress_id)
        sid = session["session"]
        baseline = client.get(f"/sessions/{sid}/posteriors").json()

        put_evidence(client, sid, "ReportsOfColdStress", "none")
        resp = client.delete(f"/sessions/{sid}/evidence/ReportsOfColdStress")
        assert resp.status_code == 200
        cleared = resp.json()
        assert cleared["revision"] == 2
        assert cleared["evidence"] == {}
        assert cleared["posteriors"] == baseline["posteriors"]
        assert cleared["prob_of_evidence"] == baseline["prob_of_evidence"]

    def test_repeated_put_is_idempotent_in_values_not_revision(self, client):
        sid = open_session(client)["session"]
        first = put_evidence(client, sid, "LabTest", "positive").json()
        second = put_evidence(client, sid, "LabTest", "positive").json()
        assert first["revision"] == 1
        assert second["revision"] == 2
        assert first["posteriors"] == second["posteriors"]
        assert first["expected_utilities"] == second["expected_utilities"]

    def test_observed_diagnosis_variable_degenerates(self, client):
        sid = open_session(client)["session"]
        summary = put_evidence(client, sid, "Phytophthora", "none").json()
        assert summary["posteriors"]["Phytophthora"] == {
            "none": 1.0,
            "recoverable": 0.0,
            "beyond-recovery": 0.0,
        }

    def test_clearing_unset_variable_still_bumps_revision(self, client):
        sid = open_session(client)["session"]
        resp = client.delete(f"/sessions/{sid}/evidence/LabTest")
        assert resp.status_code == 200
        assert resp.json()["revision"] == 1

    def test_sessions_are_isolated(self, client):
        a = open_session(client)["session"]
        b = open_session(client)["session"]
        put_evidence(client, a, "LabTest", "positive")
        summary_b = client.get(f"/sessions/{b}/posteriors").json()
        assert summary_b["revision"] == 0
        assert summary_b["evidence"] == {}

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/posteriors").status_code == 404
        assert client.get("/sessions/nope/decision").status_code == 404
        assert client.get("/sessions/nope/export").status_code == 404
        assert (
            client.put(
                "/sessions/nope/evidence",
                json={"variable": "LabTest", "level": "positive"},
            ).status_code
            == 404
        )
        assert client.delete("/sessions/nope/evidence/LabTest").status_code == 404
        assert (
            client.post("/sessions/nope/whatif", json={}).status_code == 404
        )


class TestEvidenceValidation:
    def test_unknown_variable(self, client):
        sid = open_session(client)["session"]
        resp = put_evidence(client, sid, "Ghost", "x")
        assert resp.status_code == 422
        assert resp.json()["error"] == "unknown_variable"

    def test_unknown_level(self, client):
        sid = open_session(client)["session"]
        resp = put_evidence(client, sid, "LabTest", "sparkling")
        assert resp.status_code == 422
        assert resp.json()["error"] == "unknown_level"

    def test_utility_cannot_be_observed(self, client):
        sid = open_session(client)["session"]
        resp = put_evidence(client, sid, "TotalCost", "0")
        assert resp.status_code == 422

    def test_delete_unknown_variable(self, client):
        sid = open_session(client)["session"]
        resp = client.delete(f"/sessions/{sid}/evidence/Ghost")
        assert resp.status_code == 422


class TestZeroProbabilityConflict:
    def test_contradiction_rejected_and_state_preserved(self, client):
        sid = open_session(client)["session"]
        ok = put_evidence(client, sid, "ColdStressRegion", "absent")
        assert ok.status_code == 200
        assert ok.json()["revision"] == 1

        clash = put_evidence(client, sid, "WinterStress", "beyond-recovery")
        assert clash.status_code == 409
        body = clash.json()
        assert body["error"] == "zero_probability_evidence"
        assert body["prob_of_evidence"] == 0.0

        after = client.get(f"/sessions/{sid}/posteriors").json()
        assert after["revision"] == 1
        assert after["evidence"] == {"ColdStressRegion": "absent"}

    def test_soft_conflict_flagged_not_rejected(self, client):
        # Severe tissue damage with intact root hairs: jointly possible but
        # far less likely than the two observations independently.
        sid = open_session(client)["session"]
        put_evidence(client, sid, "TissueDamage", "severe")
        resp = put_evidence(client, sid, "ReducedRootHairs", "no")
        assert resp.status_code == 200
        conflict = resp.json()["conflict"]
        assert conflict["flagged"] is True
        assert conflict["surprise"] > 2.0

    def test_single_observation_never_conflicts(self, client):
        sid = open_session(client)["session"]
        resp = put_evidence(client, sid, "TissueDamage", "severe")
        conflict = resp.json()["conflict"]
        assert conflict["surprise"] == pytest.approx(1.0, abs=1e-12)
        assert conflict["flagged"] is False

    def test_coherent_observations_not_flagged(self, client):
        sid = open_session(client)["session"]
        put_evidence(client, sid, "LabTest", "positive")
        resp = put_evidence(client, sid, "CankerMargin", "present")
        assert resp.json()["conflict"]["flagged"] is False


class TestDecisionEndpoint:
    def test_baseline_block(self, client):
        sid = open_session(client)["session"]
        block = client.get(f"/sessions/{sid}/decision").json()
        assert block["decision"] == "FungicideTreatment"
        assert block["recommended"] == "none"
        assert block["tie"] is False
        assert block["revision"] == 0
        assert set(block["expected_utilities"]) == {"none", "apply"}

    def test_sick_tree_flips_recommendation(self, client):
        sid = open_session(client)["session"]
        for var, level in CLASSIC.items():
            assert put_evidence(client, sid, var, level).status_code == 200
        block = client.get(f"/sessions/{sid}/decision").json()
        assert block["recommended"] == "apply"
        assert (
            block["expected_utilities"]["apply"]
            > block["expected_utilities"]["none"]
        )

    def test_observed_decision_reports_only_that_alternative(self, client):
        sid = open_session(client)["session"]
        summary = put_evidence(client, sid, "FungicideTreatment", "apply").json()
        assert summary["recommended"] is None
        assert list(summary["expected_utilities"]) == ["apply"]

    def test_belief_network_has_null_decision_block(self, client, coldstress_id):
        sid = open_session(client, coldstress_id)["session"]
        block = client.get(f"/sessions/{sid}/decision").json()
        assert block["decision"] is None
        assert block["expected_utilities"] is None
        assert block["recommended"] is None


class TestWhatIf:
    def test_empty_hypothetical_has_zero_deltas(self, client):
        sid = open_session(client)["session"]
        put_evidence(client, sid, "LabTest", "positive")
        resp = client.post(f"/sessions/{sid}/whatif", json={"assignments": {}})
        assert resp.status_code == 200
        body = resp.json()
        for dist in body["deltas"]["posteriors"].values():
            assert all(d == 0.0 for d in dist.values())
        assert all(d == 0.0 for d in body["deltas"]["expected_utilities"].values())

    def test_deltas_are_payload_minus_base(self, client):
        sid = open_session(client)["session"]
        base = client.get(f"/sessions/{sid}/posteriors").json()
        resp = client.post(
            f"/sessions/{sid}/whatif",
            json={"assignments": {"LabTest": "positive"}},
        )
        body = resp.json()
        assert body["hypothetical"] == {"LabTest": "positive"}
        for var, dist in body["deltas"]["posteriors"].items():
            for level, delta in dist.items():
                expect = (
                    body["payload"]["posteriors"][var][level]
                    - base["posteriors"][var][level]
                )
                assert delta == pytest.approx(expect, abs=1e-15)
        # a positive lab test must raise the disease posterior
        assert body["deltas"]["posteriors"]["Phytophthora"]["none"] < 0

    def test_whatif_does_not_mutate_session(self, client):
        sid = open_session(client)["session"]
        client.post(
            f"/sessions/{sid}/whatif",
            json={"assignments": {"LabTest": "positive"}},
        )
        after = client.get(f"/sessions/{sid}/posteriors").json()
        assert after["revision"] == 0
        assert after["evidence"] == {}

    def test_zero_probability_hypothetical_409(self, client):
        sid = open_session(client)["session"]
        put_evidence(client, sid, "ColdStressRegion", "absent")
        resp = client.post(
            f"/sessions/{sid}/whatif",
            json={"assignments": {"WinterStress": "beyond-recovery"}},
        )
        assert resp.status_code == 409
        after = client.get(f"/sessions/{sid}/posteriors").json()
        assert after["revision"] == 1

    def test_target_defaults_to_first_diagnosis_variable(self, client):
        sid = open_session(client)["session"]
        body = client.post(f"/sessions/{sid}/whatif", json={}).json()
        assert body["target"]["variable"] == "Phytophthora"
        assert body["target"]["levels"] == ["recoverable", "beyond-recovery"]

    def test_explicit_target(self, client):
        sid = open_session(client)["session"]
        body = client.post(
            f"/sessions/{sid}/whatif", json={"target": "OtherRootProblems"}
        ).json()
        assert body["target"] == {
            "variable": "OtherRootProblems",
            "levels": ["present"],
        }

    def test_unknown_target_rejected(self, client):
        sid = open_session(client)["session"]
        resp = client.post(f"/sessions/{sid}/whatif", json={"target": "Ghost"})
        assert resp.status_code == 422

    def test_unknown_assignment_rejected(self, client):
        sid = open_session(client)["session"]
        resp = client.post(
            f"/sessions/{sid}/whatif", json={"assignments": {"Ghost": "x"}}
        )
        assert resp.status_code == 422

    def test_indicants_ranked_by_sensitivity(self, client):
        sid = open_session(client)["session"]
        body = client.post(f"/sessions/{sid}/whatif", json={}).json()
        indicants = body["indicants"]
        assert indicants, "unobserved indicants should be listed"
        names = [row["variable"] for row in indicants]
        assert "Phytophthora" not in names
        assert "OtherRootProblems" not in names
        assert "FungicideTreatment" not in names
        assert "TotalCost" not in names
        sensitivities = [row["sensitivity"] for row in indicants]
        assert sensitivities == sorted(sensitivities, reverse=True)

    def test_observed_indicants_drop_out(self, client):
        sid = open_session(client)["session"]
        put_evidence(client, sid, "LabTest", "positive")
        body = client.post(f"/sessions/{sid}/whatif", json={}).json()
        names = [row["variable"] for row in body["indicants"]]
        assert "LabTest" not in names

    def test_separated_indicant_has_zero_sensitivity(self, client):
        # Once the abiotic-stress level is known, rain history tells the
        # disease posterior nothing new.
        sid = open_session(client)["session"]
        put_evidence(client, sid, "AbioticStress", "recoverable")
        body = client.post(f"/sessions/{sid}/whatif", json={}).json()
        rain = next(
            row for row in body["indicants"] if row["variable"] == "RecentRain"
        )
        assert rain["sensitivity"] == pytest.approx(0.0, abs=1e-12)
        values = [v for v in rain["posteriors"].values() if v is not None]
        assert max(values) - min(values) < 1e-12


class TestExport:
    def test_round_trips_evidence_lines(self, client):
        sid = open_session(client)["session"]
        put_evidence(client, sid, "LabTest", "positive")
        put_evidence(client, sid, "CankerMargin", "present")
        resp = client.get(f"/sessions/{sid}/export")
        assert resp.status_code == 200
        lines = resp.text.strip().splitlines()
        assert set(lines) == {"LabTest = positive", "CankerMargin = present"}

    def test_empty_session_exports_empty_file(self, client):
        sid = open_session(client)["session"]
        resp = client.get(f"/sessions/{sid}/export")
        assert resp.text == ""


class TestCliAgreement:
    """Every numeric field equals the command-line structured output."""

    def test_posteriors_and_evidence_probability(
        self, client, capsys, data_dir
    ):
        sid = open_session(client)["session"]
        for var, level in CLASSIC.items():
            put_evidence(client, sid, var, level)
        summary = client.get(f"/sessions/{sid}/posteriors").json()

        code = cli_main(
            [
                "infer",
                str(data_dir / "orchard-mini.bn"),
                "--format",
                "json",
                "--target",
                "Phytophthora",
                "--target",
                "OtherRootProblems",
                "--evidence",
                str(data_dir / "ev" / "classic-phytophthora.ev"),
            ]
        )
        assert code == 0
        cli_payload = json.loads(capsys.readouterr().out)
        for var in ("Phytophthora", "OtherRootProblems"):
            for level, p in cli_payload["posteriors"][var].items():
                assert abs(summary["posteriors"][var][level] - p) <= 1e-12
        assert (
            abs(summary["prob_of_evidence"] - cli_payload["prob_of_evidence"])
            <= 1e-12
        )

    def test_expected_utilities(self, client, capsys, data_dir):
        sid = open_session(client)["session"]
        for var, level in CLASSIC.items():
            put_evidence(client, sid, var, level)
        block = client.get(f"/sessions/{sid}/decision").json()

        code = cli_main(
            [
                "decide",
                str(data_dir / "orchard-mini.bn"),
                "--format",
                "json",
                "--evidence",
                str(data_dir / "ev" / "classic-phytophthora.ev"),
            ]
        )
        assert code == 0
        cli_payload = json.loads(capsys.readouterr().out)
        assert cli_payload["recommended"] == block["recommended"]
        for alt, eu in cli_payload["expected_utilities"].items():
            assert abs(block["expected_utilities"][alt] - eu) <= 1e-12
