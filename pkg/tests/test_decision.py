"""Expected-utility evaluation: hand-built diagrams with pencil-and-paper
answers, the enumeration oracle on the orchard fixture, tie handling, and
affine invariance of the recommendation."""

import numpy as np
import pytest

from beliefnet import (
    Cpt,
    DecisionError,
    Evidence,
    Network,
    Node,
    Query,
    UtilityTable,
    VariableSpec,
    enumerate_joint,
    expected_utility,
    parse_evidence,
    recommend,
)


def umbrella_diagram(take_sun=60.0, take_rain=50.0, leave_sun=100.0, leave_rain=0.0):
    """Weather -> Utility <- Umbrella; EU(take) = 57, EU(leave) = 70 at the
    default payoffs."""
    return Network(
        [
            Node(
                "Weather",
                "chance",
                variable=VariableSpec("Weather", ("sun", "rain")),
                cpd=Cpt.from_rows((), [(0.7, 0.3)]),
            ),
            Node(
                "Umbrella",
                "decision",
                variable=VariableSpec("Umbrella", ("take", "leave")),
            ),
            Node(
                "Satisfaction",
                "utility",
                parents=("Weather", "Umbrella"),
                cpd=UtilityTable(
                    (2, 2),
                    np.array(
                        [[take_sun, leave_sun], [take_rain, leave_rain]]
                    ),
                ),
            ),
        ]
    )


class TestExpectedUtility:
    def test_hand_computed_values(self):
        net = umbrella_diagram()
        ev = Evidence()
        assert expected_utility(net, ev, {"Umbrella": "take"}) == pytest.approx(
            0.7 * 60 + 0.3 * 50, abs=1e-12
        )
        assert expected_utility(net, ev, {"Umbrella": "leave"}) == pytest.approx(
            0.7 * 100, abs=1e-12
        )

    def test_alternative_can_come_from_evidence(self):
        net = umbrella_diagram()
        ev = Evidence({"Umbrella": "take"})
        assert expected_utility(net, ev, {}) == pytest.approx(57.0, abs=1e-12)

    def test_conflicting_reassignment_rejected(self):
        net = umbrella_diagram()
        ev = Evidence({"Umbrella": "take"})
        with pytest.raises(DecisionError, match="fixed twice"):
            expected_utility(net, ev, {"Umbrella": "leave"})

    def test_consistent_reassignment_allowed(self):
        net = umbrella_diagram()
        ev = Evidence({"Umbrella": "take"})
        assert expected_utility(net, ev, {"Umbrella": "take"}) == pytest.approx(
            57.0
        )

    def test_unassigned_decision_rejected(self):
        net = umbrella_diagram()
        with pytest.raises(DecisionError, match="not assigned"):
            expected_utility(net, Evidence(), {})

    def test_no_utility_node(self, coldstress):
        with pytest.raises(DecisionError, match="no utility"):
            expected_utility(coldstress, Evidence(), {})

    def test_observed_utility_parents_need_no_inference(self, orchard):
        # Both utility parents pinned: the EU is a single table cell.
        ev = Evidence({"EventualTreeDamage": "none"})
        assert expected_utility(
            orchard, ev, {"FungicideTreatment": "none"}
        ) == pytest.approx(0.0, abs=1e-15)
        assert expected_utility(
            orchard, ev, {"FungicideTreatment": "apply"}
        ) == pytest.approx(-50.0, abs=1e-15)

    def test_matches_enumeration_oracle(self, orchard):
        # Independent path: posterior of the chance utility parent by joint
        # enumeration, dotted into the utility column for each alternative.
        cost = {
            ("none", "none"): 0.0,
            ("none", "slight"): -150.0,
            ("none", "moderate"): -400.0,
            ("none", "severe"): -800.0,
            ("apply", "none"): -50.0,
            ("apply", "slight"): -200.0,
            ("apply", "moderate"): -450.0,
            ("apply", "severe"): -850.0,
        }
        ev = Evidence({"LabTest": "positive", "CankerMargin": "present"})
        for alt in ("none", "apply"):
            q = Query(
                ("EventualTreeDamage",),
                ev.with_assignment("FungicideTreatment", alt),
            )
            dist = enumerate_joint(orchard, q).marginal("EventualTreeDamage")
            oracle = sum(cost[(alt, d)] * p for d, p in dist.items())
            fast = expected_utility(
                orchard, ev, {"FungicideTreatment": alt}
            )
            assert fast == pytest.approx(oracle, abs=1e-10)


class TestRecommend:
    def test_picks_max_eu(self):
        rec = recommend(umbrella_diagram(), Evidence())
        assert rec.recommended == "leave"
        assert rec.tie is False
        assert rec.expected_utilities == pytest.approx(
            {"take": 57.0, "leave": 70.0}, abs=1e-12
        )

    def test_evidence_changes_choice(self):
        net = umbrella_diagram()
        # A rain forecast: P(rain | forecast) needs a forecast node; instead
        # observe the weather outright.
        rec = recommend(net, Evidence({"Weather": "rain"}))
        assert rec.recommended == "take"
        assert rec.expected_utilities == pytest.approx(
            {"take": 50.0, "leave": 0.0}
        )

    def test_exact_tie_flags_and_takes_declaration_order(self):
        net = umbrella_diagram(take_sun=70.0, take_rain=70.0, leave_sun=100.0, leave_rain=0.0)
        rec = recommend(net, Evidence())
        assert rec.tie is True
        assert rec.recommended == "take"

    def test_orchard_baseline_prefers_no_treatment(self, orchard):
        rec = recommend(orchard, Evidence())
        assert rec.recommended == "none"
        assert rec.expected_utilities["none"] > rec.expected_utilities["apply"]

    def test_orchard_sick_tree_prefers_treatment(self, orchard, data_dir):
        text = (data_dir / "ev" / "classic-phytophthora.ev").read_text()
        ev = parse_evidence(text, orchard, "classic-phytophthora.ev").evidence
        rec = recommend(orchard, ev)
        assert rec.recommended == "apply"

    def test_decision_fixed_by_evidence_rejected(self, orchard):
        with pytest.raises(DecisionError, match="already fixed"):
            recommend(orchard, Evidence({"FungicideTreatment": "none"}))

    def test_no_decision_node(self):
        net = Network(
            [
                Node(
                    "Weather",
                    "chance",
                    variable=VariableSpec("Weather", ("sun", "rain")),
                    cpd=Cpt.from_rows((), [(0.7, 0.3)]),
                ),
                Node(
                    "Mood",
                    "utility",
                    parents=("Weather",),
                    cpd=UtilityTable((2,), np.array([100.0, 0.0])),
                ),
            ]
        )
        with pytest.raises(DecisionError, match="no decision"):
            recommend(net, Evidence())
        # expected_utility still works: nothing to assign
        assert expected_utility(net, Evidence(), {}) == pytest.approx(70.0)

    def test_plain_belief_network_rejected(self, coldstress):
        with pytest.raises(DecisionError, match="no decision"):
            recommend(coldstress, Evidence())

    def test_decision_without_utility_rejected(self):
        net = Network(
            [
                Node(
                    "Umbrella",
                    "decision",
                    variable=VariableSpec("Umbrella", ("take", "leave")),
                ),
            ]
        )
        with pytest.raises(DecisionError, match="no utility"):
            recommend(net, Evidence())


class TestAffineInvariance:
    def test_recommendation_survives_positive_affine_transforms(self, orchard):
        rng = np.random.default_rng(77)
        base = recommend(orchard, Evidence())
        util = orchard.utility_node()
        original = util.cpd.values.copy()
        try:
            for _ in range(10):
                a = float(rng.uniform(0.01, 100.0))
                b = float(rng.uniform(-1000.0, 1000.0))
                util.cpd.values[...] = a * original + b
                rec = recommend(orchard, Evidence())
                assert rec.recommended == base.recommended
                assert rec.expected_utilities["none"] == pytest.approx(
                    a * base.expected_utilities["none"] + b, rel=1e-9, abs=1e-9
                )
        finally:
            util.cpd.values[...] = original

    def test_negative_scale_flips(self):
        net = umbrella_diagram(
            take_sun=-60.0, take_rain=-50.0, leave_sun=-100.0, leave_rain=0.0
        )
        rec = recommend(net, Evidence())
        assert rec.recommended == "take"
