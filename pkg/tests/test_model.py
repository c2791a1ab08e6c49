"""Structural model: variables, CPDs, node kinds, validation, graph queries."""

import numpy as np
import pytest

from beliefnet import (
    Cpt,
    CycleError,
    DeterministicRule,
    Evidence,
    Network,
    NetworkError,
    Node,
    UtilityTable,
    VariableSpec,
    d_separated,
    expand_deterministic_max,
    topological_order,
    validate,
)
from beliefnet.model import check_evidence


def chance(name, levels, parents=(), rows=None, tags=()):
    spec = VariableSpec(name, tuple(levels))
    return Node(
        name=name,
        kind="chance",
        variable=spec,
        parents=tuple(parents),
        cpd=rows,
        tags=frozenset(tags),
    )


def binary(name, p, parents=(), parent_cards=(), tags=()):
    rows = np.array([[1 - v, v] for v in np.atleast_1d(p)])
    shape = tuple(parent_cards) + (2,)
    return chance(
        name, ("l0", "l1"), parents, Cpt(tuple(parent_cards), rows.reshape(shape)),
        tags,
    )


class TestVariableSpec:
    def test_cardinality_and_level_index(self):
        spec = VariableSpec("V", ("none", "some", "lots"))
        assert spec.cardinality == 3
        assert spec.level_index("some") == 1

    def test_unknown_level_raises(self):
        spec = VariableSpec("V", ("a", "b"))
        with pytest.raises(NetworkError):
            spec.level_index("c")

    def test_too_few_levels(self):
        with pytest.raises(NetworkError):
            VariableSpec("V", ("only",))

    def test_duplicate_levels(self):
        with pytest.raises(NetworkError):
            VariableSpec("V", ("a", "a"))


class TestCpt:
    def test_from_rows_shape(self):
        cpt = Cpt.from_rows((2, 3), [[0.5, 0.5]] * 6)
        assert cpt.table.shape == (2, 3, 2)
        assert cpt.n_rows == 6
        assert cpt.child_card == 2

    def test_rows_odometer_last_parent_fastest(self):
        rows = [[1, 0], [0, 1], [0.5, 0.5], [0.2, 0.8]]
        cpt = Cpt.from_rows((2, 2), rows)
        # table[i, j] must be rows[i * 2 + j]
        assert np.allclose(cpt.table[1, 0], [0.5, 0.5])
        assert np.allclose(cpt.row((1, 1)), [0.2, 0.8])

    def test_renormalizes_within_tolerance(self):
        off = 1 + 5e-10
        cpt = Cpt.from_rows((), [[0.25 * off, 0.75 * off]])
        assert cpt.table.sum() == pytest.approx(1.0, abs=1e-12)

    def test_leaves_bad_rows_for_validation(self):
        cpt = Cpt.from_rows((), [[0.3, 0.3]])
        assert cpt.table.sum() == pytest.approx(0.6)

    def test_normalization_is_idempotent(self):
        first = Cpt.from_rows((), [[0.2, 0.5, 0.2, 0.1]])
        second = Cpt.from_rows((), [list(first.rows()[0])])
        assert np.array_equal(first.table, second.table)


class TestNode:
    def test_utility_has_no_variable(self):
        node = Node(
            name="U", kind="utility", variable=None, parents=("A",),
            cpd=UtilityTable((2,), np.array([0.0, -10.0])),
        )
        assert node.variable is None

    def test_chance_requires_variable(self):
        with pytest.raises(NetworkError):
            Node(name="X", kind="chance", variable=None, parents=(), cpd=None)

    def test_variable_name_must_match(self):
        with pytest.raises(NetworkError):
            Node(
                name="X", kind="chance",
                variable=VariableSpec("Y", ("a", "b")), parents=(), cpd=None,
            )

    def test_unknown_kind(self):
        with pytest.raises(NetworkError):
            Node(
                name="X", kind="wish", variable=VariableSpec("X", ("a", "b")),
                parents=(), cpd=None,
            )


class TestEvidence:
    def test_immutable_updates(self):
        e = Evidence({"A": "x"})
        e2 = e.with_assignment("B", "y")
        assert "B" not in e and e2.get("B") == "y"
        e3 = e2.without("A")
        assert "A" not in e3 and "A" in e2
        assert len(e2) == 2

    def test_check_evidence(self):
        net = Network([binary("A", 0.5)])
        check_evidence(net, Evidence({"A": "l1"}))
        with pytest.raises(NetworkError):
            check_evidence(net, Evidence({"B": "l0"}))
        with pytest.raises(NetworkError):
            check_evidence(net, Evidence({"A": "nope"}))


class TestNetwork:
    def test_duplicate_names_rejected(self):
        with pytest.raises(NetworkError):
            Network([binary("A", 0.5), binary("A", 0.2)])

    def test_children_and_ancestors(self):
        net = Network(
            [
                binary("A", 0.5),
                binary("B", [0.1, 0.9], ("A",), (2,)),
                binary("C", [0.2, 0.8], ("B",), (2,)),
            ]
        )
        assert list(net.children_of("A")) == ["B"]
        assert net.ancestors_of(["C"]) == {"A", "B"}

    def test_topological_order_keeps_declaration_order(self):
        net = Network(
            [
                binary("B", 0.5),
                binary("A", 0.5),
                binary("C", [0.1, 0.2, 0.3, 0.4], ("B", "A"), (2, 2)),
            ]
        )
        assert topological_order(net) == ["B", "A", "C"]

    def test_cycle_detected_and_named(self):
        nodes = [
            binary("A", [0.1, 0.9], ("B",), (2,)),
            binary("B", [0.3, 0.7], ("A",), (2,)),
        ]
        net = Network(nodes)
        with pytest.raises(CycleError) as err:
            topological_order(net)
        assert {"A", "B"} <= set(err.value.nodes)

    def test_tagged(self):
        net = Network([binary("A", 0.5, tags=("diagnosis",)), binary("B", 0.5)])
        assert net.tagged("diagnosis") == ["A"]


class TestValidate:
    def test_clean_network(self):
        net = Network([binary("A", 0.5), binary("B", [0.1, 0.9], ("A",), (2,))])
        report = validate(net)
        assert report.ok and not list(report)

    def test_unknown_parent(self):
        net = Network([binary("B", [0.1, 0.9], ("Ghost",), (2,))])
        report = validate(net)
        assert not report.ok
        assert any("Ghost" in issue.message for issue in report.errors)

    def test_row_sum_error(self):
        bad = Cpt((), np.array([[0.6, 0.6]]))
        net = Network([chance("A", ("l0", "l1"), (), bad)])
        assert not validate(net).ok

    def test_shape_mismatch(self):
        bad = Cpt((2,), np.full((2, 2), 0.5))
        net = Network([chance("A", ("l0", "l1"), (), bad)])
        assert not validate(net).ok

    def test_chance_without_cpd(self):
        net = Network([chance("A", ("l0", "l1"), (), None)])
        assert not validate(net).ok

    def test_cycle_reported(self):
        net = Network(
            [
                binary("A", [0.1, 0.9], ("B",), (2,)),
                binary("B", [0.3, 0.7], ("A",), (2,)),
            ]
        )
        assert not validate(net).ok

    def test_utility_cannot_be_parent(self):
        util = Node(
            name="U", kind="utility", variable=None, parents=("A",),
            cpd=UtilityTable((2,), np.array([0.0, 1.0])),
        )
        net = Network([binary("A", 0.5), util, binary("B", [0.1, 0.9], ("U",), (2,))])
        assert not validate(net).ok

    def test_two_utility_nodes_rejected(self):
        mk = lambda name: Node(
            name=name, kind="utility", variable=None, parents=("A",),
            cpd=UtilityTable((2,), np.array([0.0, 1.0])),
        )
        net = Network([binary("A", 0.5), mk("U1"), mk("U2")])
        assert not validate(net).ok

    def test_decision_with_cpd_rejected(self):
        bad = Node(
            name="D", kind="decision", variable=VariableSpec("D", ("a", "b")),
            parents=(), cpd=Cpt((), np.array([[0.5, 0.5]])),
        )
        net = Network([bad])
        assert not validate(net).ok

    def test_palette_lint_is_not_fatal(self):
        net = Network([binary("A", 0.42)])
        report = validate(net)
        assert report.ok
        assert any("palette" in issue.message for issue in report.lints)

    def test_palette_values_pass(self):
        net = Network([binary("A", 0.95)])
        assert not validate(net).lints


class TestDeterministicMax:
    LEVELS = ("none", "rec", "beyond")

    def _net(self):
        spec = VariableSpec
        rows3 = np.array([[0.5, 0.3, 0.2]])
        a = chance("A", self.LEVELS, (), Cpt((), rows3.copy()))
        b = chance("B", self.LEVELS, (), Cpt((), rows3.copy()))
        m = Node(
            name="M", kind="deterministic",
            variable=spec("M", self.LEVELS), parents=("A", "B"),
            cpd=DeterministicRule("max"),
        )
        return Network([a, b, m])

    def test_expansion_is_one_hot_max(self):
        net = self._net()
        cpt = net.compiled_cpt("M")
        assert cpt.table.shape == (3, 3, 3)
        for i in range(3):
            for j in range(3):
                expect = np.zeros(3)
                expect[max(i, j)] = 1.0
                assert np.array_equal(cpt.table[i, j], expect)

    def test_requires_shared_levels(self):
        a = chance("A", ("x", "y"), (), Cpt((), np.array([[0.5, 0.5]])))
        b = chance("B", ("p", "q"), (), Cpt((), np.array([[0.5, 0.5]])))
        with pytest.raises(NetworkError):
            expand_deterministic_max(
                [a.variable, b.variable], VariableSpec("M", ("x", "y"))
            )

    def test_validate_accepts(self):
        assert validate(self._net()).ok


class TestDSeparation:
    def _collider_net(self):
        return Network(
            [
                binary("A", 0.5),
                binary("B", 0.5),
                binary("C", [0.1, 0.2, 0.3, 0.4], ("A", "B"), (2, 2)),
                binary("D", [0.3, 0.7], ("C",), (2,)),
            ]
        )

    def test_marginal_independence_at_collider(self):
        net = self._collider_net()
        assert d_separated(net, {"A"}, {"B"}, set())

    def test_conditioning_on_collider_connects(self):
        net = self._collider_net()
        assert not d_separated(net, {"A"}, {"B"}, {"C"})

    def test_conditioning_on_collider_descendant_connects(self):
        net = self._collider_net()
        assert not d_separated(net, {"A"}, {"B"}, {"D"})

    def test_chain_blocked_by_middle(self):
        net = Network(
            [
                binary("A", 0.5),
                binary("B", [0.1, 0.9], ("A",), (2,)),
                binary("C", [0.2, 0.8], ("B",), (2,)),
            ]
        )
        assert not d_separated(net, {"A"}, {"C"}, set())
        assert d_separated(net, {"A"}, {"C"}, {"B"})

    def test_fork_blocked_by_root(self):
        net = Network(
            [
                binary("R", 0.5),
                binary("X", [0.1, 0.9], ("R",), (2,)),
                binary("Y", [0.2, 0.8], ("R",), (2,)),
            ]
        )
        assert not d_separated(net, {"X"}, {"Y"}, set())
        assert d_separated(net, {"X"}, {"Y"}, {"R"})
