"""Shared fixtures: packaged fixture networks, random-network generators,
and the acceptance-criteria summary printed at the end of a run."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from beliefnet import Cpt, Evidence, Network, Node, VariableSpec, parse_network

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "beliefnet" / "data"

# Populated by tests/test_acceptance.py; printed in the terminal summary.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def coldstress_source() -> str:
    return (DATA_DIR / "coldstress.bn").read_text()


@pytest.fixture(scope="session")
def orchard_source() -> str:
    return (DATA_DIR / "orchard-mini.bn").read_text()


@pytest.fixture(scope="session")
def coldstress(coldstress_source) -> Network:
    result = parse_network(coldstress_source, "coldstress.bn")
    assert result.ok, [str(d) for d in result.errors]
    return result.network


@pytest.fixture(scope="session")
def orchard(orchard_source) -> Network:
    result = parse_network(orchard_source, "orchard-mini.bn")
    assert result.ok, [str(d) for d in result.errors]
    return result.network


# ---------------------------------------------------------------------------
# Random-network generation (seeded, used by oracle-equivalence suites)
# ---------------------------------------------------------------------------

def random_network(
    rng: np.random.Generator,
    n_nodes: int | None = None,
    level_range: tuple[int, int] = (2, 4),
    max_parents: int = 3,
    floor: float = 0.0,
) -> Network:
    """Random chance-node DAG in declaration order. ``floor`` > 0 keeps every
    probability at least that large (strictly positive CPTs)."""
    if n_nodes is None:
        n_nodes = int(rng.integers(2, 9))
    cards = [int(rng.integers(level_range[0], level_range[1] + 1)) for _ in range(n_nodes)]
    nodes = []
    for i in range(n_nodes):
        name = f"N{i}"
        levels = tuple(f"l{j}" for j in range(cards[i]))
        n_parents = int(rng.integers(0, min(i, max_parents) + 1))
        parents = tuple(
            f"N{j}" for j in sorted(rng.choice(i, size=n_parents, replace=False))
        ) if n_parents else ()
        n_rows = 1
        for p in parents:
            n_rows *= cards[int(p[1:])]
        rows = rng.dirichlet(np.ones(cards[i]), size=n_rows)
        if floor > 0.0:
            rows = rows + floor
            rows = rows / rows.sum(axis=1, keepdims=True)
        nodes.append(
            Node(
                name=name,
                kind="chance",
                variable=VariableSpec(name, levels),
                parents=parents,
                cpd=Cpt(
                    tuple(cards[int(p[1:])] for p in parents),
                    rows.reshape(
                        tuple(cards[int(p[1:])] for p in parents) + (cards[i],)
                    ),
                ),
            )
        )
    return Network(nodes)


def random_evidence(
    rng: np.random.Generator, net: Network, max_vars: int
) -> Evidence:
    names = list(net.names)
    k = int(rng.integers(0, min(max_vars, len(names)) + 1))
    chosen = rng.choice(len(names), size=k, replace=False) if k else []
    assignments = {}
    for idx in chosen:
        name = names[int(idx)]
        spec = net.variable(name)
        assignments[name] = spec.levels[int(rng.integers(0, spec.cardinality))]
    return Evidence(assignments)


def random_chain(rng: np.random.Generator, length: int = 4) -> Network:
    """Pure binary chain N0 -> N1 -> ... with strictly positive CPTs."""
    nodes = []
    for i in range(length):
        name = f"N{i}"
        levels = ("l0", "l1")
        parents = (f"N{i - 1}",) if i else ()
        n_rows = 2 if i else 1
        rows = rng.uniform(0.05, 0.95, size=(n_rows, 1))
        rows = np.concatenate([1.0 - rows, rows], axis=1)
        nodes.append(
            Node(
                name=name,
                kind="chance",
                variable=VariableSpec(name, levels),
                parents=parents,
                cpd=Cpt((2,) * len(parents), rows.reshape((2,) * len(parents) + (2,))),
            )
        )
    return Network(nodes)


@pytest.fixture(name="random_network", scope="session")
def _random_network_fixture():
    return random_network


@pytest.fixture(name="random_evidence", scope="session")
def _random_evidence_fixture():
    def build(rng: np.random.Generator, net: Network, max_vars: int = 3) -> Evidence:
        return random_evidence(rng, net, max_vars)

    return build


@pytest.fixture(name="random_chain", scope="session")
def _random_chain_fixture():
    return random_chain
