from __future__ import annotations

import random
from pathlib import Path

import pytest

from animl_kg import vocab as V
from animl_kg.graph import IRI, Graph, Literal, Triple

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
EX = "http://ex.org/kg/"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str = "") -> None:
        ACCEPTANCE[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")


def ex(local: str) -> IRI:
    return IRI(EX + local)


def random_graph(rng: random.Random, max_triples: int, n_nodes: int = 8, n_preds: int = 3,
                 with_literals: bool = True) -> Graph:
    """Small random graph over a fixed node pool (used by oracle comparisons)."""
    nodes = [ex(f"n{i}") for i in range(n_nodes)]
    preds = [ex(f"p{i}") for i in range(n_preds)]
    literals = [Literal("a"), Literal("7", V.XSD_INTEGER), Literal("2.5", V.XSD_DOUBLE),
                Literal("hé \"quoted\"\n"), Literal("chat", lang="fr")]
    g = Graph()
    for _ in range(rng.randint(0, max_triples)):
        obj = rng.choice(literals) if with_literals and rng.random() < 0.25 else rng.choice(nodes)
        g.add(Triple(rng.choice(nodes), rng.choice(preds), obj))
    return g


def step_chain(n: int, prefix: str = "s") -> tuple[Graph, list[IRI]]:
    """n steps linked in both ordering directions."""
    g = Graph()
    steps = [ex(f"{prefix}{i}") for i in range(1, n + 1)]
    exp = ex("experiment")
    g.add(Triple(exp, V.RDF_TYPE, V.Experiment))
    for s in steps:
        g.add(Triple(s, V.RDF_TYPE, V.ExperimentStep))
        g.add(Triple(exp, V.hasMember, s))
    for a, b in zip(steps, steps[1:]):
        g.add(Triple(a, V.directlyPrecedes, b))
        g.add(Triple(b, V.directlyFollows, a))
    return g, steps


def add_step_reference(g: Graph, step: IRI, target: IRI, tag: str, part: str = "infrastructure",
                       subject: IRI | None = None, use_case: IRI | None = None) -> IRI:
    """Attach a reference set holding one reference from step's infrastructure/result to target."""
    holder = ex(f"{tag}/{part}")
    prop = V.hasInfrastructure if part == "infrastructure" else V.hasResult
    g.add(Triple(step, prop, holder))
    g.add(Triple(holder, V.RDF_TYPE, V.Infrastructure if part == "infrastructure" else V.Result))
    rs, ref = ex(f"{tag}/refset"), ex(f"{tag}/ref")
    g.add(Triple(holder, V.hasReferenceSet, rs))
    g.add(Triple(rs, V.RDF_TYPE, V.AnimlReferenceSet))
    g.add(Triple(rs, V.subject, subject or ex("experiment")))
    g.add(Triple(rs, V.hasMember, ref))
    g.add(Triple(ref, V.RDF_TYPE, V.AnimlReference))
    g.add(Triple(ref, V.pointsTo, target))
    if use_case is not None:
        g.add(Triple(ref, V.hasUseCase, use_case))
    return ref


def random_typed_graph(rng: random.Random) -> Graph:
    classes = [V.Sample, V.Method, V.ExperimentStep, V.Unit, V.Series, V.Container]
    g = Graph()
    for k in range(rng.randint(0, 20)):
        node = ex(f"i{k}")
        for cls in rng.sample(classes, rng.randint(1, 2)):
            g.add(Triple(node, V.RDF_TYPE, cls))
        if rng.random() < 0.3:
            g.add(Triple(node, V.hasUnit, ex(f"u{k}")))
    return g.freeze()
