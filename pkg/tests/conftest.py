import random
from pathlib import Path

import pytest

from ssacap.amr import AmrGraph, Edge
from ssacap.embeddings import load_embeddings
from ssacap.grounding import read_records

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CONCEPTS = ["dog", "cat", "boat", "house", "run-01", "sit-01", "see-01", "tree"]
ROLES = [":ARG0", ":ARG1", ":ARG2", ":mod", ":location", ":op1"]


def random_graph(rng: random.Random, max_vars: int = 6, prefix: str = "a") -> AmrGraph:
    """Random connected rooted graph: a spanning tree plus a few extra edges."""
    n = rng.randint(1, max_vars)
    variables = [f"{prefix}{i}" for i in range(n)]
    nodes = {v: rng.choice(CONCEPTS) for v in variables}
    edges = []
    for i in range(1, n):
        parent = variables[rng.randrange(i)]
        edges.append(Edge(parent, rng.choice(ROLES), variables[i]))
    for _ in range(rng.randint(0, 2)):
        s, t = rng.choice(variables), rng.choice(variables)
        e = Edge(s, rng.choice(ROLES), t)
        if s != t and not any(x.source == s and x.role == e.role and x.target == t for x in edges):
            edges.append(e)
    attributes = []
    if rng.random() < 0.3:
        attributes.append((rng.choice(variables), ":quant", str(rng.randint(1, 5))))
    return AmrGraph(variables[0], nodes, edges, attributes)


@pytest.fixture(scope="session")
def fixture_records():
    return read_records(FIXTURES / "records.jsonl")


@pytest.fixture(scope="session")
def fixture_embeddings():
    return load_embeddings(FIXTURES / "embeddings.txt")


@pytest.fixture(scope="session")
def fixture_paths():
    return {
        "records": FIXTURES / "records.jsonl",
        "embeddings": FIXTURES / "embeddings.txt",
        "nouns": FIXTURES / "nouns.txt",
    }
