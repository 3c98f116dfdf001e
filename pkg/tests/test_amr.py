import random

import pytest

from ssacap.amr import (
    AmrGraph,
    DanglingVariableError,
    DisconnectedGraphError,
    DuplicateInstanceError,
    PenmanSyntaxError,
    has_sense_suffix,
    parse_penman,
    read_penman_blocks,
    serialize_penman,
    strip_sense,
    to_triples,
    write_penman_blocks,
)

from conftest import random_graph


def test_parse_simple():
    g = parse_penman("(z0 / sit-01 :ARG1 (z1 / boat))")
    assert g.root == "z0"
    assert g.nodes == {"z0": "sit-01", "z1": "boat"}
    assert [(e.source, e.role, e.target) for e in g.edges] == [("z0", ":ARG1", "z1")]


def test_parse_reentrancy():
    text = "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))"
    g = parse_penman(text)
    assert len(g.nodes) == 3
    assert sum(1 for e in g.edges if e.target == "b") == 2


def test_inverse_role_normalized():
    g = parse_penman("(d / dog :ARG0-of (r / run-01))")
    (e,) = g.edges
    assert (e.source, e.role, e.target) == ("r", ":ARG0", "d")
    assert e.inverted_in_surface


def test_attributes_and_constants():
    g = parse_penman('(c / city :name (n / name :op1 "Rome") :quant 3 :polarity -)')
    assert ("n", ":op1", "Rome") in g.attributes
    assert ("c", ":quant", "3") in g.attributes
    assert ("c", ":polarity", "-") in g.attributes


@pytest.mark.parametrize(
    "text,err",
    [
        ("(z0 / sit-01", PenmanSyntaxError),
        ("z0 / sit-01)", PenmanSyntaxError),
        ("(z0 / a :ARG0 (z0 / b))", DuplicateInstanceError),
        ("(z0 / sit-01 :ARG1 z9)", DanglingVariableError),
        ("()", PenmanSyntaxError),
        ("", PenmanSyntaxError),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_penman(text)


def test_disconnected_graph_rejected():
    with pytest.raises(DisconnectedGraphError):
        AmrGraph("a", {"a": "dog", "b": "cat"}, [])


def test_roundtrip_simple():
    text = "(z0 / sit-01 :ARG1 (z1 / boat))"
    assert parse_penman(serialize_penman(parse_penman(text))) == parse_penman(text)


def test_roundtrip_reentrant_and_inverse():
    for text in [
        "(w / want-01 :ARG0 (b / boy :ARG0-of (g / go-02 :ARG1-of w)))",
        "(a / and :op1 (b / boat) :op2 (c / house))",
        "(d / dog :ARG0-of (r / run-01 :location (p / park)))",
    ]:
        g = parse_penman(text)
        assert parse_penman(serialize_penman(g)) == g


def test_roundtrip_random_graphs():
    rng = random.Random(7)
    for _ in range(200):
        g = random_graph(rng)
        assert parse_penman(serialize_penman(g)) == g


def test_triples_include_root_marker():
    g = parse_penman("(a / and :op1 (b / boat) :op2 (c / house))")
    triples = to_triples(g)
    assert len(triples) == 6  # 3 instances + 2 relations + root marker
    roots = [t for t in triples if t.kind == "root-marker"]
    assert len(roots) == 1 and roots[0].head == "a" and roots[0].tail == "top"


def test_is_predicate():
    g = parse_penman("(s / sit-01 :ARG1 (b / boat :mod (o / old)))")
    assert g.is_predicate("s")
    assert not g.is_predicate("b")
    # Sense suffix without ARGn children is not a predicate node.
    g2 = parse_penman("(s / sit-01 :mod (o / old))")
    assert not g2.is_predicate("s")


def test_sense_helpers():
    assert has_sense_suffix("run-01")
    assert not has_sense_suffix("run")
    assert not has_sense_suffix("run-abc")
    assert strip_sense("look-up-05") == "look-up"
    assert strip_sense("dog") == "dog"


def test_penman_blocks_roundtrip():
    text = "# ::id 1\n(a / ant)\n\n# ::id 2\n(b / bee :ARG0-of (s / sting-01))\n"
    blocks = read_penman_blocks(text)
    assert len(blocks) == 2
    out = write_penman_blocks(blocks)
    again = read_penman_blocks(out)
    assert [b.metadata for b in again] == [b.metadata for b in blocks]
    assert [b.graph for b in again] == [b.graph for b in blocks]
