import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from faultloc.codegraph import CodeGraph, MethodNode, get_call_graph, get_method_body, load_graph, serialize_graph
from faultloc.errors import DanglingEdge, DuplicateMethod, MalformedGraph, MethodNotFound
from faultloc.spectra import MethodId

# distinct edge lines in graph50.json, counted with the grep|sort -u|wc pipeline
# documented in tests/fixtures/make_graph50.py
GRAPH50_DISTINCT_EDGES = 100


def graph_doc(n, edges, bodies=True):
    methods = []
    for i in range(n):
        m = {"id": f"p$C#m{i}()", "file": "C.java"}
        if bodies:
            m.update(start_line=i * 10 + 1, end_line=i * 10 + 2, body=f"void m{i}() {{\n}}")
        methods.append(m)
    return {"methods": methods, "edges": [list(e) for e in edges]}


def mid(i):
    return MethodId.parse(f"p$C#m{i}()")


def test_empty_graph():
    g = load_graph('{"methods": [], "edges": []}')
    assert len(g) == 0 and g.edges == frozenset()


def test_single_edge():
    g = load_graph(json.dumps(graph_doc(2, [(0, 1)])))
    assert g.callers_of(mid(1)) == [mid(0)]
    assert g.callees_of(mid(0)) == [mid(1)]
    assert g.callees_of(mid(1)) == []


def test_chain():
    g = load_graph(json.dumps(graph_doc(3, [(0, 1), (1, 2)])))
    r = get_call_graph(g, mid(1))
    assert r.callers == (mid(0),) and r.callees == (mid(2),)


def test_graph50_edge_count_after_dedup():
    text = (FIXTURES / "graph50.json").read_text()
    assert len(json.loads(text)["edges"]) == 120
    g = load_graph(text)
    assert len(g) == 50
    assert len(g.edges) == GRAPH50_DISTINCT_EDGES


def test_graph50_adjacency_matches_edge_scan():
    doc = json.loads((FIXTURES / "graph50.json").read_text())
    g = load_graph(json.dumps(doc))
    ids = [MethodId.parse(m["id"]) for m in doc["methods"]]
    rng = random.Random(3)
    for i in rng.sample(range(50), 15):
        callers = sorted({ids[a] for a, b in doc["edges"] if b == i})
        callees = sorted({ids[b] for a, b in doc["edges"] if a == i})
        assert g.callers_of(ids[i]) == callers
        assert g.callees_of(ids[i]) == callees


def test_method_body_verbatim():
    text = (FIXTURES / "lang5" / "callgraph.json").read_text()
    doc = json.loads(text)
    g = load_graph(text)
    for m in doc["methods"]:
        b = get_method_body(g, MethodId.parse(m["id"]))
        assert b.body == m["body"]
        assert (b.file, b.start_line, b.end_line) == (m["file"], m["start_line"], m["end_line"])
        assert b.render().endswith(m["body"])


def test_lookup_is_exact():
    g = load_graph(json.dumps(graph_doc(2, [])))
    with pytest.raises(MethodNotFound):
        get_method_body(g, MethodId.parse("p$C#m0(int)"))
    with pytest.raises(MethodNotFound):
        get_call_graph(g, MethodId.parse("q$C#m0()"))
    with pytest.raises(KeyError):  # MethodNotFound is also a KeyError
        g.node(MethodId.parse("p$C#zzz()"))


def test_crlf_bodies_normalized():
    doc = graph_doc(1, [])
    doc["methods"][0]["body"] = "void m0() {\r\n}"
    g = load_graph(json.dumps(doc))
    assert g.node(mid(0)).body == "void m0() {\n}"


def test_unknown_fields_ignored():
    doc = graph_doc(2, [(0, 1)])
    doc["generator"] = "x"
    doc["methods"][0]["annotations"] = ["@Test"]
    assert len(load_graph(json.dumps(doc)).edges) == 1


@pytest.mark.parametrize("mutate,exc", [
    (lambda d: d["edges"].append([0, 9]), DanglingEdge),
    (lambda d: d["edges"].append([-1, 0]), DanglingEdge),
    (lambda d: d["edges"].append([0]), MalformedGraph),
    (lambda d: d["edges"].append(["0", 1]), MalformedGraph),
    (lambda d: d["methods"].append(dict(d["methods"][0])), DuplicateMethod),
    (lambda d: d["methods"][0].update(start_line=5, end_line=4), MalformedGraph),
    (lambda d: d["methods"][0].update(end_line=9), MalformedGraph),
    (lambda d: d["methods"][0].update(id="no-hash"), MalformedGraph),
    (lambda d: d["methods"][0].pop("id"), MalformedGraph),
    (lambda d: d.update(methods={}), MalformedGraph),
])
def test_malformed_graphs(mutate, exc):
    doc = graph_doc(2, [(0, 1)])
    mutate(doc)
    with pytest.raises(exc):
        load_graph(json.dumps(doc))


def test_not_json():
    with pytest.raises(MalformedGraph):
        load_graph("{nope")
    with pytest.raises(MalformedGraph):
        load_graph("[]")


def test_roundtrip_fixtures():
    for name in ("graph50.json", "lang5/callgraph.json"):
        g = load_graph((FIXTURES / name).read_text())
        text = serialize_graph(g)
        again = load_graph(text)
        assert again.methods == g.methods and again.edges == g.edges
        assert serialize_graph(again) == text


def test_constructed_graph_matches_loaded():
    node = MethodNode(mid(0), "C.java", 1, 2, "a\nb")
    g = CodeGraph([node], frozenset())
    assert load_graph(serialize_graph(g)).methods == [node]


graphs = st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
)


@settings(max_examples=200, deadline=None)
@given(graphs)
def test_symmetry_and_closure(g_spec):
    n, edges = g_spec
    g = load_graph(json.dumps(graph_doc(n, edges, bodies=False)))
    ids = set(g.ids)
    for m in g.ids:
        callees = g.callees_of(m)
        callers = g.callers_of(m)
        assert callees == sorted(set(callees)) and callers == sorted(set(callers))
        assert set(callees) <= ids and set(callers) <= ids
        for c in callees:
            assert m in g.callers_of(c)
        for c in callers:
            assert m in g.callees_of(c)
    again = load_graph(serialize_graph(g))
    assert again.edges == g.edges and again.methods == g.methods
