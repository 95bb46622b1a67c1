"""Graph, region, and component-structure tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterfield.errors import ConfigError, DomainMismatchError
from clusterfield.graph import (
    EdgeConfig,
    FiniteGraph,
    Region,
    Vertex,
    components,
    connected_components,
    connected_components_bfs,
    dump_graph,
    edge,
    free_region,
    inner_graph,
    is_connected,
    load_graph,
    make_lattice_box,
    subregion,
)


def path_graph(n):
    verts = tuple(Vertex(id=i) for i in range(n))
    edges = tuple(edge(i, i + 1) for i in range(n - 1))
    return FiniteGraph(vertices=verts, edges=edges)


def test_edge_canonical_order():
    assert edge(3, 1) == (1, 3)
    assert edge(1, 3) == (1, 3)
    with pytest.raises(ConfigError):
        edge(2, 2)


def test_graph_validation():
    v = (Vertex(id=0), Vertex(id=1))
    with pytest.raises(ConfigError):
        FiniteGraph(vertices=(Vertex(id=0), Vertex(id=0)), edges=())
    with pytest.raises(ConfigError):
        FiniteGraph(vertices=(Vertex(id=0, coords=(0,)),
                              Vertex(id=1, coords=(0,))), edges=())
    with pytest.raises(ConfigError):
        FiniteGraph(vertices=v, edges=((1, 0),))  # not canonical
    with pytest.raises(ConfigError):
        FiniteGraph(vertices=v, edges=((0, 1), (0, 1)))
    with pytest.raises(ConfigError):
        FiniteGraph(vertices=v, edges=((0, 2),))
    g = FiniteGraph(vertices=v, edges=((0, 1),))
    assert g.vertex_ids() == (0, 1)
    assert g.adjacency() == {0: [1], 1: [0]}
    with pytest.raises(DomainMismatchError):
        g.vertex(7)


def test_lattice_box_shape():
    box = make_lattice_box(2, [3, 3])
    assert len(box.inner) == 9
    assert len(box.boundary) == 12
    assert len(box.inner_bonds) == 12
    assert len(box.all_bonds) == 24
    assert len(box.outward_bonds) == 12
    # the rim is everything but the middle site
    assert len(box.inner_layer()) == 8
    # inner ids precede boundary ids, in lexicographic coordinate order
    coords = [box.graph.coords_of(i) for i in sorted(box.inner)]
    assert coords == sorted(coords)
    assert max(box.inner) < min(box.boundary)


def test_lattice_box_edge_counts_d1():
    line = make_lattice_box(1, [4])
    assert len(line.inner) == 4
    assert len(line.boundary) == 2
    assert len(line.inner_bonds) == 3
    assert len(line.all_bonds) == 5


def test_lattice_box_degenerate_side():
    dot = make_lattice_box(1, [1])
    assert len(dot.inner) == 1
    assert dot.inner_bonds == ()
    assert len(dot.boundary) == 2
    with pytest.raises(ConfigError):
        make_lattice_box(0, [])
    with pytest.raises(ConfigError):
        make_lattice_box(2, [3])
    with pytest.raises(ConfigError):
        make_lattice_box(2, [3, 0])


def test_free_region_has_no_boundary():
    reg = free_region(path_graph(3))
    assert reg.boundary == frozenset()
    assert reg.inner_bonds == reg.all_bonds
    assert reg.inner_layer() == frozenset()
    assert inner_graph(reg).edges == reg.inner_bonds


def test_region_validation():
    g = path_graph(3)
    with pytest.raises(ConfigError):
        Region(graph=g, inner=frozenset({0, 1}), boundary=frozenset({1}),
               inner_bonds=(), all_bonds=())
    with pytest.raises(ConfigError):
        Region(graph=g, inner=frozenset({0, 9}), boundary=frozenset(),
               inner_bonds=(), all_bonds=())
    with pytest.raises(ConfigError):
        Region(graph=g, inner=frozenset({0}), boundary=frozenset({1}),
               inner_bonds=((0, 1),), all_bonds=((0, 1),))
    with pytest.raises(ConfigError):
        # inner bond missing from all_bonds
        Region(graph=g, inner=frozenset({0, 1}), boundary=frozenset({2}),
               inner_bonds=((0, 1),), all_bonds=((1, 2),))


def test_subregion_splits_bonds():
    g = path_graph(5)
    reg = subregion(g, {1, 2})
    assert reg.inner == frozenset({1, 2})
    assert reg.boundary == frozenset({0, 3})
    assert reg.inner_bonds == ((1, 2),)
    assert set(reg.all_bonds) == {(0, 1), (1, 2), (2, 3)}
    assert reg.inner_layer() == frozenset({1, 2})
    with pytest.raises(ConfigError):
        subregion(g, {1, 99})


def test_components_canonical_labels():
    dec = connected_components([0, 1, 2, 3], [(0, 1), (2, 3)])
    assert dec.count == 2
    assert dec.labels == {0: 0, 1: 0, 2: 2, 3: 2}
    assert dec.members == {0: (0, 1), 2: (2, 3)}
    assert is_connected(dec, 0, 1) and not is_connected(dec, 1, 2)
    with pytest.raises(DomainMismatchError):
        dec.label(17)


def test_components_ignore_outside_edges():
    dec = connected_components([0, 1], [(0, 5), (5, 1)])
    assert dec.count == 2


def test_components_scope_checks_domain():
    box = make_lattice_box(1, [3])
    omega = EdgeConfig.all_open(box.inner_bonds)
    dec = components(box, omega, "inner")
    assert dec.count == 1
    with pytest.raises(DomainMismatchError):
        components(box, omega, "inner-plus-boundary")
    with pytest.raises(ConfigError):
        box.bonds_for("outer")


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_union_find_matches_bfs(data):
    n = data.draw(st.integers(min_value=1, max_value=9))
    possible = [(a, b) for a in range(n) for b in range(a + 1, n)]
    open_edges = data.draw(st.lists(st.sampled_from(possible or [(0, 0)]),
                                    max_size=len(possible) or 1))
    if not possible:
        open_edges = []
    a = connected_components(range(n), open_edges)
    b = connected_components_bfs(range(n), open_edges)
    assert a.labels == b.labels
    assert a.count == b.count
    assert a.members == b.members


def test_edge_config_round_trip():
    edges = ((0, 1), (1, 2), (2, 3))
    cfg = EdgeConfig.from_open(edges, [(2, 1)])
    assert cfg.is_open((1, 2))
    assert not cfg.is_open((0, 1))
    assert cfg.open_edges() == ((1, 2),)
    assert len(cfg) == 3
    assert EdgeConfig.all_open(edges).bits == 7
    assert EdgeConfig.all_closed(edges).bits == 0
    with pytest.raises(ConfigError):
        EdgeConfig(edges, 8)
    with pytest.raises(DomainMismatchError):
        EdgeConfig.from_open(edges, [(5, 6)])
    with pytest.raises(DomainMismatchError):
        cfg.is_open((0, 3))


def test_graph_json_round_trip(tmp_path):
    box = make_lattice_box(2, [2, 2])
    doc = dump_graph(box.graph)
    again = load_graph(doc)
    assert again == box.graph
    path = tmp_path / "g.json"
    path.write_text(__import__("json").dumps(doc))
    assert load_graph(str(path)) == box.graph


def test_load_graph_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_graph({"vertices": [{"id": 0}]})  # no edges key
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_graph(str(bad))
    with pytest.raises(ConfigError):
        load_graph(str(tmp_path / "missing.json"))
