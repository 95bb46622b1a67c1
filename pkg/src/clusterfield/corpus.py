"""Built-in example graphs used by the verification suite and tests.

The set covers multi-cluster decompositions, odd cycles, hubs, and boxes with
a genuine lattice boundary.
"""

from __future__ import annotations

from .graph import FiniteGraph, Region, Vertex, edge, free_region, make_lattice_box


def _bare(n_vertices, edges) -> Region:
    graph = FiniteGraph(
        vertices=tuple(Vertex(id=i) for i in range(n_vertices)),
        edges=tuple(sorted(edge(*e) for e in edges)),
    )
    return free_region(graph)


def corpus() -> dict:
    return {
        "single_vertex": _bare(1, []),
        "single_edge": _bare(2, [(0, 1)]),
        "path3": _bare(3, [(0, 1), (1, 2)]),
        "triangle": _bare(3, [(0, 1), (1, 2), (0, 2)]),
        "star4": _bare(5, [(0, 1), (0, 2), (0, 3), (0, 4)]),
        "cycle4": _bare(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
        "box22": make_lattice_box(2, [2, 2]),
        "box23": make_lattice_box(2, [2, 3]),
    }


def get_region(name: str) -> Region:
    from .errors import ConfigError

    table = corpus()
    if name not in table:
        raise ConfigError(f"unknown corpus graph {name!r}; have {sorted(table)}")
    return table[name]
