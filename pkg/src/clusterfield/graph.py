"""Finite graphs, lattice boxes with boundary, and open-edge component structure.

Vertices carry stable integer ids and optional integer lattice coordinates, so
arbitrary small graphs (triangles, stars) are first-class alongside boxes cut
out of the hypercubic lattice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ConfigError, DomainMismatchError

Edge = tuple  # canonical (min_id, max_id) pair


def edge(a: int, b: int) -> Edge:
    """Canonical unordered edge."""
    if a == b:
        raise ConfigError(f"self-loop at vertex {a}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Vertex:
    id: int
    coords: Optional[tuple] = None


@dataclass(frozen=True)
class FiniteGraph:
    """A finite simple graph: ordered vertices, ordered canonical edges."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate vertex ids")
        coords = [v.coords for v in self.vertices if v.coords is not None]
        if len(set(coords)) != len(coords):
            raise ConfigError("duplicate vertex coordinates")
        known = set(ids)
        seen = set()
        for e in self.edges:
            if len(e) != 2 or e[0] == e[1]:
                raise ConfigError(f"bad edge {e}")
            if e != edge(*e):
                raise ConfigError(f"edge {e} is not in canonical (min,max) order")
            if e in seen:
                raise ConfigError(f"duplicate edge {e}")
            if e[0] not in known or e[1] not in known:
                raise ConfigError(f"edge {e} references unknown vertex")
            seen.add(e)

    def vertex_ids(self):
        return tuple(v.id for v in self.vertices)

    def vertex(self, vid: int) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise DomainMismatchError(f"unknown vertex {vid}")

    def coords_of(self, vid: int):
        return self.vertex(vid).coords

    def adjacency(self):
        adj = {v.id: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


@dataclass(frozen=True)
class Region:
    """A window: inner vertices, their outside neighbors, and both bond sets.

    graph covers inner plus boundary vertices and (at least) all_bonds.
    inner_bonds have both endpoints inner; all_bonds additionally contain the
    bonds joining an inner vertex to a boundary vertex.
    """

    graph: FiniteGraph
    inner: frozenset
    boundary: frozenset
    inner_bonds: tuple
    all_bonds: tuple

    def __post_init__(self):
        if self.inner & self.boundary:
            raise ConfigError("inner and boundary vertex sets overlap")
        have = set(self.graph.vertex_ids())
        if not (self.inner | self.boundary) <= have:
            raise ConfigError("region references vertices missing from its graph")
        inner_set = set(self.inner_bonds)
        for a, b in self.inner_bonds:
            if not (a in self.inner and b in self.inner):
                raise ConfigError(f"inner bond {(a, b)} leaves the inner set")
        for a, b in self.all_bonds:
            if a not in self.inner and b not in self.inner:
                raise ConfigError(f"bond {(a, b)} touches no inner vertex")
        if not inner_set <= set(self.all_bonds):
            raise ConfigError("all_bonds must contain every inner bond")

    @property
    def outward_bonds(self):
        inner_set = set(self.inner_bonds)
        return tuple(e for e in self.all_bonds if e not in inner_set)

    def inner_layer(self):
        """Inner vertices adjacent to the boundary (innermost boundary layer)."""
        touched = set()
        for a, b in self.outward_bonds:
            touched.add(a if a in self.inner else b)
        return frozenset(touched)

    def bonds_for(self, scope: str):
        if scope == "inner":
            return self.inner_bonds
        if scope == "inner-plus-boundary":
            return self.all_bonds
        raise ConfigError(f"unknown scope {scope!r}")

    def vertices_for(self, scope: str):
        if scope == "inner":
            return frozenset(self.inner)
        if scope == "inner-plus-boundary":
            return self.inner | self.boundary
        raise ConfigError(f"unknown scope {scope!r}")


def free_region(graph: FiniteGraph) -> Region:
    """Wrap a bare graph as a region with empty boundary."""
    return Region(
        graph=graph,
        inner=frozenset(graph.vertex_ids()),
        boundary=frozenset(),
        inner_bonds=tuple(graph.edges),
        all_bonds=tuple(graph.edges),
    )


@dataclass(frozen=True)
class EdgeConfig:
    """An open/closed assignment over a fixed, ordered edge domain.

    bits is a mask: bit k set means edges[k] is open.
    """

    edges: tuple
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << len(self.edges)):
            raise ConfigError("bitmask outside the edge domain range")

    @classmethod
    def all_closed(cls, edges):
        return cls(tuple(edges), 0)

    @classmethod
    def all_open(cls, edges):
        edges = tuple(edges)
        return cls(edges, (1 << len(edges)) - 1)

    @classmethod
    def from_open(cls, edges, open_edges):
        edges = tuple(edges)
        open_set = {edge(*e) for e in open_edges}
        unknown = open_set - set(edges)
        if unknown:
            raise DomainMismatchError(f"open edges outside domain: {sorted(unknown)}")
        bits = 0
        for k, e in enumerate(edges):
            if e in open_set:
                bits |= 1 << k
        return cls(edges, bits)

    def is_open(self, e) -> bool:
        try:
            k = self.edges.index(edge(*e))
        except ValueError:
            raise DomainMismatchError(f"edge {e} not in domain")
        return bool(self.bits >> k & 1)

    def open_edges(self):
        return tuple(e for k, e in enumerate(self.edges) if self.bits >> k & 1)

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class ClusterDecomposition:
    """Open-edge connected components; ids are the smallest member vertex id."""

    labels: dict
    count: int
    members: dict = field(compare=False)

    def label(self, x: int) -> int:
        try:
            return self.labels[x]
        except KeyError:
            raise DomainMismatchError(f"vertex {x} not in decomposition")


def connected_components(vertices: Iterable[int], open_edges) -> ClusterDecomposition:
    """Union-find decomposition of (vertices, open_edges).

    Edges may touch vertices outside `vertices`; those endpoints are ignored.
    """
    verts = set(vertices)
    parent = {v: v for v in verts}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    for a, b in open_edges:
        if a in verts and b in verts:
            ra, rb = find(a), find(b)
            if ra != rb:
                # keep the smaller id as the root so labels are canonical
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb

    labels = {v: find(v) for v in verts}
    members: dict = {}
    for v in sorted(verts):
        members.setdefault(labels[v], []).append(v)
    members = {root: tuple(vs) for root, vs in members.items()}
    return ClusterDecomposition(labels=labels, count=len(members), members=members)


def connected_components_bfs(vertices, open_edges) -> ClusterDecomposition:
    """Independent BFS implementation, kept as a cross-check oracle."""
    verts = set(vertices)
    adj = {v: [] for v in verts}
    for a, b in open_edges:
        if a in verts and b in verts:
            adj[a].append(b)
            adj[b].append(a)
    labels = {}
    for start in sorted(verts):
        if start in labels:
            continue
        queue = [start]
        labels[start] = start
        while queue:
            x = queue.pop()
            for y in adj[x]:
                if y not in labels:
                    labels[y] = start
                    queue.append(y)
    members: dict = {}
    for v in sorted(verts):
        members.setdefault(labels[v], []).append(v)
    members = {root: tuple(vs) for root, vs in members.items()}
    return ClusterDecomposition(labels=labels, count=len(members), members=members)


def components(region: Region, omega: EdgeConfig, scope: str) -> ClusterDecomposition:
    """Decompose the region under omega. scope: "inner" | "inner-plus-boundary"."""
    expected = region.bonds_for(scope)
    if tuple(omega.edges) != tuple(expected):
        raise DomainMismatchError(
            f"edge configuration domain does not match scope {scope!r}"
        )
    return connected_components(region.vertices_for(scope), omega.open_edges())


def is_connected(dec: ClusterDecomposition, x: int, y: int) -> bool:
    return dec.label(x) == dec.label(y)


def make_lattice_box(d: int, sides, origin=None) -> Region:
    """Axis-aligned box in the d-dimensional hypercubic lattice.

    Inner vertices are the box sites; boundary vertices are the lattice sites
    at graph distance 1. Inner sites get ids 0..n-1 in lexicographic coordinate
    order, then boundary sites continue in the same order.
    """
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    sides = list(sides)
    if len(sides) != d or any(s < 1 for s in sides):
        raise ConfigError("need one side length >= 1 per axis")
    if origin is None:
        origin = (0,) * d
    origin = tuple(origin)
    if len(origin) != d:
        raise ConfigError("origin dimension mismatch")

    inner_coords = sorted(
        tuple(o + k for o, k in zip(origin, offs))
        for offs in itertools.product(*(range(s) for s in sides))
    )
    inner_set = set(inner_coords)

    def neighbors(c):
        for axis in range(d):
            for step in (-1, 1):
                yield tuple(x + step if i == axis else x for i, x in enumerate(c))

    boundary_coords = sorted(
        {n for c in inner_coords for n in neighbors(c) if n not in inner_set}
    )

    ids = {c: i for i, c in enumerate(inner_coords)}
    ids.update({c: len(inner_coords) + i for i, c in enumerate(boundary_coords)})
    vertices = tuple(
        Vertex(id=ids[c], coords=c) for c in inner_coords + boundary_coords
    )

    inner_bonds = []
    outward_bonds = []
    for c in inner_coords:
        for n in neighbors(c):
            if n in inner_set:
                if ids[c] < ids[n]:
                    inner_bonds.append(edge(ids[c], ids[n]))
            else:
                outward_bonds.append(edge(ids[c], ids[n]))
    inner_bonds = sorted(set(inner_bonds))
    outward_bonds = sorted(set(outward_bonds))

    graph = FiniteGraph(vertices=vertices, edges=tuple(inner_bonds + outward_bonds))
    return Region(
        graph=graph,
        inner=frozenset(ids[c] for c in inner_coords),
        boundary=frozenset(ids[c] for c in boundary_coords),
        inner_bonds=tuple(inner_bonds),
        all_bonds=tuple(inner_bonds + outward_bonds),
    )


def inner_graph(region: Region) -> FiniteGraph:
    """The bare graph induced on the region's inner vertices."""
    vertices = tuple(v for v in region.graph.vertices if v.id in region.inner)
    return FiniteGraph(vertices=vertices, edges=tuple(region.inner_bonds))


def subregion(graph: FiniteGraph, inner) -> Region:
    """Carve a window out of an ambient graph.

    The window's boundary is the ambient neighborhood of `inner`; the region
    keeps the full ambient graph so conditioning on edges outside the window
    stays well defined.
    """
    inner = frozenset(inner)
    have = set(graph.vertex_ids())
    if not inner <= have:
        raise ConfigError("window vertices missing from the ambient graph")
    boundary = set()
    inner_bonds = []
    all_bonds = []
    for a, b in graph.edges:
        ina, inb = a in inner, b in inner
        if ina and inb:
            inner_bonds.append((a, b))
            all_bonds.append((a, b))
        elif ina or inb:
            boundary.add(b if ina else a)
            all_bonds.append((a, b))
    return Region(
        graph=graph,
        inner=inner,
        boundary=frozenset(boundary),
        inner_bonds=tuple(inner_bonds),
        all_bonds=tuple(all_bonds),
    )


def load_graph(source) -> FiniteGraph:
    """Read a graph from a JSON file path, file object, or parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            if hasattr(source, "read"):
                doc = json.load(source)
            else:
                with open(source) as fh:
                    doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read graph file: {exc}")
    try:
        vertices = tuple(
            Vertex(
                id=int(v["id"]),
                coords=tuple(int(x) for x in v["coords"]) if "coords" in v else None,
            )
            for v in doc["vertices"]
        )
        edges = tuple(edge(int(a), int(b)) for a, b in doc["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed graph description: {exc}")
    return FiniteGraph(vertices=vertices, edges=tuple(sorted(set(edges))))


def dump_graph(graph: FiniteGraph) -> dict:
    out = {"vertices": [], "edges": [list(e) for e in graph.edges]}
    for v in graph.vertices:
        rec = {"id": v.id}
        if v.coords is not None:
            rec["coords"] = list(v.coords)
        out["vertices"].append(rec)
    return out
