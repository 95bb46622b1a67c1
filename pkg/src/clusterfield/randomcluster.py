"""Edge-configuration measures with per-cluster field factors.

Three boundary rules are supported. Free weighs each component of the inner
graph by a sum of per-color exponentials; wired additionally pins components
touching the boundary to a single color's exponential; general conditions on a
fixed configuration over declared outside edges and weighs components meeting
the window scope with max-gap exponentials (always <= sum of color weights, so
this form is the numerically safe one).

Both bond-factor conventions are available: "p" uses prod p^open (1-p)^closed,
"r" uses prod r^open with r = p/(1-p). They normalize to the same measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapExceededError, ConfigError, DomainMismatchError, check_cap
from .fields import ising_values
from .graph import ClusterDecomposition, EdgeConfig, connected_components
from .model import ModelSpec


@dataclass(frozen=True)
class GRCBoundary:
    """Boundary rule for an edge measure.

    kind "free": configurations over inner bonds, components of the inner graph.
    kind "wired": configurations over all bonds, components include boundary
        vertices, boundary-touching components are pinned to color m.
    kind "general": configurations over the window edges, conditioned on a
        fixed `outside` configuration; components are taken on the full
        declared graph and the cluster product runs over components meeting
        `scope` (default: inner vertices plus window-edge endpoints).
    """

    kind: str = "free"
    m: Optional[int] = None
    outside: Optional[EdgeConfig] = None
    scope: Optional[frozenset] = None
    window: str = "all"  # general only: "all" -> all bonds, "inner" -> inner bonds

    def __post_init__(self):
        if self.kind not in ("free", "wired", "general"):
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "wired" and self.m is None:
            raise ConfigError("wired boundary needs a color m")
        if self.kind == "general" and self.outside is None:
            raise ConfigError("general boundary needs an outside configuration")
        if self.window not in ("all", "inner"):
            raise ConfigError("window must be 'all' or 'inner'")

    @classmethod
    def free(cls):
        return cls(kind="free")

    @classmethod
    def wired(cls, m: int):
        return cls(kind="wired", m=m)

    @classmethod
    def general(cls, outside: EdgeConfig, scope=None, window: str = "all"):
        scope = None if scope is None else frozenset(scope)
        return cls(kind="general", outside=outside, scope=scope, window=window)


def domain_edges(spec: ModelSpec, bc: GRCBoundary):
    if bc.kind == "free":
        return spec.region.inner_bonds
    if bc.kind == "wired":
        return spec.region.all_bonds
    return spec.region.all_bonds if bc.window == "all" else spec.region.inner_bonds


def _scope_vertices(spec: ModelSpec, bc: GRCBoundary):
    """Vertex set whose components carry cluster factors."""
    if bc.kind == "free":
        return frozenset(spec.region.inner)
    if bc.kind == "wired":
        return spec.region.inner | spec.region.boundary
    if bc.scope is not None:
        return bc.scope
    touched = {v for e in domain_edges(spec, bc) for v in e}
    return frozenset(spec.region.inner) | touched


def decomposition_vertices(spec: ModelSpec, bc: GRCBoundary):
    if bc.kind == "free":
        return frozenset(spec.region.inner)
    if bc.kind == "wired":
        return spec.region.inner | spec.region.boundary
    return frozenset(spec.region.graph.vertex_ids())


def decompose(spec: ModelSpec, bc: GRCBoundary, omega: EdgeConfig) -> ClusterDecomposition:
    """Boundary-aware component decomposition for one configuration."""
    expected = domain_edges(spec, bc)
    if tuple(omega.edges) != tuple(expected):
        raise DomainMismatchError("configuration domain does not match the boundary rule")
    open_edges = list(omega.open_edges())
    if bc.kind == "general":
        open_edges += list(bc.outside.open_edges())
    return connected_components(decomposition_vertices(spec, bc), open_edges)


def _bond_factor(spec: ModelSpec, omega: EdgeConfig, convention: str) -> float:
    w = spec.edge_weights()
    out = 1.0
    for k, e in enumerate(omega.edges):
        is_open = omega.bits >> k & 1
        if convention == "r":
            if is_open:
                out *= w.r[e]
        elif convention == "p":
            out *= w.p[e] if is_open else 1.0 - w.p[e]
        else:
            raise ConfigError(f"unknown bond-factor convention {convention!r}")
    return out


def _free_cluster_factor(spec: ModelSpec, members) -> float:
    total = 0.0
    for p in range(1, spec.q + 1):
        s = math.fsum(spec.field.value(i, p) for i in members)
        if s == -math.inf:
            continue
        total += spec.field.color_weights[p - 1] * math.exp(spec.beta * s)
    return total


def _wired_cluster_factor(spec: ModelSpec, members, m: int) -> float:
    s = math.fsum(spec.field.value(i, m) for i in members)
    return 0.0 if s == -math.inf else math.exp(spec.beta * s)


def _general_cluster_factor(spec: ModelSpec, members) -> float:
    hmax = {i: max(spec.field.h[i]) for i in members}
    total = 0.0
    for p in range(1, spec.q + 1):
        gap = math.fsum(hmax[i] - spec.field.value(i, p) for i in members)
        if gap == math.inf:
            continue
        total += spec.field.color_weights[p - 1] * math.exp(-spec.beta * gap)
    return total


def grc_weight(spec: ModelSpec, omega: EdgeConfig, bc: GRCBoundary,
               convention: str = "r") -> float:
    """Unnormalized weight of one configuration under the boundary rule."""
    dec = decompose(spec, bc, omega)
    out = _bond_factor(spec, omega, convention)
    if bc.kind == "free":
        for members in dec.members.values():
            out *= _free_cluster_factor(spec, members)
    elif bc.kind == "wired":
        boundary = spec.region.boundary
        for members in dec.members.values():
            if any(v in boundary for v in members):
                out *= _wired_cluster_factor(spec, members, bc.m)
            else:
                out *= _free_cluster_factor(spec, members)
    else:
        scope = _scope_vertices(spec, bc)
        for members in dec.members.values():
            if any(v in scope for v in members):
                out *= _general_cluster_factor(spec, members)
    return out


def rc_weight_q2(spec: ModelSpec, omega: EdgeConfig) -> float:
    """Two-color free-boundary weight in the cosh form with "p" bond factors."""
    if spec.q != 2:
        raise ConfigError("the cosh form needs q=2")
    h = ising_values(spec.field.restricted(spec.region.inner))
    dec = decompose(spec, GRCBoundary.free(), omega)
    out = _bond_factor(spec, omega, "p")
    for members in dec.members.values():
        s = spec.beta * math.fsum(h[i] for i in members)
        out *= 2.0 * math.cosh(s)
    return out


@dataclass(frozen=True)
class WeightTable:
    """Exhaustive weights over bitmasks of the domain edge set."""

    spec: ModelSpec
    bc: GRCBoundary
    edges: tuple
    weights: np.ndarray
    z: float

    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def config(self, mask: int) -> EdgeConfig:
        return EdgeConfig(self.edges, mask)

    def decomposition(self, mask: int) -> ClusterDecomposition:
        return decompose(self.spec, self.bc, self.config(mask))

    def expectation(self, values) -> float:
        values = np.asarray(values, dtype=float)
        probs = self.probabilities()
        return math.fsum((values * probs).tolist())


def exact_edge_measure(spec: ModelSpec, bc: GRCBoundary,
                       convention: str = "r") -> WeightTable:
    edges = tuple(domain_edges(spec, bc))
    n_states = 1 << len(edges)
    check_cap(n_states, "edge configuration space")
    weights = np.empty(n_states)
    for mask in range(n_states):
        weights[mask] = grc_weight(spec, EdgeConfig(edges, mask), bc, convention)
    z = math.fsum(weights.tolist())
    if not z > 0:
        raise ConfigError("degenerate table: every configuration has zero weight")
    return WeightTable(spec=spec, bc=bc, edges=edges, weights=weights, z=z)


def cluster_functional_expectation(table: WeightTable,
                                   f: Callable[[EdgeConfig, ClusterDecomposition], float]
                                   ) -> float:
    probs = table.probabilities()
    terms = []
    for mask in range(len(probs)):
        if probs[mask] == 0.0:
            continue
        omega = table.config(mask)
        terms.append(f(omega, table.decomposition(mask)) * probs[mask])
    return math.fsum(terms)


def connectivity(table: WeightTable, x: int, y: int) -> float:
    """Probability that x and y lie in one open component."""
    verts = decomposition_vertices(table.spec, table.bc)
    if x not in verts or y not in verts:
        raise DomainMismatchError("vertex outside the window")
    probs = table.probabilities()
    terms = []
    for mask in range(len(probs)):
        if probs[mask] == 0.0:
            continue
        dec = table.decomposition(mask)
        if dec.label(x) == dec.label(y):
            terms.append(probs[mask])
    return math.fsum(terms)


def percolation_targets(spec: ModelSpec, bc: GRCBoundary):
    """The target vertex set for boundary-reach probabilities.

    Wired/general windows reach the boundary vertices themselves; a free
    window has no boundary bonds, so the proxy target is the innermost
    boundary layer.
    """
    region = spec.region
    if bc.kind == "free":
        targets = region.inner_layer()
    else:
        targets = frozenset(region.boundary)
    if not targets:
        raise DomainMismatchError("region has no boundary to reach")
    return targets


def percolation(table: WeightTable, x: int) -> float:
    """Probability that x is joined to the window boundary."""
    verts = decomposition_vertices(table.spec, table.bc)
    if x not in verts:
        raise DomainMismatchError("vertex outside the window")
    targets = percolation_targets(table.spec, table.bc)
    probs = table.probabilities()
    terms = []
    for mask in range(len(probs)):
        if probs[mask] == 0.0:
            continue
        dec = table.decomposition(mask)
        lx = dec.label(x)
        if any(dec.label(t) == lx for t in targets):
            terms.append(probs[mask])
    return math.fsum(terms)


def table_to_csv(table: WeightTable, fh):
    fh.write("bitmask,weight,probability\n")
    probs = table.probabilities()
    for mask in range(len(probs)):
        fh.write(f"{mask},{float(table.weights[mask])!r},{float(probs[mask])!r}\n")
