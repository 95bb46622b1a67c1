"""Couplings, edge open-probabilities/weights, and per-color site fields.

A field assigns each site a vector of q real values, one per color; the value
float('-inf') is a legal sentinel meaning "this color is forbidden here" and
maps to exact zero weight in every exponential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConfigError, DomainMismatchError
from .graph import Region, edge


@dataclass(frozen=True)
class CouplingConstants:
    """Per-edge ferromagnetic coupling values, J >= 0."""

    values: dict  # edge -> float

    def __post_init__(self):
        for e, j in self.values.items():
            if j < 0:
                raise ConfigError(f"negative coupling on edge {e}")

    @classmethod
    def uniform(cls, edges, j: float):
        return cls({edge(*e): float(j) for e in edges})

    def get(self, e) -> float:
        try:
            return self.values[edge(*e)]
        except KeyError:
            raise DomainMismatchError(f"no coupling declared for edge {e}")

    def scaled(self, factor: float):
        return CouplingConstants({e: factor * j for e, j in self.values.items()})


@dataclass(frozen=True)
class EdgeWeights:
    """The two equivalent edge-weight conventions for the same (q, beta, J).

    p = 1 - exp(-q beta J) is an open probability in [0, 1);
    r = exp(q beta J) - 1 is the matching odds-style weight, p = r / (1 + r).
    """

    p: dict
    r: dict

    @classmethod
    def from_couplings(cls, couplings: CouplingConstants, beta: float, q: int):
        p = {}
        r = {}
        for e, j in couplings.values.items():
            x = q * beta * j
            p[e] = -math.expm1(-x)
            r[e] = math.expm1(x)
        return cls(p=p, r=r)


@dataclass(frozen=True)
class FieldSpec:
    """Per-site, per-color external field plus per-color weight constants.

    h maps site id -> tuple of q values (color p stored at index p-1).
    color_weights are the per-color positive constants entering cluster
    factors.
    """

    q: int
    h: dict
    color_weights: tuple

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("need at least one color")
        if len(self.color_weights) != self.q:
            raise ConfigError("need one color weight per color")
        if any(not w > 0 for w in self.color_weights):
            raise ConfigError("color weights must be positive")
        for site, values in self.h.items():
            if len(values) != self.q:
                raise ConfigError(f"site {site} has {len(values)} field values, expected {self.q}")
            if any(math.isnan(v) or v == math.inf for v in values):
                raise ConfigError(f"site {site} has a non-real field value")
            if max(values) == -math.inf:
                raise ConfigError(f"site {site} forbids every color")

    @property
    def sites(self):
        return frozenset(self.h)

    def value(self, site: int, color: int) -> float:
        if not 1 <= color <= self.q:
            raise ConfigError(f"color {color} out of range 1..{self.q}")
        try:
            return self.h[site][color - 1]
        except KeyError:
            raise DomainMismatchError(f"no field declared at site {site}")

    def restricted(self, sites):
        sites = frozenset(sites)
        missing = sites - self.sites
        if missing:
            raise DomainMismatchError(f"field missing at sites {sorted(missing)}")
        return FieldSpec(
            q=self.q,
            h={s: self.h[s] for s in sites},
            color_weights=self.color_weights,
        )


@dataclass(frozen=True)
class FieldSummary:
    """Per-site maxima, the colors attaining them, and the shared-top mass."""

    hmax: dict          # site -> max over colors
    top_colors: dict    # site -> frozenset of maximizing colors
    shared_top: frozenset  # colors maximal at every site in scope
    qsum: float         # sum of color weights over the intersection of tops
    consistent_order: bool  # no color pair swaps order across sites
    positive_association_hypothesis: bool  # consistent and qsum >= 1


def zero_field(sites, q: int = 2, color_weights=None) -> FieldSpec:
    if color_weights is None:
        color_weights = (1.0,) * q
    return FieldSpec(q=q, h={s: (0.0,) * q for s in sites}, color_weights=tuple(color_weights))


def ising_field(per_site: dict, color_weights=(1.0, 1.0)) -> FieldSpec:
    """Two-color field in the spin-up/spin-down convention h_{i,1} = -h_{i,2}."""
    return FieldSpec(
        q=2,
        h={s: (float(v), -float(v)) for s, v in per_site.items()},
        color_weights=tuple(color_weights),
    )


def ising_values(field: FieldSpec) -> dict:
    """Extract the scalar per-site values of a spin-up/spin-down field."""
    if field.q != 2:
        raise ConfigError("scalar field values are only defined for q=2")
    out = {}
    for s, (up, down) in field.h.items():
        if up != -down:
            raise ConfigError(f"site {s} is not in the h, -h convention")
        out[s] = up
    return out


def make_power_law_field(
    hstar: float, alpha: float, region: Region, norm: str = "euclidean",
    color_weights=(1.0, 1.0),
) -> FieldSpec:
    """Two-color field decaying from the origin like hstar / |i|^alpha.

    The origin itself gets hstar. Sites are all region vertices (inner and
    boundary), which must carry lattice coordinates.
    """
    if not hstar > 0:
        raise ConfigError("hstar must be positive")
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    if norm not in ("euclidean", "sup"):
        raise ConfigError("norm must be 'euclidean' or 'sup'")
    per_site = {}
    for v in region.graph.vertices:
        if v.coords is None:
            raise ConfigError(f"vertex {v.id} has no lattice coordinates")
        if all(c == 0 for c in v.coords):
            per_site[v.id] = hstar
            continue
        if norm == "euclidean":
            dist = math.sqrt(sum(c * c for c in v.coords))
        else:
            dist = max(abs(c) for c in v.coords)
        per_site[v.id] = hstar / dist ** alpha
    return ising_field(per_site, color_weights=color_weights)


def field_sum(field: FieldSpec, beta: float, cluster, color: int) -> float:
    """beta times the total field of the given color over the cluster's sites."""
    cluster = tuple(cluster)
    if not cluster:
        raise ConfigError("cluster must be nonempty")
    total = math.fsum(field.value(s, color) for s in cluster)
    if total == -math.inf:
        return -math.inf
    return beta * total


def field_summary(field: FieldSpec, scope) -> FieldSummary:
    """Dominance structure of the field over a site scope.

    Cluster merging is log-supermodular, and the edge measure satisfies the
    lattice condition, when (a) every pair of colors keeps one order at all
    sites, so cluster sums inherit that order, and (b) the colors that are
    maximal everywhere carry combined weight at least one.
    """
    scope = tuple(scope)
    if not scope:
        raise ConfigError("scope must be nonempty")
    hmax = {}
    tops = {}
    for s in scope:
        values = [field.value(s, p) for p in range(1, field.q + 1)]
        m = max(values)
        hmax[s] = m
        tops[s] = frozenset(p for p, v in zip(range(1, field.q + 1), values) if v == m)
    shared = frozenset.intersection(*tops.values())
    qsum = math.fsum(field.color_weights[p - 1] for p in sorted(shared))
    consistent = True
    for k in range(field.q):
        for l in range(k + 1, field.q):
            sign = 0
            for s in scope:
                a = field.value(s, k + 1)
                b = field.value(s, l + 1)
                here = 0 if a == b else (1 if a > b else -1)
                if here and sign and here != sign:
                    consistent = False
                    break
                sign = sign or here
            if not consistent:
                break
        if not consistent:
            break
    return FieldSummary(
        hmax=hmax,
        top_colors=tops,
        shared_top=shared,
        qsum=qsum,
        consistent_order=consistent,
        positive_association_hypothesis=consistent and qsum >= 1.0,
    )


def field_leq(h: FieldSpec, hprime: FieldSpec) -> bool:
    """Partial order on fields: every strictly positive per-site color gap in h
    must be at least as large in hprime."""
    if h.q != hprime.q:
        raise DomainMismatchError("fields have different color counts")
    if h.sites != hprime.sites:
        raise DomainMismatchError("fields live on different site sets")
    for s in h.sites:
        hv = h.h[s]
        gv = hprime.h[s]
        for k in range(h.q):
            for l in range(h.q):
                gap = hv[k] - hv[l]
                if gap > 0 and not gap <= gv[k] - gv[l]:
                    return False
    return True


def load_field(source, q: int, color_weights=None) -> FieldSpec:
    """Read a field from JSON mapping site id -> list of q values.

    The strings "-inf"/"-Infinity" (and the bare JSON token -Infinity) denote
    the forbidden-color sentinel.
    """
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
            raise ConfigError(f"cannot read field file: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("field file must be a JSON object of site -> values")

    def as_value(x):
        if isinstance(x, str):
            if x in ("-inf", "-Infinity"):
                return -math.inf
            raise ConfigError(f"bad field value {x!r}")
        return float(x)

    h = {}
    for key, values in doc.items():
        try:
            site = int(key)
        except ValueError:
            raise ConfigError(f"bad site id {key!r} in field file")
        if not isinstance(values, list):
            raise ConfigError(f"site {key}: expected a list of {q} values")
        h[site] = tuple(as_value(x) for x in values)
    if color_weights is None:
        color_weights = (1.0,) * q
    return FieldSpec(q=q, h=h, color_weights=tuple(color_weights))


def dump_field(field: FieldSpec) -> dict:
    out = {}
    for s, values in field.h.items():
        out[str(s)] = ["-inf" if v == -math.inf else v for v in values]
    return out
