"""Request/response models for the HTTP service, with builders to core objects.

Clients describe models structurally (graphs inline or by generator, fields by
generator or explicit per-site rows), so the service never touches the client
filesystem. Forbidden-color sentinels travel as the strings "inf"/"-inf"
because strict JSON has no infinities.
"""

from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, model_validator

from .corpus import corpus
from .errors import ConfigError
from .fields import (
    CouplingConstants,
    FieldSpec,
    ising_field,
    make_power_law_field,
    zero_field,
)
from .graph import FiniteGraph, Region, Vertex, edge, free_region, subregion
from .model import ModelSpec
from .randomcluster import GRCBoundary

Number = Union[float, str]


def _to_float(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        raise ConfigError(f"not a number: {v!r}")
    return float(v)


class VertexModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: int
    coords: Optional[List[int]] = None


class GraphPayload(BaseModel):
    """A region: built-in corpus entry, lattice box, or explicit vertex/edge lists."""

    model_config = ConfigDict(extra="forbid")
    kind: Literal["corpus", "box", "explicit"]
    name: Optional[str] = None
    dimension: Optional[int] = None
    sides: Optional[List[int]] = None
    origin: Optional[List[int]] = None
    vertices: Optional[List[VertexModel]] = None
    edges: Optional[List[Tuple[int, int]]] = None
    inner: Optional[List[int]] = None

    def to_region(self) -> Region:
        from .graph import make_lattice_box

        if self.kind == "corpus":
            if self.name is None:
                raise ConfigError("corpus graphs need a name")
            table = corpus()
            if self.name not in table:
                raise ConfigError(
                    f"unknown corpus graph {self.name!r}; "
                    f"choices: {', '.join(sorted(table))}")
            return table[self.name]
        if self.kind == "box":
            if self.dimension is None or self.sides is None:
                raise ConfigError("lattice boxes need dimension and sides")
            return make_lattice_box(self.dimension, self.sides,
                                    tuple(self.origin) if self.origin else None)
        if self.vertices is None or self.edges is None:
            raise ConfigError("explicit graphs need vertices and edges")
        graph = FiniteGraph(
            vertices=tuple(
                Vertex(id=v.id,
                       coords=tuple(v.coords) if v.coords is not None else None)
                for v in self.vertices),
            edges=tuple(edge(a, b) for a, b in self.edges),
        )
        if self.inner is None:
            return free_region(graph)
        return subregion(graph, self.inner)


class FieldPayload(BaseModel):
    """External field: zero, uniform two-color, power-law decay, or explicit rows."""

    model_config = ConfigDict(extra="forbid")
    kind: Literal["zero", "uniform", "power-law", "explicit"] = "zero"
    q: int = 2
    value: Optional[Number] = None
    hstar: Optional[float] = None
    alpha: Optional[float] = None
    norm: Literal["euclidean", "sup"] = "euclidean"
    h: Optional[Dict[int, List[Number]]] = None
    color_weights: Optional[List[float]] = None

    def to_field(self, region: Region) -> FieldSpec:
        sites = region.graph.vertex_ids()
        if self.kind == "zero":
            return zero_field(sites, self.q, self.color_weights)
        if self.kind == "uniform":
            if self.value is None:
                raise ConfigError("uniform fields need a value")
            if self.q != 2:
                raise ConfigError("the uniform generator is two-color")
            weights = tuple(self.color_weights) if self.color_weights else (1.0, 1.0)
            return ising_field({s: _to_float(self.value) for s in sites},
                               color_weights=weights)
        if self.kind == "power-law":
            if self.hstar is None or self.alpha is None:
                raise ConfigError("power-law fields need hstar and alpha")
            if self.q != 2:
                raise ConfigError("the power-law generator is two-color")
            weights = tuple(self.color_weights) if self.color_weights else (1.0, 1.0)
            return make_power_law_field(self.hstar, self.alpha, region,
                                        norm=self.norm, color_weights=weights)
        if self.h is None:
            raise ConfigError("explicit fields need per-site rows")
        weights = tuple(self.color_weights) if self.color_weights \
            else (1.0,) * self.q
        return FieldSpec(
            q=self.q,
            h={int(s): tuple(_to_float(v) for v in row)
               for s, row in self.h.items()},
            color_weights=weights,
        )


class ModelPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")
    graph: GraphPayload
    field: FieldPayload = FieldPayload(kind="zero")
    beta: float = 1.0
    j: float = 1.0
    couplings: Optional[List[Tuple[int, int, float]]] = None

    def to_spec(self) -> ModelSpec:
        region = self.graph.to_region()
        values = {e: self.j for e in region.all_bonds}
        if self.couplings:
            for a, b, v in self.couplings:
                e = edge(a, b)
                if e not in values:
                    raise ConfigError(f"no bond {e} in the region")
                values[e] = v
        return ModelSpec(region=region,
                         couplings=CouplingConstants(values=values),
                         field=self.field.to_field(region),
                         beta=self.beta)


class BCPayload(BaseModel):
    """Boundary rule: free, wired to color m, or conditioned on outside bonds."""

    model_config = ConfigDict(extra="forbid")
    kind: Literal["free", "wired", "general"] = "free"
    m: int = 1
    outside_edges: Optional[List[Tuple[int, int]]] = None
    outside_bits: int = 0
    scope: Optional[List[int]] = None
    window: Literal["all", "inner"] = "all"

    def to_bc(self) -> GRCBoundary:
        if self.kind == "free":
            return GRCBoundary.free()
        if self.kind == "wired":
            return GRCBoundary.wired(self.m)
        if self.outside_edges is None:
            raise ConfigError("general boundary rules need the outside bonds")
        from .graph import EdgeConfig

        outside = EdgeConfig(
            edges=tuple(edge(a, b) for a, b in self.outside_edges),
            bits=self.outside_bits)
        return GRCBoundary.general(
            outside,
            scope=frozenset(self.scope) if self.scope is not None else None,
            window=self.window)


# --- verify ------------------------------------------------------------


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    regions: Optional[List[str]] = None
    draws: int = 20
    seed: int = 0
    tolerance: float = 1e-10
    checks: Optional[List[str]] = None
    max_wired_edges: int = 12


class VerifyRecordModel(BaseModel):
    region: str
    draw: int
    q: int
    bc: str
    check: str
    error: float
    passed: bool


class VerifyResponse(BaseModel):
    passed: bool
    n_records: int
    max_error: float
    records: List[VerifyRecordModel]


# --- sample ------------------------------------------------------------


class SampleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    model: ModelPayload
    bc: BCPayload = BCPayload(kind="free")
    observable: str
    x: Optional[int] = None
    y: Optional[int] = None
    sweeps: int
    burn_in: Optional[int] = None
    seed: int = 0
    chain: int = 0
    dynamics: Literal["es", "glauber"] = "es"
    n_batches: int = 32
    include_samples: bool = True


class SampleResponse(BaseModel):
    observable: str
    mean: float
    stderr: float
    n_batches: int
    batch_length: int
    sweeps: int
    burn_in: int
    seed: int
    samples: Optional[List[float]] = None


# --- scan ------------------------------------------------------------


class ScanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    alpha_grid: List[float]
    beta_grid: List[float]
    box_sides: List[int]
    hstar: float
    q: int = 2
    j: float = 1.0
    dimension: int = 2
    norm: Literal["euclidean", "sup"] = "euclidean"
    target_side: Optional[int] = None
    bcs: List[Literal["free", "wired"]] = ["free", "wired"]
    sweeps: int = 20000
    burn_in: Optional[int] = None
    seed: int = 0
    exact_edge_limit: int = 14
    n_batches: int = 32
    include_trend: bool = False


class ScanRecordModel(BaseModel):
    alpha: float
    beta: float
    side: int
    bc: str
    mode: str
    estimate: float
    stderr: float
    sweeps: int
    seed: int


class ScanResponse(BaseModel):
    records: List[ScanRecordModel]
    trend: Optional[dict] = None


# --- weight-table export ------------------------------------------------------------


class TableRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    model: ModelPayload
    bc: BCPayload = BCPayload(kind="free")
    convention: Literal["r", "p"] = "r"


class TableResponse(BaseModel):
    edges: List[Tuple[int, int]]
    weights: List[float]
    probabilities: List[float]
    z: float


# --- inequality checks ------------------------------------------------------------


class TableSource(BaseModel):
    """Either a model whose edge table to enumerate, or a raw weight vector."""

    model_config = ConfigDict(extra="forbid")
    model: Optional[ModelPayload] = None
    bc: BCPayload = BCPayload(kind="free")
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.model is None) == (self.weights is None):
            raise ValueError("give exactly one of model or weights")
        return self


class FkgCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source: TableSource
    tolerance: float = 1e-12
    method: Literal["auto", "full", "reduction"] = "auto"


class FkgCheckResponse(BaseModel):
    passed: bool
    worst_margin: float
    worst_pair: Tuple[int, int]
    n_checked: int
    method: str
    hypothesis_holds: Optional[bool] = None


class DominationCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lo: TableSource
    hi: TableSource
    tolerance: float = 1e-12


class DominationCheckResponse(BaseModel):
    dominates: Optional[bool]
    holley_passed: bool
    holley_worst_margin: float
    flow_value: Optional[float] = None
    witness_up_set: Optional[List[int]] = None
    n_edges: int
    notes: List[str] = []


# --- misc ------------------------------------------------------------


class CorpusEntry(BaseModel):
    name: str
    n_inner: int
    n_boundary: int
    n_inner_bonds: int
    n_all_bonds: int


class CorpusResponse(BaseModel):
    regions: List[CorpusEntry]


class HealthResponse(BaseModel):
    status: str
    version: str
