"""A model instance: region + couplings + field + inverse temperature.

The stored beta is the one entering edge probabilities p = 1 - exp(-q beta J)
and cluster field sums beta * sum_i h_{i,p}. The matching q-color spin measure
applies q * beta to its energy at weighting time; for the two-color model in
+-1 convention this reduces to the usual exp(-beta * energy).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainMismatchError
from .fields import CouplingConstants, EdgeWeights, FieldSpec
from .graph import Region


@dataclass(frozen=True)
class ModelSpec:
    region: Region
    couplings: CouplingConstants
    field: FieldSpec
    beta: float

    def __post_init__(self):
        need = set(self.region.all_bonds)
        have = set(self.couplings.values)
        if not need <= have:
            raise DomainMismatchError(
                f"couplings missing on bonds {sorted(need - have)}"
            )
        sites = self.region.inner | self.region.boundary
        missing = sites - self.field.sites
        if missing:
            raise DomainMismatchError(f"field missing at sites {sorted(missing)}")
        if self.beta < 0:
            raise DomainMismatchError("beta must be nonnegative")

    @property
    def q(self) -> int:
        return self.field.q

    def edge_weights(self) -> EdgeWeights:
        return EdgeWeights.from_couplings(self.couplings, self.beta, self.q)

    def with_beta(self, beta: float) -> "ModelSpec":
        return ModelSpec(self.region, self.couplings, self.field, beta)

    def with_field(self, field: FieldSpec) -> "ModelSpec":
        return ModelSpec(self.region, self.couplings, field, self.beta)

    def with_couplings(self, couplings: CouplingConstants) -> "ModelSpec":
        return ModelSpec(self.region, couplings, self.field, self.beta)
