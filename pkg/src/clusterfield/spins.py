"""Spin models on a region: energies, exact measures by enumeration, tau.

Configurations assign colors 1..q to inner sites. The two-color model is also
exposed in the +-1 convention via the identification color 1 <-> +1,
color 2 <-> -1. Enumeration order is fixed: sites sorted by id, site ranked
k is the k-th little-endian base-q digit of the configuration code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ConfigError, DomainMismatchError, check_cap
from .fields import ising_values
from .model import ModelSpec

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SpinConfig:
    values: dict  # site -> color in 1..q

    def color(self, site: int) -> int:
        try:
            return self.values[site]
        except KeyError:
            raise DomainMismatchError(f"no spin at site {site}")

    def spin(self, site: int) -> int:
        """+-1 reading of a two-color configuration."""
        c = self.color(site)
        if c not in (1, 2):
            raise ConfigError("the +-1 reading needs colors in {1, 2}")
        return 1 if c == 1 else -1


@dataclass(frozen=True)
class SpinBoundary:
    kind: str = "free"  # "free" | "fixed"
    mu: SpinConfig = None

    def __post_init__(self):
        if self.kind not in ("free", "fixed"):
            raise ConfigError(f"unknown spin boundary kind {self.kind!r}")
        if self.kind == "fixed" and self.mu is None:
            raise ConfigError("fixed boundary needs the boundary spins")

    @classmethod
    def fixed_uniform(cls, region, color: int):
        return cls(kind="fixed", mu=SpinConfig({s: color for s in region.boundary}))


def _check_boundary(spec: ModelSpec, boundary: SpinBoundary):
    if boundary.kind == "fixed":
        missing = set(spec.region.boundary) - set(boundary.mu.values)
        if missing:
            raise DomainMismatchError(f"boundary spins missing at {sorted(missing)}")
        for s in spec.region.boundary:
            c = boundary.mu.values[s]
            if not 1 <= c <= spec.q:
                raise ConfigError(f"boundary color {c} at site {s} out of range")


@dataclass(frozen=True)
class ExactDistribution:
    """Full weight table over configuration codes 0 .. q^n - 1."""

    sites: tuple        # sorted inner site ids
    q: int
    weights: np.ndarray
    z: float

    def __post_init__(self):
        if not self.z > 0:
            raise ConfigError("partition function must be positive")
        total = math.fsum((self.weights / self.z).tolist())
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"probabilities sum to {total}, not 1")

    def probabilities(self) -> np.ndarray:
        return self.weights / self.z

    def decode(self, code: int) -> SpinConfig:
        values = {}
        for k, s in enumerate(self.sites):
            values[s] = 1 + (code // self.q ** k) % self.q
        return SpinConfig(values)

    def encode(self, sigma: SpinConfig) -> int:
        code = 0
        for k, s in enumerate(self.sites):
            code += (sigma.color(s) - 1) * self.q ** k
        return code

    def colors_of(self, site: int) -> np.ndarray:
        """Color of `site` for every configuration code, vectorized."""
        k = self.sites.index(site)
        codes = np.arange(len(self.weights), dtype=np.int64)
        return 1 + (codes // self.q ** k) % self.q

    def site_marginal(self, site: int) -> np.ndarray:
        """Per-color probabilities at one site (index p-1 holds color p)."""
        colors = self.colors_of(site)
        probs = self.probabilities()
        return np.array(
            [math.fsum(probs[colors == p].tolist()) for p in range(1, self.q + 1)]
        )

    def pair_agreement(self, x: int, y: int) -> float:
        probs = self.probabilities()
        same = self.colors_of(x) == self.colors_of(y)
        return math.fsum(probs[same].tolist())


def ising_energy(spec: ModelSpec, sigma: SpinConfig,
                 boundary: SpinBoundary = SpinBoundary()) -> float:
    """Two-color energy in natural units (no beta), +-1 convention."""
    _check_boundary(spec, boundary)
    h = ising_values(spec.field.restricted(spec.region.inner))
    terms = []
    for a, b in spec.region.inner_bonds:
        terms.append(-spec.couplings.get((a, b)) * sigma.spin(a) * sigma.spin(b))
    for i in sorted(spec.region.inner):
        terms.append(-h[i] * sigma.spin(i))
    if boundary.kind == "fixed":
        for a, b in spec.region.outward_bonds:
            i, j = (a, b) if a in spec.region.inner else (b, a)
            terms.append(-spec.couplings.get((a, b)) * sigma.spin(i) * boundary.mu.spin(j))
    return math.fsum(terms)


def potts_energy(spec: ModelSpec, sigma: SpinConfig,
                 boundary: SpinBoundary = SpinBoundary()) -> float:
    """q-color energy in natural units; the field term carries a 1/q factor."""
    _check_boundary(spec, boundary)
    terms = []
    for a, b in spec.region.inner_bonds:
        if sigma.color(a) == sigma.color(b):
            terms.append(-spec.couplings.get((a, b)))
    for i in sorted(spec.region.inner):
        hv = spec.field.value(i, sigma.color(i))
        # only the selected color's field contributes; -(-inf) forbids exactly
        terms.append(math.inf if hv == -math.inf else -hv / spec.q)
    if boundary.kind == "fixed":
        for a, b in spec.region.outward_bonds:
            i, j = (a, b) if a in spec.region.inner else (b, a)
            if sigma.color(i) == boundary.mu.color(j):
                terms.append(-spec.couplings.get((a, b)))
    if math.inf in terms:
        return math.inf
    return math.fsum(terms)


def _enumerate_energies(spec: ModelSpec, boundary: SpinBoundary, model: str):
    """Yield (codes, energies) chunks over all configurations, vectorized."""
    sites = tuple(sorted(spec.region.inner))
    n = len(sites)
    q = spec.q
    n_states = q ** n
    check_cap(n_states, "spin configuration space")
    idx = {s: k for k, s in enumerate(sites)}

    if model == "ising":
        h_scalar = ising_values(spec.field.restricted(spec.region.inner))
    h_mat = np.array(
        [[spec.field.value(s, p) for p in range(1, q + 1)] for s in sites]
    )

    for start in range(0, n_states, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, n_states), dtype=np.int64)
        colors = np.empty((len(codes), n), dtype=np.int64)
        for k in range(n):
            colors[:, k] = (codes // q ** k) % q  # 0-based colors here
        energy = np.zeros(len(codes))

        if model == "ising":
            spins = 1 - 2 * colors  # color 0 -> +1, color 1 -> -1
            for a, b in spec.region.inner_bonds:
                energy -= spec.couplings.get((a, b)) * spins[:, idx[a]] * spins[:, idx[b]]
            for s in sites:
                energy -= h_scalar[s] * spins[:, idx[s]]
            if boundary.kind == "fixed":
                for a, b in spec.region.outward_bonds:
                    i, j = (a, b) if a in spec.region.inner else (b, a)
                    energy -= spec.couplings.get((a, b)) * spins[:, idx[i]] * boundary.mu.spin(j)
        else:
            for a, b in spec.region.inner_bonds:
                energy -= spec.couplings.get((a, b)) * (
                    colors[:, idx[a]] == colors[:, idx[b]]
                )
            picked = h_mat[np.arange(n)[None, :], colors]  # (chunk, n)
            field_part = picked.sum(axis=1) / q
            energy = np.where(np.isneginf(field_part), np.inf, energy - field_part)
            if boundary.kind == "fixed":
                for a, b in spec.region.outward_bonds:
                    i, j = (a, b) if a in spec.region.inner else (b, a)
                    energy -= spec.couplings.get((a, b)) * (
                        colors[:, idx[i]] == boundary.mu.color(j) - 1
                    )
        yield codes, energy


def exact_spin_measure(spec: ModelSpec, boundary: SpinBoundary = SpinBoundary(),
                       model: str = "potts") -> ExactDistribution:
    """Exact finite-volume measure by full enumeration.

    model="potts" weights exp(-q beta energy); model="ising" requires q=2 and
    weights exp(-beta energy). For q=2 fields in the h,-h convention the two
    normalized measures coincide (the raw weights differ by a constant).
    """
    if model not in ("potts", "ising"):
        raise ConfigError(f"unknown spin model {model!r}")
    if model == "ising" and spec.q != 2:
        raise ConfigError("the +-1 model needs q=2")
    _check_boundary(spec, boundary)
    beta_eff = spec.beta if model == "ising" else spec.q * spec.beta

    sites = tuple(sorted(spec.region.inner))
    n_states = spec.q ** len(sites)
    # refuse before allocating, not after
    check_cap(n_states, "spin configuration space")
    weights = np.empty(n_states)
    for codes, energy in _enumerate_energies(spec, boundary, model):
        # forbidden colors stay forbidden even at beta = 0
        expo = np.where(np.isposinf(energy), -np.inf, -beta_eff * energy)
        weights[codes[0]: codes[-1] + 1] = np.exp(expo)
    z = math.fsum(weights.tolist())
    if not z > 0:
        raise ConfigError("all spin weights vanish (field forbids everything)")
    return ExactDistribution(sites=sites, q=spec.q, weights=weights, z=z)


def two_point_tau(spec: ModelSpec, x: int, y: int,
                  boundary: SpinBoundary = SpinBoundary()) -> float:
    """Agreement probability above the independent baseline, pi(x=y) - 1/q."""
    if x == y:
        raise ConfigError("the two-point function needs two distinct sites")
    if x not in spec.region.inner or y not in spec.region.inner:
        raise DomainMismatchError("both sites must be inner")
    dist = exact_spin_measure(spec, boundary, model="potts")
    return dist.pair_agreement(x, y) - 1.0 / spec.q


def mean_spin(dist: ExactDistribution, site: int) -> float:
    """<sigma_site> in the +-1 reading (q=2)."""
    if dist.q != 2:
        raise ConfigError("mean spin is defined for q=2")
    m = dist.site_marginal(site)
    return m[0] - m[1]


def spin_correlation(dist: ExactDistribution, x: int, y: int) -> float:
    """<sigma_x sigma_y> in the +-1 reading (q=2)."""
    if dist.q != 2:
        raise ConfigError("spin correlation is defined for q=2")
    agree = dist.pair_agreement(x, y)
    return 2.0 * agree - 1.0


def magnetization(dist: ExactDistribution) -> float:
    """Volume-averaged mean spin (q=2)."""
    return math.fsum(mean_spin(dist, s) for s in dist.sites) / len(dist.sites)


def distribution_to_csv(dist: ExactDistribution, fh):
    fh.write("configuration,weight,probability\n")
    probs = dist.probabilities()
    for code in range(len(dist.weights)):
        fh.write(f"{code},{dist.weights[code]!r},{probs[code]!r}\n")
