"""Cluster Monte Carlo for the coupled spin-edge measure, plus a heat-bath check.

One cluster sweep alternates the two conditionals of the joint measure: every
edge joining equal colors opens independently with probability p_e, then every
open cluster is recolored from its exponential field law exp(beta * sum of
h_{i, p} over member sites), clusters touching the boundary being pinned to
the boundary color under the wired rule. Both half-steps leave the joint
measure invariant, so the chain targets it by construction.

Streams are counter-based (Philox) and keyed by (seed, chain), so parallel
chains are reproducible independent of scheduling; within a chain the counter
advances deterministically with the sweeps.

The single-site heat-bath sampler targets the spin marginal only and is kept
as an independent cross-check on spin observables.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coupling import JointConfig, require_unit_weights
from .errors import ConfigError, DomainMismatchError, check_cap
from .graph import EdgeConfig
from .model import ModelSpec
from .randomcluster import GRCBoundary, domain_edges, percolation_targets
from .spins import SpinConfig

DEFAULT_BATCHES = 32
MIN_BATCHES = 20

SPIN_OBSERVABLES = ("magnetization", "two_point")
EDGE_OBSERVABLES = ("connectivity", "percolation")


def make_stream(seed: int, chain: int = 0) -> np.random.Generator:
    """Counter-based stream for one chain; chains never share draws."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chain,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ChainState:
    """Snapshot of one chain: the joint configuration, stream state, clock."""

    joint: JointConfig
    rng_state: dict
    sweep_count: int


@dataclass(frozen=True)
class EstimatorSeries:
    """Per-sweep observable values with batch-means error bars."""

    samples: np.ndarray
    mean: float
    stderr: float
    n_batches: int
    batch_length: int
    observable: str
    sweeps: int
    burn_in: int
    seed: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ConfigError("stderr must be nonnegative")


class _Kernel:
    """Precomputed arrays for fast sweeps on one (spec, bc) pair.

    Inner sites are ranked by sorted id; under the wired rule all boundary
    vertices collapse into one extra virtual vertex with rank n and fixed
    color m, which pins boundary-touching clusters.
    """

    def __init__(self, spec: ModelSpec, bc: GRCBoundary):
        require_unit_weights(spec)
        if bc.kind not in ("free", "wired"):
            raise ConfigError("the sampler runs under the free and wired rules")
        self.spec = spec
        self.bc = bc
        self.q = spec.q
        self.sites = tuple(sorted(spec.region.inner))
        self.rank = {s: k for k, s in enumerate(self.sites)}
        self.n = len(self.sites)
        self.wired = bc.kind == "wired"
        self.m = bc.m
        self.n_ext = self.n + (1 if self.wired else 0)

        self.edges = tuple(domain_edges(spec, bc))
        w = spec.edge_weights()
        self.p = np.array([w.p[e] for e in self.edges])
        self.ea = np.array([self.rank.get(a, self.n) for a, _ in self.edges])
        self.eb = np.array([self.rank.get(b, self.n) for _, b in self.edges])

        h = np.array(
            [[spec.field.value(s, c) for c in range(1, self.q + 1)]
             for s in self.sites]
        )
        # beta = 0 must give finite zeros where h is finite, -inf stays -inf
        self.bh = np.where(np.isneginf(h), -np.inf,
                           spec.beta * np.where(np.isneginf(h), 0.0, h))
        if self.wired and self.n and np.any(np.isneginf(self.bh[:, self.m - 1])):
            # a site forbidding color m can deadlock pinned clusters
            raise ConfigError("wired color is forbidden at some inner site")

        # heat-bath tables: per site, the inner neighbor ranks with couplings
        # and the total outward coupling feeding the boundary color
        nbr = {k: [] for k in range(self.n)}
        for a, b in spec.region.inner_bonds:
            j = spec.couplings.get((a, b))
            nbr[self.rank[a]].append((self.rank[b], j))
            nbr[self.rank[b]].append((self.rank[a], j))
        self.nbr_ranks = [np.array([r for r, _ in nbr[k]], dtype=np.int64)
                          for k in range(self.n)]
        self.nbr_j = [np.array([j for _, j in nbr[k]]) for k in range(self.n)]
        self.out_j = np.zeros(self.n)
        if self.wired:
            for a, b in spec.region.outward_bonds:
                i = a if a in spec.region.inner else b
                self.out_j[self.rank[i]] += spec.couplings.get((a, b))

    # --- packing ------------------------------------------------------------

    def colors_from(self, sigma: SpinConfig) -> np.ndarray:
        out = np.empty(self.n_ext, dtype=np.int64)
        for s, k in self.rank.items():
            c = sigma.color(s)
            if not 1 <= c <= self.q:
                raise ConfigError(f"color {c} at site {s} out of range")
            out[k] = c
        if self.wired:
            out[self.n] = self.m
        return out

    def open_from(self, omega: EdgeConfig) -> np.ndarray:
        if tuple(omega.edges) != self.edges:
            raise DomainMismatchError(
                "configuration domain does not match the boundary rule")
        bits = omega.bits
        return (bits >> np.arange(len(self.edges)) & 1).astype(bool)

    def pack(self, colors: np.ndarray, open_mask: np.ndarray,
             gen: np.random.Generator, sweep_count: int) -> ChainState:
        sigma = SpinConfig({s: int(colors[k]) for s, k in self.rank.items()})
        bits = int(np.dot(open_mask.astype(np.int64),
                          1 << np.arange(len(self.edges), dtype=np.int64)))
        omega = EdgeConfig(edges=self.edges, bits=bits)
        return ChainState(joint=JointConfig(sigma=sigma, omega=omega),
                          rng_state=gen.bit_generator.state,
                          sweep_count=sweep_count)

    # --- sweep pieces ---------------------------------------------------------

    def initial_colors(self, gen: np.random.Generator) -> np.ndarray:
        colors = np.empty(self.n_ext, dtype=np.int64)
        if self.n:
            g = gen.gumbel(size=(self.n, self.q))
            colors[:self.n] = 1 + np.argmax(self.bh + g, axis=1)
        if self.wired:
            colors[self.n] = self.m
        return colors

    def edge_step(self, colors: np.ndarray,
                  gen: np.random.Generator) -> np.ndarray:
        # one uniform per edge keeps the stream data-independent
        u = gen.random(len(self.edges))
        return (colors[self.ea] == colors[self.eb]) & (u < self.p)

    def clusters(self, open_mask: np.ndarray):
        """(count, labels) of the open subgraph over the extended vertex set."""
        parent = list(range(self.n_ext))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in zip(self.ea[open_mask], self.eb[open_mask]):
            ra, rb = find(a), find(b)
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
        roots = np.fromiter((find(x) for x in range(self.n_ext)),
                            dtype=np.int64, count=self.n_ext)
        uniq, labels = np.unique(roots, return_inverse=True)
        return len(uniq), labels

    def color_step(self, open_mask: np.ndarray, gen: np.random.Generator):
        """Recolor clusters from the field law; returns (colors, labels)."""
        n_c, labels = self.clusters(open_mask)
        logits = np.zeros((n_c, self.q))
        if self.n:
            np.add.at(logits, labels[:self.n], self.bh)
        g = gen.gumbel(size=(n_c, self.q))
        choice = np.argmax(logits + g, axis=1)
        if np.any(np.isneginf(logits[np.arange(n_c), choice])):
            raise ConfigError("a cluster forbids every color")
        colors = np.empty(self.n_ext, dtype=np.int64)
        if self.wired:
            choice[labels[self.n]] = self.m - 1
            colors[self.n] = self.m
        colors[:self.n] = 1 + choice[labels[:self.n]]
        return colors, labels

    def es_sweep(self, colors: np.ndarray, gen: np.random.Generator):
        """One full alternation; returns (colors, open_mask, labels)."""
        open_mask = self.edge_step(colors, gen)
        colors, labels = self.color_step(open_mask, gen)
        return colors, open_mask, labels

    def glauber_sweep(self, colors: np.ndarray, gen: np.random.Generator):
        """One heat-bath pass over the inner sites in rank order."""
        qb = self.q * self.spec.beta
        g = gen.gumbel(size=(self.n, self.q))
        for k in range(self.n):
            logits = self.bh[k].copy()
            nbr_colors = colors[self.nbr_ranks[k]]
            for c in range(self.q):
                logits[c] += qb * float(self.nbr_j[k][nbr_colors == c + 1].sum())
            if self.wired:
                logits[self.m - 1] += qb * self.out_j[k]
            colors[k] = 1 + int(np.argmax(logits + g[k]))
        return colors

    # --- observables ------------------------------------------------------------

    def observable_fn(self, name: str, x: Optional[int], y: Optional[int]):
        """Maps (colors, open_mask, labels) to one observable value."""
        if name == "magnetization":
            if self.q != 2:
                raise ConfigError("magnetization is a two-color observable")
            if self.n == 0:
                raise ConfigError("magnetization needs inner sites")

            def fn(colors, open_mask, labels):
                return float(np.mean(3 - 2 * colors[:self.n]))

        elif name == "two_point":
            rx, ry = self._rank_of(x), self._rank_of(y)
            shift = 1.0 / self.q

            def fn(colors, open_mask, labels):
                return float(colors[rx] == colors[ry]) - shift

        elif name == "connectivity":
            rx, ry = self._rank_of(x), self._rank_of(y)

            def fn(colors, open_mask, labels):
                return float(labels[rx] == labels[ry])

        elif name == "percolation":
            rx = self._rank_of(x)
            targets = percolation_targets(self.spec, self.bc)
            if self.wired:
                target_ranks = np.array([self.n], dtype=np.int64)
            else:
                target_ranks = np.array(sorted(self.rank[t] for t in targets),
                                        dtype=np.int64)

            def fn(colors, open_mask, labels):
                return float(np.any(labels[target_ranks] == labels[rx]))

        else:
            raise ConfigError(f"unknown observable {name!r}")
        return fn

    def _rank_of(self, site) -> int:
        if site is None:
            raise ConfigError("this observable needs its site argument(s)")
        if site not in self.rank:
            raise DomainMismatchError(f"site {site} is not an inner site")
        return self.rank[site]


# --- public sweep API ------------------------------------------------------------


def initial_state(spec: ModelSpec, bc: GRCBoundary, seed: int = 0,
                  chain: int = 0) -> ChainState:
    """Fresh chain: site-law colors, all edges closed, stream at the origin."""
    k = _Kernel(spec, bc)
    gen = make_stream(seed, chain)
    colors = k.initial_colors(gen)
    return k.pack(colors, np.zeros(len(k.edges), dtype=bool), gen, 0)


def _restore(gen_state: dict) -> np.random.Generator:
    gen = np.random.Generator(np.random.Philox())
    gen.bit_generator.state = gen_state
    return gen


def es_sweep(state: ChainState, spec: ModelSpec, bc: GRCBoundary) -> ChainState:
    """One full cluster alternation starting from a packed state."""
    k = _Kernel(spec, bc)
    gen = _restore(state.rng_state)
    colors = k.colors_from(state.joint.sigma)
    colors, open_mask, _ = k.es_sweep(colors, gen)
    return k.pack(colors, open_mask, gen, state.sweep_count + 1)


def glauber_sweep(state: ChainState, spec: ModelSpec,
                  bc: GRCBoundary = GRCBoundary.free()) -> ChainState:
    """One heat-bath pass; the edge component is left all closed."""
    k = _Kernel(spec, bc)
    gen = _restore(state.rng_state)
    colors = k.glauber_sweep(k.colors_from(state.joint.sigma), gen)
    return k.pack(colors, np.zeros(len(k.edges), dtype=bool),
                  gen, state.sweep_count + 1)


def is_joint_compatible(state: ChainState, spec: ModelSpec,
                        bc: GRCBoundary) -> bool:
    """Every open edge joins equal colors (boundary read as color m)."""
    k = _Kernel(spec, bc)
    colors = k.colors_from(state.joint.sigma)
    open_mask = k.open_from(state.joint.omega)
    return bool(np.all(colors[k.ea[open_mask]] == colors[k.eb[open_mask]]))


# --- estimation ------------------------------------------------------------


def _parse_observable(observable: str, x, y):
    """Accepts 'name' with site kwargs or inline 'name(x)' / 'name(x,y)'."""
    m = re.fullmatch(r"\s*(\w+)\s*(?:\(([^)]*)\))?\s*", observable)
    if not m:
        raise ConfigError(f"cannot parse observable {observable!r}")
    name, args = m.group(1), m.group(2)
    if args is not None and args.strip():
        parts = [int(a) for a in args.split(",")]
        if len(parts) == 1:
            x, y = parts[0], None
        elif len(parts) == 2:
            x, y = parts
        else:
            raise ConfigError("observables take at most two sites")
    if name not in SPIN_OBSERVABLES + EDGE_OBSERVABLES:
        raise ConfigError(f"unknown observable {name!r}")
    return name, x, y


def batch_stats(samples: np.ndarray, n_batches: int = DEFAULT_BATCHES):
    """(mean, stderr, n_batches, batch_length) by trailing batch means."""
    r = len(samples)
    n_batches = min(n_batches, r)
    if n_batches < MIN_BATCHES:
        raise ConfigError(
            f"need at least {MIN_BATCHES} retained sweeps for batch means")
    length = r // n_batches
    trailing = samples[r - n_batches * length:]
    means = trailing.reshape(n_batches, length).mean(axis=1)
    stderr = float(np.std(means, ddof=1) / math.sqrt(n_batches))
    return float(np.mean(samples)), stderr, n_batches, length


def _run_chain(k: _Kernel, fn, sweeps: int, burn_in: Optional[int],
               seed: int, chain: int, dynamics: str) -> tuple:
    if sweeps <= 0:
        raise ConfigError("sweeps must be positive")
    if burn_in is None:
        burn_in = sweeps // 10
    if not 0 <= burn_in < sweeps:
        raise ConfigError("need sweeps > burn_in >= 0")
    if dynamics not in ("es", "glauber"):
        raise ConfigError(f"unknown dynamics {dynamics!r}")
    gen = make_stream(seed, chain)
    colors = k.initial_colors(gen)
    samples = np.empty(sweeps - burn_in)
    for t in range(sweeps):
        if dynamics == "es":
            colors, open_mask, labels = k.es_sweep(colors, gen)
        else:
            colors = k.glauber_sweep(colors, gen)
            open_mask = labels = None
        if t >= burn_in:
            samples[t - burn_in] = fn(colors, open_mask, labels)
    return samples, burn_in


def estimate(spec: ModelSpec, bc: GRCBoundary, observable: str, sweeps: int,
             burn_in: Optional[int] = None, seed: int = 0, chain: int = 0,
             dynamics: str = "es", x: Optional[int] = None,
             y: Optional[int] = None,
             n_batches: int = DEFAULT_BATCHES) -> EstimatorSeries:
    """Run one chain and average an observable with batch-means error bars."""
    name, x, y = _parse_observable(observable, x, y)
    if dynamics == "glauber" and name in EDGE_OBSERVABLES:
        raise ConfigError("heat-bath dynamics carries no edge configuration")
    k = _Kernel(spec, bc)
    fn = k.observable_fn(name, x, y)
    samples, burn_in = _run_chain(k, fn, sweeps, burn_in, seed, chain, dynamics)
    mean, stderr, nb, length = batch_stats(samples, n_batches)
    return EstimatorSeries(samples=samples, mean=mean, stderr=stderr,
                           n_batches=nb, batch_length=length,
                           observable=observable, sweeps=sweeps,
                           burn_in=burn_in, seed=seed)


def estimate_functional(spec: ModelSpec, bc: GRCBoundary, fn, sweeps: int,
                        burn_in: Optional[int] = None, seed: int = 0,
                        chain: int = 0, n_batches: int = DEFAULT_BATCHES,
                        label: str = "functional") -> EstimatorSeries:
    """Cluster-dynamics average of a custom per-sweep functional.

    fn(colors, open_mask, labels) -> float, where colors is indexed by sorted
    inner-site rank (plus a virtual boundary vertex last under the wired rule),
    open_mask by position in domain_edges(spec, bc), and labels gives cluster
    indices per vertex rank.
    """
    k = _Kernel(spec, bc)
    samples, burn_in = _run_chain(k, fn, sweeps, burn_in, seed, chain, "es")
    mean, stderr, nb, length = batch_stats(samples, n_batches)
    return EstimatorSeries(samples=samples, mean=mean, stderr=stderr,
                           n_batches=nb, batch_length=length,
                           observable=label, sweeps=sweeps,
                           burn_in=burn_in, seed=seed)


def joint_histogram(spec: ModelSpec, bc: GRCBoundary, sweeps: int,
                    burn_in: Optional[int] = None, seed: int = 0,
                    chain: int = 0) -> np.ndarray:
    """Empirical joint frequency matrix [edge_mask, spin_code].

    Indexed exactly like coupling.joint_distribution, so the two can be
    compared in total variation.
    """
    if sweeps <= 0:
        raise ConfigError("sweeps must be positive")
    if burn_in is None:
        burn_in = sweeps // 10
    k = _Kernel(spec, bc)
    n_masks = 1 << len(k.edges)
    n_codes = k.q ** k.n
    check_cap(n_masks * n_codes, "joint configuration space")
    edge_pow = 1 << np.arange(len(k.edges), dtype=np.int64)
    code_pow = k.q ** np.arange(k.n, dtype=np.int64)
    counts = np.zeros((n_masks, n_codes))
    gen = make_stream(seed, chain)
    colors = k.initial_colors(gen)
    for t in range(sweeps):
        colors, open_mask, _ = k.es_sweep(colors, gen)
        if t >= burn_in:
            mask = int(np.dot(open_mask.astype(np.int64), edge_pow))
            code = int(np.dot(colors[:k.n] - 1, code_pow))
            counts[mask, code] += 1
    return counts / counts.sum()


def series_to_csv(series: EstimatorSeries, path: str):
    """Write (sweep, value) rows followed by a summary record."""
    with open(path, "w") as fh:
        fh.write("sweep,value\n")
        for t, v in enumerate(series.samples):
            fh.write(f"{series.burn_in + t},{float(v)!r}\n")
        fh.write(f"# observable={series.observable} mean={series.mean!r} "
                 f"stderr={series.stderr!r} n_batches={series.n_batches} "
                 f"sweeps={series.sweeps} burn_in={series.burn_in} "
                 f"seed={series.seed}\n")
