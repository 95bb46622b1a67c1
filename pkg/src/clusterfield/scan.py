"""Boundary-influence scans for power-law decaying fields on lattice boxes.

The headline estimate is the finite-volume percolation proxy: the probability
that the box center reaches the box rim (the innermost sites adjacent to the
removed exterior) through the box's own bonds. Every path out of the box must
pass the rim, and reading the same event under both boundary rules keeps the
wired-minus-free gap nonnegative by stochastic domination; the gap is exactly
the influence of the boundary rule on the center. A gap that dies as boxes
grow indicates a unique limit; a persistent gap indicates boundary-condition
dependence. Trend labels are indicative only; nothing here is an
infinite-volume statement.

Setting target_side pins the event to a fixed window of that side instead:
"the center reaches the window rim through the window's own bonds". A fixed
event under growing volumes turns the volume-domination lemma into per-record
monotonicity (free estimates nondecreasing in the side, wired nonincreasing),
which exact mode can assert to machine precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ClusterFieldError, ConfigError, DomainMismatchError, check_cap
from .fields import CouplingConstants, FieldSpec, make_power_law_field, zero_field
from .graph import Region, edge, make_lattice_box
from .model import ModelSpec
from .randomcluster import GRCBoundary, domain_edges, exact_edge_measure
from .sampler import estimate_functional

SCAN_COLUMNS = ("alpha", "beta", "side", "bc", "mode",
                "estimate", "stderr", "sweeps", "seed")
INDICATOR_LIMIT = 16


@dataclass(frozen=True)
class ScanConfig:
    """Grid of (alpha, beta, box side, boundary rule) points to scan."""

    alpha_grid: tuple
    beta_grid: tuple
    box_sides: tuple
    hstar: float
    q: int = 2
    j: float = 1.0
    dimension: int = 2
    norm: str = "euclidean"
    # None: each box reads its own rim; an int pins a fixed window instead
    target_side: Optional[int] = None
    bcs: tuple = ("free", "wired")
    sweeps: int = 20000
    burn_in: Optional[int] = None
    seed: int = 0
    exact_edge_limit: int = 14
    n_batches: int = 32

    def __post_init__(self):
        for name in ("alpha_grid", "beta_grid", "box_sides"):
            grid = tuple(getattr(self, name))
            object.__setattr__(self, name, grid)
            if not grid:
                raise ConfigError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if any(a < 0 for a in self.alpha_grid):
            raise ConfigError("decay exponents must be nonnegative")
        if any(b < 0 for b in self.beta_grid):
            raise ConfigError("inverse temperatures must be nonnegative")
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1")
        if self.hstar < 0:
            raise ConfigError("hstar must be nonnegative")
        # a decaying field peaks at the origin, so its boxes must be odd to
        # center on it; with no field the boxes only need to nest
        if self.hstar > 0:
            if any(s < 3 or s % 2 == 0 for s in self.box_sides):
                raise ConfigError(
                    "box sides must be odd and at least 3 when hstar > 0")
        elif any(s < 3 for s in self.box_sides):
            # side-2 boxes have no interior: the center sits on the rim and
            # the reach event degenerates to a constant
            raise ConfigError("box sides must be at least 3")
        if self.target_side is not None:
            if not 3 <= self.target_side <= self.box_sides[0]:
                raise ConfigError(
                    "target side must be >= 3 and fit inside the smallest box")
            if self.hstar > 0 and self.target_side % 2 == 0:
                raise ConfigError("target side must be odd when hstar > 0")
        if self.q < 2:
            raise ConfigError("need at least two colors")
        if self.j < 0:
            raise ConfigError("couplings must be nonnegative")
        object.__setattr__(self, "bcs", tuple(self.bcs))
        if not self.bcs or any(b not in ("free", "wired") for b in self.bcs):
            raise ConfigError("bcs must be a nonempty subset of free/wired")
        if self.sweeps <= 0:
            raise ConfigError("sweeps must be positive")


@dataclass(frozen=True)
class ScanRecord:
    alpha: float
    beta: float
    side: int
    bc: str
    mode: str  # "exact" | "mc"
    estimate: float
    stderr: float
    sweeps: int
    seed: int

    def __post_init__(self):
        if not -1e-9 <= self.estimate <= 1 + 1e-9:
            raise ConfigError("estimates are probabilities")
        object.__setattr__(self, "estimate",
                           min(max(self.estimate, 0.0), 1.0))
        if self.stderr < 0:
            raise ConfigError("stderr must be nonnegative")


# --- geometry ------------------------------------------------------------


def centered_box(dimension: int, side: int) -> Region:
    """Lattice box holding the coordinate origin; the exact center for odd
    sides, half a step off for even ones. Boxes of either parity nest."""
    origin = tuple(-(side // 2) for _ in range(dimension))
    return make_lattice_box(dimension, [side] * dimension, origin)


def _coord_ids(region: Region) -> dict:
    return {v.coords: v.id for v in region.graph.vertices}


@lru_cache(maxsize=None)
def _target_geometry(dimension: int, side: int):
    """(bond coord pairs, center coords, layer coords) of the target window."""
    box = centered_box(dimension, side)
    coords = {v.id: v.coords for v in box.graph.vertices}
    bonds = tuple((coords[a], coords[b]) for a, b in box.inner_bonds)
    layer = tuple(sorted(coords[i] for i in box.inner_layer()))
    return bonds, (0,) * dimension, layer


def _reach_components(n_sites: int, bond_sites, open_flags) -> np.ndarray:
    parent = list(range(n_sites))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b), is_open in zip(bond_sites, open_flags):
        if is_open:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return np.fromiter((find(x) for x in range(n_sites)),
                       dtype=np.int64, count=n_sites)


@lru_cache(maxsize=None)
def _reach_indicator(dimension: int, side: int) -> np.ndarray:
    """reach[mask] = 1 iff the center meets the window layer under mask."""
    bonds, center, layer = _target_geometry(dimension, side)
    sites = sorted({c for pair in bonds for c in pair})
    rank = {c: k for k, c in enumerate(sites)}
    bond_ranks = [(rank[a], rank[b]) for a, b in bonds]
    center_rank = rank[center]
    layer_ranks = np.array([rank[c] for c in layer], dtype=np.int64)
    n_masks = 1 << len(bonds)
    check_cap(n_masks, "target window bond configurations")
    out = np.zeros(n_masks, dtype=np.uint8)
    for mask in range(n_masks):
        roots = _reach_components(
            len(sites), bond_ranks,
            [(mask >> k) & 1 for k in range(len(bonds))])
        out[mask] = np.any(roots[layer_ranks] == roots[center_rank])
    return out


# --- one grid point ----------------------------------------------------------


def _field_for(config: ScanConfig, alpha: float, region: Region) -> FieldSpec:
    """Power-law boost of the first color, decaying from the origin."""
    sites = region.graph.vertex_ids()
    if config.hstar == 0:
        return zero_field(sites, config.q)
    if config.q == 2:
        return make_power_law_field(config.hstar, alpha, region,
                                    norm=config.norm)
    rows = {}
    for v in region.graph.vertices:
        dist = (math.sqrt(sum(c * c for c in v.coords))
                if config.norm == "euclidean" else max(abs(c) for c in v.coords))
        boost = config.hstar if dist == 0 else config.hstar / dist ** alpha
        rows[v.id] = (boost,) + (0.0,) * (config.q - 1)
    return FieldSpec(q=config.q, h=rows,
                     color_weights=(1.0,) * config.q)


def point_spec(config: ScanConfig, alpha: float, beta: float,
               side: int) -> ModelSpec:
    region = centered_box(config.dimension, side)
    couplings = CouplingConstants.uniform(region.all_bonds, config.j)
    return ModelSpec(region=region, couplings=couplings,
                     field=_field_for(config, alpha, region), beta=beta)


def _window_positions(dimension: int, window_side: int, spec: ModelSpec,
                      bc: GRCBoundary) -> np.ndarray:
    """Positions of the window's own bonds inside the scan domain edges."""
    bonds, _, _ = _target_geometry(dimension, window_side)
    ids = _coord_ids(spec.region)
    wanted = [edge(ids[a], ids[b]) for a, b in bonds]
    pos = {e: k for k, e in enumerate(domain_edges(spec, bc))}
    return np.array([pos[e] for e in wanted], dtype=np.int64)


def _point_record(config: ScanConfig, alpha: float, beta: float, side: int,
                  bc_name: str, grid_index: int) -> ScanRecord:
    spec = point_spec(config, alpha, beta, side)
    bc = GRCBoundary.free() if bc_name == "free" else GRCBoundary.wired(1)
    window = config.target_side if config.target_side is not None else side
    seed = int(np.random.SeedSequence(
        entropy=config.seed, spawn_key=(grid_index,)).generate_state(1)[0])

    n_domain = len(domain_edges(spec, bc))
    if n_domain <= config.exact_edge_limit:
        positions = _window_positions(config.dimension, window, spec, bc)
        table = exact_edge_measure(spec, bc, "r")
        masks = np.arange(len(table.weights), dtype=np.int64)
        bits = np.zeros(len(masks), dtype=np.int64)
        for j, p in enumerate(positions):
            bits |= ((masks >> int(p)) & 1) << j
        est = float(table.probabilities() @ _reach_indicator(
            config.dimension, window)[bits])
        return ScanRecord(alpha=alpha, beta=beta, side=side, bc=bc_name,
                          mode="exact", estimate=est, stderr=0.0,
                          sweeps=0, seed=seed)

    if window == side:
        # per-box rim event: sweep labels already merge the open domain
        # bonds, and any open path from the center out of the box meets the
        # rim through inner bonds, so the labels decide the event directly
        region = spec.region
        rank = {s: i for i, s in enumerate(sorted(region.inner))}
        ids = _coord_ids(region)
        center_rank = rank[ids[(0,) * config.dimension]]
        rim = np.array(sorted(rank[s] for s in region.inner_layer()),
                       dtype=np.int64)

        def fn(colors, open_mask, labels):
            return float(np.any(labels[rim] == labels[center_rank]))

    else:
        # fixed-window event: cluster labels see bonds outside the window,
        # so the window bits are re-joined on their own
        positions = _window_positions(config.dimension, window, spec, bc)
        k = len(positions)
        if k <= INDICATOR_LIMIT:
            indicator = _reach_indicator(config.dimension, window)
            powers = 1 << np.arange(k, dtype=np.int64)

            def fn(colors, open_mask, labels):
                return float(indicator[int(np.dot(open_mask[positions],
                                                  powers))])

        else:
            bonds, center, layer = _target_geometry(config.dimension, window)
            sites = sorted({c for pair in bonds for c in pair})
            rank = {c: i for i, c in enumerate(sites)}
            bond_ranks = [(rank[a], rank[b]) for a, b in bonds]
            layer_ranks = np.array([rank[c] for c in layer], dtype=np.int64)
            center_rank = rank[center]

            def fn(colors, open_mask, labels):
                roots = _reach_components(len(rank), bond_ranks,
                                          open_mask[positions])
                return float(np.any(roots[layer_ranks] == roots[center_rank]))

    series = estimate_functional(spec, bc, fn, sweeps=config.sweeps,
                                 burn_in=config.burn_in, seed=seed,
                                 n_batches=config.n_batches,
                                 label="rim-reach")
    return ScanRecord(alpha=alpha, beta=beta, side=side, bc=bc_name,
                      mode="mc", estimate=series.mean, stderr=series.stderr,
                      sweeps=config.sweeps, seed=seed)


# --- the driver ------------------------------------------------------------


def run_scan(config: ScanConfig, csv_path: Optional[str] = None) -> list:
    """Reach-probability records over the whole grid, optionally as CSV."""
    records = []
    points = list(itertools.product(config.alpha_grid, config.beta_grid,
                                    config.box_sides, config.bcs))
    for idx, (alpha, beta, side, bc_name) in enumerate(points):
        try:
            records.append(
                _point_record(config, alpha, beta, side, bc_name, idx))
        except ClusterFieldError as exc:
            raise ClusterFieldError(
                f"scan failed at alpha={alpha} beta={beta} side={side} "
                f"bc={bc_name}: {exc}") from exc
    if csv_path is not None:
        scan_to_csv(records, csv_path)
    return records


def scan_to_csv(records, path: str):
    with open(path, "w") as fh:
        fh.write(",".join(SCAN_COLUMNS) + "\n")
        for r in records:
            fh.write(f"{r.alpha!r},{r.beta!r},{r.side},{r.bc},{r.mode},"
                     f"{r.estimate!r},{r.stderr!r},{r.sweeps},{r.seed}\n")


def records_from_csv(path: str) -> list:
    records = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SCAN_COLUMNS:
            raise ConfigError(f"unexpected scan CSV header {header}")
        for line in fh:
            a, b, side, bc, mode, est, err, sweeps, seed = line.strip().split(",")
            records.append(ScanRecord(
                alpha=float(a), beta=float(b), side=int(side), bc=bc,
                mode=mode, estimate=float(est), stderr=float(err),
                sweeps=int(sweeps), seed=int(seed)))
    return records


# --- gap summaries ------------------------------------------------------------


def gap_records(records) -> list:
    """Wired-minus-free gap per (alpha, beta, side) where both rules ran."""
    by_key = {}
    for r in records:
        by_key.setdefault((r.alpha, r.beta, r.side), {})[r.bc] = r
    out = []
    for (alpha, beta, side), pair in sorted(by_key.items()):
        if "free" not in pair or "wired" not in pair:
            continue
        w, f = pair["wired"], pair["free"]
        out.append({
            "alpha": alpha, "beta": beta, "side": side,
            "gap": w.estimate - f.estimate,
            "stderr": math.hypot(w.stderr, f.stderr),
        })
    return out


def gap_trend(records) -> dict:
    """Indicative gap-versus-volume trends per (alpha, beta) pair."""
    gaps = gap_records(records)
    sides = sorted({g["side"] for g in gaps})
    if len(sides) < 2:
        raise ConfigError("gap trends need records covering at least two box sides")
    trends = []
    by_ab = {}
    for g in gaps:
        by_ab.setdefault((g["alpha"], g["beta"]), []).append(g)
    for (alpha, beta), rows in sorted(by_ab.items()):
        rows = sorted(rows, key=lambda g: g["side"])
        if len(rows) < 2:
            continue
        g = [r["gap"] for r in rows]
        s = [r["stderr"] for r in rows]
        significant = [abs(gi) > 3 * si for gi, si in zip(g, s)]
        slack = [3 * math.hypot(s[i], s[i + 1]) for i in range(len(g) - 1)]
        noninc = all(g[i + 1] <= g[i] + slack[i] for i in range(len(g) - 1))
        nondec = all(g[i + 1] >= g[i] - slack[i] for i in range(len(g) - 1))
        if not any(significant):
            label = "statistically-zero"
        elif noninc and nondec:
            label = "flat"
        elif noninc:
            label = "shrinking"
        elif nondec:
            label = "growing"
        else:
            label = "mixed"
        trends.append({
            "alpha": alpha, "beta": beta,
            "sides": [r["side"] for r in rows],
            "gaps": g, "stderrs": s,
            "classification": label,
            "significant_at_largest": bool(significant[-1]),
        })
    return {
        "indicative": True,
        "note": "finite-volume trend labels, not an infinite-volume claim",
        "trends": trends,
    }


def crossover_estimate(records, q: int = 2, j: float = 1.0,
                       side: Optional[int] = None) -> dict:
    """Bond density where the gap peaks, with quadratic refinement."""
    gaps = gap_records(records)
    if side is None:
        side = max(g["side"] for g in gaps)
    rows = sorted((g for g in gaps if g["side"] == side),
                  key=lambda g: g["beta"])
    if len(rows) < 3:
        raise ConfigError("crossover location needs at least three beta points")
    ps = [1.0 - math.exp(-q * g["beta"] * j) for g in rows]
    vals = [g["gap"] for g in rows]
    i = int(np.argmax(vals))
    p_star, gap_max = ps[i], vals[i]
    if 0 < i < len(rows) - 1:
        x0, x1, x2 = ps[i - 1], ps[i], ps[i + 1]
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
        if denom != 0:
            a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
            b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0)
                 + x0 * x0 * (y1 - y2)) / denom
            if a < 0:
                p_star = -b / (2 * a)
    return {"side": side, "p_star": p_star,
            "beta_star": -math.log(max(1.0 - p_star, 1e-300)) / (q * j),
            "gap_max": gap_max}


# --- the mutual-connection event ------------------------------------------------


def m_event_probability(spec: ModelSpec, bc: GRCBoundary, subwindow,
                        method: str = "auto", sweeps: int = 20000,
                        burn_in: Optional[int] = None, seed: int = 0) -> float:
    """Probability that all subwindow sites reaching the outside meet inside.

    The event holds when every pair of subwindow sites whose clusters touch
    the window boundary is connected through the window's own bonds. Sites
    that never reach the outside put no constraint; under the free rule the
    event is vacuous and the probability is 1.
    """
    window = spec.region
    sub = tuple(sorted(set(subwindow)))
    if not sub:
        raise ConfigError("subwindow must be nonempty")
    if not set(sub) <= window.inner:
        raise DomainMismatchError(
            "subwindow must sit inside the window's inner sites")
    if bc.kind == "free":
        return 1.0

    boundary = tuple(sorted(window.boundary))
    edges = tuple(domain_edges(spec, bc))
    vertices = tuple(sorted(window.inner)) + boundary
    rank = {v: i for i, v in enumerate(vertices)}
    bond_ranks = [(rank[a], rank[b]) for a, b in edges]
    sub_ranks = np.array([rank[x] for x in sub], dtype=np.int64)
    boundary_ranks = np.array([rank[b] for b in boundary], dtype=np.int64)

    def event(open_flags) -> float:
        roots = _reach_components(len(vertices), bond_ranks, open_flags)
        reaching = roots[sub_ranks][np.isin(roots[sub_ranks],
                                            roots[boundary_ranks])]
        return float(len(np.unique(reaching)) <= 1)

    n_edges = len(edges)
    if method == "auto":
        method = "exact" if n_edges <= 14 else "mc"
    if method == "exact":
        table = exact_edge_measure(spec, bc, "r")
        probs = table.probabilities()
        total = 0.0
        for mask in range(len(probs)):
            if probs[mask] == 0.0:
                continue
            total += probs[mask] * event(
                [(mask >> k) & 1 for k in range(n_edges)])
        return total
    if method != "mc":
        raise ConfigError(f"unknown method {method!r}")
    series = estimate_functional(
        spec, bc, lambda colors, open_mask, labels: event(open_mask),
        sweeps=sweeps, burn_in=burn_in, seed=seed, label="mutual-connection")
    return float(series.mean)
