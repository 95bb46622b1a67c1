"""Lattice-condition, ratio, and stochastic-domination checkers.

Everything here works on exhaustive weight vectors indexed by edge bitmasks
(bit k of the index is the state of edge k). Margins are reported raw and
cross-multiplied, W(a)W(b) - W(c)W(d), so zero weights never divide.

Domination between two measures on the same edge cube is decided three ways:
single-edge conditional ratios (the workhorse criterion), exhaustive up-set
expectations (tiny cubes only), and exactly via max-flow (a monotone coupling
exists iff the flow saturates, with a violating up-set read off the min cut).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import networkx as nx
import numpy as np

from .errors import CapExceededError, ConfigError, DomainMismatchError
from .fields import CouplingConstants, FieldSpec, field_leq, field_summary
from .graph import EdgeConfig, free_region, inner_graph, make_lattice_box, subregion
from .model import ModelSpec
from .randomcluster import GRCBoundary, WeightTable, exact_edge_measure

FULL_PAIRWISE_LIMIT = 8
REDUCTION_LIMIT = 12
UPSET_LIMIT = 6
FLOW_LIMIT = 10


def _as_weights(table_or_weights) -> np.ndarray:
    if isinstance(table_or_weights, WeightTable):
        return np.asarray(table_or_weights.weights, dtype=float)
    w = np.asarray(table_or_weights, dtype=float)
    if w.ndim != 1 or len(w) & (len(w) - 1):
        raise ConfigError("weights must be a flat vector of length 2^edges")
    return w


def _n_edges(weights: np.ndarray) -> int:
    return int(len(weights)).bit_length() - 1


# --- FKG lattice condition ----------------------------------------------------


@dataclass(frozen=True)
class FKGReport:
    passed: bool
    worst_margin: float
    worst_pair: tuple  # (xi, zeta) masks attaining the worst margin
    n_checked: int
    method: str


def _fkg_full(weights: np.ndarray, tolerance: float) -> FKGReport:
    masks = np.arange(len(weights), dtype=np.int64)
    joins = np.bitwise_or.outer(masks, masks)
    meets = np.bitwise_and.outer(masks, masks)
    margin = weights[joins] * weights[meets] - np.outer(weights, weights)
    worst_flat = int(np.argmin(margin))
    xi, zeta = divmod(worst_flat, len(weights))
    worst = float(margin[xi, zeta])
    return FKGReport(
        passed=worst >= -tolerance,
        worst_margin=worst,
        worst_pair=(int(xi), int(zeta)),
        n_checked=margin.size,
        method="full-pairwise",
    )


def _fkg_reduction(weights: np.ndarray, tolerance: float) -> FKGReport:
    """Check W(s|ef) W(s) >= W(s|e) W(s|f) over states with e, f closed.

    For strictly positive weights this is equivalent to the full condition;
    with zeros it is the standard necessary battery, still exact on the
    tables produced here (checked against full pairwise in tests).
    """
    n = _n_edges(weights)
    masks = np.arange(len(weights), dtype=np.int64)
    worst = math.inf
    worst_pair = (0, 0)
    checked = 0
    for e in range(n):
        for f in range(e + 1, n):
            base = masks[((masks >> e) & 1 == 0) & ((masks >> f) & 1 == 0)]
            m = (
                weights[base | (1 << e) | (1 << f)] * weights[base]
                - weights[base | (1 << e)] * weights[base | (1 << f)]
            )
            checked += len(base)
            k = int(np.argmin(m))
            if m[k] < worst:
                worst = float(m[k])
                worst_pair = (int(base[k] | (1 << e)), int(base[k] | (1 << f)))
    return FKGReport(
        passed=worst >= -tolerance,
        worst_margin=worst,
        worst_pair=worst_pair,
        n_checked=checked,
        method="two-coordinate",
    )


def fkg_lattice_check(table_or_weights, tolerance: float = 1e-12,
                      method: str = "auto") -> FKGReport:
    """W(a or b) W(a and b) >= W(a) W(b) for every pair of edge configs.

    Margins are reported raw. The condition is scale invariant while the
    margins are quadratic in the total mass, so the pass threshold is
    tolerance times the squared mass; unnormalized tables then tolerate
    the same relative roundoff as normalized ones.
    """
    weights = _as_weights(table_or_weights)
    total = float(weights.sum())
    tolerance = tolerance * (total * total if total > 0 else 1.0)
    n = _n_edges(weights)
    if method == "auto":
        method = "full" if n <= FULL_PAIRWISE_LIMIT else "reduction"
    if method == "full":
        if n > FULL_PAIRWISE_LIMIT:
            raise CapExceededError(
                f"full pairwise check limited to {FULL_PAIRWISE_LIMIT} edges, got {n}"
            )
        return _fkg_full(weights, tolerance)
    if method == "reduction":
        if n > REDUCTION_LIMIT:
            raise CapExceededError(
                f"two-coordinate check limited to {REDUCTION_LIMIT} edges, got {n}"
            )
        return _fkg_reduction(weights, tolerance)
    raise ConfigError(f"unknown method {method!r}")


def positive_association_hypothesis(spec: ModelSpec, bc: GRCBoundary):
    """Field dominance summary for the window the boundary rule sees.

    A wired rule additionally needs its color inside the shared top set,
    since pinned clusters weight that color alone.
    """
    if bc.kind == "free":
        scope = sorted(spec.region.inner)
    else:
        scope = sorted(spec.region.inner | spec.region.boundary)
    summary = field_summary(spec.field, scope)
    if bc.kind == "wired" and bc.m not in summary.shared_top:
        summary = replace(summary, positive_association_hypothesis=False)
    return summary


# --- Holley single-edge and pairwise ratios -----------------------------------


@dataclass(frozen=True)
class HolleyReport:
    passed: bool
    worst_margin: float
    worst_case: tuple
    n_checked: int
    method: str


_PAIR_CACHE: dict = {}


def _comparable_pairs(n: int):
    """All (xi, zeta) with xi <= zeta coordinatewise, as two aligned arrays."""
    if n not in _PAIR_CACHE:
        zetas = []
        xis = []
        for zeta in range(1 << n):
            s = zeta
            while True:
                xis.append(s)
                zetas.append(zeta)
                if s == 0:
                    break
                s = (s - 1) & zeta
        _PAIR_CACHE[n] = (
            np.array(xis, dtype=np.int64),
            np.array(zetas, dtype=np.int64),
        )
    return _PAIR_CACHE[n]


def holley_check(lo, hi, tolerance: float = 1e-12) -> HolleyReport:
    """Single-edge ratio condition over every comparable pair.

    For all xi <= zeta and every edge e,
    W_hi(zeta with e open) W_lo(xi with e closed)
    >= W_hi(zeta with e closed) W_lo(xi with e open),
    cross-multiplied so zero weights never divide. Margins are raw; the
    pass threshold scales with the product of the two total masses, since
    each side carries one factor of each vector.
    """
    w_lo = _as_weights(lo)
    w_hi = _as_weights(hi)
    scale = float(w_lo.sum()) * float(w_hi.sum())
    tolerance = tolerance * (scale if scale > 0 else 1.0)
    if len(w_lo) != len(w_hi):
        raise DomainMismatchError("weight vectors live on different cubes")
    n = _n_edges(w_lo)
    if n > REDUCTION_LIMIT:
        raise CapExceededError(
            f"ratio check limited to {REDUCTION_LIMIT} edges, got {n}"
        )
    xi, zeta = _comparable_pairs(n)
    worst = math.inf
    worst_case = (0, 0, 0)
    checked = 0
    for e in range(max(n, 0)):
        b = 1 << e
        m = w_hi[zeta | b] * w_lo[xi & ~b] - w_hi[zeta & ~b] * w_lo[xi | b]
        checked += len(m)
        k = int(np.argmin(m)) if len(m) else 0
        if len(m) and m[k] < worst:
            worst = float(m[k])
            worst_case = (int(xi[k]), int(zeta[k]), e)
    if n == 0:
        worst = 0.0
    return HolleyReport(
        passed=worst >= -tolerance,
        worst_margin=worst,
        worst_case=worst_case,
        n_checked=checked,
        method="ratio-pairs",
    )


def holley_pairwise_check(lo, hi, tolerance: float = 1e-12) -> HolleyReport:
    """W_hi(a or b) W_lo(a and b) >= W_hi(a) W_lo(b) over all pairs.

    Raw margins with the mass-product threshold, as in holley_check.
    """
    w_lo = _as_weights(lo)
    w_hi = _as_weights(hi)
    scale = float(w_lo.sum()) * float(w_hi.sum())
    tolerance = tolerance * (scale if scale > 0 else 1.0)
    if len(w_lo) != len(w_hi):
        raise DomainMismatchError("weight vectors live on different cubes")
    n = _n_edges(w_lo)
    if n > FULL_PAIRWISE_LIMIT:
        raise CapExceededError(
            f"pairwise check limited to {FULL_PAIRWISE_LIMIT} edges, got {n}"
        )
    masks = np.arange(len(w_lo), dtype=np.int64)
    joins = np.bitwise_or.outer(masks, masks)
    meets = np.bitwise_and.outer(masks, masks)
    margin = w_hi[joins] * w_lo[meets] - np.outer(w_hi, w_lo)
    worst_flat = int(np.argmin(margin))
    a, b = divmod(worst_flat, len(w_lo))
    worst = float(margin[a, b])
    return HolleyReport(
        passed=worst >= -tolerance,
        worst_margin=worst,
        worst_case=(int(a), int(b)),
        n_checked=margin.size,
        method="pairwise",
    )


# --- up-sets -------------------------------------------------------------------


@dataclass(frozen=True)
class UpSetFamily:
    """An increasing event on the edge cube, stored by its minimal elements."""

    generators: tuple

    def __post_init__(self):
        for a in self.generators:
            for b in self.generators:
                if a != b and a & b == a:
                    raise ConfigError(
                        f"generators {a} and {b} are comparable; keep minimal ones"
                    )

    @classmethod
    def from_states(cls, states):
        states = sorted(set(int(s) for s in states))
        minimal = [
            s for s in states
            if not any(t != s and t & s == t for t in states)
        ]
        return cls(generators=tuple(minimal))

    def membership(self, n_edges: int) -> np.ndarray:
        masks = np.arange(1 << n_edges, dtype=np.int64)
        member = np.zeros(1 << n_edges, dtype=bool)
        for g in self.generators:
            member |= (masks & g) == g
        return member

    def measure(self, probs) -> float:
        probs = np.asarray(probs, dtype=float)
        member = self.membership(_n_edges(probs))
        return float(probs[member].sum())


def enumerate_up_sets(n_edges: int) -> np.ndarray:
    """All upward-closed subsets of the n-edge cube, as state bitmasks.

    Bit s of an entry is set when state s belongs to the up-set. Counts grow
    like the Dedekind numbers, so n_edges is capped at 6.
    """
    if n_edges < 0:
        raise ConfigError("need a nonnegative edge count")
    if n_edges > UPSET_LIMIT:
        raise CapExceededError(
            f"up-set enumeration limited to {UPSET_LIMIT} edges, got {n_edges}"
        )
    ups = np.array([0, 1], dtype=np.uint64)
    for k in range(n_edges):
        half = np.uint64(1 << k)
        # an up-set of the doubled cube is (lower A, upper B) with A subset B
        a = ups[:, None]
        b = ups[None, :]
        pairs = (a & ~b) == 0
        ai, bi = np.nonzero(pairs)
        ups = ups[ai] | (ups[bi] << np.uint64(half))
    return np.sort(ups)


def upset_order_check(p_lo, p_hi, tolerance: float = 1e-12) -> dict:
    """max over up-sets U of P_lo(U) - P_hi(U); domination needs it <= 0."""
    p_lo = np.asarray(p_lo, dtype=float)
    p_hi = np.asarray(p_hi, dtype=float)
    if len(p_lo) != len(p_hi):
        raise DomainMismatchError("probability vectors live on different cubes")
    n = _n_edges(p_lo)
    ups = enumerate_up_sets(n)
    diff = p_lo - p_hi
    states = np.arange(len(p_lo), dtype=np.uint64)
    worst = -math.inf
    worst_up = 0
    chunk = 1 << 18
    for start in range(0, len(ups), chunk):
        block = ups[start: start + chunk]
        member = ((block[:, None] >> states[None, :]) & np.uint64(1)).astype(float)
        vals = member @ diff
        k = int(np.argmax(vals))
        if vals[k] > worst:
            worst = float(vals[k])
            worst_up = int(block[k])
    return {
        "max_violation": worst,
        "worst_up_set": worst_up,
        "n_up_sets": len(ups),
        "passed": worst <= tolerance,
    }


# --- Strassen: domination iff a monotone coupling exists ------------------------


@dataclass(frozen=True)
class DominationCertificate:
    dominates: bool
    flow_value: float
    witness_up_set: Optional[tuple]  # violating states, or None
    coupling: Optional[dict]         # (lo_state, hi_state) -> mass, or None
    method: str = "max-flow"


def strassen_domination(p_lo, p_hi, tolerance: float = 1e-9,
                        max_edges: int = FLOW_LIMIT) -> DominationCertificate:
    """Decide p_hi >= p_lo stochastically by max-flow on the comparability graph.

    Success returns the monotone coupling carried by the flow; failure returns
    an up-set where the order is violated, read off the minimum cut.
    """
    p_lo = np.asarray(p_lo, dtype=float)
    p_hi = np.asarray(p_hi, dtype=float)
    if len(p_lo) != len(p_hi):
        raise DomainMismatchError("probability vectors live on different cubes")
    n = _n_edges(p_lo)
    if n > max_edges:
        raise CapExceededError(f"flow decision limited to {max_edges} edges, got {n}")

    lo_states = [int(s) for s in np.nonzero(p_lo > 0)[0]]
    hi_states = [int(t) for t in np.nonzero(p_hi > 0)[0]]
    g = nx.DiGraph()
    for s in lo_states:
        g.add_edge("src", ("lo", s), capacity=float(p_lo[s]))
    for t in hi_states:
        g.add_edge(("hi", t), "snk", capacity=float(p_hi[t]))
    for s in lo_states:
        for t in hi_states:
            if s & ~t == 0:  # s <= t coordinatewise
                g.add_edge(("lo", s), ("hi", t), capacity=math.inf)

    value, flow = nx.maximum_flow(g, "src", "snk")
    if value >= 1.0 - tolerance:
        coupling = {}
        for s in lo_states:
            for t, mass in flow[("lo", s)].items():
                if mass > 0:
                    coupling[(s, t[1])] = mass
        return DominationCertificate(
            dominates=True, flow_value=float(value),
            witness_up_set=None, coupling=coupling,
        )

    cut_value, (src_side, _) = nx.minimum_cut(g, "src", "snk")
    seeds = [s for s in lo_states if ("lo", s) in src_side]
    masks = np.arange(len(p_lo), dtype=np.int64)
    member = np.zeros(len(p_lo), dtype=bool)
    for s in seeds:
        member |= (masks & s) == s  # masks above s pointwise
    member |= np.isin(masks, [t for t in hi_states if ("hi", t) in src_side])
    witness = tuple(int(m) for m in masks[member])
    return DominationCertificate(
        dominates=False, flow_value=float(value),
        witness_up_set=witness, coupling=None,
    )


def domination_report(lo: WeightTable, hi: WeightTable,
                      tolerance: float = 1e-12) -> dict:
    """Bundle of the three domination checks for two tables on one cube."""
    if tuple(lo.edges) != tuple(hi.edges):
        raise DomainMismatchError("tables live on different edge domains")
    n = len(lo.edges)
    out = {"holley": holley_check(lo.weights, hi.weights, tolerance)}
    if n <= FLOW_LIMIT:
        out["strassen"] = strassen_domination(lo.probabilities(), hi.probabilities())
    if n <= 5:
        out["up_sets"] = upset_order_check(
            lo.probabilities(), hi.probabilities(), tolerance
        )
    checks = [out["holley"].passed]
    if "strassen" in out:
        checks.append(out["strassen"].dominates)
    if "up_sets" in out:
        checks.append(out["up_sets"]["passed"])
    out["passed"] = all(checks)
    return out


def positive_association_check(probs, tolerance: float = 1e-12,
                               max_edges: int = 5) -> dict:
    """P(U and W) >= P(U) P(W) over every pair of up-sets, exhaustively."""
    probs = np.asarray(probs, dtype=float)
    n = _n_edges(probs)
    if n > max_edges:
        raise CapExceededError(
            f"pairwise up-set association limited to {max_edges} edges, got {n}"
        )
    ups = enumerate_up_sets(n)
    states = np.arange(len(probs), dtype=np.uint64)
    member = ((ups[:, None] >> states[None, :]) & np.uint64(1)).astype(float)
    mu = member @ probs
    inter = (member * probs[None, :]) @ member.T
    margin = inter - np.outer(mu, mu)
    worst_flat = int(np.argmin(margin))
    a, b = divmod(worst_flat, len(ups))
    worst = float(margin[a, b])
    return {
        "worst_margin": worst,
        "worst_pair": (int(ups[a]), int(ups[b])),
        "n_up_sets": len(ups),
        "passed": worst >= -tolerance,
    }


# --- probability marginals over sub-cubes --------------------------------------


def marginal_probs(probs, keep) -> np.ndarray:
    """Marginal law over the kept edge positions (in the order given)."""
    probs = np.asarray(probs, dtype=float)
    n = _n_edges(probs)
    keep = list(keep)
    if any(not 0 <= k < n for k in keep):
        raise DomainMismatchError("kept positions outside the cube")
    masks = np.arange(len(probs), dtype=np.int64)
    key = np.zeros(len(probs), dtype=np.int64)
    for j, k in enumerate(keep):
        key |= ((masks >> k) & 1) << j
    out = np.zeros(1 << len(keep))
    np.add.at(out, key, probs)
    return out


def table_marginal_by_edges(table: WeightTable, edges) -> np.ndarray:
    keep = []
    for e in edges:
        try:
            keep.append(table.edges.index(tuple(e)))
        except ValueError:
            raise DomainMismatchError(f"edge {e} not in the table domain")
    return marginal_probs(table.probabilities(), keep)


# --- randomized monotonicity batteries ------------------------------------------


def _top_color_field(sites, q: int, rng: np.random.Generator,
                     color_weights=None) -> FieldSpec:
    """Random field with the same descending color order at every site, so
    the positive-association hypothesis holds with unit weights."""
    if color_weights is None:
        color_weights = (1.0,) * q
    h = {}
    for s in sites:
        row = np.sort(rng.uniform(-2.0, 2.0, size=q))[::-1]
        h[s] = tuple(float(x) for x in row)
    return FieldSpec(q=q, h=h, color_weights=tuple(color_weights))


def _random_spec(region, q: int, rng: np.random.Generator,
                 color_weights=None) -> ModelSpec:
    beta = float(rng.uniform(0.05, 1.5))
    couplings = CouplingConstants(
        values={e: float(rng.uniform(0.0, 2.0)) for e in region.all_bonds}
    )
    field = _top_color_field(region.inner | region.boundary, q, rng, color_weights)
    return ModelSpec(region=region, couplings=couplings, field=field, beta=beta)


def _bumped_field(field: FieldSpec, rng: np.random.Generator) -> FieldSpec:
    """Raise color 1 by a nonnegative amount per site: stays above the
    original in the gap order."""
    h = {}
    for s, row in field.h.items():
        row = list(row)
        row[0] = row[0] + float(rng.uniform(0.0, 2.0))
        h[s] = tuple(row)
    return FieldSpec(q=field.q, h=h, color_weights=field.color_weights)


def _fkg_battery_regions():
    from .corpus import corpus

    return corpus()


def fkg_suite(draws: int = 10, seed: int = 0, tolerance: float = 1e-12) -> list:
    """Lattice-condition battery over the corpus, free and max-wired tables."""
    records = []
    rng = np.random.default_rng(seed)
    for name, region in _fkg_battery_regions().items():
        for t in range(draws):
            q = 2 + t % 2
            if t == draws - 1 and q >= 2:
                # one draw with non-unit weights and two tied top colors;
                # the tie passes on combined mass 0.6 + 0.7 >= 1
                weights = (0.6, 0.7) + (1.0,) * (q - 2)
                spec = _random_spec(region, q, rng, color_weights=weights)
                h = {
                    s: (0.0, 0.0) + tuple(
                        float(x)
                        for x in np.sort(rng.uniform(-2.0, 0.0, size=q - 2))[::-1]
                    )
                    for s in spec.field.h
                }
                spec = spec.with_field(
                    FieldSpec(q=q, h=h, color_weights=weights)
                )
            else:
                spec = _random_spec(region, q, rng)
            bcs = [GRCBoundary.free()]
            if region.boundary:
                bcs.append(GRCBoundary.wired(1))
            for bc in bcs:
                n = len(region.inner_bonds if bc.kind == "free" else region.all_bonds)
                if n > REDUCTION_LIMIT:
                    continue
                summary = positive_association_hypothesis(spec, bc)
                if not summary.positive_association_hypothesis:
                    continue
                table = exact_edge_measure(spec, bc, "r")
                report = fkg_lattice_check(table, tolerance)
                records.append({
                    "region": name, "draw": t, "q": q, "bc": bc.kind,
                    "check": "fkg", "margin": report.worst_margin,
                    "method": report.method, "passed": report.passed,
                })
    return records


def field_monotonicity_suite(draws: int = 10, seed: int = 1,
                             tolerance: float = 1e-12) -> list:
    """Ordered field pairs must give stochastically ordered tables."""
    from .corpus import corpus

    regions = {"triangle": corpus()["triangle"], "box22": corpus()["box22"]}
    records = []
    rng = np.random.default_rng(seed)
    for name, region in regions.items():
        for t in range(draws):
            q = 2 + t % 2
            spec_lo = _random_spec(region, q, rng)
            field_hi = _bumped_field(spec_lo.field, rng)
            if not field_leq(spec_lo.field, field_hi):
                raise ConfigError("constructed field pair is not ordered")
            spec_hi = spec_lo.with_field(field_hi)
            bcs = [GRCBoundary.free()]
            if region.boundary:
                bcs.append(GRCBoundary.wired(1))
            for bc in bcs:
                lo = exact_edge_measure(spec_lo, bc, "r")
                hi = exact_edge_measure(spec_hi, bc, "r")
                if len(lo.edges) <= FLOW_LIMIT:
                    rep = domination_report(lo, hi, tolerance)
                    passed = rep["passed"]
                    margin = rep["holley"].worst_margin
                else:
                    rep = holley_check(lo.weights, hi.weights, tolerance)
                    cert = strassen_domination(
                        table_marginal_by_edges(lo, region.inner_bonds),
                        table_marginal_by_edges(hi, region.inner_bonds),
                    )
                    passed = rep.passed and cert.dominates
                    margin = rep.worst_margin
                records.append({
                    "region": name, "draw": t, "q": q, "bc": bc.kind,
                    "check": "field-order", "margin": margin, "passed": passed,
                })
    return records


def coupling_monotonicity_suite(draws: int = 10, seed: int = 2,
                                tolerance: float = 1e-12) -> list:
    """Pointwise larger couplings must give stochastically larger tables."""
    from .corpus import corpus

    regions = {"path3": corpus()["path3"], "cycle4": corpus()["cycle4"],
               "box22": corpus()["box22"]}
    records = []
    rng = np.random.default_rng(seed)
    for name, region in regions.items():
        for t in range(draws):
            q = 2 + t % 2
            spec_lo = _random_spec(region, q, rng)
            j_hi = {
                e: j + float(rng.uniform(0.0, 1.5))
                for e, j in spec_lo.couplings.values.items()
            }
            spec_hi = spec_lo.with_couplings(CouplingConstants(values=j_hi))
            bcs = [GRCBoundary.free()]
            if region.boundary:
                bcs.append(GRCBoundary.wired(1))
            for bc in bcs:
                lo = exact_edge_measure(spec_lo, bc, "r")
                hi = exact_edge_measure(spec_hi, bc, "r")
                if len(lo.edges) <= FLOW_LIMIT:
                    rep = domination_report(lo, hi, tolerance)
                    passed = rep["passed"]
                    margin = rep["holley"].worst_margin
                else:
                    rep = holley_check(lo.weights, hi.weights, tolerance)
                    cert = strassen_domination(
                        table_marginal_by_edges(lo, region.inner_bonds),
                        table_marginal_by_edges(hi, region.inner_bonds),
                    )
                    passed = rep.passed and cert.dominates
                    margin = rep.worst_margin
                records.append({
                    "region": name, "draw": t, "q": q, "bc": bc.kind,
                    "check": "coupling-order", "margin": margin, "passed": passed,
                })
    return records


def boundary_sandwich_suite(draws: int = 5, seed: int = 3,
                            tolerance: float = 1e-12) -> list:
    """free <= general(any fixed outside) <= max-wired on a central window."""
    ambient = inner_graph(make_lattice_box(2, [4, 4]))
    coord_id = {ambient.coords_of(v): v for v in ambient.vertex_ids()}
    window = subregion(
        ambient, {coord_id[(1, 1)], coord_id[(1, 2)], coord_id[(2, 1)], coord_id[(2, 2)]}
    )
    outside_edges = tuple(
        e for e in ambient.edges if e not in set(window.all_bonds)
    )
    records = []
    rng = np.random.default_rng(seed)
    for t in range(draws):
        q = 2 + t % 2
        couplings = CouplingConstants(
            values={e: float(rng.uniform(0.0, 2.0)) for e in ambient.edges}
        )
        field = _top_color_field(ambient.vertex_ids(), q, rng)
        beta = float(rng.uniform(0.05, 1.2))
        spec = ModelSpec(region=window, couplings=couplings, field=field, beta=beta)

        free_marg = table_marginal_by_edges(
            exact_edge_measure(spec, GRCBoundary.free(), "r"), window.inner_bonds
        )
        wired_marg = table_marginal_by_edges(
            exact_edge_measure(spec, GRCBoundary.wired(1), "r"), window.inner_bonds
        )
        outside = EdgeConfig(outside_edges, int(rng.integers(0, 1 << len(outside_edges))))
        general_marg = table_marginal_by_edges(
            exact_edge_measure(spec, GRCBoundary.general(outside), "r"),
            window.inner_bonds,
        )
        lower = strassen_domination(free_marg, general_marg)
        upper = strassen_domination(general_marg, wired_marg)
        records.append({
            "draw": t, "q": q, "check": "sandwich",
            "lower": lower.dominates, "upper": upper.dominates,
            "passed": lower.dominates and upper.dominates,
        })
        ends = strassen_domination(free_marg, wired_marg)
        ups = upset_order_check(free_marg, wired_marg, tolerance)
        records.append({
            "draw": t, "q": q, "check": "free-vs-wired",
            "passed": ends.dominates and ups["passed"],
        })
    return records


def volume_monotonicity_suite(draws: int = 5, seed: int = 4,
                              tolerance: float = 1e-12) -> list:
    """Growing the window raises free tables and lowers max-wired tables,
    compared on the common inner bonds."""
    records = []
    rng = np.random.default_rng(seed)

    # free: corner 2x2 window inside the bare 3x3 grid
    ambient = inner_graph(make_lattice_box(2, [3, 3]))
    coord_id = {ambient.coords_of(v): v for v in ambient.vertex_ids()}
    window = subregion(
        ambient, {coord_id[(0, 0)], coord_id[(0, 1)], coord_id[(1, 0)], coord_id[(1, 1)]}
    )
    big = free_region(ambient)
    for t in range(draws):
        q = 2 + t % 2
        couplings = CouplingConstants(
            values={e: float(rng.uniform(0.0, 2.0)) for e in ambient.edges}
        )
        field = _top_color_field(ambient.vertex_ids(), q, rng)
        beta = float(rng.uniform(0.05, 1.2))
        spec_small = ModelSpec(region=window, couplings=couplings,
                               field=field, beta=beta)
        spec_big = ModelSpec(region=big, couplings=couplings,
                             field=field, beta=beta)
        small = table_marginal_by_edges(
            exact_edge_measure(spec_small, GRCBoundary.free(), "r"),
            window.inner_bonds,
        )
        large = table_marginal_by_edges(
            exact_edge_measure(spec_big, GRCBoundary.free(), "r"),
            window.inner_bonds,
        )
        cert = strassen_domination(small, large)
        ups = upset_order_check(small, large, tolerance)
        records.append({
            "draw": t, "q": q, "check": "volume-free",
            "passed": cert.dominates and ups["passed"],
        })

    # free again on region boxes: 1x2 inside 2x2, matched through coordinates
    lam = make_lattice_box(2, [1, 2])
    box = make_lattice_box(2, [2, 2])
    box_coord = {box.graph.coords_of(v): v for v in box.graph.vertex_ids()}
    lam_bond = lam.inner_bonds[0]
    box_bond = tuple(sorted(
        (box_coord[lam.graph.coords_of(lam_bond[0])],
         box_coord[lam.graph.coords_of(lam_bond[1])])
    ))
    for t in range(draws):
        q = 2 + t % 2
        j_box = {e: float(rng.uniform(0.0, 2.0)) for e in box.all_bonds}
        j_lam = {e: float(rng.uniform(0.0, 2.0)) for e in lam.all_bonds}
        j_lam[lam_bond] = j_box[box_bond]
        beta = float(rng.uniform(0.05, 1.2))
        f_box = _top_color_field(box.inner | box.boundary, q, rng)
        f_lam_h = {}
        for s in lam.inner | lam.boundary:
            c = lam.graph.coords_of(s)
            if c in box_coord and box_coord[c] in f_box.h:
                f_lam_h[s] = f_box.h[box_coord[c]]
            else:
                row = rng.uniform(-2.0, 2.0, size=q)
                row[0] = row.max() + float(rng.uniform(0.0, 1.0))
                f_lam_h[s] = tuple(float(x) for x in row)
        spec_lam = ModelSpec(region=lam, couplings=CouplingConstants(values=j_lam),
                             field=FieldSpec(q=q, h=f_lam_h, color_weights=(1.0,) * q),
                             beta=beta)
        spec_box = ModelSpec(region=box, couplings=CouplingConstants(values=j_box),
                             field=f_box, beta=beta)
        small = table_marginal_by_edges(
            exact_edge_measure(spec_lam, GRCBoundary.free(), "r"), [lam_bond]
        )
        large = table_marginal_by_edges(
            exact_edge_measure(spec_box, GRCBoundary.free(), "r"), [box_bond]
        )
        cert = strassen_domination(small, large)
        ups = upset_order_check(small, large, tolerance)
        records.append({
            "draw": t, "q": q, "check": "volume-free-boxes",
            "passed": cert.dominates and ups["passed"],
        })

    # wired: 1x2 box inside the 2x2 box, matched through coordinates.
    # conditioning the big wired measure on "every non-shared bond open"
    # reproduces the small wired measure only if couplings and fields agree
    # on every bond of the small window, outward bonds included
    small_region = make_lattice_box(2, [1, 2])
    big_region = make_lattice_box(2, [2, 2])
    small_coord = {small_region.graph.coords_of(v): v
                   for v in small_region.graph.vertex_ids()}
    big_coord = {big_region.graph.coords_of(v): v
                 for v in big_region.graph.vertex_ids()}
    common_small = list(small_region.all_bonds)
    common_big = [
        tuple(sorted((big_coord[small_region.graph.coords_of(a)],
                      big_coord[small_region.graph.coords_of(b)])))
        for a, b in common_small
    ]
    if any(e not in big_region.all_bonds for e in common_big):
        raise ConfigError("small window bonds do not embed in the big box")
    for t in range(draws):
        q = 2 + t % 2
        j_small = {e: float(rng.uniform(0.0, 2.0)) for e in small_region.all_bonds}
        j_big = {e: float(rng.uniform(0.0, 2.0)) for e in big_region.all_bonds}
        # couplings must agree on the common bonds (matched by coordinates)
        for e_small, e_big in zip(common_small, common_big):
            j_big[e_big] = j_small[e_small]
        beta = float(rng.uniform(0.05, 1.2))
        f_small = _top_color_field(
            small_region.inner | small_region.boundary, q, rng
        )
        f_big_h = {}
        big_sites = big_region.inner | big_region.boundary
        for s in big_sites:
            c = big_region.graph.coords_of(s)
            if c in small_coord and small_coord[c] in f_small.h:
                f_big_h[s] = f_small.h[small_coord[c]]
            else:
                row = rng.uniform(-2.0, 2.0, size=q)
                row[0] = row.max() + float(rng.uniform(0.0, 1.0))
                f_big_h[s] = tuple(float(x) for x in row)
        f_big = FieldSpec(q=q, h=f_big_h, color_weights=(1.0,) * q)
        spec_small = ModelSpec(region=small_region,
                               couplings=CouplingConstants(values=j_small),
                               field=f_small, beta=beta)
        spec_big = ModelSpec(region=big_region,
                             couplings=CouplingConstants(values=j_big),
                             field=f_big, beta=beta)
        small = table_marginal_by_edges(
            exact_edge_measure(spec_small, GRCBoundary.wired(1), "r"), common_small
        )
        large = table_marginal_by_edges(
            exact_edge_measure(spec_big, GRCBoundary.wired(1), "r"), common_big
        )
        cert = strassen_domination(large, small)  # smaller window dominates
        records.append({
            "draw": t, "q": q, "check": "volume-wired",
            "passed": cert.dominates,
        })
    return records


def beta_scaling_suite(draws: int = 5, seed: int = 5,
                       tolerance: float = 1e-12) -> list:
    """Tables at (beta, J, h) and (1, beta J, beta h) are identical."""
    from .corpus import corpus

    records = []
    rng = np.random.default_rng(seed)
    regions = {"triangle": corpus()["triangle"], "box22": corpus()["box22"]}
    for name, region in regions.items():
        for t in range(draws):
            q = 2 + t % 2
            spec = _random_spec(region, q, rng)
            scaled_field = FieldSpec(
                q=q,
                h={s: tuple(spec.beta * v for v in row)
                   for s, row in spec.field.h.items()},
                color_weights=spec.field.color_weights,
            )
            spec_scaled = ModelSpec(
                region=region,
                couplings=spec.couplings.scaled(spec.beta),
                field=scaled_field,
                beta=1.0,
            )
            bcs = [GRCBoundary.free()]
            if region.boundary:
                bcs.append(GRCBoundary.wired(1))
            err = 0.0
            for bc in bcs:
                a = exact_edge_measure(spec, bc, "r").probabilities()
                b = exact_edge_measure(spec_scaled, bc, "r").probabilities()
                err = max(err, float(np.max(np.abs(a - b))))
            records.append({
                "region": name, "draw": t, "q": q, "check": "beta-scaling",
                "error": err, "passed": err < tolerance,
            })

    # scaling composed with the field/coupling orders: boundary-reach
    # probabilities are nondecreasing in beta at fixed (J, h)
    from .randomcluster import percolation

    betas = [0.2, 0.5, 0.9, 1.4]
    for name, region, bc, site in (
        ("box33-free", make_lattice_box(2, [3, 3]), GRCBoundary.free(), 4),
        ("box22-wired", make_lattice_box(2, [2, 2]), GRCBoundary.wired(1), 0),
    ):
        couplings = CouplingConstants.uniform(region.all_bonds, 1.0)
        field = _top_color_field(region.inner | region.boundary, 2, rng)
        values = []
        for beta in betas:
            spec = ModelSpec(region=region, couplings=couplings,
                             field=field, beta=beta)
            table = exact_edge_measure(spec, bc, "r")
            values.append(percolation(table, site))
        ok = all(b >= a - tolerance for a, b in zip(values, values[1:]))
        records.append({
            "region": name, "check": "beta-monotone-percolation",
            "values": values, "passed": ok,
        })
    return records


def specification_consistency(seed: int = 6, tolerance: float = 1e-12) -> list:
    """The general rule is the true conditional of a larger free window, and
    its all-closed / all-open extremes match the free and max-wired rules."""
    records = []
    rng = np.random.default_rng(seed)

    # conditional check: corner 2x2 window in the bare 3x3 grid
    ambient = inner_graph(make_lattice_box(2, [3, 3]))
    coord_id = {ambient.coords_of(v): v for v in ambient.vertex_ids()}
    window = subregion(
        ambient, {coord_id[(0, 0)], coord_id[(0, 1)], coord_id[(1, 0)], coord_id[(1, 1)]}
    )
    window_edges = tuple(window.all_bonds)
    outside_edges = tuple(e for e in ambient.edges if e not in set(window_edges))
    big = free_region(ambient)

    q = 2
    couplings = CouplingConstants(
        values={e: float(rng.uniform(0.1, 2.0)) for e in ambient.edges}
    )
    field = _top_color_field(ambient.vertex_ids(), q, rng)
    beta = 0.7
    spec_big = ModelSpec(region=big, couplings=couplings, field=field, beta=beta)
    spec_win = ModelSpec(region=window, couplings=couplings, field=field, beta=beta)

    full = exact_edge_measure(spec_big, GRCBoundary.free(), "r")
    pos_win = [full.edges.index(e) for e in window_edges]
    pos_out = [full.edges.index(e) for e in outside_edges]
    worst = 0.0
    for out_bits in range(1 << len(outside_edges)):
        outside = EdgeConfig(outside_edges, out_bits)
        gen = exact_edge_measure(spec_win, GRCBoundary.general(outside), "r")
        cond = np.empty(1 << len(window_edges))
        for wmask in range(1 << len(window_edges)):
            mask = 0
            for j, k in enumerate(pos_win):
                mask |= ((wmask >> j) & 1) << k
            for j, k in enumerate(pos_out):
                mask |= ((out_bits >> j) & 1) << k
            cond[wmask] = full.weights[mask]
        cond /= cond.sum()
        worst = max(worst, float(np.max(np.abs(cond - gen.probabilities()))))
    records.append({
        "check": "general-is-conditional", "error": worst,
        "passed": worst < tolerance,
    })

    # all-closed outside over the inner window bonds reduces to free
    closed = EdgeConfig.all_closed(outside_edges + tuple(window.outward_bonds))
    gen = exact_edge_measure(
        spec_win, GRCBoundary.general(closed, window="inner"), "r"
    )
    free_table = exact_edge_measure(spec_win, GRCBoundary.free(), "r")
    err = float(np.max(np.abs(gen.probabilities() - free_table.probabilities())))
    hmax = {s: max(field.h[s]) for s in window.inner}
    expected_ratio = math.exp(-beta * math.fsum(hmax.values()))
    ratio = gen.weights / free_table.weights
    ratio_err = float(np.max(np.abs(ratio - expected_ratio)))
    records.append({
        "check": "all-closed-is-free", "error": max(err, ratio_err),
        "passed": max(err, ratio_err) < tolerance,
    })

    # all-open outside over the full window bonds pins to the wired rule,
    # with off-color sites forbidden outside a central window of the 4x4 grid
    ambient4 = inner_graph(make_lattice_box(2, [4, 4]))
    coord_id4 = {ambient4.coords_of(v): v for v in ambient4.vertex_ids()}
    window4 = subregion(
        ambient4,
        {coord_id4[(1, 1)], coord_id4[(1, 2)], coord_id4[(2, 1)], coord_id4[(2, 2)]},
    )
    outside4 = tuple(e for e in ambient4.edges if e not in set(window4.all_bonds))
    couplings4 = CouplingConstants(
        values={e: float(rng.uniform(0.1, 2.0)) for e in ambient4.edges}
    )
    base = _top_color_field(ambient4.vertex_ids(), q, rng)
    h = {}
    for s in ambient4.vertex_ids():
        row = list(base.h[s])
        if s not in window4.inner:
            row = [row[0]] + [-math.inf] * (q - 1)
        h[s] = tuple(row)
    pinned = FieldSpec(q=q, h=h, color_weights=(1.0,) * q)
    spec4 = ModelSpec(region=window4, couplings=couplings4, field=pinned, beta=0.6)
    gen4 = exact_edge_measure(
        spec4, GRCBoundary.general(EdgeConfig.all_open(outside4)), "r"
    )
    wired4 = exact_edge_measure(spec4, GRCBoundary.wired(1), "r")
    err4 = float(np.max(np.abs(gen4.probabilities() - wired4.probabilities())))
    records.append({
        "check": "all-open-is-wired", "error": err4,
        "passed": err4 < tolerance,
    })
    return records


def monotonicity_suite(seed: int = 0, tolerance: float = 1e-12,
                       draws: int = 10) -> list:
    """Every stochastic-order battery in one list of records."""
    records = []
    records += field_monotonicity_suite(draws=draws, seed=seed + 1,
                                        tolerance=tolerance)
    records += coupling_monotonicity_suite(draws=draws, seed=seed + 2,
                                           tolerance=tolerance)
    records += boundary_sandwich_suite(draws=max(3, draws // 2), seed=seed + 3,
                                       tolerance=tolerance)
    records += volume_monotonicity_suite(draws=max(3, draws // 2), seed=seed + 4,
                                         tolerance=tolerance)
    records += beta_scaling_suite(draws=max(3, draws // 2), seed=seed + 5,
                                  tolerance=tolerance)
    return records
