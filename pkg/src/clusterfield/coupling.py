"""Joint spin-edge coupling: compatibility, joint weights, exact verifiers.

The joint measure puts bond factors on edges, an indicator that every open
edge joins equal colors, and per-site field factors exp(beta * h_{i, sigma_i})
on inner sites. Its spin marginal is the q-color measure at q*beta and its
edge marginal is the free/wired edge measure with unit color weights, up to
explicit constants that the verifiers here compute and check.

Spin configurations are enumerated in the same order as in spins.py: inner
sites sorted by id, site ranked k is the k-th little-endian base-q digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainMismatchError, check_cap
from .fields import field_sum, ising_values
from .graph import EdgeConfig
from .model import ModelSpec
from .randomcluster import (
    GRCBoundary,
    cluster_functional_expectation,
    connectivity,
    decompose,
    domain_edges,
    exact_edge_measure,
)
from .spins import (
    SpinBoundary,
    SpinConfig,
    exact_spin_measure,
    magnetization,
    mean_spin,
    spin_correlation,
    two_point_tau,
)


@dataclass(frozen=True)
class JointConfig:
    """One configuration of the coupled pair: colors on inner sites, bond states."""

    sigma: SpinConfig
    omega: EdgeConfig


def spin_code(spec: ModelSpec, sigma: SpinConfig) -> int:
    """Little-endian base-q code of the inner colors, matching _spin_arrays."""
    q = spec.q
    return sum(
        (sigma.color(s) - 1) * q ** k
        for k, s in enumerate(sorted(spec.region.inner))
    )


def require_unit_weights(spec: ModelSpec):
    if any(w != 1.0 for w in spec.field.color_weights):
        raise ConfigError("spin-partner operations need unit color weights")


def _check_joint_bc(bc: GRCBoundary):
    if bc.kind not in ("free", "wired"):
        raise ConfigError("the joint coupling is defined for free and wired rules")


def spin_boundary_partner(spec: ModelSpec, bc: GRCBoundary) -> SpinBoundary:
    """The spin boundary matching an edge-side boundary rule."""
    _check_joint_bc(bc)
    if bc.kind == "free":
        return SpinBoundary()
    return SpinBoundary.fixed_uniform(spec.region, bc.m)


def is_compatible(spec: ModelSpec, sigma: SpinConfig, omega: EdgeConfig,
                  bc: GRCBoundary = GRCBoundary.free()) -> bool:
    """True when every open edge joins equal colors (boundary pinned to m)."""
    _check_joint_bc(bc)

    def color(v):
        if v in spec.region.inner:
            return sigma.color(v)
        return bc.m

    return all(color(a) == color(b) for a, b in omega.open_edges())


def es_weight(spec: ModelSpec, sigma: SpinConfig, omega: EdgeConfig,
              bc: GRCBoundary = GRCBoundary.free(),
              convention: str = "p") -> float:
    """Unnormalized joint weight of one (sigma, omega) pair."""
    require_unit_weights(spec)
    _check_joint_bc(bc)
    if tuple(omega.edges) != tuple(domain_edges(spec, bc)):
        raise DomainMismatchError("configuration domain does not match the boundary rule")
    if not is_compatible(spec, sigma, omega, bc):
        return 0.0
    w = spec.edge_weights()
    out = 1.0
    for k, e in enumerate(omega.edges):
        is_open = omega.bits >> k & 1
        if convention == "p":
            out *= w.p[e] if is_open else 1.0 - w.p[e]
        elif convention == "r":
            if is_open:
                out *= w.r[e]
        else:
            raise ConfigError(f"unknown bond-factor convention {convention!r}")
    s = math.fsum(
        spec.field.value(i, sigma.color(i)) for i in sorted(spec.region.inner)
    )
    return 0.0 if s == -math.inf else out * math.exp(spec.beta * s)


# --- vectorized joint enumeration -----------------------------------------


def _spin_arrays(spec: ModelSpec):
    """(sites, colors, field_weight): colors is (n_configs, n_sites), 1-based."""
    sites = tuple(sorted(spec.region.inner))
    q = spec.q
    n = len(sites)
    n_states = q ** n
    check_cap(n_states, "spin configuration space")
    codes = np.arange(n_states, dtype=np.int64)
    colors = np.empty((n_states, n), dtype=np.int64)
    for k in range(n):
        colors[:, k] = 1 + (codes // q ** k) % q
    h_mat = np.array(
        [[spec.field.value(s, p) for p in range(1, q + 1)] for s in sites]
    )
    picked = h_mat[np.arange(n)[None, :], colors - 1]
    total = picked.sum(axis=1)
    field_weight = np.where(np.isneginf(total), 0.0, np.exp(spec.beta * total))
    return sites, colors, field_weight


def _edge_agreement(spec: ModelSpec, bc: GRCBoundary, sites, colors):
    """Per domain edge, the boolean agreement vector over spin configurations."""
    idx = {s: k for k, s in enumerate(sites)}
    inner = spec.region.inner
    same = []
    for a, b in domain_edges(spec, bc):
        if a in inner and b in inner:
            same.append(colors[:, idx[a]] == colors[:, idx[b]])
        else:
            i = a if a in inner else b
            same.append(colors[:, idx[i]] == bc.m)
    return same


def _bond_factors_all_masks(spec: ModelSpec, edges, convention: str):
    n_masks = 1 << len(edges)
    check_cap(n_masks, "edge configuration space")
    masks = np.arange(n_masks, dtype=np.int64)
    w = spec.edge_weights()
    out = np.ones(n_masks)
    for k, e in enumerate(edges):
        is_open = (masks >> k & 1).astype(bool)
        if convention == "p":
            out *= np.where(is_open, w.p[e], 1.0 - w.p[e])
        elif convention == "r":
            out *= np.where(is_open, w.r[e], 1.0)
        else:
            raise ConfigError(f"unknown bond-factor convention {convention!r}")
    return out


def joint_scan(spec: ModelSpec, bc: GRCBoundary, convention: str = "p"):
    """Exhaustive joint enumeration.

    Returns (edge_unnorm, spin_unnorm, z): the two unnormalized marginals of
    the joint weight and the joint normalization, computed by brute force so
    they can be checked against the closed-form measures.
    """
    require_unit_weights(spec)
    _check_joint_bc(bc)
    sites, colors, field_weight = _spin_arrays(spec)
    edges = tuple(domain_edges(spec, bc))
    same = _edge_agreement(spec, bc, sites, colors)
    bond = _bond_factors_all_masks(spec, edges, convention)

    n_masks = len(bond)
    edge_unnorm = np.empty(n_masks)
    spin_unnorm = np.zeros(len(field_weight))
    for mask in range(n_masks):
        compat = None
        m, k = mask, 0
        while m:
            if m & 1:
                compat = same[k] if compat is None else compat & same[k]
            m >>= 1
            k += 1
        if compat is None:
            sigma_part = field_weight
        else:
            sigma_part = field_weight * compat
        edge_unnorm[mask] = bond[mask] * sigma_part.sum()
        spin_unnorm += bond[mask] * sigma_part
    z = math.fsum(edge_unnorm.tolist())
    if not z > 0:
        raise ConfigError("degenerate joint table: total weight is zero")
    return edge_unnorm, spin_unnorm, z


def joint_distribution(spec: ModelSpec, bc: GRCBoundary,
                       convention: str = "p") -> np.ndarray:
    """Normalized joint probability matrix, entry [edge_mask, spin_code].

    Row index is the bitmask over domain_edges(spec, bc), column index the
    little-endian base-q code over sorted inner sites. Materializes the full
    product space, so it is meant for total-variation checks on small graphs.
    """
    require_unit_weights(spec)
    _check_joint_bc(bc)
    sites, colors, field_weight = _spin_arrays(spec)
    edges = tuple(domain_edges(spec, bc))
    check_cap((1 << len(edges)) * len(field_weight), "joint configuration space")
    same = _edge_agreement(spec, bc, sites, colors)
    bond = _bond_factors_all_masks(spec, edges, convention)
    joint = np.empty((len(bond), len(field_weight)))
    for mask in range(len(bond)):
        compat = np.ones(len(field_weight), dtype=bool)
        m, k = mask, 0
        while m:
            if m & 1:
                compat &= same[k]
            m >>= 1
            k += 1
        joint[mask] = bond[mask] * field_weight * compat
    z = joint.sum()
    if not z > 0:
        raise ConfigError("degenerate joint table: total weight is zero")
    return joint / z


def joint_partition_function(spec: ModelSpec, bc: GRCBoundary,
                             convention: str = "p") -> float:
    """Z of the joint measure with the edge sum done per-edge in closed form.

    Summing the two bond states of one edge gives (1-p) + p * [equal colors],
    so Z reduces to a spin sum of per-edge factors. This avoids enumerating
    edge configurations but still sums over every spin configuration.
    """
    require_unit_weights(spec)
    _check_joint_bc(bc)
    sites, colors, field_weight = _spin_arrays(spec)
    same = _edge_agreement(spec, bc, sites, colors)
    w = spec.edge_weights()
    total = field_weight.copy()
    for k, e in enumerate(domain_edges(spec, bc)):
        if convention == "p":
            total *= (1.0 - w.p[e]) + w.p[e] * same[k]
        elif convention == "r":
            total *= 1.0 + w.r[e] * same[k]
        else:
            raise ConfigError(f"unknown bond-factor convention {convention!r}")
    return math.fsum(total.tolist())


def wired_boundary_constant(spec: ModelSpec, bc: GRCBoundary) -> float:
    """exp(beta * sum of the pinned color's field over boundary sites).

    The edge measure's pinned cluster factors include boundary sites; the
    joint measure's field factors do not. Their normalizations differ by
    exactly this constant.
    """
    if bc.kind == "free":
        return 1.0
    s = math.fsum(spec.field.value(i, bc.m) for i in sorted(spec.region.boundary))
    return math.exp(spec.beta * s)


def _pm_convention(spec: ModelSpec) -> bool:
    """True when the field is two-color and antisymmetric, so +-1 spin
    quantities (which read the field through its h, -h form) are defined."""
    return spec.q == 2 and all(
        row[1] == -row[0] for row in spec.field.h.values()
    )


def verify_partition_identities(spec: ModelSpec, bc: GRCBoundary) -> dict:
    """Check the normalization identities tying spin, joint, and edge measures.

    - spin Z at q*beta equals exp(q beta sum_E J) times the joint Z;
    - for q=2, the +-1 model Z at beta equals exp(beta sum_E J) times joint Z;
    - the edge Z (p convention) equals the joint Z times the wired constant;
    - the r-convention edge Z equals the p-convention one times prod(1 + r_e).
    """
    require_unit_weights(spec)
    _check_joint_bc(bc)
    edges = tuple(domain_edges(spec, bc))
    j_sum = math.fsum(spec.couplings.get(e) for e in edges)

    z_es = joint_partition_function(spec, bc, "p")
    z_spin = exact_spin_measure(spec, spin_boundary_partner(spec, bc), "potts").z
    c_spin = math.exp(spec.q * spec.beta * j_sum)
    spin_err = abs(z_spin - c_spin * z_es) / z_spin

    table_p = exact_edge_measure(spec, bc, "p")
    const = wired_boundary_constant(spec, bc)
    es_rc_err = abs(table_p.z - const * z_es) / table_p.z

    table_r = exact_edge_measure(spec, bc, "r")
    w = spec.edge_weights()
    one_plus_r = math.prod(1.0 + w.r[e] for e in edges)
    r_p_err = abs(table_r.z - one_plus_r * table_p.z) / table_r.z

    out = {
        "bc": bc.kind,
        "z_spin": z_spin,
        "z_joint": z_es,
        "z_edge_p": table_p.z,
        "z_edge_r": table_r.z,
        "spin_joint_rel_err": spin_err,
        "joint_edge_rel_err": es_rc_err,
        "r_p_rel_err": r_p_err,
    }
    if _pm_convention(spec):
        z_ising = exact_spin_measure(spec, spin_boundary_partner(spec, bc), "ising").z
        ising_err = abs(z_ising - math.exp(-spec.beta * j_sum) * z_spin) / z_ising
        out["z_spin_pm"] = z_ising
        out["pm_rel_err"] = ising_err
    out["max_rel_err"] = max(v for k, v in out.items() if k.endswith("rel_err"))
    return out


def verify_marginals(spec: ModelSpec, bc: GRCBoundary) -> dict:
    """Total-variation distance between brute-force joint marginals and the
    closed-form spin and edge measures."""
    edge_unnorm, spin_unnorm, z = joint_scan(spec, bc, "p")
    table = exact_edge_measure(spec, bc, "p")
    dist = exact_spin_measure(spec, spin_boundary_partner(spec, bc), "potts")
    tv_edge = 0.5 * math.fsum(
        abs(float(a) - float(b))
        for a, b in zip(edge_unnorm / z, table.probabilities())
    )
    tv_spin = 0.5 * math.fsum(
        abs(float(a) - float(b))
        for a, b in zip(spin_unnorm / z, dist.probabilities())
    )
    return {"bc": bc.kind, "tv_edge": tv_edge, "tv_spin": tv_spin, "z_joint": z}


# --- conditional color law given the edges ----------------------------------


def cluster_color_distribution(spec: ModelSpec, members, pinned_to=None) -> np.ndarray:
    """Color probabilities of one open cluster given the edge configuration."""
    if pinned_to is not None:
        out = np.zeros(spec.q)
        out[pinned_to - 1] = 1.0
        return out
    logw = np.array(
        [field_sum(spec.field, spec.beta, members, p) for p in range(1, spec.q + 1)]
    )
    top = logw.max()
    if top == -math.inf:
        raise ConfigError("cluster forbids every color")
    w = np.exp(logw - top)
    return w / w.sum()


def conditional_color_distributions(spec: ModelSpec, omega: EdgeConfig,
                                    bc: GRCBoundary = GRCBoundary.free()) -> dict:
    """Per-cluster color laws given omega; wired pins boundary-touching clusters."""
    require_unit_weights(spec)
    _check_joint_bc(bc)
    dec = decompose(spec, bc, omega)
    boundary = spec.region.boundary
    out = {}
    for root, members in dec.members.items():
        pin = None
        if bc.kind == "wired" and any(v in boundary for v in members):
            pin = bc.m
        inner_members = [v for v in members if v in spec.region.inner]
        if not inner_members and pin is None:
            continue
        out[root] = cluster_color_distribution(
            spec, inner_members if pin is None else members, pinned_to=pin
        )
    return out


def sample_colors_given_edges(spec: ModelSpec, omega: EdgeConfig,
                              bc: GRCBoundary, rng: np.random.Generator) -> SpinConfig:
    """Reference sampler: draw cluster colors independently given the edges."""
    dec = decompose(spec, bc, omega)
    laws = conditional_color_distributions(spec, omega, bc)
    values = {}
    colors = {}
    for root, probs in laws.items():
        colors[root] = 1 + rng.choice(spec.q, p=probs)
    for v in sorted(spec.region.inner):
        values[v] = colors[dec.label(v)]
    return SpinConfig(values)


# --- correlation, single-spin, magnetization identities ----------------------


def pair_agreement_kernel(spec: ModelSpec, members_t, members_u) -> float:
    """Probability two distinct clusters draw the same color, from field sums."""
    bt = np.array([field_sum(spec.field, spec.beta, members_t, p)
                   for p in range(1, spec.q + 1)])
    bu = np.array([field_sum(spec.field, spec.beta, members_u, p)
                   for p in range(1, spec.q + 1)])
    top_t, top_u = bt.max(), bu.max()
    if top_t == -math.inf or top_u == -math.inf:
        raise ConfigError("cluster forbids every color")
    et = np.exp(bt - top_t)
    eu = np.exp(bu - top_u)
    return float((et * eu).sum() / (et.sum() * eu.sum()))


def verify_correlation_connectivity(spec: ModelSpec, x: int, y: int) -> dict:
    """Two-point agreement vs connectivity plus the disjoint-cluster kernel.

    Free boundary. For q=2 the kernel reduces to a product of tanh of the
    cluster field sums, which is checked as well, along with the +-1
    correlation being twice the two-point function.
    """
    require_unit_weights(spec)
    bc = GRCBoundary.free()
    table = exact_edge_measure(spec, bc, "p")
    tau_spin = two_point_tau(spec, x, y)
    phi = connectivity(table, x, y)

    def kernel_term(omega, dec):
        if dec.label(x) == dec.label(y):
            return 0.0
        kt = dec.members[dec.label(x)]
        ku = dec.members[dec.label(y)]
        return pair_agreement_kernel(spec, kt, ku) - 1.0 / spec.q

    tau_edge = (1.0 - 1.0 / spec.q) * phi + cluster_functional_expectation(
        table, kernel_term
    )
    out = {
        "tau_spin": tau_spin,
        "tau_edge": tau_edge,
        "connectivity": phi,
        "kernel_abs_err": abs(tau_spin - tau_edge),
    }

    if _pm_convention(spec):
        h = ising_values(spec.field.restricted(spec.region.inner))

        def tanh_term(omega, dec):
            if dec.label(x) == dec.label(y):
                return 0.0
            bt = spec.beta * math.fsum(h[i] for i in dec.members[dec.label(x)])
            bu = spec.beta * math.fsum(h[i] for i in dec.members[dec.label(y)])
            return math.tanh(bt) * math.tanh(bu)

        tau_tanh = 0.5 * phi + 0.5 * cluster_functional_expectation(table, tanh_term)
        dist = exact_spin_measure(spec, SpinBoundary(), "ising")
        corr = spin_correlation(dist, x, y)
        out["tau_edge_tanh"] = tau_tanh
        out["tanh_abs_err"] = abs(tau_spin - tau_tanh)
        out["pm_correlation"] = corr
        out["pm_abs_err"] = abs(corr - 2.0 * tau_edge)

    out["max_abs_err"] = max(v for k, v in out.items() if k.endswith("abs_err"))
    return out


def verify_single_spin(spec: ModelSpec, x: int,
                       bc: GRCBoundary = GRCBoundary.free()) -> dict:
    """Site color marginal vs the expected conditional cluster-color law."""
    require_unit_weights(spec)
    _check_joint_bc(bc)
    if x not in spec.region.inner:
        raise DomainMismatchError("site must be inner")
    table = exact_edge_measure(spec, bc, "p")
    dist = exact_spin_measure(spec, spin_boundary_partner(spec, bc), "potts")
    spin_side = dist.site_marginal(x)

    boundary = spec.region.boundary

    def color_prob(p):
        def term(omega, dec):
            members = dec.members[dec.label(x)]
            pin = None
            if bc.kind == "wired" and any(v in boundary for v in members):
                pin = bc.m
            probs = cluster_color_distribution(spec, members, pinned_to=pin)
            return float(probs[p - 1])

        return cluster_functional_expectation(table, term)

    edge_side = np.array([color_prob(p) for p in range(1, spec.q + 1)])
    out = {
        "bc": bc.kind,
        "spin_side": spin_side,
        "edge_side": edge_side,
        "marginal_abs_err": float(np.max(np.abs(spin_side - edge_side))),
    }

    if _pm_convention(spec) and bc.kind == "free":
        h = ising_values(spec.field.restricted(spec.region.inner))

        def tanh_term(omega, dec):
            b = spec.beta * math.fsum(h[i] for i in dec.members[dec.label(x)])
            return math.tanh(b)

        mean_edge = cluster_functional_expectation(table, tanh_term)
        mean_exact = mean_spin(dist, x)
        out["mean_spin"] = mean_exact
        out["mean_spin_edge"] = mean_edge
        out["tanh_abs_err"] = abs(mean_exact - mean_edge)

    out["max_abs_err"] = max(
        v for k, v in out.items() if k.endswith("abs_err")
    )
    return out


def verify_magnetization(spec: ModelSpec) -> dict:
    """Volume-averaged mean spin vs cluster tanh sums (q=2, free boundary)."""
    require_unit_weights(spec)
    if spec.q != 2:
        raise ConfigError("magnetization is defined for q=2")
    table = exact_edge_measure(spec, GRCBoundary.free(), "p")
    dist = exact_spin_measure(spec, SpinBoundary(), "potts")
    h = ising_values(spec.field.restricted(spec.region.inner))
    n = len(spec.region.inner)

    def term(omega, dec):
        total = 0.0
        for members in dec.members.values():
            b = spec.beta * math.fsum(h[i] for i in members)
            total += len(members) * math.tanh(b)
        return total / n

    mag_edge = cluster_functional_expectation(table, term)
    mag_spin = magnetization(dist)
    return {
        "magnetization_spin": mag_spin,
        "magnetization_edge": mag_edge,
        "abs_err": abs(mag_spin - mag_edge),
    }


def verify_zero_field_reductions(spec: ModelSpec, x: int, y: int) -> dict:
    """At h == 0: tau = (1 - 1/q) connectivity; for q=2 the +-1 correlation
    equals the connectivity."""
    require_unit_weights(spec)
    if any(v != 0.0 for vals in spec.field.h.values() for v in vals):
        raise ConfigError("zero-field reduction needs h == 0")
    table = exact_edge_measure(spec, GRCBoundary.free(), "p")
    phi = connectivity(table, x, y)
    tau = two_point_tau(spec, x, y)
    out = {
        "connectivity": phi,
        "tau": tau,
        "tau_abs_err": abs(tau - (1.0 - 1.0 / spec.q) * phi),
    }
    if spec.q == 2:
        dist = exact_spin_measure(spec, SpinBoundary(), "ising")
        corr = spin_correlation(dist, x, y)
        out["pm_correlation"] = corr
        out["pm_abs_err"] = abs(corr - phi)
    out["max_abs_err"] = max(v for k, v in out.items() if k.endswith("abs_err"))
    return out


# --- factorized spin sums over compatible configurations (q=2) --------------


def compatible_field_sum(spec: ModelSpec, omega: EdgeConfig):
    """(brute force, closed form) for the field sum over compatible spins.

    The closed form is the product over open clusters of 2 cosh of the
    cluster field sum; q=2, h,-h convention, free boundary.
    """
    require_unit_weights(spec)
    if spec.q != 2:
        raise ConfigError("the cosh factorization needs q=2")
    h = ising_values(spec.field.restricted(spec.region.inner))
    sites, colors, field_weight = _spin_arrays(spec)
    same = _edge_agreement(spec, GRCBoundary.free(), sites, colors)
    compat = np.ones(len(field_weight), dtype=bool)
    for k in range(len(omega.edges)):
        if omega.bits >> k & 1:
            compat &= same[k]
    brute = math.fsum(field_weight[compat].tolist())

    dec = decompose(spec, GRCBoundary.free(), omega)
    closed = 1.0
    for members in dec.members.values():
        closed *= 2.0 * math.cosh(spec.beta * math.fsum(h[i] for i in members))
    return brute, closed


def pinned_field_sum(spec: ModelSpec, omega: EdgeConfig, pins: dict):
    """Same as compatible_field_sum with some sites pinned to +-1 spins.

    Clusters holding a pinned site contribute exp(pin * cluster field sum);
    conflicting pins inside one cluster give zero.
    """
    require_unit_weights(spec)
    if spec.q != 2:
        raise ConfigError("the cosh factorization needs q=2")
    h = ising_values(spec.field.restricted(spec.region.inner))
    sites, colors, field_weight = _spin_arrays(spec)
    same = _edge_agreement(spec, GRCBoundary.free(), sites, colors)
    compat = np.ones(len(field_weight), dtype=bool)
    for k in range(len(omega.edges)):
        if omega.bits >> k & 1:
            compat &= same[k]
    idx = {s: k for k, s in enumerate(sites)}
    for site, spin in pins.items():
        want = 1 if spin == 1 else 2
        compat &= colors[:, idx[site]] == want
    brute = math.fsum(field_weight[compat].tolist())

    dec = decompose(spec, GRCBoundary.free(), omega)
    closed = 1.0
    for members in dec.members.values():
        signs = {pins[v] for v in members if v in pins}
        b = spec.beta * math.fsum(h[i] for i in members)
        if len(signs) > 1:
            closed = 0.0
            break
        if signs:
            closed *= math.exp(next(iter(signs)) * b)
        else:
            closed *= 2.0 * math.cosh(b)
    return brute, closed


# --- randomized verification battery -----------------------------------------


def _draw_spec(region, q: int, rng: np.random.Generator) -> ModelSpec:
    from .fields import CouplingConstants, FieldSpec

    beta = float(rng.uniform(1e-3, 2.0))
    couplings = CouplingConstants(
        values={e: float(rng.uniform(0.0, 2.0)) for e in region.all_bonds}
    )
    sites = region.inner | region.boundary
    # alternate two-color draws between the (h, -h) convention, which the
    # plus/minus partition identity needs, and generic per-color fields
    if q == 2 and rng.random() < 0.5:
        h = {}
        for s in sites:
            x = float(rng.uniform(-2.0, 2.0))
            h[s] = (x, -x)
    else:
        h = {s: tuple(float(x) for x in rng.uniform(-2.0, 2.0, size=q))
             for s in sites}
    field = FieldSpec(q=q, h=h, color_weights=(1.0,) * q)
    return ModelSpec(region=region, couplings=couplings, field=field, beta=beta)


def _battery_boundaries(spec: ModelSpec, max_wired_edges: int):
    bcs = [GRCBoundary.free()]
    if spec.region.boundary and len(spec.region.all_bonds) <= max_wired_edges:
        bcs.append(GRCBoundary.wired(1))
    return bcs


def run_verification_suite(regions: dict, draws: int = 20, seed: int = 0,
                           tolerance: float = 1e-10,
                           checks=("identities", "marginals", "correlation",
                                   "single_spin", "zero_field"),
                           max_wired_edges: int = 12) -> list:
    """Randomized exact-identity battery over a family of regions.

    Returns one record per (region, draw, boundary, check) with the measured
    error and a pass flag. Draws rotate q through 2, 3, 4; beta in (0, 2],
    couplings in [0, 2], fields in [-2, 2].
    """
    rng = np.random.default_rng(seed)
    records = []
    for name, region in regions.items():
        inner = sorted(region.inner)
        for t in range(draws):
            q = 2 + t % 3
            spec = _draw_spec(region, q, rng)
            if len(inner) >= 2:
                x, y = inner[0], inner[-1]
            else:
                x = y = inner[0]
            for bc in _battery_boundaries(spec, max_wired_edges):
                if "identities" in checks:
                    rec = verify_partition_identities(spec, bc)
                    records.append({
                        "region": name, "draw": t, "q": q, "bc": bc.kind,
                        "check": "identities", "error": rec["max_rel_err"],
                        "passed": rec["max_rel_err"] < tolerance,
                    })
                if "marginals" in checks:
                    rec = verify_marginals(spec, bc)
                    err = max(rec["tv_edge"], rec["tv_spin"])
                    records.append({
                        "region": name, "draw": t, "q": q, "bc": bc.kind,
                        "check": "marginals", "error": err,
                        "passed": err < tolerance,
                    })
                if "single_spin" in checks:
                    rec = verify_single_spin(spec, x, bc)
                    records.append({
                        "region": name, "draw": t, "q": q, "bc": bc.kind,
                        "check": "single_spin", "error": rec["max_abs_err"],
                        "passed": rec["max_abs_err"] < tolerance,
                    })
            if "correlation" in checks and x != y:
                rec = verify_correlation_connectivity(spec, x, y)
                records.append({
                    "region": name, "draw": t, "q": q, "bc": "free",
                    "check": "correlation", "error": rec["max_abs_err"],
                    "passed": rec["max_abs_err"] < tolerance,
                })
            if "magnetization" in checks and _pm_convention(spec):
                rec = verify_magnetization(spec)
                records.append({
                    "region": name, "draw": t, "q": q, "bc": "free",
                    "check": "magnetization", "error": rec["abs_err"],
                    "passed": rec["abs_err"] < tolerance,
                })
        if "zero_field" in checks and len(inner) >= 2:
            from .fields import zero_field

            for t in range(min(draws, 5)):
                q = 2 + t % 3
                spec = _draw_spec(region, q, rng).with_field(
                    zero_field(region.inner | region.boundary, q)
                )
                rec = verify_zero_field_reductions(spec, inner[0], inner[-1])
                records.append({
                    "region": name, "draw": t, "q": q, "bc": "free",
                    "check": "zero_field", "error": rec["max_abs_err"],
                    "passed": rec["max_abs_err"] < 1e-12,
                })
    return records
