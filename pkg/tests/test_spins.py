"""Exact spin measure tests: closed forms, conventions, boundaries."""

import io
import math

import numpy as np
import pytest

from clusterfield.errors import CapExceededError, ConfigError, DomainMismatchError
from clusterfield.fields import CouplingConstants, FieldSpec, ising_field, zero_field
from clusterfield.graph import FiniteGraph, free_region, make_lattice_box
from clusterfield.model import ModelSpec
from clusterfield.spins import (
    SpinBoundary,
    SpinConfig,
    distribution_to_csv,
    exact_spin_measure,
    ising_energy,
    magnetization,
    mean_spin,
    potts_energy,
    spin_correlation,
    two_point_tau,
)


def single_site_spec(h: float, beta: float) -> ModelSpec:
    g = FiniteGraph(vertices={0: (0,)}, edges=())
    region = free_region(g)
    return ModelSpec(
        region=region,
        couplings=CouplingConstants({}),
        field=ising_field({0: h}),
        beta=beta,
    )


def pair_spec(j: float, beta: float, h: dict, q: int = 2) -> ModelSpec:
    g = FiniteGraph(vertices={0: (0,), 1: (1,)}, edges=((0, 1),))
    region = free_region(g)
    if q == 2:
        field = ising_field(h)
    else:
        field = zero_field(q, set(h))
    return ModelSpec(
        region=region,
        couplings=CouplingConstants({(0, 1): j}),
        field=field,
        beta=beta,
    )


def test_single_site_closed_form():
    # P(+) = e^{beta h} / (e^{beta h} + e^{-beta h}), <sigma> = tanh(beta h)
    for h, beta in [(0.7, 0.9), (-1.3, 0.4), (0.0, 1.0), (2.0, 0.25)]:
        spec = single_site_spec(h, beta)
        dist = exact_spin_measure(spec, model="ising")
        plus = math.exp(beta * h) / (math.exp(beta * h) + math.exp(-beta * h))
        marg = dist.site_marginal(0)
        assert abs(marg[0] - plus) < 1e-14
        assert abs(mean_spin(dist, 0) - math.tanh(beta * h)) < 1e-14
        assert abs(magnetization(dist) - math.tanh(beta * h)) < 1e-14


def test_ising_and_potts_measures_coincide():
    # in the h,-h convention only the raw weights differ, not probabilities
    spec = pair_spec(0.8, 0.6, {0: 0.5, 1: -0.2})
    a = exact_spin_measure(spec, model="ising")
    b = exact_spin_measure(spec, model="potts")
    assert np.allclose(a.probabilities(), b.probabilities(), atol=1e-14)
    # and the raw weights genuinely differ by a configuration-free constant
    ratio = a.weights / b.weights
    assert np.allclose(ratio, ratio[0])


def test_pair_closed_form_correlation():
    j, beta = 1.1, 0.7
    spec = pair_spec(j, beta, {0: 0.0, 1: 0.0})
    dist = exact_spin_measure(spec, model="ising")
    # zero field: <sigma_0 sigma_1> = tanh(beta J)
    assert abs(spin_correlation(dist, 0, 1) - math.tanh(beta * j)) < 1e-14
    assert abs(mean_spin(dist, 0)) < 1e-14
    tau = two_point_tau(spec, 0, 1)
    assert abs(tau - 0.5 * math.tanh(beta * j)) < 1e-14


def test_two_point_tau_errors():
    spec = pair_spec(1.0, 0.5, {0: 0.0, 1: 0.0})
    with pytest.raises(ConfigError):
        two_point_tau(spec, 0, 0)
    with pytest.raises(DomainMismatchError):
        two_point_tau(spec, 0, 7)


def test_fixed_boundary_tilts_the_center():
    region = make_lattice_box(1, 3)  # sites 0,1,2 inner; boundary two ends
    sites = sorted(region.inner | region.boundary)
    spec = ModelSpec(
        region=region,
        couplings=CouplingConstants.uniform(region.all_bonds, 1.0),
        field=ising_field({s: 0.0 for s in sites}),
        beta=0.5,
    )
    plus = exact_spin_measure(spec, SpinBoundary.fixed_uniform(region, 1))
    minus = exact_spin_measure(spec, SpinBoundary.fixed_uniform(region, 2))
    free = exact_spin_measure(spec, SpinBoundary())
    center = sorted(region.inner)[1]
    assert mean_spin(plus, center) > 0
    assert mean_spin(minus, center) < 0
    assert abs(mean_spin(plus, center) + mean_spin(minus, center)) < 1e-14
    assert abs(mean_spin(free, center)) < 1e-14
    # agreement with a same-sign uniform field on the boundary sites is exact:
    # a fixed +1 boundary acts like h_j = +J on each outward bond endpoint
    tilted = ModelSpec(
        region=region,
        couplings=spec.couplings,
        field=ising_field({0: 1.0, 1: 0.0, 2: 1.0, 3: 0.0, 4: 0.0}),
        beta=0.5,
    )
    ref = exact_spin_measure(tilted, SpinBoundary())
    assert np.allclose(plus.probabilities(), ref.probabilities(), atol=1e-14)


def test_spin_boundary_validation():
    region = make_lattice_box(1, 3)
    sites = sorted(region.inner | region.boundary)
    spec = ModelSpec(
        region=region,
        couplings=CouplingConstants.uniform(region.all_bonds, 1.0),
        field=ising_field({s: 0.0 for s in sites}),
        beta=0.5,
    )
    with pytest.raises(ConfigError):
        SpinBoundary(kind="wired")
    with pytest.raises(ConfigError):
        SpinBoundary(kind="fixed")
    with pytest.raises(DomainMismatchError):
        # missing one boundary spin
        some = sorted(region.boundary)[0]
        exact_spin_measure(spec, SpinBoundary(kind="fixed",
                                              mu=SpinConfig({some: 1})))
    with pytest.raises(ConfigError):
        exact_spin_measure(spec, SpinBoundary.fixed_uniform(region, 5))


def test_spin_config_reading():
    sigma = SpinConfig({0: 1, 1: 2, 2: 3})
    assert sigma.spin(0) == 1
    assert sigma.spin(1) == -1
    with pytest.raises(ConfigError):
        sigma.spin(2)
    with pytest.raises(DomainMismatchError):
        sigma.color(9)


def test_energy_functions_match_enumeration_weights():
    spec = pair_spec(0.9, 0.45, {0: 0.3, 1: -0.6})
    dist_i = exact_spin_measure(spec, model="ising")
    dist_p = exact_spin_measure(spec, model="potts")
    for code in range(4):
        sigma = dist_i.decode(code)
        wi = math.exp(-spec.beta * ising_energy(spec, sigma))
        wp = math.exp(-spec.q * spec.beta * potts_energy(spec, sigma))
        assert abs(dist_i.weights[code] - wi) < 1e-12
        assert abs(dist_p.weights[code] - wp) < 1e-12
        assert dist_i.encode(sigma) == code


def test_forbidden_color_stays_forbidden():
    field = FieldSpec(q=2, h={0: (0.0, -math.inf), 1: (0.0, 0.0)},
                      color_weights=(1.0, 1.0))
    g = FiniteGraph(vertices={0: (0,), 1: (1,)}, edges=((0, 1),))
    spec = ModelSpec(region=free_region(g),
                     couplings=CouplingConstants({(0, 1): 1.0}),
                     field=field, beta=0.0)
    dist = exact_spin_measure(spec, model="potts")
    # even at beta = 0 site 0 never takes color 2
    assert dist.site_marginal(0)[1] == 0.0
    assert abs(dist.site_marginal(1)[0] - 0.5) < 1e-14


def test_all_forbidden_raises():
    field = FieldSpec(q=2, h={0: (-math.inf, 0.0), 1: (0.0, -math.inf)},
                      color_weights=(1.0, 1.0))
    g = FiniteGraph(vertices={0: (0,), 1: (1,)}, edges=((0, 1),))
    spec = ModelSpec(region=free_region(g),
                     couplings=CouplingConstants({(0, 1): 1.0}),
                     field=field, beta=1.0)
    dist = exact_spin_measure(spec, model="potts")
    # one admissible configuration: (color 2, color 1)
    probs = dist.probabilities()
    assert np.count_nonzero(probs) == 1


def test_distribution_methods():
    spec = pair_spec(0.5, 0.8, {0: 0.2, 1: 0.1}, q=3)
    dist = exact_spin_measure(spec)
    probs = dist.probabilities()
    assert len(probs) == 9
    assert abs(math.fsum(probs.tolist()) - 1.0) < 1e-12
    for site in (0, 1):
        marg = dist.site_marginal(site)
        assert abs(math.fsum(marg.tolist()) - 1.0) < 1e-12
    agree = dist.pair_agreement(0, 1)
    brute = math.fsum(
        probs[c] for c in range(9)
        if dist.decode(c).color(0) == dist.decode(c).color(1)
    )
    assert abs(agree - brute) < 1e-14
    with pytest.raises(ConfigError):
        mean_spin(dist, 0)
    with pytest.raises(ConfigError):
        spin_correlation(dist, 0, 1)


def test_model_name_and_q_guards():
    spec = pair_spec(1.0, 0.5, {0: 0.0, 1: 0.0})
    with pytest.raises(ConfigError):
        exact_spin_measure(spec, model="xy")
    spec3 = pair_spec(1.0, 0.5, {0: 0.0, 1: 0.0}, q=3)
    with pytest.raises(ConfigError):
        exact_spin_measure(spec3, model="ising")


def test_cap_guard_on_large_region():
    region = make_lattice_box(2, 5)
    sites = sorted(region.inner | region.boundary)
    spec = ModelSpec(
        region=region,
        couplings=CouplingConstants.uniform(region.all_bonds, 1.0),
        field=zero_field(3, set(sites)),
        beta=0.5,
    )
    with pytest.raises(CapExceededError):
        exact_spin_measure(spec)


def test_distribution_csv_round_trip_by_eye():
    spec = single_site_spec(0.4, 1.0)
    dist = exact_spin_measure(spec)
    buf = io.StringIO()
    distribution_to_csv(dist, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "configuration,weight,probability"
    assert len(lines) == 3
    total = sum(float(row.split(",")[2]) for row in lines[1:])
    assert abs(total - 1.0) < 1e-12
