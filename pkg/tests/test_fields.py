"""Field, coupling, and field-order tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterfield.errors import ConfigError, DomainMismatchError
from clusterfield.fields import (
    CouplingConstants,
    EdgeWeights,
    FieldSpec,
    dump_field,
    field_leq,
    field_sum,
    field_summary,
    ising_field,
    ising_values,
    load_field,
    make_power_law_field,
    zero_field,
)
from clusterfield.scan import centered_box


def test_field_spec_validation():
    with pytest.raises(ConfigError):
        FieldSpec(q=0, h={}, color_weights=())
    with pytest.raises(ConfigError):
        FieldSpec(q=2, h={}, color_weights=(1.0,))
    with pytest.raises(ConfigError):
        FieldSpec(q=2, h={}, color_weights=(1.0, 0.0))
    with pytest.raises(ConfigError):
        FieldSpec(q=2, h={0: (1.0,)}, color_weights=(1.0, 1.0))
    with pytest.raises(ConfigError):
        FieldSpec(q=2, h={0: (math.nan, 0.0)}, color_weights=(1.0, 1.0))
    with pytest.raises(ConfigError):
        FieldSpec(q=2, h={0: (math.inf, 0.0)}, color_weights=(1.0, 1.0))
    with pytest.raises(ConfigError):
        # every color forbidden at one site
        FieldSpec(q=2, h={0: (-math.inf, -math.inf)}, color_weights=(1.0, 1.0))


def test_field_value_and_restriction():
    f = FieldSpec(q=3, h={0: (1.0, 0.0, -1.0), 1: (0.0, 0.0, 0.0)},
                  color_weights=(1.0, 1.0, 1.0))
    assert f.value(0, 1) == 1.0
    assert f.value(0, 3) == -1.0
    with pytest.raises(ConfigError):
        f.value(0, 4)
    with pytest.raises(DomainMismatchError):
        f.value(9, 1)
    g = f.restricted({0})
    assert g.sites == frozenset({0})
    with pytest.raises(DomainMismatchError):
        f.restricted({0, 9})


def test_zero_and_ising_builders():
    z = zero_field([0, 1], q=3)
    assert z.q == 3 and all(v == (0.0,) * 3 for v in z.h.values())
    f = ising_field({0: 0.7, 1: -0.2})
    assert f.h[0] == (0.7, -0.7)
    assert f.h[1] == (-0.2, 0.2)
    assert ising_values(f) == {0: 0.7, 1: -0.2}
    generic = FieldSpec(q=2, h={0: (0.5, 0.1)}, color_weights=(1.0, 1.0))
    with pytest.raises(ConfigError):
        ising_values(generic)
    with pytest.raises(ConfigError):
        ising_values(zero_field([0], q=3))


def test_power_law_field_values():
    box = centered_box(2, 5)
    f = make_power_law_field(hstar=2.0, alpha=1.0, region=box)
    ids = {v.coords: v.id for v in box.graph.vertices}
    assert f.h[ids[(0, 0)]] == (2.0, -2.0)
    assert f.h[ids[(2, 0)]][0] == pytest.approx(1.0)
    assert f.h[ids[(1, 1)]][0] == pytest.approx(2.0 / math.sqrt(2.0))
    g = make_power_law_field(hstar=2.0, alpha=1.0, region=box, norm="sup")
    assert g.h[ids[(1, 1)]][0] == pytest.approx(2.0)
    # alpha 0 is the flat field
    flat = make_power_law_field(hstar=1.5, alpha=0.0, region=box)
    assert all(v == (1.5, -1.5) for v in flat.h.values())
    with pytest.raises(ConfigError):
        make_power_law_field(hstar=0.0, alpha=1.0, region=box)
    with pytest.raises(ConfigError):
        make_power_law_field(hstar=1.0, alpha=-0.5, region=box)
    with pytest.raises(ConfigError):
        make_power_law_field(hstar=1.0, alpha=1.0, region=box, norm="l1")


def test_field_sum_scaling_and_sentinel():
    f = FieldSpec(q=2, h={0: (1.0, -1.0), 1: (0.5, -0.5), 2: (-math.inf, 0.0)},
                  color_weights=(1.0, 1.0))
    assert field_sum(f, 2.0, [0, 1], 1) == pytest.approx(3.0)
    assert field_sum(f, 2.0, [0, 1], 2) == pytest.approx(-3.0)
    assert field_sum(f, 2.0, [0, 2], 1) == -math.inf
    # beta 0 still silences a finite field but keeps the hard constraint
    assert field_sum(f, 0.0, [0, 1], 1) == 0.0
    assert field_sum(f, 0.0, [2], 1) == -math.inf
    with pytest.raises(ConfigError):
        field_sum(f, 1.0, [], 1)


def test_field_leq_order():
    a = ising_field({0: 0.2, 1: 0.0})
    b = ising_field({0: 0.5, 1: 0.0})
    assert field_leq(a, b)
    assert not field_leq(b, a)
    assert field_leq(a, a)
    # a field with no strict gaps sits below everything
    assert field_leq(zero_field([0, 1], q=2), a)
    # a negative value opens a gap the other way, breaking the order
    assert not field_leq(ising_field({0: -0.3, 1: 0.0}), a)
    with pytest.raises(DomainMismatchError):
        field_leq(a, ising_field({0: 0.2}))
    with pytest.raises(DomainMismatchError):
        field_leq(a, zero_field([0, 1], q=3))


def test_field_summary_consistent_order():
    f = FieldSpec(q=3, h={0: (5.0, 2.0, 1.0), 1: (5.0, 3.0, 0.0)},
                  color_weights=(1.0, 1.0, 1.0))
    s = field_summary(f, [0, 1])
    assert s.shared_top == frozenset({1})
    assert s.qsum == pytest.approx(1.0)
    assert s.consistent_order
    assert s.positive_association_hypothesis


def test_field_summary_flags_swapped_pair():
    # colors 2 and 3 trade places between sites: one shared top color is not
    # enough, the pair order must also be site-independent
    f = FieldSpec(q=3, h={0: (5.0, 1.0, 2.0), 1: (5.0, 2.0, 1.0),
                          2: (5.0, 1.5, 1.5)},
                  color_weights=(1.0, 1.0, 1.0))
    s = field_summary(f, [0, 1, 2])
    assert s.shared_top == frozenset({1})
    assert s.qsum >= 1.0
    assert not s.consistent_order
    assert not s.positive_association_hypothesis


def test_field_summary_top_mass_threshold():
    # consistent order but the shared top color carries less than unit mass
    f = FieldSpec(q=2, h={0: (1.0, 0.0)}, color_weights=(0.5, 1.0))
    s = field_summary(f, [0])
    assert s.shared_top == frozenset({1})
    assert s.consistent_order
    assert s.qsum == pytest.approx(0.5)
    assert not s.positive_association_hypothesis


def test_field_summary_tied_top_pools_mass():
    f = FieldSpec(q=3, h={0: (1.0, 1.0, 0.0), 1: (2.0, 2.0, -1.0)},
                  color_weights=(0.6, 0.7, 1.0))
    s = field_summary(f, [0, 1])
    assert s.shared_top == frozenset({1, 2})
    assert s.qsum == pytest.approx(1.3)
    assert s.positive_association_hypothesis


def test_edge_weight_conventions_agree():
    c = CouplingConstants.uniform([(0, 1), (1, 2)], 0.8)
    w = EdgeWeights.from_couplings(c, beta=0.5, q=3)
    for e in c.values:
        p, r = w.p[e], w.r[e]
        assert p == pytest.approx(1.0 - math.exp(-3 * 0.5 * 0.8))
        assert r == pytest.approx(math.exp(3 * 0.5 * 0.8) - 1.0)
        assert p == pytest.approx(r / (1.0 + r))


def test_coupling_constants():
    with pytest.raises(ConfigError):
        CouplingConstants({(0, 1): -0.1})
    c = CouplingConstants.uniform([(1, 0)], 2.0)
    assert c.get((0, 1)) == 2.0
    assert c.get((1, 0)) == 2.0
    assert c.scaled(0.5).get((0, 1)) == 1.0
    with pytest.raises(DomainMismatchError):
        c.get((5, 6))


def test_field_json_round_trip(tmp_path):
    f = FieldSpec(q=2, h={0: (1.5, -1.5), 3: (-math.inf, 0.25)},
                  color_weights=(1.0, 1.0))
    doc = dump_field(f)
    assert doc["3"][0] == "-inf"
    again = load_field(doc, q=2)
    assert again.h == f.h
    path = tmp_path / "f.json"
    path.write_text(__import__("json").dumps(doc))
    assert load_field(str(path), q=2).h == f.h


def test_load_field_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_field({"x": [0.0, 0.0]}, q=2)
    with pytest.raises(ConfigError):
        load_field({"0": "nope"}, q=2)
    with pytest.raises(ConfigError):
        load_field({"0": ["inf", 0.0]}, q=2)
    with pytest.raises(ConfigError):
        load_field(["not", "a", "dict"], q=2)
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    with pytest.raises(ConfigError):
        load_field(str(bad), q=2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=3.0), min_size=1,
                max_size=5),
       st.floats(min_value=0.0, max_value=2.0))
def test_field_leq_after_uniform_bump(values, bump):
    # bumping a nonnegative up/down field widens every positive gap
    base = ising_field({i: v for i, v in enumerate(values)})
    bumped = ising_field({i: v + bump for i, v in enumerate(values)})
    assert field_leq(base, bumped)
