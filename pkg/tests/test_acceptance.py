"""Acceptance battery: one test per shipped guarantee.

Each test prints one summary line; `pytest -v` shows one pass/fail line per
criterion. Seeds are fixed, so every number below is reproducible bit for bit.
"""

import math
import time

import numpy as np

from clusterfield import (
    CouplingConstants,
    GRCBoundary,
    ModelSpec,
    SpinBoundary,
    corpus,
    ising_field,
    magnetization,
    make_power_law_field,
    run_verification_suite,
)
from clusterfield.coupling import exact_spin_measure, joint_distribution
from clusterfield.inequalities import (
    coupling_monotonicity_suite,
    field_monotonicity_suite,
    fkg_lattice_check,
    fkg_suite,
    volume_monotonicity_suite,
)
from clusterfield.sampler import estimate, joint_histogram
from clusterfield.scan import (
    ScanConfig,
    centered_box,
    crossover_estimate,
    gap_records,
    gap_trend,
    run_scan,
)


def _report(name, passed, detail):
    print(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, detail


def test_criterion_01_partition_identities():
    """Edge-sum and spin-sum partition functions agree to 1e-10, under 10 s."""
    t0 = time.time()
    recs = run_verification_suite(corpus(), draws=20, seed=0,
                                  checks=("identities",))
    elapsed = time.time() - t0
    worst = max(r["error"] for r in recs)
    ok = all(r["passed"] for r in recs) and worst < 1e-10 and elapsed < 10.0
    _report("criterion 1 partition identities", ok,
            f"{len(recs)} checks, worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_spin_marginal():
    """Joint spin marginal matches the direct spin measure in TV to 1e-10."""
    recs = run_verification_suite(corpus(), draws=20, seed=0,
                                  checks=("marginals",))
    worst = max(r["error"] for r in recs)
    ok = all(r["passed"] for r in recs) and worst < 1e-10
    _report("criterion 2 spin marginal", ok,
            f"{len(recs)} checks, worst TV {worst:.2e}")


def test_criterion_03_correlation_connectivity():
    """Two-point correlation equals the connectivity identity to 1e-10."""
    recs = run_verification_suite(corpus(), draws=20, seed=0,
                                  checks=("correlation",))
    qs = {r["q"] for r in recs}
    worst = max(r["error"] for r in recs)
    ok = (all(r["passed"] for r in recs) and worst < 1e-10
          and {2, 3, 4} <= qs)
    _report("criterion 3 correlation-connectivity", ok,
            f"{len(recs)} checks over q={sorted(qs)}, worst abs err {worst:.2e}")


def test_criterion_04_single_spin_and_magnetization():
    """Single-site color law and magnetization identities hold to 1e-10."""
    recs = run_verification_suite(corpus(), draws=20, seed=0,
                                  checks=("single_spin", "magnetization"))
    worst = max(r["error"] for r in recs)
    ok = all(r["passed"] for r in recs) and worst < 1e-10
    _report("criterion 4 single-spin distribution", ok,
            f"{len(recs)} checks, worst abs err {worst:.2e}")


def test_criterion_05_zero_field_reductions():
    """With no field, tau = (1-1/q) connectivity and the +-1 correlation
    equals the connection probability, both to 1e-12."""
    recs = run_verification_suite(corpus(), draws=20, seed=0,
                                  checks=("zero_field",))
    worst = max(r["error"] for r in recs)
    ok = all(r["passed"] for r in recs) and worst < 1e-12
    _report("criterion 5 zero-field reductions", ok,
            f"{len(recs)} checks, worst abs err {worst:.2e}")


def test_criterion_06_strong_fkg():
    """Lattice condition holds on corpus tables whose fields keep one color
    order and carry enough top-color mass; the 2-edge counterexample is
    flagged with its exact raw margin of -3."""
    recs = fkg_suite(draws=10, seed=0)
    exhaustive = [r for r in recs if r["method"] == "full-pairwise"]
    ok = (all(r["passed"] for r in recs)
          and len(recs) >= 80
          and len(exhaustive) >= 70
          and any(r["bc"] == "wired" for r in recs))
    bad = fkg_lattice_check([1.0, 2.0, 2.0, 1.0])
    flagged = (not bad.passed and bad.worst_margin == -3.0
               and bad.worst_pair == (1, 2))
    _report("criterion 6 strong FKG", ok and flagged,
            f"{len(recs)} tables, 0 violations, "
            f"counterexample margin {bad.worst_margin:+.0f}")


def test_criterion_07_holley_monotonicity():
    """Ordered fields, ordered couplings, and nested volumes give stochastic
    domination: single-edge ratio conditions, max-flow couplings, and every
    up-set expectation (tables up to 5 edges) ordered, zero violations."""
    field = field_monotonicity_suite(draws=10, seed=1)
    coupl = coupling_monotonicity_suite(draws=10, seed=2)
    vol = volume_monotonicity_suite(draws=10, seed=4)
    all_recs = field + coupl + vol
    fails = [r for r in all_recs if not r["passed"]]
    _report("criterion 7 Holley monotonicity", not fails,
            f"{len(field)} field + {len(coupl)} coupling + {len(vol)} volume "
            f"checks, {len(fails)} violations")


def test_criterion_08_sampler_correctness():
    """Empirical joint distribution within TV 0.01 of enumeration; power-law
    magnetization within 3 stderr of exact; both dynamics agree. Under 5 min."""
    t0 = time.time()
    regs = corpus()
    details = []

    # joint (spin, edge) histograms against full enumeration
    tvs = {}
    for name in ("triangle", "box22"):
        region = regs[name]
        sites = sorted(region.inner | region.boundary)
        field = ising_field(
            {s: 0.3 * ((i % 3) - 1) for i, s in enumerate(sites)})
        spec = ModelSpec(region=region, field=field,
                         couplings=CouplingConstants.uniform(
                             region.all_bonds, 0.8),
                         beta=0.5)
        bc = GRCBoundary.free()
        hist = joint_histogram(spec, bc, sweeps=1_000_000, seed=8 + len(tvs))
        exact = joint_distribution(spec, bc)
        tvs[name] = 0.5 * float(np.abs(hist - exact).sum())
    details.append("joint TV " + ", ".join(
        f"{k}={v:.4f}" for k, v in tvs.items()))
    tv_ok = all(v < 0.01 for v in tvs.values())

    # magnetization on the 3x3 box with a decaying field, both dynamics
    box3 = centered_box(2, 3)
    spec3 = ModelSpec(region=box3,
                      field=make_power_law_field(hstar=1.0, alpha=0.5,
                                                 region=box3),
                      couplings=CouplingConstants.uniform(box3.all_bonds, 1.0),
                      beta=0.8)
    m_exact = magnetization(exact_spin_measure(spec3, SpinBoundary()))
    runs = {}
    for kern in ("es", "glauber"):
        runs[kern] = estimate(spec3, GRCBoundary.free(), "magnetization",
                              sweeps=200_000, burn_in=2_000, seed=11,
                              dynamics=kern)
    z_es = abs(runs["es"].mean - m_exact) / runs["es"].stderr
    z_gl = abs(runs["glauber"].mean - m_exact) / runs["glauber"].stderr
    pair_err = math.hypot(runs["es"].stderr, runs["glauber"].stderr)
    z_pair = abs(runs["es"].mean - runs["glauber"].mean) / pair_err
    details.append(f"magnetization z: es {z_es:.2f}, glauber {z_gl:.2f}, "
                   f"mutual {z_pair:.2f}")
    mag_ok = z_es < 3.0 and z_gl < 3.0 and z_pair < 3.0

    elapsed = time.time() - t0
    details.append(f"{elapsed:.0f}s")
    _report("criterion 8 sampler correctness",
            tv_ok and mag_ok and elapsed < 300.0, "; ".join(details))


def test_criterion_09_self_dual_crossover():
    """No field, two colors: the wired-minus-free reach gap on sides 8 and 16
    peaks at bond density 0.586 +- 0.05. Under 10 min."""
    t0 = time.time()
    betas = tuple(round(b, 4) for b in np.linspace(0.35, 0.55, 9))
    cfg = ScanConfig(alpha_grid=(0.0,), beta_grid=betas, box_sides=(8, 16),
                     hstar=0.0, q=2, sweeps=20000, seed=7)
    recs = run_scan(cfg)
    stars = {side: crossover_estimate(recs, q=2, side=side)["p_star"]
             for side in (8, 16)}
    elapsed = time.time() - t0
    ok = (all(abs(p - 0.586) <= 0.05 for p in stars.values())
          and elapsed < 600.0)
    _report("criterion 9 self-dual crossover", ok,
            "p_star " + ", ".join(f"side {s}: {p:.3f}"
                                  for s, p in stars.items())
            + f" (target 0.586 +- 0.05), {elapsed:.0f}s")


def test_criterion_10_power_law_proxy():
    """Indicative finite-volume proxy only: a non-decaying field keeps the
    boundary gap at noise level at every temperature, while a fast-decaying
    field leaves a significant gap at the largest beta on both box sizes.
    The slow-decay uniqueness-for-all-beta claim is an infinite-volume
    statement and is excluded from pass/fail here."""
    cfg = ScanConfig(alpha_grid=(0.0, 2.0), beta_grid=(0.35, 0.40, 0.45),
                     box_sides=(7, 11), hstar=1.0, q=2, sweeps=20000, seed=13)
    recs = run_scan(cfg)
    gaps = gap_records(recs)
    null_z = [abs(g["gap"]) / g["stderr"] for g in gaps if g["alpha"] == 0.0]
    decayed = [g for g in gaps if g["alpha"] == 2.0]
    big_beta = max(g["beta"] for g in decayed)
    sig_z = [g["gap"] / g["stderr"] for g in decayed if g["beta"] == big_beta]
    trend = gap_trend(recs)
    null_flat = all(t["classification"] == "statistically-zero"
                    for t in trend["trends"] if t["alpha"] == 0.0)
    ok = (max(null_z) < 3.0
          and all(g["gap"] > 0 for g in decayed)
          and len(sig_z) == 2 and all(z > 3.0 for z in sig_z)
          and null_flat
          and trend["indicative"] is True)
    _report("criterion 10 power-law proxy (indicative)", ok,
            f"flat-field worst |z| {max(null_z):.2f}; decayed-field gap at "
            f"beta {big_beta}: z {', '.join(f'{z:.1f}' for z in sig_z)} "
            f"across sides (7, 11)")
