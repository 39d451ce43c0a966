"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``[ACCEPT n] PASS|FAIL ...`` line; the lines are
repeated in the pytest terminal summary.  Running this file directly
(``python3 tests/test_acceptance.py``) prints the same lines without pytest.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cnode import (ChannelSpec, QuadratureConfig, SimConfig, SpectralChannel, SweepTable,
                   WeylSymbolModel, capacity_derivative_check, capacity_integral,
                   lemma1_derivative_check, mmse, mmse_integral, node_integral,
                   simulate_matched_filter, spectrum, szego_convergence_study, waterfill)
from cnode.cli import main as cli_main
from cnode.ltv import count_integral, gaussian_closed_form

from oracles import waterfill_exact

E = math.e
RESULTS = []


def report(n, title, passed, detail):
    line = f"[ACCEPT {n:2d}] {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def gaussian():
    return WeylSymbolModel.gaussian(1.0, 1.0)


CLOSED_SNR = (E, E * E, 10.0)
QUAD_8 = QuadratureConfig(tolerance=1e-8)


def _closed_form_check(n, title, fn, key):
    t0 = time.perf_counter()
    errs = []
    for s in CLOSED_SNR:
        ref = gaussian_closed_form(s)[key]
        errs.append(abs(fn(gaussian(), s, QUAD_8) - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-6 and elapsed < 5.0
    report(n, title, ok, f"max rel err {max(errs):.2e} (<= 1e-6), {elapsed:.2f} s (< 5 s)")
    return ok


def random_channels(seed=20240601, count=20):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal((L, L)) for L in rng.integers(1, 9, size=count)], rng


def random_snr_points(spec, rng, count=10):
    """Feasible snr values at least 1% away from every activation threshold."""
    thresholds = 1.0 / spec.eigenvalues[spec.eigenvalues > 0]
    edge = thresholds.min()
    out = []
    while len(out) < count:
        s = edge * math.exp(rng.uniform(math.log(1.02), math.log(200.0)))
        if np.all(np.abs(s - thresholds) > 0.01 * s):
            out.append(s)
    return out


def test_c1_node_closed_form():
    ok = _closed_form_check(1, "Gaussian NODE closed form", node_integral, "node")
    v = node_integral(gaussian(), E, QUAD_8)
    assert ok and abs(v - 0.18393972058572117) <= 1e-7


def test_c2_capacity_closed_form():
    ok = _closed_form_check(2, "Gaussian capacity closed form", capacity_integral, "capacity")
    assert ok and gaussian_closed_form(E * E)["capacity"] == 0.5


def test_c3_mmse_closed_form():
    ok = _closed_form_check(3, "Gaussian MMSE closed form", mmse_integral, "mmse")
    v = mmse_integral(gaussian(), E, QUAD_8)
    assert ok and abs(v - 0.06766764161830635) <= 1e-7


def test_c4_vector_cnode():
    t0 = time.perf_counter()
    mats, rng = random_channels()
    worst, checked = 0.0, 0
    for H in mats:
        spec = spectrum(ChannelSpec(H, 1.0))
        for s in random_snr_points(spec, rng):
            chk = capacity_derivative_check(spec, s)
            assert not chk.jump_adjacent
            node_value = 2 * chk.analytic
            worst = max(worst, abs(chk.numeric - chk.analytic) / max(1.0, node_value))
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 1.0 and checked == 200
    report(4, "vector C-NODE", ok,
           f"{checked} points, max |dC - node/2|/max(1,node) {worst:.2e} (<= 1e-6), "
           f"{elapsed:.2f} s (< 1 s)")
    assert ok


def test_c5_node_mmse_identity():
    mats, rng = random_channels()
    worst, gap_ok, n_active = 0.0, True, 0
    for H in mats:
        spec = spectrum(ChannelSpec(H, 1.0))
        for s in random_snr_points(spec, rng):
            rep = mmse(spec, s)
            worst = max(worst, abs(rep.node - rep.mmse - rep.fisher_term))
            if rep.active_count >= 1:
                n_active += 1
                gap_ok &= rep.node > rep.mmse
    ok = worst <= 1e-12 and gap_ok
    report(5, "NODE = MMSE + Fisher term", ok,
           f"max |node - mmse - fisher| {worst:.2e} (<= 1e-12), node > mmse at all "
           f"{n_active} points with K >= 1: {gap_ok}")
    assert ok


def test_c6_waterfill_oracle():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        L = int(rng.integers(1, 17))
        lam = np.exp(rng.normal(0.0, 2.0, size=L))
        theta2 = float(np.exp(rng.normal(0.0, 1.0)))
        S = float(np.exp(rng.normal(0.0, 2.0)))
        sol = waterfill(SpectralChannel.from_unsorted(lam, theta2), S)
        ref = waterfill_exact(lam, theta2, S)
        worst = max(worst, abs(sol.water_level - ref) / ref)
    ok = worst <= 1e-10
    report(6, "waterfilling vs sorted-prefix oracle", ok,
           f"100 instances, max rel err in sigma^2 {worst:.2e} (<= 1e-10)")
    assert ok


def test_c7_level_set_derivative():
    quad = QuadratureConfig(tolerance=1e-10)
    errs = []
    for s in (2.0, E, 10.0):
        chk = lemma1_derivative_check(gaussian(), s, quad=quad)
        ref = 2 * math.pi * count_integral(gaussian(), s, quad) / s
        assert chk["analytic"] == pytest.approx(ref, rel=1e-12)
        errs.append(abs(chk["numeric"] - chk["analytic"]) / abs(chk["analytic"]))
    ok = max(errs) <= 1e-4
    report(7, "level-set derivative identity", ok,
           f"s in {{2, e, 10}}, max rel err {max(errs):.2e} (<= 1e-4)")
    assert ok


def test_c8_eigenvalue_count_trend():
    t0 = time.perf_counter()
    tab = szego_convergence_study(gaussian(), E, [1.0, 2.0, 4.0, 8.0], QUAD_8)
    elapsed = time.perf_counter() - t0
    gap = tab.column("gap_normalized")
    n_max = int(tab.column("n_points").max())
    ok = gap[-1] <= 0.5 * gap[0] and elapsed < 120.0 and n_max <= 4096
    cells = ", ".join(f"r={int(r)}: K={int(k)} Kc={kc:.4f}"
                      for r, k, kc in zip(tab.column("r"), tab.column("K"),
                                          tab.column("K_check")))
    report(8, "eigenvalue count vs phase-space area", ok,
           f"gap/r^2 {gap[0]:.3g} -> {gap[-1]:.3g} (<= half), N <= {n_max}, "
           f"{elapsed:.1f} s (< 120 s); {cells}")
    assert ok


def _mc_check(H, snr, seed):
    rep = simulate_matched_filter(ChannelSpec(H, 1.0), SimConfig(100_000, seed, snr),
                                  keep_samples=False)
    z_var = np.abs(rep.empirical_error_variances - 1.0) / rep.error_variance_stderr
    z_mmse = abs(rep.empirical_mmse - rep.analytic_mmse) / rep.empirical_mmse_stderr
    return z_var.max(), z_mmse


def test_c9_monte_carlo():
    t0 = time.perf_counter()
    z1 = _mc_check(np.eye(2), 2.0, seed=7)
    H = np.random.default_rng(4).standard_normal((4, 4))
    z2 = _mc_check(H, 10.0, seed=8)
    elapsed = time.perf_counter() - t0
    ok = max(z1 + z2) <= 3.0 and elapsed < 30.0
    report(9, "Monte-Carlo matched filter", ok,
           f"I2: max z(var) {z1[0]:.2f}, z(mmse) {z1[1]:.2f}; random 4x4: "
           f"max z(var) {z2[0]:.2f}, z(mmse) {z2[1]:.2f} (<= 3), {elapsed:.2f} s (< 30 s)")
    assert ok


def test_c10_node_mmse_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    t0 = time.perf_counter()
    code = cli_main(["ltv", "--gaussian", "1.0", "--r", "1", "--snr-db", "0:20:0.25",
                     "--output", str(out), "--quiet"])
    elapsed = time.perf_counter() - t0
    tab = SweepTable.from_csv(out)
    snr, nd, mm = tab.column("snr"), tab.column("node"), tab.column("mmse")
    ref = [gaussian_closed_form(s) for s in snr]
    err_node = max(abs(a - r["node"]) for a, r in zip(nd, ref))
    err_mmse = max(abs(a - r["mmse"]) for a, r in zip(mm, ref))
    above = snr > 1.0
    strict = bool(np.all(nd[above] > mm[above]))
    ok = code == 0 and len(tab) == 81 and max(err_node, err_mmse) <= 1e-5 and strict
    report(10, "node/mmse sweep 0..20 dB", ok,
           f"{len(tab)} rows, max abs err node {err_node:.2e}, mmse {err_mmse:.2e} "
           f"(<= 1e-5), node > mmse for snr > 1: {strict}, {elapsed:.1f} s")
    assert ok


if __name__ == "__main__":
    import tempfile

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    tests.sort(key=lambda f: int(f.__name__.split("_")[1][1:]))
    failed = 0
    for fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
