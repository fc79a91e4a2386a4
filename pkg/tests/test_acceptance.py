"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
The verdict lines appear in the "acceptance criteria" section of the summary.
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from imexstab.channel import build_mode, channel_parameters, instability_probe, integrate_mode, w2_mode, wmax_sweep
from imexstab.coeffs import MAX_ORDER, exact_coefficients, generate_scheme, tabulated_coefficients
from imexstab.diagram import boundary_locus, contains, extreme_points
from imexstab.diffusion import check_interval_bounds, run_gaussian_ratios, run_porous_convergence, run_vardiff_convergence
from imexstab.recipes import optimal_interval_params, recipe_delta, recipe_joint, recipe_sigma, certify
from imexstab.report import fitted_rate
from imexstab.spectra import SplittingPair, convex_hull, generalized_eigenvalues, numerical_range, rescale, w_p_set

ORDERS = range(1, MAX_ORDER + 1)
DELTA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]
L_NORMAL = np.array([[-0.2, 0, 0], [0, -2, 2], [0, -2, -2]])
L_SYM = np.array([[-2.0, 1.0], [1.0, -2.0]])

# reference errors for k = 2^-8 .. 2^-12, orders 1..3
REF_VARDIFF_ERRORS = {
    1: [2.5e-1, 1.6e-1, 9.1e-2, 4.8e-2, 2.5e-2],
    2: [2.2e-1, 5.6e-2, 1.2e-2, 2.8e-3, 6.7e-4],
    3: [5.0e-2, 4.9e-3, 8.5e-4, 1.3e-4, 1.8e-5],
}
REF_POROUS_R3_K8 = 2.5e-5


def within_last_digit(got: float, reference: float) -> bool:
    digits = len(repr(reference).split(".")[1])
    return abs(got - reference) <= 10.0**-digits


def test_criterion_1_coefficients(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for r in ORDERS:
        for delta in DELTA_GRID:
            s, ref = generate_scheme(r, delta), tabulated_coefficients(r, delta)
            for key in ("a", "b", "c"):
                scale = np.maximum(np.abs(ref[key]), 1.0)
                worst = max(worst, float(np.max(np.abs(getattr(s, key) - ref[key]) / scale)))
    sbdf_exact = all(
        list(generate_scheme(r, 1.0).a) == [float(x) for x in exact_coefficients(r, Fraction(1))["a"]]
        and list(generate_scheme(r, 1.0).b) == [float(x) for x in exact_coefficients(r, Fraction(1))["b"]]
        and generate_scheme(r, 1.0).is_sbdf
        for r in ORDERS
    )
    dt = time.perf_counter() - t0
    ok = verdict("1. coefficient exactness", [
        ("closed forms", worst <= 1e-12, f"max rel err {worst:.1e}"),
        ("delta=1 is SBDF", sbdf_exact, "exact" if sbdf_exact else "mismatch"),
        ("runtime", dt < 1.0, f"{dt:.2f}s"),
    ])
    assert ok


def test_criterion_2_diagram_extremes(verdict):
    worst = 0.0
    for r in ORDERS:
        for delta in DELTA_GRID:
            m_l, m_r = extreme_points(r, delta)
            mu = boundary_locus(r, delta, 8192)
            worst = max(worst, abs(mu.real.min() - m_l), abs(mu.real.max() - m_r))
    m3 = extreme_points(3, 1.0)[1]
    m2 = extreme_points(2, 1.0)[1]
    ok = verdict("2. diagram formulas", [
        ("locus extremes", worst <= 1e-6, f"max dev {worst:.1e}"),
        ("SBDF3 m_r", abs(m3 - 0.5) <= 1e-12, f"{m3:.12g}"),
        ("SBDF2 m_r", m2 == 1.0, f"{m2:.12g}"),
    ])
    assert ok


def test_criterion_3_scalar_example(verdict):
    res = recipe_delta(3, SplittingPair(np.array([[-1.0]]), np.array([[-9.0]])))
    target = 2 - 7.2 ** (1 / 3)
    ok = verdict("3. scalar example", [
        ("largest delta", res.feasible and abs(res.delta_star - target) <= 1e-6,
         f"{res.delta_star:.9f} vs {target:.9f}"),
        ("SBDF3 excludes -9", not contains(3, 1.0, -9.0), "outside"),
        ("delta=0.0656 includes -9", bool(contains(3, 0.0656, -9.0)), "inside"),
    ])
    assert ok


def test_criterion_4_sbdf_case_studies(verdict):
    nb = SplittingPair(-np.eye(3), L_NORMAL)
    sb = SplittingPair(-np.eye(2), L_SYM)
    W_n, Lam_n = w_p_set(nb, 1.0), generalized_eigenvalues(nb)
    W_s, Lam_s = w_p_set(sb, 1.0), generalized_eigenvalues(sb)
    r1 = recipe_sigma(generate_scheme(1, 1.0), nb)
    r2 = recipe_sigma(generate_scheme(2, 1.0), nb)
    s2 = recipe_sigma(generate_scheme(2, 1.0), sb)
    s3 = recipe_sigma(generate_scheme(3, 1.0), sb)
    j_n = recipe_joint(3, nb)
    j_s = recipe_joint(3, sb)
    ok = verdict("4. SBDF case studies", [
        ("normal SBDF1", r1.feasible and certify(1, 1.0, 2.5, W_n, Lam_n), "sigma=2.5 certified"),
        ("normal SBDF2", not r2.feasible, "infeasible"),
        ("symmetric SBDF2", s2.feasible and certify(2, 1.0, 2.5, W_s, Lam_s), "sigma=2.5 certified"),
        ("symmetric SBDF3", not s3.feasible, "infeasible"),
        ("normal joint r=3", j_n.feasible and certify(3, 0.08, 0.5, W_n, Lam_n), "(0.08, 0.5) certified"),
        ("symmetric joint r=3", j_s.feasible and certify(3, 0.25, 1.0, W_s, Lam_s), "(0.25, 1) certified"),
    ])
    assert ok


def test_criterion_5_optimal_parameters(verdict):
    cases = [
        ("1D diffusion", 5, 1.0, 7.0, (0.1732, 2.69)),
        ("porous manufactured", 5, math.e ** (5 / 3), (3 * math.e) ** (5 / 3), (0.19166, 13.8)),
        ("porous Gaussian", 3, 1.0, 2 ** (5 / 3), (0.794, 2.616)),
        ("channel", 5, 1 - 0.93, 1.0, (0.0907, 0.2186)),
    ]
    checks = []
    for name, r, dmin, dmax, ref in cases:
        got = optimal_interval_params(r, dmin, dmax, 0.1)
        good = all(within_last_digit(g, p) for g, p in zip(got, ref))
        checks.append((name, good, f"({got[0]:.6g}, {got[1]:.6g}) vs {ref}"))
    assert verdict("5. optimal parameters", checks)


def test_criterion_6_interval_bounds(verdict):
    rng = np.random.default_rng(20240601)
    worst_margin, worst_sharp, failures = math.inf, 0.0, 0
    t0 = time.perf_counter()
    for i in range(50):
        N = (16, 32, 64)[i % 3]
        x = np.arange(N) / N
        raw = rng.normal() + sum(rng.normal() * np.cos(2 * np.pi * m * x + rng.uniform(0, 2 * np.pi))
                                 for m in range(1, 4))
        d = 0.2 + rng.uniform(0.5, 8.0) * (raw - raw.min()) / np.ptp(raw)
        sigma = rng.uniform(d.min(), d.max())
        rep = check_interval_bounds(d, sigma)
        worst_margin = min(worst_margin, min(rep.margins.values()))
        failures += (not rep.holds) or rep.sharpness > 10.0 / N
        worst_sharp = max(worst_sharp, rep.sharpness * N)
    dt = time.perf_counter() - t0
    ok = verdict("6. interval bounds", [
        ("bounds hold", failures == 0, f"{failures} failures, min margin {worst_margin:.1e}"),
        ("sharpness", worst_sharp <= 10.0, f"max N*gap {worst_sharp:.2f}"),
        ("runtime", dt < 60.0, f"{dt:.1f}s"),
    ])
    assert ok


@pytest.mark.slow
def test_criterion_7_variable_diffusion(verdict):
    ks = [2.0**-j for j in range(8, 13)]
    t0 = time.perf_counter()
    rep = run_vardiff_convergence(orders=[1, 2, 3], ks=[1.0] + ks, N=64, delta=0.1732, sigma=2.69, t_final=5.0)
    dt = time.perf_counter() - t0
    checks = []
    for r in (1, 2, 3):
        err = rep.errors(r)
        ratio = err[1:] / np.array(REF_VARDIFF_ERRORS[r])
        rate = fitted_rate(rep.ks(r)[-3:], err[-3:])
        checks.append((f"r={r} errors", bool(np.all((ratio >= 0.5) & (ratio <= 2.0))),
                       f"ratio to reference {ratio.min():.2f}..{ratio.max():.2f}"))
        checks.append((f"r={r} rate", abs(rate - r) <= 0.25, f"{rate:.2f}"))
        checks.append((f"r={r} k=1", bool(np.isfinite(err[0])), f"{err[0]:.2g}"))
    checks.append(("runtime", dt <= 120.0, f"{dt:.0f}s"))
    assert verdict("7. variable-coefficient diffusion", checks)


@pytest.mark.slow
def test_criterion_8_porous_medium(verdict):
    ks = [2.0**-j for j in range(6, 12)]
    t0 = time.perf_counter()
    gauss = run_gaussian_ratios(orders=[1, 2, 3], ks=ks, N=32)
    manu = run_porous_convergence(orders=[3], ks=[2.0**-8], N=64)
    dt = time.perf_counter() - t0
    checks = []
    for r in (1, 2, 3):
        R = gauss.rates(r)[-1]
        checks.append((f"r={r} R_k", abs(R - r) <= 0.3, f"{R:.3f}"))
    drift = gauss.metadata["mean_drift"]
    checks.append(("mean drift", drift <= 1e-12, f"{drift:.1e}"))
    e = manu.errors(3)[0]
    checks.append(("N=64 r=3 error", REF_POROUS_R3_K8 / 3 <= e <= 3 * REF_POROUS_R3_K8, f"{e:.3e}"))
    checks.append(("runtime", dt <= 900.0, f"{dt:.0f}s"))
    assert verdict("8. porous-medium diffusion", checks)


@pytest.mark.slow
def test_criterion_9_channel(verdict):
    t0 = time.perf_counter()
    spec = w2_mode(build_mode(1.0, 256))
    sweep = wmax_sweep([1, 2, 5, 10, 25, 50], 256)
    p = channel_parameters(2 * math.pi, 256, 5, 0.1)
    mode = build_mode(p.xi1, 256, p.sigma)
    pts = w2_mode(mode).split.boundary_samples(per_edge=48)
    inside = bool(np.all(contains(5, p.delta, pts)))
    u0 = np.random.default_rng(0).standard_normal(256)
    norms = integrate_mode(mode, generate_scheme(5, p.delta), 1e3, 100, u0)
    probe = instability_probe(build_mode(p.xi1, 256, 1.0), generate_scheme(3, 1.0),
                              [2.0**j for j in range(-4, 11, 2)], steps=1000)
    dt = time.perf_counter() - t0
    ok = verdict("9. channel flow", [
        ("W_max", abs(spec.wmax - 0.93) <= 0.01, f"{spec.wmax:.5f}"),
        ("W_min", abs(spec.wmin) <= 1e-6, f"{spec.wmin:.1e}"),
        ("sweep decreasing", sweep["decreasing"], "monotone"),
        ("parameters", within_last_digit(p.delta, 0.0907) and within_last_digit(p.sigma, 0.2186),
         f"({p.delta:.6g}, {p.sigma:.6g})"),
        ("hull in diagram", p.certified and inside and pts.size >= 256, f"{pts.size} samples"),
        ("k=1e3 bounded", bool(np.all(np.isfinite(norms))) and norms.max() <= 1e3 * norms[0],
         f"max norm {norms.max():.2g}"),
        ("SBDF3 unstable", any(not r["stable"] for r in probe),
         f"unstable k: {[r['k'] for r in probe if not r['stable']]}"),
        ("runtime", dt <= 300.0, f"{dt:.0f}s"),
    ])
    assert ok


def _rayleigh(pair, p, n, rng):
    negA, B = -pair.A, pair.B
    m = negA.shape[0]
    V = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    if p == 0:
        num = np.einsum("in,in->n", V.conj(), np.linalg.solve(negA, B @ V))
        den = np.einsum("in,in->n", V.conj(), V)
    elif p == 1:
        num = np.einsum("in,in->n", V.conj(), B @ V)
        den = np.einsum("in,in->n", V.conj(), negA @ V)
    else:
        num = np.einsum("in,in->n", V.conj(), negA @ (B @ V))
        den = np.einsum("in,in->n", V.conj(), negA @ (negA @ V))
    return num / den.real


def test_criterion_10_spectra_cross_oracles(verdict):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst_rq = 0.0
    for i in range(20):
        n = (5, 8)[i % 2]
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = -(M @ M.conj().T + 0.5 * np.eye(n))
        B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        pair = SplittingPair(A, B)
        p = i % 3
        S = w_p_set(pair, float(p))
        worst_rq = max(worst_rq, float(S.distance_outside(_rayleigh(pair, p, 10_000, rng)).max()))
    worst_normal = 0.0
    for _ in range(10):
        Q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        lam = rng.normal(size=6) + 1j * rng.normal(size=6)
        S = numerical_range(Q @ np.diag(lam) @ Q.conj().T)
        ref = convex_hull(lam)
        worst_normal = max(worst_normal, max(np.abs(S.hull - v).min() for v in ref),
                           max(np.abs(ref - v).min() for v in S.hull))
    worst_scale = 0.0
    for sigma in (0.3, 2.5, 40.0):
        M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        A = -(M @ M.conj().T + 0.5 * np.eye(6))
        L = A + rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        for p in (0.0, 1.0, 2.0):
            mapped = rescale(w_p_set(SplittingPair(A, L), p, refine=0), sigma)
            direct = w_p_set(SplittingPair(sigma * A, L - sigma * A), p, refine=0)
            worst_scale = max(worst_scale, float(np.abs(mapped.points - direct.points).max()))
    dt = time.perf_counter() - t0
    ok = verdict("10. spectra cross-oracles", [
        ("Rayleigh quotients inside", worst_rq <= 1e-8, f"max distance {worst_rq:.1e}"),
        ("normal hulls", worst_normal <= 1e-10, f"max dev {worst_normal:.1e}"),
        ("rescaling identity", worst_scale <= 1e-10, f"max dev {worst_scale:.1e}"),
        ("runtime", dt < 60.0, f"{dt:.1f}s"),
    ])
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
