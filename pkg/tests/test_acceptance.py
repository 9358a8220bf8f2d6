"""Acceptance criteria 1-14. Each test prints one PASS/FAIL line with the measured values."""

import math
import subprocess
import sys
import time

import mpmath
import numpy as np
import pytest
from _cases import gaussian_case, random_spd

from wimpyrg.composition import ck_perr_exact, reduction1_check
from wimpyrg.dist import entropy
from wimpyrg.errors import NoConvergence, RGBreakdown
from wimpyrg.gaussian import gauss_delta, gauss_norm, gauss_theta, gauss_theta_delta, mc_gauss, rank1_inverse
from wimpyrg.noiseless import NoiselessProblem, gamma0, gamma1_noiseless, perr_old
from wimpyrg.noisy import Channel, NoisyProblem, _alphas, capacity, channel_stats, dt_series, gamma1_noisy, t_series
from wimpyrg.oracle import ck_perr_bruteforce, noisy_mc_perr, ruly_half_check
from wimpyrg.rg import RGConfig, solve
from wimpyrg.special import erf, erfc

RESULTS = []
Q = np.array([0.20, 0.30, 0.13, 0.37])
BSC = Channel.bsc(0.01)


def report(num, ok, detail):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} | {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def test_c01_entropy():
    h, dt = timed(entropy, Q)
    report(1, abs(h - 1.316) <= 5e-4 and dt < 1e-3, f"H(Q)={h:.6f} nats (target 1.316 +- 5e-4), {dt * 1e3:.3f} ms")


def test_c02_capacity():
    s = channel_stats([0.5, 0.5], BSC)
    (C, r), dt = timed(capacity, BSC)
    ok = (abs(s.C1 - 0.637146) <= 1e-3 and abs(C - 0.637146) <= 1e-3
          and np.abs(r - 0.5).max() <= 1e-6 and abs(C - s.C1) <= 1e-6 and dt < 0.01)
    report(2, ok, f"C1={s.C1:.6f}, C={C:.6f} nats = {C / math.log(2):.4f} bits, "
                  f"argmax={np.round(r, 8).tolist()}, {dt * 1e3:.2f} ms")


def test_c03_reference_point():
    (state, rep), dt = timed(solve, NoiselessProblem(Q, 20, entropy(Q) - 0.15825), RGConfig(s_fin=7.5, ds=0.01))
    checks = {
        "n_fin": abs(rep.n_fin / 36160.8 - 1) <= 1e-3,
        "unren": abs(rep.perr_unren - 0.976272) <= 5e-4,
        "ren": abs(rep.perr / 0.925769 - 1) <= 1e-2,
        "dR_fin": abs(rep.dR_fin / -0.00271302 - 1) <= 2e-2,
        "phi0_init": abs(rep.phi0_init / 0.15137 - 1) <= 0.1,
        "phi0_fin": abs(rep.phi0_fin / 0.00234084 - 1) <= 0.1,
        "phi1_init": abs(rep.phi1_init / 0.397863 - 1) <= 0.1,
        "phi1_fin": abs(rep.phi1_fin / 0.0105788 - 1) <= 0.1,
        "cycles": abs(rep.cycles - 6) <= 2,
        "runtime": dt < 5.0,
    }
    failed = [k for k, v in checks.items() if not v]
    report(3, not failed,
           f"n_fin={rep.n_fin:.1f} unren={rep.perr_unren:.6f} ren={rep.perr:.6f} dR_fin={rep.dR_fin:.6g} "
           f"phi0={rep.phi0_init:.5g}->{rep.phi0_fin:.5g} phi1={rep.phi1_init:.5g}->{rep.phi1_fin:.5g} "
           f"cycles={rep.cycles} {dt:.2f}s" + (f" failed={failed}" if failed else ""))


def test_c04_ck_oracle():
    t = time.perf_counter()
    worst = 0.0
    cases = [(2, n) for n in range(1, 9)] + [(3, n) for n in range(1, 6)]
    rng = np.random.default_rng(4)
    for N, n in cases:
        q = rng.dirichlet(np.ones(N))
        for R in np.linspace(0.0, math.log(N), 7):
            worst = max(worst, abs(ck_perr_exact(q, n, R) - ck_perr_bruteforce(q, n, R)))
    dt = time.perf_counter() - t
    report(4, worst <= 1e-12 and dt < 10, f"max |exact - brute force| = {worst:.2e} over {len(cases)} (N, n) x 7 rates, {dt:.2f}s")


def test_c05_integral_count():
    t = time.perf_counter()
    vals = {n: reduction1_check(n) for n in (50, 100, 200)}
    dt = time.perf_counter() - t
    devs = [abs(vals[n] - 1) for n in (50, 100, 200)]
    ok = 0.98 <= vals[200] <= 1.02 and devs[0] > devs[1] > devs[2] and dt < 1
    report(5, ok, "I(1)/2^n = " + ", ".join(f"{v:.6f} (n={n})" for n, v in vals.items()) + f", {dt:.3f}s")


def test_c06_gaussian_vs_mc():
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(20):
        g, u, v, alpha, alpha_p = gaussian_case(rng, 2 + case % 2)
        for exact, con in [
            (gauss_norm(g), None),
            (gauss_theta(g, u, alpha), ("theta", u, alpha)),
            (gauss_delta(g, v), ("delta", v)),
            (gauss_theta_delta(g, u, v, alpha_p), ("both", u, v, alpha_p)),
        ]:
            est, se = mc_gauss(g, con, samples=100_000, seed=case)
            worst = max(worst, abs(est - exact) / se)
    dt = time.perf_counter() - t
    report(6, worst <= 3 and dt < 30, f"max |formula - MC| / SE = {worst:.2f} over 20 cases x 4 integrals, {dt:.1f}s")


def test_c07_rank1_lemma():
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_rel = worst_proj = 0.0
    for _ in range(100):
        a = random_spd(rng, 3)
        v = rng.normal(size=3)
        lemma = rank1_inverse(np.linalg.inv(a), v)
        direct = np.linalg.inv(a + np.outer(v, v) / 1e-9)
        worst_rel = max(worst_rel, np.linalg.norm(lemma - direct) / np.linalg.norm(direct))
        worst_proj = max(worst_proj, np.abs(lemma @ v).max())
    dt = time.perf_counter() - t
    report(7, worst_rel <= 1e-5 and worst_proj <= 1e-12 and dt < 1,
           f"max rel diff {worst_rel:.2e}, max |B^-1 v| {worst_proj:.2e}, {dt:.3f}s")


def test_c08_erf():
    xs = np.linspace(-6, 6, 1000)
    t = time.perf_counter()
    e, ec = erf(xs), erfc(xs)
    e_neg, ec_neg = erf(-xs), erfc(-xs)
    dt = time.perf_counter() - t
    sym = max(np.abs(e_neg + e).max(), np.abs(ec_neg - (2 - ec)).max())
    worst = 0.0
    with mpmath.workdps(30):
        c = 2 / mpmath.sqrt(mpmath.pi)
        for x, a, b in zip(xs, e, ec):
            ref_erf = float(c * mpmath.quad(lambda s: mpmath.exp(-s * s), [0, x]))
            ref_erfc = float(c * mpmath.quad(lambda s: mpmath.exp(-s * s), [x, mpmath.inf]))
            worst = max(worst, abs(a / ref_erf - 1), abs(b / ref_erfc - 1))
    report(8, sym <= 1e-13 and worst <= 1e-12 and dt < 1,
           f"symmetry residual {sym:.1e}, max rel error vs quadrature {worst:.1e}, {dt * 1e3:.1f} ms for 4000 evaluations")


def test_c09_critical_exponents():
    t = time.perf_counter()
    direction = np.array([0.3, -0.1, 0.5, -0.7])
    s = channel_stats([0.5, 0.5], BSC)
    w = np.array([[0.3, -0.5], [0.4, -0.2]])
    jdir = s.Q * (w - np.sum(s.Q * w))  # relative to each cell, sums to zero
    fns = {
        "g0 noiseless": lambda k: gamma0(Q + k * direction, Q),
        "g1 noiseless": lambda k: gamma1_noiseless(Q + k * direction, Q),
        "g0 noisy": lambda k: gamma0(s.Q.ravel() + k * jdir.ravel(), s.Q.ravel()),
    }
    for order in (2, 3, 4):
        fns[f"g1 noisy t{order}"] = lambda k, o=order: gamma1_noisy(s.Q + k * jdir, s.Q, s, o)
    worst, ratios = 0.0, []
    for fn in fns.values():
        devs = [abs(fn(k) - 0.5) for k in (1e-2, 1e-3, 1e-4)]
        worst = max(worst, devs[1])
        ratios += [devs[1] / devs[0], devs[2] / devs[1]]
    dt = time.perf_counter() - t
    linear = all(0.05 <= r <= 0.2 for r in ratios)
    report(9, worst <= 0.01 and linear and dt < 1,
           f"max |gamma - 1/2| at 1e-3 = {worst:.2e}; decade ratios in [{min(ratios):.3f}, {max(ratios):.3f}], {dt * 1e3:.1f} ms")


def test_c10_series_consistency():
    s = channel_stats([0.5, 0.5], BSC)
    dp = np.array([[1e-3, -1e-3], [-1e-3, 1e-3]])
    t = time.perf_counter()
    a2 = _alphas(s.Qy, s)[1]
    dt_val = dt_series(s.Q + dp, dp, s, 2)
    t_val = t_series(s.Q + dp, s, 2)
    dt = time.perf_counter() - t
    e1, e2 = abs(a2 - s.alpha_sq_mean), abs(dt_val - 2 * t_val)
    report(10, e1 <= 1e-12 and e2 <= 1e-12 and dt < 1e-3,
           f"|alpha_2 - <alpha^2>| = {e1:.1e}, |Dt - 2t| = {e2:.1e}, {dt * 1e3:.3f} ms")


def test_c11_noiseless_shape():
    t = time.perf_counter()
    h = entropy(Q)
    r_top = math.log(4) - 1e-4
    ordering_ok, converged, broke = True, 0, 0
    for R in np.linspace(h - 0.2, r_top, 40):
        try:
            _, rep = solve(NoiselessProblem(Q, 20, R))
        except (RGBreakdown, NoConvergence):
            broke += 1
            continue
        converged += 1
        ordering_ok &= rep.perr <= rep.perr_unren
    old_top = perr_old(NoiselessProblem(Q, 20, r_top))
    try:
        ren_top = solve(NoiselessProblem(Q, 20, r_top))[1].perr
        ren_desc = f"{ren_top:.3g}"
    except RGBreakdown as exc:
        ren_top, ren_desc = math.inf, f"breakdown at s={exc.s:.3g}"
    dt = time.perf_counter() - t
    ok = ordering_ok and old_top < 1e-3 and ren_top < 1e-3 and dt < 60
    report(11, ok, f"ren <= unren on all {converged} converged points ({broke} broke down): {ordering_ok}; "
                   f"at R = ln 4 - 1e-4: old={old_top:.3g}, ren={ren_desc}; {dt:.1f}s")


def test_c12_noisy_windows():
    t = time.perf_counter()
    c1 = channel_stats([0.5, 0.5], BSC).C1
    grid = np.round(np.arange(-0.6, 0.1001, 0.05), 10)
    summary, ok = [], True
    for order in (2, 3, 4):
        status = []
        for d in grid:
            try:
                solve(NoisyProblem([0.5, 0.5], BSC, 20, c1 + d), RGConfig(t_order=order))
                status.append("ok")
            except RGBreakdown:
                status.append("bd")
            except NoConvergence:
                status.append("nc")
        inside = [i for i, s in enumerate(status) if s == "ok"]
        if not inside:
            ok = False
            summary.append(f"t{order}: no converged point")
            continue
        lo, hi = inside[0], inside[-1]
        contiguous = all(s == "ok" for s in status[lo:hi + 1])
        outside = status[:lo] + status[hi + 1:]
        finite = lo > 0 and hi < len(grid) - 1
        good = contiguous and finite and all(s == "bd" for s in outside)
        ok &= good
        nc = outside.count("nc")
        summary.append(f"t{order} {'ok' if good else 'FAIL'}: [{grid[lo]:+.2f}, {grid[hi]:+.2f}]"
                       + (f" ({nc} outside did not converge)" if nc else ""))
    dt = time.perf_counter() - t
    report(12, ok and dt < 120, "; ".join(summary) + f"; {dt:.1f}s")


def test_c13_ruly_half():
    t = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        r = noisy_mc_perr([0.5, 0.5], Channel.bsc(0.05), 10, 32, trials=10_000, seed=seed)
        rep = ruly_half_check(r)
        worst = max(worst, rep["median"] / (2 * rep["mean"]))
    dt = time.perf_counter() - t
    report(13, worst <= 1 and dt < 30, f"max median / (2 mean) = {worst:.3f} over 10 seeds, {dt:.1f}s")


def test_c14_determinism(tmp_path):
    q = "0.2,0.3,0.13,0.37"
    cmds = {
        "noiseless": ["noiseless-sweep", "--q", q, "--r-min", "1.1", "--r-max", "1.35", "--steps", "3"],
        "noisy": ["noisy-sweep", "--bsc", "0.01", "--r-min", "0.6", "--r-max", "0.65", "--steps", "2", "--t-order", "2"],
        "diag": ["diag", "--q", q, "--dr", "-0.15825"],
        "oracle": ["oracle", "mc", "--bsc", "0.05", "--n", "8", "--r-min", "0.3", "--r-max", "0.5",
                   "--steps", "2", "--trials", "1000", "--seed", "9"],
    }
    same = {}
    for name, args in cmds.items():
        outs = []
        for k in range(2):
            path = tmp_path / f"{name}{k}.out"
            subprocess.run([sys.executable, "-m", "wimpyrg", *args, "--out", str(path)], check=True)
            outs.append(path.read_bytes())
        same[name] = outs[0] == outs[1] and len(outs[0]) > 0
    report(14, all(same.values()), "byte-identical reruns: " + ", ".join(f"{k}={v}" for k, v in same.items()))
