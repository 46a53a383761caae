"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are
repeated in the terminal summary.  A failing criterion is left failing.
Run directly (``python tests/test_acceptance.py``) for the lines alone.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.special import erf

sys.path.insert(0, str(Path(__file__).parent))

from oracles import monte_carlo_cdf  # noqa: E402
from reference import LATTICE, TABLE1, TABLE2, TABLE2_M, TABLE3, TABLE3_Q, TABLE3_SUSPECT  # noqa: E402
from rosdist import specfun as sf  # noqa: E402
from rosdist.cumulants import c2_closed, c3_closed, c_k, kappa, moments_from_cumulants  # noqa: E402
from rosdist.dist import (Rosenblatt, berry_esseen_bound, chisq_sum_cdf_pdf, edgeworth_cdf,  # noqa: E402
                          edgeworth_model, edgeworth_pdf, get_spectrum, head_cdf_pdf, rosenblatt_cdf)
from rosdist.params import sigma_of_D  # noqa: E402
from rosdist.levy import LevyModel, left_tail_bound, levy_density, levy_normalization  # noqa: E402
from rosdist.spectrum import converge_spectrum, kappa_from_spectrum, lambda_sequence, tail_identity_residual  # noqa: E402

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}
MC_SAMPLES = 10**8
MC_SEED = 20261014


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def test_criterion_01_table1():
    t0 = time.time()
    worst, misses = 0.0, []
    for D, row in TABLE1.items():
        lam = converge_spectrum(D, 10).lambdas
        for n, (v, ref) in enumerate(zip(lam, row), start=1):
            unit = 10.0 ** (math.floor(math.log10(ref)) - 3)
            err = abs(v - ref) / unit
            worst = max(worst, err)
            if err > 1.0:
                misses.append(f"D={D} n={n}: {v:.5g} vs {ref}")
    ok = not misses
    detail = f"{40 - len(misses)}/40 cells within one unit of the 4th significant digit, worst {worst:.2f} units"
    if misses:
        detail += f"; e.g. {misses[-1]}"
    report(1, ok, detail + f" ({time.time() - t0:.0f} s)")
    assert ok, misses


def test_criterion_02_table2():
    t0 = time.time()
    errs = {}
    for N, row in TABLE2.items():
        for M, ref in zip(TABLE2_M, row):
            errs[(N, M)] = abs(rosenblatt_cdf(0.3, 0.0, M, N) - ref)
    worst = max(errs, key=errs.get)
    ok = all(e <= 2e-5 for e in errs.values())
    report(2, ok, f"20 cells, max error {errs[worst]:.1e} at (N, M) = {worst} ({time.time() - t0:.0f} s)")
    assert ok


def _mc_pin(D, q, x):
    # the remainder takes the exact totals (variance 1, closed-form kappa_3)
    # minus the explicit head; a power-law tail from n = M + 1 would miss
    # about 2.4e-4 of variance because lambda_n still sits above C n^(D-1)
    spec = get_spectrum(D)
    lam = spec.lambdas
    var = 1.0 - 2.0 * float(np.sum(lam**2))
    k3 = 8.0 * sigma_of_D(D) ** 3 * c3_closed(D) - 8.0 * float(np.sum(lam**3))
    p, se = monte_carlo_cdf(spec.lambdas, (var, k3), x, MC_SAMPLES, seed=MC_SEED)
    return float(p[0]), float(se[0])


def test_criterion_03_table3():
    t0 = time.time()
    errs, pins = {}, []
    for D, row in TABLE3.items():
        R = Rosenblatt(D)
        for q, ref in zip(TABLE3_Q, row):
            x = R.quantile(q)
            if (D, q) in TABLE3_SUSPECT:
                p, se = _mc_pin(D, q, x)
                pins.append((D, q, x, p, se, abs(p - q) <= 3 * se))
            else:
                errs[(D, q)] = abs(x - ref)
    bad = {k: v for k, v in errs.items() if v > 5e-3}
    ok = not bad and all(p[-1] for p in pins)
    worst = max(errs, key=errs.get)
    detail = f"{len(errs) - len(bad)}/{len(errs)} printed cells within 5e-3 (worst {errs[worst]:.1e} at D, q = {worst})"
    for D, q, x, p, se, good in pins:
        detail += f"; pinned D={D} q={q}: x={x:.4f}, MC P={p:.6f} (se {se:.1e}, {abs(p - q) / se:.1f} se)"
    report(3, ok, detail + f" ({time.time() - t0:.0f} s)")
    assert ok, bad


def test_criterion_04_closed_forms():
    worst = 0.0
    for D in LATTICE:
        worst = max(worst,
                    abs(c_k(D, 2, use_closed_form=False) / c2_closed(D) - 1),
                    abs(c_k(D, 3, use_closed_form=False) / c3_closed(D) - 1))
    ok = worst <= 1e-6
    report(4, ok, f"max relative deviation of c2, c3 over the lattice {worst:.1e}")
    assert ok


def test_criterion_05_variance():
    cum = max(abs(kappa(D, 2, use_closed_form=False) - 1) for D in LATTICE)
    spec = max(abs(kappa_from_spectrum(get_spectrum(D), 2) - 1) for D in LATTICE)
    ok = cum <= 1e-6 and spec <= 1e-3
    report(5, ok, f"cumulant route |k2-1| <= {cum:.1e}, spectrum route (M=50) <= {spec:.1e}")
    assert ok


def test_criterion_06_zeta_identity():
    res = {D: tail_identity_residual(get_spectrum(D)) for D in (0.1, 0.2, 0.3, 0.4)}
    worst = max(res, key=lambda d: abs(res[d]))
    ok = all(abs(v) <= 5e-3 for v in res.values())
    report(6, ok, f"max |residual| {abs(res[worst]):.1e} at D={worst}")
    assert ok


def test_criterion_07_levy():
    norm, r0, rinf = 0.0, 0.0, 0.0
    for D in LATTICE:
        m = LevyModel(get_spectrum(D))
        norm = max(norm, abs(levy_normalization(m) - 1))
        C, lam1 = m.spec.C, m.spec.lambdas[0]
        lim0 = 2 ** (D / (1 - D)) * C ** (1 / (1 - D)) * math.gamma(1 / (1 - D)) / (1 - D)
        u = 1e-4
        r0 = max(r0, abs(levy_density(m, u) * u ** ((2 - D) / (1 - D)) / lim0 - 1))
        u = 40.0
        rinf = max(rinf, abs(2 * u * levy_density(m, u) * math.exp(u / (2 * lam1)) - 1))
    ok = norm <= 1e-3 and r0 <= 0.02 and rinf <= 0.02
    report(7, ok, f"|norm-1| <= {norm:.1e}; ratio-1 at u=1e-4 <= {r0:.1e}, at u=40 <= {rinf:.1e}")
    assert ok


def test_criterion_08_limits():
    x = np.linspace(-0.7, 4.0, 4701)
    chi = erf(np.sqrt(np.maximum(math.sqrt(2) * x + 1, 0) / 2))
    diff = np.abs(Rosenblatt(0.01).cdf(x) - chi)
    small = float(diff.max())
    xg = np.linspace(-6, 10, 3201)
    d45 = float(np.max(np.abs(Rosenblatt(0.45).cdf(xg) - sf.std_normal_cdf(xg))))
    d49 = float(np.max(np.abs(Rosenblatt(0.49).cdf(xg) - sf.std_normal_cdf(xg))))
    ok = small <= 5e-3 and d49 < d45
    report(8, ok, f"D=0.01 sup distance to chi-square law {small:.2e} at x={x[diff.argmax()]:.3f} (tol 5e-3); "
                  f"sup|F-Phi| {d49:.1e} at D=0.49 vs {d45:.1e} at D=0.45")
    assert ok


def test_criterion_09_properties():
    checks = {}
    x = np.linspace(-4, 30, 3401)
    for D in LATTICE:
        R = Rosenblatt(D)
        F = R.cdf(x, clamp=False)
        p = R.pdf(x, clamp=False)
        checks.setdefault("cdf monotone", []).append(np.all(np.diff(F) >= -1e-7))
        checks.setdefault("pdf >= 0", []).append(p.min() >= -1e-6)
        from scipy.integrate import simpson
        checks.setdefault("int pdf = 1", []).append(abs(simpson(p, x=x) - 1) <= 1e-4)
        checks.setdefault("round trip", []).append(
            all(abs(R.cdf(R.quantile(q)) - q) <= 1e-5 for q in (0.001, 0.05, 0.5, 0.95, 0.999)))
        checks.setdefault("left tail", []).append(
            all(R.cdf(-v) <= left_tail_bound(v) for v in (0.5, 1.0, 1.5, 2.0)))
        em = edgeworth_model(get_spectrum(D), 11, 6)
        xs = np.linspace(-6, 6, 121)
        fd = (edgeworth_cdf(em, xs + 1e-5) - edgeworth_cdf(em, xs - 1e-5)) / 2e-5
        checks.setdefault("edgeworth pdf = cdf'", []).append(np.max(np.abs(fd - edgeworth_pdf(em, xs))) <= 1e-6)
    rng = np.random.default_rng(9)
    k = rng.uniform(-2, 2, size=(100, 4))
    k[:, 0] = 0.0
    bell = [moments_from_cumulants(r) for r in k]
    checks["bell mu3 = k3"] = [abs(m[2] - r[2]) <= 1e-13 for m, r in zip(bell, k)]
    checks["bell mu4 = k4 + 3k2^2"] = [abs(m[3] - r[3] - 3 * r[1] ** 2) <= 1e-12 for m, r in zip(bell, k)]
    s_vals, m_vals = rng.uniform(1.01, 4, 100), rng.integers(1, 1000, 100)
    checks["hurwitz recurrence"] = [
        abs(sf.hurwitz_zeta(s, m) - sf.hurwitz_zeta(s, m + 1) - m ** (-s)) <= 1e-14 * max(1, sf.hurwitz_zeta(s, m))
        for s, m in zip(s_vals, m_vals)]
    xs = np.linspace(-5, 5, 101)
    H = sf.hermite_table(31, xs)
    checks["hermite recurrence"] = [
        np.all(np.abs(H[j + 1] - (xs * H[j] - j * H[j - 1])) <= 1e-10 * np.maximum(1, np.abs(H[j + 1])))
        for j in range(1, 31)]
    spec = get_spectrum(0.3)
    lam = spec.lambdas[0]
    checks["chi-square head M = 2"] = [
        abs(head_cdf_pdf(spec, 2, v, diagnostic=True)[0] - erf(math.sqrt((v / lam + 1) / 2))) <= 1e-8
        for v in (-0.5, 0.0, 1.0, 3.0)]
    failed = [name for name, vals in checks.items() if not all(vals)]
    ok = not failed
    report(9, ok, f"{len(checks) - len(failed)}/{len(checks)} property groups hold" + (f"; failed {failed}" if failed else ""))
    assert ok, failed


def test_criterion_10_berry_esseen():
    spec = get_spectrum(0.3)
    x = np.linspace(-4, 4, 41)
    parts, ok = [], True
    for M in (10, 50):
        tail = lambda_sequence(spec, M + 1999)[M - 1:]
        sd = math.sqrt(2 * np.sum(tail**2))
        F = np.array([chisq_sum_cdf_pdf(tail / sd, v)[0] for v in x])
        dist = float(np.max(np.abs(F - sf.std_normal_cdf(x))))
        bound = berry_esseen_bound(spec, M)
        ok &= dist <= bound
        parts.append(f"M={M}: {dist:.4f} <= {bound:.4f}")
    report(10, ok, "; ".join(parts))
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
