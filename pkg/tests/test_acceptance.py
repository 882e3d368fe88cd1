"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary) and then asserts, so an unmet criterion shows up red.
"""

import cmath
import math
import time

import numpy as np

from detent import analysis as A
from detent import dynamics as D
from detent.analysis import CriticalKind
from detent.covariance import MomentMethod, covariance_matrix_late, mode_moments
from detent.entanglement import eta_reduced, negativity, symplectic_eigenvalues
from detent.errors import DetentError
from detent.model import Branch, SystemParams, mode_view
from detent.specfun import exp_integral_ei, lambert_w

from oracles import ei_quadrature


def random_stable_points(n, seed=7):
    """Zero-temperature points well inside the stable, underdamped region."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        omega = rng.uniform(0.5, 3.0)
        sigma = rng.uniform(-0.8, 0.8) * omega**2
        wmin_sq = omega**2 - abs(sigma)
        ell = rng.uniform(0.3, 30.0) / math.sqrt(wmin_sq)
        gamma = omega * 10 ** rng.uniform(-3, math.log10(0.2))
        lam = omega * 10 ** rng.uniform(3, 5)
        if 2 * gamma < 0.5 * wmin_sq * ell and gamma < 0.5 * math.sqrt(wmin_sq):
            out.append(SystemParams(omega=omega, gamma=gamma, sigma=sigma, ell=ell, lambda_cut=lam))
    return out


def test_criterion_1_special_functions(verdict):
    t0 = time.perf_counter()
    worst_ei = 0.0
    for r in np.geomspace(0.1, 50.0, 9):
        for phase in np.linspace(-math.pi + 0.05, math.pi - 0.05, 12):
            z = cmath.rect(r, phase)
            ref = ei_quadrature(z)
            worst_ei = max(worst_ei, abs(exp_integral_ei(z) - ref) / abs(ref))
    worst_w = 0.0
    rng = np.random.default_rng(1)
    for z in list(rng.uniform(-1 / math.e + 1e-9, -1e-9, 200)):
        for branch in (0, -1):
            w = lambert_w(branch, z, real=True)
            worst_w = max(worst_w, abs(w * math.exp(w) - z) / abs(z))
    for z in 10 ** rng.uniform(-6, 6, 200) * np.exp(1j * rng.uniform(-math.pi, math.pi, 200)):
        for branch in (0, -1):
            w = lambert_w(branch, complex(z))
            worst_w = max(worst_w, abs(w * cmath.exp(w) - z) / abs(z))
    elapsed = time.perf_counter() - t0
    ok = worst_ei <= 1e-10 and worst_w <= 1e-12 and elapsed < 5
    verdict(1, "special functions", ok,
            f"Ei vs quadrature {worst_ei:.2e}, Lambert residual {worst_w:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_dual_path_covariance(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for p in random_stable_points(20):
        for mode in Branch:
            a = mode_moments(mode, p, MomentMethod.CLOSED_FORM)
            b = mode_moments(mode, p, MomentMethod.QUADRATURE)
            worst = max(worst, abs(a.chi_sq - b.chi_sq) / a.chi_sq, abs(a.p_sq - b.p_sq) / a.p_sq)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30
    verdict(2, "closed form vs quadrature", ok,
            f"max relative difference {worst:.2e} on 20 points, {elapsed:.2f}s")
    assert ok


def _reduced_newton(mode, params, y=0.0):
    for _ in range(200):
        f = D.strong_damping_residual(mode, y, params)
        gl = 2 * params.gamma * params.ell
        step = f / (gl + mode_view(params, mode, require_underdamped=False).sign
                    * gl * cmath.exp(-y))
        y -= step
        if abs(step) <= 1e-15 * max(1.0, abs(y)):
            return y
    raise AssertionError("Newton on the reduced equation did not converge")


def test_criterion_3_pole_consistency(verdict):
    t0 = time.perf_counter()
    ratios = []
    # omega_pm ell <= 2.5 keeps the first-order pole inside its stated error scaling
    for gamma, ell in ((0.01, 1.0), (0.02, 2.0), (0.05, 1.5), (0.005, 0.5), (0.03, 2.2)):
        p = SystemParams(1.0, gamma, 0.0, ell, 1e3)
        for mode in Branch:
            w = mode_view(p, mode).omega_mode
            pert = D.dominant_pole_perturbative(mode, p).dominant[0]
            newton = D.dominant_pole_numeric(mode, p).dominant[0]
            ratios.append(abs(pert - newton) / ((gamma / (w * w * ell)) ** 2 * w))
    K = max(ratios)
    worst = 0.0
    for omega in (0.5, 1.0, 3.0):
        for gamma, ell in ((1.0, 3.0), (5.0, 2.0), (20.0, 10.0), (3.0, 50.0)):
            p = SystemParams(omega, gamma, 0.0, ell, 1e4)
            assert 2 * gamma * ell > 5
            y_lambert = D.strong_damping_root(Branch.PLUS, p) * ell
            y_newton = _reduced_newton(Branch.PLUS, p)
            worst = max(worst, abs(y_lambert - y_newton) / max(1.0, abs(y_newton)))
    elapsed = time.perf_counter() - t0
    ok = len(ratios) == 10 and K < 10 and worst <= 1e-10 and elapsed < 10
    verdict(3, "pole consistency", ok,
            f"fitted K = {K:.2f} over {len(ratios)} poles, Lambert vs Newton {worst:.1e}, "
            f"{elapsed:.2f}s")
    assert ok


def test_criterion_4_transient(verdict):
    t0 = time.perf_counter()
    p = SystemParams(1.0, 0.05, 0.0, 3.0, 1e3)
    tr = D.simulate_transient(p, Branch.PLUS, 1.0, 0.3, 10.0)
    first = tr.times < p.ell
    exact = D.damped_oscillator(p.gamma, 1.0, 1.0, 0.3, tr.times[first])[0]
    first_err = float(np.max(np.abs(tr.chi[first] - exact)))
    rel = {}
    for mode in Branch:
        tr = D.simulate_transient(p, mode, 1.0, 0.0, 400.0)
        x = np.abs(tr.chi)
        peaks = np.where((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:]))[0] + 1
        late = tr.times[peaks] > 60.0
        slope = np.polyfit(tr.times[peaks][late], np.log(x[peaks][late]), 1)[0]
        Gamma = D.effective_parameters(mode, p).Gamma
        rel[mode.value] = abs(-slope - Gamma) / Gamma
    elapsed = time.perf_counter() - t0
    ok = first_err <= 1e-8 and max(rel.values()) <= 0.10 and elapsed < 20
    verdict(4, "transient solver", ok,
            f"first interval {first_err:.1e}, envelope vs Gamma plus {rel['plus']:.1%} "
            f"minus {rel['minus']:.1%}, {elapsed:.2f}s")
    assert ok


def test_criterion_5_entanglement_algebra(verdict):
    points = random_stable_points(20) + [
        SystemParams(5.0, float(g), float(s), 0.05, 1e4)
        for g in np.linspace(0.01, 0.1, 5) for s in np.linspace(0.05, 0.5, 5)]
    worst = 0.0
    for p in points:
        V = covariance_matrix_late(p)
        lt_sq, gt_sq, _ = eta_reduced(V.plus.chi_sq, V.minus.chi_sq, V.plus.p_sq, V.minus.p_sq)
        gt, lt = symplectic_eigenvalues(V)
        worst = max(worst, abs(lt_sq - lt**2) / lt**2, abs(gt_sq - gt**2) / gt**2)
    exact = negativity(0.5) == (0.0, 0.0) and negativity(0.25) == (1.0, math.log(2))
    ok = worst <= 1e-10 and exact
    verdict(5, "entanglement algebra", ok,
            f"reduced vs full spectrum {worst:.1e} on {len(points)} matrices, "
            f"threshold values exact: {exact}")
    assert ok


def test_criterion_6_far_separation_constant(verdict):
    # the O(gamma) shift at gamma/omega = 1e-3 exceeds 1% of the leading constant for
    # sigma/omega^2 >= 0.5, so the gamma -> 0 limit is checked two ways: the constant
    # with its first-order damping term at 1e-3, and the bare constant at 1e-6
    rows = []
    ok = True
    for sigma in (0.2, 0.5, 0.8):
        bare = A.asymptotic_eta_sq(1.0, sigma)
        eta_3 = A.eta_sq_of_ell(SystemParams(1.0, 1e-3, sigma, 100.0, 1e3))
        eta_6 = A.eta_sq_of_ell(SystemParams(1.0, 1e-6, sigma, 100.0, 1e3))
        with_gamma = A.asymptotic_eta_sq(1.0, sigma, 1e-3, 1e3)
        e1 = abs(eta_3 - with_gamma) / with_gamma
        e2 = abs(eta_6 - bare) / bare
        literal = abs(eta_3 - bare) / bare
        ok &= e1 <= 0.01 and e2 <= 0.01
        rows.append(f"sigma={sigma}: {e1:.3%} with damping term, {e2:.3%} bare at 1e-6 "
                    f"(bare at 1e-3: {literal:.2%})")
    verdict(6, "far-separation constant", ok, "; ".join(rows))
    assert ok


def test_criterion_7_regime_phenomenology(verdict):
    t0 = time.perf_counter()
    base = SystemParams(5.0, 0.1, 10.0, 1.0, 1e4)
    switch_ok, floor = True, math.inf
    # each 2 gamma / sigma lies above the stability edge 2 gamma / omega_-^2
    for gamma, sigma in ((0.1, 2.5), (0.1, 5.0), (0.1, 10.0), (0.05, 5.0)):
        p = base.with_(gamma=gamma, sigma=sigma)
        cross = A.branch_switch_separation(p)
        target = 2 * p.gamma / sigma
        switch_ok &= cross is not None and target / 3 <= cross.value <= 3 * target
        floor = min(floor, A.eta_sq_of_ell(p, cross.value) - 0.25)
    far = [A.eta_sq_of_ell(base.with_(sigma=s), 50.0) for s in (2.0, 5.0, 10.0, 15.0)]
    sigma_trend = all(b < a for a, b in zip(far, far[1:]))
    # varsigma < 1 slice, at separations on the entangled side of every ell_<
    weak = SystemParams(5.0, 0.02, 0.5, 1.0, 1e4)
    gamma_trend = True
    for ell in (0.012, 0.015, 0.02):
        vals = [A.eta_sq_of_ell(weak.with_(gamma=g), ell) for g in (0.02, 0.05, 0.1)]
        gamma_trend &= all(b < a for a, b in zip(vals, vals[1:]))
        gamma_trend &= all(0.5 * ell / (2 * g) < 1 for g in (0.02, 0.05, 0.1))
    elapsed = time.perf_counter() - t0
    ok = switch_ok and floor >= -1e-9 and sigma_trend and gamma_trend and elapsed < 120
    verdict(7, "regime phenomenology", ok,
            f"switch within 3x of 2gamma/sigma: {switch_ok}; min eta^2 - 1/4 at switch {floor:.3e}; "
            f"sigma trend {sigma_trend}; gamma trend {gamma_trend}; {elapsed:.2f}s")
    assert ok


def test_criterion_8_critical_separations(verdict):
    t0 = time.perf_counter()
    gammas = np.linspace(0.01, 0.1, 5)
    sigmas = np.linspace(0.05, 0.5, 5)
    numeric_lt = np.full((5, 5), math.nan)
    compared, failures = 0, []
    for i, g in enumerate(gammas):
        for j, s in enumerate(sigmas):
            p = SystemParams(5.0, float(g), float(s), 1.0, 1e4)
            roots = A.critical_separation_numeric(p)
            lts = [r.value for r in roots if r.kind is CriticalKind.ELL_LT]
            gts = [r.value for r in roots if r.kind is CriticalKind.ELL_GT]
            numeric_lt[i, j] = lts[0] if lts else math.nan
            candidates = []
            for formula, refs in ((A.ell_lt_iterated, lts), (A.ell_gt_small_sep, gts),
                                  (A.ell_gt_large_sep, gts)):
                try:
                    r = formula(p)
                except DetentError:
                    continue
                if r.valid:
                    candidates.append((formula.__name__, r.value, refs))
            for name, value, refs in candidates:
                compared += 1
                ref = min(refs, key=lambda x: abs(math.log(x / value))) if refs else None
                if ref is None or abs(value - ref) > 0.15 * ref:
                    failures.append(f"{name} at gamma={g:.4g}, sigma={s:.4g}: {value:.5g} vs "
                                    f"{'no root' if ref is None else f'{ref:.5g}'}")
    trends = bool(np.all(np.diff(numeric_lt, axis=0) > 0) and np.all(np.diff(numeric_lt, axis=1) < 0))
    elapsed = time.perf_counter() - t0
    ok = not failures and trends and elapsed < 180
    detail = (f"{compared - len(failures)}/{compared} valid formula values within 15%; "
              f"ell_< trends {trends}; {elapsed:.1f}s")
    if failures:
        detail += "; off: " + "; ".join(failures)
    verdict(8, "critical separations", ok, detail)
    assert ok


def test_criterion_9_stability_boundary(verdict):
    t0 = time.perf_counter()
    cases = [(1.0, 0.0, 1.0), (1.0, 0.0, 3.0), (1.0, 0.5, 1.0), (2.0, 0.0, 0.5), (2.0, 1.0, 2.0),
             (0.5, 0.0, 4.0), (0.5, 0.1, 2.0), (3.0, 2.0, 0.3), (1.0, -0.4, 2.0), (1.5, 0.5, 1.5)]
    agree = 0
    for omega, sigma, ell in cases:
        flips = []
        for factor in (0.8, 1.2):
            # the plus mode runs away once 2 gamma exceeds omega_+^2 ell
            gamma = factor * (omega**2 + sigma) * ell / 2
            p = SystemParams(omega, gamma, sigma, ell, 1e3)
            s = D.dominant_pole_numeric(Branch.PLUS, p).dominant[0]
            tr = D.simulate_transient(p, Branch.PLUS, 1.0, 0.0, 400 * ell, on_blowup="flag")
            flips.append((s.real > 0, tr.blew_up))
        agree += flips == [(False, False), (True, True)]
    elapsed = time.perf_counter() - t0
    ok = agree == len(cases) and elapsed < 30
    verdict(9, "stability boundary", ok,
            f"{agree}/{len(cases)} straddling pairs flip in both pole and transient, {elapsed:.2f}s")
    assert ok
