"""Acceptance criteria 1-10, one PASS/FAIL line each (see the terminal summary)."""

import math
import time

import numpy as np
import pytest

from family_draws import draw
from lempert_lab import lab
from lempert_lab.bounds import CERTIFIED, LOWER, UPPER, Bound, comparable, consistent, to_scale
from lempert_lab.discs import FAMILIES, has_analytic_verifier, verify_containment
from lempert_lab.domains import Ball, GMinus, GPlain, GTilde, PolyDisc, normal_point
from lempert_lab.errors import LabError
from lempert_lab.lower import (mobius, projection_kr_lower, projection_lower,
                               sqrt_trick_kr_lower, sqrt_trick_lower)
from lempert_lab.sibony import admissibility, levi_form, sibony_candidate, sibony_lower
from lempert_lab.upper import (kobayashi_distance_upper, kobayashi_royden_upper,
                               kr_decomposed_upper, lempert_chain_upper, lempert_upper)

TOL = lab.SLOPE_TOL


def _fits(res):
    return {f["series"]: f for f in res.fits}


def _fit_ok(f, expected):
    return abs(f["slope"] - expected) <= TOL and f["r2"] >= lab.R2_MIN


# --------------------------------------------------------------------------
# 1


def test_c1_ell_exponents(report_criterion):
    t0 = time.perf_counter()
    mus = (0.75, 1.0, 1.5, 2.0)
    res = lab.compute(lab.ExperimentConfig("exponents", mus=mus))
    fits = _fits(res)
    bad = []
    for mu in mus:
        expected = 1 / (2 * mu)
        assert lab.expected_ell_slope(mu) == pytest.approx(expected)
        for kind in ("upper", "lower"):
            f = fits[f"ell-{kind} mu={mu:g}"]
            if not _fit_ok(f, expected):
                bad.append((mu, kind, f["slope"], f["r2"]))
        rows = [r for r in res.rows if r.series in (f"ell-upper mu={mu:g}", f"ell-lower mu={mu:g}")]
        assert all(r.grade == CERTIFIED for r in rows)
        fams = {r.family for r in rows if r.direction == UPPER}
        assert fams <= {"F3", "F4"}, fams
    elapsed = time.perf_counter() - t0
    slopes = ", ".join(f"{s}={f['slope']:.4f}" for s, f in fits.items() if s.startswith("ell-"))
    report_criterion(1, not bad and elapsed < 60, f"{slopes} ({elapsed:.1f}s)")
    assert not bad
    assert elapsed < 60


# --------------------------------------------------------------------------
# 2


@pytest.fixture(scope="module")
def chain_sweep():
    mus = (0.75, 1.0, 1.5, 2.0)
    t0 = time.perf_counter()
    res = lab.compute(lab.ExperimentConfig("exponents", mus=mus))
    return mus, _fits(res), time.perf_counter() - t0


def test_c2_chain_value_mu2():
    D = GPlain(2.0, 2)
    ch = lempert_chain_upper(D, normal_point(D, 0.005), normal_point(D, 0.01), m=2,
                             strategy="paper")
    assert ch.aggregate_ell <= 0.1
    assert ch.grade == CERTIFIED


def test_c2_chain_exponents_attainable(chain_sweep):
    """Chain slopes against 1 - (1 - 1/mu)_+ = min(1, 1/mu)."""
    mus, fits, _ = chain_sweep
    for mu in mus:
        f = fits[f"ell2-upper mu={mu:g}"]
        assert _fit_ok(f, min(1.0, 1.0 / mu)), (mu, f["slope"])


def test_c2_chain_exponents_literal(chain_sweep, report_criterion):
    """Literal criterion: slope 1/mu for every mu, including mu = 0.75 (1/mu = 1.333).

    Expected to fail at mu = 0.75: there the certified projection lower bound
    already scales like eps/2 (slope 1), so no valid chain upper bound can
    have slope 4/3 on this grid.
    """
    mus, fits, elapsed = chain_sweep
    D = GPlain(2.0, 2)
    value = lempert_chain_upper(D, normal_point(D, 0.005), normal_point(D, 0.01), m=2,
                                strategy="paper").aggregate_ell
    bad = [(mu, round(fits[f"ell2-upper mu={mu:g}"]["slope"], 4)) for mu in mus
           if not _fit_ok(fits[f"ell2-upper mu={mu:g}"], 1.0 / mu)]
    slopes = ", ".join(f"mu={mu:g}:{fits[f'ell2-upper mu={mu:g}']['slope']:.4f}" for mu in mus)
    ok = not bad and value <= 0.1 and elapsed < 120
    report_criterion(2, ok, f"chain slopes {slopes}; value(mu=2)={value:.12g}; "
                            f"off-target {bad} (literal 1/mu)")
    assert value <= 0.1
    assert not bad


# --------------------------------------------------------------------------
# 3


def test_c3_qti(report_criterion):
    t0 = time.perf_counter()
    res = lab.compute(lab.ExperimentConfig("qti", mus=(2.0,)))
    f = _fits(res)["ratio mu=2"]
    scan = lab.qti_ratio_scan(2.0)
    growth = scan[-1]["ratio"] / scan[0]["ratio"]
    elapsed = time.perf_counter() - t0
    ok = _fit_ok(f, -0.25) and growth >= 3 and elapsed < 120
    report_criterion(3, ok, f"ratio slope {f['slope']:.4f} (R2 {f['r2']:.5f}), growth {growth:.4f}")
    assert ok


# --------------------------------------------------------------------------
# 4


def test_c4_infinitesimal_gap(report_criterion):
    t0 = time.perf_counter()
    res = lab.compute(lab.ExperimentConfig("kr-gap", mus=(2.0,)))
    fits = _fits(res)
    lo, up = fits["kappa-lower mu=2"], fits["kappa2-upper mu=2"]
    val = kr_decomposed_upper(GPlain(2.0, 2), [-0.01, 0], [1, 0], m=2, strategy="paper").value
    elapsed = time.perf_counter() - t0
    ok = _fit_ok(lo, -0.75) and _fit_ok(up, -0.5) and abs(val - 20) <= 1e-9 and elapsed < 60
    report_criterion(4, ok, f"kappa-lower slope {lo['slope']:.4f}, kappa2-upper slope "
                            f"{up['slope']:.4f}, kappa2(0.01)={val!r}")
    assert ok


# --------------------------------------------------------------------------
# 5


def test_c5_small_mu_pinch(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    D = GPlain(0.5, 2)
    worst = 0.0
    for _ in range(20):
        delta, eps = sorted(rng.uniform(1e-6, 0.5, size=2))
        z, w = normal_point(D, delta), normal_point(D, eps)
        up = lempert_upper(D, z, w, strategy="explicit-family")
        lo = projection_lower(D, z, w)
        assert up.family == "F5" and up.certified and lo.certified
        # independent oracle for the pinched value
        assert lo.value == pytest.approx(mobius(-delta, -eps), abs=1e-15)
        worst = max(worst, abs(up.value - lo.value))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1
    report_criterion(5, ok, f"max |F5 - projection| = {worst:.2e} over 20 pairs ({elapsed:.2f}s)")
    assert worst <= 1e-12


# --------------------------------------------------------------------------
# 6


def _sandwich_instances():
    """Yield (label, [bounds]) groups, each group for one (domain, pair/vector)."""
    grid = lab.eps_grid(1e-6, 1e-2, 9)
    for mu in (0.4, 0.75, 1.0, 1.5, 2.0):
        for cls in (GPlain, GTilde):
            D = cls(mu, 2)
            for eps in grid:
                p = normal_point(D, eps)
                for frac in (0.5, 0.1):
                    d = frac * eps
                    z = normal_point(D, d)
                    bs = [lempert_upper(D, z, p, strategy="explicit-family"),
                          lempert_upper(D, z, p, strategy="paper")]
                    for m in (2, 3):
                        ch = lempert_chain_upper(D, z, p, m=m)
                        bs.append(Bound("ell", ch.aggregate_ell, UPPER, ch.grade, m=m))
                    bs.append(projection_lower(D, z, p))
                    if mu > 0.5:
                        bs.append(sqrt_trick_lower(D, d, eps))
                    yield f"{D.variant} mu={mu} ell eps={eps:.1e} d={d:.1e}", bs
                X = np.array([1.0, 0.0])
                bs = [kobayashi_royden_upper(D, p, X, strategy="explicit-family"),
                      kr_decomposed_upper(D, p, X, m=2, strategy="explicit-family"),
                      projection_kr_lower(D, p, X)]
                if mu > 0.5:
                    bs.append(sqrt_trick_kr_lower(D, eps))
                if cls is GPlain and mu > 1:
                    bs.append(sibony_lower(mu, eps, X, samples=2000))
                yield f"{D.variant} mu={mu} kappa eps={eps:.1e}", bs
    for mu in (1.0, 1.5, 2.0):
        D = GMinus(mu)
        for eps in grid:
            z, p = normal_point(D, eps / 2), normal_point(D, eps)
            ch = lempert_chain_upper(D, z, p, m=2)
            yield f"Gminus mu={mu} eps={eps:.1e}", [
                Bound("ell", ch.aggregate_ell, UPPER, ch.grade, m=2), projection_lower(D, z, p),
                lempert_upper(D, z, p, strategy="explicit-family")]
            X = np.array([1.0, 0.0])
            yield f"Gminus mu={mu} kappa eps={eps:.1e}", [
                kr_decomposed_upper(D, p, X, m=2, strategy="explicit-family"),
                projection_kr_lower(D, p, X)]
    rng = np.random.default_rng(6)
    for k in range(120):
        D = PolyDisc(2) if k % 2 else Ball(2)
        P = rng.normal(size=(2, 4))
        P = (P[:, :2] + 1j * P[:, 2:])
        P *= (rng.uniform(0.05, 0.9, size=2) / np.linalg.norm(P, axis=1))[:, None]
        z, w = P
        bs = [lempert_upper(D, z, w, strategy="explicit-family"), projection_lower(D, z, w)]
        if k % 10 == 0:
            bs.append(lempert_upper(D, z, w, strategy="poly-opt", restarts=2, seed=k))
        if k % 20 == 0:
            bs.append(kobayashi_distance_upper(D, z, w, seed=k))
        yield f"{D.variant} pair {k}", bs
        X = rng.normal(size=2) + 1j * rng.normal(size=2)
        yield f"{D.variant} vector {k}", [kobayashi_royden_upper(D, z, X, strategy="explicit-family"),
                                          projection_kr_lower(D, z, X)]


def test_c6_sandwich(report_criterion):
    t0 = time.perf_counter()
    count = violations = numeric_checked = 0
    failures = []
    for label, bs in _sandwich_instances():
        count += 1
        certified_lowers = [b for b in bs if b.direction == LOWER and b.grade == CERTIFIED]
        uppers = [b for b in bs if b.direction == UPPER]
        for up in uppers:
            pool = [lo for lo in certified_lowers if comparable(lo, up)]
            if up.grade == CERTIFIED:
                for lo in pool:
                    if not consistent(lo, up):
                        violations += 1
                        failures.append((label, lo.label(), lo.value, up.label(), up.value))
            elif pool:
                numeric_checked += 1
                best = max(to_scale(lo, up.quantity) if lo.quantity != up.quantity else lo.value
                           for lo in pool)
                if up.value < best - 1e-9:
                    violations += 1
                    failures.append((label, "best", best, up.label(), up.value))
        # numeric lower bounds (Sibony) stay under the kappa uppers as well
        for lo in (b for b in bs if b.quantity == "S"):
            for up in uppers:
                if comparable(lo, up) and lo.value > up.value + 1e-9:
                    violations += 1
                    failures.append((label, "S", lo.value, up.label(), up.value))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and count >= 500 and elapsed < 300
    report_criterion(6, ok, f"{count} instances, {numeric_checked} numeric uppers checked, "
                            f"{violations} violations ({elapsed:.1f}s)")
    assert not failures, failures[:5]
    assert count >= 500


# --------------------------------------------------------------------------
# 7


def test_c7_containment(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    disagreements, analytic_count, counts = [], 0, {}
    for fam in FAMILIES:
        for _ in range(200):
            disc, dom = draw(fam, rng)
            grid = verify_containment(disc, dom, "grid", angles=512)
            if has_analytic_verifier(disc, dom):
                analytic_count += 1
                ana = verify_containment(disc, dom, "analytic")
                if ana.ok != grid.ok:
                    disagreements.append((fam, disc.params, ana.ok, grid.ok))
            if not grid.ok:
                disagreements.append((fam, disc.params, "grid failed"))
        counts[fam] = 200
    elapsed = time.perf_counter() - t0
    ok = not disagreements and elapsed < 120
    report_criterion(7, ok, f"{sum(counts.values())} draws, {analytic_count} analytic, "
                            f"{len(disagreements)} disagreements ({elapsed:.1f}s)")
    assert not disagreements, disagreements[:3]


# --------------------------------------------------------------------------
# 8


def test_c8_sibony(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_rel = 0.0
    for _ in range(50):
        mu = rng.uniform(1.05, 2.0)
        eps = float(np.exp(rng.uniform(np.log(1e-5), np.log(0.3))))
        cand = sibony_candidate(mu, eps, check=False)
        closed = 0.25 * eps ** (2 / mu - 2)
        fd = levi_form(lambda Z: cand.f(Z[:, 0]), [-eps, 0], [1, 0], scale=eps).value
        assert cand.f_levi(-eps) == pytest.approx(closed, rel=1e-12)
        worst_rel = max(worst_rel, abs(fd - closed) / closed)
    res = lab.compute(lab.ExperimentConfig("sibony", mus=(2.0,)))
    f = _fits(res)["S-glued mu=2"]
    reports = [admissibility(sibony_candidate(2.0, e, check=False), samples=10_000, seed=1)
               for e in (1e-2, 1e-4, 1e-6)]
    adm_ok = all(r["ok"] for r in reports)
    min_eig = min(r["min_eigenvalue"] for r in reports)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-6 and _fit_ok(f, -0.5) and adm_ok and min_eig >= -1e-8 and elapsed < 120
    report_criterion(8, ok, f"Levi FD rel err {worst_rel:.2e} (50 pairs), slope {f['slope']:.4f} "
                            f"(R2 {f['r2']:.5f}), admissible {adm_ok}, min eig {min_eig:.2e}")
    assert ok


# --------------------------------------------------------------------------
# 9


def test_c9_minus_chain(report_criterion):
    D = GMinus(2.0)
    ch = lempert_chain_upper(D, normal_point(D, 0.005), normal_point(D, 0.01), m=2)
    assert ch.grade == CERTIFIED
    assert {b.family.split("[")[0] for b in ch.legs} <= {"F1", "F8"}
    assert abs(ch.aggregate_ell - 0.070711) <= 1e-6


def test_c9_minus_split_fixed_constants():
    # the split X = X1 + X2 with the fixed constants costs 20 sqrt 2 on G-minus
    b = kr_decomposed_upper(GMinus(2.0), [-0.01, 0], [1, 0], m=2, strategy="paper")
    assert b.value == pytest.approx(20 * math.sqrt(2), rel=1e-12)
    best = kr_decomposed_upper(GMinus(2.0), [-0.01, 0], [1, 0], m=2)
    assert best.certified and best.value <= b.value


def test_c9_minus_model_literal(report_criterion):
    """Literal criterion: kappa^(2) upper equals 17.071 to 1e-3 at eps = 0.01.

    Expected to fail: the fixed-constant split gives 28.284 and the tuned
    certified split gives 7.0711; no registered construction lands on 17.071.
    """
    t0 = time.perf_counter()
    D = GMinus(2.0)
    ch = lempert_chain_upper(D, normal_point(D, 0.005), normal_point(D, 0.01), m=2)
    vals = {}
    for strat in ("paper", "explicit-family"):
        try:
            vals[strat] = kr_decomposed_upper(D, [-0.01, 0], [1, 0], m=2, strategy=strat).value
        except LabError as exc:  # pragma: no cover
            vals[strat] = repr(exc)
    elapsed = time.perf_counter() - t0
    chain_ok = abs(ch.aggregate_ell - 0.070711) <= 1e-6
    kappa_ok = any(isinstance(v, float) and abs(v - 17.071) <= 1e-3 for v in vals.values())
    report_criterion(9, chain_ok and kappa_ok and elapsed < 1,
                     f"ell^(2)={ch.aggregate_ell:.8f}; kappa^(2) fixed={vals['paper']:.6g} "
                     f"tuned={vals['explicit-family']:.6g} vs 17.071 ({elapsed:.2f}s)")
    assert chain_ok
    assert kappa_ok


# --------------------------------------------------------------------------
# 10


def test_c10_polydisc_oracle(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    D = PolyDisc(2)
    worst, exact_bad = 0.0, 0
    for k in range(100):
        P = rng.uniform(size=(2, 2)) ** 0.5 * 0.95 * np.exp(2j * np.pi * rng.uniform(size=(2, 2)))
        z, w = P
        oracle = max(mobius(z[0], w[0]), mobius(z[1], w[1]))
        up = lempert_upper(D, z, w, strategy="poly-opt", seed=k)
        lo = projection_lower(D, z, w)
        if lo.value != oracle:
            exact_bad += 1
        assert up.value >= oracle - 1e-12
        worst = max(worst, up.value - oracle)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-3 and exact_bad == 0 and elapsed < 180
    report_criterion(10, ok, f"max poly-opt excess {worst:.2e} on 100 pairs, projection exact "
                             f"{100 - exact_bad}/100 ({elapsed:.1f}s)")
    assert worst <= 1e-3 and exact_bad == 0
