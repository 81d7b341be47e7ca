"""End-to-end numerical checks, each with a fixed tolerance.

Used by the acceptance tests and by ``gibbslab report``. Every check
returns a :class:`CheckResult`; none of them raises on failure.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import group as grp
from .cocycle import (
    basin_check,
    fuchsian_section,
    lyapunov_section_plus,
    lyapunov_top,
    oseledets_flags,
    top_exponent_by_growth,
    two_symbol_demo,
)
from .hypgeom import (
    ProjPoint,
    UnitTangent,
    apply_real,
    boundary_from_angle,
    busemann,
    parabolic_fixing,
    rotation,
)
from .measures import (
    ball_average,
    cauchy_diagnostic,
    circle_fit_residual,
    ks_angle,
    ledrappier_boundary,
    theta,
    wasserstein,
)
from . import potential as pot
from .potential import bump_series, constant, delta_cocycle, estimate_pressure, gibbs_kernel, zero


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{flag}] {self.key} {self.title} ({self.seconds:.1f}s): {info}"

    def to_json(self):
        return {"key": self.key, "title": self.title, "passed": self.passed, "seconds": self.seconds, "details": self.details}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def clear_caches():
    """Drop cached balls and kappa tables so each check pays its own way."""
    grp._ball_cached.cache_clear()
    pot._KAPPA_CACHE.clear()
    pot._NEIGHBOUR_CACHE.clear()


def random_points(rng, n, rmax):
    """Points of the disk B(i, rmax), area-uniform in the radius variable sqrt."""
    r = rmax * np.sqrt(rng.random(n))
    return apply_real(rotation(rng.random(n) * 2 * np.pi - math.pi / 2), 1j * np.exp(r))


def random_tangents(rng, n, rmax=3.0):
    return [
        UnitTangent.from_base_angle(z, a) for z, a in zip(random_points(rng, n, rmax), rng.random(n) * 2 * np.pi)
    ]


def check_busemann(seed=0, n=1000):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_points(rng, n, 5.0) for _ in range(3))
    err = 0.0
    for x, y, z, a in zip(X, Y, Z, rng.random(n) * 2 * np.pi):
        xi = boundary_from_angle(a)
        err = max(err, abs(busemann(xi, x, y) + busemann(xi, y, z) - busemann(xi, x, z)))
    top = busemann(ProjPoint.infinity(), 1j, 1j * math.e)
    secs = time.perf_counter() - t0
    ok = err <= 1e-8 and abs(top + 1) <= 1e-9 and secs < 10
    return CheckResult("1", "Busemann cocycle", ok, {"max_cocycle_err": err, "beta_inf": top, "runtime_s": secs}, secs)


def check_gibbs(seed=0, n=200):
    t0 = time.perf_counter()
    B = grp.ball(11)
    details = {}
    ok = True
    for name, F in (("zero", zero()), ("const", constant(0.3)), ("bump", bump_series(A=0.5))):
        rng = np.random.default_rng(seed)
        P = estimate_pressure(F, B).slope
        X, Y, Z = (random_points(rng, n, 3.0) for _ in range(3))
        dmax = kmax = hmax = 0.0
        for x, y, z, a in zip(X, Y, Z, rng.random(n) * 2 * np.pi):
            xi = boundary_from_angle(a)
            dxy, dyz, dxz = (delta_cocycle(F, p, q, xi) for p, q in ((x, y), (y, z), (x, z)))
            dmax = max(dmax, abs(dxy * dyz - dxz) / dxz)
            kxy, kyz, kxz = (
                d * math.exp(-P * busemann(xi, p, q)) for d, (p, q) in zip((dxy, dyz, dxz), ((x, y), (y, z), (x, z)))
            )
            kmax = max(kmax, abs(kxy * kyz - kxz) / kxz)
        for x, a, s in zip(X[:50], rng.random(50) * 2 * np.pi, rng.normal(size=50)):
            xi = boundary_from_angle(a)
            w = parabolic_fixing(xi, s)(x)
            d = delta_cocycle(F, x, w, xi)
            hmax = max(hmax, abs(gibbs_kernel(F, x, w, xi, P) - d) / d)
        details[f"{name}_delta_err"] = dmax
        details[f"{name}_kernel_err"] = kmax
        details[f"{name}_horosphere_err"] = hmax
        ok &= max(dmax, kmax, hmax) <= 1e-5
    secs = time.perf_counter() - t0
    return CheckResult("2", "Gibbs cocycle and kernel relations", ok, details, secs)


def check_group():
    t0 = time.perf_counter()
    rel = grp.word_matrix(grp.RELATOR)
    rel_err = float(min(np.abs(rel - np.eye(2)).max(), np.abs(rel + np.eye(2)).max()))
    small = grp.ball(3.1)
    expect = {""} | set(grp.SYMBOLS)
    small_ok = set(small.words) == expect and len(small) == 9
    t1 = time.perf_counter()
    search = grp._search(11.0, 64, grp.CIRCUMRADIUS)
    build = time.perf_counter() - t1
    d = np.sort(search["dists"])
    radii = np.arange(6, 12)
    counts = np.searchsorted(d, radii + 1e-12, side="right")
    slope = float(np.polyfit(radii, np.log(counts), 1)[0])
    secs = time.perf_counter() - t0
    ok = rel_err <= 1e-9 and small_ok and 0.85 <= slope <= 1.15 and build < 120
    return CheckResult(
        "3",
        "octagon group and ball growth",
        ok,
        {"relator_err": rel_err, "ball_3.1_ok": small_ok, "counts_6_11": counts.tolist(), "log_slope": slope, "build_s": build},
        secs,
    )


def check_pressure():
    t0 = time.perf_counter()
    B = grp.ball(11)
    p0 = estimate_pressure(zero(), B, (8, 11)).slope
    pc = estimate_pressure(constant(0.3), B, (8, 11)).slope
    secs = time.perf_counter() - t0
    ok = abs(p0 - 1) <= 0.15 and abs(pc - p0 - 0.3) <= 0.05 and secs < 180
    return CheckResult("4", "pressure estimates", ok, {"P_zero": p0, "P_const_minus_P_zero": pc - p0}, secs)


def check_theta(x=0.37):
    t0 = time.perf_counter()
    B = grp.ball(11)
    rep = grp.fuchsian()
    F = zero()
    table = cauchy_diagnostic(rep, F, x, [8, 9, 10, 11], B)
    succ = list(table.successive)
    decreasing = all(a > b for a, b in zip(succ, succ[1:]))
    P = estimate_pressure(F, B).slope
    th = theta(rep, F, 11, x, B)
    ks = ks_angle(th, ledrappier_boundary(F, B, 11, P))
    P_ = th.points
    off_line = float(np.abs((P_[:, 0] * np.conj(P_[:, 1])).imag).max())
    secs = time.perf_counter() - t0
    ok = decreasing and ks < 0.07 and off_line == 0.0 and secs < 180
    return CheckResult(
        "5", "equidistribution of theta", ok, {"successive_w1": succ, "ks_vs_boundary": ks, "off_real_line": off_line}, secs
    )


def check_ball_average(x=0.37):
    t0 = time.perf_counter()
    B = grp.ball(11)
    rep = grp.fuchsian()
    F = bump_series(A=0.5)
    th = theta(rep, F, 10, x, B)
    m1 = ball_average(rep, F, 10, 10_000, x, seed=1).fiber_marginal()
    m2 = ball_average(rep, F, 10, 10_000, x, seed=2).fiber_marginal()
    d1 = wasserstein(m1, th)
    d12 = wasserstein(m1, m2)
    secs = time.perf_counter() - t0
    ok = d1 < 0.1 and d12 < 0.03
    return CheckResult("6", "ball average versus theta", ok, {"w1_to_theta": d1, "w1_between_seeds": d12}, secs)


def check_fuchsian_cocycle(seed=0):
    t0 = time.perf_counter()
    B = grp.ball(11)
    rep = grp.fuchsian()
    chi = lyapunov_top(rep, B, zero(), 10)
    chi_b = lyapunov_top(rep, B, bump_series(A=0.5), 10)
    rng = np.random.default_rng(seed)
    vs = random_tangents(rng, 100)
    sec_err = 0.0
    eq_err = 0.0
    gens = B.within(5.0)
    for k, v in enumerate(vs):
        s = lyapunov_section_plus(rep, v, 25.0)
        sec_err = max(sec_err, s.chordal(fuchsian_section(v)))
        g = gens[1 + k % (len(gens) - 1)].matrix
        s2 = lyapunov_section_plus(rep, v.push(g), 25.0)
        eq_err = max(eq_err, s2.chordal(g(s)))
    secs = time.perf_counter() - t0
    ok = abs(chi - 0.5) <= 0.05 and abs(chi_b - 0.5) <= 0.05 and sec_err <= 1e-4 and eq_err <= 1e-4
    return CheckResult(
        "7",
        "Fuchsian exponent and section",
        ok,
        {"chi_zero": chi, "chi_bump": chi_b, "section_err": sec_err, "equivariance_err": eq_err},
        secs,
    )


def check_oseledets(seed=0):
    t0 = time.perf_counter()
    c = two_symbol_demo()
    flag = oseledets_flags(c, 10_000, seed=seed)
    rep = basin_check(c, flag, n_points=100, seed=seed)
    oracle = top_exponent_by_growth(c, 10**6, seed=seed + 1)
    chi = flag.exponents
    prepared_ok = rep["slow_invariance_drift"] < 1e-8 and all(
        p["w1_slow"] < 0.05 and p["w1_fast"] > 0.05 for p in rep["prepared"]
    )
    secs = time.perf_counter() - t0
    ok = (
        flag.gap > 0.5
        and rep["generic_pass"] >= 98
        and prepared_ok
        and abs(chi.sum()) <= 1e-6
        and abs(chi[-1] - oracle) <= 0.02
        and secs < 60
    )
    return CheckResult(
        "8",
        "Oseledets flag and basins",
        ok,
        {
            "gap": flag.gap,
            "generic_pass": rep["generic_pass"],
            "prepared_ok": prepared_ok,
            "exponent_sum": float(chi.sum()),
            "chi_top": float(chi[-1]),
            "oracle": oracle,
            "decay_rate": rep["decay_rate"],
        },
        secs,
    )


def check_bending(x=0.37):
    t0 = time.perf_counter()
    B = grp.ball(9)
    base = grp.fuchsian()
    xs = ProjPoint.from_chart(x).u
    res = {}
    for th in (0.0, 0.3):
        pts = grp.rep_images(grp.bend(base, th), B) @ xs
        res[th] = circle_fit_residual(pts)
    secs = time.perf_counter() - t0
    ok = res[0.3] > 0.01 and res[0.0] < 1e-6
    return CheckResult("9", "bent limit set leaves the circle", ok, {"residual_bent": res[0.3], "residual_flat": res[0.0]}, secs)


CHECKS = {
    "1": check_busemann,
    "2": check_gibbs,
    "3": check_group,
    "4": check_pressure,
    "5": check_theta,
    "6": check_ball_average,
    "7": check_fuchsian_cocycle,
    "8": check_oseledets,
    "9": check_bending,
}


def run_check(key):
    clear_caches()
    return CHECKS[key]()


def run_all(keys=None):
    return [run_check(k) for k in (keys or CHECKS)]
