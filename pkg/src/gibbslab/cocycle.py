"""Lyapunov exponents and equivariant sections.

Two settings live here: the surface-group cocycle of a representation
(top exponent weighted by the potential, and the section built from the
closest orbit point along the backward geodesic), and finite random
products of matrices where the whole Oseledets flag can be computed and
its basins checked.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError, SpectrumError
from .group import Representation, reduce_frame, rep_images
from .hypgeom import ProjPoint, UnitTangent, chordal
from .measures import EmpiricalMeasure, wasserstein
from .potential import kappa_ball


# ---------------------------------------------------------------------------
# surface-group cocycle


def lyapunov_top(rep, B, F, R):
    """kappa-weighted mean of log ||rho(g)|| / d(i, g i) over R/2 <= d <= R."""
    if R < 5:
        raise ConfigError("top exponent estimate needs R >= 5")
    if not isinstance(rep, Representation):
        raise ConfigError("expected a Representation")
    Bi = B.within(R)
    sel = Bi.dists >= R / 2
    k = kappa_ball(F, Bi)[sel]
    sv = np.linalg.svd(rep_images(rep, Bi)[sel], compute_uv=False)[:, 0]
    return float(np.sum(k * np.log(sv) / Bi.dists[sel]) / np.sum(k))


def _flow(t):
    return np.diag([math.exp(t / 2), math.exp(-t / 2)])


def _default_x0(seed):
    z = np.random.default_rng(seed).normal(size=2)
    return ProjPoint(complex(z[0], abs(z[1]) + 0.5))


def lyapunov_section_plus(rep, v, T=25.0, x0=None, seed=0, tol=1e-4, T_cap=60.0, step=5.0):
    """rho(gamma_T) x0, gamma_T the closest orbit point to the point at time -T
    on the geodesic of v. T grows by ``step`` until two values agree to ``tol``."""
    if T < 5:
        raise ConfigError("section needs T >= 5")
    if x0 is None:
        x0 = _default_x0(seed)
    elif not isinstance(x0, ProjPoint):
        x0 = ProjPoint.from_chart(x0)
    prev = None
    t = float(T)
    while t <= T_cap:
        _, _, rho = reduce_frame(v.frame @ _flow(-t), rep)
        cur = ProjPoint(*(rho @ x0.u))
        if prev is not None and cur.chordal(prev) < tol:
            return cur
        prev = cur
        t += step
    raise ConvergenceError(f"section did not settle to chordal tol={tol:g} by T={T_cap:g}", tol)


def fuchsian_section(v):
    """Closed form for the identity representation: the backward endpoint of v."""
    return v.hopf[0]


# ---------------------------------------------------------------------------
# random matrix products


@dataclass(frozen=True, eq=False)
class DiscreteCocycle:
    """Locally constant cocycle over a Bernoulli shift: symbol s is drawn
    with probability probs[s] and acts by matrices[s]."""

    matrices: np.ndarray
    probs: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        M = np.asarray(self.matrices)
        M = M.astype(complex) if np.iscomplexobj(M) else M.astype(float)
        p = np.asarray(self.probs, dtype=float)
        if M.ndim != 3 or M.shape[1] != M.shape[2] or len(M) != len(p):
            raise ConfigError("need a stack of square matrices and one probability each")
        if np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
            raise ConfigError("probabilities must be positive and sum to 1")
        if np.max(np.abs(np.linalg.det(M) - 1)) > 1e-9:
            raise ConfigError("matrices must have determinant 1")
        object.__setattr__(self, "matrices", M)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self):
        return self.matrices.shape[1]

    def sample(self, n, rng):
        return np.searchsorted(np.cumsum(self.probs), rng.random(n), side="right").clip(0, len(self.probs) - 1)


def two_symbol_demo():
    """diag(2, 1/2) and the unipotent shear, each with probability 1/2."""
    return DiscreteCocycle(np.array([[[2.0, 0.0], [0.0, 0.5]], [[1.0, 1.0], [0.0, 1.0]]]), [0.5, 0.5], "two-symbol")


def constant_diagonal(lam=2.0):
    return DiscreteCocycle(np.array([[[lam, 0.0], [0.0, 1 / lam]]]), [1.0], f"diag:{lam:g}")


def cocycle_product(c, symbols, start=0, n=None, init=None):
    """A_{start+n-1} ... A_{start} init, multiplied one factor at a time from the left."""
    if n is None:
        n = len(symbols) - start
    M = np.eye(c.dim, dtype=c.matrices.dtype) if init is None else np.array(init)
    for k in range(start, start + n):
        M = c.matrices[symbols[k]] @ M
    return M


def top_exponent_by_growth(c, n_steps=10**6, seed=1):
    """Growth rate of a single renormalised vector; independent of any QR machinery."""
    rng = np.random.default_rng(seed)
    syms = c.sample(n_steps, rng)
    x = rng.normal(size=c.dim)
    x /= np.linalg.norm(x)
    mats = [m for m in c.matrices]
    total = 0.0
    for s in syms:
        x = mats[s] @ x
        nrm = math.hypot(*x) if len(x) == 2 else float(np.linalg.norm(x))
        total += math.log(nrm)
        x = x / nrm
    return total / n_steps


def _qr(Y):
    Q, R = np.linalg.qr(Y)
    sgn = np.sign(np.diag(R).real)
    sgn[sgn == 0] = 1
    return Q * sgn, R * sgn[:, None]


@dataclass(frozen=True, eq=False)
class LyapunovFlag:
    """Exponents (ascending) and the Oseledets directions along a sampled orbit.

    ``directions[k][:, j]`` spans sigma^{j+1} at the base point p_k, so the
    last column is the fastest direction and the first the slowest.
    """

    cocycle: DiscreteCocycle
    exponents: np.ndarray
    directions: np.ndarray
    symbols: np.ndarray
    seed: int

    @property
    def gap(self):
        return float(np.min(np.diff(self.exponents)))

    def direction(self, j):
        return self.directions[:, :, j - 1]


def _intersect(U, W):
    """Unit vector spanning span(U) cap span(W) when the dimensions add to d+1."""
    _, _, vh = np.linalg.svd(np.hstack([U, -W]))
    a = np.conj(vh[-1])[: U.shape[1]]
    x = U @ a
    return x / np.linalg.norm(x)


def oseledets_flags(c, n_steps=10_000, seed=0, burn=500, qr_every=20, gap_min=1e-3):
    """Exponents by periodic QR and the Oseledets splitting along n_steps base points.

    The fast flag comes from pushing a frame forward from ``burn`` steps in
    the past; the slow flag from pulling a frame back through inverse
    matrices from ``burn`` steps in the future. sigma^j is the intersection
    of the j-dimensional slow space with the (d-j+1)-dimensional fast one.
    """
    if n_steps < 100:
        raise ConfigError("need at least 100 steps")
    rng = np.random.default_rng(seed)
    d = c.dim
    syms = c.sample(burn + n_steps + burn, rng)
    mats = c.matrices
    inv = np.linalg.inv(mats)
    dtype = complex if np.iscomplexobj(mats) else float

    logs = np.zeros(d)
    Q = np.eye(d, dtype=dtype)
    for lo in range(burn, burn + n_steps, qr_every):
        Y = Q
        for k in range(lo, min(lo + qr_every, burn + n_steps)):
            Y = mats[syms[k]] @ Y
        Q, R = _qr(Y)
        logs += np.log(np.abs(np.diag(R)))
    exps = np.sort(logs / n_steps)
    if d > 1 and np.min(np.diff(exps)) < gap_min:
        raise SpectrumError(f"Lyapunov spectrum not simple: gap below {gap_min:g}", gap_min)

    fast = np.empty((n_steps + 1, d, d), dtype=dtype)
    Q, _ = _qr(rng.normal(size=(d, d)).astype(dtype))
    for k in range(burn + n_steps + 1):
        if k >= burn:
            fast[k - burn] = Q
        if k < burn + n_steps:
            Q, _ = _qr(mats[syms[k]] @ Q)
    slow = np.empty_like(fast)
    Q, _ = _qr(rng.normal(size=(d, d)).astype(dtype))
    for k in range(2 * burn + n_steps, burn - 1, -1):
        if k <= burn + n_steps:
            slow[k - burn] = Q
        if k > burn:
            Q, _ = _qr(inv[syms[k - 1]] @ Q)

    dirs = np.empty_like(fast)
    for k in range(n_steps + 1):
        dirs[k, :, 0] = slow[k, :, 0]
        dirs[k, :, d - 1] = fast[k, :, 0]
        for j in range(2, d):
            dirs[k, :, j - 1] = _intersect(slow[k, :, :j], fast[k, :, : d - j + 1])
    return LyapunovFlag(c, exps, dirs, syms[burn : burn + n_steps], seed)


def invariance_drift(flag, j):
    """Largest chordal distance between A_k sigma^j(p_k) and sigma^j(p_{k+1})."""
    D = flag.direction(j)
    A = flag.cocycle.matrices[flag.symbols]
    pushed = np.einsum("kij,kj->ki", A, D[:-1])
    return float(np.max(chordal(pushed, D[1:])))


def _attraction_rate(X, A, top, near=1e-6, far=1e-3):
    """Mean per-step log contraction of chordal distance to the top direction.

    Points that come within ``near`` of it are pushed back out to ``far``
    along their current deviation, so the whole orbit contributes without
    hitting the floating point floor.
    """
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    d0 = chordal(X, top[0])
    total = np.zeros(len(X))
    for n in range(len(A) - 1):
        X = X @ A[n].T
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        d1 = chordal(X, top[n + 1])
        total += np.log(d0 / d1)
        low = d1 < near
        if np.any(low):
            u = top[n + 1]
            w = X[low] - np.outer(X[low] @ np.conj(u), u)
            w /= np.linalg.norm(w, axis=1, keepdims=True)
            X[low] = u + far * w
            X[low] /= np.linalg.norm(X[low], axis=1, keepdims=True)
            d1 = d1.copy()
            d1[low] = chordal(X[low], u)
        d0 = d1
    return float(np.mean(total) / (len(A) - 1))


def basin_check(c, flag, n_points=100, n_steps=None, seed=0, threads=1, n_prepared=5, n_sub=512):
    """Compare Birkhoff averages of random fiber points with the measures
    carried by the fastest and slowest Oseledets directions.

    Generic points should approach the fastest direction. Points started on
    the slowest direction stay on it; since forward iteration drifts off at
    the exponential rate of the gap, that orbit is checked through per-step
    invariance and then represented by the stably computed slow directions.
    """
    d = c.dim
    N = len(flag.symbols) if n_steps is None else int(n_steps)
    if not 10 <= N <= len(flag.symbols):
        raise ConfigError(f"n_steps must lie in [10, {len(flag.symbols)}]")
    rng = np.random.default_rng(seed)
    top_dirs = flag.direction(d)[:N]
    low_dirs = flag.direction(1)[:N]
    mu_top = EmpiricalMeasure(top_dirs, np.ones(N))
    mu_low = EmpiricalMeasure(low_dirs, np.ones(N))
    A = c.matrices[flag.symbols[:N]]

    X = np.empty((n_points, d), dtype=complex)
    k = 0
    while k < n_points:
        x = rng.normal(size=d) + 1j * rng.normal(size=d)
        if chordal(x, low_dirs[0]) > 1e-3:
            X[k] = x / np.linalg.norm(x)
            k += 1
    orbit = np.empty((n_points, N, d), dtype=complex)
    for n in range(N):
        orbit[:, n] = X
        X = X @ A[n].T
        X /= np.linalg.norm(X, axis=1, keepdims=True)

    def score(i):
        m = EmpiricalMeasure(orbit[i], np.ones(N))
        return wasserstein(m, mu_top, n_sub, seed), wasserstein(m, mu_low, n_sub, seed)

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        scores = list(pool.map(score, range(n_points)))

    drift = invariance_drift(flag, 1)
    prepared = []
    for i in range(n_prepared):
        start = int(rng.integers(0, max(1, N // 2)))
        x = low_dirs[start].copy()
        tracked = 0
        for n in range(start, N - 1):
            x = A[n] @ x
            x /= np.linalg.norm(x)
            if chordal(x, low_dirs[n + 1]) > 1e-3:
                break
            tracked += 1
        seq = EmpiricalMeasure(low_dirs[start:], np.ones(N - start))
        prepared.append(
            {
                "start": start,
                "forward_tracking_steps": tracked,
                "w1_slow": wasserstein(seq, mu_low, n_sub, seed),
                "w1_fast": wasserstein(seq, mu_top, n_sub, seed),
            }
        )

    w_top = [s[0] for s in scores]
    return {
        "cocycle": c.label,
        "seed": seed,
        "n_points": n_points,
        "n_steps": N,
        "exponents": [float(e) for e in flag.exponents],
        "gap": flag.gap,
        "generic_w1_fast": w_top,
        "generic_w1_slow": [s[1] for s in scores],
        "generic_pass": int(sum(w < 0.05 for w in w_top)),
        "decay_rate": _attraction_rate(orbit[:, 0], A, top_dirs),
        "slow_invariance_drift": drift,
        "prepared": prepared,
    }
