"""Group-invariant potentials, their line integrals, the Gibbs kernel and
pressure estimates.

A potential is a constant plus an optional smooth bump placed at every
point of the orbit of a centre q. Line integrals of the bump part are done
only over the windows where a geodesic segment meets a bump, with
composite Simpson plus one Richardson step.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError
from .group import CIRCUMRADIUS, TRANSLATION_LENGTH, ball, reduce_points
from .hypgeom import (
    ORIGIN,
    ProjPoint,
    UnitTangent,
    apply_real,
    busemann,
    frames_toward,
    geodesic_point,
    hdist,
    hdist_array,
    segment_frames,
)

COARSE_STEP = 0.5
SIMPSON_PANELS = 32  # per bump window; windows are at most 2r <= 2.5 long


def _inv(M):
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    out[..., 1, 1] = M[..., 0, 0]
    return out


@dataclass(frozen=True)
class Potential:
    """F = constant + sum over the orbit of q of A (1 - (d/r)^2)^3 on d < r."""

    constant: float = 0.0
    bump_amplitude: float = 0.0
    bump_radius: float = 0.8
    bump_center: complex = ORIGIN

    def __post_init__(self):
        for name in ("constant", "bump_amplitude", "bump_radius"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"potential {name} must be finite")
        if self.has_bump:
            # one bump at a time along a coarse step needs r + step/2 below half the systole
            if not 0 < self.bump_radius <= TRANSLATION_LENGTH / 2 - COARSE_STEP / 2:
                raise ConfigError(f"bump radius must lie in (0, {TRANSLATION_LENGTH / 2 - 0.25:.3f}]")
            if not complex(self.bump_center).imag > 0:
                raise ConfigError("bump centre must lie in the upper half-plane")
            if hdist(self.bump_center, ORIGIN) > 4:
                raise ConfigError("bump centre must be within distance 4 of i")

    @property
    def has_bump(self):
        return self.bump_amplitude != 0.0

    @property
    def is_zero(self):
        return self.constant == 0.0 and not self.has_bump

    def spec(self):
        if not self.has_bump:
            return "zero" if self.constant == 0 else f"const:{self.constant:g}"
        q = complex(self.bump_center)
        s = f"bump:{q.real:g}{q.imag:+g}j,{self.bump_radius:g},{self.bump_amplitude:g}"
        if self.constant:
            s += f"+const:{self.constant:g}"
        return s

    def shifted(self, c):
        return Potential(self.constant + c, self.bump_amplitude, self.bump_radius, self.bump_center)

    def _centres(self):
        return _bump_neighbours(complex(self.bump_center), self.bump_radius)

    @property
    def lipschitz(self):
        """Lipschitz constant of the bump part (the constant part has none)."""
        if not self.has_bump:
            return 0.0
        return abs(self.bump_amplitude) * 6 / (self.bump_radius * math.sqrt(5)) * 16 / 25

    def bump_profile(self, d):
        u = np.asarray(d, dtype=float) / self.bump_radius
        return np.where(u < 1, self.bump_amplitude * np.clip(1 - u * u, 0, None) ** 3, 0.0)

    def at_points(self, Z):
        """Values at interior points (vectorised)."""
        Z = np.atleast_1d(np.asarray(Z, dtype=complex))
        out = np.full(Z.shape, float(self.constant))
        if self.has_bump:
            z0, _, _ = reduce_points(Z.ravel())
            _, centres = self._centres()
            dmin = hdist_array(z0[:, None], centres[None, :]).min(axis=1)
            out += self.bump_profile(dmin).reshape(Z.shape)
        return out

    def __call__(self, v):
        """Value at a unit tangent vector (it depends only on the base point)."""
        z = v.base if isinstance(v, UnitTangent) else complex(v)
        return float(self.at_points(z)[0])


def zero():
    return Potential()


def constant(c):
    return Potential(constant=float(c))


def bump_series(q=ORIGIN, r=0.8, A=0.5):
    return Potential(bump_amplitude=float(A), bump_radius=float(r), bump_center=complex(q))


def parse_potential(spec):
    """Parse ``zero``, ``const:c`` or ``bump:q,r,A`` (q a complex literal such as 1j)."""
    spec = spec.strip()
    try:
        if spec == "zero":
            return zero()
        kind, _, rest = spec.partition(":")
        if kind == "const":
            return constant(float(rest))
        if kind == "bump":
            q, r, A = rest.split(",")
            return bump_series(complex(q.strip().replace("i", "j")), float(r), float(A))
    except ValueError as exc:
        raise ConfigError(f"cannot parse potential {spec!r}: {exc}") from None
    raise ConfigError(f"unknown potential {spec!r}; use zero, const:c or bump:q,r,A")


_NEIGHBOUR_CACHE = {}


def _bump_neighbours(q, r):
    """Matrices h and centres h q that can be within r + step/2 of the domain."""
    key = (q, r)
    if key not in _NEIGHBOUR_CACHE:
        R = CIRCUMRADIUS + r + COARSE_STEP + hdist(q, ORIGIN)
        B = ball(max(R, 0.1))
        H = B.matrices
        _NEIGHBOUR_CACHE[key] = (H, apply_real(H, np.full(len(H), q)))
    return _NEIGHBOUR_CACHE[key]


# ---------------------------------------------------------------------------
# line integrals


def _simpson(f, lo, hi, n):
    t = lo[:, None] + (hi - lo)[:, None] * np.linspace(0, 1, n + 1)[None, :]
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return (f(t) @ w) * (hi - lo) / (3 * n)


def segment_integrals(F, z1, z2):
    """Integral of F along the geodesic segments [z1, z2] (vectorised)."""
    z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    shape = z1.shape
    z1, z2 = z1.ravel(), z2.ravel()
    g, L = segment_frames(z1, z2)
    out = F.constant * L
    if not F.has_bump:
        return out.reshape(shape)
    r = F.bump_radius
    K = np.maximum(np.ceil(L / COARSE_STEP).astype(int), 1) + 1
    seg = np.repeat(np.arange(len(L)), K)
    first = np.repeat(np.cumsum(K) - K, K)
    k = np.arange(len(seg)) - first
    spacing = L / (K - 1)
    s = k * spacing[seg]
    P = apply_real(g[seg], 1j * np.exp(s))
    z0, gam, _ = reduce_points(P)
    H, centres = F._centres()
    d = hdist_array(z0[:, None], centres[None, :])
    j = np.argmin(d, axis=1)
    near = d[np.arange(len(d)), j] < r + spacing[seg] / 2 + 1e-9
    prev = np.concatenate([[False], near[:-1]]) & (k > 0)
    start = np.flatnonzero(near & ~prev)
    if len(start) == 0:
        return out.reshape(shape)
    sg = seg[start]
    # centre in the segment's own frame, where the segment is [i, i e^L]
    C = _inv(g[sg]) @ gam[start] @ H[j[start]]
    c = apply_real(C, np.full(len(start), complex(F.bump_center)))
    h = np.arcsinh(np.abs(c.real) / c.imag)
    sc = np.log(np.abs(c))
    ok = h < r
    w = np.zeros_like(h)
    w[ok] = np.arccosh(np.cosh(r) / np.cosh(h[ok]))
    lo = np.maximum(sc - w, 0.0)
    hi = np.minimum(sc + w, L[sg])
    ok &= hi > lo
    if not ok.any():
        return out.reshape(shape)
    h, sc, lo, hi, sg = h[ok], sc[ok], lo[ok], hi[ok], sg[ok]
    ch = np.cosh(h)[:, None]

    def f(t):
        rho = np.arccosh(np.maximum(ch * np.cosh(t - sc[:, None]), 1.0))
        return F.bump_profile(rho)

    coarse = _simpson(f, lo, hi, SIMPSON_PANELS)
    fine = _simpson(f, lo, hi, 2 * SIMPSON_PANELS)
    np.add.at(out, sg, (16 * fine - coarse) / 15)
    return out.reshape(shape)


def geodesic_integral(F, z1, z2):
    return float(segment_integrals(F, complex(z1), complex(z2)))


def path_integral_direct(F, z1, z2, step=0.05):
    """Simpson over the whole segment with one Richardson step, sampling F
    pointwise. Slower than :func:`segment_integrals`; used as a cross-check."""
    g, L = segment_frames(complex(z1), complex(z2))
    L = float(L)
    if L == 0:
        return 0.0
    n = 2 * max(1, math.ceil(L / step / 2))

    def simpson(m):
        s = np.linspace(0, L, m + 1)
        vals = F.at_points(apply_real(g, 1j * np.exp(s)))
        w = np.ones(m + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return float(vals @ w) * L / (3 * m)

    return (16 * simpson(2 * n) - simpson(n)) / 15


def kappa(F, y, z):
    """exp of the integral of F along [y, z]."""
    return math.exp(geodesic_integral(F, y, z))


_KAPPA_CACHE = {}


def kappa_ball(F, B):
    """kappa(i, g i) for every element g of the ball B."""
    key = (F, id(B._search), B.radius)
    if key not in _KAPPA_CACHE:
        pts = B.orbit_points()
        _KAPPA_CACHE[key] = np.exp(segment_integrals(F, np.full(len(pts), ORIGIN), pts))
    return _KAPPA_CACHE[key]


# ---------------------------------------------------------------------------
# Gibbs cocycle and kernel


def delta_cocycle_many(F, y, z, U, tol=1e-7, T_cap=80.0):
    """delta^F_xi(y, z) for the boundary points with homogeneous rows U.

    The limit is taken along the ray from the midpoint of [y, z] toward xi;
    T grows by 2 until the relative change drops below ``tol``. A ray can
    miss every bump for a while, which makes successive values agree
    exactly, so T must also pass a tail bound: beyond height H in the frame
    where xi is infinity the two paths are within about |y' - z'|/H of each
    other, so the neglected tail is at most Lip(F) (1 + |y'| + |z'|) e^{-T}.
    """
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    n = len(U)
    if F.is_zero:
        return np.ones(n)
    y, z = complex(y), complex(z)
    if y == z:
        return np.ones(n)
    m = geodesic_point(y, z, hdist(y, z) / 2)
    g = frames_toward(np.full(n, m), U)
    ginv = _inv(g)
    spread = 1 + np.abs(apply_real(ginv, np.full(n, y))) + np.abs(apply_real(ginv, np.full(n, z)))
    T_min = np.log(np.maximum(4 * F.lipschitz * spread / tol, 1.0))
    out = np.empty(n)
    prev = np.full(n, np.nan)
    todo = np.arange(n)
    T = 4.0
    while T <= T_cap:
        c = apply_real(g[todo], np.full(len(todo), 1j * math.exp(T)))
        I = segment_integrals(F, np.concatenate([c, c]), np.concatenate([np.full(len(todo), z), np.full(len(todo), y)]))
        val = np.exp(I[: len(todo)] - I[len(todo):])
        done = (np.abs(val - prev[todo]) <= tol * np.abs(val)) & (T >= T_min[todo])
        out[todo[done]] = val[done]
        prev[todo] = val
        todo = todo[~done]
        if len(todo) == 0:
            return out
        T += 2.0
    raise ConvergenceError(f"delta cocycle did not settle to rel tol={tol:g} by T={T_cap:g}", tol)


def delta_cocycle(F, y, z, xi, tol=1e-7, T_cap=80.0):
    if not xi.is_real(1e-9):
        raise ConfigError("boundary point must lie on R u {inf}")
    return float(delta_cocycle_many(F, y, z, xi.u[None, :], tol, T_cap)[0])


def gibbs_kernel(F, z1, z2, xi, P, tol=1e-7):
    """k(z1, z2; xi) = delta(z1, z2; xi) exp(-P beta_xi(z1, z2))."""
    return delta_cocycle(F, z1, z2, xi, tol) * math.exp(-P * busemann(xi, z1, z2))


def f_harmonic_eval(F, eta, z, P, o=ORIGIN, tol=1e-7):
    """Integral of k(o, z; xi) against a boundary measure eta.

    ``eta`` needs ``boundary_vectors()`` (homogeneous rows of its atoms) and
    ``weights``.
    """
    U = eta.boundary_vectors()
    deltas = delta_cocycle_many(F, o, z, U, tol)
    beta = np.array([busemann(ProjPoint(*u), o, z) for u in U])
    return float(np.sum(eta.weights * deltas * np.exp(-P * beta)))


# ---------------------------------------------------------------------------
# pressure


@dataclass(frozen=True)
class PressureEstimate:
    potential: str
    radii: tuple
    J: tuple
    slope: float
    residual: float

    @property
    def log_J(self):
        return tuple(math.log(x) for x in self.J)

    def to_json(self):
        return {
            "potential": self.potential,
            "samples": [{"R": R, "J": J, "log_J": math.log(J)} for R, J in zip(self.radii, self.J)],
            "slope": self.slope,
            "residual": self.residual,
        }


def estimate_pressure(F, B, window=(8, 11)):
    """Least-squares slope of log J(R) = log sum_{d(g) <= R} kappa(g) at integer R in the window."""
    lo, hi = window
    radii = np.arange(math.ceil(lo), math.floor(hi) + 1)
    if len(radii) < 4:
        raise ConfigError(f"pressure window {window} must contain at least four integer radii")
    if hi > B.radius + 1e-12:
        raise ConfigError(f"window end {hi} exceeds the ball radius {B.radius}")
    k = kappa_ball(F, B)
    d = B.dists
    J = []
    for R in radii:
        if not np.any((d > R - 1) & (d <= R)):
            raise ConfigError(f"empty shell at radius {R}")
        J.append(float(np.sum(k[d <= R])))
    logJ = np.log(J)
    slope, icpt = np.polyfit(radii, logJ, 1)
    res = float(np.sqrt(np.mean((logJ - (slope * radii + icpt)) ** 2)))
    return PressureEstimate(F.spec(), tuple(int(R) for R in radii), tuple(J), float(slope), res)


def pressure_report(est):
    return est.to_json()


__all__ = [
    "Potential",
    "zero",
    "constant",
    "bump_series",
    "parse_potential",
    "segment_integrals",
    "geodesic_integral",
    "path_integral_direct",
    "kappa",
    "kappa_ball",
    "delta_cocycle",
    "delta_cocycle_many",
    "gibbs_kernel",
    "f_harmonic_eval",
    "PressureEstimate",
    "estimate_pressure",
    "pressure_report",
]
