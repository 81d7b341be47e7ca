"""Empirical measures on CP^1 and on the circle at infinity: the weighted
fiber measures theta, ball and sphere averages, the boundary measure of
orbit directions, and distances between measures.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError
from .group import Representation, rep_images, reduce_points
from .hypgeom import ORIGIN, ProjPoint, apply_real, boundary_vectors, cayley_angle, chordal, rotation
from .potential import kappa_ball, segment_integrals

REAL_TOL = 1e-9


def _rows(x):
    if isinstance(x, ProjPoint):
        return x.u
    return ProjPoint.from_chart(x).u


@dataclass(eq=False)
class EmpiricalMeasure:
    """Finitely supported probability measure.

    ``kind="cp1"``: ``points`` holds unit homogeneous rows (N, 2).
    ``kind="circle"``: ``points`` holds visual angles in [0, 2pi).
    ``base`` optionally carries a base point in the plane for each atom.
    """

    points: np.ndarray
    weights: np.ndarray
    kind: str = "cp1"
    base: np.ndarray = field(default=None)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.kind == "cp1":
            p = np.atleast_2d(np.asarray(self.points, dtype=complex))
            p = p / np.linalg.norm(p, axis=1, keepdims=True)
        elif self.kind == "circle":
            p = np.mod(np.asarray(self.points, dtype=float).ravel(), 2 * np.pi)
        else:
            raise ConfigError(f"unknown measure kind {self.kind!r}")
        if len(p) == 0 or len(p) != len(w):
            raise ConfigError("measure needs as many weights as atoms, and at least one atom")
        if not np.all(np.isfinite(w)) or np.any(w < 0) or w.sum() <= 0:
            raise ConfigError("weights must be finite, nonnegative and not all zero")
        self.points = p
        self.weights = w / w.sum()
        if self.base is not None:
            self.base = np.asarray(self.base, dtype=complex)

    def __len__(self):
        return len(self.weights)

    def projective(self):
        """Unit homogeneous rows of the atoms."""
        if self.kind == "circle":
            return boundary_vectors(self.points)
        return self.points

    def on_real_line(self, tol=REAL_TOL):
        if self.kind == "circle":
            return True
        p = self.points
        return bool(np.all(np.abs((p[:, 0] * np.conj(p[:, 1])).imag) <= tol))

    def angles(self):
        """Visual angles of the atoms; only for measures carried by R u {inf}."""
        if self.kind == "circle":
            return self.points
        if not self.on_real_line():
            raise ConfigError("measure is not supported on R u {inf}")
        return cayley_angle(self.points)

    def boundary_vectors(self):
        if not self.on_real_line():
            raise ConfigError("measure is not supported on R u {inf}")
        return self.projective()

    def fiber_marginal(self):
        return EmpiricalMeasure(self.points, self.weights, self.kind)

    def chart(self):
        """Chart coordinates u0/u1 (inf for the point at infinity)."""
        P = self.projective()
        with np.errstate(divide="ignore", invalid="ignore"):
            w = P[:, 0] / P[:, 1]
        w[np.abs(P[:, 1]) < 1e-300] = np.inf
        return w

    def to_csv(self):
        w = self.chart()
        cols = ["re", "im", "weight"]
        if self.kind == "circle":
            cols.append("angle")
        if self.base is not None:
            cols += ["base_re", "base_im"]
        lines = [",".join(cols)]
        for k in range(len(self)):
            z = w[k]
            row = ["inf", "0"] if not np.isfinite(z) else [f"{z.real:.15g}", f"{z.imag:.15g}"]
            row.append(f"{self.weights[k]:.15g}")
            if self.kind == "circle":
                row.append(f"{self.points[k]:.15g}")
            if self.base is not None:
                row += [f"{self.base[k].real:.15g}", f"{self.base[k].imag:.15g}"]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def summary(self):
        return {"kind": self.kind, "atoms": len(self), "on_real_line": self.on_real_line()}


def uniform_circle(n=4096):
    """Equal-weight atoms at the midpoints of n equal arcs."""
    return EmpiricalMeasure((np.arange(n) + 0.5) * 2 * np.pi / n, np.ones(n), "circle")


def _adjugate(M):
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    out[..., 1, 1] = M[..., 0, 0]
    return out


# ---------------------------------------------------------------------------
# constructions


def theta(rep, F, R, x, B):
    """Atoms rho(g)^{-1} x over g in the ball of radius R, weighted by
    kappa(i, g i) and normalised."""
    if not isinstance(rep, Representation):
        raise ConfigError("theta needs a Representation")
    Bi = B.within(R)
    k = kappa_ball(F, Bi)
    imgs = _adjugate(rep_images(rep, Bi))
    pts = imgs @ _rows(x)
    return EmpiricalMeasure(pts, k)


def _average(rep, F, radii, angles, x):
    y = apply_real(rotation(angles - math.pi / 2), 1j * np.exp(radii))
    w = np.exp(segment_integrals(F, np.full(len(y), ORIGIN), y))
    z0, _, rho = reduce_points(y, rep)
    pts = _adjugate(rho) @ _rows(x)
    return EmpiricalMeasure(pts, w, base=z0)


def ball_average(rep, F, R, n, x, seed=0):
    """Monte Carlo version of the normalised average of kappa(i, y) times the
    atom (y reduced to the domain, rho(gamma_y)^{-1} x) over y in B(i, R)."""
    if n < 1000:
        raise ConfigError("ball average needs at least 1000 samples")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    radii = np.arccosh(1 + u * (math.cosh(R) - 1))
    return _average(rep, F, radii, rng.random(n) * 2 * np.pi, x)


def sphere_average(rep, F, R, n, x, seed=0):
    """Same as :func:`ball_average` for y uniform on the sphere S(i, R)."""
    if n < 1000:
        raise ConfigError("sphere average needs at least 1000 samples")
    rng = np.random.default_rng(seed)
    return _average(rep, F, np.full(n, float(R)), rng.random(n) * 2 * np.pi, x)


def ledrappier_boundary(F, B, R, P):
    """Directions of the orbit points g i, 0 < d(i, g i) <= R, weighted by
    kappa(i, g i) exp(-P d). The identity is left out: it has no direction."""
    Bi = B.within(R)
    k = kappa_ball(F, Bi)
    keep = Bi.dists > 0
    w = Bi.orbit_points()[keep]
    ang = np.angle((w - 1j) / (w + 1j))
    return EmpiricalMeasure(ang, k[keep] * np.exp(-P * Bi.dists[keep]), "circle")


def boundary_pushforward(mu):
    """Circle measure viewed on R u {inf} (the boundary map of the identity representation)."""
    if mu.kind != "circle":
        raise ConfigError("pushforward expects a circle measure")
    return EmpiricalMeasure(boundary_vectors(mu.points), mu.weights)


# ---------------------------------------------------------------------------
# distances


def _systematic(mu, n, offset):
    P = mu.projective()
    order = np.argsort(cayley_angle(P), kind="stable")
    cum = np.cumsum(mu.weights[order])
    cum /= cum[-1]
    idx = np.searchsorted(cum, (offset + np.arange(n)) / n, side="right")
    return P[order[np.minimum(idx, len(order) - 1)]]


def wasserstein(mu, nu, n_sub=512, seed=0):
    """Chordal W1 between subsamples of size n_sub drawn by systematic
    resampling along the Cayley angle, matched by optimal assignment."""
    offset = np.random.default_rng(seed).random()
    a = _systematic(mu, n_sub, offset)
    b = _systematic(nu, n_sub, offset)
    cost = chordal(a[:, None, :], b[None, :, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].mean())


def ks_angle(mu, nu):
    """Sup distance between the angular distribution functions (from angle 0)."""
    a, b = mu.angles(), nu.angles()
    t = np.concatenate([a, b])
    s = np.concatenate([mu.weights, -nu.weights])
    order = np.argsort(t, kind="stable")
    t, c = t[order], np.cumsum(s[order])
    last = np.r_[t[1:] != t[:-1], True]
    return float(np.abs(c[last]).max())


def measure_distance(mu, nu, metric="w1", n_sub=512, seed=0):
    if metric == "w1":
        return wasserstein(mu, nu, n_sub, seed)
    if metric == "ks":
        return ks_angle(mu, nu)
    raise ConfigError(f"unknown metric {metric!r}; use w1 or ks")


@dataclass(frozen=True)
class ConvergenceTable:
    radii: tuple
    successive: tuple
    to_reference: tuple = None
    ks_to_reference: tuple = None

    def to_json(self):
        return {
            "radii": list(self.radii),
            "successive_w1": list(self.successive),
            "w1_to_reference": None if self.to_reference is None else list(self.to_reference),
            "ks_to_reference": None if self.ks_to_reference is None else list(self.ks_to_reference),
        }

    def to_csv(self):
        lines = ["R,successive_w1,w1_to_reference,ks_to_reference"]
        for k, R in enumerate(self.radii):
            s = "" if k + 1 >= len(self.radii) else f"{self.successive[k]:.10g}"
            r = "" if self.to_reference is None else f"{self.to_reference[k]:.10g}"
            q = "" if self.ks_to_reference is None else f"{self.ks_to_reference[k]:.10g}"
            lines.append(f"{R:g},{s},{r},{q}")
        return "\n".join(lines) + "\n"


def cauchy_diagnostic(rep, F, x, radii, B, reference=None, n_sub=512, seed=0):
    """W1 between theta at consecutive radii (entry k compares radii k and
    k+1), and optionally to a reference measure."""
    radii = sorted(radii)
    th = [theta(rep, F, R, x, B) for R in radii]
    succ = tuple(wasserstein(th[k], th[k + 1], n_sub, seed) for k in range(len(th) - 1))
    ref = ks = None
    if reference is not None:
        ref = tuple(wasserstein(t, reference, n_sub, seed) for t in th)
        if all(t.on_real_line() for t in th) and reference.on_real_line():
            ks = tuple(ks_angle(t, reference) for t in th)
    return ConvergenceTable(tuple(radii), succ, ref, ks)


# ---------------------------------------------------------------------------
# circle fitting on the Riemann sphere


def bloch(P):
    """Unit vectors on S^2 for homogeneous rows; chordal distance is half the chord."""
    P = np.asarray(P, dtype=complex)
    n = np.sum(np.abs(P) ** 2, axis=1)
    x = P[:, 0] * np.conj(P[:, 1])
    return np.stack([2 * x.real, 2 * x.imag, np.abs(P[:, 0]) ** 2 - np.abs(P[:, 1]) ** 2], axis=1) / n[:, None]


def circle_fit_residual(P):
    """Fit a round circle (plane section of the sphere) by total least
    squares and return the largest chordal distance of a point to it."""
    X = bloch(P)
    c = X.mean(axis=0)
    _, _, vt = np.linalg.svd(X - c)
    nrm = vt[-1]
    h = float(np.clip(nrm @ c, -1, 1))
    lat = np.arcsin(np.clip(X @ nrm, -1, 1))
    return float(np.max(np.abs(np.sin((lat - math.asin(h)) / 2))))
