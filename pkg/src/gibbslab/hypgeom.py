"""Upper half-plane geometry: distances, geodesics, Busemann functions,
Mobius maps, points of the projective line and unit tangent vectors.

Interior points are plain complex numbers with positive imaginary part.
Points of CP^1 (including the circle at infinity R u {inf}) are
:class:`ProjPoint` instances holding a unit homogeneous vector, so nothing
special happens near infinity.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError

ORIGIN = 1j


def _interior(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)) or z.imag <= 0:
        raise ConfigError(f"point {z!r} is not in the upper half-plane")
    return z


def hdist(z, w):
    """Hyperbolic distance, in the asinh form that stays accurate near 0."""
    z, w = _interior(z), _interior(w)
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


def hdist_array(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 2.0 * np.arcsinh(np.abs(z - w) / (2.0 * np.sqrt(z.imag * w.imag)))


# ---------------------------------------------------------------------------
# projective points


def _normalize_vec(u):
    u = np.asarray(u, dtype=complex)
    n = np.linalg.norm(u)
    if not np.isfinite(n) or n == 0:
        raise ConfigError("homogeneous vector must be finite and nonzero")
    u = u / n
    # fix the phase so that the largest component is real and positive
    k = int(np.argmax(np.abs(u)))
    return u * (abs(u[k]) / u[k])


class ProjPoint:
    """A point of CP^1 given by homogeneous coordinates (u0 : u1).

    The chart value is u0/u1, so (1 : 0) is infinity.
    """

    __slots__ = ("u",)

    def __init__(self, u0, u1=1.0):
        self.u = _normalize_vec([u0, u1])

    @classmethod
    def from_chart(cls, w):
        w = complex(w)
        if math.isinf(abs(w)):
            return cls(1.0, 0.0)
        return cls(w, 1.0)

    @classmethod
    def infinity(cls):
        return cls(1.0, 0.0)

    def chart(self):
        u0, u1 = self.u
        if abs(u1) < 1e-300:
            return complex(math.inf, 0.0)
        return complex(u0 / u1)

    def is_infinite(self, tol=1e-12):
        return abs(self.u[1]) <= tol

    def is_real(self, tol=1e-12):
        """True when the point lies on R u {inf}, up to ``tol``."""
        return abs((self.u[0] * np.conj(self.u[1])).imag) <= tol

    @property
    def angle(self):
        """Cayley angle in [0, 2pi). For real points this is the visual angle seen from i."""
        return float(cayley_angle(self.u[None, :])[0])

    def chordal(self, other):
        return float(chordal(self.u, other.u))

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.chordal(other) < 1e-12

    def __hash__(self):
        return hash(tuple(np.round(np.concatenate([self.u.real, self.u.imag]), 9)))

    def __repr__(self):
        if self.is_infinite():
            return "ProjPoint(inf)"
        return f"ProjPoint({self.chart():.12g})"


def chordal(u, v):
    """Fubini-Study chordal distance between homogeneous vectors.

    Works for CP^{d-1} with vectors along the last axis. Uses the Lagrange
    identity so that small distances keep their relative precision.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d = u.shape[-1]
    wedge = np.zeros(np.broadcast_shapes(u.shape, v.shape)[:-1])
    for i in range(d):
        for j in range(i + 1, d):
            wedge = wedge + np.abs(u[..., i] * v[..., j] - u[..., j] * v[..., i]) ** 2
    nu = np.sum(np.abs(u) ** 2, axis=-1)
    nv = np.sum(np.abs(v) ** 2, axis=-1)
    return np.sqrt(np.clip(wedge / (nu * nv), 0.0, 1.0))


def cayley_angle(U):
    """Angle of (u0 - i u1)/(u0 + i u1) in [0, 2pi) for rows of U."""
    U = np.asarray(U, dtype=complex)
    num = U[..., 0] - 1j * U[..., 1]
    den = U[..., 0] + 1j * U[..., 1]
    return np.mod(np.angle(num) - np.angle(den), 2 * np.pi)


def boundary(x):
    """Boundary point from a real number or +-inf."""
    x = float(x)
    if math.isinf(x):
        return ProjPoint.infinity()
    return ProjPoint(x, 1.0)


def boundary_vectors(angles):
    """Real unit homogeneous vectors for boundary points at the given visual angles."""
    a = np.asarray(angles, dtype=float) / 2
    return np.stack([np.cos(a), -np.sin(a)], axis=-1).astype(complex)


def boundary_from_angle(angle):
    return ProjPoint(*boundary_vectors(angle))


# ---------------------------------------------------------------------------
# Mobius maps


class MobiusMap:
    """An element of SL(2, C) acting by fractional linear transformations.

    Equality is up to sign, i.e. in PSL(2, C).
    """

    __slots__ = ("m",)

    def __init__(self, matrix, normalize=True):
        m = np.array(matrix, dtype=complex).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not np.isfinite(det) or abs(det) == 0:
            raise ConfigError("Mobius matrix must be invertible")
        if normalize:
            m = m / np.sqrt(det)
        self.m = m

    @classmethod
    def from_entries(cls, a, b, c, d):
        return cls([[a, b], [c, d]])

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    a = property(lambda self: self.m[0, 0])
    b = property(lambda self: self.m[0, 1])
    c = property(lambda self: self.m[1, 0])
    d = property(lambda self: self.m[1, 1])

    @property
    def det(self):
        return complex(np.linalg.det(self.m))

    @property
    def trace(self):
        return complex(self.m[0, 0] + self.m[1, 1])

    def is_real(self, tol=1e-12):
        return bool(np.all(np.abs(self.m.imag) <= tol * max(1.0, np.abs(self.m).max())))

    def real_matrix(self):
        return self.m.real.copy()

    def __matmul__(self, other):
        return MobiusMap(self.m @ other.m, normalize=False)

    def inverse(self):
        a, b, c, d = self.m.ravel()
        return MobiusMap([[d, -b], [-c, a]], normalize=False)

    def __call__(self, p):
        return mobius_apply(self, p)

    def canonical(self):
        return canonical_form(self.m[None])[0]

    def __eq__(self, other):
        if not isinstance(other, MobiusMap):
            return NotImplemented
        return bool(np.max(np.abs(self.canonical() - other.canonical())) < 1e-9)

    def __hash__(self):
        return hash(tuple(np.round(self.canonical(), 6)))

    def translation_length(self):
        """Displacement of the axis for a real hyperbolic element."""
        t = abs(self.trace.real)
        if t <= 2:
            return 0.0
        return 2.0 * math.acosh(t / 2)

    def __repr__(self):
        return f"MobiusMap({np.array2string(self.m, precision=6)})"


def canonical_form(M, tol=1e-9):
    """Sign-normalised flat entries of a stack of 2x2 matrices.

    The first entry with modulus above ``tol`` is made to have positive real
    part (positive imaginary part if its real part vanishes). Real input
    gives a real (N, 4) array, complex input a complex one.
    """
    M = np.asarray(M)
    flat = M.reshape(len(M), 4)
    big = np.abs(flat) > tol
    first = np.argmax(big, axis=1)
    lead = flat[np.arange(len(flat)), first]
    if np.iscomplexobj(flat):
        re, im = lead.real, lead.imag
        neg = (re < -tol) | ((np.abs(re) <= tol) & (im < 0))
    else:
        neg = lead < 0
    return np.where(neg[:, None], -flat, flat)


def mobius_apply(m, p):
    """Apply a Mobius map to an interior point, an array of them, or a ProjPoint."""
    M = m.m if isinstance(m, MobiusMap) else np.asarray(m)
    if isinstance(p, ProjPoint):
        return ProjPoint(*(M @ p.u))
    if np.isrealobj(M) or np.all(np.abs(M.imag) == 0):
        return apply_real(M.real, p)
    z = np.asarray(p, dtype=complex)
    out = (M[0, 0] * z + M[0, 1]) / (M[1, 0] * z + M[1, 1])
    return complex(out) if out.ndim == 0 else out


def apply_real(M, z):
    """Real Mobius action on interior points; the imaginary part is computed
    from Im z / |cz + d|^2 so it keeps full relative precision.

    ``M`` may be a single 2x2 matrix or a stack matching ``z``.
    """
    M = np.asarray(M, dtype=float)
    z = np.asarray(z, dtype=complex)
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    den = c * z + d
    num = a * z + b
    re = (num * np.conj(den)).real / np.abs(den) ** 2
    im = (a * d - b * c) * z.imag / np.abs(den) ** 2
    out = re + 1j * im
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# frames and geodesics


def frame_at(z):
    """Real SL2 matrix taking i to z and keeping vertical directions vertical."""
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z.imag)
    out = np.zeros(z.shape + (2, 2))
    out[..., 0, 0] = s
    out[..., 0, 1] = z.real / s
    out[..., 1, 1] = 1.0 / s
    return out


def rotation(psi):
    """Rotation about i turning tangent directions counterclockwise by psi."""
    psi = np.asarray(psi, dtype=float)
    c, s = np.cos(psi / 2), np.sin(psi / 2)
    out = np.empty(psi.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -s
    out[..., 1, 1] = c
    return out


def _sl2_inverse(M):
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    out[..., 1, 1] = M[..., 0, 0]
    return out


def _real_vec(U):
    # real representative of a real homogeneous vector
    k = np.argmax(np.abs(U), axis=-1)
    lead = np.take_along_axis(U, k[..., None], axis=-1)
    V = (U * (np.abs(lead) / lead)).real
    return V / np.linalg.norm(V, axis=-1, keepdims=True)


def frames_toward(z, U):
    """Frames based at z pointing at boundary points with homogeneous rows U.

    Returns g with g(i) = z and g(inf) the boundary point.
    """
    z = np.asarray(z, dtype=complex)
    A = frame_at(z)
    V = np.einsum("...ij,...j->...i", _sl2_inverse(A), np.asarray(U, dtype=complex))
    V = _real_vec(V)
    K = np.empty(V.shape[:-1] + (2, 2))
    K[..., 0, 0] = V[..., 0]
    K[..., 0, 1] = -V[..., 1]
    K[..., 1, 0] = V[..., 1]
    K[..., 1, 1] = V[..., 0]
    return A @ K


def segment_frames(z1, z2):
    """Frames g with g(i) = z1 and g(i e^L) = z2, together with L."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    A = frame_at(z1)
    u = apply_real(_sl2_inverse(A), z2)
    ang = np.angle((u - 1j) / (u + 1j))
    g = frames_toward(z1, np.einsum("...ij,...j->...i", A, boundary_vectors(ang)))
    return g, hdist_array(z1, z2)


def geodesic_point(z, target, s):
    """Point at signed distance s from z on the geodesic toward ``target``.

    ``target`` is an interior point or a boundary :class:`ProjPoint`.
    """
    z = _interior(z)
    if isinstance(target, ProjPoint):
        if not target.is_real(1e-9):
            raise ConfigError("boundary target must lie on R u {inf}")
        g = frames_toward(z, target.u)
    else:
        target = _interior(target)
        if target == z:
            raise ConfigError("geodesic direction undefined for coincident points")
        g, _ = segment_frames(z, target)
    return apply_real(g, 1j * math.exp(s))


def busemann(xi, y, z, tol=1e-10, t_cap=60.0):
    """Busemann function lim_t d(c(t), z) - d(c(t), y), c the ray from y to xi.

    Evaluated in the frame of the ray so no point ever gets close to the
    real axis. Stops when two evaluations 2 apart in t agree to ``tol``.
    """
    y, z = _interior(y), _interior(z)
    if not xi.is_real(1e-9):
        raise ConfigError("Busemann point must lie on R u {inf}")
    g = frames_toward(y, xi.u)
    w = apply_real(_sl2_inverse(g), z)
    prev = None
    t = 2.0
    while t <= t_cap:
        cur = hdist(1j * math.exp(t), w) - t
        if prev is not None and abs(cur - prev) < tol:
            return cur
        prev = cur
        t += 2.0
    raise ConvergenceError(f"Busemann limit not within tol={tol:g} by t={t_cap:g}", tol)


def busemann_closed(xi, y, z):
    """Closed form of the Busemann function (vectorised over y, z)."""
    u0, u1 = _real_vec(np.asarray(xi.u))
    y = np.asarray(y, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return np.log(y.imag / np.abs(u1 * y - u0) ** 2) - np.log(z.imag / np.abs(u1 * z - u0) ** 2)


def parabolic_fixing(xi, s):
    """Parabolic real Mobius map fixing the boundary point xi (moves along its horocycles)."""
    g = frames_toward(ORIGIN, xi.u)
    return MobiusMap(g @ np.array([[1.0, s], [0.0, 1.0]]) @ _sl2_inverse(g))


# ---------------------------------------------------------------------------
# unit tangent bundle


def _flow_matrix(t):
    return np.array([[math.exp(t / 2), 0.0], [0.0, math.exp(-t / 2)]])


@dataclass(frozen=True, eq=False)
class UnitTangent:
    """Unit tangent vector stored as a frame g in SL(2, R).

    The base point is g(i) and the direction is the image under g of the
    upward unit vector at i. Geodesic flow is right multiplication by
    diag(e^{t/2}, e^{-t/2}).
    """

    frame: np.ndarray

    @classmethod
    def from_base_angle(cls, z, angle):
        z = _interior(z)
        return cls(frame_at(z) @ rotation(angle - math.pi / 2))

    @classmethod
    def from_hopf(cls, xi_minus, xi_plus, t):
        """Vector on the geodesic from xi_minus to xi_plus at signed time t
        from the foot of the perpendicular dropped from i."""
        if xi_minus == xi_plus:
            raise ConfigError("Hopf endpoints must be distinct")
        if not (xi_minus.is_real(1e-9) and xi_plus.is_real(1e-9)):
            raise ConfigError("Hopf endpoints must lie on R u {inf}")
        up = _real_vec(xi_plus.u)
        um = _real_vec(xi_minus.u)
        g = np.array([[up[0], um[0]], [up[1], um[1]]])
        det = np.linalg.det(g)
        if det < 0:
            g[:, 1] *= -1
            det = -det
        g = g / math.sqrt(det)
        s0 = math.log(abs(apply_real(_sl2_inverse(g), ORIGIN)))
        return cls(g @ _flow_matrix(s0 + t))

    @property
    def base(self):
        return apply_real(self.frame, ORIGIN)

    @property
    def angle(self):
        c, d = self.frame[1]
        return float(np.mod(np.angle(1j / (c * 1j + d) ** 2), 2 * np.pi))

    @property
    def hopf(self):
        """(backward endpoint, forward endpoint, time from the foot of i)."""
        g = self.frame
        xi_minus = ProjPoint(g[0, 1], g[1, 1])
        xi_plus = ProjPoint(g[0, 0], g[1, 0])
        t = -math.log(abs(apply_real(_sl2_inverse(g), ORIGIN)))
        return xi_minus, xi_plus, t

    def flow(self, t):
        return UnitTangent(self.frame @ _flow_matrix(t))

    def push(self, m):
        """Image under the differential of a real Mobius map."""
        M = m.m if isinstance(m, MobiusMap) else np.asarray(m)
        if np.abs(np.imag(M)).max() > 1e-12:
            raise ConfigError("only real Mobius maps act on the unit tangent bundle")
        M = np.real(M)
        M = M / math.sqrt(np.linalg.det(M))
        return UnitTangent(M @ self.frame)

    def __repr__(self):
        return f"UnitTangent(base={self.base:.6g}, angle={self.angle:.6g})"


def flow(v, t):
    return v.flow(t)
