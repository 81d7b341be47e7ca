"""The genus-two surface group of the regular octagon, its balls, the
Dirichlet-domain reduction and representations into SL(2, C).

Words use the letters ``a b c d`` for the four side pairings and
``A B C D`` for their inverses; a word is evaluated left to right, so
``"ab"`` is the matrix product ``g_a @ g_b``.
"""
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, ConvergenceError
from .hypgeom import ORIGIN, MobiusMap, apply_real, canonical_form, rotation

SYMBOLS = "abcdABCD"
_INVERT = str.maketrans("abcdABCD", "ABCDabcd")
RELATOR = "aBcDAbCd"
# symplectic basis: [a1, b1][a2, b2] is a cyclic conjugate of the relator
SYMPLECTIC = {"a1": "D", "b1": "A", "a2": "Bc", "b2": "DAb"}

_CH = 1.0 + math.sqrt(2.0)
TRANSLATION_LENGTH = 2.0 * math.acosh(_CH)
INRADIUS = TRANSLATION_LENGTH / 2
CIRCUMRADIUS = math.acosh(_CH**2)


def invert_word(word):
    return word[::-1].translate(_INVERT)


def free_reduce(word):
    out = []
    for s in word:
        if out and out[-1] == s.translate(_INVERT):
            out.pop()
        else:
            out.append(s)
    return "".join(out)


def commutator(x, y):
    return x + y + invert_word(x) + invert_word(y)


def surface_word():
    s = SYMPLECTIC
    return commutator(s["a1"], s["b1"]) + commutator(s["a2"], s["b2"])


def _sl2_inv(M):
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    out[..., 1, 1] = M[..., 0, 0]
    return out


def _octagon_matrices():
    sh = math.sqrt(_CH**2 - 1)
    T = np.array([[_CH, sh], [sh, _CH]])
    g = np.array([rotation(k * math.pi / 4) @ T @ rotation(-k * math.pi / 4) for k in range(4)])
    return np.concatenate([g, _sl2_inv(g)])


GENERATORS = _octagon_matrices()
_INV_INDEX = np.array([4, 5, 6, 7, 0, 1, 2, 3])


@dataclass(frozen=True)
class GroupPresentation:
    symbols: str
    matrices: np.ndarray
    relator: str
    symplectic: dict

    def generator(self, symbol):
        return MobiusMap(self.matrices[self.symbols.index(symbol)])


def octagon_generators():
    """Side pairings of the regular octagon centred at i (angle sum 2pi)."""
    return GroupPresentation(SYMBOLS, GENERATORS.copy(), RELATOR, dict(SYMPLECTIC))


def word_matrix(word, table=GENERATORS):
    M = np.eye(2, dtype=table.dtype)
    for s in word:
        try:
            M = M @ table[SYMBOLS.index(s)]
        except ValueError:
            raise ConfigError(f"unknown letter {s!r} in word {word!r}") from None
    return M


def cosh_orbit_dist(M):
    """cosh d(i, M i) = |M|_F^2 / 2 for real SL2 matrices."""
    return np.sum(np.abs(M) ** 2, axis=(-2, -1)) / 2


def orbit_dist(M):
    return np.arccosh(np.maximum(cosh_orbit_dist(M), 1.0))


@dataclass(frozen=True)
class GroupElement:
    word: str
    matrix: MobiusMap
    orbit_dist: float


# ---------------------------------------------------------------------------
# balls


class Ball(Sequence):
    """Group elements with d(i, g i) <= radius, in shortlex order of the
    words found by the search.

    Indexing yields :class:`GroupElement`; the arrays ``matrices`` and
    ``dists`` give vectorised access. ``within(r)`` restricts to a smaller
    radius without searching again.
    """

    def __init__(self, radius, cap, search, index):
        self.radius = radius
        self.cap = cap
        self._search = search
        self.index = index
        self.matrices = search["matrices"][index]
        self.dists = search["dists"][index]

    def __len__(self):
        return len(self.index)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        k = self.index[i]
        return GroupElement(self._search["words"][k], MobiusMap(self.matrices[i]), float(self.dists[i]))

    @property
    def words(self):
        w = self._search["words"]
        return [w[k] for k in self.index]

    def within(self, R):
        if R > self.radius + 1e-12:
            raise ConfigError(f"radius {R} exceeds the enumerated ball radius {self.radius}")
        return Ball(R, self.cap, self._search, self.index[self.dists <= R])

    def orbit_points(self):
        return apply_real(self.matrices, ORIGIN)

    def to_csv(self):
        lines = ["word,a,b,c,d,orbit_dist"]
        for w, M, d in zip(self.words, self.matrices, self.dists):
            e = ",".join(f"{x:.15g}" for x in M.ravel())
            lines.append(f"{w or 'e'},{e},{d:.15g}")
        return "\n".join(lines) + "\n"


def _search(R, cap, margin, tol=1e-6):
    lim = math.cosh(R + margin)
    mats = [np.eye(2)[None]]
    parents = [np.array([-1])]
    lasts = [np.array([-1])]
    found = canonical_form(mats[0])
    layer = mats[0]
    offset = 0
    depth = 0
    while True:
        cand = np.einsum("nij,gjk->ngik", layer, GENERATORS).reshape(-1, 2, 2)
        par = np.repeat(np.arange(len(layer)) + offset, 8)
        gen = np.tile(np.arange(8), len(layer))
        ok = cosh_orbit_dist(cand) <= lim
        cand, par, gen = cand[ok], par[ok], gen[ok]
        if len(cand) == 0:
            break
        cf = canonical_form(cand)
        dist, _ = cKDTree(found).query(cf, distance_upper_bound=tol)
        keep = ~np.isfinite(dist)
        pairs = cKDTree(cf).query_pairs(tol, output_type="ndarray")
        if len(pairs):
            keep[pairs.max(axis=1)] = False
        if not keep.any():
            break
        depth += 1
        if depth > cap:
            raise ConvergenceError(
                f"word-length cap={cap} reached with a frontier of {int(keep.sum())} elements", cap
            )
        offset += len(layer)
        layer = cand[keep]
        mats.append(layer)
        parents.append(par[keep])
        lasts.append(gen[keep])
        found = np.vstack([found, cf[keep]])
    M = np.concatenate(mats)
    parent = np.concatenate(parents)
    last = np.concatenate(lasts)
    words = [""]
    for k in range(1, len(M)):
        words.append(words[parent[k]] + SYMBOLS[last[k]])
    sizes = [len(m) for m in mats]
    return {
        "matrices": M,
        "dists": orbit_dist(M),
        "parent": parent,
        "last": last,
        "words": words,
        "layers": np.cumsum([0] + sizes),
    }


@lru_cache(maxsize=8)
def _ball_cached(R, cap, margin):
    search = _search(R, cap, margin)
    index = np.flatnonzero(search["dists"] <= R)
    return Ball(R, cap, search, index)


def ball(R, cap=64, margin=CIRCUMRADIUS):
    """Enumerate {g : d(i, g i) <= R} by breadth-first search over words.

    Paths are pruned once they leave the ball of radius R + margin. With the
    default margin (the circumradius of the octagon) no element is lost:
    the tiles crossed by the segment [i, g i] give a path of adjacent tiles
    whose centres all stay within R + margin of i.
    """
    R = float(R)
    if not (math.isfinite(R) and 0 < R <= 14):
        raise ConfigError(f"ball radius must lie in (0, 14], got {R}")
    if int(cap) < 1:
        raise ConfigError("word-length cap must be positive")
    return _ball_cached(R, int(cap), float(margin))


# ---------------------------------------------------------------------------
# reduction to the Dirichlet domain of i


def _key(z):
    # 2(cosh d(z, i) - 1), monotone in the distance to i
    return np.abs(z - 1j) ** 2 / z.imag


def reduce_points(Z, rep=None, max_steps=10_000):
    """Vectorised generator descent into the Dirichlet domain of i.

    Returns (z0, gamma, rho) with gamma z0 = Z, gamma a real matrix stack,
    and rho the stack of rep-images of gamma (None without ``rep``).
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    z = Z.copy()
    n = len(z)
    gamma = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    table = None
    rho = None
    if rep is not None:
        table = rep.table
        rho = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    active = np.arange(n)
    a, b, c, d = (GENERATORS[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    for _ in range(max_steps):
        if len(active) == 0:
            break
        za = z[active]
        den = c * za + d
        cand = ((a * za + b) * np.conj(den)).real / np.abs(den) ** 2 + 1j * za.imag / np.abs(den) ** 2
        keys = _key(cand)
        best = np.argmin(keys, axis=0)
        kb = keys[best, np.arange(len(za))]
        d_cur = np.arccosh(1 + _key(za) / 2)
        d_new = np.arccosh(1 + kb / 2)
        move = d_new < d_cur - 1e-12
        active = active[move]
        best = best[move]
        z[active] = cand[best, np.flatnonzero(move)]
        gamma[active] = gamma[active] @ GENERATORS[_INV_INDEX[best]]
        if rho is not None:
            rho[active] = rho[active] @ table[_INV_INDEX[best]]
    else:
        raise ConvergenceError(f"domain reduction did not terminate within {max_steps} steps", max_steps)
    return z, gamma, rho


def reduce_to_domain(z, max_steps=10_000):
    """Return (z0, gamma) with z0 in the Dirichlet domain of i and gamma z0 = z.

    No generator moves z0 closer to i by more than 1e-9.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ConfigError(f"point {z!r} is not in the upper half-plane")
    word = []
    for _ in range(max_steps):
        cand = apply_real(GENERATORS, np.full(8, z))
        keys = _key(cand)
        k = int(np.argmin(keys))
        if math.acosh(1 + keys[k] / 2) < math.acosh(1 + _key(z) / 2) - 1e-12:
            z = complex(cand[k])
            word.append(SYMBOLS[_INV_INDEX[k]])
        else:
            break
    else:
        raise ConvergenceError(f"domain reduction did not terminate within {max_steps} steps", max_steps)
    w = "".join(word)
    M = word_matrix(w)
    return z, GroupElement(w, MobiusMap(M), float(orbit_dist(M)))


def reduce_frame(M, rep=None, max_steps=10_000):
    """Generator descent for a frame (an SL2R matrix) rather than a point.

    Distances are read off the Frobenius norm, which keeps far-away frames
    well conditioned. Returns (reduced frame, word, rep image of the word).
    """
    M = np.array(M, dtype=float)
    word = []
    rho = np.eye(2, dtype=complex)
    table = rep.table if rep is not None else None
    for _ in range(max_steps):
        cand = GENERATORS @ M
        norms = np.sum(cand**2, axis=(1, 2))
        k = int(np.argmin(norms))
        if norms[k] < np.sum(M**2) * (1 - 1e-13):
            M = cand[k]
            word.append(SYMBOLS[_INV_INDEX[k]])
            if table is not None:
                rho = rho @ table[_INV_INDEX[k]]
        else:
            break
    else:
        raise ConvergenceError(f"frame reduction did not terminate within {max_steps} steps", max_steps)
    return M, "".join(word), rho


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class Representation:
    """Homomorphism into SL(2, C) given by the images of a, b, c, d."""

    images: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        imgs = np.asarray(self.images, dtype=complex)
        if imgs.shape != (4, 2, 2):
            raise ConfigError("a representation needs four 2x2 images")
        det = np.linalg.det(imgs)
        if np.max(np.abs(det - 1)) > 1e-9:
            raise ConfigError("generator images must have determinant 1")
        object.__setattr__(self, "images", imgs)
        rel = word_matrix(RELATOR, self.table)
        err = min(np.abs(rel - np.eye(2)).max(), np.abs(rel + np.eye(2)).max())
        if err > 1e-9:
            raise ConfigError(f"images violate the surface relator (error {err:.2e})")

    @property
    def table(self):
        return np.concatenate([self.images, _sl2_inv(self.images)])

    def is_real(self, tol=1e-12):
        return bool(np.abs(self.images.imag).max() <= tol)


def fuchsian():
    return Representation(GENERATORS[:4].astype(complex), "fuchsian")


def bend(rep, theta):
    """Bend along the separating curve [a1, b1] by angle theta.

    The a1, b1 half is kept and a2, b2 are conjugated by the elliptic
    rotation of angle theta about the axis of [a1, b1], which commutes with
    that curve so the relator still holds.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise ConfigError("bending angle must be finite")
    table = rep.table
    s = SYMPLECTIC
    c = word_matrix(commutator(s["a1"], s["b1"]), table)
    _, vecs = np.linalg.eig(c)
    E = vecs @ np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)]) @ np.linalg.inv(vecs)
    Einv = np.linalg.inv(E)
    a2 = E @ word_matrix(s["a2"], table) @ Einv
    b2 = E @ word_matrix(s["b2"], table) @ Einv
    g0, g3 = table[0], table[3]
    # g1 = b1^-1 a1^-1 b2 and g2 = g1 a2 with b1 = g0^-1, a1 = g3^-1
    g1 = g0 @ g3 @ b2
    g2 = g1 @ a2
    label = f"bent:{theta:g}" if rep.label == "fuchsian" else f"{rep.label}+bent:{theta:g}"
    return Representation(np.array([g0, g1, g2, g3]), label)


def rep_eval(rep, word):
    return MobiusMap(word_matrix(word, rep.table), normalize=False)


def rep_images(rep, B):
    """Images of all elements of a ball, built layer by layer from parents."""
    search = B._search
    table = rep.table
    out = np.empty((len(search["matrices"]), 2, 2), dtype=complex)
    out[0] = np.eye(2)
    layers = search["layers"]
    for lo, hi in zip(layers[1:-1], layers[2:]):
        out[lo:hi] = out[search["parent"][lo:hi]] @ table[search["last"][lo:hi]]
    return out[B.index]


def injectivity_defect(rep, B, tol=1e-6):
    """Number of pairs of distinct ball elements whose images agree up to sign."""
    imgs = rep_images(rep, B)
    cf = canonical_form(imgs)
    pts = np.concatenate([cf.real, cf.imag], axis=1)
    return len(cKDTree(pts).query_pairs(tol))
