"""Deterministic SVG figures with their numbers alongside as CSV.

SVG is written by hand with fixed float formatting so that the same input
gives byte-identical output.
"""
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .group import rep_images
from .hypgeom import ProjPoint
from .measures import bloch

SIZE = 400
PAD = 20


@dataclass(frozen=True)
class Figure:
    name: str
    svg: str
    csv: str
    metadata: dict = field(default_factory=dict)

    def save(self, directory):
        paths = []
        for ext, text in (("svg", self.svg), ("csv", self.csv)):
            p = os.path.join(directory, f"{self.name}.{ext}")
            with open(p, "w", newline="\n") as fh:
                fh.write(text)
            paths.append(p)
        return paths


def _f(x):
    return f"{x:.3f}"


def _svg(width, height, body, metadata):
    meta = json.dumps(metadata, sort_keys=True)
    meta = meta.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n<metadata>{meta}</metadata>\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _panel(points, ox, label):
    """Scatter of complex points in [-1.1, 1.1]^2 placed at horizontal offset ox."""
    s = (SIZE - 2 * PAD) / 2.2
    cx, cy = ox + SIZE / 2, SIZE / 2
    body = [
        f'<g id="{label}">',
        f'<rect x="{ox + PAD}" y="{PAD}" width="{SIZE - 2 * PAD}" height="{SIZE - 2 * PAD}" fill="none" stroke="#999"/>',
        f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(s)}" fill="none" stroke="#ccc"/>',
        f'<line x1="{ox + PAD}" y1="{_f(cy)}" x2="{ox + SIZE - PAD}" y2="{_f(cy)}" stroke="#ccc"/>',
        f'<text x="{ox + PAD + 4}" y="{PAD + 14}" font-size="12">{label}</text>',
    ]
    for w in points:
        body.append(f'<circle cx="{_f(cx + s * w.real)}" cy="{_f(cy - s * w.imag)}" r="1" fill="black"/>')
    body.append("</g>")
    return body


def render_limit_set(rep, B, x0=0.37, manifest_hash=""):
    """Orbit rho(g) x0 over the ball: |w| <= 1 drawn in the chart w, the
    rest in the chart 1/w so that points near infinity stay visible."""
    x = x0 if isinstance(x0, ProjPoint) else ProjPoint.from_chart(x0)
    P = rep_images(rep, B) @ x.u
    inner = np.abs(P[:, 0]) <= np.abs(P[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(inner, P[:, 0] / P[:, 1], P[:, 1] / P[:, 0])
    body = _panel(w[inner], 0, "chart z") + _panel(w[~inner], SIZE, "chart 1/z")
    meta = {"figure": "limit_set", "representation": rep.label, "radius": B.radius, "manifest": manifest_hash}
    lines = ["chart,re,im"]
    for k in range(len(w)):
        lines.append(f"{'z' if inner[k] else 'inv'},{w[k].real:.15g},{w[k].imag:.15g}")
    return Figure("limit_set", _svg(2 * SIZE, SIZE, body, meta), "\n".join(lines) + "\n", meta)


def angle_histogram(mu, bins=256):
    """Bin masses of the angular law over [0, 2pi); they sum to 1."""
    h, _ = np.histogram(mu.angles(), bins=bins, range=(0, 2 * np.pi), weights=mu.weights)
    return h / h.sum()


def render_measure(mu, kind="angle_histogram", manifest_hash="", bins=256):
    if kind == "angle_histogram":
        mass = angle_histogram(mu, bins)
        width = 2 * SIZE
        top = mass.max() if mass.max() > 0 else 1.0
        bw = (width - 2 * PAD) / bins
        body = [f'<line x1="{PAD}" y1="{SIZE - PAD}" x2="{width - PAD}" y2="{SIZE - PAD}" stroke="#999"/>']
        for k, m in enumerate(mass):
            hgt = (SIZE - 2 * PAD) * m / top
            body.append(
                f'<rect x="{_f(PAD + k * bw)}" y="{_f(SIZE - PAD - hgt)}" width="{_f(bw)}" height="{_f(hgt)}" fill="#336"/>'
            )
        uni = (SIZE - 2 * PAD) / bins / top
        body.append(f'<line x1="{PAD}" y1="{_f(SIZE - PAD - uni)}" x2="{width - PAD}" y2="{_f(SIZE - PAD - uni)}" stroke="red"/>')
        edges = np.linspace(0, 2 * np.pi, bins + 1)
        csv = ["lo,hi,mass"] + [f"{edges[k]:.15g},{edges[k + 1]:.15g},{mass[k]:.15g}" for k in range(bins)]
        meta = {"figure": "angle_histogram", "bins": bins, "atoms": len(mu), "manifest": manifest_hash}
        return Figure("angle_histogram", _svg(width, SIZE, body, meta), "\n".join(csv) + "\n", meta)
    if kind == "sphere_scatter":
        X = bloch(mu.projective())
        north = X[:, 2] >= 0
        pts = X[:, 0] + 1j * X[:, 1]
        body = _panel(pts[north], 0, "upper hemisphere") + _panel(pts[~north], SIZE, "lower hemisphere")
        csv = ["x,y,z,weight"] + [
            f"{a:.15g},{b:.15g},{c:.15g},{w:.15g}" for (a, b, c), w in zip(X, mu.weights)
        ]
        meta = {"figure": "sphere_scatter", "atoms": len(mu), "manifest": manifest_hash}
        return Figure("sphere_scatter", _svg(2 * SIZE, SIZE, body, meta), "\n".join(csv) + "\n", meta)
    raise ConfigError(f"unknown figure kind {kind!r}")


def default_kind(mu):
    return "angle_histogram" if mu.on_real_line() else "sphere_scatter"
