import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gibbslab.errors import ConfigError
from gibbslab.group import ball
from gibbslab.measures import EmpiricalMeasure, theta, uniform_circle
from gibbslab.potential import zero
from gibbslab.render import angle_histogram, default_kind, render_limit_set, render_measure

SVG = "{http://www.w3.org/2000/svg}"


def test_uniform_histogram_within_standard_error():
    n, bins = 4096, 256
    mass = angle_histogram(uniform_circle(n), bins)
    assert np.abs(mass - 1 / bins).max() <= 4 / math.sqrt(n * bins)


def test_random_uniform_histogram_within_standard_error():
    n, bins = 100_000, 256
    rng = np.random.default_rng(0)
    mass = angle_histogram(EmpiricalMeasure(rng.random(n) * 2 * np.pi, np.ones(n), "circle"), bins)
    assert np.abs(mass - 1 / bins).max() <= 4 / math.sqrt(n * bins)


def test_point_mass_fills_one_bin():
    mass = angle_histogram(EmpiricalMeasure([1.0], [1.0], "circle"))
    assert mass.max() == 1.0 and np.count_nonzero(mass) == 1


def test_histogram_sums_to_one(rng):
    mu = EmpiricalMeasure(rng.random(777) * 7, rng.random(777), "circle")
    assert abs(angle_histogram(mu).sum() - 1) < 1e-12


def test_measure_figures_are_byte_identical(rep):
    B = ball(7)
    a = render_measure(theta(rep, zero(), 7, 0.37, B), manifest_hash="abc")
    b = render_measure(theta(rep, zero(), 7, 0.37, B), manifest_hash="abc")
    assert a.svg == b.svg and a.csv == b.csv


def test_limit_set_figure(bent, tmp_path):
    B = ball(7)
    fig = render_limit_set(bent, B, 0.37, manifest_hash="h")
    assert fig.svg == render_limit_set(bent, B, 0.37, manifest_hash="h").svg
    root = ET.fromstring(fig.svg)
    dots = [c for c in root.iter(SVG + "circle") if c.get("r") == "1"]
    rows = fig.csv.splitlines()
    assert rows[0] == "chart,re,im"
    assert len(dots) == len(rows) - 1 == len(B)
    assert '"representation": "bent:0.3"' in root.find(SVG + "metadata").text
    paths = fig.save(tmp_path)
    assert [p.rsplit(".", 1)[1] for p in paths] == ["svg", "csv"]
    assert open(paths[1]).read() == fig.csv


def test_histogram_csv_matches_masses():
    mu = uniform_circle(1024)
    fig = render_measure(mu, bins=64)
    masses = [float(r.split(",")[2]) for r in fig.csv.splitlines()[1:]]
    assert np.allclose(masses, angle_histogram(mu, 64), atol=1e-15)
    ET.fromstring(fig.svg)


def test_sphere_scatter_for_measures_off_the_real_line(bent):
    mu = theta(bent, zero(), 7, 0.37, ball(7))
    assert default_kind(mu) == "sphere_scatter"
    fig = render_measure(mu, default_kind(mu))
    X = np.array([[float(t) for t in r.split(",")[:3]] for r in fig.csv.splitlines()[1:]])
    assert np.allclose(np.linalg.norm(X, axis=1), 1)
    ET.fromstring(fig.svg)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        render_measure(uniform_circle(16), "pie")
