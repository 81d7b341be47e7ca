"""Command-line entry point.

Every run writes its outputs plus one ``manifest.json`` into a fresh
directory. Exit codes: 0 success, 1 configuration error, 2 a numerical
limit that did not converge.
"""
import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .cocycle import basin_check, fuchsian_section, lyapunov_section_plus, lyapunov_top, oseledets_flags
from .config import TOLERANCES, build_config, load_ini, parse_cocycle, parse_potential, parse_rep, parse_window, parse_x
from .errors import ConfigError, ConvergenceError
from .group import ball
from .measures import ball_average, ledrappier_boundary, sphere_average, theta
from .potential import estimate_pressure
from .render import default_kind, render_limit_set, render_measure
from .verify import random_tangents, run_all

COMMANDS = (
    "ball",
    "pressure",
    "theta",
    "ball-average",
    "sphere-average",
    "ledrappier",
    "lyapunov",
    "section",
    "limit-set",
    "basin",
    "report",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="INI file with run settings")
    common.add_argument("--out", help="output directory (default: $OUTPUT_DIR or ./runs, one subdirectory per run)")
    common.add_argument("--R", type=float, help="ball radius")
    common.add_argument("--cap", type=int, help="word-length cap for ball enumeration")
    common.add_argument("--potential", help="zero | const:c | bump:q,r,A")
    common.add_argument("--rep", help="fuchsian | bent:theta")
    common.add_argument("--x", help="fiber point as a complex literal, or inf")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--window", help="pressure fitting window a:b")
    common.add_argument("--threads", type=int, help="worker threads (0: all available)")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--T", type=float, help="initial backward time for sections")
    common.add_argument("--vectors", type=int, help="number of random tangent vectors")
    common.add_argument("--steps", type=int, help="orbit length for basin checks")
    common.add_argument("--points", type=int, help="number of random fiber points")
    common.add_argument("--cocycle", "--matrices", dest="cocycle", help="two-symbol (alias demo2) | diag:lambda")
    common.add_argument("--P", type=float, help="pressure value (estimated when omitted)")

    parser = _Parser(prog="gibbslab", description="Gibbs kernels, equidistribution and Lyapunov sections on a genus-two surface.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    rp = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    rp.add_argument("manifest")
    rp.add_argument("--out")
    return parser


def _write(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def _output_dir(out, command, digest):
    if out:
        path = out
        if os.path.exists(os.path.join(path, "manifest.json")):
            raise ConfigError(f"{path} already holds a run; choose another --out")
    else:
        base = os.environ.get("OUTPUT_DIR", "runs")
        path = os.path.join(base, f"{command}-{digest[:10]}")
        k = 2
        while os.path.exists(path):
            path = os.path.join(base, f"{command}-{digest[:10]}-{k}")
            k += 1
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands; each returns {file name: text}


def _measure_files(stem, mu, digest, extra):
    fig = render_measure(mu, default_kind(mu), manifest_hash=digest)
    summary = dict(mu.summary(), **extra)
    return {
        f"{stem}.csv": mu.to_csv(),
        f"{stem}.json": _dump(summary),
        f"{stem}_{fig.name}.svg": fig.svg,
        f"{stem}_{fig.name}.csv": fig.csv,
    }


def run_ball(cfg, digest):
    B = ball(cfg.R, cfg.cap)
    radii = list(range(1, int(cfg.R) + 1))
    counts = {str(r): int(np.sum(B.dists <= r)) for r in radii}
    return {"ball.csv": B.to_csv(), "ball.json": _dump({"R": cfg.R, "count": len(B), "counts_by_radius": counts})}


def run_pressure(cfg, digest):
    lo, hi = parse_window(cfg.window)
    est = estimate_pressure(parse_potential(cfg.potential), ball(hi, cfg.cap), (lo, hi))
    return {"pressure.json": _dump(est.to_json())}


def run_theta(cfg, digest):
    B = ball(cfg.R, cfg.cap)
    mu = theta(parse_rep(cfg.rep), parse_potential(cfg.potential), cfg.R, parse_x(cfg.x), B)
    return _measure_files("theta", mu, digest, {"R": cfg.R})


def _run_average(fn, stem):
    def run(cfg, digest):
        mu = fn(parse_rep(cfg.rep), parse_potential(cfg.potential), cfg.R, cfg.samples, parse_x(cfg.x), cfg.seed)
        files = _measure_files(stem, mu.fiber_marginal(), digest, {"R": cfg.R, "samples": cfg.samples})
        files[f"{stem}.csv"] = mu.to_csv()
        return files

    return run


def run_ledrappier(cfg, digest):
    F = parse_potential(cfg.potential)
    B = ball(cfg.R, cfg.cap)
    P = cfg.P
    if P is None:
        lo, hi = parse_window(cfg.window)
        P = estimate_pressure(F, B, (lo, min(hi, cfg.R))).slope
    mu = ledrappier_boundary(F, B, cfg.R, P)
    return _measure_files("ledrappier", mu, digest, {"R": cfg.R, "P": P})


def run_lyapunov(cfg, digest):
    rep = parse_rep(cfg.rep)
    val = lyapunov_top(rep, ball(cfg.R, cfg.cap), parse_potential(cfg.potential), cfg.R)
    return {"lyapunov.json": _dump({"R": cfg.R, "representation": rep.label, "chi_top": val})}


def run_section(cfg, digest):
    rep = parse_rep(cfg.rep)
    rng = np.random.default_rng([cfg.seed, 0])
    lines = ["base_re,base_im,angle,section_re,section_im,closed_form_chordal"]
    worst = 0.0
    for v in random_tangents(rng, cfg.vectors):
        s = lyapunov_section_plus(rep, v, cfg.T, seed=cfg.seed, tol=TOLERANCES["section_chordal"])
        gap = s.chordal(fuchsian_section(v)) if rep.label == "fuchsian" else float("nan")
        worst = max(worst, gap) if rep.label == "fuchsian" else worst
        w = s.chart()
        b = v.base
        lines.append(f"{b.real:.15g},{b.imag:.15g},{v.angle:.15g},{w.real:.15g},{w.imag:.15g},{gap:.6g}")
    summary = {"vectors": cfg.vectors, "T": cfg.T, "representation": rep.label}
    if rep.label == "fuchsian":
        summary["max_chordal_to_backward_endpoint"] = worst
    return {"section.csv": "\n".join(lines) + "\n", "section.json": _dump(summary)}


def run_limit_set(cfg, digest):
    fig = render_limit_set(parse_rep(cfg.rep), ball(cfg.R, cfg.cap), parse_x(cfg.x), manifest_hash=digest)
    return {"limit_set.svg": fig.svg, "limit_set.csv": fig.csv}


def run_basin(cfg, digest):
    c = parse_cocycle(cfg.cocycle)
    flag = oseledets_flags(c, cfg.steps, seed=cfg.seed)
    rep = basin_check(c, flag, n_points=cfg.points, seed=cfg.seed, threads=cfg.worker_count())
    return {"basin.json": _dump(rep)}


def run_report(cfg, digest):
    results = run_all()
    text = "\n".join(r.line() for r in results) + "\n"
    summary = {"passed": sum(r.passed for r in results), "total": len(results), "checks": [r.to_json() for r in results]}
    return {"report.txt": text, "report.json": _dump(summary)}


RUNNERS = {
    "ball": run_ball,
    "pressure": run_pressure,
    "theta": run_theta,
    "ball-average": _run_average(ball_average, "ball_average"),
    "sphere-average": _run_average(sphere_average, "sphere_average"),
    "ledrappier": run_ledrappier,
    "lyapunov": run_lyapunov,
    "section": run_section,
    "limit-set": run_limit_set,
    "basin": run_basin,
    "report": run_report,
}


def execute(command, cfg, out=None):
    """Run one command and write its files plus the manifest. Returns the output directory."""
    digest = cfg.digest(command)
    t0 = time.perf_counter()
    files = RUNNERS[command](cfg, digest)
    path = _output_dir(out, command, digest)
    for name, text in sorted(files.items()):
        _write(os.path.join(path, name), text)
    manifest = {
        "command": command,
        "config": cfg.snapshot(),
        "config_hash": digest,
        "seed": cfg.seed,
        "ball": {"R": cfg.R, "cap": cfg.cap},
        "potential": cfg.potential,
        "representation": cfg.rep,
        "tolerances": TOLERANCES,
        "version": __version__,
        "outputs": sorted(files),
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    _write(os.path.join(path, "manifest.json"), _dump(manifest))
    return path


def main(argv=None):
    try:
        args = vars(build_parser().parse_args(argv))
        command = args.pop("command")
        if command == "replay":
            try:
                with open(args["manifest"]) as fh:
                    manifest = json.load(fh)
                command = manifest["command"]
                cfg = build_config(manifest["config"])
            except (OSError, ValueError, KeyError) as exc:
                raise ConfigError(f"cannot read manifest {args['manifest']}: {exc}") from None
            if command not in RUNNERS:
                raise ConfigError(f"manifest names unknown command {command!r}")
        else:
            file_values = load_ini(args.pop("config")) if "config" in args else {}
            cfg = build_config(file_values, {k: v for k, v in args.items() if k != "out"})
        path = execute(command, cfg, args.get("out"))
        print(path)
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 2

