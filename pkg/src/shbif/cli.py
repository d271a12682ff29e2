"""Command-line front end: verify | reduce | sweep | simulate | classify.

Configuration files are flat ``key = value`` text with ``#`` comments.
Data goes to files under ``--out``; progress goes to standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import manifold as mf
from . import pde
from . import reduced as rd
from . import spectral as sp
from .errors import DomainError, ResonanceError

log = logging.getLogger("shbif")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def _lambda_list(text):
    vals = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    if not vals:
        raise ConfigError("empty lambda list")
    if vals != sorted(vals):
        raise ConfigError("lambda list must be sorted ascending")
    return vals


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise ConfigError(f"expected a positive integer, got {text}")
    return v


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ConfigError(f"expected one of {options}, got {text!r}")
        return text
    return parse


_SIM_KEYS = {
    "K": _positive_int, "dt": float, "T": float, "ic_seed": int, "ic_count": _positive_int,
    "ic_radius": float, "tol": float, "scheme": _choice("etd1", "etdrk4"),
}

SCHEMAS = {
    "reduce": {"lambda": Fraction, "order": int, "K": _positive_int, "basis": _choice(mf.EIGEN, mf.PRODUCT)},
    "sweep": {"lambdas": _lambda_list, "block_radius": float, "order": int, "workers": _positive_int, **_SIM_KEYS},
    "simulate": {"lambda": float, "u0": str, "sample_every": _positive_int, **_SIM_KEYS},
    "classify": {"lambdas": _lambda_list, "radius": float, "samples": _positive_int, "order": int},
}

DEFAULTS = {
    "reduce": {"lambda": Fraction(9), "order": 5, "K": sp.DEFAULT_K_REDUCTION, "basis": mf.EIGEN},
    "sweep": {"lambdas": [8.5, 9.0, 9.2, 9.5], "block_radius": 0.01, "order": 5, "workers": 1,
              "K": 16, "dt": 0.05, "T": 3000.0, "ic_seed": 0, "ic_count": 16, "ic_radius": 1.0,
              "tol": 1e-8, "scheme": "etdrk4"},
    "simulate": {"lambda": 9.2, "u0": "0.1*sin2x", "sample_every": 10, "K": sp.DEFAULT_K_SIMULATION,
                 "dt": 1e-2, "T": 200.0, "ic_seed": 0, "ic_count": 8, "ic_radius": 1.0, "tol": 1e-8,
                 "scheme": "etdrk4"},
    "classify": {"lambdas": [8.9, 9.0, 9.1, 9.5], "radius": 0.01, "samples": 64, "order": 5},
}


def read_config(path, command):
    """Parse a flat key-value file against the command's schema."""
    schema = SCHEMAS[command]
    values = dict(DEFAULTS[command])
    if path is None:
        return values
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r} for '{command}'")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            values[key] = schema[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if "order" in values and values["order"] not in (3, 5):
        raise ConfigError("order must be 3 or 5")
    return values


_TERM = re.compile(r"^([+-]?\s*[0-9.eE+-]*)\s*\*?\s*(sin|cos)(\d+)x$")


def parse_u0(text, K):
    """Parse expressions like ``0.1*sin2x - 0.05*cos6x`` into a float TrigPoly."""
    terms = {}
    for chunk in re.split(r"\s+(?=[+-])", text.strip()):
        chunk = chunk.replace(" ", "")
        m = _TERM.match(chunk)
        if not m:
            raise ConfigError(f"cannot parse initial-condition term {chunk!r}")
        coef_text, wave, wavenumber = m.groups()
        if coef_text in ("", "+"):
            coef = 1.0
        elif coef_text == "-":
            coef = -1.0
        else:
            coef = float(coef_text)
        wn = int(wavenumber)
        if wn % 2 or wn == 0:
            raise ConfigError(f"wavenumber must be even and positive, got {wn}")
        key = (wave, wn // 2)
        terms[key] = terms.get(key, 0.0) + coef
    return sp.TrigPoly(terms, sp.FLOAT, K)


def version_string():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _write(path, text):
    Path(path).write_text(text)
    log.info("wrote %s", path)


# verify


def _frac(x):
    return str(Fraction(x))


def run_verify(order=5, perturb_alpha1=False):
    """Exact checks of the reduction; returns (rows, first_failure)."""
    psi = mf.solve_center_manifold(9, 3)
    if perturb_alpha1:
        bump = sp.multiply_trig(sp.sin(1), sp.cos(2))
        psi = psi.with_coefficient((3, 0), psi[(3, 0)] + sp.project_stable(bump))
    rows = []

    def check(name, expected, computed, skip=False):
        status = "skipped" if skip else ("exact" if expected == computed else "MISMATCH")
        rows.append((name, expected, computed, status))

    alphas = mf.alpha_coefficients(psi)
    expected_alphas = [Fraction(1, 2432), Fraction(-1, 2432), Fraction(3, 2432), Fraction(-3, 2432)]
    for i, (e, c) in enumerate(zip(expected_alphas, alphas), start=1):
        check(f"alpha{i}", _frac(e), _frac(c))

    cubic = mf.reduced_vector_field(psi, 3)
    expected_cubic = {(1, (3, 0)): Fraction(-3, 4), (1, (1, 2)): Fraction(-3, 4),
                      (2, (0, 3)): Fraction(-3, 4), (2, (2, 1)): Fraction(-3, 4)}
    got_cubic = {(comp, m): c for comp, G in ((1, cubic.G1), (2, cubic.G2)) for m, c in G.items()}
    check("cubic -3/4", _dict_repr(expected_cubic), _dict_repr(got_cubic))

    skip_quintic = order < 5
    quintic_got = {}
    if not skip_quintic:
        field = mf.reduced_vector_field(mf.product_ansatz_map(psi), 5)
        quintic_got = {(comp, m): c for comp, G in ((1, field.G1), (2, field.G2))
                       for m, c in G.items() if sum(m) == 5}
    expected_quintic = {(1, (5, 0)): Fraction(3, 4864), (1, (3, 2)): Fraction(-9, 4864),
                        (2, (0, 5)): Fraction(3, 4864), (2, (2, 3)): Fraction(-9, 4864)}
    check("quintic 3/4864, -9/4864", _dict_repr(expected_quintic), _dict_repr(quintic_got), skip_quintic)

    residual = mf.homological_residual(psi, 9, 3)
    check("residual at degree 3", "0", "0" if not residual else f"{len(residual)} nonzero monomials")

    u = sp.sin(1, 2) + sp.sin(3) + sp.cos(2, Fraction(-1, 7))
    idem = sp.project_center(sp.project_center(u)) == sp.project_center(u)
    split = sp.project_center(u) + sp.project_stable(u) == u
    P = sp.center_projection_matrix(4)
    Q = sp.LinearMapMatrix(sp.identity_like(P.matrix) - P.matrix, 4)
    T = sp.transition_isomorphism((P, Q), (P, Q))
    identity = all(x == y for x, y in zip(T.matrix.flat, sp.identity_like(P.matrix).flat))
    check("P idempotent, T(9) = I", "True", str(idem and split and identity))

    failure = next((r for r in rows if r[3] == "MISMATCH"), None)
    return rows, failure


def _dict_repr(d):
    return ", ".join(f"G{comp}{list(m)}={c}" for (comp, m), c in sorted(d.items()))


def cmd_verify(args):
    rows, failure = run_verify(args.order or 5, args.perturb_alpha1)
    width = max(len(r[0]) for r in rows)
    print(f"{'check':<{width}}  status    expected | computed")
    for name, expected, computed, status in rows:
        print(f"{name:<{width}}  {status:<8}  {expected} | {computed}")
    run = [r for r in rows if r[3] != "skipped"]
    exact = sum(r[3] == "exact" for r in run)
    skipped = len(rows) - len(run)
    print(f"{exact}/{len(run)} checks exact" + (f" ({skipped} skipped)" if skipped else ""))
    if failure:
        print(f"first mismatch: {failure[0]}: expected {failure[1]}, computed {failure[2]}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# reduce


def reduce_outputs(cfg):
    lam = cfg["lambda"]
    order = cfg["order"]
    psi = mf.solve_center_manifold(lam, max(order - 2, 3), cfg["K"])
    if cfg["basis"] == mf.PRODUCT:
        psi = mf.product_ansatz_map(psi)
    field = mf.reduced_vector_field(psi, order)
    return psi.to_json() + "\n", field.to_json() + "\n"


def cmd_reduce(args):
    cfg = read_config(args.config, "reduce")
    if args.order:
        cfg["order"] = args.order
    try:
        psi_text, field_text = reduce_outputs(cfg)
    except ResonanceError as exc:
        print(f"resonance: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    out = _out_dir(args)
    _write(out / "center_manifold.json", psi_text)
    _write(out / "reduced_field.json", field_text)
    return EXIT_OK


# sweep / simulate / classify


def _sim_config(cfg, lam, seed=None):
    try:
        return pde.SimConfig(
            lam=lam, K=cfg["K"], dt=cfg["dt"], T=cfg["T"], ic_seed=cfg["ic_seed"] if seed is None else seed,
            ic_count=cfg["ic_count"], ic_radius=cfg["ic_radius"], tol=cfg["tol"], scheme=cfg["scheme"],
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(args):
    cfg = read_config(args.config, "sweep")
    if args.order:
        cfg["order"] = args.order
    template = _sim_config(cfg, cfg["lambdas"][0], args.seed)
    out = _out_dir(args)
    log.info("sweeping %d parameter values", len(cfg["lambdas"]))
    rows = pde.bifurcation_sweep(cfg["lambdas"], template, cfg["block_radius"], cfg["order"], cfg["workers"])
    for row in rows:
        log.info("lam=%g dist_H=%.6g verdict=%s %s", row.lam, row.dist_H, row.block_verdict,
                 "; ".join(row.errors))
    _write(out / "sweep.csv", pde.sweep_csv(rows))
    summary = {
        "command": "sweep",
        "version": version_string(),
        "config": {k: v for k, v in cfg.items()},
        "sim_config": pde.config_echo(template),
        "errors": {format(r.lam, ".17g"): r.errors for r in rows if r.errors},
    }
    _write(out / "sweep_summary.json", json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    return EXIT_OK


def cmd_simulate(args):
    cfg = read_config(args.config, "simulate")
    sim = _sim_config(cfg, cfg["lambda"], args.seed)
    u0 = parse_u0(cfg["u0"], sim.K)
    out = _out_dir(args)
    traj = pde.integrate_pde(sim, u0, cfg["sample_every"])
    V = pde.lyapunov_value(traj.states, sim.lam)
    buf = [("t", "norm", "V")]
    for t, n, v in zip(traj.times, traj.norms(), V):
        buf.append((format(t, ".17g"), format(n, ".17g"), format(v, ".17g")))
    with open(out / "trajectory.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(buf)
    log.info("wrote %s", out / "trajectory.csv")
    summary = {"command": "simulate", "version": version_string(), "config": cfg,
               "sim_config": pde.config_echo(sim), "escaped": traj.escaped}
    _write(out / "simulate_summary.json", json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    return EXIT_OK


def cmd_classify(args):
    cfg = read_config(args.config, "classify")
    if args.order:
        cfg["order"] = args.order
    out = _out_dir(args)
    rows = []
    for lam in cfg["lambdas"]:
        vf = mf.parameterized_reduction(lam, cfg["order"])
        rows.append(rd.classification_row(vf, cfg["radius"], cfg["samples"]))
        log.info("lam=%g verdict=%s", lam, rows[-1]["verdict"])
    _write(out / "classify.json", json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "reduce": cmd_reduce,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="shbif", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--seed", type=int, metavar="N")
        p.add_argument("--order", type=int, choices=(3, 5))
        if name == "verify":
            p.add_argument("--perturb-alpha1", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
