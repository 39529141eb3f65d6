"""Command-line entry point.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import replace

import numpy as np

from ._green import l2_distance
from .errors import CoulombLimitsError, NumericalError
from .harness import (
    CSV_HEADER,
    DEFAULT_EPS_GRID,
    build_id,
    convergence_sweep,
    penetrability_sweep,
    probe_set,
)
from .eps_operator import apply_eps_resolvent, eps_scattering
from .limit_operator import LimitResolvent, classify_limit
from .potentials import Piecewise, builtin_catalog, bump, lneps_coefficient, lneps_slope, load_family, pairing
from .resonance import find_resonant_couplings, half_bound_state, square_well

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
CLI_RESONANCE_TOL = 1e-5


class UsageError(Exception):
    pass


# argument parsing -------------------------------------------------------------------------

def parse_grid(text, points=None):
    """``"a,b,c"`` or ``"lo..hi"`` (log-spaced, ``points`` values).

    Without ``points`` a range gets two points per decade plus one.
    """
    text = text.strip()
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = float(lo_s), float(hi_s)
            if lo <= 0 or hi <= 0:
                raise UsageError(f"log-spaced range needs positive ends: {text!r}")
            n = points if points is not None else int(round(2 * abs(math.log10(hi / lo)))) + 1
            if n < 1:
                raise UsageError("--points must be positive")
            return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad numeric grid {text!r}: {exc}") from None


def parse_range(text):
    """``"lo..hi"`` or ``"lo,hi"`` as a pair of floats (any signs)."""
    sep = ".." if ".." in text else ","
    try:
        lo, hi = (float(v) for v in text.split(sep))
    except ValueError:
        raise UsageError(f"expected 'lo..hi', got {text!r}") from None
    return lo, hi


def parse_complex(text):
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError:
        raise UsageError(f"expected 're,im', got {text!r}") from None


def _family_args(p, multiple=False):
    if multiple:
        p.add_argument("--builtin", action="append", default=[],
                       help="builtin family name (repeatable or comma-separated)")
        p.add_argument("--spec", action="append", default=[], help="JSON spec file or string (repeatable)")
    else:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--builtin", help="builtin family name")
        src.add_argument("--spec", help="JSON spec file or string")
    p.add_argument("--q-minus", type=float, help="override the left Coulomb coefficient")
    p.add_argument("--q-plus", type=float, help="override the right Coulomb coefficient")
    p.add_argument("--beta", type=float, help="set V = beta/2 on (-1, 1), so that int V = beta")


def _apply_overrides(family, args):
    if args.q_minus is not None or args.q_plus is not None:
        c = family.coulomb
        coulomb = replace(c, q_minus=c.q_minus if args.q_minus is None else args.q_minus,
                          q_plus=c.q_plus if args.q_plus is None else args.q_plus)
        family = replace(family, coulomb=coulomb)
    if args.beta is not None:
        family = replace(family, V=Piecewise.constant(args.beta / 2.0))
    return family


def _one_family(args):
    if args.builtin:
        return _apply_overrides(builtin_catalog(args.builtin), args)
    if args.spec is None:
        raise UsageError("give --builtin NAME or --spec FILE")
    return _apply_overrides(load_family(args.spec), args)


def _many_families(args):
    names = [n for item in args.builtin for n in item.split(",") if n]
    if not names and not args.spec:
        raise UsageError("give at least one --builtin or --spec")
    families = [builtin_catalog(n) for n in names] + [load_family(s) for s in args.spec]
    return [_apply_overrides(f, args) for f in families]


def _eps_grid(args):
    return DEFAULT_EPS_GRID if args.eps is None else parse_grid(args.eps, args.points)


def build_parser():
    parser = argparse.ArgumentParser(prog="coulomb-limits", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=build_id())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resonance", help="half-bound state of U (JSON)")
    _family_args(p)
    p.add_argument("--well-depth", type=float, help="use U = depth on (-1, 1)")
    p.add_argument("--tol", type=float, default=CLI_RESONANCE_TOL,
                   help="resonance tolerance on |h'(1)| (default %(default)g, suited to depths typed "
                        "to about five digits)")
    p.add_argument("--couplings", metavar="LO..HI",
                   help="also list resonant couplings alpha in [LO, HI] (e.g. --couplings=-30..0)")

    p = sub.add_parser("classify", help="limit operator of a family (JSON)")
    _family_args(p)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("resolve-eps", help="eps resolvent applied to a probe (CSV)")
    _family_args(p)
    p.add_argument("--eps", required=True, help="eps value(s)")
    p.add_argument("--points", type=int)
    p.add_argument("--zeta", default="0,1", help="spectral parameter 're,im' (default 0,1)")
    p.add_argument("--probe", type=int, default=0, help="index into the probe set")
    p.add_argument("--x", default="-1,-0.5,-0.1,0.1,0.5,1", help="sample abscissae")

    p = sub.add_parser("scatter-eps", help="|T_eps(k)|^2 and |R_eps(k)|^2 (CSV)")
    _family_args(p)
    p.add_argument("--eps")
    p.add_argument("--points", type=int)
    p.add_argument("--k", default="0.5,1,2")

    p = sub.add_parser("converge", help="resolvent gap versus eps (CSV + JSON summary)")
    _family_args(p)
    p.add_argument("--eps")
    p.add_argument("--points", type=int)
    p.add_argument("--zeta", default="0,1")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("penetrability", help="scattering table and verdicts (CSV + JSON summary)")
    _family_args(p, multiple=True)
    p.add_argument("--eps")
    p.add_argument("--points", type=int)
    p.add_argument("--k", default="0.5,1,2")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("pairing", help="distributional pairing versus eps (CSV + JSON summary)")
    _family_args(p)
    p.add_argument("--eps", default="1e-2..1e-5")
    p.add_argument("--points", type=int, default=7)
    p.add_argument("--bump", default="0,1", help="test function 'center,radius'")

    for sp in sub.choices.values():
        sp.add_argument("--output", "-o", help="write the main output here (default stdout)")
        if sp.prog.split()[-1] in ("converge", "penetrability", "pairing", "scatter-eps", "resolve-eps"):
            sp.add_argument("--summary", help="write the JSON summary here")
    return parser


# output helpers ---------------------------------------------------------------------------

def _csv_text(rows):
    buf = io.StringIO()
    buf.write(f"# build: {build_id()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _json_text(doc):
    doc = {"build": build_id(), **doc}
    return json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n"


def _plain(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o).__name__)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _r(v):
    return repr(float(v))


def _z(z):
    return f"{z.real!r}{z.imag:+}j"


# subcommands ------------------------------------------------------------------------------

def cmd_resonance(args):
    if args.well_depth is not None:
        U = square_well(args.well_depth)
    else:
        U = _one_family(args).U
    data = half_bound_state(U, args.tol)
    doc = data.to_dict()
    if args.couplings:
        doc["couplings"] = find_resonant_couplings(U, parse_range(args.couplings))
    return _json_text(doc), None


def cmd_classify(args):
    family = _one_family(args)
    limit = classify_limit(family, tol=args.tol)
    doc = limit.to_dict()
    doc["family"] = family.name
    if limit.resonance is not None:
        doc["resonance"] = limit.resonance.to_dict()
    return _json_text(doc), None


def cmd_resolve_eps(args):
    family = _one_family(args)
    zeta = parse_complex(args.zeta)
    probes = probe_set()
    if not 0 <= args.probe < len(probes):
        raise UsageError(f"--probe must be in 0..{len(probes) - 1}")
    f = probes[args.probe]
    xs = parse_grid(args.x)
    rows, summary = [], []
    limit = classify_limit(family) if not family.shifted else None
    for eps in parse_grid(args.eps, args.points):
        res = apply_eps_resolvent(family, eps, zeta, f)
        y, _ = res.trace(np.asarray(xs))
        for x, v in zip(xs, y):
            rows.append((family.name, _r(eps), _z(zeta), _r(v.real), f"re_y(x={x!r})"))
            rows.append((family.name, _r(eps), _z(zeta), _r(v.imag), f"im_y(x={x!r})"))
        rows.append((family.name, _r(eps), _z(zeta), _r(res.residual_norm), "residual_norm"))
        cell = {"eps": eps, "residual_norm": res.residual_norm, "l2_norm": res.solution.l2_norm()}
        if limit is not None:
            solver = LimitResolvent(limit, zeta, extent=res.solution.grid.edges[-1])
            u, _ = solver.solve(f, res.solution.grid)
            gap = l2_distance(res.solution, u)
            rows.append((family.name, _r(eps), _z(zeta), _r(gap), "gap_to_limit"))
            cell["gap_to_limit"] = gap
        summary.append(cell)
    return _csv_text(rows), _json_text({"family": family.name, "probe": f.name, "cells": summary})


def cmd_scatter_eps(args):
    family = _one_family(args)
    ks = parse_grid(args.k)
    rows = []
    for eps in _eps_grid(args):
        for k in ks:
            T, R = eps_scattering(family, eps, k)
            rows.append((family.name, _r(eps), _r(k), _r(abs(T) ** 2), "T2"))
            rows.append((family.name, _r(eps), _r(k), _r(abs(R) ** 2), "R2"))
    return _csv_text(rows), None


def cmd_converge(args):
    family = _one_family(args)
    report = convergence_sweep(family, parse_complex(args.zeta), _eps_grid(args), workers=args.workers)
    return report.to_csv(), report.to_json() + "\n"


def cmd_penetrability(args):
    families = _many_families(args)
    report = penetrability_sweep(families, parse_grid(args.k), _eps_grid(args), workers=args.workers)
    return report.to_csv(), report.to_json() + "\n"


def cmd_pairing(args):
    family = _one_family(args)
    try:
        center, radius = (float(v) for v in args.bump.split(","))
    except ValueError:
        raise UsageError(f"--bump expects 'center,radius', got {args.bump!r}") from None
    psi = bump(center, radius)
    grid = parse_grid(args.eps, args.points)
    rows = [(family.name, _r(e), "", _r(pairing(family, e, psi)), "pairing") for e in grid]
    slope, intercept = lneps_slope(family, psi, grid)
    doc = {"family": family.name, "psi": psi.name, "psi0": float(psi(0.0)), "slope": slope,
           "intercept": intercept}
    if not family.shifted:
        doc["lneps_coefficient"] = lneps_coefficient(family)
    return _csv_text(rows), _json_text(doc)


COMMANDS = {
    "resonance": cmd_resonance,
    "classify": cmd_classify,
    "resolve-eps": cmd_resolve_eps,
    "scatter-eps": cmd_scatter_eps,
    "converge": cmd_converge,
    "penetrability": cmd_penetrability,
    "pairing": cmd_pairing,
}


def run(argv=None):
    """Parse ``argv`` and dispatch; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        main_text, summary_text = COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CoulombLimitsError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(main_text, args.output)
    summary_path = getattr(args, "summary", None)
    if summary_text is not None:
        if summary_path:
            _emit(summary_text, summary_path)
        elif args.output:
            sys.stdout.write(summary_text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
