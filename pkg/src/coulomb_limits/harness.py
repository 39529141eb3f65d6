"""Sweeps over eps: resolvent gaps, scattering trends, inner-profile checks.

Cells of a sweep are independent.  They run through a work queue
(``concurrent.futures``) and results are re-sorted by their keys, so output
order never depends on completion order.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._green import function_l2_norm, l2_distance
from ._grid import build_grid
from ._validation import check_eps_grid, check_offaxis, check_wavenumber
from .eps_operator import EpsResolvent, eps_scattering
from .errors import CoulombLimitsError, ContractViolation, InvalidParameterError
from .limit_operator import LimitResolvent, classify_limit, limit_scattering
from .potentials import TestFunction, load_family

log = logging.getLogger(__name__)

PROBE_SET_VERSION = "1"
DEFAULT_EPS_GRID = tuple(10.0 ** -np.arange(1.0, 4.01, 0.5))
TRUNCATION_WIDTHS = 6.0
PENETRABLE_CHANGE = 0.02
CSV_HEADER = ("family", "eps", "k_or_zeta", "value", "kind")


def build_id():
    return f"coulomb-limits {__version__} probes-v{PROBE_SET_VERSION}"


# probes ----------------------------------------------------------------------------------

_PROBE_TABLE = (
    # (center, width, modulation, frequency)
    (0.0, 0.2, None, 0.0),
    (0.0, 0.5, None, 0.0),
    (0.5, 0.2, None, 0.0),
    (-0.5, 0.5, None, 0.0),
    (0.0, 0.5, "cos", 1.0),
    (0.0, 0.5, "sin", 3.0),
    (0.5, 0.5, "cos", 3.0),
    (-0.5, 0.2, "sin", 1.0),
)


def _probe(center, width, modulation, freq):
    def raw(x):
        x = np.asarray(x, dtype=float)
        g = np.exp(-(((x - center) / width) ** 2))
        if modulation == "cos":
            return g * np.cos(freq * x)
        if modulation == "sin":
            return g * np.sin(freq * x)
        return g

    r = TRUNCATION_WIDTHS * width
    support = (center - r, center + r)
    grid = build_grid(support[0], support[1], (center,), h_max=width / 4)
    norm = math.sqrt(float(grid.integral(raw(grid.nodes) ** 2)))
    name = f"gauss(c={center:g},w={width:g})" if modulation is None else \
        f"{modulation}({freq:g}x)*gauss(c={center:g},w={width:g})"
    return TestFunction(lambda x: raw(x) / norm, support, 1.0, name)


def probe_set():
    """The fixed set of eight L2-normalized probes (version ``PROBE_SET_VERSION``).

    Gaussians ``exp(-((x - c)/w)**2)``, four plain and four modulated, cut
    off at ``TRUNCATION_WIDTHS`` widths where they are below ``1e-15``.
    """
    return [_probe(*row) for row in _PROBE_TABLE]


def _extent(family, probes):
    return max(family.coulomb.box_edge, *(p.radius for p in probes))


# work queue --------------------------------------------------------------------------------

def _run_cells(cells, work, workers):
    """Evaluate ``work(cell)`` for every cell; returns results keyed and sorted by cell."""
    if workers is None or workers <= 1:
        results = {cell: work(cell) for cell in cells}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {cell: pool.submit(work, cell) for cell in cells}
            results = {cell: fut.result() for cell, fut in futures.items()}
    return dict(sorted(results.items()))


def _guard(fn):
    """Wrap ``fn`` so library errors become recorded failures instead of aborting."""

    def wrapped(cell):
        try:
            return fn(cell), None
        except CoulombLimitsError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    return wrapped


# reports ---------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepReport:
    """Result table of a sweep.

    ``values`` maps ``(family, eps, parameter)`` to a float; ``eps = 0``
    marks limit-operator rows.  ``verdicts`` and ``slopes`` are per family.
    """

    kind: str
    families: tuple
    eps_grid: tuple
    parameters: tuple
    values: dict
    verdicts: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    warnings: tuple = ()
    failures: tuple = ()

    def __post_init__(self):
        if not self.eps_grid or not self.parameters or not self.families:
            raise InvalidParameterError("sweep grids must be nonempty")
        check_eps_grid(self.eps_grid)

    def series(self, family, parameter, value_kind=None):
        """Values over the eps grid for one family and parameter (NaN for failed cells)."""
        kind = value_kind or self._default_kind
        return np.array([self.values.get((family, e, parameter, kind), math.nan) for e in self.eps_grid])

    @property
    def _default_kind(self):
        return "gap" if self.kind == "convergence" else "T2"

    def rows(self):
        for (fam, eps, par, kind), value in sorted(self.values.items(), key=lambda kv: _sort_key(kv[0])):
            yield fam, _fmt(eps), _fmt_param(par), _fmt(value), kind

    def to_csv(self, stream=None):
        out = stream or io.StringIO()
        out.write(f"# build: {build_id()}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows():
            writer.writerow(row)
        return out.getvalue() if stream is None else None

    def summary(self):
        return {
            "build": build_id(),
            "sweep": self.kind,
            "families": list(self.families),
            "eps_grid": list(self.eps_grid),
            "parameters": [_fmt_param(p) for p in self.parameters],
            "slopes": self.slopes,
            "verdicts": self.verdicts,
            "details": self.details,
            "warnings": list(self.warnings),
            "failures": list(self.failures),
        }

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True, default=_json_default)


def _sort_key(key):
    fam, eps, par, kind = key
    par_key = (par.real, par.imag) if isinstance(par, complex) else (float(par), 0.0)
    return fam, -eps, par_key, kind


def _fmt(v):
    return repr(float(v))


def _fmt_param(p):
    if isinstance(p, complex):
        return f"{p.real!r}{p.imag:+}j"
    return repr(float(p))


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# rate analysis -----------------------------------------------------------------------------

def fit_slope(eps, gaps):
    """Least-squares slope of ``ln gap`` against ``ln eps``, dropping the largest eps.

    Returns ``None`` when fewer than two positive finite gaps remain.
    """
    eps, gaps = np.asarray(eps, dtype=float), np.asarray(gaps, dtype=float)
    order = np.argsort(eps)[::-1][1:]
    e, g = eps[order], gaps[order]
    ok = np.isfinite(g) & (g > 0)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(e[ok]), np.log(g[ok]), 1)[0])


def rate_bounded(eps, gaps, rate=0.25, slack=0.05):
    """Whether ``gap * eps**-rate`` shows no growth trend.

    The trend is the fitted slope of ``ln gap`` (largest eps dropped); the
    scaled gap is bounded when that slope is at least ``rate - slack``.
    Identically vanishing gaps are bounded.
    """
    gaps = np.asarray(gaps, dtype=float)
    if np.all(np.isfinite(gaps)) and np.all(gaps <= 1e-10):
        return True
    slope = fit_slope(eps, gaps)
    return slope is not None and slope >= rate - slack


# convergence sweep -------------------------------------------------------------------------

def _label(family):
    return family.name


def convergence_sweep(family, zeta=1j, eps_grid=DEFAULT_EPS_GRID, probes=None, limit=None,
                      workers=None):
    """Sampled resolvent gap ``max_f ||y_eps - u|| / ||f||`` per eps.

    ``limit`` defaults to :func:`classify_limit` of the family.  Each eps is
    one cell; a failing cell is recorded and the sweep continues.
    """
    family = load_family(family)
    zeta = check_offaxis(zeta)
    eps_grid = tuple(float(e) for e in check_eps_grid(eps_grid))
    probes = probe_set() if probes is None else list(probes)
    if not probes:
        raise InvalidParameterError("probe set is empty")
    limit = classify_limit(family) if limit is None else limit
    X = _extent(family, probes)
    limit_solver = LimitResolvent(limit, zeta, extent=X)
    name = _label(family)

    def cell(eps):
        solver = EpsResolvent(family, eps, zeta, extent=X)
        grid = solver.grid()
        out = []
        for f in probes:
            y = solver.solve(f, grid)
            u, _ = limit_solver.solve(f, grid)
            out.append(l2_distance(y, u) / function_l2_norm(f, grid))
        return out

    results = _run_cells(eps_grid, _guard(cell), workers)
    values, failures, per_probe = {}, [], {}
    for eps, (gaps, err) in results.items():
        if err is not None:
            failures.append(f"{name} eps={eps:g}: {err}")
            continue
        values[(name, eps, zeta, "gap")] = max(gaps)
        for i, g in enumerate(gaps):
            values[(name, eps, zeta, f"gap_probe{i}")] = g
        per_probe[eps] = gaps
    gaps = [values.get((name, e, zeta, "gap"), math.nan) for e in eps_grid]
    slope = fit_slope(eps_grid, gaps)
    bounded = rate_bounded(eps_grid, gaps)
    warnings = (limit.warning,) if limit.warning else ()
    return SweepReport(
        "convergence", (name,), eps_grid, (zeta,), values,
        verdicts={name: "PASS" if bounded else "FAIL"},
        slopes={name: slope},
        details={name: {"limit": limit.to_dict(), "probes": [p.name for p in probes],
                        "scaled_gaps": [g * e ** -0.25 for g, e in zip(gaps, eps_grid)]}},
        warnings=warnings, failures=tuple(failures))


# penetrability sweep -----------------------------------------------------------------------

def scattering_trend(t2_series, change=PENETRABLE_CHANGE):
    """Verdict from ``|T_eps|^2`` along a decreasing eps grid.

    ``penetrable`` when the last relative change is below ``change``,
    ``opaque`` when the last three values decrease with a larger final drop,
    ``undetermined`` otherwise.
    """
    t = np.asarray(t2_series, dtype=float)
    if t.size < 3 or not np.all(np.isfinite(t[-3:])):
        return "undetermined"
    last = abs(t[-1] - t[-2]) / max(abs(t[-2]), 1e-300)
    if last < change and t[-1] > change:
        return "penetrable"
    if t[-1] < t[-2] < t[-3]:
        return "opaque"
    return "undetermined"


def penetrability_sweep(families, k_grid, eps_grid=DEFAULT_EPS_GRID, workers=None):
    """``|T_eps(k)|^2`` per (family, eps, k) with limit values and verdicts.

    The verdict column combines :func:`classify_limit` (when the family is of
    the standard form) with the scattering trend at every ``k``.
    """
    fams = [load_family(f) for f in families]
    names = [_label(f) for f in fams]
    if len(set(names)) != len(names):
        raise InvalidParameterError(f"family names must be distinct: {names}")
    ks = tuple(check_wavenumber(k) for k in k_grid)
    eps_grid = tuple(float(e) for e in check_eps_grid(eps_grid))
    by_name = dict(zip(names, fams))
    cells = [(n, e, k) for n in names for e in eps_grid for k in ks]

    def cell(key):
        n, e, k = key
        T, _ = eps_scattering(by_name[n], e, k)
        return abs(T) ** 2

    results = _run_cells(cells, _guard(cell), workers)
    values, failures, warnings = {}, [], []
    for (n, e, k), (t2, err) in results.items():
        if err is not None:
            failures.append(f"{n} eps={e:g} k={k:g}: {err}")
        else:
            values[(n, e, k, "T2")] = t2
    verdicts, details = {}, {}
    for n, fam in by_name.items():
        trends = [scattering_trend([values.get((n, e, k, "T2"), math.nan) for e in eps_grid]) for k in ks]
        trend = trends[0] if len(set(trends)) == 1 else "undetermined"
        info = {"trend": trend, "trend_per_k": trends}
        if fam.shifted:
            verdict = trend
            info["classification"] = None
        else:
            try:
                limit = classify_limit(fam)
            except CoulombLimitsError as exc:
                failures.append(f"{n} classify: {exc}")
                verdicts[n] = trend
                details[n] = info
                continue
            verdict = "penetrable" if limit.penetrable else "opaque"
            info["classification"] = limit.to_dict()
            info["lneps_coefficient"] = _lneps_or_none(fam)
            for k in ks:
                values[(n, 0.0, k, "T2_limit")] = abs(limit_scattering(limit, k)[0]) ** 2
            if limit.warning:
                warnings.append(f"{n}: {limit.warning}")
            if trend != verdict:
                warnings.append(f"{n}: scattering trend '{trend}' differs from classification '{verdict}'")
            info["agree"] = trend == verdict
        verdicts[n] = verdict
        details[n] = info
    return SweepReport("penetrability", tuple(names), eps_grid, ks, values, verdicts=verdicts,
                       details=details, warnings=tuple(warnings), failures=tuple(failures))


def _lneps_or_none(family):
    from .potentials import lneps_coefficient
    try:
        return lneps_coefficient(family)
    except ContractViolation:
        return None


# inner expansion ---------------------------------------------------------------------------

def inner_expansion_check(family, eps, zeta=1j, f=None, limit=None):
    """``sup_{|t|<1} |y_eps(eps t) - u(-0) h0(t)|`` for a penetrable limit.

    ``f`` defaults to the first probe; ``u(-0)`` comes from the limit resolvent.
    """
    family = load_family(family)
    limit = classify_limit(family) if limit is None else limit
    if not limit.penetrable or limit.resonance is None:
        raise ContractViolation("inner expansion needs a resonant (penetrable) limit")
    f = probe_set()[0] if f is None else f
    X = max(family.coulomb.box_edge, getattr(f, "radius", 0.0))
    solver = EpsResolvent(family, eps, zeta, extent=X)
    grid = solver.grid()
    y = solver.solve(f, grid)
    _, boundary = LimitResolvent(limit, zeta, extent=X).solve(f, grid)
    x = grid.nodes
    inner = np.abs(x) < solver.eps
    t = x[inner] / solver.eps
    h0 = limit.resonance.h(t)
    return float(np.max(np.abs(y.y[inner] - boundary.u_minus0 * h0)))
