"""Zero-energy resonances of ``-h'' + U h = 0`` on (-1, 1).

A compactly supported ``U`` is resonant when the solution with
``h(-1) = 1, h'(-1) = 0`` also has ``h'(1) = 0``: it is then constant outside
(-1, 1) and bounded on the whole line.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ._grid import PanelGrid
from ._validation import check_tol
from .errors import ContractViolation, NumericalError
from .odes import RTOL, ATOL, SolutionTrace, integrate
from .potentials import Piecewise

log = logging.getLogger(__name__)

ALPHA_GRID_POINTS = 400


@dataclass(frozen=True, eq=False)
class ResonanceData:
    """Shooting solution and the functionals built from it.

    ``h0`` is real-valued on [-1, 1]; ``h_minus = h0(-1)`` is 1 unless the
    caller rescaled the state.  ``mu``, ``kappa_moment`` and
    ``matching_residual`` stay ``None`` until :func:`resonance_functionals`.
    """

    h0: SolutionTrace
    theta: float
    derivative_residual: float
    resonant: bool
    tol: float
    near_resonant: bool = False
    h_minus: float = 1.0
    breaks: tuple = ()
    mu: float | None = None
    kappa_moment: float | None = None
    matching_residual: float | None = None

    def h(self, t):
        return np.real(self.h0(t)[0])

    @property
    def max_abs_h(self):
        return float(np.max(np.abs(self.h0.y)))

    def to_dict(self):
        return {
            "theta": self.theta,
            "derivative_residual": self.derivative_residual,
            "resonant": self.resonant,
            "near_resonant": self.near_resonant,
            "tol": self.tol,
            "h_minus": self.h_minus,
            "max_abs_h": self.max_abs_h,
            "mu": self.mu,
            "kappa_moment": self.kappa_moment,
            "matching_residual": self.matching_residual,
        }


def _inner_breaks(*funcs):
    return sorted({b for f in funcs for b in f.breakpoints if -1.0 < b < 1.0})


def half_bound_state(U, tol=None, scale=1.0):
    """Shoot ``-h'' + U h = 0`` from ``t = -1`` with ``h = scale, h' = 0``.

    The default tolerance is ``1e-9 * (1 + max|h|)``.  A residual within ten
    times the tolerance but above it sets ``near_resonant``.
    """
    trace = integrate(U, 0.0, -1.0, 1.0, (scale, 0.0), breakpoints=_inner_breaks(U),
                      max_step=0.05)
    trace = SolutionTrace(trace.grid, trace.y.real.astype(complex), trace.dy.real.astype(complex),
                          trace.d2y_left.real.astype(complex), trace.d2y_right.real.astype(complex),
                          side="inner", dense=trace.dense)
    h_max = float(np.max(np.abs(trace.y)))
    if tol is None:
        tol = 1e-9 * (1.0 + h_max / abs(scale))
    tol = check_tol(tol)
    residual = float(trace.dy[-1].real) / scale
    resonant = abs(residual) <= tol
    near = (not resonant) and abs(residual) <= 10 * tol
    theta = float(trace.y[-1].real) / scale
    if resonant and theta == 0.0:
        raise NumericalError("resonant shooting solution vanishes at t = 1", module="resonance")
    if near:
        log.warning("U is near-resonant: |h'(1)| = %.3e, tol = %.3e", residual, tol)
    return ResonanceData(trace, theta, residual, resonant, tol, near_resonant=near, h_minus=float(scale),
                         breaks=tuple(_inner_breaks(U)))


def _moment(data, weight):
    if weight.is_zero:
        return 0.0
    breaks = sorted({-1.0, 1.0, *_inner_breaks(weight), *data.breaks})
    # both factors are smooth between breaks: fixed Gauss panels are exact to roundoff
    edges = np.unique(np.concatenate([np.linspace(a, b, 17) for a, b in zip(breaks, breaks[1:])]))
    grid = PanelGrid(edges)
    t = grid.nodes
    return float(grid.integral(weight(t) * data.h(t) ** 2)) / data.h_minus**2


def resonance_functionals(data, family):
    """Fill in ``mu``, ``kappa_moment`` and ``matching_residual``.

    Moments are divided by ``h(-1)**2`` so an unnormalized half-bound state
    gives the same values as the normalized one.
    """
    if not data.resonant:
        raise ContractViolation("resonance functionals need a resonant potential")
    mu = _moment(data, family.V)
    kappa_moment = _moment(data, family.kappa)
    c = family.coulomb
    residual = data.theta**2 * c.q_plus - c.q_minus - kappa_moment
    return replace(data, mu=mu, kappa_moment=kappa_moment, matching_residual=residual)


def _batched_residuals(U, alphas):
    n = alphas.size
    breaks = [-1.0, *_inner_breaks(U), 1.0]
    state = np.concatenate([np.ones(n), np.zeros(n)])
    for a, b in zip(breaks, breaks[1:]):
        lo, hi = np.nextafter(a, b), np.nextafter(b, a)

        def rhs(t, Y, lo=lo, hi=hi):
            u = U(min(max(t, lo), hi))
            return np.concatenate([Y[n:], alphas * u * Y[:n]])

        sol = solve_ivp(rhs, (a, b), state, method="DOP853", rtol=RTOL, atol=ATOL)
        if sol.status != 0:
            raise NumericalError(sol.message, module="resonance", location=float(sol.t[-1]))
        state = sol.y[:, -1]
    return state[n:]


def _residual(U, alpha):
    scaled = U.scaled(alpha)
    trace = integrate(scaled, 0.0, -1.0, 1.0, (1.0, 0.0), breakpoints=_inner_breaks(U))
    return float(trace.dy[-1].real)


def find_resonant_couplings(U, alpha_range, tol=1e-12, n_grid=ALPHA_GRID_POINTS):
    """Couplings ``alpha`` in ``alpha_range`` for which ``alpha * U`` is resonant.

    Sign changes of ``h'(1)`` on a uniform ``n_grid`` scan are refined with
    Brent's bracketing method.  ``alpha = 0`` (the trivial potential) is
    never reported.
    """
    if U.is_zero:
        raise ContractViolation("U is identically zero: every coupling is trivially resonant")
    lo, hi = (float(v) for v in alpha_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ContractViolation(f"bad coupling range {alpha_range}")
    alphas = np.linspace(lo, hi, n_grid)
    res = _batched_residuals(U, alphas)
    roots = []
    for i in range(n_grid - 1):
        a0, a1 = alphas[i], alphas[i + 1]
        r0, r1 = res[i], res[i + 1]
        if r0 == 0.0 and a0 != 0.0:
            roots.append(float(a0))
        elif r0 * r1 < 0:
            roots.append(brentq(lambda al: _residual(U, al), a0, a1, xtol=tol, rtol=4 * np.finfo(float).eps))
    if res[-1] == 0.0 and alphas[-1] != 0.0:
        roots.append(float(alphas[-1]))
    return [r for r in roots if r != 0.0]


def square_well(depth, lo=-1.0, hi=1.0):
    """``U = depth`` on ``(lo, hi)``."""
    return Piecewise.constant(depth, lo, hi)
