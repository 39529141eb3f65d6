"""Resolvent and scattering of the regularized operators at fixed eps.

For ``|x| < eps`` the equation is solved in ``t = x / eps``:

    -v'' + (eps**2 W(eps t) - eps**2 zeta) v = eps**2 f(eps t),

which removes the ``eps**-2`` stiffness of the inner profile; ``y' = v' / eps``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._green import GridSolution, integrated_residual, resolvent_grid
from ._validation import check_eps, check_offaxis, check_wavenumber
from .errors import NearEigenvalueError
from .odes import RTOL, ATOL, SolutionTrace, concatenate, integrate, principal_sqrt

WRONSKIAN_FLOOR = 1e-12


def _regions(family, eps, lo, hi):
    """Ordered ``(a, b, kind)`` pieces of ``[lo, hi]``; ``kind`` is 'outer' or 'inner'."""
    cuts = sorted({lo, hi, *[c for c in (-eps, eps) if lo < c < hi]})
    out = []
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        out.append((a, b, "inner" if abs(mid) < eps else "outer"))
    return out


def propagate(family, eps, zeta, x_from, x_to, init, f=None, rtol=RTOL, atol=ATOL):
    """Integrate ``-y'' + (W_eps - zeta) y = f`` from ``x_from`` to ``x_to``.

    ``init`` is ``(y, y')`` at ``x_from``.  The returned trace is in ``x``
    with increasing abscissae; inner pieces carry the rescaled dense output.
    """
    eps = check_eps(eps, family.coulomb.a)
    zeta = complex(zeta)
    lo, hi = sorted((float(x_from), float(x_to)))
    regions = _regions(family, eps, lo, hi)
    forward = x_to > x_from
    if not forward:
        regions = regions[::-1]
    outer = family.outer_potential(eps)
    inner = family.inner_potential(eps)
    outer_breaks = family.coulomb.breakpoints
    inner_breaks = [b for b in family.inner_breakpoints if -1.0 < b < 1.0]
    state = np.array(init, dtype=complex)
    pieces = []
    for a, b, kind in regions:
        start, stop = (a, b) if forward else (b, a)
        if kind == "outer":
            tr = integrate(outer, zeta, start, stop, state, f=f, breakpoints=outer_breaks,
                           rtol=rtol, atol=atol)
            state = _end_state(tr, stop)
        else:
            f_t = None if f is None else (lambda t: eps**2 * f(eps * t))
            v = integrate(inner, eps**2 * zeta, start / eps, stop / eps, (state[0], eps * state[1]),
                          f=f_t, breakpoints=inner_breaks, rtol=rtol, atol=atol)
            tr = v.scaled_abscissa(eps)
            state = _end_state(tr, stop)
        pieces.append(tr)
    return concatenate(pieces)


def _end_state(trace, x):
    i = 0 if abs(trace.grid[0] - x) < abs(trace.grid[-1] - x) else -1
    return np.array([trace.y[i], trace.dy[i]], dtype=complex)


def eps_grid_breakpoints(family, eps):
    inner = [eps * b for b in family.inner_breakpoints]
    return (*family.coulomb.breakpoints, *inner)


def full_potential(family, eps):
    """``W_eps`` as a vectorized callable (inner region included)."""
    outer = family.outer_potential(eps)
    inner = family.inner_potential(eps)

    def W(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        mask = np.abs(x) < eps
        out[~mask] = outer(x[~mask])
        out[mask] = np.asarray(inner(x[mask] / eps)) / eps**2
        return out

    return W


@dataclass(frozen=True, eq=False)
class EpsResolventResult:
    """``y_eps = (H_eps - zeta)^{-1} f`` on the full line."""

    eps: float
    zeta: complex
    trace: SolutionTrace
    residual_norm: float
    solution: GridSolution | None = None


class EpsResolvent:
    """Green's-function resolvent of the eps-family for fixed ``(eps, zeta)``.

    The two decaying solutions are built once for ``|x| <= extent``;
    ``solve`` then costs two running integrals per source.
    """

    def __init__(self, family, eps, zeta, extent=None):
        self.family = family
        self.eps = check_eps(eps, family.coulomb.a)
        self.zeta = check_offaxis(zeta)
        spec = family.coulomb
        self.extent = spec.box_edge if extent is None else max(float(extent), spec.box_edge)
        self.w = w = principal_sqrt(self.zeta)
        X = self.extent
        e = np.exp(1j * w * X)
        # g_right ~ exp(i w x) for x > X, g_left ~ exp(-i w x) for x < -X
        self.g_right = propagate(family, self.eps, self.zeta, X, -X, (e, 1j * w * e))
        self.g_left = propagate(family, self.eps, self.zeta, -X, X, (e, -1j * w * e))
        gl, dgl = self.g_left.y[-1], self.g_left.dy[-1]
        gr, dgr = self.g_right.y[-1], self.g_right.dy[-1]
        self.wronskian = complex(dgl * gr - gl * dgr)
        scale = abs(dgl * gr) + abs(gl * dgr)
        if abs(self.wronskian) < WRONSKIAN_FLOOR * scale:
            raise NearEigenvalueError(
                f"decaying solutions are dependent (|W| = {abs(self.wronskian):.3e}); zeta is an eigenvalue",
                module="eps_operator", location=float(X))

    def grid(self, **kw):
        return resolvent_grid(self.extent, eps_grid_breakpoints(self.family, self.eps), **kw)

    def solve(self, f, grid=None):
        grid = self.grid() if grid is None else grid
        x = grid.nodes
        gl, dgl = self.g_left(x)
        gr, dgr = self.g_right(x)
        F = np.asarray(f(x), dtype=complex)
        I_l, I_l_edges = grid.cumulative(gl * F)
        I_r, I_r_edges = grid.reverse_cumulative(gr * F)
        wr = self.wronskian
        y = (gr * I_l + gl * I_r) / wr
        dy = (dgr * I_l + dgl * I_r) / wr
        ends = (complex(self.g_left.y[0] * I_r_edges[0] / wr), complex(self.g_right.y[-1] * I_l_edges[-1] / wr))
        return GridSolution(grid, y, dy, ends, self.w)

    def residual(self, sol, f):
        """Largest panel-local integrated residual (see :func:`integrated_residual`).

        Inside ``|x| < eps`` residuals are multiplied by ``eps``, which
        measures ``v' = eps y'`` of the rescaled inner equation.
        """
        x = sol.grid.nodes
        scale = np.where(np.abs(x) < self.eps, self.eps, 1.0)
        r = integrated_residual(sol.grid, sol.y, sol.dy, full_potential(self.family, self.eps),
                                self.zeta, f, scale)
        return float(np.max(r))


def apply_eps_resolvent(family, eps, zeta, f, extent=None):
    """``(H_eps - zeta)^{-1} f`` with its residual self-check."""
    support = getattr(f, "support", None)
    radius = family.coulomb.box_edge if support is None else max(abs(support[0]), abs(support[1]))
    solver = EpsResolvent(family, eps, zeta, extent=max(radius, extent or 0.0))
    sol = solver.solve(f)
    trace = sol.to_trace(full_potential(family, solver.eps), solver.zeta, f)
    return EpsResolventResult(solver.eps, solver.zeta, trace, solver.residual(sol, f), sol)


# scattering ---------------------------------------------------------------------------

def eps_scattering(family, eps, k):
    """``(T, R)`` at energy ``k**2`` for left incidence."""
    k = check_wavenumber(k)
    X = family.coulomb.box_edge
    e = np.exp(1j * k * X)
    tr = propagate(family, eps, k * k, X, -X, (e, 1j * k * e))
    y, dy = tr.y[0], tr.dy[0]
    x = -X
    A = (1j * k * y + dy) * np.exp(-1j * k * x) / (2j * k)
    B = (1j * k * y - dy) * np.exp(1j * k * x) / (2j * k)
    return complex(1.0 / A), complex(B / A)


def eps_transmission(family, eps, k):
    return eps_scattering(family, eps, k)[0]


def eps_transfer_matrix(family, eps, zeta, x_from=None, x_to=None):
    """Matrix mapping ``(y, y')`` at ``x_from`` to ``x_to`` (default: the support box)."""
    X = family.coulomb.box_edge
    x_from = -X if x_from is None else x_from
    x_to = X if x_to is None else x_to
    cols = []
    for init in ((1.0, 0.0), (0.0, 1.0)):
        tr = propagate(family, eps, zeta, x_from, x_to, init)
        cols.append(_end_state(tr, x_to))
    return np.array(cols).T
