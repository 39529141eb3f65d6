"""Grid-sampled resolvent solutions and their L2 distances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._grid import PanelGrid, build_grid
from .odes import SolutionTrace


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Solution sampled at the Gauss nodes of ``grid``.

    Outside the grid the solution is ``y_end * exp(i w (|x| - |x_end|))``;
    ``ends`` holds the values at the two outer edges.
    """

    grid: PanelGrid
    y: np.ndarray
    dy: np.ndarray
    ends: tuple
    w: complex

    def tail_norm2(self, ends=None):
        ends = self.ends if ends is None else ends
        return (abs(ends[0]) ** 2 + abs(ends[1]) ** 2) / (2.0 * self.w.imag)

    def l2_norm(self):
        return float(np.sqrt(self.grid.integral(np.abs(self.y) ** 2) + self.tail_norm2()))

    def to_trace(self, W, zeta, f, side="full"):
        """Hermite-interpolable trace on ``[edges[0], edges[-1]]``.

        ``y''`` comes from the ODE; at the two outer edges the exponential
        tail gives ``y' = -+ i w y``.
        """
        lo, hi = self.grid.edges[0], self.grid.edges[-1]
        x = np.concatenate([[lo], self.grid.nodes, [hi]])
        y = np.concatenate([[self.ends[0]], self.y, [self.ends[1]]])
        dy = np.concatenate([[-1j * self.w * self.ends[0]], self.dy, [1j * self.w * self.ends[1]]])
        # one-sided: evaluate the potential just inside the edges
        xin = x.copy()
        xin[0], xin[-1] = np.nextafter(lo, hi), np.nextafter(hi, lo)
        d2 = (W(xin) - zeta) * y - f(xin)
        return SolutionTrace(x, y, dy, d2, d2, side=side)


def l2_distance(a, b):
    """``||a - b||_2`` over the whole line (grids must coincide)."""
    if a.grid is not b.grid and not np.array_equal(a.grid.edges, b.grid.edges):
        raise ValueError("solutions live on different grids")
    diff_ends = (a.ends[0] - b.ends[0], a.ends[1] - b.ends[1])
    inner = a.grid.integral(np.abs(a.y - b.y) ** 2)
    return float(np.sqrt(inner + a.tail_norm2(diff_ends)))


def integrated_residual(grid, y, dy, W, zeta, f, scale=None):
    """Panel-local residuals of ``y' = dy`` and ``dy' = (W - zeta) y - f``.

    Both equations are checked in integrated form between the nodes of each
    panel, which avoids differentiating sampled data on tiny panels.
    ``scale`` (per node) multiplies the residuals.
    """
    x = grid.nodes
    n, m = grid.n_panels, grid.order
    rhs = (W(x) - zeta) * y - np.asarray(f(x), dtype=complex)
    r1 = (y - grid.panel_cumulative(dy)).reshape(n, m)
    r2 = (dy - grid.panel_cumulative(rhs)).reshape(n, m)
    r = np.maximum(np.abs(r1 - r1[:, :1]), np.abs(r2 - r2[:, :1])).ravel()
    if scale is not None:
        r = r * scale
    return r


def function_l2_norm(f, grid):
    return float(np.sqrt(grid.integral(np.abs(f(grid.nodes)) ** 2)))


def resolvent_grid(extent, breakpoints=(), **kw):
    """Full-line grid on ``[-extent, extent]`` graded toward the origin."""
    return build_grid(-extent, extent, breakpoints, **kw)
