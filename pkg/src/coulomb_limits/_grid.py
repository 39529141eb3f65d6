"""Composite Gauss-Legendre panels with cumulative integration.

Green's-function assembly needs running integrals ``int_lo^x g f`` at every
quadrature node; each panel carries the spectral integration matrix of its
Lagrange basis, so running integrals are exact for polynomials of degree
``order - 1`` on every panel.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as leg

ORDER = 16


@lru_cache(maxsize=8)
def _reference(order):
    xi, wi = leg.leggauss(order)
    V = leg.legvander(xi, order - 1)
    C = np.linalg.inv(V)
    eye = np.eye(order)
    Vint = np.stack([leg.legval(xi, leg.legint(eye[k], lbnd=-1)) for k in range(order)], axis=1)
    Vder = np.stack([leg.legval(xi, leg.legder(eye[k])) for k in range(order)], axis=1)
    return xi, wi, Vint @ C, Vder @ C


class PanelGrid:
    """Panels ``[edges[i], edges[i+1]]`` with ``order`` Gauss nodes each."""

    def __init__(self, edges, order=ORDER):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("panel edges must be strictly increasing")
        self.edges = edges
        self.order = order
        xi, wi, self._S, self._D = _reference(order)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        self._half = half
        self.nodes_2d = mid[:, None] + half[:, None] * xi[None, :]
        self.weights_2d = half[:, None] * wi[None, :]
        self.nodes = self.nodes_2d.ravel()
        self.weights = self.weights_2d.ravel()

    @property
    def n_panels(self):
        return self.edges.size - 1

    def integral(self, values):
        return np.sum(self.weights * values)

    def cumulative(self, values):
        """Running integral from ``edges[0]``; returns (at nodes, at edges)."""
        v = np.asarray(values).reshape(self.n_panels, self.order)
        panel_totals = np.sum(self.weights_2d * v, axis=1)
        at_edges = np.concatenate([[0.0], np.cumsum(panel_totals)])
        inside = (v @ self._S.T) * self._half[:, None]
        return (at_edges[:-1, None] + inside).ravel(), at_edges

    def reverse_cumulative(self, values):
        """Running integral up to ``edges[-1]``; returns (at nodes, at edges)."""
        at_nodes, at_edges = self.cumulative(values)
        total = at_edges[-1]
        return total - at_nodes, total - at_edges

    def panel_cumulative(self, values):
        """Running integral from each panel's left edge, at that panel's nodes."""
        v = np.asarray(values).reshape(self.n_panels, self.order)
        return ((v @ self._S.T) * self._half[:, None]).ravel()

    def derivative(self, values):
        """Spectral derivative panel by panel."""
        v = np.asarray(values).reshape(self.n_panels, self.order)
        return ((v @ self._D.T) / self._half[:, None]).ravel()

    def restrict(self, lo, hi):
        """Sub-grid of the panels inside ``[lo, hi]`` (both must be edges)."""
        i0 = int(np.searchsorted(self.edges, lo))
        i1 = int(np.searchsorted(self.edges, hi))
        if not (np.isclose(self.edges[i0], lo) and np.isclose(self.edges[i1], hi)):
            raise ValueError("restriction bounds must be panel edges")
        return PanelGrid(self.edges[i0:i1 + 1], self.order)

    def mirrored(self):
        return PanelGrid(-self.edges[::-1], self.order)


def graded_edges(lo, hi, breakpoints=(), h_max=0.05, r_min=1e-12, ratio=2.0):
    """Edges on ``[lo, hi]`` graded geometrically toward the origin.

    Breakpoints are kept exactly; extra edges closer than ``1e-9`` relative to
    a kept edge are dropped.
    """
    forced = {float(lo), float(hi)} | {float(b) for b in breakpoints if lo < b < hi}
    if lo < 0.0 < hi:
        forced.add(0.0)
    extra = set()
    r = r_min
    while r < max(abs(lo), abs(hi)):
        for v in (r, -r):
            if lo < v < hi:
                extra.add(v)
        r *= ratio
    n = int(np.ceil((hi - lo) / h_max))
    extra.update(np.linspace(lo, hi, n + 1)[1:-1].tolist())
    forced_sorted = np.array(sorted(forced))
    keep = list(forced_sorted)
    for v in extra:
        j = np.searchsorted(forced_sorted, v)
        near = [forced_sorted[k] for k in (j - 1, j) if 0 <= k < forced_sorted.size]
        if all(abs(v - e) > 1e-9 * max(abs(v), abs(e), 1e-300) + 1e-300 for e in near):
            keep.append(v)
    keep = np.unique(np.array(keep))
    # drop extras that crowd each other (uniform and geometric sequences can nearly coincide)
    out = [keep[0]]
    forced_set = set(forced_sorted.tolist())
    for v in keep[1:]:
        gap = v - out[-1]
        scale = max(abs(v), abs(out[-1]))
        if gap <= 1e-3 * scale and v not in forced_set:
            continue
        if gap <= 1e-3 * scale and out[-1] not in forced_set:
            out[-1] = v
            continue
        out.append(v)
    return np.array(out)


def build_grid(lo, hi, breakpoints=(), order=ORDER, **kw):
    return PanelGrid(graded_edges(lo, hi, breakpoints, **kw), order)
