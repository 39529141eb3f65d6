"""The limit operator: classification, resolvent and scattering.

The limit couples the two Coulomb half-lines at the origin either through
a point interaction

    u(+0) = theta u(-0),    theta b+(u) - b-(u) = mu u(-0),

with ``b±(u) = lim (u'(x) - q± u(±0) ln|x|)``, or not at all (Dirichlet
conditions on both sides).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._green import GridSolution, resolvent_grid
from ._validation import check_offaxis, check_tol, check_wavenumber
from .errors import ContractViolation, DegenerateCouplingError, InvalidParameterError
from .odes import (
    _half_line_from_edge,
    default_x0,
    half_line_breakpoints,
    integrate,
    origin_pair,
    principal_sqrt,
)
from .resonance import half_bound_state, resonance_functionals

log = logging.getLogger(__name__)

RESONANT = "ResonantPI"
DIRICHLET = "DirichletSum"
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class BoundaryData:
    """Values ``u(-0), u(+0)`` and regularized derivatives ``b-(u), b+(u)``."""

    u_minus0: complex
    u_plus0: complex
    b_minus: complex
    b_plus: complex

    def to_dict(self):
        return {k: [float(np.real(v)), float(np.imag(v))] for k, v in self.__dict__.items()}


@dataclass(frozen=True, eq=False)
class LimitOperator:
    """Classification tag plus the coupling data of the limit.

    ``theta`` and ``mu`` are meaningful only for ``kind == "ResonantPI"``.
    """

    kind: str
    spec: object
    theta: float = 0.0
    mu: float = 0.0
    matching_residual: float | None = None
    warning: str | None = None
    resonance: object = None

    def __post_init__(self):
        if self.kind not in (RESONANT, DIRICHLET):
            raise InvalidParameterError(f"unknown limit kind {self.kind!r}")
        if self.kind == RESONANT and self.theta == 0.0:
            raise InvalidParameterError("a point interaction needs theta != 0")

    @property
    def penetrable(self):
        return self.kind == RESONANT

    @classmethod
    def point_interaction(cls, spec, theta=1.0, mu=0.0):
        return cls(RESONANT, spec, float(theta), float(mu), 0.0)

    @classmethod
    def dirichlet(cls, spec):
        return cls(DIRICHLET, spec)

    def to_dict(self):
        doc = {"kind": self.kind, "verdict": "penetrable" if self.penetrable else "opaque",
               "q_minus": self.spec.q_minus, "q_plus": self.spec.q_plus}
        if self.penetrable:
            doc.update(theta=self.theta, mu=self.mu)
        doc["matching_residual"] = self.matching_residual
        doc["warning"] = self.warning
        return doc


def classify_limit(family, tol=1e-8, resonance_tol=None):
    """Decide which limit the family converges to.

    The matching residual is compared relative to ``1 + |theta^2 q+| + |q-|``.
    A non-resonant ``U`` or a residual above ``tol`` gives ``DirichletSum``;
    residuals between ``tol`` and ``10 tol`` (or a near-resonant ``U``) set
    ``warning``.
    """
    if family.shifted:
        raise ContractViolation("shifted families are classified by their scattering trend only")
    tol = check_tol(tol)
    spec = family.coulomb
    data = half_bound_state(family.U, resonance_tol)
    if not data.resonant:
        warning = None
        if data.near_resonant:
            warning = f"U is near-resonant (|h'(1)| = {abs(data.derivative_residual):.3e})"
        return LimitOperator(DIRICHLET, spec, warning=warning, resonance=data)
    data = resonance_functionals(data, family)
    scale = 1.0 + abs(data.theta**2 * spec.q_plus) + abs(spec.q_minus)
    rel = abs(data.matching_residual) / scale
    if rel <= tol:
        return LimitOperator(RESONANT, spec, data.theta, data.mu, data.matching_residual, resonance=data)
    warning = None
    if rel <= 10 * tol:
        warning = f"matching residual {rel:.3e} is within 10x of tol {tol:.1e}"
        log.warning(warning)
    return LimitOperator(DIRICHLET, spec, matching_residual=data.matching_residual,
                         warning=warning, resonance=data)


# boundary data -----------------------------------------------------------------------

def extract_boundary(spec, zeta, left, right, x0=None):
    """Boundary data of a solution known at ``x = -x0`` and ``x = +x0``.

    ``left`` and ``right`` are ``(u, u')`` pairs in the original variable.
    """
    x0 = default_x0(spec) if x0 is None else float(x0)
    _, q_r = spec.half_line("right")
    _, q_l = spec.half_line("left")
    A_r, B_r = origin_pair(q_r, zeta, x0).decompose(*right)
    A_l, B_l = origin_pair(q_l, zeta, x0).decompose(left[0], -left[1])
    return BoundaryData(complex(A_l), complex(A_r), complex(-B_l), complex(B_r))


# half-line bases ----------------------------------------------------------------------

class _HalfLine:
    """Decaying solution ``g`` and regular solution ``phi`` on one side, in ``s = |x|``.

    Below ``x0`` both come from the origin series; above, from integration.
    """

    def __init__(self, spec, zeta, side, x0, extent):
        P, q = spec.half_line(side)
        self.side, self.x0, self.extent = side, x0, extent
        self.pair = origin_pair(q, zeta, x0)
        self.g = _half_line_from_edge(spec, zeta, side, extent, x0)
        self.A, self.B = (complex(v) for v in self.pair.decompose(self.g.y[0], self.g.dy[0]))
        self.phi = integrate(P, zeta, x0, extent, (self.pair.phi, self.pair.dphi),
                             breakpoints=half_line_breakpoints(spec, side), side=side)

    def evaluate(self, s):
        """``(g, g', phi, phi')`` at ``0 < s <= extent``."""
        s = np.asarray(s, dtype=float)
        out = [np.empty(s.shape, dtype=complex) for _ in range(4)]
        near = s <= self.x0
        if np.any(near):
            phi, dphi, psi, dpsi = self.pair.evaluate(s[near])
            out[0][near] = self.A * psi + self.B * phi
            out[1][near] = self.A * dpsi + self.B * dphi
            out[2][near], out[3][near] = phi, dphi
        far = ~near
        if np.any(far):
            out[0][far], out[1][far] = self.g(s[far])
            out[2][far], out[3][far] = self.phi(s[far])
        return out

    def dirichlet_particular(self, grid, F):
        """Decaying solution with ``p(0) = 0`` of ``-p'' + (P - zeta) p = F``.

        Returns ``(p, p', p at the outer edge, b(p))``.
        """
        g, dg, phi, dphi = self.evaluate(grid.nodes)
        I_phi, I_phi_edges = grid.cumulative(phi * F)
        I_g, I_g_edges = grid.reverse_cumulative(g * F)
        wr = self.A
        p = (g * I_phi + phi * I_g) / wr
        dp = (dg * I_phi + dphi * I_g) / wr
        g_end = self.g.y[-1]
        return p, dp, g_end * I_phi_edges[-1] / wr, I_g_edges[0] / wr, g, dg


def _support_radius(f, default):
    support = getattr(f, "support", None)
    if support is None:
        return default
    return max(abs(support[0]), abs(support[1]))


def _solve_coupling(M, rhs):
    cond = np.linalg.cond(M)
    if not math.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateCouplingError(f"coupling system is singular (condition {cond:.3e})",
                                      module="limit_operator")
    return np.linalg.solve(M, rhs)


class LimitResolvent:
    """Reusable ``(H - zeta)^{-1}`` for one limit operator and one ``zeta``.

    Half-line bases are built once for ``|x| <= extent``; right-hand sides
    must vanish beyond ``extent``.
    """

    def __init__(self, limit, zeta, extent=None, x0=None):
        self.limit = limit
        self.zeta = check_offaxis(zeta)
        spec = limit.spec
        self.extent = spec.box_edge if extent is None else max(float(extent), spec.box_edge)
        self.x0 = default_x0(spec) if x0 is None else float(x0)
        self.w = principal_sqrt(self.zeta)
        self.right = _HalfLine(spec, self.zeta, "right", self.x0, self.extent)
        self.left = _HalfLine(spec, self.zeta, "left", self.x0, self.extent)

    def grid(self, breakpoints=(), **kw):
        return resolvent_grid(self.extent, (*self.limit.spec.breakpoints, *breakpoints), **kw)

    def solve(self, f, grid=None):
        """Return ``(GridSolution, BoundaryData)`` for the source ``f``."""
        grid = self.grid() if grid is None else grid
        lo, hi = grid.edges[0], grid.edges[-1]
        if not (np.isclose(lo, -self.extent) and np.isclose(hi, self.extent)):
            raise InvalidParameterError("grid must span [-extent, extent]")
        if _support_radius(f, 0.0) > self.extent * (1 + 1e-12):
            raise InvalidParameterError("source support exceeds the resolvent extent")
        g_right = grid.restrict(0.0, hi)
        g_left = grid.restrict(lo, 0.0).mirrored()
        F_r = np.asarray(f(g_right.nodes), dtype=complex)
        F_l = np.asarray(f(-g_left.nodes), dtype=complex)
        p_r, dp_r, end_r, P_r, g_r, dg_r = self.right.dirichlet_particular(g_right, F_r)
        p_l, dp_l, end_l, P_l, g_l, dg_l = self.left.dirichlet_particular(g_left, F_l)
        A_r, B_r, A_l, B_l = self.right.A, self.right.B, self.left.A, self.left.B
        if self.limit.kind == RESONANT:
            th, mu = self.limit.theta, self.limit.mu
            M = np.array([[A_r, -th * A_l], [th * B_r, B_l - mu * A_l]], dtype=complex)
            c_r, c_l = _solve_coupling(M, np.array([0.0, -th * P_r - P_l], dtype=complex))
        else:
            c_r = c_l = 0.0
        y_r, dy_r = p_r + c_r * g_r, dp_r + c_r * dg_r
        y_l, dy_l = p_l + c_l * g_l, dp_l + c_l * dg_l
        boundary = BoundaryData(complex(c_l * A_l), complex(c_r * A_r),
                                complex(-(P_l + c_l * B_l)), complex(P_r + c_r * B_r))
        ends = (complex(end_l + c_l * self.left.g.y[-1]), complex(end_r + c_r * self.right.g.y[-1]))
        # left nodes come back in increasing s; flip to increasing x
        y = np.concatenate([y_l[::-1], y_r])
        dy = np.concatenate([-dy_l[::-1], dy_r])
        return GridSolution(grid, y, dy, ends, self.w), boundary


def apply_resolvent(limit, zeta, f, grid=None, extent=None):
    """``u = (H - zeta)^{-1} f`` as a sampled trace plus its boundary data."""
    radius = _support_radius(f, limit.spec.box_edge)
    solver = LimitResolvent(limit, zeta, extent=max(radius, extent or 0.0))
    sol, boundary = solver.solve(f, grid)
    P = limit.spec
    return sol.to_trace(lambda x: P(x), zeta, f), boundary


# scattering ---------------------------------------------------------------------------

def limit_scattering(limit, k, x0=None):
    """Transmission and reflection ``(T, R)`` at energy ``k**2``.

    Incidence from the left: ``e^{ikx} + R e^{-ikx}`` left of the support,
    ``T e^{ikx}`` right of it.
    """
    k = check_wavenumber(k)
    spec = limit.spec
    zeta = complex(k * k)
    x0 = default_x0(spec) if x0 is None else float(x0)
    L = spec.box_edge
    _, q_l = spec.half_line("left")
    pair_l = origin_pair(q_l, zeta, x0)
    # left side in s = -x: e^{ikx} = e^{-iks} (incoming), e^{-ikx} = e^{iks}
    e_in, e_out = np.exp(-1j * k * L), np.exp(1j * k * L)
    inc = _half_line_from_edge(spec, zeta, "left", L, x0, init=(e_in, -1j * k * e_in))
    out = _half_line_from_edge(spec, zeta, "left", L, x0, init=(e_out, 1j * k * e_out))
    A_in, B_in = pair_l.decompose(inc.y[0], inc.dy[0])
    A_out, B_out = pair_l.decompose(out.y[0], out.dy[0])
    if limit.kind == DIRICHLET:
        return 0j, complex(-A_in / A_out)
    _, q_r = spec.half_line("right")
    g = _half_line_from_edge(spec, zeta, "right", L, x0)
    A_r, B_r = origin_pair(q_r, zeta, x0).decompose(g.y[0], g.dy[0])
    th, mu = limit.theta, limit.mu
    M = np.array([[A_r, -th * A_out], [th * B_r, B_out - mu * A_out]], dtype=complex)
    rhs = np.array([th * A_in, -B_in + mu * A_in], dtype=complex)
    T, R = _solve_coupling(M, rhs)
    return complex(T), complex(R)


def limit_transmission(limit, k, x0=None):
    """Transmission amplitude ``T(k)``; zero for the decoupled limit."""
    return limit_scattering(limit, k, x0)[0]
