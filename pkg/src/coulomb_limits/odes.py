"""Integration of ``-y'' + (W - zeta) y = f`` and the Coulomb origin basis.

Near a Coulomb point ``q/x`` every solution on ``(0, x0]`` is a combination
``u = A psi + B phi`` of

* ``phi``: regular solution, ``phi(0) = 0``, ``phi'(0) = 1``;
* ``psi``: ``psi(0) = 1`` and ``psi'(x) - q ln x -> 0``.

so that ``A = u(+0)`` and ``B = lim (u' - q u(+0) ln x)``.  Both are built from
Frobenius series and handed to the adaptive integrator at ``x0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidParameterError, SeriesConvergenceError, StiffnessError

RTOL = 1e-10
ATOL = 1e-12


def principal_sqrt(zeta):
    """Square root with ``Im w > 0``; on the cut ``[0, inf)`` returns ``w >= 0``."""
    w = complex(np.sqrt(complex(zeta)))
    if w.imag < 0 or (w.imag == 0 and w.real < 0):
        w = -w
    return w


# dense output -------------------------------------------------------------------

def _quintic_hermite_matrix():
    # rows: p(0), p'(0), p''(0), p(1), p'(1), p''(1) applied to monomials s^k
    m = np.zeros((6, 6))
    for k in range(6):
        m[0, k] = 1.0 if k == 0 else 0.0
        m[1, k] = 1.0 if k == 1 else 0.0
        m[2, k] = 2.0 if k == 2 else 0.0
        m[3, k] = 1.0
        m[4, k] = k
        m[5, k] = k * (k - 1)
    return np.linalg.inv(m)


_HERMITE = _quintic_hermite_matrix()


@dataclass(frozen=True)
class _Dense:
    """Continuous extension on ``[lo, hi]``: ``fn(x) -> (y, y')``."""

    lo: float
    hi: float
    fn: object

    def mirrored(self):
        fn = self.fn
        return _Dense(-self.hi, -self.lo, lambda x: _neg_deriv(fn(-x)))

    def scaled(self, scale):
        fn = self.fn
        return _Dense(self.lo * scale, self.hi * scale,
                      lambda x: _div_deriv(fn(x / scale), scale))


def _neg_deriv(pair):
    return pair[0], -pair[1]


def _div_deriv(pair, scale):
    return pair[0], pair[1] / scale


def _ode_dense(sol):
    return lambda x: tuple(sol(x))


@dataclass(frozen=True, eq=False)
class SolutionTrace:
    """Sampled solution of a second-order linear ODE.

    ``grid`` is strictly increasing.  The second derivative may jump at
    potential breakpoints, so one-sided values are kept.  Traces produced by
    :func:`integrate` also carry the integrator's continuous extension
    (``dense``); otherwise evaluation falls back to quintic Hermite
    interpolation of ``(y, y', y'')``.
    """

    grid: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    d2y_left: np.ndarray
    d2y_right: np.ndarray
    side: str = "full"
    dense: tuple = ()

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
            raise InvalidParameterError("trace grid must be strictly increasing with >= 2 nodes")
        for name in ("y", "dy", "d2y_left", "d2y_right"):
            arr = np.asarray(getattr(self, name))
            if arr.shape[0] != g.size or not np.all(np.isfinite(arr)):
                raise InvalidParameterError(f"trace field {name} has bad shape or non-finite values")

    @property
    def span(self):
        return float(self.grid[0]), float(self.grid[-1])

    def __call__(self, x):
        """Return ``(y(x), y'(x))`` at the points ``x``."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.span
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise InvalidParameterError(f"evaluation outside trace span [{lo}, {hi}]")
        if not self.dense:
            return self.hermite(x)
        flat = np.clip(x.ravel(), lo, hi)
        y = np.empty(flat.shape, dtype=complex)
        dy = np.empty(flat.shape, dtype=complex)
        done = np.zeros(flat.shape, dtype=bool)
        for seg in self.dense:
            mask = ~done & (flat >= seg.lo) & (flat <= seg.hi)
            if np.any(mask):
                yv, dv = seg.fn(flat[mask])
                y[mask], dy[mask] = yv, dv
                done |= mask
        if not np.all(done):
            hy, hd = self.hermite(flat[~done])
            y[~done], dy[~done] = hy, hd
        return y.reshape(x.shape), dy.reshape(x.shape)

    def hermite(self, x):
        """Piecewise quintic Hermite interpolation of the sampled data."""
        x = np.asarray(x, dtype=float)
        g = self.grid
        i = np.clip(np.searchsorted(g, x, side="right") - 1, 0, g.size - 2)
        h = g[i + 1] - g[i]
        s = (x - g[i]) / h
        data = np.stack([
            self.y[i], h * self.dy[i], h * h * self.d2y_right[i],
            self.y[i + 1], h * self.dy[i + 1], h * h * self.d2y_left[i + 1],
        ])
        coef = (_HERMITE @ data.reshape(6, -1)).reshape(data.shape)
        powers = np.stack([s**k for k in range(6)])
        dpowers = np.stack([k * s ** (k - 1) if k else np.zeros_like(s) for k in range(6)])
        return np.sum(coef * powers, axis=0), np.sum(coef * dpowers, axis=0) / h

    def mirrored(self, side=None):
        """Trace of ``x -> y(-x)``."""
        return SolutionTrace(
            grid=-self.grid[::-1],
            y=self.y[::-1],
            dy=-self.dy[::-1],
            d2y_left=self.d2y_right[::-1],
            d2y_right=self.d2y_left[::-1],
            side=side or self.side,
            dense=tuple(seg.mirrored() for seg in self.dense),
        )

    def scaled_abscissa(self, scale):
        """Trace of ``x -> y(x/scale)`` (maps ``t = x/eps`` back to ``x``)."""
        return SolutionTrace(
            grid=self.grid * scale,
            y=self.y,
            dy=self.dy / scale,
            d2y_left=self.d2y_left / scale**2,
            d2y_right=self.d2y_right / scale**2,
            side=self.side,
            dense=tuple(seg.scaled(scale) for seg in self.dense),
        )


def concatenate(traces, side="full"):
    """Join traces that share end nodes into one increasing trace."""
    traces = sorted(traces, key=lambda tr: tr.grid[0])
    grid, y, dy, d2l, d2r, dense = [], [], [], [], [], []
    for k, tr in enumerate(traces):
        dense.extend(tr.dense)
        start = 0
        if k and grid:
            prev_end = grid[-1][-1]
            if abs(tr.grid[0] - prev_end) > 1e-12 * max(1.0, abs(prev_end)):
                raise InvalidParameterError("traces do not join")
            # shared node: keep left values, take right second derivative from the new piece
            d2r[-1] = d2r[-1].copy()
            d2r[-1][-1] = tr.d2y_right[0]
            start = 1
        grid.append(tr.grid[start:])
        y.append(tr.y[start:])
        dy.append(tr.dy[start:])
        d2l.append(tr.d2y_left[start:])
        d2r.append(tr.d2y_right[start:])
    return SolutionTrace(np.concatenate(grid), np.concatenate(y), np.concatenate(dy),
                         np.concatenate(d2l), np.concatenate(d2r), side=side, dense=tuple(dense))


# integration ---------------------------------------------------------------------

def _interior(lo, hi):
    return np.nextafter(lo, hi), np.nextafter(hi, lo)


def integrate(W, zeta, x_from, x_to, init, f=None, breakpoints=(), rtol=RTOL, atol=ATOL,
              max_step=np.inf, side="full"):
    """Integrate ``-y'' + (W(x) - zeta) y = f`` from ``x_from`` to ``x_to``.

    ``breakpoints`` inside the interval are forced step boundaries; on each
    smooth segment ``W`` and ``f`` are only sampled strictly inside, so their
    one-sided values are used.  Returns a :class:`SolutionTrace` ordered by
    increasing abscissa whichever way the integration ran.
    """
    zeta = complex(zeta)
    x_from, x_to = float(x_from), float(x_to)
    if x_from == x_to:
        raise InvalidParameterError("empty integration interval")
    lo, hi = min(x_from, x_to), max(x_from, x_to)
    cuts = sorted({lo, hi, *[float(b) for b in breakpoints if lo < b < hi]})
    segments = list(zip(cuts, cuts[1:]))
    if x_to < x_from:
        segments = [(b, a) for a, b in reversed(segments)]
    state = np.array(init, dtype=complex)
    pieces = []
    for a, b in segments:
        in_lo, in_hi = _interior(min(a, b), max(a, b))

        def clip(x, in_lo=in_lo, in_hi=in_hi):
            return in_lo if x < in_lo else (in_hi if x > in_hi else x)

        if f is None:
            def rhs(x, Y, clip=clip):
                return np.array([Y[1], (W(clip(x)) - zeta) * Y[0]])
        else:
            def rhs(x, Y, clip=clip):
                xc = clip(x)
                return np.array([Y[1], (W(xc) - zeta) * Y[0] - f(xc)])

        sol = solve_ivp(rhs, (a, b), state, method="DOP853", rtol=rtol, atol=atol,
                        max_step=max_step, dense_output=True)
        if sol.status != 0:
            raise StiffnessError(sol.message, module="odes", location=float(sol.t[-1]))
        t = sol.t
        Y = sol.y
        xs = np.clip(t, in_lo, in_hi)
        Wv = np.array([W(x) for x in xs], dtype=complex)
        fv = np.zeros_like(Wv) if f is None else np.array([f(x) for x in xs], dtype=complex)
        d2 = (Wv - zeta) * Y[0] - fv
        if b < a:
            t, Y, d2 = t[::-1], Y[:, ::-1], d2[::-1]
        pieces.append(SolutionTrace(t, Y[0].copy(), Y[1].copy(), d2.copy(), d2.copy(), side=side,
                                    dense=(_Dense(min(a, b), max(a, b), _ode_dense(sol.sol)),)))
        state = sol.y[:, -1]
    return concatenate(pieces, side=side)


# Frobenius basis at a Coulomb point ---------------------------------------------------

@dataclass(frozen=True)
class OriginPair:
    """Fundamental system ``(phi, psi)`` of ``y'' = (q/x - zeta) y`` on ``(0, x0]``."""

    q: float
    zeta: complex
    x0: float
    phi: complex
    dphi: complex
    psi: complex
    dpsi: complex
    order: int
    a: np.ndarray
    c: np.ndarray

    @property
    def wronskian(self):
        """``phi' psi - phi psi'``; equals 1 exactly in exact arithmetic."""
        return self.dphi * self.psi - self.phi * self.dpsi

    def evaluate(self, x):
        """``(phi, phi', psi, psi')`` at ``0 < x <= x0`` (arrays allowed)."""
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0) or np.any(x > self.x0 * (1 + 1e-12)):
            raise InvalidParameterError("series evaluation requires 0 < x <= x0")
        P = np.polynomial.polynomial
        n = np.arange(self.a.size)
        phi = P.polyval(x, self.a)
        dphi = P.polyval(x, (n * self.a)[1:])
        phi_over_x = P.polyval(x, self.a[1:])
        reg = P.polyval(x, self.c)
        dreg = P.polyval(x, (n * self.c)[1:])
        lx = np.log(x)
        psi = reg + self.q * phi * lx
        dpsi = dreg + self.q * (dphi * lx + phi_over_x)
        return phi, dphi, psi, dpsi

    def decompose(self, y, dy):
        """Coefficients ``(A, B)`` with ``y = A psi + B phi`` at ``x0``."""
        A = y * self.dphi - dy * self.phi
        B = self.psi * dy - self.dpsi * y
        return A, B

    def compose(self, A, B):
        return A * self.psi + B * self.phi, A * self.dpsi + B * self.dphi


def _series_coefficients(q, zeta, x0, max_order):
    a = [0.0 + 0j, 1.0 + 0j]
    c = [1.0 + 0j, complex(-q)]
    quiet = 0
    largest = 1.0
    n = 1
    while True:
        n += 1
        if n > max_order:
            raise SeriesConvergenceError(
                f"Frobenius series did not converge within {max_order} terms at x0={x0}; shrink x0",
                module="odes", location=x0)
        an = (q * a[n - 1] - zeta * a[n - 2]) / (n * (n - 1))
        cn = (q * c[n - 1] - zeta * c[n - 2] - q * (2 * n - 1) * an) / (n * (n - 1))
        a.append(an)
        c.append(cn)
        term = max(abs(an), abs(cn) * (1 + abs(math.log(x0)))) * x0**n
        largest = max(largest, abs(an) * x0 ** (n - 1), abs(cn) * x0**n)
        quiet = quiet + 1 if term < 1e-17 else 0
        if quiet >= 3:
            break
    if largest > 1e6:
        raise SeriesConvergenceError(
            f"series terms reach {largest:.3g} at x0={x0}: cancellation; shrink x0",
            module="odes", location=x0)
    return np.array(a), np.array(c)


def origin_pair(q, zeta, x0, order=None, max_order=400):
    """Build the log-corrected Frobenius pair at ``x0``.

    ``order`` fixes the number of retained terms; by default terms are added
    until three successive ones fall below ``1e-17`` relative.
    """
    q, zeta, x0 = float(q), complex(zeta), float(x0)
    if not x0 > 0:
        raise InvalidParameterError(f"x0 must be positive, got {x0}")
    if order is None:
        a, c = _series_coefficients(q, zeta, x0, max_order)
    else:
        a, c = _series_coefficients(q, zeta, x0, max(int(order), 2) + 3)
        a, c = a[: order + 1], c[: order + 1]
    pair = OriginPair(q, zeta, x0, 0, 0, 0, 0, a.size - 1, a, c)
    phi, dphi, psi, dpsi = (complex(v) for v in pair.evaluate(x0))
    return OriginPair(q, zeta, x0, phi, dphi, psi, dpsi, a.size - 1, a, c)


# decaying solutions ----------------------------------------------------------------------

def default_x0(spec):
    return 1e-3 * spec.a


def half_line_breakpoints(spec, side):
    """Breakpoints of the side potential expressed in ``s = |x| > 0``."""
    sign = 1.0 if side == "right" else -1.0
    return tuple(sorted(sign * b for b in spec.breakpoints if sign * b > 0))


def decaying_solution(spec, zeta, side, x0=None, extent=None, outgoing=False, rtol=RTOL, atol=ATOL):
    """Solution that equals ``exp(i w |x|)`` outside the support box.

    ``w`` is the principal root (``Im w > 0``).  The solution is integrated
    from ``|x| = extent`` (default: box edge) toward the origin and stops at
    ``|x| = x0``.  Real positive ``zeta`` is allowed only with
    ``outgoing=True`` (scattering convention).
    """
    zeta = complex(zeta)
    if zeta.imag == 0 and zeta.real > 0 and not outgoing:
        raise InvalidParameterError("no decaying solution for zeta on the positive real axis")
    x0 = default_x0(spec) if x0 is None else float(x0)
    L = spec.box_edge if extent is None else max(float(extent), spec.box_edge)
    trace = _half_line_from_edge(spec, zeta, side, L, x0, rtol=rtol, atol=atol)
    return trace if side == "right" else trace.mirrored(side="left")


def _half_line_from_edge(spec, zeta, side, L, x0, init=None, rtol=RTOL, atol=ATOL):
    """Integrate inward in ``s = |x|`` from ``L`` to ``x0``; trace is in ``s``."""
    P, _ = spec.half_line(side)
    w = principal_sqrt(zeta)
    if init is None:
        e = np.exp(1j * w * L)
        init = (e, 1j * w * e)
    return integrate(P, zeta, L, x0, init, breakpoints=half_line_breakpoints(spec, side),
                     rtol=rtol, atol=atol, side=side)
