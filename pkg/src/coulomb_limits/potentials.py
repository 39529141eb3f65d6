"""Coulomb-like background potentials and their shrinking regularizations.

A family is the data ``(Q, kappa, U, V)``.  For ``0 < eps < a`` it defines
the bounded potential

    W_eps(x) = Q(x)                                   for |x| > eps,
    W_eps(x) = (ln eps / eps) kappa(x/eps)
               + eps**-2 U(x/eps) + eps**-1 V(x/eps)  for |x| < eps,

where ``Q(x) = q_minus/x`` on ``(-a, 0)``, ``q_plus/x`` on ``(0, a)`` and a
compactly supported piecewise polynomial tail elsewhere.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from ._validation import check_eps
from .errors import (
    ContractViolation,
    InvalidParameterError,
    NumericalError,
    SpecError,
    UnknownBuiltinError,
)

PIECE_KINDS = ("const", "linear", "poly")


@dataclass(frozen=True)
class Piece:
    """Polynomial on the half-open interval ``[lo, hi)``.

    ``params`` are ascending power coefficients; ``const`` takes one value,
    ``linear`` two.
    """

    lo: float
    hi: float
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in PIECE_KINDS:
            raise SpecError(f"unknown piece kind {self.kind!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise SpecError(f"bad piece interval [{self.lo}, {self.hi})")
        n = len(self.params)
        if (self.kind == "const" and n != 1) or (self.kind == "linear" and n != 2) or n == 0:
            raise SpecError(f"{self.kind} piece got {n} parameters")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def coeffs(self):
        return np.asarray(self.params, dtype=float)

    def antiderivative(self, x):
        c = self.coeffs
        return sum(ci * x ** (i + 1) / (i + 1) for i, ci in enumerate(c))


@dataclass(frozen=True)
class Piecewise:
    """Piecewise polynomial function with explicit breakpoints, zero elsewhere."""

    pieces: tuple = ()

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lo))
        for left, right in zip(pieces, pieces[1:]):
            if right.lo < left.hi:
                raise SpecError(f"overlapping pieces at {right.lo}")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def constant(cls, value, lo=-1.0, hi=1.0):
        return cls((Piece(lo, hi, "const", (value,)),)) if value != 0 else cls()

    @classmethod
    def polynomial(cls, coeffs, lo=-1.0, hi=1.0):
        return cls((Piece(lo, hi, "poly", tuple(coeffs)),))

    def __call__(self, x):
        if np.ndim(x) == 0:
            xf = float(x)
            for p in self.pieces:
                if p.lo <= xf < p.hi:
                    c = p.params
                    acc = 0.0
                    for ci in reversed(c):
                        acc = acc * xf + ci
                    return acc
            return 0.0
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p in self.pieces:
            mask = (x >= p.lo) & (x < p.hi)
            if np.any(mask):
                out[mask] = np.polynomial.polynomial.polyval(x[mask], p.coeffs)
        return out

    @property
    def is_zero(self):
        return all(not np.any(p.coeffs) for p in self.pieces)

    @property
    def breakpoints(self):
        pts = set()
        for p in self.pieces:
            pts.update((p.lo, p.hi))
        return tuple(sorted(pts))

    @property
    def support(self):
        if not self.pieces:
            return None
        return self.pieces[0].lo, self.pieces[-1].hi

    def integral(self, lo=-math.inf, hi=math.inf):
        total = 0.0
        for p in self.pieces:
            a, b = max(p.lo, lo), min(p.hi, hi)
            if a < b:
                total += p.antiderivative(b) - p.antiderivative(a)
        return total

    def sup_norm(self, n=257):
        m = 0.0
        for p in self.pieces:
            xs = np.linspace(p.lo, p.hi, n)
            m = max(m, float(np.max(np.abs(np.polynomial.polynomial.polyval(xs, p.coeffs)))))
        return m

    def scaled(self, factor):
        return Piecewise(tuple(
            Piece(p.lo, p.hi, "poly", tuple(factor * c for c in p.params)) for p in self.pieces
        ))

    def to_json(self):
        return [{"lo": p.lo, "hi": p.hi, "kind": p.kind, "params": list(p.params)} for p in self.pieces]

    @classmethod
    def from_json(cls, items):
        if items is None:
            return cls()
        if not isinstance(items, list):
            raise SpecError("piecewise function must be a list of pieces")
        try:
            return cls(tuple(
                Piece(float(d["lo"]), float(d["hi"]), str(d["kind"]), tuple(d["params"])) for d in items
            ))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed piece: {exc}") from exc


@dataclass(frozen=True)
class CoulombSpec:
    """Background potential ``Q`` with a Coulomb window ``0 < |x| < a``."""

    q_minus: float
    q_plus: float
    a: float = 1.0
    tail: Piecewise = field(default_factory=Piecewise)

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise InvalidParameterError(f"singularity radius must be positive, got {self.a}")
        for p in self.tail.pieces:
            if p.hi > -self.a and p.lo < self.a:
                raise SpecError("tail pieces must lie in |x| >= a")

    @property
    def box_edge(self):
        """Half-width of the smallest box outside which ``Q`` vanishes."""
        edge = self.a
        for p in self.tail.pieces:
            edge = max(edge, abs(p.lo), abs(p.hi))
        return edge

    @property
    def breakpoints(self):
        return tuple(sorted({-self.a, self.a, *self.tail.breakpoints}))

    def __call__(self, x):
        if np.ndim(x) == 0:
            xf = float(x)
            if 0.0 < xf < self.a:
                return self.q_plus / xf
            if -self.a < xf < 0.0:
                return self.q_minus / xf
            if xf == 0.0:
                return math.nan
            return self.tail(xf)
        x = np.asarray(x, dtype=float)
        out = self.tail(x)
        right = (x > 0) & (x < self.a)
        left = (x < 0) & (x > -self.a)
        out[right] = self.q_plus / x[right]
        out[left] = self.q_minus / x[left]
        out[x == 0] = math.nan
        return out

    def half_line(self, side):
        """Potential and effective Coulomb coefficient on one side, in ``s = |x|``.

        The left side is mapped by ``x -> -x`` which turns ``q_minus / x`` into
        ``(-q_minus) / s``.
        """
        if side == "right":
            return (lambda s: self(s)), self.q_plus
        if side == "left":
            return (lambda s: self(-s) if np.ndim(s) == 0 else self(-np.asarray(s))), -self.q_minus
        raise InvalidParameterError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class RegularizedFamily:
    """An eps-family: background ``Q`` plus ``kappa``, ``U``, ``V`` on (-1, 1).

    ``shifted=True`` marks the modified Coulomb family ``q/(x +- eps)`` which
    is not of the ``(ln eps/eps) kappa`` form; only the eps-operator numerics
    and the harness accept it.
    """

    coulomb: CoulombSpec
    kappa: Piecewise = field(default_factory=Piecewise)
    U: Piecewise = field(default_factory=Piecewise)
    V: Piecewise = field(default_factory=Piecewise)
    name: str = "custom"
    shifted: bool = False

    def __post_init__(self):
        for label in ("kappa", "U", "V"):
            f = getattr(self, label)
            if f.pieces and (f.pieces[0].lo < -1.0 or f.pieces[-1].hi > 1.0):
                raise SpecError(f"{label} must be supported in [-1, 1]")
        if self.coulomb.a <= 0:
            raise InvalidParameterError("a must be positive")

    @property
    def inner_breakpoints(self):
        pts = {-1.0, 1.0}
        for f in (self.kappa, self.U, self.V):
            pts.update(b for b in f.breakpoints if -1.0 < b < 1.0)
        if self.shifted:
            pts.add(0.0)
        return tuple(sorted(pts))

    def outer_potential(self, eps):
        """Potential used for ``|x| > eps``."""
        if not self.shifted:
            return self.coulomb
        c = self.coulomb

        def shifted(x):
            base = c(x)
            if np.ndim(x) == 0:
                xf = float(x)
                if 0 < xf < c.a:
                    return c.q_plus / (xf + eps)
                if -c.a < xf < 0:
                    return c.q_minus / (xf - eps)
                return base
            x = np.asarray(x, dtype=float)
            right = (x > 0) & (x < c.a)
            left = (x < 0) & (x > -c.a)
            base[right] = c.q_plus / (x[right] + eps)
            base[left] = c.q_minus / (x[left] - eps)
            return base

        return shifted

    def inner_potential(self, eps):
        """``eps**2 * W_eps(eps*t)`` for ``|t| < 1`` (the rescaled inner potential)."""
        U, V, kappa = self.U, self.V, self.kappa
        if self.shifted:
            qm, qp = self.coulomb.q_minus, self.coulomb.q_plus

            def rescaled(t):
                core = np.where(np.asarray(t) >= 0, eps * qp / (np.abs(t) + 1.0),
                                -eps * qm / (np.abs(t) + 1.0))
                val = U(t) + eps * V(t) + core
                return float(val) if np.ndim(t) == 0 else val

            return rescaled
        log_coef = eps * math.log(eps)

        def rescaled(t):
            return U(t) + log_coef * kappa(t) + eps * V(t)

        return rescaled

    def to_json(self):
        c = self.coulomb
        doc = {
            "name": self.name,
            "q_minus": c.q_minus,
            "q_plus": c.q_plus,
            "a": c.a,
            "tail": c.tail.to_json(),
            "kappa": self.kappa.to_json(),
            "U": self.U.to_json(),
            "V": self.V.to_json(),
        }
        if self.shifted:
            doc["shifted"] = True
        return doc


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function ``psi`` for distributional pairings."""

    __test__ = False  # keep pytest from collecting the class

    func: Callable
    support: tuple
    holder_exponent: float = 1.0
    name: str = "psi"

    def __post_init__(self):
        lo, hi = self.support
        if not lo < hi:
            raise InvalidParameterError(f"bad support {self.support}")
        object.__setattr__(self, "support", (float(lo), float(hi)))

    @property
    def radius(self):
        return max(abs(self.support[0]), abs(self.support[1]))

    def __call__(self, x):
        lo, hi = self.support
        if np.ndim(x) == 0:
            return float(self.func(x)) if lo < x < hi else 0.0
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.result_type(float, self.func(np.array([0.5 * (lo + hi)]))))
        mask = (x > lo) & (x < hi)
        if np.any(mask):
            out[mask] = self.func(x[mask])
        return out

    def __add__(self, other):
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        return TestFunction(lambda x: self(x) + other(x), (lo, hi),
                            min(self.holder_exponent, other.holder_exponent),
                            f"{self.name}+{other.name}")

    def __mul__(self, c):
        return TestFunction(lambda x: c * self.func(x), self.support, self.holder_exponent,
                            f"{c}*{self.name}")

    __rmul__ = __mul__


def bump(center=0.0, radius=1.0, height=1.0):
    """Smooth bump ``height * exp(1 - 1/(1 - r**2))``; peak value ``height``."""

    def f(x):
        r2 = ((np.asarray(x, dtype=float) - center) / radius) ** 2
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = height * np.exp(1.0 - 1.0 / (1.0 - r2))
        return np.where(r2 < 1.0, val, 0.0)

    return TestFunction(f, (center - radius, center + radius), 1.0,
                        f"bump({center},{radius},{height})")


# builtin catalog --------------------------------------------------------------

_BUILTINS = {
    # name: (q_minus, q_plus, kappa, shifted)
    "Q0": (1.0, -1.0, Piecewise(), False),
    "Q1": (1.0, -1.0, Piecewise.constant(-1.0), False),
    "Q2": (1.0, 1.0, Piecewise.constant(-1.0), False),
    "Q3": (1.0, 1.0, Piecewise.polynomial((0.0, -1.0)), False),
    "truncated": (1.0, 1.0, Piecewise(), False),
    "truncated_even": (1.0, -1.0, Piecewise(), False),
    "modified": (1.0, -1.0, Piecewise(), True),
    "zero": (0.0, 0.0, Piecewise(), False),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_catalog(name, *, q_minus=None, q_plus=None, a=1.0, U=None, V=None):
    """Return a builtin family; Coulomb tails are cut off at ``|x| = a``.

    ``truncated`` is the odd ``gamma/x`` core with ``kappa = 0``; pass
    ``q_minus``/``q_plus`` to change gamma or make it even.  ``modified`` is
    ``-1/(|x| + eps)`` and carries ``shifted=True``.
    """
    try:
        qm, qp, kappa, shifted = _BUILTINS[name]
    except KeyError:
        raise UnknownBuiltinError(f"unknown builtin family {name!r}; known: {', '.join(BUILTIN_NAMES)}") from None
    qm = qm if q_minus is None else float(q_minus)
    qp = qp if q_plus is None else float(q_plus)
    return RegularizedFamily(
        CoulombSpec(qm, qp, a),
        kappa=kappa,
        U=U if U is not None else Piecewise(),
        V=V if V is not None else Piecewise(),
        name=name,
        shifted=shifted,
    )


def family_from_json(doc):
    """Build a family from a JSON document (dict) or a builtin reference.

    ``{"builtin": "Q1", "V": [...]}`` overrides fields of a builtin.
    """
    if isinstance(doc, str):
        return builtin_catalog(doc)
    if not isinstance(doc, dict):
        raise SpecError("family spec must be a JSON object or builtin name")
    if "builtin" in doc:
        base = builtin_catalog(doc["builtin"], q_minus=doc.get("q_minus"),
                               q_plus=doc.get("q_plus"), a=float(doc.get("a", 1.0)))
        return replace(
            base,
            kappa=Piecewise.from_json(doc["kappa"]) if "kappa" in doc else base.kappa,
            U=Piecewise.from_json(doc["U"]) if "U" in doc else base.U,
            V=Piecewise.from_json(doc["V"]) if "V" in doc else base.V,
            name=str(doc.get("name", base.name)),
        )
    try:
        coulomb = CoulombSpec(float(doc["q_minus"]), float(doc["q_plus"]), float(doc.get("a", 1.0)),
                              Piecewise.from_json(doc.get("tail")))
    except KeyError as exc:
        raise SpecError(f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from exc
    return RegularizedFamily(
        coulomb,
        kappa=Piecewise.from_json(doc.get("kappa")),
        U=Piecewise.from_json(doc.get("U")),
        V=Piecewise.from_json(doc.get("V")),
        name=str(doc.get("name", "custom")),
        shifted=bool(doc.get("shifted", False)),
    )


def load_family(source):
    """Load a family from a builtin name, a JSON path, or a JSON string."""
    if isinstance(source, RegularizedFamily):
        return source
    if isinstance(source, dict):
        return family_from_json(source)
    text = str(source)
    if text in _BUILTINS:
        return builtin_catalog(text)
    path = Path(text)
    if path.exists():
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"cannot parse family spec: {exc}") from exc
    return family_from_json(doc)


# evaluation -------------------------------------------------------------------

def eval_regularized(family, eps, x):
    """Evaluate ``W_eps`` at ``x`` (scalar or array)."""
    eps = check_eps(eps, family.coulomb.a)
    outer = family.outer_potential(eps)
    inner = family.inner_potential(eps)
    if np.ndim(x) == 0:
        xf = float(x)
        if abs(xf) < eps:
            return inner(xf / eps) / eps**2
        return outer(xf)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    mask = np.abs(x) < eps
    out[~mask] = outer(x[~mask])
    out[mask] = inner(x[mask] / eps) / eps**2
    return out


def lneps_coefficient(family):
    """Coefficient of ``psi(0) ln eps`` in the pairing ``<W_eps, psi>``."""
    if family.shifted:
        raise ContractViolation("the modified (shifted) family has no kappa regularizer")
    c = family.coulomb
    return family.kappa.integral() - c.q_plus + c.q_minus


def _quad(fun, lo, hi, rtol, label):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fun, lo, hi, epsrel=rtol, epsabs=1e-14, limit=400)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"pairing quadrature did not converge: {exc}",
                                 module="potentials", location=f"{label} [{lo:.3g}, {hi:.3g}]") from None
    return val


def pairing(family, eps, psi, rtol=1e-10):
    """Distributional pairing ``int W_eps(x) psi(x) dx``.

    Coulomb pieces are integrated in ``log|x|`` and the inner region in
    ``t = x/eps``, so the quadrature never sees the ``1/x`` scale directly.
    """
    eps = check_eps(eps, family.coulomb.a)
    c = family.coulomb
    lo_psi, hi_psi = psi.support
    total = 0.0

    # inner |x| < eps
    inner = family.inner_potential(eps)
    tpts = [t for t in family.inner_breakpoints]
    tlo, thi = max(-1.0, lo_psi / eps), min(1.0, hi_psi / eps)
    if tlo < thi:
        cuts = [tlo] + [t for t in tpts if tlo < t < thi] + [thi]
        for a_, b_ in zip(cuts, cuts[1:]):
            total += _quad(lambda t: inner(t) * psi(eps * t), a_, b_, rtol, "inner") / eps

    # Coulomb window eps < |x| < a
    outer = family.outer_potential(eps)
    for sign in (1.0, -1.0):
        lo_abs, hi_abs = eps, c.a
        if sign > 0:
            lo_abs, hi_abs = max(lo_abs, lo_psi), min(hi_abs, hi_psi)
        else:
            lo_abs, hi_abs = max(lo_abs, -hi_psi), min(hi_abs, -lo_psi)
        if lo_abs < hi_abs:
            def g(s, sign=sign):
                x = sign * math.exp(s)
                return outer(x) * psi(x) * abs(x)
            total += _quad(g, math.log(lo_abs), math.log(hi_abs), rtol, "coulomb")

    # tail
    for p in c.tail.pieces:
        a_, b_ = max(p.lo, lo_psi), min(p.hi, hi_psi)
        if a_ < b_:
            total += _quad(lambda x: c.tail(x) * psi(x), a_, b_, rtol, "tail")
    return total


def lneps_slope(family, psi, eps_grid=None):
    """Least-squares slope of ``pairing`` against ``ln eps``.

    Default grid is seven log-spaced points over ``10**-2 .. 10**-5``.
    Returns ``(slope, intercept)``.
    """
    if eps_grid is None:
        eps_grid = np.logspace(-2, -5, 7)
    eps_grid = np.asarray(eps_grid, dtype=float)
    vals = np.array([pairing(family, e, psi) for e in eps_grid])
    slope, intercept = np.polyfit(np.log(eps_grid), vals, 1)
    return float(slope), float(intercept)
