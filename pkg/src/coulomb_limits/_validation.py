"""Input validation helpers used at public entry points."""
import math

import numpy as np

from .errors import InvalidParameterError


def check_eps(eps, a):
    eps = float(eps)
    if not (math.isfinite(eps) and 0.0 < eps < a):
        raise InvalidParameterError(f"eps must satisfy 0 < eps < a={a}, got {eps}")
    return eps


def check_offaxis(zeta):
    zeta = complex(zeta)
    if not (math.isfinite(zeta.real) and math.isfinite(zeta.imag)):
        raise InvalidParameterError(f"zeta must be finite, got {zeta}")
    if zeta.imag == 0.0:
        raise InvalidParameterError(f"zeta must be non-real, got {zeta}")
    return zeta


def check_wavenumber(k):
    k = float(k)
    if not (math.isfinite(k) and k > 0.0):
        raise InvalidParameterError(f"wave number must be positive, got {k}")
    return k


def check_tol(tol, name="tol"):
    tol = float(tol)
    if not (math.isfinite(tol) and tol > 0.0):
        raise InvalidParameterError(f"{name} must be positive, got {tol}")
    return tol


def check_eps_grid(eps_grid):
    grid = np.asarray(eps_grid, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidParameterError("eps grid is empty")
    if np.any(np.diff(grid) >= 0):
        raise InvalidParameterError("eps grid must be strictly decreasing")
    return grid
