"""scikit-learn style wrappers around the scattering solvers.

``fit`` takes a family (builtin name, JSON document or object) and
``predict`` maps wave numbers to transmission probabilities, so the models
compose with ``get_params``/``set_params`` and grid-search utilities.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .eps_operator import eps_scattering
from .limit_operator import classify_limit, limit_scattering
from .potentials import load_family


def _wavenumbers(k):
    return np.atleast_1d(np.asarray(k, dtype=float)).ravel()


class LimitScatteringModel(BaseEstimator):
    """Scattering by the limit operator of a family.

    Parameters
    ----------
    tol : float
        Relative matching tolerance passed to :func:`classify_limit`.
    resonance_tol : float or None
        Shooting tolerance for the half-bound state.
    """

    def __init__(self, tol=1e-8, resonance_tol=None):
        self.tol = tol
        self.resonance_tol = resonance_tol

    def fit(self, family, y=None):
        self.family_ = load_family(family)
        self.limit_ = classify_limit(self.family_, tol=self.tol, resonance_tol=self.resonance_tol)
        return self

    def _check(self):
        if not hasattr(self, "limit_"):
            raise NotFittedError("call fit(family) first")

    def transform(self, k):
        """Complex ``(T, R)`` per wave number, shape ``(n, 2)``."""
        self._check()
        return np.array([limit_scattering(self.limit_, kk) for kk in _wavenumbers(k)])

    def predict(self, k):
        """Transmission probability ``|T(k)|^2``."""
        return np.abs(self.transform(k)[:, 0]) ** 2


class EpsScatteringModel(BaseEstimator):
    """Scattering by the regularized operator at a fixed ``eps``."""

    def __init__(self, eps=1e-2):
        self.eps = eps

    def fit(self, family, y=None):
        self.family_ = load_family(family)
        return self

    def transform(self, k):
        if not hasattr(self, "family_"):
            raise NotFittedError("call fit(family) first")
        return np.array([eps_scattering(self.family_, self.eps, kk) for kk in _wavenumbers(k)])

    def predict(self, k):
        return np.abs(self.transform(k)[:, 0]) ** 2
