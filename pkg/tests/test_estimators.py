import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from coulomb_limits import builtin_catalog, classify_limit, eps_scattering, limit_scattering
from coulomb_limits.estimators import EpsScatteringModel, LimitScatteringModel


def test_params_roundtrip():
    m = LimitScatteringModel(tol=1e-6)
    assert m.get_params() == {"tol": 1e-6, "resonance_tol": None}
    assert clone(m).set_params(tol=1e-7).tol == 1e-7


def test_limit_model_matches_function():
    m = LimitScatteringModel().fit("Q3")
    lim = classify_limit(builtin_catalog("Q3"))
    ks = [0.5, 2.0]
    assert np.allclose(m.predict(ks), [abs(limit_scattering(lim, k)[0]) ** 2 for k in ks])
    assert m.transform(1.0).shape == (1, 2)


def test_eps_model_matches_function():
    m = EpsScatteringModel(eps=1e-2).fit(builtin_catalog("Q0"))
    T, _ = eps_scattering(builtin_catalog("Q0"), 1e-2, 1.0)
    assert m.predict(1.0)[0] == pytest.approx(abs(T) ** 2)


@pytest.mark.parametrize("model", [LimitScatteringModel(), EpsScatteringModel()])
def test_unfitted(model):
    with pytest.raises(NotFittedError):
        model.predict([1.0])
