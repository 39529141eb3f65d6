import json
import math

import numpy as np
import pytest

from coulomb_limits import (
    BUILTIN_NAMES,
    ContractViolation,
    CoulombSpec,
    InvalidParameterError,
    Piecewise,
    SpecError,
    TestFunction,
    UnknownBuiltinError,
    builtin_catalog,
    bump,
    eval_regularized,
    lneps_coefficient,
    load_family,
    pairing,
)
from coulomb_limits.potentials import lneps_slope

from oracles import brute_pairing


def test_q1_inner_value():
    assert eval_regularized(builtin_catalog("Q1"), 0.1, 0.05) == pytest.approx(10 * math.log(10), rel=1e-14)


def test_q1_outer_value():
    assert eval_regularized(builtin_catalog("Q1"), 0.1, 0.5) == pytest.approx(-2.0, rel=1e-15)


@pytest.mark.parametrize("eps", [0.3, 0.01, 1e-4])
def test_zero_inner_pieces(eps):
    fam = builtin_catalog("truncated", q_minus=0.0, q_plus=0.0)
    assert eval_regularized(fam, eps, eps / 2) == 0.0


@pytest.mark.parametrize("name", ["Q0", "Q1", "Q2", "Q3", "truncated"])
def test_outer_region_is_background_bitwise(name):
    fam = builtin_catalog(name)
    x = np.array([-0.9, -0.3, -0.02, 0.02, 0.3, 0.9, 1.5])
    for eps in (0.01, 0.001):
        np.testing.assert_array_equal(eval_regularized(fam, eps, x), fam.coulomb(x))


@pytest.mark.parametrize("name,qm,qp,kappa_int", [
    ("Q0", 1, -1, 0.0), ("Q1", 1, -1, -2.0), ("Q2", 1, 1, -2.0), ("Q3", 1, 1, 0.0),
    ("truncated", 1, 1, 0.0), ("truncated_even", 1, -1, 0.0),
])
def test_catalog_values(name, qm, qp, kappa_int):
    fam = builtin_catalog(name)
    assert (fam.coulomb.q_minus, fam.coulomb.q_plus) == (qm, qp)
    assert fam.kappa.integral() == pytest.approx(kappa_int, abs=1e-15)


def test_q3_kappa_is_minus_t():
    fam = builtin_catalog("Q3")
    t = np.linspace(-0.99, 0.99, 11)
    np.testing.assert_allclose(fam.kappa(t), -t, atol=1e-15)


def test_truncated_gamma_override():
    fam = builtin_catalog("truncated", q_minus=2.5, q_plus=2.5)
    assert fam.kappa.is_zero and fam.coulomb.q_plus == 2.5


def test_modified_is_shifted():
    fam = builtin_catalog("modified")
    assert fam.shifted
    assert eval_regularized(fam, 0.1, 0.5) == pytest.approx(-1 / 0.6)
    assert eval_regularized(fam, 0.1, -0.05) == pytest.approx(-1 / 0.15)
    with pytest.raises(ContractViolation):
        lneps_coefficient(fam)


def test_unknown_builtin():
    with pytest.raises(UnknownBuiltinError):
        builtin_catalog("Q7")


@pytest.mark.parametrize("eps", [0.0, -0.1, 1.0, 2.0, math.nan])
def test_eps_out_of_range(eps):
    with pytest.raises(InvalidParameterError):
        eval_regularized(builtin_catalog("Q1"), eps, 0.1)


@pytest.mark.parametrize("name,coef", [("Q1", 0.0), ("Q0", 2.0), ("Q3", 0.0), ("Q2", -2.0), ("zero", 0.0)])
def test_lneps_coefficient(name, coef):
    assert lneps_coefficient(builtin_catalog(name)) == coef


def test_pairing_matches_brute_force():
    fam = builtin_catalog("Q3")
    psi = bump(0.1, 0.9)
    eps = 0.01
    W = lambda x: eval_regularized(fam, eps, x)
    ref = brute_pairing(W, psi, psi.support, (-eps, 0.0, eps))
    assert pairing(fam, eps, psi) == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_pairing_linear_in_psi():
    fam = builtin_catalog("Q0")
    p1, p2 = bump(0.0, 1.0), bump(0.3, 0.5)
    combo = p1 + 2 * p2
    lhs = pairing(fam, 1e-3, combo)
    rhs = pairing(fam, 1e-3, p1) + 2 * pairing(fam, 1e-3, p2)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_pairing_disjoint_support_vanishes():
    psi = bump(1.5, 0.4)
    for name in BUILTIN_NAMES:
        assert pairing(builtin_catalog(name), 0.01, psi) == 0.0


def test_q1_pairing_converges():
    fam, psi = builtin_catalog("Q1"), bump(0.0, 1.0)
    diffs = [abs(pairing(fam, e, psi) - pairing(fam, e / 2, psi)) for e in (1e-2, 1e-3, 1e-4)]
    assert diffs[0] > diffs[1] > diffs[2] and diffs[2] < 1e-3


def test_q0_pairing_halving_step():
    fam, psi = builtin_catalog("Q0"), bump(0.0, 1.0)
    step = pairing(fam, 1e-4, psi) - pairing(fam, 2e-4, psi)
    assert step == pytest.approx(-2 * math.log(2), rel=1e-3)


@pytest.mark.parametrize("psi", [bump(0.0, 1.0), bump(0.2, 0.6, 2.0), bump(-0.1, 0.4, 0.5)],
                         ids=["unit", "shifted", "narrow"])
@pytest.mark.parametrize("name", ["Q0", "Q1", "Q2", "Q3"])
def test_slope_agrees_with_coefficient(name, psi):
    fam = builtin_catalog(name)
    slope, _ = lneps_slope(fam, psi)
    coef = lneps_coefficient(fam)
    assert abs(slope - coef * psi(0.0)) < 1e-2 * abs(psi(0.0))
    assert (coef == 0) == (abs(slope) < 1e-2 * abs(psi(0.0)))


def test_json_round_trip():
    fam = builtin_catalog("Q3", V=Piecewise.constant(0.5, -0.5, 0.5))
    doc = json.loads(json.dumps(fam.to_json()))
    back = load_family(doc)
    x = np.linspace(-0.9, 0.9, 37)
    np.testing.assert_array_equal(eval_regularized(back, 0.2, x), eval_regularized(fam, 0.2, x))


def test_json_builtin_override():
    fam = load_family('{"builtin": "Q1", "V": [{"lo": -1, "hi": 1, "kind": "const", "params": [0.25]}]}')
    assert fam.V.integral() == pytest.approx(0.5)
    assert fam.kappa.integral() == pytest.approx(-2.0)


@pytest.mark.parametrize("doc", [
    '{"q_minus": 1}',
    '{"q_minus": 1, "q_plus": 1, "kappa": [{"lo": -2, "hi": 1, "kind": "const", "params": [1]}]}',
    '{"q_minus": 1, "q_plus": 1, "kappa": [{"lo": -1, "hi": 1, "kind": "cubic", "params": [1]}]}',
    '{"q_minus": 1, "q_plus": 1, "tail": [{"lo": 0.5, "hi": 2, "kind": "const", "params": [1]}]}',
    "not json",
])
def test_malformed_spec(doc):
    with pytest.raises(SpecError):
        load_family(doc)


def test_tail_evaluation_and_box():
    tail = Piecewise.from_json([{"lo": 1.0, "hi": 2.0, "kind": "linear", "params": [1.0, -0.5]}])
    spec = CoulombSpec(1.0, 1.0, 1.0, tail)
    assert spec.box_edge == 2.0
    assert spec(1.5) == pytest.approx(1.0 - 0.75)
    assert spec(2.5) == 0.0
    assert spec(0.25) == 4.0 and spec(-0.25) == -4.0


def test_test_function_support():
    psi = TestFunction(lambda x: np.ones_like(x), (-0.5, 0.5))
    assert psi(0.7) == 0.0 and psi(0.2) == 1.0
    np.testing.assert_array_equal(psi(np.array([-1.0, 0.0, 1.0])), [0.0, 1.0, 0.0])
