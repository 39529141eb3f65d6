import math

import numpy as np
import pytest

from coulomb_limits import (
    CoulombSpec,
    EpsResolvent,
    InvalidParameterError,
    LimitResolvent,
    Piecewise,
    RegularizedFamily,
    apply_eps_resolvent,
    builtin_catalog,
    bump,
    classify_limit,
    eps_scattering,
    eps_transfer_matrix,
    eps_transmission,
)
from coulomb_limits._green import l2_distance
from coulomb_limits.eps_operator import propagate

from oracles import delta_transmission, free_resolvent


def test_zero_family_is_free():
    f = bump(0.3, 0.6)
    res = apply_eps_resolvent(builtin_catalog("zero"), 0.05, 1j, f)
    x = np.array([-1.0, -0.2, 0.05, 0.31, 0.8])
    assert np.max(np.abs(res.trace(x)[0] - free_resolvent(f, f.support, 1j, x))) < 1e-8


@pytest.mark.parametrize("name", ["Q0", "Q1", "Q2", "Q3", "modified"])
@pytest.mark.parametrize("eps", [0.1, 1e-3])
def test_residual_self_check(name, eps):
    f = bump(0.1, 0.8, 2.0)
    res = apply_eps_resolvent(builtin_catalog(name), eps, 1 + 1j, f)
    assert res.residual_norm < 1e-6 * 2.0


def test_residual_with_well(well_family):
    f = bump(-0.2, 0.9)
    res = apply_eps_resolvent(well_family, 1e-2, 1j, f)
    assert res.residual_norm < 1e-6


@pytest.mark.parametrize("eps", [0.2, 1e-3])
def test_continuity_across_inner_edges(eps):
    fam = builtin_catalog("Q3", U=square_well_like(), V=Piecewise.constant(1.0))
    tr = propagate(fam, eps, 1j, 1.0, -1.0, (1.0, 0.5j))
    for edge in (-eps, eps):
        d = 1e-9 * eps
        yl, dl = tr(np.array([edge - d]))
        yr, dr = tr(np.array([edge + d]))
        # dense-output interpolation error dominates
        assert abs(yl[0] - yr[0]) < 1e-7 * max(1, abs(yl[0]))
        assert abs(dl[0] - dr[0]) < 1e-5 * max(1, abs(dl[0]))


def square_well_like():
    return Piecewise.from_json([{"lo": -0.5, "hi": 0.5, "kind": "const", "params": [-1.0]}])


def test_q1_gap_shrinks():
    fam = builtin_catalog("Q1")
    lim = classify_limit(fam)
    f = bump(0.0, 1.0)
    gaps = []
    for eps in (1e-2, 1e-3):
        solver = EpsResolvent(fam, eps, 1j, extent=1.0)
        grid = solver.grid()
        u, _ = LimitResolvent(lim, 1j, extent=1.0).solve(f, grid)
        gaps.append(l2_distance(solver.solve(f, grid), u))
    assert gaps[1] < gaps[0]


def test_zero_transmits():
    T, R = eps_scattering(builtin_catalog("zero"), 0.1, 1.5)
    assert abs(T - 1) < 1e-10 and abs(R) < 1e-10


def test_delta_limit_of_transmission(delta_family):
    fam = delta_family(2.0)
    errs = [abs(eps_transmission(fam, e, 1.0) - delta_transmission(1.0, 2.0)) for e in (1e-1, 1e-2, 1e-3)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-2


def test_q0_transmission_decreasing():
    fam = builtin_catalog("Q0")
    t2 = [abs(eps_transmission(fam, e, 1.0)) ** 2 for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > b for a, b in zip(t2, t2[1:]))


@pytest.mark.parametrize("name", ["Q0", "Q1", "Q2", "Q3", "modified", "truncated"])
@pytest.mark.parametrize("k", [0.3, 1.0, 4.0])
def test_eps_unitarity(name, k):
    T, R = eps_scattering(builtin_catalog(name), 1e-3, k)
    assert abs(abs(T) ** 2 + abs(R) ** 2 - 1) < 1e-8


@pytest.mark.parametrize("zeta", [1j, 2.0, -1.0 + 0.5j])
def test_transfer_determinant(zeta, well_family):
    M = eps_transfer_matrix(well_family, 1e-2, zeta)
    assert abs(np.linalg.det(M) - 1) < 1e-10


def test_real_zeta_rejected_for_resolvent():
    with pytest.raises(InvalidParameterError):
        EpsResolvent(builtin_catalog("Q1"), 0.1, 1.0)


def test_eps_range_checked():
    with pytest.raises(InvalidParameterError):
        eps_scattering(builtin_catalog("Q1"), 1.5, 1.0)


def test_tail_potential_scattering():
    tail = Piecewise.from_json([{"lo": 1.0, "hi": 1.5, "kind": "const", "params": [0.8]},
                                {"lo": -2.0, "hi": -1.0, "kind": "linear", "params": [0.0, -0.3]}])
    fam = RegularizedFamily(CoulombSpec(1.0, 1.0, 1.0, tail), kappa=Piecewise.polynomial((0.0, -1.0)))
    T, R = eps_scattering(fam, 1e-2, 1.2)
    assert abs(abs(T) ** 2 + abs(R) ** 2 - 1) < 1e-8
