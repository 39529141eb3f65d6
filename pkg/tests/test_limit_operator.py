import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coulomb_limits import (
    ContractViolation,
    CoulombSpec,
    DegenerateCouplingError,
    InvalidParameterError,
    LimitOperator,
    LimitResolvent,
    Piecewise,
    apply_resolvent,
    builtin_catalog,
    bump,
    classify_limit,
    limit_scattering,
    limit_transmission,
    square_well,
)
from coulomb_limits._green import integrated_residual
from coulomb_limits.limit_operator import _solve_coupling

from oracles import delta_transmission, free_resolvent


def test_classify_q1_with_v():
    fam = builtin_catalog("Q1", V=Piecewise.constant(0.4))
    lim = classify_limit(fam)
    assert lim.kind == "ResonantPI" and lim.theta == 1.0
    assert lim.mu == pytest.approx(0.8, rel=1e-13)


def test_classify_barrier_is_dirichlet():
    for kappa in (Piecewise(), Piecewise.constant(-1.0), Piecewise.polynomial((0.0, 3.0))):
        fam = builtin_catalog("Q1", U=square_well(1.0))
        fam = type(fam)(fam.coulomb, kappa, fam.U, fam.V)
        assert classify_limit(fam).kind == "DirichletSum"


def test_classify_square_well(well_family):
    lim = classify_limit(well_family)
    assert lim.kind == "ResonantPI"
    assert lim.theta == pytest.approx(-1.0, abs=1e-9)
    assert lim.mu == 0.0


def test_classify_near_threshold_warns():
    # residual -2 delta over scale 3 lands between tol and 10 tol
    fam = builtin_catalog("Q1")
    fam = type(fam)(fam.coulomb, Piecewise.constant(-1.0 + 3e-8), name="nearly")
    lim = classify_limit(fam, tol=1e-8)
    assert lim.kind == "DirichletSum" and lim.warning is not None


def test_classify_rejects_shifted():
    with pytest.raises(ContractViolation):
        classify_limit(builtin_catalog("modified"))


def test_point_interaction_needs_theta():
    with pytest.raises(InvalidParameterError):
        LimitOperator("ResonantPI", CoulombSpec(0.0, 0.0), theta=0.0)


def test_free_green_kernel():
    lim = LimitOperator.point_interaction(CoulombSpec(0.0, 0.0))
    f = bump(0.1, 0.8)
    solver = LimitResolvent(lim, 1j, extent=1.0)
    sol, _ = solver.solve(f)
    idx = np.arange(0, sol.grid.nodes.size, 53)
    ref = free_resolvent(f, f.support, 1j, sol.grid.nodes[idx])
    assert np.max(np.abs(sol.y[idx] - ref)) < 1e-8


def test_apply_resolvent_trace_matches_kernel():
    lim = LimitOperator.point_interaction(CoulombSpec(0.0, 0.0))
    f = bump(-0.2, 0.6)
    trace, _ = apply_resolvent(lim, 1j, f)
    x = np.array([-0.7, -0.2, 0.3, 0.79])
    assert np.max(np.abs(trace(x)[0] - free_resolvent(f, f.support, 1j, x))) < 1e-8


def test_dirichlet_boundary_values():
    lim = LimitOperator.dirichlet(CoulombSpec(1.0, -1.0))
    _, bd = LimitResolvent(lim, 0.5 + 1j, extent=1.0).solve(bump(0.0, 0.9))
    assert abs(bd.u_minus0) < 1e-9 and abs(bd.u_plus0) < 1e-9


def test_antisymmetric_coupling(well_family):
    lim = classify_limit(well_family)
    f = bump(0.0, 0.9)
    sol, bd = LimitResolvent(lim, 1j, extent=1.0).solve(f)
    assert abs(bd.u_minus0 + bd.u_plus0) < 1e-9
    assert abs(lim.theta * bd.b_plus - bd.b_minus - lim.mu * bd.u_minus0) < 1e-8


def test_resolvent_residual_away_from_origin():
    fam = builtin_catalog("Q3", V=Piecewise.constant(0.3))
    lim = classify_limit(fam)
    f = bump(0.2, 0.7)
    sol, _ = LimitResolvent(lim, 2 + 1j, extent=1.0).solve(f)
    x = sol.grid.nodes
    r = integrated_residual(sol.grid, sol.y, sol.dy, lambda s: np.nan_to_num(fam.coulomb(s)), 2 + 1j, f)
    away = np.abs(x) > 1e-9
    assert np.max(r[away]) < 1e-6 * 1.0


def test_even_background_gives_even_solution():
    # q- = -q+ makes q/x even in our sign convention
    spec = CoulombSpec(1.0, -1.0)
    lim = LimitOperator.point_interaction(spec, 1.0, 0.7)
    trace, bd = apply_resolvent(lim, 1j, bump(0.0, 1.2), extent=1.2)
    x = np.linspace(0.01, 1.19, 37)
    assert np.max(np.abs(trace(x)[0] - trace(-x)[0])) < 1e-8
    assert abs(bd.u_plus0 - bd.u_minus0) < 1e-10


def test_offaxis_required():
    lim = LimitOperator.dirichlet(CoulombSpec(1.0, 1.0))
    with pytest.raises(InvalidParameterError):
        LimitResolvent(lim, 2.0)


def test_source_support_checked():
    lim = LimitOperator.dirichlet(CoulombSpec(1.0, 1.0))
    with pytest.raises(InvalidParameterError):
        LimitResolvent(lim, 1j, extent=1.0).solve(bump(1.5, 1.0))


def test_singular_coupling_detected():
    with pytest.raises(DegenerateCouplingError):
        _solve_coupling(np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex), np.zeros(2, dtype=complex))


def test_dirichlet_blocks_transmission():
    lim = LimitOperator.dirichlet(CoulombSpec(1.0, -1.0))
    for k in (0.3, 1.0, 3.0):
        T, R = limit_scattering(lim, k)
        assert T == 0 and abs(abs(R) - 1) < 1e-10


@pytest.mark.parametrize("beta", [1.0, -1.0, 4.0])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_delta_transmission(beta, k):
    lim = LimitOperator.point_interaction(CoulombSpec(0.0, 0.0), 1.0, beta)
    assert abs(limit_transmission(lim, k) - delta_transmission(k, beta)) < 1e-9


def test_no_interaction_transmits():
    lim = LimitOperator.point_interaction(CoulombSpec(0.0, 0.0))
    assert abs(limit_transmission(lim, 1.3) - 1) < 1e-10


@settings(max_examples=20, deadline=None)
@given(k=st.floats(0.1, 5.0), theta=st.floats(-3, 3).filter(lambda t: abs(t) > 0.1),
       mu=st.floats(-5, 5), qm=st.floats(-2, 2), qp=st.floats(-2, 2))
def test_limit_unitarity(k, theta, mu, qm, qp):
    lim = LimitOperator.point_interaction(CoulombSpec(qm, qp), theta, mu)
    T, R = limit_scattering(lim, k)
    assert abs(abs(T) ** 2 + abs(R) ** 2 - 1) < 1e-8


def test_wavenumber_validated():
    with pytest.raises(InvalidParameterError):
        limit_transmission(LimitOperator.dirichlet(CoulombSpec(0.0, 0.0)), 0.0)


def test_to_dict_fields():
    doc = classify_limit(builtin_catalog("Q1")).to_dict()
    assert doc["kind"] == "ResonantPI" and doc["theta"] == 1 and doc["mu"] == 0
    assert doc["verdict"] == "penetrable" and doc["warning"] is None
