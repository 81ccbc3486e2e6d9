"""Time stepper: row coefficients, assembly, stepping, and full runs."""

import math

import numpy as np
import pytest

from kgspline import (
    CoefficientState,
    DivergenceError,
    ExactKink,
    Grid,
    InvalidParameterError,
    ProblemSpec,
    assemble,
    init_state,
    make_basis,
    nodal_stencils,
    nodal_values,
    polynomial_limit_stencils,
    row_coefficients,
    run,
    solve_dense_oracle,
    step,
)


def small_spec(n=16, dt=0.02, rho=1.0, t_final=0.2, speed=0.5, a=-8.0, b=8.0):
    return ProblemSpec(grid=Grid(a, b, n), dt=dt, rho=rho,
                       t_final=t_final, wave_speed=speed)


def test_problem_spec_validation():
    g = Grid(0.0, 1.0, 8)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(grid=g, dt=0.0, rho=1.0, t_final=1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(grid=g, dt=0.1, rho=1.0, t_final=-1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(grid=g, dt=0.3, rho=1.0, t_final=1.0)  # not a multiple
    with pytest.raises(InvalidParameterError):
        ProblemSpec(grid=g, dt=0.1, rho=1.0, t_final=1.0, wave_speed=1.0)
    spec = ProblemSpec(grid=g, dt=0.1, rho=1.0, t_final=1.0)
    assert spec.n_steps == 10
    assert ProblemSpec(grid=g, dt=0.1, rho=1.0, t_final=0.0).n_steps == 0


def test_row_coefficients_values():
    st = nodal_stencils(make_basis(1.0, 0.02))
    dt = 0.005
    k = 0.3
    nu = row_coefficients(k, st, dt)
    k2 = k * k
    assert nu.nu1 == pytest.approx((3.0 * k2 - 1.0) * st.alpha1 - st.gamma1, rel=1e-15)
    assert nu.nu2 == pytest.approx(2.0 * st.alpha1 / dt, rel=1e-15)
    assert nu.nu3 == pytest.approx((3.0 * k2 - 1.0) - st.gamma2, rel=1e-15)
    assert nu.nu4 == 2.0 / dt
    assert nu.nu5 == pytest.approx((1.0 + k2) * st.alpha1 + st.gamma1, rel=1e-15)
    assert nu.nu6 == pytest.approx((1.0 + k2) + st.gamma2, rel=1e-15)
    assert nu.nu7 == -st.alpha1
    assert nu.nu8 == -1.0
    assert nu.k == k
    # spot magnitudes at this resolution
    assert nu.nu2 == pytest.approx(99.998000041903911, rel=1e-12)
    assert nu.nu4 == 400.0


def test_row_coefficient_identity():
    # nu1 - nu5 = (2k**2 - 2)*alpha1 - 2*gamma1 for any k
    rng = np.random.default_rng(12)
    st = nodal_stencils(make_basis(0.9, 0.1))
    for _ in range(50):
        k = float(rng.uniform(-2.0, 2.0))
        dt = float(rng.uniform(1e-3, 1.0))
        nu = row_coefficients(k, st, dt)
        want = (2.0 * k * k - 2.0) * st.alpha1 - 2.0 * st.gamma1
        assert nu.nu1 - nu.nu5 == pytest.approx(want, rel=1e-12)


def test_init_state_interpolates_kink():
    spec = small_spec(n=64, a=-16.0, b=16.0)
    basis = make_basis(spec.rho, spec.grid.h)
    st = nodal_stencils(basis)
    state = init_state(spec, basis, st)
    assert state.t == 0.0 and state.step_index == 0
    kink = ExactKink(spec.wave_speed)
    xs = spec.grid.nodes()
    u, _, _ = nodal_values(st, state.delta)
    v, _, _ = nodal_values(st, state.phi)
    np.testing.assert_allclose(u, kink.u(xs, 0.0), rtol=0, atol=1e-12)
    np.testing.assert_allclose(v, kink.v(xs, 0.0), rtol=0, atol=1e-12)


def independent_dense_system(state, spec, st):
    """Dense assembly written from the row-coefficient definitions, with the
    ghost columns folded by reflection; shares no code with the kernel."""
    n_nodes = spec.grid.n_elements + 1
    size = 2 * n_nodes
    delta, phi = state.delta, state.phi
    dense = np.zeros((size, size))
    rhs = np.zeros(size)

    def fold(node):
        if node < 0:
            return -node
        if node > n_nodes - 1:
            return 2 * (n_nodes - 1) - node
        return node

    for m in range(n_nodes):
        k = st.alpha1 * delta[m] + delta[m + 1] + st.alpha1 * delta[m + 2]
        nu = row_coefficients(k, st, spec.dt)
        r1, r2 = 2 * m, 2 * m + 1
        for node, cd, cp in ((m - 1, nu.nu1, nu.nu2), (m, nu.nu3, nu.nu4),
                             (m + 1, nu.nu1, nu.nu2)):
            j = fold(node)
            dense[r1, 2 * j] += cd
            dense[r1, 2 * j + 1] += cp
        for node, cd, cp in ((m - 1, nu.nu2, nu.nu7), (m, nu.nu4, nu.nu8),
                             (m + 1, nu.nu2, nu.nu7)):
            j = fold(node)
            dense[r2, 2 * j] += cd
            dense[r2, 2 * j + 1] += cp
        rhs[r1] = (nu.nu5 * delta[m] + nu.nu2 * phi[m]
                   + nu.nu6 * delta[m + 1] + nu.nu4 * phi[m + 1]
                   + nu.nu5 * delta[m + 2] + nu.nu2 * phi[m + 2])
        rhs[r2] = (nu.nu2 * delta[m] - nu.nu7 * phi[m]
                   + nu.nu4 * delta[m + 1] - nu.nu8 * phi[m + 1]
                   + nu.nu2 * delta[m + 2] - nu.nu7 * phi[m + 2])
    return dense, rhs


def ghosted_random_state(rng, n):
    delta = rng.standard_normal(n + 3)
    phi = rng.standard_normal(n + 3)
    delta[0], delta[-1] = delta[2], delta[-3]
    phi[0], phi[-1] = phi[2], phi[-3]
    return CoefficientState(delta, phi, 0.0, 0)


def test_assembly_matches_independent_dense():
    rng = np.random.default_rng(11)
    for n, rho, dt in ((4, 0.7, 0.02), (7, 1.0, 0.005), (12, 2.5, 0.1)):
        spec = small_spec(n=n, dt=dt, rho=rho, t_final=dt, a=0.0, b=2.0)
        st = nodal_stencils(make_basis(rho, spec.grid.h))
        state = ghosted_random_state(rng, n)
        mat, rhs = assemble(state, spec, st)
        assert mat.n == 2 * (n + 1) and mat.kl == 3 and mat.ku == 3
        dense, rhs2 = independent_dense_system(state, spec, st)
        scale = np.max(np.abs(dense))
        assert np.max(np.abs(mat.to_dense() - dense)) <= 1e-13 * scale
        assert np.max(np.abs(rhs - rhs2)) <= 1e-13 * np.max(np.abs(rhs2))


def test_step_matches_dense_oracle():
    rng = np.random.default_rng(13)
    spec = small_spec(n=10, dt=0.05, rho=1.2, t_final=0.05, a=0.0, b=5.0)
    st = nodal_stencils(make_basis(spec.rho, spec.grid.h))
    state = ghosted_random_state(rng, 10)
    mat, rhs = assemble(state, spec, st)
    x = solve_dense_oracle(mat.to_dense(), rhs)
    nxt = step(state, spec, st)
    assert nxt.t == spec.dt and nxt.step_index == 1
    np.testing.assert_allclose(nxt.delta[1:-1], x[0::2], rtol=0, atol=1e-12)
    np.testing.assert_allclose(nxt.phi[1:-1], x[1::2], rtol=0, atol=1e-12)


def test_step_restores_ghost_symmetry():
    spec = small_spec(n=16, t_final=0.2)
    basis = make_basis(spec.rho, spec.grid.h)
    st = nodal_stencils(basis)
    state = init_state(spec, basis, st)
    for _ in range(10):
        state = step(state, spec, st)
        assert state.delta[0] == state.delta[2]
        assert state.delta[-1] == state.delta[-3]
        assert state.phi[0] == state.phi[2]
        assert state.phi[-1] == state.phi[-3]


def test_matrix_changes_between_steps():
    # the row weights depend on the current field, so the operator cannot
    # be frozen after the first assembly
    spec = small_spec(n=32, a=-8.0, b=8.0, dt=0.05, t_final=0.1)
    basis = make_basis(spec.rho, spec.grid.h)
    st = nodal_stencils(basis)
    s0 = init_state(spec, basis, st)
    s1 = step(s0, spec, st)
    m0, _ = assemble(s0, spec, st)
    m1, _ = assemble(s1, spec, st)
    assert np.max(np.abs(m0.bands - m1.bands)) > 1e-6


def test_state_shape_guards():
    spec = small_spec(n=8, a=0.0, b=4.0)
    st = nodal_stencils(make_basis(spec.rho, spec.grid.h))
    bad = CoefficientState(np.zeros(10), np.zeros(10), 0.0, 0)
    with pytest.raises(InvalidParameterError):
        assemble(bad, spec, st)
    with pytest.raises(InvalidParameterError):
        step(bad, spec, st)


def test_step_raises_on_poisoned_state():
    spec = small_spec(n=8, a=0.0, b=4.0)
    st = nodal_stencils(make_basis(spec.rho, spec.grid.h))
    delta = np.full(11, np.inf)
    state = CoefficientState(delta, np.zeros(11), 0.0, 0)
    with pytest.raises(DivergenceError):
        step(state, spec, st)


def test_constant_state_reduces_to_scalar_map():
    # spatially uniform fields evolve by the two-variable map obtained by
    # dropping the second-derivative weights; the full solver must track it
    grid = Grid(0.0, 16.0, 16)
    st = nodal_stencils(make_basis(1.0, grid.h))
    dt = 0.01
    spec = ProblemSpec(grid=grid, dt=dt, rho=1.0, t_final=1.0, wave_speed=0.0)
    cover = 1.0 + 2.0 * st.alpha1
    u_map, v_map = 0.3, 0.1
    state = CoefficientState(np.full(19, u_map / cover),
                             np.full(19, v_map / cover), 0.0, 0)
    for _ in range(100):
        state = step(state, spec, st)
        k = u_map
        mat = np.array([[3.0 * k * k - 1.0, 2.0 / dt], [2.0 / dt, -1.0]])
        rhs = np.array([(1.0 + k * k) * u_map + 2.0 / dt * v_map,
                        2.0 / dt * u_map + v_map])
        u_map, v_map = np.linalg.solve(mat, rhs)
        u, _, _ = nodal_values(st, state.delta)
        v, _, _ = nodal_values(st, state.phi)
        assert np.max(np.abs(u - u_map)) <= 1e-12
        assert np.max(np.abs(v - v_map)) <= 1e-12


def test_run_record_layout():
    spec = small_spec(n=20, dt=0.02, t_final=0.2)
    res = run(spec, observe_every=3)
    assert res.failure is None
    # records at t=0, steps 3, 6, 9, and the final step 10
    assert [r.t for r in res.records] == pytest.approx(
        [0.0, 0.06, 0.12, 0.18, 0.2])
    assert res.records[0].growth_factor == 0.0
    assert res.final.growth_factor >= 1.0
    assert res.final is res.records[-1]
    assert res.records[0].linf <= 1e-12  # interpolated start
    with pytest.raises(InvalidParameterError):
        run(spec, observe_every=0)


def test_run_zero_steps():
    spec = small_spec(n=20, dt=0.02, t_final=0.0)
    res = run(spec)
    assert len(res.records) == 1
    assert res.records[0].t == 0.0


def test_run_observer_callback():
    spec = small_spec(n=20, dt=0.02, t_final=0.1)
    seen = []
    res = run(spec, observe_every=2, observer=lambda s, r: seen.append((s.t, r.t)))
    assert len(seen) == len(res.records)
    assert all(st == rt for st, rt in seen)


def test_run_accepts_stencil_override():
    spec = small_spec(n=20, dt=0.02, t_final=0.1)
    res = run(spec, stencils=polynomial_limit_stencils(spec.grid.h))
    assert res.failure is None
    assert res.final.t == pytest.approx(0.1)


def test_static_kink_energy_over_50_steps():
    # at the headline resolution the march holds the energy of the c=0 kink
    # essentially flat over 50 steps; coarser grids start farther from the
    # discrete steady state and drift more (see the decisions ledger)
    spec = ProblemSpec(grid=Grid(-30.0, 30.0, 3000), dt=0.005, rho=1.0,
                       t_final=0.25, wave_speed=0.0)
    res = run(spec, observe_every=50)
    assert res.failure is None
    assert res.final.c_e < 1e-9
