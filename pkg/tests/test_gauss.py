import math

import numpy as np
import pytest

import minlag
from minlag import GaussProblem, ScalarField
from minlag.errors import NonexistenceError
from oracles import FOLD_FACTOR, constant_branch_v, cubic_real_roots


@pytest.fixture(scope="module")
def qsq_one(mesh3):
    return ScalarField.constant(mesh3, 1.0)


def test_residual_zero_at_origin(mesh3, qsq_one):
    problem = GaussProblem(mesh3, qsq_one, 0.0)
    u = ScalarField.constant(mesh3, 0.0)
    r = minlag.residual(u, problem)
    assert np.max(np.abs(r.values)) == 0.0


def test_residual_constant_algebra(mesh3):
    # for u = log v and constant qsq = q^2 the residual is
    # -2 t^2 q^2 / v^2 - 2 v + 2 at every vertex (the Laplacian term is zero)
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rng.uniform(0.3, 1.2)
        q = rng.uniform(0.1, 2.0)
        t = rng.uniform(0.0, 0.5)
        problem = GaussProblem(mesh3, ScalarField.constant(mesh3, q**2), t)
        r = minlag.residual(ScalarField.constant(mesh3, math.log(v)), problem)
        expected = -2.0 * t**2 * q**2 / v**2 - 2.0 * v + 2.0
        assert np.max(np.abs(r.values - expected)) < 1e-11


def test_residual_near_root(mesh3, qsq_one):
    # v = 0.88512 is the upper root of v^3 - v^2 + 0.09 to about 2e-6
    problem = GaussProblem(mesh3, qsq_one, 0.3)
    r = minlag.residual(ScalarField.constant(mesh3, math.log(0.88512)), problem)
    assert np.max(np.abs(r.values)) < 1e-3


def test_solve_t_zero_is_exact_zero(mesh3, qsq_one):
    sol = minlag.solve(GaussProblem(mesh3, qsq_one, 0.0))
    assert np.max(np.abs(sol.u.values)) == 0.0
    assert sol.newton_iters == 0


def test_solve_constant_branch(mesh3, qsq_one):
    problem = GaussProblem(mesh3, qsq_one, 0.3)
    sol = minlag.solve(problem)
    v_ref = constant_branch_v(0.3, 1.0)
    v = np.exp(sol.u.values)
    assert v.max() - v.min() < 1e-10  # discrete constants are exact
    assert abs(v.mean() - v_ref) < 1e-8
    assert abs(v_ref - 0.885120) < 5e-6  # matches the quoted branch value


def test_solve_nonexistence_past_fold(mesh3, qsq_one):
    # t q > sqrt(4/27): the cubic has no root in (0, 1]
    assert 0.4 > FOLD_FACTOR
    with pytest.raises(NonexistenceError):
        minlag.solve(GaussProblem(mesh3, qsq_one, 0.4))


def test_maximum_principle(mesh3):
    rng = np.random.default_rng(11)
    z = mesh3.vertices[:, 0] + 1j * mesh3.vertices[:, 1]
    zc = z[mesh3.class_representative]
    bump = np.exp(-np.abs(zc) ** 2 / 0.1)
    qsq = ScalarField(1.0 + 2.0 * bump, mesh3)
    sol = minlag.solve(GaussProblem(mesh3, qsq, 0.15))
    assert sol.u.max() <= 1e-8
    assert sol.u.min() < -1e-4  # genuinely nonconstant


def test_jacobian_matches_finite_differences(mesh3, qsq_one):
    problem = GaussProblem(mesh3, qsq_one, 0.25)
    rng = np.random.default_rng(7)
    u = ScalarField(-0.05 + 0.02 * rng.normal(size=mesh3.num_vertices), mesh3)
    J = minlag.jacobian(u, problem)
    h = 1e-6
    for _ in range(3):
        d = rng.normal(size=mesh3.num_vertices)
        d /= np.linalg.norm(d)
        rp = minlag.residual(ScalarField(u.values + h * d, mesh3), problem).values
        rm = minlag.residual(ScalarField(u.values - h * d, mesh3), problem).values
        fd = (rp - rm) / (2.0 * h)
        jd = J @ d
        rel = np.linalg.norm(fd - jd) / np.linalg.norm(jd)
        assert rel <= 1e-5


def test_stability_constant_branches(mesh3, qsq_one):
    problem = GaussProblem(mesh3, qsq_one, 0.3)
    sol_up = minlag.solve(problem)
    stab_up = minlag.f_stability(sol_up, problem)
    v_up = constant_branch_v(0.3, 1.0)
    assert abs(stab_up.lambda_min - (6.0 * v_up - 4.0)) < 1e-8
    assert abs(stab_up.lambda_min - 1.31072) < 2e-5
    assert stab_up.is_F_stable

    v_lo = constant_branch_v(0.3, 1.0, branch="lower")
    sol_lo = minlag.solve(problem, initial_guess=ScalarField.constant(mesh3, math.log(0.38)))
    stab_lo = minlag.f_stability(sol_lo, problem)
    assert abs(np.exp(sol_lo.u.values).mean() - v_lo) < 1e-8
    assert abs(stab_lo.lambda_min - (6.0 * v_lo - 4.0)) < 1e-8
    assert not stab_lo.is_F_stable

    # eigenfunction invariants: unit mass norm, Rayleigh reproduces lambda
    S, M = mesh3.operators()
    m = M.matrix.diagonal()
    x = stab_up.eigenfunction.values
    assert abs(x @ (m * x) - 1.0) < 1e-10
    c = 2.0 * np.exp(sol_up.u.values) - 4.0 * 0.09 * np.exp(-2.0 * sol_up.u.values)
    rayleigh = x @ (S.matrix @ x) + x @ (m * c * x)
    assert abs(rayleigh - stab_up.lambda_min) <= 1e-8 * max(1.0, abs(stab_up.lambda_min))


def test_stability_zero_at_fold(mesh3, qsq_one):
    # at the fold the constant solution is v = 2/3 and the operator on
    # constants reduces to 6v - 4 = 0
    t_fold = FOLD_FACTOR
    problem = GaussProblem(mesh3, qsq_one, t_fold)
    sol = minlag.solve(
        problem, initial_guess=ScalarField.constant(mesh3, math.log(2.0 / 3.0))
    )
    stab = minlag.f_stability(sol, problem)
    assert abs(stab.lambda_min) < 1e-6


def test_embedding_check_values(mesh3, qsq_one):
    problem = GaussProblem(mesh3, qsq_one, 0.3)
    sol = minlag.solve(problem)
    rep = minlag.embedding_check(sol, problem)
    v = constant_branch_v(0.3, 1.0)
    assert abs(rep.max_Qsq_gamma - (1.0 - v) / v) < 1e-10
    assert abs(rep.max_Qsq_gamma - 0.129790) < 5e-6
    assert rep.almost_R_Fuchsian
    assert abs(rep.T0 - FOLD_FACTOR) < 1e-14


def test_embedding_boundary_case(mesh3, qsq_one):
    # v = 1/3 solves the cubic at t = sqrt(2/27); there (1-v)/v = 2 exactly,
    # the boundary of the embedding criterion
    t = math.sqrt(2.0 / 27.0)
    problem = GaussProblem(mesh3, qsq_one, t)
    sol = minlag.solve(problem, initial_guess=ScalarField.constant(mesh3, math.log(0.34)))
    v = float(np.exp(sol.u.values).mean())
    assert abs(v - 1.0 / 3.0) < 1e-9
    rep = minlag.embedding_check(sol, problem)
    assert abs(rep.max_Qsq_gamma - 2.0) < 1e-7
    assert not rep.almost_R_Fuchsian


def test_area_identity_any_solution(mesh3):
    # integrating the equation kills the Laplacian term, so
    # Area_gamma + integral of the induced-norm density = background area
    z = mesh3.vertices[:, 0] + 1j * mesh3.vertices[:, 1]
    zc = z[mesh3.class_representative]
    qsq = ScalarField(0.5 + np.abs(zc) ** 2, mesh3)
    problem = GaussProblem(mesh3, qsq, 0.2)
    sol = minlag.solve(problem)
    area_gamma, q_int = minlag.area_report(sol, problem)
    assert abs(area_gamma + q_int - 4.0 * math.pi) < 1e-8


def test_ray_constant_fold(mesh3, qsq_one):
    ray = minlag.continue_ray(qsq_one, 0.5, 0.02)
    assert ray.status == "fold_detected"
    assert abs(ray.fold_t - FOLD_FACTOR) / FOLD_FACTOR < 1e-3
    assert abs(ray.t0 - FOLD_FACTOR) < 1e-14
    assert ray.stable_monotone
    # fold is detected by the eigenvalue crossing: non-stable samples exist
    assert any(not s.stability.is_F_stable for s in ray.samples)
    # eigenvalue decreases to zero at the fold along the stable branch
    lams = [s.stability.lambda_min for s in ray.samples if s.stability.is_F_stable]
    assert all(a >= b - 1e-12 for a, b in zip(lams, lams[1:]))
    # the t samples are strictly monotone along the stable segment
    ts = [s.t for s in ray.samples if s.stability.is_F_stable]
    assert all(a < b for a, b in zip(ts, ts[1:]))


def test_ray_scaling_with_q(mesh3):
    qsq4 = ScalarField.constant(mesh3, 4.0)
    ray = minlag.continue_ray(qsq4, 0.3, 0.01)
    target = FOLD_FACTOR / 2.0
    assert abs(ray.fold_t - target) / target < 1e-3


def test_ray_pointwise_monotonicity(mesh3, qsq_one):
    ray = minlag.continue_ray(qsq_one, 0.35, 0.05)
    stable = [s for s in ray.samples if s.stability.is_F_stable]
    for a, b in zip(stable, stable[1:]):
        assert b.t > a.t
        assert np.all(b.solution.u.values <= a.solution.u.values + 1e-8)


def test_ray_completed_before_fold(mesh3, qsq_one):
    ray = minlag.continue_ray(qsq_one, 0.2, 0.05)
    assert ray.status == "completed"
    assert ray.fold_t is None
    assert abs(ray.samples[-1].t - 0.2) < 1e-12


def test_ray_nonconstant_qsq(mesh2):
    # nonconstant squared norm: fold should appear at T1 >= T0 (numerically)
    z = mesh2.vertices[:, 0] + 1j * mesh2.vertices[:, 1]
    zc = z[mesh2.class_representative]
    qsq = ScalarField(1.0 + 0.8 * np.exp(-np.abs(zc) ** 2), mesh2)
    ray = minlag.continue_ray(qsq, 0.6, 0.02)
    assert ray.status == "fold_detected"
    assert ray.fold_t >= ray.t0 - 1e-6
    assert ray.stable_monotone
    stable = [s for s in ray.samples if s.stability.is_F_stable]
    assert stable[-1].solution.u.min() < -1e-3  # nonconstant solution branch
    assert any(not s.stability.is_F_stable for s in ray.samples)


def test_problem_validation(mesh3):
    bad = ScalarField.constant(mesh3, -1.0)
    with pytest.raises(ValueError):
        GaussProblem(mesh3, bad, 0.1)
    good = ScalarField.constant(mesh3, 1.0)
    with pytest.raises(ValueError):
        GaussProblem(mesh3, good, -0.1)
    with pytest.raises(ValueError):
        minlag.solve(GaussProblem(mesh3, good, 0.1), tol=0.0)


def test_stability_dichotomy_along_branch(mesh3, qsq_one):
    # constant branches: stable exactly when v > 2/3
    ray = minlag.continue_ray(qsq_one, 0.5, 0.05)
    for s in ray.samples:
        v = float(np.exp(s.solution.u.values).mean())
        assert s.stability.is_F_stable == (v > 2.0 / 3.0)
