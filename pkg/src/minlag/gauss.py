"""Gauss equation for equivariant minimal Lagrangian immersions.

The induced metric is written gamma = e^u mu against the hyperbolic background
mu; the conformal factor solves

    Delta_mu u - 2 t^2 qsq e^{-2u} - 2 e^u + 2 = 0,

where qsq >= 0 is the squared background norm of a cubic differential and
t >= 0 scales it along a ray.  Note that qsq is an arbitrary nonnegative
vertex field: holomorphicity of the underlying differential is NOT enforced
(the equation only sees the norm).  In particular constant qsq, which no
holomorphic differential attains, is allowed and gives exact scalar oracles:
a constant solution u = log v satisfies v^3 - v^2 + t^2 qsq = 0.

Stability of a solution is positivity of the linearised operator
-Delta_mu + 2 e^u - 4 t^2 qsq e^{-2u}; the stable branch out of (t=0, u=0)
ends at a fold where the smallest eigenvalue crosses zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MeshMismatchError, NonexistenceError, NumericalError
from .surface import ScalarField, integrate

MAX_PRINCIPLE_TOL = 1e-8
T0_FACTOR = math.sqrt(4.0 / 27.0)


# ---------------------------------------------------------------------------
# Problem and solution containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussProblem:
    """Background mesh, squared differential norm, and ray parameter."""

    mesh: "object"
    qsq: ScalarField
    t: float

    def __post_init__(self):
        if self.qsq.mesh is not self.mesh:
            raise MeshMismatchError("qsq lives on a different mesh")
        if np.any(self.qsq.values < 0.0):
            raise ValueError("qsq must be >= 0")
        if self.t < 0.0:
            raise ValueError("t must be >= 0")


@dataclass(frozen=True)
class GaussSolution:
    u: ScalarField
    residual_norm: float
    newton_iters: int

    def __post_init__(self):
        if self.u.max() > MAX_PRINCIPLE_TOL:
            raise NumericalError(
                f"max u = {self.u.max():.3e} violates the discrete maximum principle"
            )


@dataclass(frozen=True)
class StabilityRecord:
    lambda_min: float
    eigenfunction: ScalarField
    is_F_stable: bool


@dataclass(frozen=True)
class EmbeddingReport:
    max_Qsq_gamma: float
    almost_R_Fuchsian: bool
    T0: float


# ---------------------------------------------------------------------------
# Residual and Newton solver
# ---------------------------------------------------------------------------


def _raw_residual(u, t2qsq, S, m):
    with np.errstate(over="ignore", invalid="ignore"):
        return -(S @ u) / m - 2.0 * t2qsq * np.exp(-2.0 * u) - 2.0 * np.exp(u) + 2.0


def residual(u, problem):
    """Pointwise value of the equation at u (zero at a solution)."""
    if u.mesh is not problem.mesh:
        raise MeshMismatchError("u lives on a different mesh")
    S, M = problem.mesh.operators()
    r = _raw_residual(
        u.values, problem.t**2 * problem.qsq.values, S.matrix, M.matrix.diagonal()
    )
    return ScalarField(r, problem.mesh)


def jacobian(u, problem):
    """Derivative of ``residual`` with respect to u, as a sparse matrix:
    -M^{-1} S + diag(4 t^2 qsq e^{-2u} - 2 e^u)."""
    if u.mesh is not problem.mesh:
        raise MeshMismatchError("u lives on a different mesh")
    S, M = problem.mesh.operators()
    m = M.matrix.diagonal()
    uv = u.values
    diag = 4.0 * problem.t**2 * problem.qsq.values * np.exp(-2.0 * uv) - 2.0 * np.exp(uv)
    return (-sp.diags(1.0 / m) @ S.matrix + sp.diags(diag)).tocsr()


def solve(problem, initial_guess=None, tol=1e-11, max_iters=60):
    """Damped Newton iteration; mass-weighted symmetric Jacobian.

    Raises NonexistenceError when Newton cannot converge (the continuation
    uses that as the operational no-solution probe) and NumericalError on NaN.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    mesh = problem.mesh
    S, M = mesh.operators()
    m = M.matrix.diagonal()
    t2qsq = problem.t**2 * problem.qsq.values
    u = (
        np.zeros(mesh.num_vertices)
        if initial_guess is None
        else np.array(initial_guess.values, dtype=float)
    )

    def sup(r):
        return float(np.max(np.abs(r))) if np.all(np.isfinite(r)) else np.inf

    r = _raw_residual(u, t2qsq, S.matrix, m)
    rnorm = sup(r)
    for it in range(max_iters):
        if rnorm <= tol:
            return GaussSolution(ScalarField(u, mesh), rnorm, it)
        # G = M r, J = dG/du symmetric
        with np.errstate(over="ignore"):
            e2 = np.exp(-2.0 * u)
            e1 = np.exp(u)
        J = (-S.matrix + sp.diags(m * (4.0 * t2qsq * e2 - 2.0 * e1))).tocsc()
        G = m * r
        try:
            delta = spla.spsolve(J, -G)
        except RuntimeError as exc:  # singular factorisation
            raise NonexistenceError(f"Newton linear solve failed: {exc}", t=problem.t)
        if not np.all(np.isfinite(delta)):
            raise NumericalError("Newton produced non-finite update")
        # damping: halve until the residual norm decreases, at most 12 times
        step = 1.0
        for _ in range(13):
            u_try = u + step * delta
            r_try = _raw_residual(u_try, t2qsq, S.matrix, m)
            n_try = sup(r_try)
            if n_try < rnorm:
                break
            step *= 0.5
        else:
            raise NonexistenceError(
                f"Newton stalled at t={problem.t:.6g} (residual {rnorm:.3e})",
                t=problem.t,
            )
        u, r, rnorm = u_try, r_try, n_try
    if rnorm <= tol:
        return GaussSolution(ScalarField(u, mesh), rnorm, max_iters)
    raise NonexistenceError(
        f"no convergence in {max_iters} Newton iterations at t={problem.t:.6g}",
        t=problem.t,
    )


# ---------------------------------------------------------------------------
# Stability (smallest eigenvalue of the linearised operator)
# ---------------------------------------------------------------------------


def _smallest_generalized_eigenpair(A, m, c, max_iters=200):
    """Smallest eigenvalue of A x = lambda M x with diagonal M.

    Shifted inverse iteration with the shift started strictly below the
    spectrum (A - sigma M is then positive definite), polished by Rayleigh
    quotient re-shifts.  c is a pointwise lower bound for the potential so
    that min(c) bounds the spectrum from below.
    """
    n = A.shape[0]
    sigma = float(np.min(c)) - 1.0
    x = np.ones(n)
    x /= math.sqrt(float(x @ (m * x)))
    lam_old = np.inf
    factor = spla.splu((A - sigma * sp.diags(m)).tocsc())
    refactors = 0
    for it in range(max_iters):
        y = factor.solve(m * x)
        ny = math.sqrt(float(y @ (m * y)))
        if ny == 0.0 or not np.isfinite(ny):
            raise NumericalError("inverse iteration broke down")
        x = y / ny
        lam = float(x @ (A @ x))
        if abs(lam - lam_old) <= 1e-13 * max(1.0, abs(lam)):
            break
        lam_old = lam
        if it >= 4 and refactors < 12:
            # Rayleigh re-shift, kept slightly below to preserve definiteness
            sigma_new = lam - max(1e-10, 1e-10 * abs(lam))
            try:
                factor = spla.splu((A - sigma_new * sp.diags(m)).tocsc())
                refactors += 1
            except RuntimeError:
                pass
    else:
        raise NumericalError("eigenvalue iteration stagnated")
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    return lam, x


def f_stability(sol, problem):
    """Smallest eigenvalue of (S + M diag(2 e^u - 4 t^2 qsq e^{-2u}), M)."""
    mesh = problem.mesh
    S, M = mesh.operators()
    m = M.matrix.diagonal()
    u = sol.u.values
    c = 2.0 * np.exp(u) - 4.0 * problem.t**2 * problem.qsq.values * np.exp(-2.0 * u)
    A = (S.matrix + sp.diags(m * c)).tocsr()
    lam, x = _smallest_generalized_eigenpair(A, m, c)
    return StabilityRecord(lam, ScalarField(x, mesh), lam > 0.0)


# ---------------------------------------------------------------------------
# Embedding criterion and area identity
# ---------------------------------------------------------------------------


def qsq_gamma_field(sol, problem):
    """Squared norm of the scaled differential in the induced metric:
    t^2 qsq e^{-3u} (a cubic differential rescales by e^{-3u} under
    gamma = e^u mu)."""
    vals = problem.t**2 * problem.qsq.values * np.exp(-3.0 * sol.u.values)
    return ScalarField(vals, problem.mesh)


def embedding_check(sol, problem):
    """Almost-R-Fuchsian criterion: sup-norm of the induced-metric differential
    squared below 2; also reports T0 = sqrt(4/27) / sup sqrt(qsq)."""
    qg = qsq_gamma_field(sol, problem)
    sup_q = math.sqrt(float(np.max(problem.qsq.values)))
    t0 = math.inf if sup_q == 0.0 else T0_FACTOR / sup_q
    mx = qg.max()
    return EmbeddingReport(mx, mx < 2.0, t0)


def area_report(sol, problem):
    """(Area_gamma, integral of the induced-metric differential norm squared).

    For converged solutions their sum equals the background area 4 pi (g-1):
    integrating the equation kills the Laplacian term exactly because
    constants are in the stiffness kernel.
    """
    mesh = problem.mesh
    area_gamma = integrate(ScalarField(np.exp(sol.u.values), mesh), mesh)
    # norm density e^{-3u} times volume factor e^{u}
    integrand = problem.t**2 * problem.qsq.values * np.exp(-2.0 * sol.u.values)
    return area_gamma, integrate(ScalarField(integrand, mesh), mesh)


# ---------------------------------------------------------------------------
# Ray continuation with fold detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RaySample:
    t: float
    solution: GaussSolution
    stability: StabilityRecord


@dataclass
class RayContinuation:
    """Ordered branch of (t, solution, stability) records along t * q0.

    fold_t estimates the parameter where the stable branch terminates
    (smallest eigenvalue crossing zero).  newton_fail_t is the operational
    no-solution probe: the first t at which Newton found nothing.
    """

    samples: list
    fold_t: float | None
    status: str  # completed | fold_detected | diverged
    t0: float
    newton_fail_t: float | None = None
    monotonicity_violation: float = 0.0

    @property
    def stable_monotone(self):
        return self.monotonicity_violation <= MAX_PRINCIPLE_TOL


def _extended_solve(S, m, qsq, u0, t0_, tan_u, tan_t, ds, tol, max_iters=40):
    """One pseudo-arclength corrector step from (u0, t0_) along (tan_u, tan_t)."""
    n = len(u0)
    u = u0 + ds * tan_u
    t = t0_ + ds * tan_t

    def G(u_, t_):
        with np.errstate(over="ignore"):
            return -(S @ u_) - m * (
                2.0 * t_**2 * qsq * np.exp(-2.0 * u_) + 2.0 * np.exp(u_) - 2.0
            )

    for it in range(max_iters):
        g = G(u, t)
        nrm = np.max(np.abs(g / m))
        arc = tan_u @ (u - u0) + tan_t * (t - t0_) - ds
        if nrm <= tol and abs(arc) <= tol:
            return u, t, it
        with np.errstate(over="ignore"):
            e2 = np.exp(-2.0 * u)
            e1 = np.exp(u)
        Gu = -S + sp.diags(m * (4.0 * t**2 * qsq * e2 - 2.0 * e1))
        Gt = -m * 4.0 * t * qsq * e2
        Jext = sp.bmat(
            [[Gu, Gt.reshape(-1, 1)], [tan_u.reshape(1, -1), np.array([[tan_t]])]]
        ).tocsc()
        rhs = -np.concatenate([g, [arc]])
        delta = spla.spsolve(Jext, rhs)
        if not np.all(np.isfinite(delta)):
            raise NumericalError("arclength corrector produced non-finite update")
        u = u + delta[:n]
        t = t + delta[n]
    raise NonexistenceError("arclength corrector did not converge", t=t)


def _tangent(S, m, qsq, u, t, prev_tan):
    """Branch tangent from the bordered system, oriented along prev_tan."""
    n = len(u)
    with np.errstate(over="ignore"):
        e2 = np.exp(-2.0 * u)
        e1 = np.exp(u)
    Gu = -S + sp.diags(m * (4.0 * t**2 * qsq * e2 - 2.0 * e1))
    Gt = -m * 4.0 * t * qsq * e2
    pu, pt = prev_tan
    Jext = sp.bmat([[Gu, Gt.reshape(-1, 1)], [pu.reshape(1, -1), np.array([[pt]])]]).tocsc()
    rhs = np.concatenate([np.zeros(n), [1.0]])
    sol = spla.spsolve(Jext, rhs)
    tan_u, tan_t = sol[:n], sol[n]
    nrm = math.sqrt(float(tan_u @ tan_u) + tan_t**2)
    return tan_u / nrm, tan_t / nrm


def continue_ray(
    qsq,
    t_max,
    step,
    tol=1e-11,
    stability_switch=0.05,
    post_fold_samples=25,
):
    """Follow the solution branch from (t=0, u=0) up to t_max.

    Natural stepping in t with the previous solution as guess; switches to
    pseudo-arclength once the smallest eigenvalue drops below
    ``stability_switch``; the fold is located by secant refinement of the
    eigenvalue zero crossing and continuation then proceeds onto the unstable
    side to capture non-stable solutions.  Also monitors that u(t) is
    pointwise non-increasing along the stable branch.
    """
    if step <= 0.0:
        raise ValueError("step must be > 0")
    if t_max < 0.0:
        raise ValueError("t_max must be >= 0")
    mesh = qsq.mesh
    S_, M_ = mesh.operators()
    S = S_.matrix
    m = M_.matrix.diagonal()
    q = qsq.values
    sup_q = math.sqrt(float(np.max(q)))
    t0_threshold = math.inf if sup_q == 0.0 else T0_FACTOR / sup_q

    samples = []
    mono_violation = 0.0
    newton_fail_t = None
    fold_t = None
    status = "completed"

    def record(t, u_arr, rnorm, iters):
        nonlocal mono_violation
        solution = GaussSolution(ScalarField(u_arr, mesh), rnorm, iters)
        problem = GaussProblem(mesh, qsq, t)
        stab = f_stability(solution, problem)
        if samples and stab.is_F_stable and samples[-1].stability.is_F_stable:
            prev = samples[-1]
            if t > prev.t:
                mono_violation = max(
                    mono_violation,
                    float(np.max(solution.u.values - prev.solution.u.values)),
                )
        samples.append(RaySample(t, solution, stab))
        return stab

    # branch start: u = 0 solves the equation at t = 0 exactly
    stab = record(0.0, np.zeros(mesh.num_vertices), 0.0, 0)
    t_cur = 0.0
    u_cur = np.zeros(mesh.num_vertices)

    # ---- natural parameter phase ----
    dt = float(step)
    while stab.lambda_min >= stability_switch and t_cur < t_max - 1e-14:
        t_next = min(t_cur + dt, t_max)
        try:
            sol = solve(
                GaussProblem(mesh, qsq, t_next),
                initial_guess=ScalarField(u_cur, mesh),
                tol=tol,
            )
        except NonexistenceError:
            if newton_fail_t is None:
                newton_fail_t = t_next
            dt *= 0.5
            if dt < step / 2**10:
                status = "diverged"
                break
            continue
        t_cur = t_next
        u_cur = np.array(sol.u.values)
        stab = record(t_cur, u_cur, sol.residual_norm, sol.newton_iters)
    if status == "diverged" or (t_cur >= t_max - 1e-14 and stab.lambda_min > 0.0):
        return RayContinuation(
            samples, fold_t, status, t0_threshold, newton_fail_t, mono_violation
        )

    # ---- pseudo-arclength phase through and past the fold ----
    tan = (np.zeros(mesh.num_vertices), 1.0)
    tan = _tangent(S, m, q, u_cur, t_cur, tan)
    ds = float(step)
    lam_prev = stab.lambda_min
    post_fold = 0
    crossing = None  # (u, t, lam) bracketing states
    while post_fold < post_fold_samples and len(samples) < 4000:
        try:
            u_new, t_new, iters = _extended_solve(
                S, m, q, u_cur, t_cur, tan[0], tan[1], ds, tol
            )
        except (NonexistenceError, NumericalError):
            if newton_fail_t is None:
                newton_fail_t = t_cur + ds * tan[1]
            ds *= 0.5
            if ds < step / 2**12:
                status = "diverged"
                break
            continue
        if t_new > t_max + step:
            status = "completed"
            break
        rfin = _raw_residual(u_new, t_new**2 * q, S, m)
        stab_new = record(t_new, u_new, float(np.max(np.abs(rfin))), iters)
        if fold_t is None and lam_prev > 0.0 >= stab_new.lambda_min:
            crossing = ((u_cur, t_cur, lam_prev), (u_new, t_new, stab_new.lambda_min))
        lam_prev = stab_new.lambda_min
        tan = _tangent(S, m, q, u_new, t_new, tan)
        u_cur, t_cur = u_new, t_new
        if crossing is not None and fold_t is None:
            fold_t = _refine_fold(S, m, q, qsq, mesh, crossing, tol)
            status = "fold_detected"
        if fold_t is not None:
            post_fold += 1
            if t_cur < 0.5 * fold_t:
                break
    return RayContinuation(
        samples, fold_t, status, t0_threshold, newton_fail_t, mono_violation
    )


def _refine_fold(S, m, q, qsq, mesh, crossing, tol, iters=10):
    """Secant iteration in arclength on the eigenvalue zero crossing."""
    (ua, ta, la), (ub, tb, lb) = crossing

    def lam_at(u_arr, t):
        problem = GaussProblem(mesh, qsq, t)
        sol = GaussSolution(
            ScalarField(u_arr, mesh),
            float(np.max(np.abs(_raw_residual(u_arr, t**2 * q, S, m)))),
            0,
        )
        return f_stability(sol, problem).lambda_min

    best_t, best_lam = (ta, la) if abs(la) < abs(lb) else (tb, lb)
    for _ in range(iters):
        if lb == la:
            break
        # secant target measured as a fraction of the (a -> b) arclength step
        frac = la / (la - lb)
        frac = min(max(frac, 0.05), 0.95)
        du = ub - ua
        dtt = tb - ta
        ds = frac * math.sqrt(float(du @ du) + dtt**2)
        nrm = math.sqrt(float(du @ du) + dtt**2)
        tan_u, tan_t = du / nrm, dtt / nrm
        try:
            u_new, t_new, _ = _extended_solve(S, m, q, ua, ta, tan_u, tan_t, ds, tol)
        except (NonexistenceError, NumericalError):
            break
        lam = lam_at(u_new, t_new)
        if abs(lam) < abs(best_lam):
            best_t, best_lam = t_new, lam
        if lam > 0.0:
            ua, ta, la = u_new, t_new, lam
        else:
            ub, tb, lb = u_new, t_new, lam
        if abs(lam) < 1e-10:
            break
    return best_t
