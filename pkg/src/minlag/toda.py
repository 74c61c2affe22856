"""Chart-level Toda system and its flat connection.

Local data for a non-degenerate minimal surface is a pair of positive fields
u1, u2 (derivative norms of the two holomorphic parts of the map) and a
complex field Q (local coefficient of the cubic differential) on a planar
chart z = x + iy.  The induced metric is (u1^2 + u2^2) |dz|^2 and the coupled
equations

    Z Zbar log u1^2 = 2 u1^2 + |Q|^2/(u1^2 u2^2) - u2^2
    Z Zbar log u2^2 = 2 u2^2 + |Q|^2/(u1^2 u2^2) - u1^2

are equivalent to projective flatness of the connection assembled below.
All derivatives are second-order central differences with Z Zbar equal to a
quarter of the flat Laplacian; a one-cell boundary ring is excluded, so every
chart-level operation returns fields on a slightly shrunken grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import AccuracyError, DomainError

ETA = np.diag([1.0, 1.0, -1.0]).astype(complex)


# ---------------------------------------------------------------------------
# Grids and chart data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartGrid:
    """Uniform rectangle [x0, x1] x [y0, y1] with nx * ny nodes."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs at least 3 nodes per direction")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("degenerate grid rectangle")

    @property
    def hx(self):
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def h(self):
        return max(self.hx, self.hy)

    def points(self):
        """Complex coordinates, shape (ny, nx), row index along y."""
        x = self.x0 + self.hx * np.arange(self.nx)
        y = self.y0 + self.hy * np.arange(self.ny)
        return x[None, :] + 1j * y[:, None]

    def interior(self):
        return ChartGrid(
            self.x0 + self.hx,
            self.x1 - self.hx,
            self.y0 + self.hy,
            self.y1 - self.hy,
            self.nx - 2,
            self.ny - 2,
        )

    def max_abs(self):
        corners = [self.x0 + 1j * self.y0, self.x0 + 1j * self.y1,
                   self.x1 + 1j * self.y0, self.x1 + 1j * self.y1]
        return max(abs(c) for c in corners)


@dataclass(frozen=True)
class TodaChartData:
    grid: ChartGrid
    u1: np.ndarray
    u2: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        shape = (self.grid.ny, self.grid.nx)
        for name in ("u1", "u2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
            if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} must be positive and finite on the chart")
            object.__setattr__(self, name, arr)
        q = np.asarray(self.Q, dtype=complex)
        if q.shape != shape:
            raise ValueError(f"Q must have shape {shape}")
        object.__setattr__(self, "Q", q)


def fuchsian_chart_data(grid, centre=0.0):
    """Totally geodesic Lagrangian data: u1 = u2 = s with
    s^2 = 2 |h'|^2 / (1 - |h|^2)^2 for the disc automorphism h moving
    ``centre`` to the origin, and Q = 0.  The induced metric 2 s^2 |dz|^2 is
    the curvature -1 disc metric, so the chart equations hold exactly.
    """
    if grid.max_abs() >= 1.0:
        raise DomainError("disc-model data needs the grid strictly inside the unit disc")
    z = grid.points()
    a = complex(centre)
    h = (z - a) / (1.0 - np.conj(a) * z)
    dh = (1.0 - abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2
    s2 = 2.0 * np.abs(dh) ** 2 / (1.0 - np.abs(h) ** 2) ** 2
    s = np.sqrt(s2)
    return TodaChartData(grid, s, s, np.zeros_like(z))


# ---------------------------------------------------------------------------
# Central differences (interior only)
# ---------------------------------------------------------------------------


def _dx(f, hx):
    return (f[1:-1, 2:] - f[1:-1, :-2]) / (2.0 * hx)


def _dy(f, hy):
    return (f[2:, 1:-1] - f[:-2, 1:-1]) / (2.0 * hy)


def _zzbar(f, hx, hy):
    fxx = (f[1:-1, 2:] - 2.0 * f[1:-1, 1:-1] + f[1:-1, :-2]) / hx**2
    fyy = (f[2:, 1:-1] - 2.0 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / hy**2
    return 0.25 * (fxx + fyy)


def _z(f, hx, hy):
    return 0.5 * (_dx(f, hx) - 1j * _dy(f, hy))


# ---------------------------------------------------------------------------
# Toda residuals
# ---------------------------------------------------------------------------


def toda_residuals(data):
    """Residual fields of the two chart equations on the interior grid."""
    g = data.grid
    u1sq = data.u1**2
    u2sq = data.u2**2
    qsq = np.abs(data.Q) ** 2
    coupling = (qsq / (u1sq * u2sq))[1:-1, 1:-1]
    r1 = _zzbar(np.log(u1sq), g.hx, g.hy) - (
        2.0 * u1sq[1:-1, 1:-1] + coupling - u2sq[1:-1, 1:-1]
    )
    r2 = _zzbar(np.log(u2sq), g.hx, g.hy) - (
        2.0 * u2sq[1:-1, 1:-1] + coupling - u1sq[1:-1, 1:-1]
    )
    return r1, r2


# ---------------------------------------------------------------------------
# Flat connection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionPair:
    """dz and dzbar connection coefficients on the interior grid.

    The reality condition A_zbar = -eta A_z^H eta (eta = diag(1,1,-1)) holds
    pointwise by construction, so the connection takes values in u(2,1).
    """

    grid: ChartGrid
    A_z: np.ndarray  # (ny, nx, 3, 3) complex
    A_zbar: np.ndarray

    def reality_defect(self):
        expected = -np.einsum(
            "ij,...kj,kl->...il", ETA, np.conj(self.A_z), ETA
        )
        return float(np.max(np.abs(self.A_zbar - expected)))


def assemble_connection(data):
    """Connection coefficients in the adapted frame:

        A_z = [[Z log u1, 0, u1], [Q/(u1 u2), -Z log u2, 0], [0, u2, 0]]

    with A_zbar from the u(2,1) reality condition.  (In particular the upper
    2x2 block of A_zbar carries the dbar operator of the holomorphic
    structure and the remaining entries are the adjoint of the dz-linear part;
    the frame relation Zbar f0 = u2 f2 appears as A_zbar[.,2] = (0, u2, 0).)
    """
    g = data.grid
    hx, hy = g.hx, g.hy
    zlogu1 = _z(np.log(data.u1), hx, hy)
    zlogu2 = _z(np.log(data.u2), hx, hy)
    u1 = data.u1[1:-1, 1:-1]
    u2 = data.u2[1:-1, 1:-1]
    q = data.Q[1:-1, 1:-1]
    ny, nx = u1.shape
    A = np.zeros((ny, nx, 3, 3), dtype=complex)
    A[..., 0, 0] = zlogu1
    A[..., 0, 2] = u1
    A[..., 1, 0] = q / (u1 * u2)
    A[..., 1, 1] = -zlogu2
    A[..., 2, 1] = u2
    A_zbar = -np.einsum("ij,...kj,kl->...il", ETA, np.conj(A), ETA)
    return ConnectionPair(g.interior(), A, A_zbar)


def flatness_residual(conn):
    """Pointwise Frobenius norm of the curvature
    F = d_z A_zbar - d_zbar A_z + [A_z, A_zbar] on the interior of the
    connection grid."""
    g = conn.grid
    hx, hy = g.hx, g.hy
    dz_Azbar = 0.5 * (_dx(conn.A_zbar, hx) - 1j * _dy(conn.A_zbar, hy))
    dzbar_Az = 0.5 * (_dx(conn.A_z, hx) + 1j * _dy(conn.A_z, hy))
    Az = conn.A_z[1:-1, 1:-1]
    Azb = conn.A_zbar[1:-1, 1:-1]
    comm = np.einsum("...ij,...jk->...ik", Az, Azb) - np.einsum(
        "...ij,...jk->...ik", Azb, Az
    )
    F = dz_Azbar - dzbar_Az + comm
    return np.sqrt(np.sum(np.abs(F) ** 2, axis=(-2, -1)))


# ---------------------------------------------------------------------------
# Holonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolonomyResult:
    matrix: np.ndarray
    loop: np.ndarray
    step_count: int

    def scale(self):
        """Real constant c with M^H eta M approximately c * eta."""
        prod = self.matrix.conj().T @ ETA @ self.matrix
        return float(np.real(np.trace(ETA @ prod)) / 3.0)

    def unitarity_deviation(self):
        prod = self.matrix.conj().T @ ETA @ self.matrix
        return float(np.max(np.abs(prod - self.scale() * ETA)))


def _bilinear_matrix(conn, field, z):
    g = conn.grid
    fx = (z.real - g.x0) / g.hx
    fy = (z.imag - g.y0) / g.hy
    if not (0.0 <= fx <= g.nx - 1 and 0.0 <= fy <= g.ny - 1):
        raise DomainError(f"loop point {z} outside the connection grid")
    i = min(int(fx), g.nx - 2)
    j = min(int(fy), g.ny - 2)
    tx = fx - i
    ty = fy - j
    return (
        (1 - tx) * (1 - ty) * field[j, i]
        + tx * (1 - ty) * field[j, i + 1]
        + (1 - tx) * ty * field[j + 1, i]
        + tx * ty * field[j + 1, i + 1]
    )


def holonomy(conn, loop, steps):
    """Path-ordered parallel transport around a closed polyline.

    Midpoint matrix exponentials of -(A_z dz + A_zbar dzbar) accumulate
    left-to-right along the loop; each factor lies in U(2,1) because the
    connection is pointwise u(2,1), so M^H eta M = c eta up to the integrator
    tolerance O(steps^-2).
    """
    steps = int(steps)
    if steps < 100:
        raise ValueError("need at least 100 integration steps")
    pts = np.asarray(loop, dtype=complex)
    if len(pts) < 2:
        raise ValueError("loop needs at least two points")
    if abs(pts[0] - pts[-1]) > 0:
        pts = np.append(pts, pts[0])
    seg_len = np.abs(np.diff(pts))
    total = float(seg_len.sum())
    if total == 0.0:
        raise ValueError("degenerate loop")
    # distribute steps proportionally to segment length, at least 1 each
    counts = np.maximum(1, np.round(steps * seg_len / total).astype(int))
    M = np.eye(3, dtype=complex)
    for (a, b, n) in zip(pts[:-1], pts[1:], counts):
        ts = np.linspace(0.0, 1.0, n + 1)
        zs = a + (b - a) * ts
        for z0, z1 in zip(zs[:-1], zs[1:]):
            zm = 0.5 * (z0 + z1)
            dz = z1 - z0
            Az = _bilinear_matrix(conn, conn.A_z, zm)
            Azb = _bilinear_matrix(conn, conn.A_zbar, zm)
            omega = Az * dz + Azb * np.conj(dz)
            M = expm(-omega) @ M
    result = HolonomyResult(M, pts, int(counts.sum()))
    tol = max(1e-6, 10.0 / steps**2)
    if result.unitarity_deviation() > tol * max(1.0, np.abs(M).max() ** 2):
        raise AccuracyError(
            f"holonomy unitarity defect {result.unitarity_deviation():.3e} "
            f"exceeds tolerance at {steps} steps"
        )
    return result


# ---------------------------------------------------------------------------
# Kahler angle, curvatures, Gauss transform, circle action
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KahlerReport:
    cos_theta: np.ndarray  # full grid
    omega_density: np.ndarray  # full grid, coefficient of dx ^ dy
    tan_identity_residual: np.ndarray  # interior grid


def kahler_report(data):
    """Kahler angle diagnostics.

    cos(theta) = (u1^2 - u2^2)/(u1^2 + u2^2); the pulled-back form has
    density u1^2 - u2^2.  The residual checks
    Z Zbar log(u2^2/u1^2) = 3 (u2^2 - u1^2), which is also exactly the
    difference of the two chart equations.
    """
    g = data.grid
    u1sq = data.u1**2
    u2sq = data.u2**2
    cos_theta = (u1sq - u2sq) / (u1sq + u2sq)
    omega_density = u1sq - u2sq
    res = _zzbar(np.log(u2sq / u1sq), g.hx, g.hy) - 3.0 * (
        u2sq[1:-1, 1:-1] - u1sq[1:-1, 1:-1]
    )
    return KahlerReport(cos_theta, omega_density, res)


@dataclass(frozen=True)
class CurvatureReport:
    kappa_gamma: np.ndarray
    kappa_perp: np.ndarray
    identity_residual: np.ndarray


def curvature_report(data):
    """Gaussian and normal curvature of the chart data, plus the residual of

        kappa_perp - kappa_gamma = 2 (1 + |Q/(g1 g2)|_g |Q|_g)

    with |Q|_g = 2 sqrt(2) |Q| (u1^2+u2^2)^{-3/2} and
    |Q/(g1 g2)|_g = |Q| (u1^2+u2^2)^{1/2} / (sqrt(2) u1^2 u2^2).
    The residual vanishes identically for data satisfying both chart
    equations; on smooth near-solutions it is O(h^2).
    """
    g = data.grid
    u1sq = data.u1**2
    u2sq = data.u2**2
    lam = u1sq + u2sq
    sin2 = 4.0 * u1sq * u2sq / lam**2
    if np.any(sin2 <= 0.0):
        raise DomainError("sin(theta) vanishes in the chart (complex point)")
    lam_i = lam[1:-1, 1:-1]
    kappa_gamma = -(2.0 / lam_i) * _zzbar(np.log(lam), g.hx, g.hy)
    kappa_perp = (2.0 / lam_i) * _zzbar(np.log(sin2), g.hx, g.hy) - kappa_gamma
    absq = np.abs(data.Q)[1:-1, 1:-1]
    norm_q = 2.0 * math.sqrt(2.0) * absq / lam_i**1.5
    norm_q_over = absq * np.sqrt(lam_i) / (math.sqrt(2.0) * (u1sq * u2sq)[1:-1, 1:-1])
    identity_residual = (kappa_perp - kappa_gamma) - 2.0 * (1.0 + norm_q * norm_q_over)
    return CurvatureReport(kappa_gamma, kappa_perp, identity_residual)


def gauss_transform_metric(data):
    """Induced metric density |Q|^2/(u1^2 u2^2) - u2^2 of the second Gauss
    transform; the transform is timelike iff this is negative everywhere."""
    m = np.abs(data.Q) ** 2 / (data.u1**2 * data.u2**2) - data.u2**2
    return m, bool(np.all(m < 0.0))


def circle_action(data, psi):
    """Phase rotation Q -> e^{2 i psi} Q; both chart residuals depend only on
    |Q| and are therefore invariant."""
    return TodaChartData(data.grid, data.u1, data.u2, np.exp(2j * psi) * data.Q)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def chart_to_json(data):
    g = data.grid
    return {
        "grid": {"x0": g.x0, "x1": g.x1, "y0": g.y0, "y1": g.y1, "nx": g.nx, "ny": g.ny},
        "u1": data.u1.ravel().tolist(),
        "u2": data.u2.ravel().tolist(),
        "Q_re": data.Q.real.ravel().tolist(),
        "Q_im": data.Q.imag.ravel().tolist(),
    }


def chart_from_json(doc):
    gd = doc["grid"]
    grid = ChartGrid(gd["x0"], gd["x1"], gd["y0"], gd["y1"], int(gd["nx"]), int(gd["ny"]))
    shape = (grid.ny, grid.nx)
    u1 = np.array(doc["u1"], dtype=float).reshape(shape)
    u2 = np.array(doc["u2"], dtype=float).reshape(shape)
    q = np.array(doc["Q_re"], dtype=float).reshape(shape) + 1j * np.array(
        doc["Q_im"], dtype=float
    ).reshape(shape)
    return TodaChartData(grid, u1, u2, q)
