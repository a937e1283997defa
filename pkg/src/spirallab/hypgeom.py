"""Numeric real-hyperbolic geometry in the hyperboloid model.

Points of H^n live on the upper sheet <x,x> = -1 of the Lorentz form
<x,y> = -x_0 y_0 + x_1 y_1 + ... + x_n y_n; boundary directions are future
null rays.  Totally geodesic subspaces are timelike linear spans, so
closest-point projection is Lorentz projection followed by normalization.

The module validates the closed form for the boundary distance seen from a
totally geodesic subspace,

    sqrt(sinh^2(rho/2) + sin^2(theta/2)),

against its defining limit, together with comparison bounds and the exact
exponential scaling under neighborhoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POINT_TOL = 1e-12
FRAME_TOL = 1e-10


class GeometryError(ValueError):
    pass


def minkowski_dot(x, y):
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def normalize_point(x):
    """Rescale a timelike vector onto the upper sheet."""
    s = minkowski_dot(x, x)
    if s >= 0:
        raise GeometryError("vector is not timelike")
    x = x / math.sqrt(-s)
    if x[0] < 0:
        x = -x
    return x


def normalize_null(x):
    """Scale a future null vector to time coordinate 1."""
    if x[0] <= 0:
        x = -x
    return x / x[0]


def hyp_dist(x, y) -> float:
    c = max(1.0, -minkowski_dot(x, y))
    return math.acosh(c)


def geodesic_point(p, u, t: float):
    """Point at arc length t along the unit-speed geodesic from p toward u."""
    return math.cosh(t) * p + math.sinh(t) * u


def ray_limit_direction(p, u):
    """Null direction of the endpoint of the ray from p with tangent u."""
    return normalize_null(p + u)


@dataclass(frozen=True)
class TotallyGeodesic:
    """Timelike span of an orthonormal frame (v0 timelike, v1..vk spacelike)."""

    frame: np.ndarray  # shape (k+1, n+1)

    def __post_init__(self):
        f = self.frame
        gram = np.array([[minkowski_dot(a, b) for b in f] for a in f])
        target = np.diag([-1.0] + [1.0] * (len(f) - 1))
        if np.max(np.abs(gram - target)) > FRAME_TOL:
            raise GeometryError("frame is not Lorentz-orthonormal")

    @property
    def k(self) -> int:
        return len(self.frame) - 1

    @property
    def basepoint(self):
        return self.frame[0]

    def span_project(self, x):
        """Lorentz-orthogonal component of x inside the span."""
        f = self.frame
        coeffs = np.array([minkowski_dot(x, v) for v in f])
        coeffs[0] = -coeffs[0]
        return coeffs @ f

    def dist_to(self, x) -> float:
        p = self.span_project(x)
        s = -minkowski_dot(p, p)
        if s <= 0:
            raise GeometryError("projection is not timelike")
        return math.acosh(max(1.0, math.sqrt(s)))


@dataclass(frozen=True)
class ProjectionData:
    foot: np.ndarray
    normal: np.ndarray  # unit normal direction, tangent along the whole span


def project_boundary(C: TotallyGeodesic, xi, tol: float = 1e-9) -> ProjectionData:
    """Foot and normal direction of a boundary point seen from C.

    The foot is the normalized span component; the normal is the leftover
    component, which is parallel along C, so no transport is needed.
    """
    xi = normalize_null(np.asarray(xi, dtype=float))
    P = C.span_project(xi)
    s = -minkowski_dot(P, P)
    if s <= tol:
        raise GeometryError("boundary point lies in the boundary of the subspace")
    foot = P / math.sqrt(s)
    Qc = xi - P
    qn = minkowski_dot(Qc, Qc)
    if qn <= tol:
        raise GeometryError("degenerate normal component")
    normal = Qc / math.sqrt(qn)
    return ProjectionData(foot, normal)


def busemann_along(C: TotallyGeodesic, xi, x) -> float:
    """Busemann-style potential log(-<x, xi>) with xi scaled to x0-contact."""
    xi = normalize_null(np.asarray(xi, dtype=float))
    ref = -minkowski_dot(C.basepoint, xi)
    return math.log(-minkowski_dot(x, xi) / ref)


def foot_by_descent(C: TotallyGeodesic, xi, sweeps: int = 40) -> np.ndarray:
    """Oracle: minimize the horoball potential over C.

    Coordinate-wise golden-section sweeps in the exponential chart locate the
    basin; Newton steps on the smooth convex potential then polish the
    minimizer to near machine precision.
    """
    gr = (math.sqrt(5) - 1) / 2
    coords = np.zeros(C.k)

    def point_at(c):
        tang = sum(ci * vi for ci, vi in zip(c, C.frame[1:]))
        norm = math.sqrt(max(minkowski_dot(tang, tang), 0.0))
        if norm < 1e-15:
            return C.basepoint
        return geodesic_point(C.basepoint, tang / norm, norm)

    def value(c):
        return busemann_along(C, xi, point_at(c))

    for _ in range(sweeps):
        for i in range(C.k):
            a, b = coords[i] - 2.0, coords[i] + 2.0
            c1 = b - gr * (b - a)
            c2 = a + gr * (b - a)
            for _ in range(40):
                t1, t2 = coords.copy(), coords.copy()
                t1[i], t2[i] = c1, c2
                if value(t1) < value(t2):
                    b, c2 = c2, c1
                    c1 = b - gr * (b - a)
                else:
                    a, c1 = c1, c2
                    c2 = a + gr * (b - a)
            coords[i] = (a + b) / 2

    # Newton polish; Richardson-extrapolated central gradients keep the
    # finite-difference noise floor near machine precision
    def grad_at(c, h):
        g = np.zeros(C.k)
        for i in range(C.k):
            e = np.zeros(C.k)
            e[i] = h
            g[i] = (value(c + e) - value(c - e)) / (2 * h)
        return g

    hh = 1e-3
    for _ in range(24):
        grad = (4 * grad_at(coords, hh / 2) - grad_at(coords, hh)) / 3
        f0 = value(coords)
        hess = np.zeros((C.k, C.k))
        for i in range(C.k):
            ei = np.zeros(C.k)
            ei[i] = hh
            hess[i, i] = (value(coords + ei) - 2 * f0 + value(coords - ei)) / hh**2
            for j in range(i + 1, C.k):
                ej = np.zeros(C.k)
                ej[j] = hh
                fpp = value(coords + ei + ej)
                fpm = value(coords + ei - ej)
                fmp = value(coords - ei + ej)
                fmm = value(coords - ei - ej)
                hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4 * hh**2)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        coords = coords - step
        if np.max(np.abs(step)) < 1e-13:
            break
    return point_at(coords)


def rho_theta(C: TotallyGeodesic, xi, eta) -> tuple[float, float]:
    """Foot separation and normal angle of two boundary points."""
    px, py = project_boundary(C, xi), project_boundary(C, eta)
    rho = hyp_dist(px.foot, py.foot)
    c = minkowski_dot(px.normal, py.normal)
    theta = math.acos(min(1.0, max(-1.0, c)))
    return rho, theta


def gap_closed_form(rho: float, theta: float) -> float:
    """sqrt(sinh^2(rho/2) + sin^2(theta/2)); equals
    (1/2) sqrt(e^rho + e^-rho - 2 cos theta)."""
    if rho < 0 or not (0 <= theta <= math.pi + 1e-12):
        raise GeometryError("rho >= 0 and theta in [0, pi] required")
    return math.sqrt(math.sinh(rho / 2) ** 2 + math.sin(theta / 2) ** 2)


def boundary_gap(C: TotallyGeodesic, xi, eta) -> float:
    return gap_closed_form(*rho_theta(C, xi, eta))


def gap_limit(C: TotallyGeodesic, xi, eta, t: float) -> float:
    """Defining limit e^{d(xi_t, eta_t)/2 - t} along rays from the feet."""
    px, py = project_boundary(C, xi), project_boundary(C, eta)
    xt = geodesic_point(px.foot, px.normal, t)
    yt = geodesic_point(py.foot, py.normal, t)
    return math.exp(0.5 * hyp_dist(xt, yt) - t)


def gap_limit_rebased(C: TotallyGeodesic, xi, eta, t: float, bx, by) -> float:
    """Limit formula along rays from arbitrary base points bx, by:
    e^{(d(xi_t,eta_t) - d(xi_t, foot_xi) - d(eta_t, foot_eta))/2}."""
    xi = normalize_null(np.asarray(xi, dtype=float))
    eta = normalize_null(np.asarray(eta, dtype=float))
    px, py = project_boundary(C, xi), project_boundary(C, eta)

    def ray_from(b, target):
        u = target / (-minkowski_dot(target, b)) - b
        u = u / math.sqrt(minkowski_dot(u, u))
        return geodesic_point(b, u, t)

    xt, yt = ray_from(bx, xi), ray_from(by, eta)
    s = hyp_dist(xt, yt) - hyp_dist(xt, px.foot) - hyp_dist(yt, py.foot)
    return math.exp(0.5 * s)


def gap_neighborhood(C: TotallyGeodesic, xi, eta, eps: float, t: float) -> float:
    """Gap seen from the eps-neighborhood of C: same rays, re-based at the
    points advanced eps along the normals."""
    px, py = project_boundary(C, xi), project_boundary(C, eta)
    bx = geodesic_point(px.foot, px.normal, eps)
    by = geodesic_point(py.foot, py.normal, eps)
    xt = geodesic_point(px.foot, px.normal, t)
    yt = geodesic_point(py.foot, py.normal, t)
    s = hyp_dist(xt, yt) - hyp_dist(xt, bx) - hyp_dist(yt, by)
    return math.exp(0.5 * s)


def visual_distance(x, xi, eta) -> float:
    """Visual metric at x: sqrt(-<xi, eta>/2) after <xi,x> = <eta,x> = -1."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi = xi / (-minkowski_dot(xi, x))
    eta = eta / (-minkowski_dot(eta, x))
    return math.sqrt(max(0.0, -minkowski_dot(xi, eta) / 2))


def dist_to_boundary_line(C: TotallyGeodesic, xi, eta) -> float:
    """d(C, geodesic line (xi, eta)), in closed form.

    Along the line (e^s xi + e^-s eta)/w the squared cosh-distance to C is a
    Laurent polynomial in e^{2s}; its minimum is b + 2 sqrt(ac)."""
    xi = normalize_null(np.asarray(xi, dtype=float))
    eta = normalize_null(np.asarray(eta, dtype=float))
    w2 = -2 * minkowski_dot(xi, eta)
    if w2 <= 0:
        raise GeometryError("boundary points must be distinct")
    Pxi, Peta = C.span_project(xi), C.span_project(eta)
    a = -minkowski_dot(Pxi, Pxi)
    c = -minkowski_dot(Peta, Peta)
    b = -2 * minkowski_dot(Pxi, Peta)
    m = (b + 2 * math.sqrt(max(a * c, 0.0))) / w2
    if m <= 1.0:
        return 0.0
    return math.acosh(math.sqrt(m))


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_subspace(rng: np.random.Generator, n: int, k: int) -> TotallyGeodesic:
    """Lorentz-orthonormal (k+1)-frame in R^{n,1} by Gram-Schmidt."""
    for _ in range(200):
        try:
            vecs = []
            v0 = rng.normal(size=n + 1)
            v0[0] = abs(v0[0]) + 1.5  # make it timelike
            v0 = normalize_point(v0)
            vecs.append(v0)
            while len(vecs) < k + 1:
                w = rng.normal(size=n + 1)
                for v in vecs:
                    sgn = -1.0 if v is vecs[0] else 1.0
                    w = w - sgn * minkowski_dot(w, v) * v
                s = minkowski_dot(w, w)
                if s < 1e-6:
                    raise GeometryError("degenerate draw")
                vecs.append(w / math.sqrt(s))
            return TotallyGeodesic(np.array(vecs))
        except GeometryError:
            continue
    raise GeometryError("could not draw a frame")


def random_boundary_point(rng: np.random.Generator, n: int):
    u = rng.normal(size=n)
    u = u / np.linalg.norm(u)
    return np.concatenate(([1.0], u))


def lorentz_map_fixing(C: TotallyGeodesic, rng: np.random.Generator) -> np.ndarray:
    """A Lorentz matrix preserving the subspace setwise: rotate the spacelike
    frame vectors inside the span and an orthonormal frame of the complement."""
    n1 = C.frame.shape[1]
    comp = []
    for _ in range(n1 - len(C.frame)):
        w = rng.normal(size=n1)
        for v in list(C.frame) + comp:
            sgn = -1.0 if np.allclose(v, C.frame[0]) else 1.0
            w = w - sgn * minkowski_dot(w, v) * v
        w = w / math.sqrt(minkowski_dot(w, w))
        comp.append(w)
    comp = np.array(comp) if comp else np.zeros((0, n1))

    def rotation(m):
        if m == 0:
            return np.zeros((0, 0))
        q, _ = np.linalg.qr(rng.normal(size=(m, m)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return q

    rs = rotation(C.k)  # rotate spacelike span directions
    rc = rotation(len(comp))  # rotate the normal directions
    old = np.vstack([C.frame, comp])  # rows: v0, span, complement
    new = np.vstack(
        [C.frame[0:1], rs @ C.frame[1:], rc @ comp if len(comp) else comp]
    )
    # Lorentz-dual bases turn the frame change into an ambient matrix
    eta = np.diag([-1.0] + [1.0] * (n1 - 1))
    signs = np.diag([-1.0] + [1.0] * (n1 - 1))[: len(old), : len(old)]
    # map = sum_i sign_i new_i old_i^T eta
    M = np.zeros((n1, n1))
    sgn = [-1.0] + [1.0] * (len(old) - 1)
    for s, nv, ov in zip(sgn, new, old):
        M += s * np.outer(nv, ov) @ eta
    return M
