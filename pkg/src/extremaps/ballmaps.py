"""Affine maps of the Euclidean unit ball.

For phi(x) = A x + b write A = O1 diag(alpha) O2 (SVD), y = O2 x and
p = O1^T b.  Then ||phi(x)||^2 = sum_i (alpha_i y_i + p_i)^2, and on the unit
sphere a maximizer satisfies

    (alpha_i^2 - lam) y_i + alpha_i p_i = 0,    lam >= alpha_1^2.

If lam > alpha_1^2 then y_i = alpha_i p_i / (lam - alpha_i^2) and lam is the
unique root of the secular equation

    G(lam) = sum_i (alpha_i p_i)^2 / (lam - alpha_i^2)^2 = 1

on (alpha_1^2, inf), where G decreases monotonically.  Otherwise lam =
alpha_1^2, the offsets p_i vanish on the top singular cluster, and the
maximizers fill a sphere of radius sqrt(1 - G_rest) inside that cluster's
subspace (two points if the cluster is one-dimensional).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError, NotBallPositive
from .states import affine_rank

CLUSTER_RTOL = 1e-10
CONTACT_RADIUS = 1e-4
DEGENERATE_RADIUS = 1e-7
ENDPOINT_MARGIN = 1e-3


@dataclass(frozen=True)
class AffineBallMap:
    linear: np.ndarray
    offset: np.ndarray = None

    def __post_init__(self):
        a = np.array(self.linear, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"linear part must be square, got shape {a.shape}")
        b = np.zeros(a.shape[0]) if self.offset is None else np.array(self.offset, dtype=float).ravel()
        if b.shape != (a.shape[0],):
            raise InputError(f"offset must have length {a.shape[0]}, got {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InputError("affine map has non-finite entries")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, x):
        return np.asarray(x) @ self.linear.T + self.offset


@dataclass(frozen=True)
class SecularSolution:
    """Structure of the maximizer set of ||phi(x)|| on the unit sphere (rotated coordinates)."""

    alphas: np.ndarray
    p: np.ndarray
    rot_in: np.ndarray  # O2: y = rot_in @ x
    multiplier: float
    fixed: np.ndarray  # y on coordinates outside the free block (zeros inside)
    free: np.ndarray  # indices of the free top cluster; empty if isolated
    radius: float  # norm of y on the free block

    def point(self, direction=None) -> np.ndarray:
        y = self.fixed.copy()
        if self.free.size and self.radius > 0:
            d = np.zeros(self.free.size) if direction is None else np.asarray(direction, dtype=float)
            if not np.any(d):
                d = np.zeros(self.free.size)
                d[0] = 1.0
            y[self.free] = self.radius * d / np.linalg.norm(d)
        return self.rot_in.T @ y


def _secular_root(a, c, lo):
    """Root of G(lam) = sum c_i^2/(lam - a_i)^2 = 1 on (lo, inf).

    Newton on 1 - 1/sqrt(G), which is nearly linear in lam, safeguarded by
    the bracket (lo, lo + ||c||].
    """
    hi = lo + float(np.linalg.norm(c))
    lam = hi

    def h(l):
        d = l - a
        g = np.sum((c / d) ** 2)
        dg = -2 * np.sum(c**2 / d**3)
        s = np.sqrt(g)
        return 1 - 1 / s, dg / (2 * s**3)

    for _ in range(200):
        val, der = h(lam)
        if abs(val) <= 1e-15:
            break
        # h decreases in lam: positive means lam is left of the root
        if val > 0:
            lo = lam
        else:
            hi = lam
        step = lam - val / der if der != 0 else np.nan
        lam = step if lo < step < hi else (lo + hi) / 2
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(hi)):
            break
    return lam


def solve_secular(phi: AffineBallMap) -> SecularSolution:
    u, alpha, vh = np.linalg.svd(phi.linear)
    p = u.T @ phi.offset
    a = alpha**2
    c = alpha * p
    top = a[0]
    cluster = np.flatnonzero(alpha >= alpha[0] - CLUSTER_RTOL * max(1.0, alpha[0]))
    rest = np.setdiff1d(np.arange(len(alpha)), cluster)
    cscale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    if np.all(np.abs(c[cluster]) <= 1e-14 * cscale):
        # candidate degenerate case: lam = alpha_1^2 if the rest fits inside the sphere
        y_rest = c[rest] / (top - a[rest])
        g_rest = float(np.sum(y_rest**2))
        if g_rest <= 1:
            y = np.zeros_like(alpha)
            y[rest] = y_rest
            radius = float(np.sqrt(1 - g_rest))
            if radius <= DEGENERATE_RADIUS:
                # tangential contact: the maximizer sphere shrinks to a point
                y /= np.linalg.norm(y)
                return SecularSolution(alpha, p, vh, float(top), y, np.array([], dtype=int), 0.0)
            return SecularSolution(alpha, p, vh, float(top), y, cluster, radius)
        a_c, c_c = a.copy(), c.copy()
        c_c[cluster] = 0
    else:
        a_c, c_c = a, c
    lam = _secular_root(a_c, c_c, top)
    y = c_c / (lam - a_c)
    y /= np.linalg.norm(y)
    return SecularSolution(alpha, p, vh, float(lam), y, np.array([], dtype=int), 0.0)


def max_norm_on_sphere(phi: AffineBallMap, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """max ||A x + b|| over unit x, with a maximizer."""
    sol = solve_secular(phi)
    x = sol.point()
    return float(np.linalg.norm(phi(x))), x


def stationarity_residual(phi: AffineBallMap, x, multiplier: float) -> float:
    """|| A^T (A x + b) - lam x ||, the Lagrange condition in unrotated coordinates."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(phi.linear.T @ phi(x) - multiplier * x))


def cluster_points(points, radius: float = CONTACT_RADIUS) -> list[np.ndarray]:
    """Greedy clustering; returns the first point of each cluster."""
    centers: list[np.ndarray] = []
    for q in points:
        if all(np.linalg.norm(q - c) > radius for c in centers):
            centers.append(q)
    return centers


@dataclass
class ContactReport:
    contact_points: list
    affine_rank: int
    is_orthogonal: bool
    max_norm: float
    clusters: list = field(default_factory=list)
    multiplier: float | None = None

    def as_dict(self) -> dict:
        return {
            "contact_points": [np.asarray(q).tolist() for q in self.contact_points],
            "affine_rank": self.affine_rank,
            "is_orthogonal": self.is_orthogonal,
            "max_norm": self.max_norm,
            "clusters": [np.asarray(q).tolist() for q in self.clusters],
            "multiplier": self.multiplier,
        }


def is_orthogonal_map(phi: AffineBallMap, tol: float = 1e-9) -> bool:
    a = phi.linear
    return bool(np.linalg.norm(a.T @ a - np.eye(phi.dim), 2) <= tol and np.linalg.norm(phi.offset) <= tol)


def _ascend_directions(phi, sol, starts, iters=50):
    """Projected gradient ascent of ||phi||^2 from each start; returns free-block directions."""
    x = starts.copy()
    step = 0.5 / max(1.0, float(sol.alphas[0]) ** 2)
    for _ in range(iters):
        grad = phi(x) @ phi.linear
        x = x + step * grad
        x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = x @ sol.rot_in.T
    return y[:, sol.free]


def contact_points(phi: AffineBallMap, tol: float = 1e-9, samples: int = 200, seed: int = 0) -> ContactReport:
    """Unit vectors mapped onto the unit sphere.

    Isolated contacts come straight from the secular solution.  When the
    maximizers form a continuum, ``samples`` seeded starts are pushed uphill
    by projected gradient ascent and then placed exactly on the maximizer
    sphere, which spreads the reported contacts over the whole continuum.
    """
    sol = solve_secular(phi)
    mx = float(np.linalg.norm(phi(sol.point())))
    if mx > 1 + tol:
        raise NotBallPositive(mx)
    ortho = is_orthogonal_map(phi, tol)
    if mx < 1 - tol:
        return ContactReport([], 0, ortho, mx, [], sol.multiplier)
    if sol.free.size == 0 or sol.radius == 0:
        pts = [sol.point()]
    elif sol.free.size == 1:
        pts = [sol.point([1.0]), sol.point([-1.0])]
    else:
        rng = np.random.default_rng(seed)
        starts = rng.standard_normal((samples, phi.dim))
        starts /= np.linalg.norm(starts, axis=1, keepdims=True)
        dirs = _ascend_directions(phi, sol, starts)
        pts = [sol.point(d) for d in dirs if np.linalg.norm(d) > 1e-12]
    pts = [q for q in pts if abs(np.linalg.norm(phi(q)) - 1) <= tol]
    rank = affine_rank(pts, 1e-9) if pts else 0
    return ContactReport(pts, rank, ortho, mx, cluster_points(pts), sol.multiplier)


class BallExtremality(NamedTuple):
    fix_extreme: bool
    consistent_with_theorem3: bool


def ball_extremality_report(phi: AffineBallMap, tol: float = 1e-9, samples: int = 200, seed: int = 0) -> BallExtremality:
    """fix_extreme iff n+1 affinely independent contacts; consistency means fix_extreme implies orthogonal."""
    rep = contact_points(phi, tol, samples, seed)
    fix = rep.affine_rank >= phi.dim + 1
    return BallExtremality(fix, (not fix) or rep.is_orthogonal)


# --- planar example ----------------------------------------------------------------


def _ab(x):
    x = np.asarray(x, dtype=float)
    return (1 - x) / 2, (1 + x) / 2


def planar_f(x):
    a, b = _ab(x)
    return a**2 * np.sqrt(b) + 2 * np.sqrt(a) * b**2.5 + a * b


def planar_g(x):
    """g(x) = f(-x)/2: the upper boundary of T(S)."""
    a, b = _ab(x)
    return 0.5 * b**2 * np.sqrt(a) + np.sqrt(b) * a**2.5 + a * b / 2


def _monomial_d2(a, b, p, q):
    # d^2/dx^2 of a^p b^q with a = (1-x)/2, b = (1+x)/2
    out = 0.0
    if p not in (0, 1):
        out = out + p * (p - 1) / 4 * a ** (p - 2) * b**q
    if p != 0 and q != 0:
        out = out - p * q / 2 * a ** (p - 1) * b ** (q - 1)
    if q not in (0, 1):
        out = out + q * (q - 1) / 4 * a**p * b ** (q - 2)
    return out


def planar_f_second_derivative(x):
    """Closed-form f''; unbounded at x = +-1."""
    a, b = _ab(x)
    return _monomial_d2(a, b, 2, 0.5) + 2 * _monomial_d2(a, b, 0.5, 2.5) + _monomial_d2(a, b, 1, 1)


def planar_transform(points, alpha: float = 1.0):
    """(x, y) -> (-x, alpha * y / 2)."""
    pts = np.asarray(points, dtype=float)
    return np.stack([-pts[..., 0], alpha * pts[..., 1] / 2], axis=-1)


class PlanarCheck(NamedTuple):
    f_concave: bool
    f_ge_alpha_g_everywhere: bool
    min_value: float
    argmin: float


def planar_example_check(alpha: float = 1.0, grid: int = 10_000) -> PlanarCheck:
    if grid < 1000:
        raise InputError("grid must have at least 1000 points")
    if not alpha > 0:
        raise InputError("alpha must be positive")
    x = np.linspace(-1.0, 1.0, grid)
    f = planar_f(x)
    diff = f - alpha * planar_g(x)
    d2 = f[2:] - 2 * f[1:-1] + f[:-2]
    inner = np.abs(x[1:-1]) <= 1 - ENDPOINT_MARGIN
    k = int(np.argmin(diff))
    return PlanarCheck(
        f_concave=bool(np.all(d2[inner] <= 1e-9)),
        f_ge_alpha_g_everywhere=bool(diff.min() >= -1e-12),
        min_value=float(diff[k]),
        argmin=float(x[k]),
    )
