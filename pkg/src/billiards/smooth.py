"""Billiards in smooth strictly convex 2D tables at small base angle.

The *base angle* of a chord is the angle it makes with the boundary tangent
at its launch point. For a strictly convex table with curvature bounded
between positive constants, a trajectory launched at a small base angle
``alpha`` stays in a boundary layer: chord lengths are bounded below by a
constant times ``alpha``, the base angle changes by at most a constant times
``alpha^2`` per bounce, and the whole trajectory remains within a constant
times ``alpha^2`` of the boundary. On the unit circle everything is exact:
the angle is conserved, every chord has length ``2*sin(alpha)``, and the
sagitta (the deepest the chord dips away from the arc) is ``1 - cos(alpha)``.

Tables expose exact local geometry (point, tangent, curvature) and a
``ray_exit`` solved in closed form for conics and by sign-change bracketing
plus bisection (to 1e-12) for generic curves. The experiment helpers run
bounce sequences across a ladder of launch angles and fit log-log slopes, so
the quadratic laws show up as measured exponents near two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = [
    "SmoothTable",
    "Circle",
    "Ellipse",
    "PerturbedCircle",
    "ChordStep",
    "smooth_bounce",
    "BounceRun",
    "base_angle_run",
    "chord_deviation",
    "ConvergenceReport",
    "boundary_convergence_experiment",
    "LawsReport",
    "verify_base_angle_laws",
    "loglog_slope",
]


class SmoothTable:
    """Strictly convex planar table, boundary parametrized CCW by ``theta``."""

    name = "table"

    # subclasses implement: point, velocity, curvature, implicit, ray_exit,
    # theta_of_point

    def point(self, theta: float) -> tuple[float, float]:
        raise NotImplementedError

    def velocity(self, theta: float) -> tuple[float, float]:
        """Derivative of the parametrization (not normalized)."""
        raise NotImplementedError

    def curvature(self, theta: float) -> float:
        raise NotImplementedError

    def implicit(self, x: float, y: float) -> float:
        """Negative inside, zero on the boundary, positive outside."""
        raise NotImplementedError

    def ray_exit(self, px: float, py: float, dx: float, dy: float) -> float:
        """Distance along the inward ray from a boundary point to the next
        boundary hit."""
        raise NotImplementedError

    def theta_of_point(self, x: float, y: float) -> float:
        raise NotImplementedError

    # -- shared geometry ---------------------------------------------------

    def tangent(self, theta: float) -> tuple[float, float]:
        vx, vy = self.velocity(theta)
        norm = math.hypot(vx, vy)
        return vx / norm, vy / norm

    def inward_normal(self, theta: float) -> tuple[float, float]:
        tx, ty = self.tangent(theta)
        return -ty, tx

    def launch_direction(
        self, theta: float, alpha: float, side: int = +1
    ) -> tuple[float, float]:
        """Unit chord direction at base angle ``alpha``, traveling CCW for
        ``side=+1`` and CW for ``side=-1``."""
        if side not in (+1, -1):
            raise InputError("side must be +1 or -1")
        tx, ty = self.tangent(theta)
        nx, ny = self.inward_normal(theta)
        ca, sa = math.cos(alpha), math.sin(alpha)
        return ca * side * tx + sa * nx, ca * side * ty + sa * ny

    def perimeter(self, n: int = 4096) -> float:
        thetas = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        speeds = np.array([math.hypot(*self.velocity(t)) for t in thetas])
        return float(np.mean(speeds) * 2.0 * math.pi)

    def contains(self, x: float, y: float, eps: float = 1e-12) -> bool:
        return self.implicit(x, y) <= eps

    # nearest boundary point, used for deviation measurements
    def nearest_theta(self, x: float, y: float, guess: float, iters: int = 12) -> float:
        theta = guess
        for _ in range(iters):
            px, py = self.point(theta)
            vx, vy = self.velocity(theta)
            h = 1e-6
            vx2, vy2 = self.velocity(theta + h)
            ax, ay = (vx2 - vx) / h, (vy2 - vy) / h
            f = (px - x) * vx + (py - y) * vy
            fp = vx * vx + vy * vy + (px - x) * ax + (py - y) * ay
            if fp == 0.0:
                break
            step = f / fp
            theta -= step
            if abs(step) < 1e-14:
                break
        return theta

    def distance_to_boundary(self, x: float, y: float, guess: float) -> float:
        theta = self.nearest_theta(x, y, guess)
        px, py = self.point(theta)
        return math.hypot(px - x, py - y)


class Circle(SmoothTable):
    name = "circle"

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise InputError("radius must be positive")
        self.radius = float(radius)

    def point(self, theta):
        return self.radius * math.cos(theta), self.radius * math.sin(theta)

    def velocity(self, theta):
        return -self.radius * math.sin(theta), self.radius * math.cos(theta)

    def curvature(self, theta):
        return 1.0 / self.radius

    def implicit(self, x, y):
        return math.hypot(x, y) - self.radius

    def ray_exit(self, px, py, dx, dy):
        pd = px * dx + py * dy
        if pd >= 0.0:
            raise InputError("ray leaves the circle immediately")
        return -2.0 * pd  # second root of |p + t d|^2 = R^2 from the boundary

    def theta_of_point(self, x, y):
        return math.atan2(y, x)

    def distance_to_boundary(self, x, y, guess=None):
        return abs(self.radius - math.hypot(x, y))


class Ellipse(SmoothTable):
    name = "ellipse"

    def __init__(self, a: float = 1.5, b: float = 1.0):
        if a <= 0 or b <= 0:
            raise InputError("semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)

    def point(self, theta):
        return self.a * math.cos(theta), self.b * math.sin(theta)

    def velocity(self, theta):
        return -self.a * math.sin(theta), self.b * math.cos(theta)

    def curvature(self, theta):
        s, c = math.sin(theta), math.cos(theta)
        return (
            self.a
            * self.b
            / (self.a**2 * s * s + self.b**2 * c * c) ** 1.5
        )

    def implicit(self, x, y):
        return (x / self.a) ** 2 + (y / self.b) ** 2 - 1.0

    def ray_exit(self, px, py, dx, dy):
        qa = (dx / self.a) ** 2 + (dy / self.b) ** 2
        qb = 2.0 * (px * dx / self.a**2 + py * dy / self.b**2)
        qc = (px / self.a) ** 2 + (py / self.b) ** 2 - 1.0
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0 or qb >= 0.0:
            raise InputError("ray leaves the ellipse immediately")
        return (-qb + math.sqrt(disc)) / (2.0 * qa)

    def theta_of_point(self, x, y):
        return math.atan2(y / self.b, x / self.a)


class PerturbedCircle(SmoothTable):
    """Polar curve ``r(theta) = 1 + delta * cos(k * theta)``; strictly convex
    for small ``delta``."""

    name = "perturbed-circle"

    def __init__(self, delta: float = 0.05, k: int = 3):
        self.delta = float(delta)
        self.k = int(k)
        if self.k < 1:
            raise InputError("harmonic k must be >= 1")
        # strict convexity: kappa > 0 needs r^2 + 2 r'^2 - r r'' > 0
        thetas = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
        if min(self.curvature(t) for t in thetas) <= 0.0:
            raise InputError(
                f"delta={delta} with k={k} is not strictly convex"
            )

    def _r(self, theta):
        return 1.0 + self.delta * math.cos(self.k * theta)

    def _r1(self, theta):
        return -self.delta * self.k * math.sin(self.k * theta)

    def _r2(self, theta):
        return -self.delta * self.k * self.k * math.cos(self.k * theta)

    def point(self, theta):
        r = self._r(theta)
        return r * math.cos(theta), r * math.sin(theta)

    def velocity(self, theta):
        r, r1 = self._r(theta), self._r1(theta)
        c, s = math.cos(theta), math.sin(theta)
        return r1 * c - r * s, r1 * s + r * c

    def curvature(self, theta):
        r, r1, r2 = self._r(theta), self._r1(theta), self._r2(theta)
        return (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    def implicit(self, x, y):
        return math.hypot(x, y) - self._r(math.atan2(y, x))

    def ray_exit(self, px, py, dx, dy):
        # the ray crosses the boundary exactly once forward; bracket the sign
        # change by doubling, then bisect
        chord_guess = 1e-9
        t_lo = 0.0
        t_hi = None
        t = chord_guess
        for _ in range(120):
            g = self.implicit(px + t * dx, py + t * dy)
            if g > 0.0:
                t_hi = t
                break
            t_lo = t
            t *= 2.0
            if t > 8.0:
                break
        if t_hi is None:
            raise InputError("ray found no boundary crossing; not inward?")
        for _ in range(100):
            mid = 0.5 * (t_lo + t_hi)
            if self.implicit(px + mid * dx, py + mid * dy) > 0.0:
                t_hi = mid
            else:
                t_lo = mid
            if t_hi - t_lo < 1e-13:
                break
        return 0.5 * (t_lo + t_hi)

    def theta_of_point(self, x, y):
        return math.atan2(y, x)


# -- bounce map -------------------------------------------------------------


@dataclass(frozen=True)
class ChordStep:
    theta: float
    theta_next: float
    alpha: float
    alpha_next: float
    chord: float
    point: tuple[float, float]
    point_next: tuple[float, float]
    direction: tuple[float, float]


def smooth_bounce(
    table: SmoothTable, theta: float, alpha: float, side: int = +1
) -> ChordStep:
    """One chord of the billiard map in base-angle coordinates."""
    if not 0.0 < alpha < 0.5 * math.pi:
        raise InputError(f"base angle must be in (0, pi/2), got {alpha}")
    px, py = table.point(theta)
    dx, dy = table.launch_direction(theta, alpha, side)
    chord = table.ray_exit(px, py, dx, dy)
    qx, qy = px + chord * dx, py + chord * dy
    theta_next = table.theta_of_point(qx, qy)
    # unwrap so the parameter advances with the travel sense (the raw value
    # from atan2 jumps by 2*pi at the branch cut)
    if side > 0:
        theta_next = theta + (theta_next - theta) % (2.0 * math.pi)
    else:
        theta_next = theta - (theta - theta_next) % (2.0 * math.pi)
    tx, ty = table.tangent(theta_next)
    cos_next = max(-1.0, min(1.0, side * (dx * tx + dy * ty)))
    alpha_next = math.acos(cos_next)
    return ChordStep(
        theta=theta,
        theta_next=theta_next,
        alpha=alpha,
        alpha_next=alpha_next,
        chord=chord,
        point=(px, py),
        point_next=(qx, qy),
        direction=(dx, dy),
    )


@dataclass
class BounceRun:
    table_name: str
    side: int
    thetas: np.ndarray       # length n+1
    alphas: np.ndarray       # length n+1
    chords: np.ndarray       # length n
    points: np.ndarray       # (n+1, 2)

    @property
    def n_bounces(self) -> int:
        return len(self.chords)


def base_angle_run(
    table: SmoothTable,
    theta0: float,
    alpha0: float,
    n_bounces: int,
    side: int = +1,
) -> BounceRun:
    """Iterate the chord map ``n_bounces`` times from ``(theta0, alpha0)``."""
    thetas = [float(theta0)]
    alphas = [float(alpha0)]
    chords = []
    points = [table.point(theta0)]
    theta, alpha = float(theta0), float(alpha0)
    for _ in range(n_bounces):
        step = smooth_bounce(table, theta, alpha, side)
        theta, alpha = step.theta_next, step.alpha_next
        thetas.append(theta)
        alphas.append(alpha)
        chords.append(step.chord)
        points.append(step.point_next)
    return BounceRun(
        table_name=table.name,
        side=side,
        thetas=np.array(thetas),
        alphas=np.array(alphas),
        chords=np.array(chords),
        points=np.array(points),
    )


def chord_deviation(
    table: SmoothTable,
    p0: tuple[float, float],
    p1: tuple[float, float],
    theta0: float,
    theta1: float,
    samples: int = 17,
) -> float:
    """Largest distance from the chord ``p0 -> p1`` to the boundary set.

    For the circle this is the exact sagitta (center-to-chord geometry); for
    other tables the chord is sampled and each sample's nearest boundary
    point is polished by Newton, with a parabolic refinement of the max.
    """
    if isinstance(table, Circle):
        mx, my = 0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])
        ux, uy = p1[0] - p0[0], p1[1] - p0[1]
        norm = math.hypot(ux, uy)
        if norm < 1e-300:
            return 0.0
        # the deepest point of the chord is its closest approach to the center
        tproj = -(p0[0] * ux + p0[1] * uy) / (norm * norm)
        tproj = max(0.0, min(1.0, tproj))
        cx, cy = p0[0] + tproj * ux, p0[1] + tproj * uy
        return table.radius - math.hypot(cx, cy)
    svals = np.linspace(0.0, 1.0, samples)
    devs = []
    for s in svals:
        x = p0[0] + s * (p1[0] - p0[0])
        y = p0[1] + s * (p1[1] - p0[1])
        guess = theta0 + s * (theta1 - theta0)
        devs.append(table.distance_to_boundary(x, y, guess))
    devs = np.array(devs)
    k = int(np.argmax(devs))
    if 0 < k < samples - 1:
        # parabola through the top three samples
        y0, y1, y2 = devs[k - 1], devs[k], devs[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0.0:
            return float(y1 - 0.125 * (y2 - y0) ** 2 / denom)
    return float(devs[k])


def loglog_slope(xs, ys) -> float:
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


@dataclass
class ConvergenceReport:
    table_name: str
    alphas: np.ndarray
    max_deviations: np.ndarray
    deviation_slope: float
    circle_predictions: np.ndarray | None  # 1 - cos(alpha), circle only
    max_prediction_error: float | None


def boundary_convergence_experiment(
    table: SmoothTable,
    alphas,
    n_bounces: int | None = None,
    theta0: float = 0.1,
) -> ConvergenceReport:
    """Measure how close small-angle trajectories hug the boundary.

    For each launch angle the run's largest chord deviation is recorded; the
    log-log slope across the ladder is the measured exponent of the
    boundary-layer law (2 in theory). On the circle the deviation is also
    compared with the exact sagitta ``1 - cos(alpha)``.
    """
    alphas = np.asarray(sorted(alphas, reverse=True), dtype=float)
    devs = []
    for alpha in alphas:
        n = n_bounces if n_bounces is not None else int(math.ceil(math.pi / alpha))
        run = base_angle_run(table, theta0, float(alpha), n)
        worst = 0.0
        for k in range(run.n_bounces):
            worst = max(
                worst,
                chord_deviation(
                    table,
                    tuple(run.points[k]),
                    tuple(run.points[k + 1]),
                    run.thetas[k],
                    run.thetas[k + 1],
                ),
            )
        devs.append(worst)
    devs = np.array(devs)
    if isinstance(table, Circle):
        predictions = table.radius * (1.0 - np.cos(alphas))
        max_err = float(np.max(np.abs(devs - predictions)))
    else:
        predictions, max_err = None, None
    return ConvergenceReport(
        table_name=table.name,
        alphas=alphas,
        max_deviations=devs,
        deviation_slope=loglog_slope(alphas, devs),
        circle_predictions=predictions,
        max_prediction_error=max_err,
    )


@dataclass
class LawsReport:
    table_name: str
    alphas: np.ndarray
    max_increments: np.ndarray        # max positive base-angle change per run
    increment_slope: float            # ~2: increments scale like alpha^2
    min_chord_ratio: np.ndarray       # min chord/alpha per run
    chord_constant: float             # overall lower bound on chord/alpha
    max_deviations: np.ndarray
    deviation_slope: float            # ~2: boundary layer scales like alpha^2
    angle_spread: np.ndarray          # max |alpha_k - alpha_0| per run


def verify_base_angle_laws(
    table: SmoothTable,
    alphas=(0.04, 0.02, 0.01, 0.005, 0.0025),
    theta0: float = 0.1,
) -> LawsReport:
    """Run full-loop bounce sequences across an angle ladder and measure the
    small-angle laws: linear chords, quadratic increments, quadratic
    boundary layer."""
    alphas = np.asarray(sorted(alphas, reverse=True), dtype=float)
    max_incs, min_ratio, devs, spreads = [], [], [], []
    for alpha in alphas:
        n = int(math.ceil(math.pi / alpha))
        run = base_angle_run(table, theta0, float(alpha), n)
        inc = np.diff(run.alphas)
        max_incs.append(float(np.max(inc)))
        min_ratio.append(float(np.min(run.chords / run.alphas[:-1])))
        spreads.append(float(np.max(np.abs(run.alphas - alpha))))
        worst = 0.0
        for k in range(run.n_bounces):
            worst = max(
                worst,
                chord_deviation(
                    table,
                    tuple(run.points[k]),
                    tuple(run.points[k + 1]),
                    run.thetas[k],
                    run.thetas[k + 1],
                ),
            )
        devs.append(worst)
    max_incs = np.array(max_incs)
    min_ratio = np.array(min_ratio)
    devs = np.array(devs)
    return LawsReport(
        table_name=table.name,
        alphas=alphas,
        max_increments=max_incs,
        increment_slope=loglog_slope(alphas, max_incs),
        min_chord_ratio=min_ratio,
        chord_constant=float(np.min(min_ratio)),
        max_deviations=devs,
        deviation_slope=loglog_slope(alphas, devs),
        angle_spread=np.array(spreads),
    )
