"""Convex polytopes as halfspace intersections, and the cone predicates the
bounce rule is built on.

A table is ``K = {x : <n_i, x> <= c_i}`` with unit outward normals ``n_i``.
At a boundary point the *active* constraints are those tight within ``eps``;
they span the outward normal cone ``N_p = cone{n_i}`` and cut the tangent
cone ``T_p = {u : <n_i, u> <= 0}``. A bounce from incoming direction ``u`` to
outgoing ``v`` is *polar* when ``-(u+v)`` lies in ``N_p``: membership is
decided by nonnegative least squares with the residual thresholded at
``eps``. On a facet (one active normal) this reduces to the mirror law, and
the unique polar partner of ``u`` is ``reflect(-u, n)``.

Polytopes carry their vertices alongside the halfspaces. For dimensions up to
three (and for the small simplices produced by the alcove builders) vertices
are enumerated by brute force over facet subsets; higher-dimensional tables
must supply full data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import nnls

from .config import TOL
from .errors import (
    DimensionMismatchError,
    InputError,
    RedundantHalfspaceError,
    UnboundedRegionError,
    WordBudgetExceededError,
)

__all__ = [
    "HalfSpace",
    "Polytope",
    "Location",
    "Containment",
    "TangentCone",
    "NormalCone",
    "as_point",
    "unit",
    "angle_between",
    "reflect",
    "cone_membership",
    "is_polar",
    "polar_partner",
    "fold_direction_into_cone",
    "nearest_pi_over_m",
]


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float64 array, optionally checking the dimension."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"expected a point/vector, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise InputError("points must have dimension >= 1")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"expected dimension {dim}, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError(f"non-finite coordinates: {arr}")
    return arr


def unit(v) -> np.ndarray:
    """Normalize to unit length; zero vectors are rejected."""
    arr = as_point(v)
    norm = float(np.linalg.norm(arr))
    if norm < 1e-300:
        raise InputError("cannot normalize the zero vector")
    return arr / norm


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    uu = unit(u)
    vv = unit(v)
    return float(np.arccos(np.clip(np.dot(uu, vv), -1.0, 1.0)))


def reflect(v, normal) -> np.ndarray:
    """Mirror ``v`` across the hyperplane with unit normal ``normal``."""
    v = as_point(v)
    n = as_point(normal, dim=v.shape[0])
    return v - 2.0 * float(np.dot(v, n)) * n


@dataclass(frozen=True)
class HalfSpace:
    """``{x : <normal, x> <= offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_point(self.normal)
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-12:
            raise InputError(f"halfspace normal is not unit (norm {norm})")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def of(cls, normal, offset: float) -> "HalfSpace":
        """Build from an un-normalized normal, rescaling the offset to match."""
        n = as_point(normal)
        norm = float(np.linalg.norm(n))
        if norm < 1e-300:
            raise InputError("halfspace normal may not be zero")
        return cls(n / norm, float(offset) / norm)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def signed_distance(self, x) -> float:
        """Positive outside, negative inside."""
        return float(np.dot(self.normal, as_point(x, self.dim)) - self.offset)


class Location(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Containment:
    location: Location
    active: tuple[int, ...]
    worst_violation: float

    def __bool__(self) -> bool:
        return self.location is not Location.OUTSIDE


@dataclass(frozen=True)
class TangentCone:
    """Directions that point into the table from a boundary (or interior)
    point: ``{u : <n_i, u> <= 0}`` over the active normals."""

    base: np.ndarray
    active: tuple[int, ...]
    normals: np.ndarray  # shape (k, n), rows are the active unit normals

    def contains_direction(self, u, eps: float | None = None) -> bool:
        eps = TOL.active if eps is None else eps
        u = as_point(u, self.base.shape[0])
        if self.normals.shape[0] == 0:
            return True
        return bool(np.max(self.normals @ u) <= eps * max(1.0, np.linalg.norm(u)))


@dataclass(frozen=True)
class NormalCone:
    """Nonnegative span of the active outward normals."""

    base: np.ndarray
    active: tuple[int, ...]
    generators: np.ndarray  # shape (k, n)

    def contains_vector(self, w, eps: float | None = None) -> bool:
        eps = TOL.polar if eps is None else eps
        w = as_point(w, self.base.shape[0])
        ok, _, _ = cone_membership(self.generators, w, eps)
        return ok


def cone_membership(
    generators: np.ndarray, target: np.ndarray, eps: float
) -> tuple[bool, np.ndarray, np.ndarray]:
    """Is ``target`` a nonnegative combination of the generator rows?

    Returns ``(member, coefficients, residual_vector)``. The residual is
    ``target - coeffs @ generators``; by the least squares optimality
    conditions it has nonpositive inner product with every generator, which
    makes it a certified separating direction whenever membership fails.
    """
    gen = np.atleast_2d(np.asarray(generators, dtype=float))
    target = np.asarray(target, dtype=float)
    if gen.shape[0] == 0:
        return bool(np.linalg.norm(target) <= eps), np.zeros(0), target.copy()
    coeffs, rnorm = nnls(gen.T, target)
    residual = target - coeffs @ gen
    return bool(rnorm <= eps), coeffs, residual


class Polytope:
    """Bounded full-dimensional intersection of halfspaces, with vertex data.

    Construction validates that every halfspace supports a facet (else
    ``RedundantHalfspaceError``), that all vertices are feasible, and that the
    outward normals positively span the ambient space (else
    ``UnboundedRegionError``).
    """

    def __init__(
        self,
        halfspaces,
        vertices,
        facet_vertices=None,
        *,
        validate: bool = True,
    ):
        self.halfspaces: tuple[HalfSpace, ...] = tuple(halfspaces)
        if not self.halfspaces:
            raise InputError("a polytope needs at least one halfspace")
        self.dim: int = self.halfspaces[0].dim
        self.normals: np.ndarray = np.array(
            [h.normal for h in self.halfspaces], dtype=float
        )
        self.offsets: np.ndarray = np.array(
            [h.offset for h in self.halfspaces], dtype=float
        )
        self.vertices: np.ndarray = np.atleast_2d(
            np.asarray(vertices, dtype=float)
        )
        if self.vertices.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"vertices have dim {self.vertices.shape[1]}, "
                f"halfspaces have dim {self.dim}"
            )
        computed = self._tight_vertex_sets()
        if facet_vertices is None:
            self.facet_vertices = computed
        else:
            self.facet_vertices = tuple(tuple(sorted(f)) for f in facet_vertices)
            if validate and self.facet_vertices != computed:
                raise InputError(
                    "facet_vertices disagree with the tight-vertex sets "
                    "computed from the halfspaces"
                )
        if validate:
            self._validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_halfspaces(
        cls, halfspaces, *, max_subsets: int = 200_000
    ) -> "Polytope":
        """Enumerate vertices by intersecting ``dim``-subsets of hyperplanes.

        Practical for dimension <= 3 or small facet counts; the subset count
        is capped to keep the cost sane.
        """
        hs = tuple(halfspaces)
        if not hs:
            raise InputError("need at least one halfspace")
        dim = hs[0].dim
        n_facets = len(hs)
        if math.comb(n_facets, dim) > max_subsets:
            raise InputError(
                f"vertex enumeration over C({n_facets},{dim}) subsets exceeds "
                f"the cap {max_subsets}; supply vertices explicitly"
            )
        normals = np.array([h.normal for h in hs])
        offsets = np.array([h.offset for h in hs])
        verts: list[np.ndarray] = []
        for subset in itertools.combinations(range(n_facets), dim):
            a = normals[list(subset)]
            b = offsets[list(subset)]
            try:
                x = np.linalg.solve(a, b)
            except np.linalg.LinAlgError:
                continue
            slack = normals @ x - offsets
            if np.max(slack) <= 1e-9 * max(1.0, float(np.linalg.norm(x))):
                if not any(np.linalg.norm(x - v) <= 1e-9 for v in verts):
                    verts.append(x)
        if len(verts) < dim + 1:
            raise UnboundedRegionError(
                "halfspace intersection has too few vertices to be a bounded "
                f"full-dimensional body (found {len(verts)})"
            )
        return cls(hs, np.array(verts))

    @classmethod
    def convex_polygon(cls, points) -> "Polytope":
        """2D polytope from the vertices of a convex polygon (any order)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != 2:
            raise DimensionMismatchError("convex_polygon expects 2D points")
        if pts.shape[0] < 3:
            raise InputError("a polygon needs at least 3 vertices")
        center = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0]))
        pts = pts[order]
        halfspaces = []
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            edge = b - a
            if np.linalg.norm(edge) < 1e-12:
                raise InputError("polygon has a repeated vertex")
            n = np.array([edge[1], -edge[0]])  # outward for CCW order
            halfspaces.append(HalfSpace.of(n, float(np.dot(n, a))))
        return cls(halfspaces, pts)

    @classmethod
    def from_point_cloud(cls, points) -> "Polytope":
        """Convex hull of a point cloud (dimension 2 or 3, via qhull)."""
        from scipy.spatial import ConvexHull

        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] == 2:
            hull = ConvexHull(pts)
            return cls.convex_polygon(pts[hull.vertices])
        if pts.shape[1] != 3:
            raise DimensionMismatchError("from_point_cloud supports dim 2 or 3")
        hull = ConvexHull(pts)
        halfspaces = []
        seen: list[tuple[np.ndarray, float]] = []
        for eq in hull.equations:  # <eq[:3], x> + eq[3] <= 0 on the hull
            n, c = eq[:3], -eq[3]
            dup = any(
                np.dot(n, n0) > 1.0 - 1e-10 and abs(c - c0) <= 1e-9
                for n0, c0 in seen
            )
            if not dup:
                seen.append((n, c))
                halfspaces.append(HalfSpace.of(n, c))
        return cls(halfspaces, pts[hull.vertices])

    @classmethod
    def box(cls, lower, upper) -> "Polytope":
        lo = as_point(lower)
        hi = as_point(upper, lo.shape[0])
        if np.any(hi <= lo):
            raise InputError("box needs lower < upper coordinatewise")
        dim = lo.shape[0]
        halfspaces = []
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            halfspaces.append(HalfSpace(e.copy(), float(hi[j])))
            halfspaces.append(HalfSpace(-e, float(-lo[j])))
        corners = np.array(
            [
                [lo[j] if (k >> j) & 1 == 0 else hi[j] for j in range(dim)]
                for k in range(2**dim)
            ]
        )
        return cls(halfspaces, corners)

    # -- validation --------------------------------------------------------

    def _tight_vertex_sets(self) -> tuple[tuple[int, ...], ...]:
        slack = self.vertices @ self.normals.T - self.offsets  # (V, H)
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        tight = np.abs(slack) <= 1e-9 * scale
        return tuple(
            tuple(np.nonzero(tight[:, i])[0].tolist())
            for i in range(len(self.halfspaces))
        )

    def _validate(self) -> None:
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        slack = self.vertices @ self.normals.T - self.offsets
        worst = float(np.max(slack))
        if worst > 1e-9 * scale:
            raise InputError(
                f"vertex violates a halfspace by {worst:.3e} (scale {scale:g})"
            )
        for i, hs in enumerate(self.halfspaces):
            for j in range(i + 1, len(self.halfspaces)):
                if (
                    float(np.dot(hs.normal, self.normals[j])) > 1.0 - 1e-12
                    and abs(hs.offset - self.offsets[j]) <= 1e-9 * scale
                ):
                    raise RedundantHalfspaceError(
                        f"halfspaces {i} and {j} coincide"
                    )
        for i, tight in enumerate(self.facet_vertices):
            if len(tight) < self.dim:
                raise RedundantHalfspaceError(
                    f"halfspace {i} touches only {len(tight)} vertices; "
                    f"a facet needs at least {self.dim}"
                )
            pts = self.vertices[list(tight)]
            # the affine rank of two points needs no decomposition
            if len(tight) == 2:
                apart = np.linalg.norm(pts[1] - pts[0]) > 1e-9 * scale
                rank = 1 if apart else 0
            else:
                centered = pts - pts.mean(axis=0)
                rank = int(
                    np.sum(np.linalg.svd(centered, compute_uv=False) > 1e-9 * scale)
                )
            if rank != self.dim - 1:
                raise RedundantHalfspaceError(
                    f"halfspace {i} is tight on a set of affine rank {rank}, "
                    f"expected {self.dim - 1}"
                )
        self._check_bounded()

    def _check_bounded(self) -> None:
        if self.dim == 2:
            angles = np.sort(np.arctan2(self.normals[:, 1], self.normals[:, 0]))
            gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
            if float(np.max(gaps)) >= np.pi - 1e-12:
                raise UnboundedRegionError(
                    "outward normals leave an angular gap >= pi"
                )
            return
        for j in range(self.dim):
            for sign in (1.0, -1.0):
                e = np.zeros(self.dim)
                e[j] = sign
                ok, _, _ = cone_membership(self.normals, e, 1e-9)
                if not ok:
                    raise UnboundedRegionError(
                        "outward normals fail to span direction "
                        f"{'+' if sign > 0 else '-'}e_{j}"
                    )

    # -- queries -----------------------------------------------------------

    @property
    def n_facets(self) -> int:
        return len(self.halfspaces)

    def interior_point(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def diameter(self) -> float:
        spread = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(spread))

    def contains(self, x, eps: float | None = None) -> Containment:
        eps = TOL.active if eps is None else eps
        x = as_point(x, self.dim)
        slack = self.normals @ x - self.offsets
        worst = float(np.max(slack))
        scaled = eps * max(1.0, float(np.linalg.norm(x)))
        if worst > scaled:
            return Containment(Location.OUTSIDE, (), worst)
        active = tuple(np.nonzero(np.abs(slack) <= scaled)[0].tolist())
        if active:
            return Containment(Location.BOUNDARY, active, worst)
        return Containment(Location.INTERIOR, (), worst)

    def active_set(self, x, eps: float | None = None) -> tuple[int, ...]:
        return self.contains(x, eps).active

    def tangent_cone(self, p, eps: float | None = None) -> TangentCone:
        loc = self.contains(p, eps)
        if loc.location is Location.OUTSIDE:
            raise InputError(
                f"tangent cone requested outside the table (violation "
                f"{loc.worst_violation:.3e})"
            )
        rows = self.normals[list(loc.active)] if loc.active else np.zeros((0, self.dim))
        return TangentCone(as_point(p, self.dim), loc.active, rows)

    def normal_cone(self, p, eps: float | None = None) -> NormalCone:
        loc = self.contains(p, eps)
        if loc.location is Location.OUTSIDE:
            raise InputError(
                f"normal cone requested outside the table (violation "
                f"{loc.worst_violation:.3e})"
            )
        rows = self.normals[list(loc.active)] if loc.active else np.zeros((0, self.dim))
        return NormalCone(as_point(p, self.dim), loc.active, rows)

    def __repr__(self) -> str:
        return (
            f"Polytope(dim={self.dim}, facets={self.n_facets}, "
            f"vertices={len(self.vertices)})"
        )


def is_polar(
    polytope: Polytope, p, u, v, eps: float | None = None
) -> bool:
    """Decide whether ``(u, v)`` is a legal bounce pair at ``p``.

    Both directions must lie in the tangent cone at ``p``; the pair is polar
    when ``-(u+v)`` is a nonnegative combination of the active outward
    normals, with least squares residual at most ``eps``. At interior points
    the normal cone is trivial and polarity means ``v = -u``.
    """
    eps = TOL.polar if eps is None else eps
    uu = unit(u)
    vv = unit(v)
    cone = polytope.tangent_cone(p)
    if not cone.contains_direction(uu, TOL.active):
        raise InputError("incoming direction is not in the tangent cone")
    if not cone.contains_direction(vv, TOL.active):
        raise InputError("outgoing direction is not in the tangent cone")
    generators = polytope.normals[list(cone.active)] if cone.active else np.zeros(
        (0, polytope.dim)
    )
    ok, _, _ = cone_membership(generators, -(uu + vv), eps)
    return ok


def polar_partner(polytope: Polytope, p, u) -> np.ndarray:
    """The unique polar outgoing direction at a smooth boundary point."""
    cone = polytope.tangent_cone(p)
    if len(cone.active) != 1:
        raise InputError(
            f"polar partner is only unique with one active facet, got "
            f"{len(cone.active)}"
        )
    n = polytope.normals[cone.active[0]]
    return reflect(-unit(u), n)


def fold_direction_into_cone(
    normals: np.ndarray,
    v: np.ndarray,
    *,
    eps: float | None = None,
    max_iters: int = 4096,
) -> tuple[np.ndarray, list[int]]:
    """Reflect ``v`` across the given unit normals until it points inward.

    Greedy: repeatedly mirror across the most violated wall. On a reflection
    group's chamber cone this lands in the chamber after finitely many steps
    (each step composes one generator of the vertex stabilizer); the returned
    word lists the generator indices in the order applied. The pair
    (input, output) is always polar: the difference is a nonnegative
    combination of the walls crossed.
    """
    eps = TOL.active if eps is None else eps
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    w = as_point(v).copy()
    word: list[int] = []
    for _ in range(max_iters):
        viol = normals @ w
        k = int(np.argmax(viol))
        if viol[k] <= eps:
            return w, word
        w = w - 2.0 * viol[k] * normals[k]
        word.append(k)
    raise WordBudgetExceededError(
        f"direction folding did not terminate within {max_iters} reflections"
    )


def nearest_pi_over_m(angle: float, m_max: int | None = None) -> tuple[int, float]:
    """The integer ``m`` in [2, m_max] minimizing ``|angle - pi/m|``.

    Returns ``(m, error)``. Dihedral angles of reflection-group chambers are
    exactly of this form; everything else is reported with its distance to
    the closest admissible bin.
    """
    m_max = TOL.m_max if m_max is None else m_max
    if not 0.0 < angle < np.pi:
        return 2, abs(angle - np.pi / 2)
    m_guess = np.pi / angle
    best_m, best_err = 2, abs(angle - np.pi / 2)
    for m in {2, m_max, int(np.floor(m_guess)), int(np.ceil(m_guess))}:
        m = min(max(m, 2), m_max)
        err = abs(angle - np.pi / m)
        if err < best_err:
            best_m, best_err = m, err
    return best_m, best_err
