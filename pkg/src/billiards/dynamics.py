"""Piecewise-straight billiard trajectories inside a convex polytope.

Between boundary hits the state moves at unit speed along a straight
segment. At a hit the outgoing direction is chosen so that the pair
(reversed incoming, outgoing) is polar: on a facet that forces the mirror
law, and at a corner (two or more active facets) a policy decides:

``STRICT``
    refuse and raise ``CornerAmbiguousError``; useful when a run is only
    meaningful if it never touches a corner.
``POINT_REFLECT``
    send the trajectory straight back (``outgoing = -incoming``). The
    difference ``outgoing - incoming`` is then ``-2 incoming`` with the
    reversed incoming in the tangent cone, so the bounce is polar whenever
    the reversed incoming direction lies in the tangent cone; at obtuse
    corners with off-axis arrivals the returned ray can leave the tangent
    cone, which is the price of an always-defined involution.
``FOLD_GROUP``
    reflect the incoming direction across the active walls until it points
    inward. This is the reflection-group continuation and is only meaningful
    when the active walls meet at angles pi/m; the corner is checked locally
    and ``NotAnAlcoveError`` is raised otherwise.

``simulate_unfolded`` replays the same event logic but represents the
trajectory as a single straight line composed with an accumulating affine
isometry (one mirror per bounce), so positions reach each event through a
different arithmetic path. Agreement of the two is a meaningful consistency
check, not a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import TOL
from .errors import (
    BounceBudgetExceededError,
    CornerAmbiguousError,
    DegenerateStartError,
    InputError,
    NoProgressError,
    NotAnAlcoveError,
    OutsideTableError,
)
from .geometry import (
    Location,
    Polytope,
    as_point,
    fold_direction_into_cone,
    nearest_pi_over_m,
    reflect,
    unit,
)

__all__ = [
    "CornerPolicy",
    "TrajectoryState",
    "BounceEvent",
    "BounceResolution",
    "Trajectory",
    "advance_to_boundary",
    "reflect_at",
    "simulate",
    "simulate_unfolded",
    "default_bounce_budget",
]


class CornerPolicy(Enum):
    STRICT = "strict"
    POINT_REFLECT = "point-reflect"
    FOLD_GROUP = "fold-group"

    @classmethod
    def parse(cls, name: str) -> "CornerPolicy":
        key = name.strip().lower().replace("_", "-")
        for policy in cls:
            if key in (policy.value, policy.value.replace("-", "")):
                return policy
        raise InputError(
            f"unknown corner policy {name!r}; choose from "
            f"{[p.value for p in cls]}"
        )


@dataclass(frozen=True)
class TrajectoryState:
    """Position, unit direction and elapsed arclength."""

    point: np.ndarray
    direction: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        object.__setattr__(
            self, "direction", unit(as_point(self.direction, self.point.shape[0]))
        )
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.point.shape[0]

    def reversed(self) -> "TrajectoryState":
        return TrajectoryState(self.point.copy(), -self.direction, 0.0)


class BounceKind(Enum):
    FACET = "facet"
    CORNER = "corner"


@dataclass(frozen=True)
class BounceEvent:
    """One boundary hit: ``incoming``/``outgoing`` are travel directions
    (the polar pair is ``(-incoming, outgoing)``)."""

    time: float
    point: np.ndarray
    incoming: np.ndarray
    outgoing: np.ndarray
    active: tuple[int, ...]
    kind: BounceKind


@dataclass(frozen=True)
class BounceResolution:
    outgoing: np.ndarray
    kind: BounceKind
    word: tuple[int, ...]  # facet indices of the mirrors applied, in order


@dataclass
class Trajectory:
    start: TrajectoryState
    events: list[BounceEvent]
    end: TrajectoryState
    horizon: float
    policy: CornerPolicy
    _knot_times: np.ndarray = field(default=None, repr=False)
    _knot_points: np.ndarray = field(default=None, repr=False)
    _segment_dirs: np.ndarray = field(default=None, repr=False)

    @property
    def n_bounces(self) -> int:
        return len(self.events)

    def _knots(self):
        if self._knot_times is None:
            times = [0.0] + [e.time for e in self.events] + [self.horizon]
            points = (
                [self.start.point]
                + [e.point for e in self.events]
                + [self.end.point]
            )
            dirs = [self.start.direction] + [e.outgoing for e in self.events]
            self._knot_times = np.array(times)
            self._knot_points = np.array(points)
            self._segment_dirs = np.array(dirs)
        return self._knot_times, self._knot_points, self._segment_dirs

    def position_at(self, t: float) -> np.ndarray:
        times, points, dirs = self._knots()
        t = min(max(float(t), 0.0), self.horizon)
        i = int(np.searchsorted(times, t, side="right")) - 1
        i = min(max(i, 0), len(dirs) - 1)
        return points[i] + (t - times[i]) * dirs[i]

    def sample(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.array([self.position_at(t) for t in ts])


def default_bounce_budget(polytope: Polytope, horizon: float) -> int:
    """Linear-in-time cap on the number of bounces, scaled by facet count."""
    return int(math.ceil(10.0 * (horizon + 1.0) * polytope.n_facets))


def advance_to_boundary(
    polytope: Polytope, point, direction
) -> tuple[np.ndarray, float, tuple[int, ...]]:
    """Travel from ``point`` along ``direction`` to the next boundary hit.

    Returns ``(hit_point, distance, active_set_at_hit)``. Constraints
    approached at a rate below the tangential threshold are treated as
    sliding and never selected. Starting on the boundary with an outward
    direction raises ``DegenerateStartError``; a missing forward crossing
    raises ``NoProgressError``.
    """
    p = as_point(point, polytope.dim)
    d = unit(as_point(direction, polytope.dim))
    loc = polytope.contains(p)
    if loc.location is Location.OUTSIDE:
        raise OutsideTableError(
            f"start point violates a constraint by {loc.worst_violation:.3e}"
        )
    rates = polytope.normals @ d
    slack = polytope.normals @ p - polytope.offsets
    if loc.active:
        worst = float(np.max(rates[list(loc.active)]))
        if worst > TOL.tangential:
            raise DegenerateStartError(
                f"direction exits through active facet (rate {worst:.3e})"
            )
    approaching = rates > TOL.tangential
    if loc.active:
        approaching[list(loc.active)] = False
    if not np.any(approaching):
        raise NoProgressError("no constraint is approached; table corrupt?")
    times = np.full(polytope.n_facets, np.inf)
    times[approaching] = -slack[approaching] / rates[approaching]
    times = np.maximum(times, 0.0)
    dt = float(np.min(times))
    if not np.isfinite(dt) or dt <= TOL.step:
        raise NoProgressError(f"forward crossing at dt={dt:.3e} is too small")
    hit = p + dt * d
    active = polytope.contains(hit).active
    if not active:
        # the minimizing facet must be tight; recover it directly
        active = (int(np.argmin(times)),)
    return hit, dt, active


def reflect_at(
    polytope: Polytope,
    point,
    incoming,
    active,
    policy: CornerPolicy = CornerPolicy.POINT_REFLECT,
) -> BounceResolution:
    """Outgoing travel direction for a hit with the given active set."""
    active = tuple(active)
    if not active:
        raise InputError("reflect_at needs a nonempty active set")
    d = unit(as_point(incoming, polytope.dim))
    if len(active) == 1:
        n = polytope.normals[active[0]]
        return BounceResolution(reflect(d, n), BounceKind.FACET, (active[0],))
    if policy is CornerPolicy.STRICT:
        raise CornerAmbiguousError(as_point(point, polytope.dim), active)
    if policy is CornerPolicy.POINT_REFLECT:
        return BounceResolution(-d, BounceKind.CORNER, ())
    # FOLD_GROUP: the active walls must meet at reflection-group angles
    normals = polytope.normals[list(active)]
    for i in range(len(active)):
        for j in range(i + 1, len(active)):
            cos_ij = float(np.clip(np.dot(normals[i], normals[j]), -1.0, 1.0))
            dihedral = math.pi - math.acos(cos_ij)
            _, err = nearest_pi_over_m(dihedral)
            if err > 100.0 * TOL.angle:
                raise NotAnAlcoveError(
                    f"facets {active[i]} and {active[j]} meet at dihedral "
                    f"{dihedral:.12f}, not a pi/m angle"
                )
    folded, local_word = fold_direction_into_cone(normals, d)
    word = tuple(active[k] for k in local_word)
    return BounceResolution(folded, BounceKind.CORNER, word)


def _check_start(polytope: Polytope, state: TrajectoryState) -> None:
    loc = polytope.contains(state.point)
    if loc.location is Location.OUTSIDE:
        raise OutsideTableError(
            f"trajectory starts outside the table "
            f"(violation {loc.worst_violation:.3e})"
        )
    if loc.active:
        worst = float(np.max(polytope.normals[list(loc.active)] @ state.direction))
        if worst > TOL.tangential:
            raise DegenerateStartError(
                "trajectory starts on the boundary pointing outward"
            )


def simulate(
    polytope: Polytope,
    state: TrajectoryState,
    horizon: float,
    policy: CornerPolicy = CornerPolicy.POINT_REFLECT,
    bounce_budget: int | None = None,
) -> Trajectory:
    """Run the billiard flow for total arclength ``horizon``."""
    horizon = float(horizon)
    if horizon < 0 or not np.isfinite(horizon):
        raise InputError(f"horizon must be finite and >= 0, got {horizon}")
    if state.dim != polytope.dim:
        raise InputError("state and table dimensions differ")
    _check_start(polytope, state)
    budget = bounce_budget if bounce_budget is not None else default_bounce_budget(
        polytope, horizon
    )
    eps_time = TOL.step * (1.0 + horizon)
    p = state.point.copy()
    d = state.direction.copy()
    t = 0.0
    events: list[BounceEvent] = []
    while horizon - t > eps_time:
        hit, dt, active = advance_to_boundary(polytope, p, d)
        if dt > (horizon - t) + eps_time:
            p = p + (horizon - t) * d
            t = horizon
            break
        t = t + dt
        res = reflect_at(polytope, hit, d, active, policy)
        events.append(
            BounceEvent(
                time=t,
                point=hit,
                incoming=d,
                outgoing=res.outgoing,
                active=active,
                kind=res.kind,
            )
        )
        if len(events) > budget:
            raise BounceBudgetExceededError(
                f"exceeded bounce budget {budget} before horizon {horizon}"
            )
        p, d = hit, res.outgoing
    end = TrajectoryState(p, d, horizon)
    return Trajectory(state, events, end, horizon, policy)


def _mirror(halfspace) -> tuple[np.ndarray, np.ndarray]:
    """Affine reflection ``x -> Hx + b`` across the halfspace boundary."""
    n = halfspace.normal
    h = np.eye(n.shape[0]) - 2.0 * np.outer(n, n)
    b = 2.0 * halfspace.offset * n
    return h, b


def simulate_unfolded(
    polytope: Polytope,
    state: TrajectoryState,
    horizon: float,
    policy: CornerPolicy = CornerPolicy.POINT_REFLECT,
    bounce_budget: int | None = None,
) -> Trajectory:
    """Same flow as :func:`simulate`, positions built by unfolding.

    The trajectory is the image of the single straight line
    ``x0 + t * d0`` under an isometry updated at each bounce (the mirror of
    the facet hit, the point reflection at a corner, or the fold word). Event
    positions are evaluated through the accumulated isometry, so rounding
    flows through a genuinely different computation than the segment-chaining
    integrator.
    """
    horizon = float(horizon)
    if horizon < 0 or not np.isfinite(horizon):
        raise InputError(f"horizon must be finite and >= 0, got {horizon}")
    if state.dim != polytope.dim:
        raise InputError("state and table dimensions differ")
    _check_start(polytope, state)
    budget = bounce_budget if bounce_budget is not None else default_bounce_budget(
        polytope, horizon
    )
    eps_time = TOL.step * (1.0 + horizon)
    x0 = state.point.copy()
    d0 = state.direction.copy()
    q = np.eye(polytope.dim)
    shift = np.zeros(polytope.dim)
    t = 0.0
    events: list[BounceEvent] = []
    while horizon - t > eps_time:
        p = q @ (x0 + t * d0) + shift
        d = q @ d0
        hit, dt, active = advance_to_boundary(polytope, p, d)
        if dt > (horizon - t) + eps_time:
            t = horizon
            break
        t = t + dt
        res = reflect_at(polytope, hit, d, active, policy)
        table_hit = q @ (x0 + t * d0) + shift
        events.append(
            BounceEvent(
                time=t,
                point=table_hit,
                incoming=d,
                outgoing=res.outgoing,
                active=active,
                kind=res.kind,
            )
        )
        if len(events) > budget:
            raise BounceBudgetExceededError(
                f"exceeded bounce budget {budget} before horizon {horizon}"
            )
        if res.kind is BounceKind.FACET or res.word:
            for idx in res.word:
                h, b = _mirror(polytope.halfspaces[idx])
                q = h @ q
                shift = h @ shift + b
        else:
            # point reflection about the corner
            q = -q
            shift = 2.0 * table_hit - shift
    end_point = q @ (x0 + horizon * d0) + shift
    end_dir = q @ d0
    end = TrajectoryState(end_point, end_dir, horizon)
    return Trajectory(state, events, end, horizon, policy)
