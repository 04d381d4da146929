"""Alcove detection and affine Coxeter classification.

A bounded convex polytope is an *alcove* (a fundamental chamber of a
discrete group generated by the reflections in its walls) exactly when every
pair of facets meeting in a codimension-2 face does so at a dihedral angle
``pi/m`` for an integer ``m >= 2``. The decision procedure bins each dihedral
angle against that grid; any miss is reported with the nearest admissible
angle, so a failed check doubles as a diagnosis.

Alcoves are classified by their labeled diagram: one node per facet, an edge
labeled ``m`` when the dihedral angle is ``pi/m`` with ``m >= 3``, an
``infinity`` edge for parallel facets, no edge for right angles. Connected
components are matched against the affine families A~n, B~n, C~n, D~n,
E~6/7/8, F~4, G~2 plus the rank-one slab A~1 by brute-force labeled graph
isomorphism (components here never exceed nine nodes).

``standard_alcove`` inverts the story: from a family label it builds the
Gram matrix ``G[i][j] = -cos(pi/m_ij)`` (``-1`` for parallel walls), factors
it, and assembles the simplex with those wall normals at offset one.
"""

from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .dynamics import CornerPolicy, Trajectory, TrajectoryState, simulate_unfolded
from .errors import InputError, NotAnAlcoveError, WordBudgetExceededError
from .geometry import HalfSpace, Polytope, as_point, nearest_pi_over_m

__all__ = [
    "AngleNearBinBoundary",
    "DihedralAngles",
    "AlcoveFailure",
    "AlcoveVerdict",
    "CoxeterDiagram",
    "Component",
    "dihedral_angles",
    "check_alcove",
    "coxeter_diagram",
    "classify",
    "standard_alcove",
    "standard_alcove_labels",
    "fold_point",
    "folded_flow",
]

INF = math.inf


class AngleNearBinBoundary(UserWarning):
    """A dihedral angle sits suspiciously close to the edge of a pi/m bin."""


@dataclass(frozen=True)
class DihedralAngles:
    """Pairwise facet geometry: which pairs meet in a codim-2 face, which are
    parallel, and the dihedral angle where defined (NaN elsewhere)."""

    adjacent: np.ndarray
    parallel: np.ndarray
    angles: np.ndarray


def dihedral_angles(polytope: Polytope) -> DihedralAngles:
    h = polytope.n_facets
    dim = polytope.dim
    scale = max(1.0, float(np.max(np.abs(polytope.vertices))))
    adjacent = np.zeros((h, h), dtype=bool)
    parallel = np.zeros((h, h), dtype=bool)
    angles = np.full((h, h), np.nan)
    facet_sets = [set(fv) for fv in polytope.facet_vertices]
    for i in range(h):
        for j in range(i + 1, h):
            shared = facet_sets[i] & facet_sets[j]
            cos_ij = float(
                np.clip(np.dot(polytope.normals[i], polytope.normals[j]), -1.0, 1.0)
            )
            if len(shared) >= max(dim - 1, 1):
                pts = polytope.vertices[sorted(shared)]
                # the affine rank of one or two points needs no decomposition
                if len(shared) == 1:
                    rank = 0
                elif len(shared) == 2:
                    apart = np.linalg.norm(pts[1] - pts[0]) > 1e-9 * scale
                    rank = 1 if apart else 0
                else:
                    centered = pts - pts.mean(axis=0)
                    rank = int(
                        np.sum(
                            np.linalg.svd(centered, compute_uv=False)
                            > 1e-9 * scale
                        )
                    )
                if rank == dim - 2:
                    adjacent[i, j] = adjacent[j, i] = True
                    ang = math.pi - math.acos(cos_ij)
                    angles[i, j] = angles[j, i] = ang
                    continue
            if not adjacent[i, j] and cos_ij <= -1.0 + 1e-9:
                parallel[i, j] = parallel[j, i] = True
    return DihedralAngles(adjacent, parallel, angles)


@dataclass(frozen=True)
class AlcoveFailure:
    """One dihedral angle off the pi/m grid."""

    facets: tuple[int, int]
    angle: float
    nearest_m: int
    nearest_angle: float
    error: float


@dataclass(frozen=True)
class Component:
    nodes: tuple[int, ...]
    label: str | None  # None when the component matches no affine family


@dataclass(frozen=True)
class CoxeterDiagram:
    """Labeled diagram on facet indices; ``edges`` maps sorted pairs to the
    label m (int >= 3) or ``math.inf`` for parallel walls."""

    n_nodes: int
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def components(self) -> list[tuple[int, ...]]:
        parent = list(range(self.n_nodes))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for (i, j) in self.edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        groups: dict[int, list[int]] = {}
        for node in range(self.n_nodes):
            groups.setdefault(find(node), []).append(node)
        return [tuple(sorted(g)) for g in sorted(groups.values())]

    def induced(self, nodes: tuple[int, ...]) -> dict[tuple[int, int], float]:
        index = {v: k for k, v in enumerate(nodes)}
        return {
            (min(index[i], index[j]), max(index[i], index[j])): m
            for (i, j), m in self.edges.items()
            if i in index and j in index
        }


@dataclass(frozen=True)
class AlcoveVerdict:
    is_alcove: bool
    failures: tuple[AlcoveFailure, ...]
    diagram: CoxeterDiagram | None
    components: tuple[Component, ...]

    @property
    def label(self) -> str | None:
        """Joined component labels, or None if any component is unmatched."""
        if not self.is_alcove or any(c.label is None for c in self.components):
            return None
        return " x ".join(sorted(c.label for c in self.components))


def check_alcove(polytope: Polytope, eps: float | None = None) -> AlcoveVerdict:
    """Decide the alcove property and classify on success.

    Every codim-2 dihedral angle must sit within ``eps`` of ``pi/m`` for
    some integer ``m`` in [2, 64]. Failures carry the offending pair, the
    measured angle, and the nearest admissible bin.
    """
    eps = TOL.angle if eps is None else eps
    geom = dihedral_angles(polytope)
    h = polytope.n_facets
    failures: list[AlcoveFailure] = []
    edges: dict[tuple[int, int], float] = {}
    for i in range(h):
        for j in range(i + 1, h):
            if geom.parallel[i, j]:
                edges[(i, j)] = INF
                continue
            if not geom.adjacent[i, j]:
                continue
            ang = float(geom.angles[i, j])
            m, err = nearest_pi_over_m(ang)
            if err > eps:
                failures.append(
                    AlcoveFailure((i, j), ang, m, math.pi / m, err)
                )
                continue
            if eps < _distance_to_other_bins(ang, m) <= 10.0 * eps:
                warnings.warn(
                    f"dihedral angle {ang!r} is within 10*eps of a second "
                    f"pi/m bin",
                    AngleNearBinBoundary,
                )
            if m >= 3:
                edges[(i, j)] = float(m)
    if failures:
        return AlcoveVerdict(False, tuple(failures), None, ())
    diagram = CoxeterDiagram(h, edges)
    components = tuple(
        Component(nodes, _match_component(diagram.induced(nodes), len(nodes)))
        for nodes in diagram.components()
    )
    return AlcoveVerdict(True, (), diagram, components)


def _distance_to_other_bins(angle: float, matched_m: int) -> float:
    best = math.inf
    for m in (matched_m - 1, matched_m + 1):
        if 2 <= m <= TOL.m_max:
            best = min(best, abs(angle - math.pi / m))
    return best


def coxeter_diagram(polytope: Polytope, eps: float | None = None) -> CoxeterDiagram:
    verdict = check_alcove(polytope, eps)
    if not verdict.is_alcove:
        worst = max(verdict.failures, key=lambda f: f.error)
        raise NotAnAlcoveError(
            f"dihedral angle {worst.angle:.12f} between facets {worst.facets} "
            f"is {worst.error:.3e} away from pi/{worst.nearest_m}"
        )
    return verdict.diagram


def classify(diagram: CoxeterDiagram) -> tuple[Component, ...]:
    """Match each connected component against the affine catalogue."""
    return tuple(
        Component(nodes, _match_component(diagram.induced(nodes), len(nodes)))
        for nodes in diagram.components()
    )


# -- affine catalogue -------------------------------------------------------


def _catalogue_edges(family: str, rank: int) -> dict[tuple[int, int], float]:
    """Edge map of the affine diagram of the given family and rank, on nodes
    0..rank (rank+1 nodes)."""
    n = rank
    if family == "A" and n == 1:
        return {(0, 1): INF}
    if family == "A" and n >= 2:
        edges = {(i, i + 1): 3.0 for i in range(n)}
        edges[(0, n)] = 3.0
        return edges
    if family == "B" and n >= 3:
        edges = {(0, 2): 3.0, (1, 2): 3.0}
        for i in range(2, n - 1):
            edges[(i, i + 1)] = 3.0
        edges[(n - 1, n)] = 4.0
        return edges
    if family == "C" and n >= 2:
        edges = {(i, i + 1): 3.0 for i in range(1, n - 1)}
        edges[(0, 1)] = 4.0
        edges[(n - 1, n)] = 4.0
        return edges
    if family == "D" and n >= 4:
        edges = {(0, 2): 3.0, (1, 2): 3.0, (n - 2, n - 1): 3.0, (n - 2, n): 3.0}
        for i in range(2, n - 2):
            edges[(i, i + 1)] = 3.0
        return edges
    if family == "E" and n == 6:
        return {
            (0, 1): 3.0, (1, 2): 3.0,
            (0, 3): 3.0, (3, 4): 3.0,
            (0, 5): 3.0, (5, 6): 3.0,
        }
    if family == "E" and n == 7:
        return {
            (0, 1): 3.0, (1, 2): 3.0, (2, 3): 3.0,
            (0, 4): 3.0, (4, 5): 3.0, (5, 6): 3.0,
            (0, 7): 3.0,
        }
    if family == "E" and n == 8:
        return {
            (0, 1): 3.0, (1, 2): 3.0, (2, 3): 3.0, (3, 4): 3.0, (4, 5): 3.0,
            (0, 6): 3.0, (6, 7): 3.0,
            (0, 8): 3.0,
        }
    if family == "F" and n == 4:
        return {(0, 1): 3.0, (1, 2): 3.0, (2, 3): 4.0, (3, 4): 3.0}
    if family == "G" and n == 2:
        return {(0, 1): 6.0, (1, 2): 3.0}
    raise InputError(f"no affine family {family}~{n}")


def standard_alcove_labels(max_rank: int = 8) -> list[str]:
    """All irreducible affine labels up to the given rank."""
    labels = ["A1~"]
    for n in range(2, max_rank + 1):
        labels.append(f"A{n}~")
    for n in range(3, max_rank + 1):
        labels.append(f"B{n}~")
    for n in range(2, max_rank + 1):
        labels.append(f"C{n}~")
    for n in range(4, max_rank + 1):
        labels.append(f"D{n}~")
    for n in (6, 7, 8):
        if n <= max_rank:
            labels.append(f"E{n}~")
    if max_rank >= 4:
        labels.append("F4~")
    if max_rank >= 2:
        labels.append("G2~")
    return labels


def _candidate_labels(n_nodes: int) -> list[tuple[str, dict]]:
    rank = n_nodes - 1
    out = []
    for family in "ABCDEFG":
        try:
            out.append((f"{family}{rank}~", _catalogue_edges(family, rank)))
        except InputError:
            continue
    return out


def _node_signatures(n_nodes: int, edges: dict) -> list[tuple]:
    incident: list[list[float]] = [[] for _ in range(n_nodes)]
    for (i, j), m in edges.items():
        incident[i].append(m)
        incident[j].append(m)
    return [tuple(sorted(inc)) for inc in incident]


def _isomorphic(n_nodes: int, edges_a: dict, edges_b: dict) -> bool:
    """Labeled graph isomorphism by backtracking with signature pruning."""
    if len(edges_a) != len(edges_b):
        return False
    if sorted(edges_a.values()) != sorted(edges_b.values()):
        return False
    sig_a = _node_signatures(n_nodes, edges_a)
    sig_b = _node_signatures(n_nodes, edges_b)
    if sorted(sig_a) != sorted(sig_b):
        return False
    adj_a: list[dict[int, float]] = [dict() for _ in range(n_nodes)]
    adj_b: list[dict[int, float]] = [dict() for _ in range(n_nodes)]
    for (i, j), m in edges_a.items():
        adj_a[i][j] = m
        adj_a[j][i] = m
    for (i, j), m in edges_b.items():
        adj_b[i][j] = m
        adj_b[j][i] = m
    mapping: dict[int, int] = {}
    used: set[int] = set()
    order = sorted(range(n_nodes), key=lambda v: -len(adj_a[v]))

    def extend(k: int) -> bool:
        if k == n_nodes:
            return True
        a = order[k]
        for b in range(n_nodes):
            if b in used or sig_a[a] != sig_b[b]:
                continue
            ok = True
            for nb, target in mapping.items():
                if adj_a[a].get(nb) != adj_b[b].get(target):
                    ok = False
                    break
            if ok:
                mapping[a] = b
                used.add(b)
                if extend(k + 1):
                    return True
                del mapping[a]
                used.remove(b)
        return False

    return extend(0)


def _match_component(edges: dict, n_nodes: int) -> str | None:
    for label, cat_edges in _candidate_labels(n_nodes):
        if _isomorphic(n_nodes, edges, cat_edges):
            return label
    return None


# -- standard alcove construction ------------------------------------------


def _parse_label(label: str) -> tuple[str, int]:
    m = re.fullmatch(r"([A-G])(\d+)~?", label.strip())
    if not m:
        raise InputError(f"cannot parse affine label {label!r}")
    return m.group(1), int(m.group(2))


def standard_alcove(label: str) -> Polytope:
    """Concrete alcove with the given irreducible affine type.

    Wall normals are recovered from the Gram matrix ``-cos(pi/m_ij)`` by
    eigenfactorization (the matrix of an affine diagram is positive
    semidefinite with a one-dimensional kernel); all walls sit at offset one,
    and the region is a simplex whose classification round-trips to
    ``label``.
    """
    family, rank = _parse_label(label)
    edges = _catalogue_edges(family, rank)
    n_nodes = rank + 1
    gram = np.eye(n_nodes)
    for (i, j), m in edges.items():
        val = -1.0 if math.isinf(m) else -math.cos(math.pi / m)
        gram[i, j] = gram[j, i] = val
    eigvals, eigvecs = np.linalg.eigh(gram)
    positive = eigvals > 1e-9
    if int(np.sum(positive)) != rank:
        raise InputError(
            f"gram matrix of {label} has rank {int(np.sum(positive))}, "
            f"expected {rank}"
        )
    factors = eigvecs[:, positive] * np.sqrt(eigvals[positive])
    normals = factors / np.linalg.norm(factors, axis=1, keepdims=True)
    halfspaces = [HalfSpace(normals[i], 1.0) for i in range(n_nodes)]
    vertices = []
    for i in range(n_nodes):
        rest = [k for k in range(n_nodes) if k != i]
        x = np.linalg.solve(normals[rest], np.ones(rank))
        vertices.append(x)
    return Polytope(halfspaces, np.array(vertices))


# -- folding ---------------------------------------------------------------


def _require_alcove(polytope: Polytope) -> AlcoveVerdict:
    verdict = check_alcove(polytope)
    if not verdict.is_alcove:
        worst = max(verdict.failures, key=lambda f: f.error)
        raise NotAnAlcoveError(
            f"facets {worst.facets} meet at {worst.angle:.12f}, off the pi/m "
            f"grid by {worst.error:.3e}"
        )
    return verdict


def fold_point(
    polytope: Polytope,
    x,
    *,
    max_words: int = 100_000,
    verify: bool = True,
) -> tuple[np.ndarray, list[int]]:
    """Map an arbitrary point into the alcove by wall reflections.

    Greedy: reflect across the most violated wall until feasible. Each step
    strictly decreases the distance to any interior basepoint, so on a true
    alcove this terminates; the returned word lists wall indices in the
    order applied (identity word for points already inside).
    """
    if verify:
        _require_alcove(polytope)
    y = as_point(x, polytope.dim).copy()
    scale = max(1.0, float(np.max(np.abs(polytope.vertices))))
    word: list[int] = []
    for _ in range(max_words):
        slack = polytope.normals @ y - polytope.offsets
        k = int(np.argmax(slack))
        if slack[k] <= TOL.active * scale:
            return y, word
        y = y - 2.0 * slack[k] * polytope.normals[k]
        word.append(k)
    raise WordBudgetExceededError(
        f"point folding did not terminate within {max_words} reflections"
    )


def folded_flow(
    polytope: Polytope,
    state: TrajectoryState,
    horizon: float,
    bounce_budget: int | None = None,
) -> Trajectory:
    """Geodesic flow on the alcove orbifold: a straight line pushed through
    the folding map.

    Equivalent to the billiard flow with the group-fold corner rule, with
    positions computed through the accumulated folding isometry. Raises
    ``NotAnAlcoveError`` when the table fails the dihedral criterion.
    """
    _require_alcove(polytope)
    return simulate_unfolded(
        polytope, state, horizon, CornerPolicy.FOLD_GROUP, bounce_budget
    )
