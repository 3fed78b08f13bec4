"""Structured triangulations with oriented, classified edge topology.

Two mesh families are provided: a regular hexagon (circumradius 1, one
vertex at (1, 0)) cut into 6*m^2 congruent equilateral triangles, and a
square-with-square-hole domain meshed by right triangles whose inner
boundary carries sound-soft (Dirichlet) edges.

Edge orientation conventions, which every downstream jump/average term
relies on:

* every triangle is counterclockwise, so traversing a local edge in vertex
  order keeps the element on the left and the outward normal on the right;
* an interior edge belongs to the incident element with the *larger* global
  label ("plus" side); its stored endpoints (v0, v1) follow the plus
  element's traversal, its normal points out of the plus element, and jumps
  are plus-trace minus minus-trace;
* a boundary edge stores the domain's outward normal;
* the tangent is the normal rotated by +90 degrees, i.e. the unit vector
  from v0 to v1.

Vertices are deduplicated through integer lattice indices, never through
floating-point comparisons, so the topology is exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Callable, Iterator, Mapping

import numpy as np

SQRT3 = np.sqrt(3.0)


class MeshTopologyError(ValueError):
    """Raised when element connectivity does not describe a valid 2-manifold."""


class EdgeKind(IntEnum):
    INTERIOR = 0
    ROBIN = 1
    DIRICHLET = 2


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Element:
    """Triangle with counterclockwise vertices and its global label."""

    label: int
    vertex_ids: tuple[int, int, int]
    area: float


@dataclass(frozen=True)
class Edge:
    """Oriented edge view; see the module docstring for the conventions."""

    index: int
    v0: int
    v1: int
    length: float
    normal: np.ndarray
    tangent: np.ndarray
    kind: EdgeKind
    plus_elem: int
    minus_elem: int  # -1 on boundary edges


@dataclass
class Mesh:
    """Immutable triangulation with vectorized edge topology arrays.

    The per-edge arrays are struct-of-arrays so assembly can run without
    Python-level loops; `edge(i)` and `edges()` expose object views.
    """

    points: np.ndarray          # (nv, 2) float
    triangles: np.ndarray       # (ne, 3) int, counterclockwise
    areas: np.ndarray           # (ne,)
    h: float                    # max element diameter
    edge_v0: np.ndarray         # (E,) int
    edge_v1: np.ndarray
    edge_length: np.ndarray     # (E,) float
    edge_normal: np.ndarray     # (E, 2)
    edge_tangent: np.ndarray    # (E, 2)
    edge_kind: np.ndarray       # (E,) int8
    edge_plus: np.ndarray       # (E,) int: plus / owning element
    edge_minus: np.ndarray      # (E,) int, -1 on boundary
    edge_plus_loc: np.ndarray   # (E, 2) int8: local index of v0, v1 in plus elem
    edge_minus_loc: np.ndarray  # (E, 2) int8, -1 on boundary
    interior_edges: np.ndarray  # index arrays into the edge tables
    robin_edges: np.ndarray
    dirichlet_edges: np.ndarray

    @property
    def num_vertices(self) -> int:
        return self.points.shape[0]

    @property
    def num_elements(self) -> int:
        return self.triangles.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edge_v0.shape[0]

    def point(self, i: int) -> Point2:
        return Point2(float(self.points[i, 0]), float(self.points[i, 1]))

    def element(self, i: int) -> Element:
        return Element(i, tuple(int(v) for v in self.triangles[i]), float(self.areas[i]))

    def edge(self, i: int) -> Edge:
        return Edge(
            index=i,
            v0=int(self.edge_v0[i]),
            v1=int(self.edge_v1[i]),
            length=float(self.edge_length[i]),
            normal=self.edge_normal[i].copy(),
            tangent=self.edge_tangent[i].copy(),
            kind=EdgeKind(int(self.edge_kind[i])),
            plus_elem=int(self.edge_plus[i]),
            minus_elem=int(self.edge_minus[i]),
        )

    def edges(self) -> Iterator[Edge]:
        for i in range(self.num_edges):
            yield self.edge(i)

    def boundary_kind_map(self) -> dict[tuple[int, int], EdgeKind]:
        """Sorted-vertex-pair -> kind for every boundary edge."""
        out: dict[tuple[int, int], EdgeKind] = {}
        for idx in np.concatenate([self.robin_edges, self.dirichlet_edges]):
            a, b = int(self.edge_v0[idx]), int(self.edge_v1[idx])
            out[(min(a, b), max(a, b))] = EdgeKind(int(self.edge_kind[idx]))
        return out


def _element_geometry(points: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, float]:
    p = points[triangles]  # (ne, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    signed = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(signed <= 0.0):
        bad = int(np.argmin(signed))
        raise MeshTopologyError(
            f"element {bad} is degenerate or clockwise (signed area {signed[bad]:.3e})"
        )
    sides = np.stack(
        [p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1
    )
    diam = np.sqrt((sides**2).sum(axis=2)).max(axis=1)
    return signed, float(diam.max())


def mesh_from_arrays(
    points: np.ndarray,
    triangles: np.ndarray,
    boundary_kind: Callable[[int, int], EdgeKind] | Mapping[tuple[int, int], EdgeKind] | None = None,
) -> Mesh:
    """Build the full edge topology from vertex/triangle arrays.

    `boundary_kind` decides Robin vs Dirichlet for each boundary edge, by
    callable on (v0, v1) or by sorted-pair mapping; the default is all-Robin.
    Raises MeshTopologyError for inverted elements, repeated vertices, or an
    edge shared by more than two elements.
    """
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    if not np.all(np.isfinite(points)):
        raise MeshTopologyError("non-finite vertex coordinates")
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise MeshTopologyError("triangle array must be (ne, 3)")
    for tri in triangles:
        if len(set(int(v) for v in tri)) != 3:
            raise MeshTopologyError(f"triangle {tri} repeats a vertex")
    areas, h = _element_geometry(points, triangles)

    if boundary_kind is None:
        kind_of = lambda a, b: EdgeKind.ROBIN  # noqa: E731
    elif callable(boundary_kind):
        kind_of = boundary_kind
    else:
        mapping = boundary_kind
        kind_of = lambda a, b: mapping[(min(a, b), max(a, b))]  # noqa: E731

    # key -> list of (element, local edge slot); slot l runs v[l] -> v[(l+1)%3]
    incidence: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for e, tri in enumerate(triangles):
        for l in range(3):
            a, b = int(tri[l]), int(tri[(l + 1) % 3])
            key = (a, b) if a < b else (b, a)
            incidence.setdefault(key, []).append((e, l))

    n_edges = len(incidence)
    edge_v0 = np.empty(n_edges, dtype=np.int64)
    edge_v1 = np.empty(n_edges, dtype=np.int64)
    edge_kind = np.empty(n_edges, dtype=np.int8)
    edge_plus = np.empty(n_edges, dtype=np.int64)
    edge_minus = np.full(n_edges, -1, dtype=np.int64)
    edge_plus_loc = np.empty((n_edges, 2), dtype=np.int8)
    edge_minus_loc = np.full((n_edges, 2), -1, dtype=np.int8)

    # deterministic edge order: by sorted vertex pair
    for i, key in enumerate(sorted(incidence)):
        hits = incidence[key]
        if len(hits) > 2:
            raise MeshTopologyError(
                f"edge {key} is shared by {len(hits)} elements"
            )
        if len(hits) == 2:
            (ea, la), (eb, lb) = hits
            if ea == eb:
                raise MeshTopologyError(f"element {ea} contains edge {key} twice")
            plus, pl = (ea, la) if ea > eb else (eb, lb)
            minus, ml = (eb, lb) if ea > eb else (ea, la)
            v0 = int(triangles[plus, pl])
            v1 = int(triangles[plus, (pl + 1) % 3])
            edge_kind[i] = EdgeKind.INTERIOR
            edge_plus[i] = plus
            edge_minus[i] = minus
            edge_plus_loc[i] = (pl, (pl + 1) % 3)
            # minus element traverses v1 -> v0, so its locals come swapped
            edge_minus_loc[i] = ((ml + 1) % 3, ml)
            if int(triangles[minus, ml]) != v1 or int(triangles[minus, (ml + 1) % 3]) != v0:
                raise MeshTopologyError(
                    f"edge {key}: incident elements disagree on orientation"
                )
        else:
            (ea, la) = hits[0]
            v0 = int(triangles[ea, la])
            v1 = int(triangles[ea, (la + 1) % 3])
            edge_kind[i] = kind_of(v0, v1)
            edge_plus[i] = ea
            edge_plus_loc[i] = (la, (la + 1) % 3)
        edge_v0[i] = v0
        edge_v1[i] = v1

    d = points[edge_v1] - points[edge_v0]
    length = np.hypot(d[:, 0], d[:, 1])
    tangent = d / length[:, None]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])

    kinds = edge_kind
    return Mesh(
        points=points,
        triangles=triangles,
        areas=areas,
        h=h,
        edge_v0=edge_v0,
        edge_v1=edge_v1,
        edge_length=length,
        edge_normal=normal,
        edge_tangent=tangent,
        edge_kind=kinds,
        edge_plus=edge_plus,
        edge_minus=edge_minus,
        edge_plus_loc=edge_plus_loc,
        edge_minus_loc=edge_minus_loc,
        interior_edges=np.flatnonzero(kinds == EdgeKind.INTERIOR),
        robin_edges=np.flatnonzero(kinds == EdgeKind.ROBIN),
        dirichlet_edges=np.flatnonzero(kinds == EdgeKind.DIRICHLET),
    )


def build_hexagon_mesh(m: int) -> Mesh:
    """Regular unit hexagon split into 6*m^2 equilateral triangles of side 1/m.

    Circumradius = side length = 1, center (0, 0), one vertex at (1, 0).
    All boundary edges are Robin.  Element labels sweep lattice rows bottom
    to top, up-triangle before down-triangle, which pins the jump signs.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"hexagon subdivision m must be a positive integer, got {m!r}")
    m = int(m)
    index: dict[tuple[int, int], int] = {}
    pts: list[tuple[float, float]] = []
    for j in range(-m, m + 1):
        for i in range(-m, m + 1):
            if abs(i + j) <= m:
                index[(i, j)] = len(pts)
                pts.append(((i + 0.5 * j) / m, (0.5 * SQRT3) * j / m))
    tris: list[tuple[int, int, int]] = []
    for j in range(-m, m):
        for i in range(-m, m):
            up = ((i, j), (i + 1, j), (i, j + 1))
            if all(c in index for c in up):
                tris.append(tuple(index[c] for c in up))
            down = ((i + 1, j), (i + 1, j + 1), (i, j + 1))
            if all(c in index for c in down):
                tris.append(tuple(index[c] for c in down))
    mesh = mesh_from_arrays(np.array(pts), np.array(tris))
    # equilateral elements: the max diameter is exactly the lattice pitch
    mesh.h = 1.0 / m
    return mesh


def build_square_with_hole_mesh(m: int) -> Mesh:
    """[-1,1]^2 minus the concentric square [-1/3,1/3]^2, right-triangle mesh.

    m cells per side (must be divisible by 3 so the hole is cell-aligned),
    legs of length 2/m.  Outer boundary Robin, hole boundary Dirichlet.
    """
    if not isinstance(m, (int, np.integer)) or m < 3 or m % 3 != 0:
        raise ValueError(
            f"square-with-hole subdivision m must be a positive multiple of 3, got {m!r}"
        )
    m = int(m)
    third = m // 3

    def in_hole(ci: int, cj: int) -> bool:
        return third <= ci < 2 * third and third <= cj < 2 * third

    index: dict[tuple[int, int], int] = {}
    pts: list[tuple[float, float]] = []

    def vertex(i: int, j: int) -> int:
        if (i, j) not in index:
            index[(i, j)] = len(pts)
            pts.append((-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m))
        return index[(i, j)]

    tris: list[tuple[int, int, int]] = []
    for cj in range(m):
        for ci in range(m):
            if in_hole(ci, cj):
                continue
            p00 = vertex(ci, cj)
            p10 = vertex(ci + 1, cj)
            p01 = vertex(ci, cj + 1)
            p11 = vertex(ci + 1, cj + 1)
            tris.append((p00, p10, p11))
            tris.append((p00, p11, p01))

    lattice = {v: ij for ij, v in index.items()}

    def boundary_kind(a: int, b: int) -> EdgeKind:
        (ia, ja), (ib, jb) = lattice[a], lattice[b]
        on_outer = (
            (ia == 0 and ib == 0)
            or (ia == m and ib == m)
            or (ja == 0 and jb == 0)
            or (ja == m and jb == m)
        )
        return EdgeKind.ROBIN if on_outer else EdgeKind.DIRICHLET

    return mesh_from_arrays(np.array(pts), np.array(tris), boundary_kind)


def classify_edges(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partition edge indices into (interior, Robin, Dirichlet) sets.

    Recounts the incidence of every edge from the triangle array and raises
    MeshTopologyError if any edge is shared by more than two elements or the
    stored partition disagrees with the recount.
    """
    counts: dict[tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for l in range(3):
            a, b = int(tri[l]), int(tri[(l + 1) % 3])
            key = (a, b) if a < b else (b, a)
            counts[key] = counts.get(key, 0) + 1
            if counts[key] > 2:
                raise MeshTopologyError(f"edge {key} is shared by more than two elements")
    for i in range(mesh.num_edges):
        key = tuple(sorted((int(mesh.edge_v0[i]), int(mesh.edge_v1[i]))))
        expected_interior = counts.get(key, 0) == 2
        stored_interior = int(mesh.edge_kind[i]) == EdgeKind.INTERIOR
        if expected_interior != stored_interior:
            raise MeshTopologyError(f"edge {key}: stored kind disagrees with incidence")
    return mesh.interior_edges, mesh.robin_edges, mesh.dirichlet_edges


def relabel_elements(mesh: Mesh, perm: np.ndarray) -> Mesh:
    """Rebuild the mesh with elements reordered as triangles[perm].

    Boundary edge kinds are preserved; interior plus/minus sides, normals
    and jump signs follow the new labels.
    """
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(mesh.num_elements)):
        raise ValueError("perm must be a permutation of the element labels")
    out = mesh_from_arrays(mesh.points, mesh.triangles[perm], mesh.boundary_kind_map())
    out.h = mesh.h
    return out


def write_mesh_dump(mesh: Mesh, path: str | Path) -> None:
    """Line-oriented dump: `v x y`, `t i j k`, `e i j kind` records."""
    kind_names = {EdgeKind.INTERIOR: "interior", EdgeKind.ROBIN: "robin", EdgeKind.DIRICHLET: "dirichlet"}
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in mesh.points:
            fh.write(f"v {x:.17g} {y:.17g}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"t {a} {b} {c}\n")
        for i in range(mesh.num_edges):
            fh.write(
                f"e {mesh.edge_v0[i]} {mesh.edge_v1[i]} "
                f"{kind_names[EdgeKind(int(mesh.edge_kind[i]))]}\n"
            )
