"""Discrete differential operators on triangle meshes.

Conventions, fixed once for the whole package:

- The cotangent Laplacian L is negative semi-definite with zero row sums;
  (L f)_i = sum_j w_ij (f_j - f_i), w_ij = (cot a + cot b) / 2 over the two
  angles opposite edge (i, j).
- Vertex areas are mixed Voronoi cells: the circumcentric cell inside
  non-obtuse triangles, midpoint splits (half the face at the obtuse
  corner, a quarter elsewhere) inside obtuse ones. They partition the
  total face area exactly.
- The mean-curvature vector is H_i = (L Phi)_i / (2 A_i). On the unit
  sphere with outward orientation it points inward with |H| = 1. The
  scalar H_i is the component of the vector against the outward vertex
  normal, so it is positive on convex surfaces.
- Gauss curvature is the angle defect over the vertex area; its
  area-weighted total telescopes to 2 pi chi exactly.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .mesh import DEGENERACY_REL_THRESHOLD, Mesh


class FaceGeometry(NamedTuple):
    """Per-face quantities reused across operators and gradients."""

    corner_points: np.ndarray  # (F, 3, 3) vertex positions per corner
    normals: np.ndarray        # (F, 3) unit normals
    double_areas: np.ndarray   # (F,) |cross| = 2 * area
    areas: np.ndarray          # (F,)
    cots: np.ndarray           # (F, 3) cotangent of the angle at each corner
    corner_dots: np.ndarray    # (F, 3) dot of the two edges leaving the corner


def face_geometry(mesh: Mesh) -> FaceGeometry:
    """Compute per-face normals, areas, and corner cotangents in one pass."""
    P = mesh.vertices[mesh.faces]  # (F, 3, 3)
    # edges leaving corner k: to the next and previous corner
    e_next = P[:, [1, 2, 0]] - P  # (F, 3, 3) edge corner k -> k+1
    e_prev = P[:, [2, 0, 1]] - P  # (F, 3, 3) edge corner k -> k+2
    crosses = np.cross(e_next[:, 0], e_prev[:, 0])  # = (p1-p0) x (p2-p0)
    double_areas = np.linalg.norm(crosses, axis=1)
    _require_nondegenerate(mesh, 0.5 * double_areas)
    normals = crosses / double_areas[:, None]
    dots = np.einsum("fki,fki->fk", e_next, e_prev)
    # |e_next x e_prev| equals 2A at every corner of the same triangle
    cots = dots / double_areas[:, None]
    return FaceGeometry(P, normals, double_areas, 0.5 * double_areas, cots, dots)


def _require_nondegenerate(mesh: Mesh, areas: np.ndarray) -> None:
    thresh = DEGENERACY_REL_THRESHOLD * mesh.bbox_diagonal ** 2
    if (areas <= thresh).any():
        f = int(np.flatnonzero(areas <= thresh)[0])
        raise ValueError(f"degenerate face {f} (area {areas[f]:.3e})")


def mixed_area_pieces(geom: FaceGeometry) -> np.ndarray:
    """Per-(face, corner) mixed Voronoi area pieces, shape (F, 3).

    Rows sum to the face area exactly in both branches: the circumcentric
    pieces by the cotangent identity 4A = sum_k l_k^2 cot_k, the obtuse
    split by construction.
    """
    P = geom.corner_points
    # squared length of the edge opposite corner k
    opp = P[:, [2, 0, 1]] - P[:, [1, 2, 0]]
    l2 = np.einsum("fki,fki->fk", opp, opp)
    # circumcentric piece at corner k: the two incident edges, each weighted
    # by the cotangent at the corner opposite to that edge
    l2_next = l2[:, [2, 0, 1]]  # edge (k, k+1) is opposite corner k+2
    l2_prev = l2[:, [1, 2, 0]]  # edge (k, k+2) is opposite corner k+1
    cot_next = geom.cots[:, [2, 0, 1]]
    cot_prev = geom.cots[:, [1, 2, 0]]
    voronoi = (l2_next * cot_next + l2_prev * cot_prev) / 8.0

    obtuse_corner = geom.corner_dots < 0.0  # (F, 3)
    any_obtuse = obtuse_corner.any(axis=1)
    split = np.where(obtuse_corner, 0.5, 0.25) * geom.areas[:, None]
    return np.where(any_obtuse[:, None], split, voronoi)


def vertex_areas(mesh: Mesh) -> np.ndarray:
    """Mixed Voronoi vertex areas; sums to the total face area exactly."""
    geom = face_geometry(mesh)
    pieces = mixed_area_pieces(geom)
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.faces.reshape(-1), pieces.reshape(-1))
    return areas


def cotan_laplacian(mesh: Mesh, geom: FaceGeometry | None = None) -> sp.csr_matrix:
    """Symmetric negative semi-definite cotangent Laplacian (V x V, sparse)."""
    if geom is None:
        geom = face_geometry(mesh)
    f = mesh.faces
    # corner k contributes cot_k / 2 to the edge between the other two corners
    i = f[:, [1, 2, 0]].reshape(-1)
    j = f[:, [2, 0, 1]].reshape(-1)
    w = (0.5 * geom.cots).reshape(-1)
    V = mesh.n_vertices
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([w, w, -w, -w])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(V, V)).tocsr()
    return L


def vertex_normals(mesh: Mesh, geom: FaceGeometry | None = None) -> np.ndarray:
    """Unit vertex normals: area-weighted average of incident face normals."""
    if geom is None:
        geom = face_geometry(mesh)
    weighted = geom.normals * geom.areas[:, None]
    acc = np.zeros((mesh.n_vertices, 3))
    np.add.at(acc, mesh.faces.reshape(-1), np.repeat(weighted, 3, axis=0))
    norms = np.linalg.norm(acc, axis=1)
    if (norms <= 0.0).any():
        v = int(np.flatnonzero(norms <= 0.0)[0])
        raise ValueError(f"vanishing normal at vertex {v}")
    return acc / norms[:, None]


class MeanCurvature(NamedTuple):
    vector: np.ndarray  # (V, 3) mean-curvature vectors
    scalar: np.ndarray  # (V,) signed scalar, positive on convex surfaces
    normal: np.ndarray  # (V, 3) outward unit vertex normals


def mean_curvature(mesh: Mesh) -> MeanCurvature:
    """Mean-curvature vector (L Phi) / (2 A), scalar part, and vertex normals."""
    geom = face_geometry(mesh)
    L = cotan_laplacian(mesh, geom)
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.faces.reshape(-1), mixed_area_pieces(geom).reshape(-1))
    if (areas <= 0.0).any():
        v = int(np.flatnonzero(areas <= 0.0)[0])
        raise ValueError(f"zero vertex area at vertex {v}")
    hvec = (L @ mesh.vertices) / (2.0 * areas[:, None])
    normal = vertex_normals(mesh, geom)
    scalar = -np.einsum("vi,vi->v", hvec, normal)
    return MeanCurvature(hvec, scalar, normal)


def gauss_curvature(mesh: Mesh) -> np.ndarray:
    """Angle-defect Gauss curvature (2 pi - incident angle sum) / vertex area."""
    geom = face_geometry(mesh)
    angles = np.arctan2(geom.double_areas[:, None], geom.corner_dots)
    defect = np.full(mesh.n_vertices, 2.0 * np.pi)
    np.add.at(defect, mesh.faces.reshape(-1), -angles.reshape(-1))
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.faces.reshape(-1), mixed_area_pieces(geom).reshape(-1))
    if (areas <= 0.0).any():
        v = int(np.flatnonzero(areas <= 0.0)[0])
        raise ValueError(f"zero vertex area at vertex {v}")
    return defect / areas


def angle_defect_total(mesh: Mesh) -> float:
    """Sum of angle defects; equals 2 pi chi up to floating-point error."""
    geom = face_geometry(mesh)
    angles = np.arctan2(geom.double_areas[:, None], geom.corner_dots)
    return float(2.0 * np.pi * mesh.n_vertices - angles.sum())
