"""Analytic shape gradients of the discrete energy and constraint functionals.

The energy is E = sum_i |m_i|^2 / (4 a_i) with m = L Phi and a the mixed
Voronoi areas, so dE splits into three parts:

  dE = sum_i H_i . d(L Phi)_i - sum_i |H_i|^2 da_i,   H_i = m_i / (2 a_i)

  (1) the Laplacian applied to fixed weights: contributes (L H)_p,
  (2) the cotangent-weight variation: each face corner's cot theta carries
      the factor (H_i - H_j) . (Phi_j - Phi_i) over its opposite edge,
  (3) the mixed-area variation, following exactly the same obtuse/Voronoi
      branch selection as the area computation itself.

Everything is the exact gradient of the discrete functional (differentiate
the discretization, not a discretized continuous gradient), so central
finite differences are the correctness oracle, not an approximation
target the code is tuned toward.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh
from .operators import FaceGeometry, cotan_laplacian, face_geometry, mixed_area_pieces


def _cot_gradients(geom: FaceGeometry, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of cot(theta) at corner k w.r.t. the face's three vertices.

    Returns (g_corner, g_next, g_prev) for the corner itself, the next
    corner (endpoint of edge u), and the previous corner (endpoint of v).
    """
    P = geom.corner_points
    u = P[:, (k + 1) % 3] - P[:, k]
    w = P[:, (k + 2) % 3] - P[:, k]
    n = geom.normals
    dbl = geom.double_areas[:, None]
    cot = geom.cots[:, k][:, None]
    g_next = (w - cot * np.cross(w, n)) / dbl
    g_prev = (u - cot * np.cross(n, u)) / dbl
    return -(g_next + g_prev), g_next, g_prev


def _area_gradient_buffer(geom: FaceGeometry) -> np.ndarray:
    """Per-(face, corner) gradient of the face area, shape (F, 3, 3)."""
    P = geom.corner_points
    opp = P[:, [2, 0, 1]] - P[:, [1, 2, 0]]  # edge opposite corner k
    return 0.5 * np.cross(geom.normals[:, None, :], opp)


def willmore_gradient(mesh: Mesh) -> np.ndarray:
    """Exact gradient of the discrete Willmore energy w.r.t. vertex positions."""
    geom = face_geometry(mesh)
    faces = mesh.faces
    V = mesh.n_vertices

    pieces = mixed_area_pieces(geom)
    areas = np.zeros(V)
    np.add.at(areas, faces.reshape(-1), pieces.reshape(-1))
    L = cotan_laplacian(mesh, geom)
    H = (L @ mesh.vertices) / (2.0 * areas[:, None])
    h2 = np.einsum("vi,vi->v", H, H)

    grad = L @ H  # part (1)

    P = geom.corner_points
    Hc = H[faces]            # (F, 3, 3) per-corner curvature vectors
    h2c = h2[faces]          # (F, 3)
    opp = P[:, [2, 0, 1]] - P[:, [1, 2, 0]]          # edge opposite corner k
    l2 = np.einsum("fki,fki->fk", opp, opp)
    # cot-weight factor per corner: (H_i - H_j).(Phi_j - Phi_i) on the edge
    # (i, j) opposite that corner
    s = np.einsum("fki,fki->fk", Hc[:, [1, 2, 0]] - Hc[:, [2, 0, 1]], opp)

    obtuse_corner = geom.corner_dots < 0.0
    any_obtuse = obtuse_corner.any(axis=1)
    voronoi = ~any_obtuse
    # h2 weight on each cot: the two endpoints of the opposite edge
    q = h2c[:, [1, 2, 0]] + h2c[:, [2, 0, 1]]

    buf = np.zeros_like(P)  # (F, corner, 3) pending scatter

    for k in range(3):
        g_c, g_n, g_p = _cot_gradients(geom, k)
        # part (2) always; part (3) Voronoi branch ties -q_k l2_k / 8 to cot_k
        coef = 0.5 * s[:, k] - np.where(voronoi, q[:, k] * l2[:, k] / 8.0, 0.0)
        buf[:, k] += coef[:, None] * g_c
        buf[:, (k + 1) % 3] += coef[:, None] * g_n
        buf[:, (k + 2) % 3] += coef[:, None] * g_p
        # part (3) Voronoi branch, |edge|^2 variation: -q_k cot_k grad(l2_k) / 8
        lcoef = np.where(voronoi, q[:, k] * geom.cots[:, k] / 4.0, 0.0)[:, None]
        buf[:, (k + 2) % 3] -= lcoef * opp[:, k]
        buf[:, (k + 1) % 3] += lcoef * opp[:, k]

    # part (3) obtuse branch: pieces are fixed fractions of the face area
    split = np.where(obtuse_corner, 0.5, 0.25)
    acoef = np.where(any_obtuse, -np.einsum("fk,fk->f", split, h2c), 0.0)
    buf += acoef[:, None, None] * _area_gradient_buffer(geom)

    np.add.at(grad, faces.reshape(-1), buf.reshape(-1, 3))
    return grad


def area_gradient(mesh: Mesh) -> np.ndarray:
    """Exact gradient of the total face area w.r.t. vertex positions."""
    geom = face_geometry(mesh)
    grad = np.zeros((mesh.n_vertices, 3))
    np.add.at(grad, mesh.faces.reshape(-1), _area_gradient_buffer(geom).reshape(-1, 3))
    return grad


def volume_gradient(mesh: Mesh) -> np.ndarray:
    """Exact gradient of the signed enclosed volume w.r.t. vertex positions.

    The centroid shift used by the volume formula needs no chain rule: a
    closed surface's volume does not depend on the reference point.
    """
    c = mesh.vertices.mean(axis=0)
    p = mesh.vertices[mesh.faces] - c
    buf = np.cross(p[:, [1, 2, 0]], p[:, [2, 0, 1]]) / 6.0  # corner k gets p_{k+1} x p_{k+2}
    grad = np.zeros((mesh.n_vertices, 3))
    np.add.at(grad, mesh.faces.reshape(-1), buf.reshape(-1, 3))
    return grad


def constraint_gradients(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """(gradient of area, gradient of volume), both (V, 3)."""
    return area_gradient(mesh), volume_gradient(mesh)
