import math

import numpy as np
import pytest

from willmore_iso import (
    cotan_laplacian,
    face_geometry,
    gauss_curvature,
    mean_curvature,
    surface_area,
    vertex_areas,
    vertex_normals,
)
from willmore_iso.generators import TorusSpec, torus
from willmore_iso.mesh import Mesh


def test_laplacian_rows_sum_to_zero(sphere3):
    L = cotan_laplacian(sphere3)
    assert float(np.abs(L.sum(axis=1)).max()) < 1e-12


def test_laplacian_is_symmetric(sphere3):
    L = cotan_laplacian(sphere3)
    assert float(np.abs((L - L.T)).max()) < 1e-12


def test_vertex_areas_partition_surface(sphere3):
    assert vertex_areas(sphere3).sum() == pytest.approx(surface_area(sphere3), rel=1e-12)


def test_vertex_normals_are_unit_and_outward(sphere3):
    n = vertex_normals(sphere3)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-12)
    # on a centered sphere the outward normal aligns with the position
    align = np.einsum("vi,vi->v", n, sphere3.vertices)
    assert align.min() > 0.9


def test_mean_curvature_of_unit_sphere(sphere4):
    mc = mean_curvature(sphere4)
    # unit sphere: scalar mean curvature 1, vector points inward
    assert np.abs(mc.scalar - 1.0).max() < 2e-3
    inward = np.einsum("vi,vi->v", mc.vector, sphere4.vertices)
    assert inward.max() < 0.0


def test_mean_curvature_scales_inversely(sphere3):
    # scale a sphere by r: scalar curvature must drop to 1/r
    r = 3.0
    scaled = sphere3.with_vertices(sphere3.vertices * r)
    mc = mean_curvature(scaled)
    assert np.abs(mc.scalar - 1.0 / r).max() < 2e-3 / r


def test_gauss_curvature_sums_to_topology(sphere3):
    total = (gauss_curvature(sphere3) * vertex_areas(sphere3)).sum()
    assert total == pytest.approx(4.0 * math.pi, rel=1e-13)


def test_gauss_curvature_torus_totals_zero():
    mesh = torus(TorusSpec(1.0, 2.0, 24, 24))
    total = (gauss_curvature(mesh) * vertex_areas(mesh)).sum()
    assert abs(total) < 1e-10


def test_face_geometry_rejects_degenerate(tetrahedron):
    verts = tetrahedron.vertices.copy()
    verts[1] = verts[0]
    with pytest.raises(ValueError):
        face_geometry(Mesh(verts, tetrahedron.faces))


def test_laplacian_annihilates_constants(sphere2):
    L = cotan_laplacian(sphere2)
    ones = np.ones(sphere2.n_vertices)
    assert float(np.abs(L @ ones).max()) < 1e-12
