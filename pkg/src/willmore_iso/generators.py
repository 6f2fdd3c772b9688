"""Analytic test surfaces and conformal transformations.

Icospheres and tori of revolution are the reference shapes; sphere
inversions supply conformal images for invariance tests and warm starts;
normal-directed perturbation seeds descent runs. All generators emit
meshes that pass validation with empty reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functionals import signed_volume
from .intersect import self_intersects
from .mesh import Mesh, validate
from .operators import vertex_normals


def icosphere(subdivisions: int) -> Mesh:
    """Unit icosphere: icosahedron subdivided n times, V = 10 * 4^n + 2.

    Each subdivision splits every face at the edge midpoints and projects
    new vertices to the unit sphere; face winding stays outward.
    """
    if not 0 <= subdivisions <= 7:
        raise ValueError(f"subdivisions must be in [0, 7], got {subdivisions}")
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        verts, faces = _subdivide(verts, faces)
        verts /= np.linalg.norm(verts, axis=1)[:, None]
    return Mesh(verts, faces)


def _subdivide(verts: np.ndarray, faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One loop of midpoint subdivision (4 children per face)."""
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    edges, inverse = np.unique(e, axis=0, return_inverse=True)
    mid = 0.5 * (verts[edges[:, 0]] + verts[edges[:, 1]])
    mid_idx = len(verts) + inverse.reshape(3, -1).T  # (F, 3): mids of (01, 12, 20)
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    mab, mbc, mca = mid_idx[:, 0], mid_idx[:, 1], mid_idx[:, 2]
    new_faces = np.concatenate(
        [
            np.stack([a, mab, mca], axis=1),
            np.stack([b, mbc, mab], axis=1),
            np.stack([c, mca, mbc], axis=1),
            np.stack([mab, mbc, mca], axis=1),
        ]
    )
    return np.vstack([verts, mid]), new_faces


@dataclass(frozen=True)
class TorusSpec:
    """Torus of revolution: tube radius r, ring radius R > r, (nu, nv) grid."""

    r: float
    R: float
    nu: int = 64
    nv: int = 64

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"tube radius must be positive, got {self.r}")
        if not self.R > self.r:
            raise ValueError(f"ring radius must exceed tube radius, got R={self.R}, r={self.r}")
        if self.nu < 8 or self.nv < 8:
            raise ValueError(f"grid resolution must be at least 8, got ({self.nu}, {self.nv})")


def torus(spec: TorusSpec) -> Mesh:
    """Grid-embedded torus of revolution, genus 1, outward orientation.

    Quads split along the same diagonal everywhere; alternating diagonals
    would inject curvature noise at the grid scale.
    """
    nu, nv = spec.nu, spec.nv
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = spec.R + spec.r * np.cos(vv)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu), spec.r * np.sin(vv)], axis=-1).reshape(-1, 3)

    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    i, j = i.reshape(-1), j.reshape(-1)
    v00 = i * nv + j
    v10 = ((i + 1) % nu) * nv + j
    v11 = ((i + 1) % nu) * nv + (j + 1) % nv
    v01 = i * nv + (j + 1) % nv
    faces = np.concatenate(
        [np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)]
    )
    return Mesh(verts, faces)


def clifford_torus(nu: int = 96, nv: int = 96) -> Mesh:
    """Torus of revolution with radii ratio 1 : sqrt(2) (tube radius 1)."""
    return torus(TorusSpec(1.0, np.sqrt(2.0), nu, nv))


@dataclass(frozen=True)
class InversionSpec:
    """Sphere inversion x -> center + rho^2 (x - center) / |x - center|^2."""

    center: tuple[float, float, float]
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"inversion radius must be positive, got {self.radius}")


def sphere_inversion(mesh: Mesh, spec: InversionSpec) -> Mesh:
    """Vertex-wise sphere inversion with faces rewound to outward orientation.

    Inversion reverses orientation, so face winding is flipped after the
    map; if the image still encloses negative volume (center inside the
    enclosed region) the winding is restored instead. Applying the same
    spec twice returns the original positions.
    """
    center = np.asarray(spec.center, dtype=np.float64)
    rel = mesh.vertices - center
    dist2 = np.einsum("vi,vi->v", rel, rel)
    min_dist = float(np.sqrt(dist2.min()))
    if min_dist <= 1e-6 * spec.radius:
        raise ValueError(
            f"inversion center too close to the surface (distance {min_dist:.3e} <= 1e-6 * radius)"
        )
    images = center + spec.radius**2 * rel / dist2[:, None]
    out = Mesh(images, mesh.faces[:, [0, 2, 1]])
    if signed_volume(out) < 0.0:
        out = Mesh(images, mesh.faces)
    return out


def perturb(mesh: Mesh, amplitude: float, seed: int) -> Mesh:
    """Displace vertices along their normals by amplitude * bbox diagonal.

    Per-vertex offsets are uniform(-1, 1) draws, deterministic for a given
    seed. If the result self-intersects or fails validation, the same
    draw is retried at half the amplitude, up to three times.
    """
    if not 0.0 <= amplitude <= 0.1:
        raise ValueError(f"amplitude must be in [0, 0.1], got {amplitude}")
    if amplitude == 0.0:
        return mesh
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=mesh.n_vertices)
    normals = vertex_normals(mesh)
    scale = amplitude * mesh.bbox_diagonal
    for attempt in range(4):
        candidate = mesh.with_vertices(mesh.vertices + (scale * noise)[:, None] * normals)
        report = validate(candidate)
        if report.is_valid and not self_intersects(candidate):
            return candidate
        scale *= 0.5
    raise ValueError(
        f"perturbation self-intersects even after 3 amplitude halvings (seed {seed}, amplitude {amplitude})"
    )
