"""Global functionals: Willmore energy in three forms, area, enclosed volume,
isoperimetric ratio, and the inequality checks that go with them.

The squared mean curvature is always |Hvec|^2 (the full vector magnitude),
never the squared signed scalar; with that choice the three energy forms
differ only by the angle-defect total, which telescopes exactly, so they
agree to floating-point precision on every mesh. The cross-form spread is
still reported because it is a cheap mesh-quality diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intersect import self_intersects
from .mesh import Mesh, SubMesh, diameter, euler_genus
from .operators import (
    cotan_laplacian,
    face_geometry,
    mean_curvature,
    mixed_area_pieces,
)

FOUR_PI = 4.0 * np.pi
INEQUALITY_SLACK = 0.05  # discretization slack on inequality checks


def surface_area(mesh: Mesh) -> float:
    """Total face area."""
    return float(face_geometry(mesh).areas.sum())


def signed_volume(mesh: Mesh) -> float:
    """Signed enclosed volume, positive for outward orientation.

    Sum of signed tetrahedra against the vertex centroid; the shift makes
    the value translation-stable without changing it (the mesh is closed).
    No embeddedness check; see enclosed_volume for the checked contract.
    """
    c = mesh.vertices.mean(axis=0)
    p = mesh.vertices[mesh.faces] - c
    return float(np.einsum("fi,fi->f", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)


def enclosed_volume(mesh: Mesh, check_embedded: bool = True) -> float:
    """Enclosed volume of an embedded closed mesh.

    Raises ValueError for self-intersecting input (the bounded component
    is then ill-defined). The flow driver skips the check and runs its own
    cadence-based embeddedness tests instead; that path is the only
    sanctioned use of check_embedded=False.
    """
    if check_embedded and self_intersects(mesh):
        raise ValueError("volume undefined for non-embedded mesh")
    return signed_volume(mesh)


def iso_ratio(mesh: Mesh, check_embedded: bool = True) -> float:
    """Isoperimetric ratio area^3 / volume^2 (scale-invariant, >= 36 pi)."""
    vol = enclosed_volume(mesh, check_embedded=check_embedded)
    if vol <= 0.0:
        raise ValueError(f"isoperimetric ratio undefined for volume {vol:.3e} <= 0")
    return surface_area(mesh) ** 3 / vol**2


def iso_ratio_from(area: float, volume: float) -> float:
    """Isoperimetric ratio from precomputed area and volume."""
    if volume == 0.0:
        return float("inf")
    return area**3 / volume**2


def willmore_energy(mesh: Mesh) -> float:
    """Willmore energy: sum of |Hvec_i|^2 A_i over vertices."""
    geom = face_geometry(mesh)
    L = cotan_laplacian(mesh, geom)
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.faces.reshape(-1), mixed_area_pieces(geom).reshape(-1))
    m = L @ mesh.vertices  # = 2 A_i Hvec_i
    return float((np.einsum("vi,vi->v", m, m) / (4.0 * areas)).sum())


def _angle_defect_terms(mesh: Mesh) -> tuple[float, float]:
    """(sum of K_i A_i, 2 pi chi); the first telescopes to the second."""
    geom = face_geometry(mesh)
    angles = np.arctan2(geom.double_areas[:, None], geom.corner_dots)
    total_defect = 2.0 * np.pi * mesh.n_vertices - float(angles.sum())
    chi, _ = euler_genus(mesh)
    return total_defect, 2.0 * np.pi * chi


def willmore_alt_forms(mesh: Mesh) -> tuple[float, float]:
    """The two Gauss-Bonnet-equivalent Willmore forms.

    dn form:      1/4 sum (4 H_i^2 - 2 K_i) A_i + pi chi
    umbilic form: sum (H_i^2 - K_i) A_i + 2 pi chi
    with H_i^2 = |Hvec_i|^2. Both equal willmore_energy up to the float
    error of the angle-defect telescope.
    """
    w = willmore_energy(mesh)
    ka, two_pi_chi = _angle_defect_terms(mesh)
    dn_form = w - 0.5 * ka + 0.5 * two_pi_chi
    umbilic_form = w - ka + two_pi_chi
    return dn_form, umbilic_form


@dataclass
class EnergyReport:
    """One mesh's energies, measures, and identity residuals."""

    willmore_H2: float
    willmore_dn_form: float
    willmore_umbilic_form: float
    form_spread: float
    area: float
    volume: float
    iso: float
    gauss_bonnet_residual: float
    genus: int

    CSV_COLUMNS = (
        "willmore_H2",
        "willmore_dn_form",
        "willmore_umbilic_form",
        "form_spread",
        "area",
        "volume",
        "iso",
        "gauss_bonnet_residual",
        "genus",
    )

    def to_kv(self) -> str:
        """Flat key=value block, one key per line, 17 significant digits."""
        lines = []
        for key in self.CSV_COLUMNS:
            val = getattr(self, key)
            lines.append(f"{key} = {val}" if isinstance(val, int) else f"{key} = {val:.17g}")
        return "\n".join(lines)

    def to_csv_row(self) -> str:
        vals = []
        for key in self.CSV_COLUMNS:
            val = getattr(self, key)
            vals.append(str(val) if isinstance(val, int) else f"{val:.17g}")
        return ",".join(vals)

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls.CSV_COLUMNS)


def energy_report(mesh: Mesh, check_embedded: bool = True) -> EnergyReport:
    """Assemble the full report: three W forms, area, volume, iso, residuals."""
    w = willmore_energy(mesh)
    dn_form, umbilic_form = willmore_alt_forms(mesh)
    area = surface_area(mesh)
    volume = enclosed_volume(mesh, check_embedded=check_embedded)
    iso = area**3 / volume**2 if volume != 0.0 else float("inf")
    ka, two_pi_chi = _angle_defect_terms(mesh)
    gb_residual = abs(ka - two_pi_chi) / max(abs(two_pi_chi), FOUR_PI)
    chi, genus = euler_genus(mesh)
    forms = (w, dn_form, umbilic_form)
    spread = (max(forms) - min(forms)) / max(abs(w), 1e-300)
    return EnergyReport(w, dn_form, umbilic_form, spread, area, volume, iso, gb_residual, genus)


def minkowski_residual(mesh: Mesh) -> float:
    """Relative residual of the closed-surface Minkowski identity.

    For a closed surface, Area + sum <Phi_i - c, Hvec_i> A_i vanishes
    (divergence theorem applied to the position field). The pairing here
    reconstitutes Hvec_i as (scalar curvature) * (inward vertex normal):
    pairing the raw Laplacian vector instead would make the identity exact
    for any mesh (the discrete Dirichlet energy of the position field
    equals the total area identically), which measures nothing. With the
    normal-projected vector the residual is genuine discretization error,
    scale-free, and shrinks under refinement.
    """
    geom = face_geometry(mesh)
    area = float(geom.areas.sum())
    c = mesh.vertices.mean(axis=0)
    mc = mean_curvature(mesh)
    areas = np.zeros(mesh.n_vertices)
    np.add.at(areas, mesh.faces.reshape(-1), mixed_area_pieces(geom).reshape(-1))
    pairing = float(
        (np.einsum("vi,vi->v", mesh.vertices - c, -mc.normal) * mc.scalar * areas).sum()
    )
    return abs(area + pairing) / area


@dataclass
class BoundaryBoundReport:
    """Outcome of the boundary monotonicity bound on a surface patch."""

    lhs: float                # always 4 pi
    rhs: float                # W(patch) + 2 * boundary length / distance
    willmore: float           # patch Willmore energy
    boundary_length: float
    distance: float           # farthest patch vertex from the boundary
    satisfied: bool           # rhs >= 4 pi (1 - slack); False when vacuous
    vacuous: bool             # no boundary, or boundary touches everything


def boundary_bound_check(patch: SubMesh, slack: float = INEQUALITY_SLACK) -> BoundaryBoundReport:
    """Check 4 pi <= W(patch) + 2 |boundary| / d on a mesh patch.

    Curvature is measured on the closed parent surface; the patch
    contributes its restricted vertex areas. The distance d is the
    sup-inf set distance sampled at vertices: the farthest patch vertex
    from the boundary polyline. Patches without boundary (or with d = 0)
    make the bound vacuous.
    """
    parent = patch.parent
    geom = face_geometry(parent)
    pieces = mixed_area_pieces(geom)
    patch_areas = np.zeros(parent.n_vertices)
    np.add.at(
        patch_areas,
        parent.faces[patch.face_indices].reshape(-1),
        pieces[patch.face_indices].reshape(-1),
    )
    hvec = mean_curvature(parent).vector
    w_patch = float((np.einsum("vi,vi->v", hvec, hvec) * patch_areas).sum())

    seg_a, seg_b = patch.boundary_segments()
    if len(seg_a) == 0:
        return BoundaryBoundReport(FOUR_PI, float("inf"), w_patch, 0.0, 0.0, False, True)
    length = patch.boundary_length()

    pts = parent.vertices[patch.vertex_indices]
    d = seg_b - seg_a  # (S, 3)
    denom = np.maximum(np.einsum("si,si->s", d, d), 1e-300)
    rel = pts[:, None, :] - seg_a[None, :, :]  # (N, S, 3)
    t = np.clip(np.einsum("nsi,si->ns", rel, d) / denom, 0.0, 1.0)
    closest = seg_a[None] + t[:, :, None] * d[None]
    dists = np.linalg.norm(pts[:, None, :] - closest, axis=2).min(axis=1)
    dist = float(dists.max())

    if dist <= 1e-12 * parent.bbox_diagonal:
        return BoundaryBoundReport(FOUR_PI, float("inf"), w_patch, length, dist, False, True)
    rhs = w_patch + 2.0 * length / dist
    return BoundaryBoundReport(FOUR_PI, rhs, w_patch, length, dist, rhs >= FOUR_PI * (1.0 - slack), False)


def simon_check(mesh: Mesh) -> bool:
    """Check Area / W <= diam^2 for a closed surface (left Simon inequality)."""
    w = willmore_energy(mesh)
    area = surface_area(mesh)
    diam = diameter(mesh)
    return area / w <= diam**2 * (1.0 + 1e-9)
