import math

import numpy as np
import pytest

from willmore_iso import (
    SubMesh,
    boundary_bound_check,
    enclosed_volume,
    energy_report,
    icosphere,
    iso_ratio,
    iso_ratio_from,
    minkowski_residual,
    simon_check,
    surface_area,
    signed_volume,
    willmore_alt_forms,
    willmore_energy,
)
from willmore_iso.generators import TorusSpec, perturb, torus

FOUR_PI = 4.0 * math.pi


def test_sphere_energy_and_ratio(sphere4):
    assert willmore_energy(sphere4) == pytest.approx(FOUR_PI, rel=1e-2)
    assert iso_ratio(sphere4, check_embedded=False) == pytest.approx(
        36.0 * math.pi, rel=1.5e-2
    )


def test_area_and_volume_of_unit_sphere(sphere4):
    assert surface_area(sphere4) == pytest.approx(FOUR_PI, rel=2e-3)
    assert signed_volume(sphere4) == pytest.approx(4.0 * math.pi / 3.0, rel=3e-3)


def test_scale_invariance(sphere3):
    scaled = sphere3.with_vertices(sphere3.vertices * 2.7)
    assert willmore_energy(scaled) == pytest.approx(willmore_energy(sphere3), rel=1e-12)
    assert iso_ratio(scaled, check_embedded=False) == pytest.approx(
        iso_ratio(sphere3, check_embedded=False), rel=1e-12
    )
    assert surface_area(scaled) == pytest.approx(2.7**2 * surface_area(sphere3), rel=1e-12)
    assert signed_volume(scaled) == pytest.approx(2.7**3 * signed_volume(sphere3), rel=1e-12)


def test_energy_forms_agree(sphere3):
    w = willmore_energy(sphere3)
    dn, umbilic = willmore_alt_forms(sphere3)
    assert dn == pytest.approx(w, rel=1e-11)
    assert umbilic == pytest.approx(w, rel=1e-11)


def test_energy_report_fields(sphere3):
    report = energy_report(sphere3)
    assert report.genus == 0
    assert report.gauss_bonnet_residual < 1e-12
    assert report.form_spread < 1e-11
    assert report.iso == pytest.approx(
        iso_ratio_from(report.area, report.volume), rel=1e-15
    )
    row = report.to_csv_row()
    assert len(row.split(",")) == len(report.CSV_COLUMNS)


def test_enclosed_volume_checks_embeddedness(sphere2):
    # fold the sphere through itself so faces cross
    bad = sphere2.with_vertices(
        np.where(sphere2.vertices[:, :1] > 0.3, -sphere2.vertices, sphere2.vertices)
    )
    with pytest.raises(ValueError):
        enclosed_volume(bad, check_embedded=True)


def test_iso_ratio_from_zero_volume():
    assert iso_ratio_from(1.0, 0.0) == math.inf


def test_minkowski_residual_small_on_sphere(sphere3):
    assert abs(minkowski_residual(sphere3)) < 1e-2


def test_simon_inequality_on_generated_meshes(sphere3):
    assert simon_check(sphere3)
    assert simon_check(torus(TorusSpec(1.0, 2.0, 24, 24)))
    assert simon_check(perturb(sphere3, 0.02, seed=2))


def test_round_sphere_is_near_minimal(sphere4):
    # no generated shape may undercut the round sphere's energy
    w_sphere = willmore_energy(sphere4)
    for other in (
        perturb(sphere4, 0.01, seed=1),
        torus(TorusSpec(1.0, 1.4, 32, 32)),
    ):
        assert willmore_energy(other) > w_sphere


def test_boundary_bound_on_spherical_cap(sphere3):
    centroids = sphere3.vertices[sphere3.faces].mean(axis=1)
    patch = SubMesh(sphere3, np.flatnonzero(centroids[:, 2] > 0.0))
    report = boundary_bound_check(patch)
    assert not report.vacuous
    assert report.satisfied
    assert report.lhs == pytest.approx(FOUR_PI)
    assert report.rhs == pytest.approx(
        report.willmore + 2.0 * report.boundary_length / report.distance,
        rel=1e-12,
    )
    # half the sphere carries about half its energy
    assert report.willmore == pytest.approx(FOUR_PI / 2.0, rel=0.1)
    # the pole is the farthest point from the equatorial boundary
    assert report.distance == pytest.approx(math.sqrt(2.0), rel=0.1)


def test_boundary_bound_vacuous_cases(sphere2):
    whole = boundary_bound_check(SubMesh(sphere2, np.arange(sphere2.n_faces)))
    assert whole.vacuous
    assert not whole.satisfied
    assert whole.rhs == math.inf
    # every vertex of a single face sits on its boundary, so d = 0
    single = boundary_bound_check(SubMesh(sphere2, [0]))
    assert single.vacuous
    assert not single.satisfied


def test_boundary_bound_tightens_on_small_caps(sphere3):
    # shrinking the cap raises length/d, pushing the bound further from
    # equality; the full hemisphere is the closest call among caps
    centroids = sphere3.vertices[sphere3.faces].mean(axis=1)
    hemi = boundary_bound_check(SubMesh(sphere3, np.flatnonzero(centroids[:, 2] > 0.0)))
    small = boundary_bound_check(SubMesh(sphere3, np.flatnonzero(centroids[:, 2] > 0.8)))
    assert small.satisfied
    assert small.rhs > hemi.rhs
