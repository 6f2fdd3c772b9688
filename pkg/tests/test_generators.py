import math

import numpy as np
import pytest

from willmore_iso import (
    InversionSpec,
    clifford_torus,
    icosphere,
    iso_ratio,
    perturb,
    sphere_inversion,
    surface_area,
    signed_volume,
    torus,
    validate,
    willmore_energy,
)
from willmore_iso.generators import TorusSpec


def test_icosphere_vertices_on_unit_sphere(sphere3):
    radii = np.linalg.norm(sphere3.vertices, axis=1)
    assert np.abs(radii - 1.0).max() < 1e-12


def test_icosphere_rejects_negative_subdivisions():
    with pytest.raises(ValueError):
        icosphere(-1)


def test_torus_is_valid_genus_one():
    mesh = torus(TorusSpec(0.5, 1.5, 16, 24))
    assert validate(mesh).is_valid
    assert signed_volume(mesh) > 0.0


def test_torus_volume_matches_closed_form():
    # solid of revolution: V = 2 pi^2 R r^2
    r, R = 0.5, 2.0
    mesh = torus(TorusSpec(r, R, 128, 128))
    assert signed_volume(mesh) == pytest.approx(2.0 * math.pi**2 * R * r * r, rel=2e-3)


def test_torus_rejects_bad_radii():
    with pytest.raises(ValueError):
        torus(TorusSpec(1.0, 0.5, 16, 16))
    with pytest.raises(ValueError):
        torus(TorusSpec(-1.0, 2.0, 16, 16))
    with pytest.raises(ValueError):
        torus(TorusSpec(1.0, 2.0, 4, 16))


def test_clifford_ratio_and_energy(clifford96):
    w = willmore_energy(clifford96)
    assert w == pytest.approx(2.0 * math.pi**2, rel=1e-2)
    assert iso_ratio(clifford96, check_embedded=False) == pytest.approx(
        16.0 * math.sqrt(2.0) * math.pi**2, rel=1.5e-2
    )


def test_inversion_is_an_involution(sphere2):
    spec = InversionSpec(center=(3.0, 0.5, -1.0), radius=1.25)
    twice = sphere_inversion(sphere_inversion(sphere2, spec), spec)
    assert np.allclose(twice.vertices, sphere2.vertices, atol=1e-12)


def test_inversion_keeps_positive_volume(clifford96):
    spec = InversionSpec(center=(4.2, 0.0, 0.0), radius=1.0)
    image = sphere_inversion(clifford96, spec)
    assert signed_volume(image) > 0.0
    assert validate(image).is_valid


def test_inversion_rejects_center_on_surface(sphere2):
    with pytest.raises(ValueError):
        sphere_inversion(sphere2, InversionSpec(center=(1.0, 0.0, 0.0), radius=1.0))


def test_perturb_is_deterministic(sphere2):
    a = perturb(sphere2, 0.01, seed=5)
    b = perturb(sphere2, 0.01, seed=5)
    c = perturb(sphere2, 0.01, seed=6)
    assert np.array_equal(a.vertices, b.vertices)
    assert not np.array_equal(a.vertices, c.vertices)


def test_perturb_amplitude_bounds_displacement(sphere2):
    amp = 0.01
    moved = perturb(sphere2, amp, seed=1)
    dist = np.linalg.norm(moved.vertices - sphere2.vertices, axis=1)
    assert dist.max() <= amp * sphere2.bbox_diagonal * (1.0 + 1e-12)
    assert dist.max() > 0.0
