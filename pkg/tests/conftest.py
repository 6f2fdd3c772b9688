"""Shared fixtures and the finite-difference oracle.

The oracle is deliberately independent of the package's gradient code:
it evaluates the plain scalar functionals at displaced vertex positions
and never touches the analytic formulas it is checking.
"""

import numpy as np
import pytest

from willmore_iso import Mesh, clifford_torus, icosphere


def central_difference(fn, vertices, h=1e-6):
    """Dense central-difference gradient of fn(vertices) -> float."""
    grad = np.zeros_like(vertices)
    for i in range(vertices.shape[0]):
        for j in range(3):
            vp = vertices.copy()
            vm = vertices.copy()
            vp[i, j] += h
            vm[i, j] -= h
            grad[i, j] = (fn(vp) - fn(vm)) / (2.0 * h)
    return grad


def rel_max_err(analytic, numeric):
    scale = max(float(np.abs(numeric).max()), 1e-300)
    return float(np.abs(analytic - numeric).max()) / scale


@pytest.fixture(scope="session")
def sphere2():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere3():
    return icosphere(3)


@pytest.fixture(scope="session")
def sphere4():
    return icosphere(4)


@pytest.fixture(scope="session")
def clifford96():
    return clifford_torus(96, 96)


@pytest.fixture()
def tetrahedron():
    verts = np.array(
        [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ]
    )
    faces = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
    return Mesh(verts, faces)
