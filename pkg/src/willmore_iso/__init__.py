"""Willmore energy minimization at fixed isoperimetric ratio.

Triangle-mesh discretization of the constrained variational problem:
minimize the Willmore energy of a closed genus-g surface while holding
the ratio Area^3 / Volume^2 fixed, together with the scalar bound
machinery (Li-Yau thresholds, the omega_g partition minimum, and the
admissibility threshold) that decides where constrained minimizers can
exist.
"""

from .bounds import (
    BetaTable,
    SchygullaCurve,
    ThresholdReport,
    ig_threshold,
    li_yau_bound,
    omega_g,
)
from .flow import (
    FlowConfig,
    FlowTrace,
    MultiplierReport,
    constrained_step,
    multiplier_report,
    run_flow,
)
from .functionals import (
    BoundaryBoundReport,
    EnergyReport,
    boundary_bound_check,
    energy_report,
    enclosed_volume,
    iso_ratio,
    iso_ratio_from,
    minkowski_residual,
    simon_check,
    surface_area,
    signed_volume,
    willmore_alt_forms,
    willmore_energy,
)
from .generators import (
    InversionSpec,
    TorusSpec,
    clifford_torus,
    icosphere,
    perturb,
    sphere_inversion,
    torus,
)
from .gradients import (
    area_gradient,
    constraint_gradients,
    volume_gradient,
    willmore_gradient,
)
from .intersect import IntersectionResult, self_intersects
from .mesh import Mesh, SubMesh, ValidationReport, diameter, euler_genus, validate
from .meshio import MeshFormatError, load, save
from .operators import (
    cotan_laplacian,
    face_geometry,
    gauss_curvature,
    mean_curvature,
    vertex_areas,
    vertex_normals,
)
from .sweep import SweepResult, SweepRow, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BetaTable",
    "BoundaryBoundReport",
    "EnergyReport",
    "FlowConfig",
    "FlowTrace",
    "IntersectionResult",
    "InversionSpec",
    "Mesh",
    "MeshFormatError",
    "MultiplierReport",
    "SchygullaCurve",
    "SubMesh",
    "SweepResult",
    "SweepRow",
    "ThresholdReport",
    "TorusSpec",
    "ValidationReport",
    "area_gradient",
    "boundary_bound_check",
    "clifford_torus",
    "constrained_step",
    "constraint_gradients",
    "cotan_laplacian",
    "diameter",
    "enclosed_volume",
    "energy_report",
    "euler_genus",
    "face_geometry",
    "gauss_curvature",
    "icosphere",
    "ig_threshold",
    "iso_ratio",
    "iso_ratio_from",
    "li_yau_bound",
    "load",
    "mean_curvature",
    "minkowski_residual",
    "multiplier_report",
    "omega_g",
    "perturb",
    "run_flow",
    "run_sweep",
    "save",
    "self_intersects",
    "signed_volume",
    "simon_check",
    "sphere_inversion",
    "surface_area",
    "torus",
    "validate",
    "vertex_areas",
    "vertex_normals",
    "volume_gradient",
    "willmore_alt_forms",
    "willmore_energy",
    "willmore_gradient",
]
