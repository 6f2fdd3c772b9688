"""Constrained Willmore descent at fixed area and volume.

The driver minimizes the Willmore energy while holding surface area and
enclosed volume at prescribed targets (fixing both fixes the isoperimetric
ratio and the scale). Each iteration projects the energy gradient onto the
tangent space of the constraint set (a 2x2 Gram solve), backtracks along
the projected direction until an Armijo test passes, and then pulls the
point back onto the constraint set with a small Newton correction in the
span of the constraint gradients. Multipliers come out of the same Gram
system and are reported per accepted step.

The area and volume gradients are nearly parallel on near-round meshes,
so the Gram matrix can be numerically singular; the projector then falls
back to the single combined direction that moves the isoperimetric ratio
(3V gradA - 2A gradV), and to the area gradient alone if even that
vanishes. This keeps descent alive on the sphere itself, where every
direction that preserves area also preserves volume to first order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .functionals import iso_ratio_from, willmore_energy
from .gradients import constraint_gradients, willmore_gradient
from .intersect import self_intersects
from .mesh import Mesh
from .operators import cotan_laplacian, face_geometry

_GRAM_SIN2_FLOOR = 1e-12  # normalized Gram determinant below this is singular
_MAX_HALVINGS = 30


@dataclass(frozen=True)
class FlowConfig:
    """Knobs for run_flow. All lengths are absolute (mesh units)."""

    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    constraint_tolerance: float = 1e-8
    initial_step: float | None = None  # None: 1e-3 * bbox diagonal
    backtracking_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    restoration_max_iters: int = 5
    remesh_every: int = 0  # 0 disables tangential smoothing
    random_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not 0.0 < self.backtracking_factor < 1.0:
            raise ValueError("backtracking_factor must lie in (0, 1)")
        if not 0.0 < self.sufficient_decrease < 1.0:
            raise ValueError("sufficient_decrease must lie in (0, 1)")
        if self.initial_step is not None and self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if self.gradient_tolerance <= 0.0 or self.constraint_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.restoration_max_iters < 1:
            raise ValueError("restoration_max_iters must be at least 1")
        if self.remesh_every < 0:
            raise ValueError("remesh_every must be nonnegative")


@dataclass
class FlowTrace:
    """Per accepted step history of a flow run plus the final verdict."""

    CSV_COLUMNS = (
        "iteration",
        "willmore",
        "area",
        "volume",
        "iso",
        "grad_proj_norm",
        "step",
        "mu_area",
        "mu_volume",
        "restoration_iters",
    )

    rows: list[tuple] = field(default_factory=list)
    status: str = "max_iters"
    mesh: Mesh | None = None
    area_target: float = 0.0
    volume_target: float = 0.0
    retargeted: bool = False

    def append(self, *values) -> None:
        if len(values) != len(self.CSV_COLUMNS):
            raise ValueError("trace row has wrong arity")
        self.rows.append(tuple(values))

    @property
    def iterations(self) -> int:
        return len(self.rows)

    @property
    def willmore_history(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def final(self, column: str) -> float:
        if not self.rows:
            raise ValueError("empty trace")
        return self.rows[-1][self.CSV_COLUMNS.index(column)]

    def csv_header(self) -> str:
        return ",".join(self.CSV_COLUMNS)

    def to_csv(self) -> str:
        lines = [self.csv_header()]
        for row in self.rows:
            parts = []
            for name, value in zip(self.CSV_COLUMNS, row):
                if name in ("iteration", "restoration_iters"):
                    parts.append(str(int(value)))
                else:
                    parts.append(format(float(value), ".17g"))
            lines.append(",".join(parts))
        return "\n".join(lines) + "\n"


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("vi,vi->", a, b))


def _project(
    grad: np.ndarray,
    ga: np.ndarray,
    gv: np.ndarray,
    area: float = 1.0,
    volume: float = 1.0,
):
    """Project grad off span{ga, gv}; returns (proj, mu_area, mu_volume).

    A singular Gram matrix (ga parallel to gv, the round sphere being the
    textbook case) collapses the two Lagrange directions into one; then the
    projector falls back to the combined direction 3V ga - 2A gv, which is
    the gradient of the isoperimetric ratio up to a positive factor, and to
    ga alone if even that vanishes (on the sphere the iso gradient is zero
    too: iso is minimized there).
    """
    gaa = _dot(ga, ga)
    gvv = _dot(gv, gv)
    gav = _dot(ga, gv)
    det = gaa * gvv - gav * gav
    scale = gaa * gvv
    if scale > 0.0 and det / scale > _GRAM_SIN2_FLOOR:
        rhs = np.array([_dot(grad, ga), _dot(grad, gv)])
        mu = np.linalg.solve(np.array([[gaa, gav], [gav, gvv]]), rhs)
        return grad - mu[0] * ga - mu[1] * gv, float(mu[0]), float(mu[1])
    d = 3.0 * volume * ga - 2.0 * area * gv
    dd = _dot(d, d)
    if dd <= _GRAM_SIN2_FLOOR * max(gaa, gvv):
        d, dd = ga, gaa
    if dd == 0.0:
        return grad.copy(), 0.0, 0.0
    mu = _dot(grad, d) / dd
    return grad - mu * d, mu, 0.0


def _constraint_error(area, volume, area_target, volume_target) -> float:
    return max(
        abs(area - area_target) / max(area_target, 1e-300),
        abs(volume - volume_target) / max(abs(volume_target), 1e-300),
    )


def _rescale_volume(mesh: Mesh, volume: float, volume_target: float) -> Mesh:
    """Uniform scale about the vertex centroid that fixes volume exactly."""
    s = np.cbrt(volume_target / volume)
    c = mesh.vertices.mean(axis=0)
    return mesh.with_vertices(c + s * (mesh.vertices - c))


def _restore(
    mesh: Mesh,
    area_target: float,
    volume_target: float,
    tol: float,
    max_iters: int,
):
    """Damped Newton correction in span{gradA, gradV} onto the constraint set.

    Two unknowns, gradients refreshed every iteration, Jacobian approximated
    by the Gram matrix of the constraint gradients. The Gram matrix is badly
    conditioned near round shapes (normalized determinant drops to ~1e-4 on
    icospheres), which is harmless for the small violations a projected
    descent step leaves behind but diverges on large ones; callers with a
    far-off mesh should go through _initial_restore instead. Returns
    (mesh, iters_used, ok).
    """
    from .functionals import signed_volume, surface_area

    current = mesh
    cap = 0.05 * mesh.bbox_diagonal
    area = surface_area(current)
    volume = signed_volume(current)
    err = _constraint_error(area, volume, area_target, volume_target)
    for it in range(max_iters):
        if err <= tol:
            return current, it, True
        ra = area - area_target
        rv = volume - volume_target
        ga, gv = constraint_gradients(current)
        gaa = _dot(ga, ga)
        gvv = _dot(gv, gv)
        gav = _dot(ga, gv)
        det = gaa * gvv - gav * gav
        scale = gaa * gvv
        if scale > 0.0 and det / scale > _GRAM_SIN2_FLOOR:
            coef = np.linalg.solve(
                np.array([[gaa, gav], [gav, gvv]]), np.array([ra, rv])
            )
            delta = -coef[0] * ga - coef[1] * gv
        else:
            # rank-one fallback: correct area along its own gradient
            if gaa == 0.0:
                return current, it, False
            delta = -(ra / gaa) * ga
        biggest = float(np.max(np.linalg.norm(delta, axis=1)))
        if biggest > cap:
            delta *= cap / biggest
        stepped = False
        for _ in range(12):
            candidate = current.with_vertices(current.vertices + delta)
            try:
                a1 = surface_area(candidate)
                v1 = signed_volume(candidate)
            except ValueError:
                delta *= 0.5  # degenerate face: back off
                continue
            e1 = _constraint_error(a1, v1, area_target, volume_target)
            if e1 < err:
                current, area, volume, err = candidate, a1, v1, e1
                stepped = True
                break
            delta *= 0.5
        if not stepped:
            return current, it, err <= tol
    return current, max_iters, err <= tol


def _implicit_smooth(mesh: Mesh, t: float) -> Mesh:
    """One backward-Euler mean-curvature smoothing step (M - tL) x' = M x.

    Unconditionally stable, so it removes high-frequency area excess that
    explicit curvature steps would amplify.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    from .operators import vertex_areas

    L = cotan_laplacian(mesh)
    M = sp.diags(vertex_areas(mesh))
    moved = spla.spsolve((M - t * L).tocsc(), M @ mesh.vertices)
    return mesh.with_vertices(np.asarray(moved))


def _initial_restore(
    mesh: Mesh,
    area_target: float,
    volume_target: float,
    tol: float,
):
    """Best-effort restoration of an arbitrarily far-off starting mesh.

    Stage 1 fixes volume exactly by rescaling. Stage 2 burns off wrinkle
    area with implicit smoothing steps (well conditioned precisely when the
    violation is large) until the relative area error is near the Newton
    basin. Stage 3 finishes with the damped Newton corrector. Returns
    (mesh, err, ok); err is the achieved relative constraint error, since
    a caller may accept a near miss by re-pinning targets.
    """
    from .functionals import signed_volume, surface_area

    current = mesh
    volume = signed_volume(current)
    if volume * volume_target <= 0.0:
        return current, np.inf, False
    current = _rescale_volume(current, volume, volume_target)
    ra = surface_area(current) / area_target - 1.0

    if abs(ra) > 1e-4:
        edges = current.vertices[current.halfedge_dests()] - current.vertices[
            current.halfedge_origins()
        ]
        t = float(np.mean(np.einsum("ei,ei->e", edges, edges)))
        for _ in range(40):
            if ra <= 1e-4:
                break
            try:
                candidate = _implicit_smooth(current, t)
                candidate = _rescale_volume(
                    candidate, signed_volume(candidate), volume_target
                )
                ra1 = surface_area(candidate) / area_target - 1.0
            except ValueError:
                t *= 0.5  # smoothing collapsed a face: take a shorter step
                continue
            if ra1 < -1e-4:
                t *= 0.5  # overshot below target; take a shorter step
                continue
            if ra1 >= ra:
                t *= 0.5  # no progress (or an unstable solve): back off
                continue
            if ra1 > 0.7 * ra:
                t *= 2.0  # barely moving; smooth harder next time
            current, ra = candidate, ra1

    current, _, ok = _restore(current, area_target, volume_target, tol, 60)
    err = _constraint_error(
        surface_area(current), signed_volume(current), area_target, volume_target
    )
    return current, err, ok


class StepDiagnostics(NamedTuple):
    """What one constrained_step did, accepted or not."""

    willmore: float
    area: float
    volume: float
    iso: float
    grad_norm: float
    grad_proj_norm: float
    step: float
    displacement: float  # largest vertex move of the accepted trial
    mu_area: float
    mu_volume: float
    restoration_iters: int
    converged: bool


def constrained_step(
    mesh: Mesh,
    config: FlowConfig | None = None,
    area_target: float | None = None,
    volume_target: float | None = None,
    step: float | None = None,
):
    """One projected-descent step with restoration.

    Projects the Willmore gradient off the constraint-gradient span (2x2
    Gram solve, with the iso-direction fallback when the Gram is singular),
    backtracks along the projected direction until the Armijo test passes
    on the restored candidate, and returns (mesh', accepted, diagnostics).
    A mesh already at the projected-gradient tolerance is returned as-is
    with accepted = True and zero step. Targets default to the mesh's own
    area and volume; `step` is the trial displacement cap for the
    largest-moving vertex (defaults per config).
    """
    from .functionals import signed_volume, surface_area

    cfg = config or FlowConfig()
    area = surface_area(mesh)
    volume = signed_volume(mesh)
    area_target = area if area_target is None else float(area_target)
    volume_target = volume if volume_target is None else float(volume_target)

    grad = willmore_gradient(mesh)
    ga, gv = constraint_gradients(mesh)
    g_proj, mu_a, mu_v = _project(grad, ga, gv, area, volume)
    gnorm = float(np.linalg.norm(grad))
    pnorm = float(np.linalg.norm(g_proj))
    w0 = willmore_energy(mesh)

    def diag(w, a, v, t, moved, rest, converged):
        return StepDiagnostics(
            willmore=w, area=a, volume=v, iso=iso_ratio_from(a, v),
            grad_norm=gnorm, grad_proj_norm=pnorm, step=t, displacement=moved,
            mu_area=mu_a, mu_volume=mu_v, restoration_iters=rest,
            converged=converged,
        )

    if gnorm == 0.0 or pnorm / gnorm <= cfg.gradient_tolerance:
        return mesh, True, diag(w0, area, volume, 0.0, 0.0, 0, True)

    if step is None:
        step = cfg.initial_step
        if step is None:
            step = 1e-3 * mesh.bbox_diagonal
    restore_tol = 0.1 * cfg.constraint_tolerance
    biggest = float(np.max(np.linalg.norm(g_proj, axis=1)))
    t = step / biggest
    for _ in range(_MAX_HALVINGS):
        candidate = mesh.with_vertices(mesh.vertices - t * g_proj)
        restored, rest_iters, ok = _restore(
            candidate, area_target, volume_target, restore_tol,
            cfg.restoration_max_iters,
        )
        if ok:
            try:
                w1 = willmore_energy(restored)
            except ValueError:
                w1 = np.inf  # degenerate face: treat as rejected step
            if w1 <= w0 - cfg.sufficient_decrease * t * pnorm * pnorm:
                a1 = surface_area(restored)
                v1 = signed_volume(restored)
                return restored, True, diag(
                    w1, a1, v1, t, t * biggest, rest_iters, False
                )
        t *= cfg.backtracking_factor
    return mesh, False, diag(w0, area, volume, 0.0, 0.0, 0, False)


def run_flow(
    mesh: Mesh,
    config: FlowConfig | None = None,
    area_target: float | None = None,
    volume_target: float | None = None,
):
    """Run constrained Willmore descent; returns (mesh_final, trace).

    Targets default to the input mesh's own area and volume. The input is
    first restored onto the constraint set; descent then alternates
    project / backtrack / restore until the projected gradient is small
    relative to the full gradient, the iteration budget runs out, the line
    search stalls, or a self-intersection shows up at a periodic
    embeddedness checkpoint.

    Some target pairs sit at the very bottom of what cheap restoration can
    reach (a fresh icosphere's own area is minimal over every nearby vertex
    distribution at its volume, to about 5e-5 relative). When the initial
    restoration stalls within 1e-3 of the request, the run adopts the
    achieved pair as its working targets rather than failing; the trace
    records the substitution in retargeted / area_target / volume_target,
    and constraint drift is measured against the working pair.
    """
    from .functionals import signed_volume, surface_area

    cfg = config or FlowConfig()
    area_target = surface_area(mesh) if area_target is None else float(area_target)
    volume_target = (
        signed_volume(mesh) if volume_target is None else float(volume_target)
    )
    if area_target <= 0.0:
        raise ValueError("area target must be positive")
    if volume_target == 0.0:
        raise ValueError("volume target must be nonzero")

    restore_tol = 0.1 * cfg.constraint_tolerance
    trace = FlowTrace()
    trace.area_target = area_target
    trace.volume_target = volume_target
    if cfg.max_iterations == 0:
        trace.mesh = mesh
        return mesh, trace

    current, err, ok = _initial_restore(mesh, area_target, volume_target, restore_tol)
    if not ok:
        if err <= 1e-3:
            area_target = surface_area(current)
            volume_target = signed_volume(current)
            trace.retargeted = True
            trace.area_target = area_target
            trace.volume_target = volume_target
        else:
            trace.status = "line_search_failed"
            trace.mesh = current
            return current, trace

    step = cfg.initial_step
    if step is None:
        step = 1e-3 * mesh.bbox_diagonal

    for it in range(cfg.max_iterations):
        current, accepted, d = constrained_step(
            current, cfg, area_target, volume_target, step
        )
        if accepted and d.converged:
            trace.status = "converged"
            break
        if not accepted:
            trace.status = "line_search_failed"
            break
        step = min(2.0 * d.displacement, 10.0 * step)

        if cfg.remesh_every > 0 and (it + 1) % cfg.remesh_every == 0:
            try:
                smoothed = _tangential_smooth(current)
                restored, _, ok = _restore(
                    smoothed, area_target, volume_target, restore_tol,
                    max(20, cfg.restoration_max_iters),
                )
                # only adopt a redistribution that kept the energy; on
                # anisotropic regions the smoother can fold triangles,
                # and a worse mesh would break the monotone W guarantee
                if ok and willmore_energy(restored) <= d.willmore:
                    current = restored
            except ValueError:
                pass

        trace.append(
            it, d.willmore, d.area, d.volume, d.iso,
            d.grad_proj_norm, d.step, d.mu_area, d.mu_volume,
            d.restoration_iters,
        )

        if (it + 1) % 25 == 0 and self_intersects(current):
            trace.status = "self_intersection"
            break
    trace.mesh = current
    return current, trace


def _tangential_smooth(mesh: Mesh, weight: float = 0.5) -> Mesh:
    """One step of area-weighted Laplacian smoothing, normal motion removed.

    Redistributes vertices inside the surface to fight the triangle-quality
    decay long flows cause; the constraint restoration afterwards cleans up
    the small normal leakage the projection leaves behind.
    """
    from .operators import mean_curvature, vertex_areas

    geom = face_geometry(mesh)
    L = cotan_laplacian(mesh, geom)
    areas = vertex_areas(mesh)
    move = (L @ mesh.vertices) / (2.0 * areas[:, None])
    normals = mean_curvature(mesh).normal
    move -= np.einsum("vi,vi->v", move, normals)[:, None] * normals
    scale = weight * float(np.median(np.sqrt(areas)))
    cap = float(np.max(np.linalg.norm(move, axis=1)))
    if cap > 0.0:
        move *= min(1.0, scale / cap)
    return mesh.with_vertices(mesh.vertices + weight * move)


@dataclass(frozen=True)
class MultiplierReport:
    """Stationarity diagnostics for a mesh claimed to be a constrained
    critical point at volume 1."""

    mu: float
    kkt_residual: float
    mu_area: float
    mu_volume: float
    kkt_residual_span: float


def multiplier_report(mesh: Mesh) -> MultiplierReport:
    """Least-squares multipliers and relative KKT residuals.

    The mesh is rescaled to unit enclosed volume first, so the single
    multiplier mu against the area gradient is comparable across inputs.
    Two residuals are reported: distance from the Willmore gradient to the
    line through gradA (kkt_residual), and to the span of {gradA, gradV}
    (kkt_residual_span). Beware reading the single-constraint number on
    near-round meshes: the discrete energy is exactly scale invariant, so
    its gradient has no overlap with the radial bulk of gradA and the
    line residual sits near 1 no matter how stationary the mesh is. The
    span residual is the meaningful measure for the two-constraint flow.
    """
    from .functionals import signed_volume, surface_area

    volume = signed_volume(mesh)
    if volume <= 0.0:
        raise ValueError("multiplier report needs positive enclosed volume")
    scaled = mesh.with_vertices(mesh.vertices / np.cbrt(volume))

    grad = willmore_gradient(scaled)
    ga, gv = constraint_gradients(scaled)
    gaa = _dot(ga, ga)
    if gaa == 0.0:
        raise ValueError("area gradient vanishes; multipliers undefined")
    gnorm = float(np.linalg.norm(grad))
    if gnorm == 0.0:
        raise ValueError("zero Willmore gradient; nothing to report")

    mu = _dot(grad, ga) / gaa
    kkt_single = float(np.linalg.norm(grad - mu * ga)) / gnorm

    g_span, mu_a, mu_v = _project(
        grad, ga, gv, surface_area(scaled), signed_volume(scaled)
    )
    kkt_span = float(np.linalg.norm(g_span)) / gnorm
    return MultiplierReport(
        mu=mu,
        kkt_residual=kkt_single,
        mu_area=mu_a,
        mu_volume=mu_v,
        kkt_residual_span=kkt_span,
    )
