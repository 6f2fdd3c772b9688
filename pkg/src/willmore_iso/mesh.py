"""Closed oriented triangle meshes with halfedge connectivity.

Vertices are float64 positions, faces are index triples wound
counter-clockwise as seen from outside. Connectivity is derived from the
face list and cached; meshes are immutable after construction, so derived
data can be shared freely (``with_vertices`` reuses the connectivity of
the source mesh).

Halfedge layout: halfedge ``h`` lives in face ``h // 3`` at corner
``h % 3``; it runs from ``faces[f, k]`` to ``faces[f, (k + 1) % 3]``.
``next`` and ``prev`` are therefore index arithmetic and only the twin
array is stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEGENERACY_REL_THRESHOLD = 1e-12  # face area vs bbox diagonal squared


@dataclass(frozen=True)
class Violation:
    """One validation finding: what kind, which simplex, and a message."""

    kind: str
    simplex: int
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass
class ValidationReport:
    """List of invariant violations; an empty report means a valid mesh."""

    entries: list[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.entries

    def count(self, kind: str) -> int:
        return sum(1 for e in self.entries if e.kind == kind)

    def kinds(self) -> set[str]:
        return {e.kind for e in self.entries}

    def summary(self) -> str:
        if self.is_valid:
            return "valid"
        parts = []
        for kind in sorted(self.kinds()):
            n = self.count(kind)
            parts.append(f"{kind.replace('_', ' ')}s: {n}" if n != 1 else f"{kind.replace('_', ' ')}: 1")
        return "; ".join(parts)

    def __str__(self) -> str:
        return self.summary()


class _EdgeData:
    """Undirected-edge bookkeeping shared by validate, twins, and genus."""

    def __init__(self, faces: np.ndarray, n_vertices: int):
        F = len(faces)
        # directed edge h: origin faces[f,k], dest faces[f,(k+1)%3]
        origin = faces.reshape(-1)
        dest = faces[:, [1, 2, 0]].reshape(-1)
        lo = np.minimum(origin, dest)
        hi = np.maximum(origin, dest)
        key = lo.astype(np.int64) * max(n_vertices, 1) + hi
        order = np.argsort(key, kind="stable")
        sorted_key = key[order]
        group_start = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
        group_count = np.diff(np.r_[group_start, len(sorted_key)])

        self.n_halfedges = 3 * F
        self.twin = np.full(3 * F, -1, dtype=np.int64)
        self.boundary_edges: list[int] = []       # representative halfedge per count-1 edge
        self.nonmanifold_edges: list[int] = []    # representative halfedge per count>2 edge
        self.misoriented_edges: list[int] = []    # count-2 edges with same direction twice

        for s, c in zip(group_start, group_count):
            hs = order[s : s + c]
            if c == 1:
                self.boundary_edges.append(int(hs[0]))
            elif c == 2:
                h0, h1 = int(hs[0]), int(hs[1])
                if origin[h0] == origin[h1]:
                    self.misoriented_edges.append(h0)
                else:
                    self.twin[h0] = h1
                    self.twin[h1] = h0
            else:
                self.nonmanifold_edges.append(int(hs[0]))

        self.n_edges = len(group_start)
        self.manifold_oriented = (
            not self.boundary_edges
            and not self.nonmanifold_edges
            and not self.misoriented_edges
        )


class Mesh:
    """Immutable triangle mesh: (V, 3) float positions, (F, 3) index triples."""

    def __init__(self, vertices: np.ndarray, faces: np.ndarray):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {faces.shape}")
        if len(faces) and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise ValueError("face index out of range")
        vertices.setflags(write=False)
        faces.setflags(write=False)
        self._vertices = vertices
        self._faces = faces
        self._edge_data: _EdgeData | None = None
        self._bbox_diag: float | None = None

    # -- basic accessors ----------------------------------------------------

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def faces(self) -> np.ndarray:
        return self._faces

    @property
    def n_vertices(self) -> int:
        return len(self._vertices)

    @property
    def n_faces(self) -> int:
        return len(self._faces)

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        """New mesh with moved vertices, sharing this mesh's connectivity."""
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        if vertices.shape != self._vertices.shape:
            raise ValueError("vertex array shape must match")
        out = Mesh.__new__(Mesh)
        vertices.setflags(write=False)
        out._vertices = vertices
        out._faces = self._faces
        out._edge_data = self._edge_data  # connectivity is purely combinatorial
        out._bbox_diag = None
        return out

    @property
    def bbox_diagonal(self) -> float:
        if self._bbox_diag is None:
            if self.n_vertices == 0:
                self._bbox_diag = 0.0
            else:
                ext = self._vertices.max(axis=0) - self._vertices.min(axis=0)
                self._bbox_diag = float(np.linalg.norm(ext))
        return self._bbox_diag

    # -- connectivity -------------------------------------------------------

    def _edges(self) -> _EdgeData:
        if self._edge_data is None:
            self._edge_data = _EdgeData(self._faces, self.n_vertices)
        return self._edge_data

    @property
    def n_edges(self) -> int:
        return self._edges().n_edges

    @property
    def twin(self) -> np.ndarray:
        """Twin halfedge indices; -1 where no unique opposite exists."""
        return self._edges().twin

    def halfedge_origins(self) -> np.ndarray:
        return self._faces.reshape(-1)

    def halfedge_dests(self) -> np.ndarray:
        return self._faces[:, [1, 2, 0]].reshape(-1)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (E, 2) array with lo < hi."""
        o = self.halfedge_origins()
        d = self.halfedge_dests()
        pairs = np.stack([np.minimum(o, d), np.maximum(o, d)], axis=1)
        return np.unique(pairs, axis=0)

    # -- geometry helpers ---------------------------------------------------

    def face_normals_and_areas(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit face normals and face areas; degenerate faces keep a zero normal."""
        p = self._vertices[self._faces]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        norms = np.linalg.norm(n, axis=1)
        areas = 0.5 * norms
        safe = np.where(norms > 0.0, norms, 1.0)
        return n / safe[:, None], areas

    def __repr__(self) -> str:
        return f"Mesh(V={self.n_vertices}, F={self.n_faces})"


def validate(mesh: Mesh) -> ValidationReport:
    """Check every mesh invariant and report all violations found.

    A valid mesh is a closed, oriented, manifold triangle surface with even
    Euler characteristic <= 2 and no degenerate faces. Problems never raise;
    each becomes a report entry naming the offending simplex.
    """
    report = ValidationReport()
    V, F = mesh.n_vertices, mesh.n_faces
    verts, faces = mesh.vertices, mesh.faces

    if not np.isfinite(verts).all():
        bad = int(np.flatnonzero(~np.isfinite(verts).all(axis=1))[0])
        report.entries.append(Violation("nonfinite_vertex", bad, f"non-finite coordinates at vertex {bad}"))

    # combinatorially degenerate faces (repeated vertex index)
    same = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
    for f in np.flatnonzero(same):
        report.entries.append(Violation("repeated_index_face", int(f), f"face {f} repeats a vertex index"))

    # geometrically degenerate faces
    _, areas = mesh.face_normals_and_areas()
    thresh = DEGENERACY_REL_THRESHOLD * mesh.bbox_diagonal ** 2
    for f in np.flatnonzero(areas <= thresh):
        if not same[f]:  # already reported above
            report.entries.append(Violation("degenerate_face", int(f), f"face {f} has near-zero area"))

    ed = mesh._edges()
    origins = mesh.halfedge_origins()
    dests = mesh.halfedge_dests()
    for h in ed.boundary_edges:
        report.entries.append(
            Violation("boundary_edge", h // 3, f"boundary edge ({origins[h]}, {dests[h]}) at face {h // 3}")
        )
    for h in ed.nonmanifold_edges:
        report.entries.append(
            Violation("nonmanifold_edge", h // 3, f"non-manifold edge ({min(origins[h], dests[h])}, {max(origins[h], dests[h])})")
        )
    for h in ed.misoriented_edges:
        report.entries.append(
            Violation("orientation_mismatch", h // 3, f"edge ({origins[h]}, {dests[h]}) traversed twice in the same direction")
        )

    used = np.zeros(V, dtype=bool)
    used[faces.reshape(-1)] = True
    for v in np.flatnonzero(~used):
        report.entries.append(Violation("isolated_vertex", int(v), f"vertex {v} belongs to no face"))

    # single-cycle vertex fans; only meaningful once edges are clean
    if ed.manifold_oriented and F > 0:
        twin = ed.twin
        nxt = (np.arange(3 * F) // 3) * 3 + (np.arange(3 * F) % 3 + 1) % 3
        # sigma maps an outgoing halfedge of v to the next outgoing one around v
        sigma = nxt[twin]
        visited = np.zeros(3 * F, dtype=bool)
        orbit_of_vertex = np.zeros(V, dtype=np.int64)
        for h0 in range(3 * F):
            if visited[h0]:
                continue
            v = origins[h0]
            orbit_of_vertex[v] += 1
            h = h0
            while not visited[h]:
                visited[h] = True
                h = sigma[h]
        for v in np.flatnonzero(orbit_of_vertex > 1):
            report.entries.append(
                Violation("pinched_vertex", int(v), f"vertex {v} has {orbit_of_vertex[v]} disconnected face fans")
            )

        chi = V - ed.n_edges + F
        if chi % 2 != 0 or chi > 2:
            report.entries.append(Violation("euler_characteristic", chi, f"Euler characteristic {chi} is odd or exceeds 2"))

    return report


def euler_genus(mesh: Mesh) -> tuple[int, int]:
    """Euler characteristic chi = V - E + F and genus g = (2 - chi) / 2.

    Raises ValueError when chi is odd or greater than 2 (the mesh is then
    not a closed orientable surface).
    """
    chi = mesh.n_vertices - mesh.n_edges + mesh.n_faces
    if chi % 2 != 0 or chi > 2:
        raise ValueError(f"Euler characteristic {chi} is odd or exceeds 2; not a closed orientable surface")
    return chi, (2 - chi) // 2


def diameter(mesh: Mesh) -> float:
    """Maximal pairwise vertex distance.

    Exact for V <= 20,000; for larger meshes the pairwise scan runs over
    convex-hull vertices only, which gives the same value for point sets.
    """
    pts = mesh.vertices
    if len(pts) > 20000:
        from scipy.spatial import ConvexHull

        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass  # fall back to the exact scan
    if len(pts) < 2:
        return 0.0
    sq = np.einsum("ij,ij->i", pts, pts)
    best = 0.0
    block = 512
    for i0 in range(0, len(pts), block):
        blk = pts[i0 : i0 + block]
        d2 = sq[i0 : i0 + block, None] + sq[None, :] - 2.0 * (blk @ pts.T)
        best = max(best, float(d2.max()))
    return float(np.sqrt(max(best, 0.0)))


class SubMesh:
    """A face subset of a closed mesh, with its induced boundary loops.

    The subset must be edge-connected and its boundary must consist of
    disjoint simple cycles; the constructor verifies both.
    """

    def __init__(self, parent: Mesh, face_indices: np.ndarray):
        face_indices = np.unique(np.asarray(face_indices, dtype=np.int64))
        if len(face_indices) == 0:
            raise ValueError("empty face subset")
        if face_indices.min() < 0 or face_indices.max() >= parent.n_faces:
            raise ValueError("face index out of range")
        self.parent = parent
        self.face_indices = face_indices

        in_subset = np.zeros(parent.n_faces, dtype=bool)
        in_subset[face_indices] = True
        twin = parent.twin
        if (twin < 0).any():
            raise ValueError("parent mesh must be closed and manifold")

        # edge-connectivity over shared edges, BFS on the subset
        seen = {int(face_indices[0])}
        stack = [int(face_indices[0])]
        while stack:
            f = stack.pop()
            for k in range(3):
                g = int(twin[3 * f + k]) // 3
                if in_subset[g] and g not in seen:
                    seen.add(g)
                    stack.append(g)
        if len(seen) != len(face_indices):
            raise ValueError("face subset is not edge-connected")

        # boundary halfedges: inside the subset, twin outside
        hs = (3 * face_indices[:, None] + np.arange(3)[None, :]).reshape(-1)
        boundary = hs[~in_subset[twin[hs] // 3]]
        origins = parent.halfedge_origins()
        dests = parent.halfedge_dests()
        succ: dict[int, int] = {}
        for h in boundary:
            o = int(origins[h])
            if o in succ:
                raise ValueError(f"boundary is not a union of simple cycles (vertex {o} repeats)")
            succ[o] = int(h)

        loops: list[list[int]] = []
        remaining = set(succ)
        while remaining:
            start = min(remaining)
            loop = []
            v = start
            while True:
                loop.append(v)
                remaining.discard(v)
                v = int(dests[succ[v]])
                if v == start:
                    break
                if v not in remaining:
                    # either not a boundary vertex at all or consumed by an
                    # earlier loop; both mean the boundary is not simple cycles
                    raise ValueError("boundary walk left the cycle; boundary is not simple")
            loops.append(loop)
        self.boundary_loops = loops

    @property
    def vertex_indices(self) -> np.ndarray:
        """Indices of all vertices used by the face subset."""
        return np.unique(self.parent.faces[self.face_indices].reshape(-1))

    def boundary_length(self) -> float:
        total = 0.0
        P = self.parent.vertices
        for loop in self.boundary_loops:
            a = P[loop]
            b = P[np.roll(loop, -1)]
            total += float(np.linalg.norm(b - a, axis=1).sum())
        return total

    def boundary_segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints (S, 3), (S, 3) of every boundary polyline segment."""
        starts, ends = [], []
        P = self.parent.vertices
        for loop in self.boundary_loops:
            starts.append(P[loop])
            ends.append(P[np.roll(loop, -1)])
        if not starts:
            z = np.zeros((0, 3))
            return z, z
        return np.vstack(starts), np.vstack(ends)

    def __repr__(self) -> str:
        return f"SubMesh(faces={len(self.face_indices)}, loops={len(self.boundary_loops)})"
