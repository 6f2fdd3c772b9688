"""Self-intersection testing for triangle meshes.

Candidate face pairs come from a sweep over axis-sorted bounding boxes;
surviving pairs run a tolerance-based triangle-triangle predicate
(segment-against-triangle clipping for transversal pairs, a 2D overlap
test for coplanar ones). Faces sharing a vertex or an edge are exempt by
combinatorics, never by geometry. All tolerances are absolute with the
mesh normalized to unit bounding-box diagonal.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .mesh import Mesh

EPS = 1e-12  # absolute, on unit-normalized meshes
_PAIR_CHUNK = 400_000


class IntersectionResult(NamedTuple):
    intersects: bool
    witness: tuple[int, int] | None

    def __bool__(self) -> bool:  # allows `if self_intersects(mesh):`
        return self.intersects


def self_intersects(mesh: Mesh) -> IntersectionResult:
    """True iff two non-adjacent faces intersect; reports the first pair found.

    "First" means smallest (i, j) in lexicographic face order, so the
    witness is deterministic. Rigid motions of the mesh do not change the
    verdict (the test runs on a translation/scale-normalized copy).
    """
    if mesh.n_faces < 2:
        return IntersectionResult(False, None)

    verts = mesh.vertices
    center = 0.5 * (verts.max(axis=0) + verts.min(axis=0))
    scale = mesh.bbox_diagonal
    if scale <= 0.0:
        return IntersectionResult(False, None)
    pts = (verts - center) / scale

    tris = pts[mesh.faces]  # (F, 3, 3)
    lo = tris.min(axis=1)
    hi = tris.max(axis=1)

    pairs = _candidate_pairs(lo, hi)
    if len(pairs) == 0:
        return IntersectionResult(False, None)

    # combinatorial adjacency exemption: any shared vertex index
    fa = mesh.faces[pairs[:, 0]]
    fb = mesh.faces[pairs[:, 1]]
    shared = (fa[:, :, None] == fb[:, None, :]).any(axis=(1, 2))
    pairs = pairs[~shared]
    if len(pairs) == 0:
        return IntersectionResult(False, None)

    # deterministic witness: test in lexicographic pair order
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    pairs = pairs[order]

    for start in range(0, len(pairs), _PAIR_CHUNK):
        chunk = pairs[start : start + _PAIR_CHUNK]
        hit = _tri_tri_batch(tris[chunk[:, 0]], tris[chunk[:, 1]])
        if hit.any():
            i = int(np.flatnonzero(hit)[0])
            return IntersectionResult(True, (int(chunk[i, 0]), int(chunk[i, 1])))
    return IntersectionResult(False, None)


def _candidate_pairs(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """AABB-overlapping face pairs (i < j) via sweep along the widest axis."""
    extents = lo.max(axis=0) - lo.min(axis=0)
    axis = int(np.argmax(extents))
    rest = [a for a in range(3) if a != axis]

    order = np.argsort(lo[:, axis], kind="stable")
    slo = lo[order]
    shi = hi[order]
    n = len(order)

    # for sorted face i, candidates are the following faces whose min along
    # the sweep axis does not exceed this face's max
    ends = np.searchsorted(slo[:, axis], shi[:, axis] + EPS, side="right")
    counts = np.maximum(ends - np.arange(1, n + 1), 0)
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)

    first = np.repeat(np.arange(n), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    second = np.arange(total) - np.repeat(offsets, counts) + first + 1

    # prune by overlap on the two remaining axes
    keep = np.ones(total, dtype=bool)
    for a in rest:
        keep &= slo[first, a] <= shi[second, a] + EPS
        keep &= slo[second, a] <= shi[first, a] + EPS
    first, second = first[keep], second[keep]

    fi = order[first]
    fj = order[second]
    pairs = np.stack([np.minimum(fi, fj), np.maximum(fi, fj)], axis=1)
    return pairs


def _tri_tri_batch(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Boolean intersection mask for paired triangle arrays (P, 3, 3)."""
    n1 = np.cross(t1[:, 1] - t1[:, 0], t1[:, 2] - t1[:, 0])
    n2 = np.cross(t2[:, 1] - t2[:, 0], t2[:, 2] - t2[:, 0])

    # signed distances of each triangle's vertices to the other's plane
    d1 = np.einsum("pij,pj->pi", t1 - t2[:, 0:1], n2)
    d2 = np.einsum("pij,pj->pi", t2 - t1[:, 0:1], n1)

    # same strict side of the other plane: no intersection possible
    tol1 = EPS * np.maximum(np.linalg.norm(n2, axis=1), EPS)[:, None]
    tol2 = EPS * np.maximum(np.linalg.norm(n1, axis=1), EPS)[:, None]
    separated = (d1 > tol1).all(axis=1) | (d1 < -tol1).all(axis=1)
    separated |= (d2 > tol2).all(axis=1) | (d2 < -tol2).all(axis=1)

    hit = np.zeros(len(t1), dtype=bool)
    live = ~separated
    if not live.any():
        return hit

    coplanar = live & (np.abs(d1) <= tol1).all(axis=1)
    transversal = live & ~coplanar

    if transversal.any():
        a = t1[transversal]
        b = t2[transversal]
        sub = np.zeros(int(transversal.sum()), dtype=bool)
        for e in range(3):
            sub |= _segment_hits_triangle(a[:, e], a[:, (e + 1) % 3], b)
            sub |= _segment_hits_triangle(b[:, e], b[:, (e + 1) % 3], a)
        hit[np.flatnonzero(transversal)] = sub

    if coplanar.any():
        idx = np.flatnonzero(coplanar)
        hit[idx] = _coplanar_overlap(t1[idx], t2[idx], n2[idx])
    return hit


def _segment_hits_triangle(p: np.ndarray, q: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Batched segment-triangle test with barycentric clipping."""
    d = q - p
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    h = np.cross(d, e2)
    det = np.einsum("pi,pi->p", e1, h)
    # scale-aware parallel cutoff
    ref = np.linalg.norm(d, axis=1) * np.linalg.norm(np.cross(e1, e2), axis=1)
    ok = np.abs(det) > EPS * np.maximum(ref, EPS)
    inv = np.where(ok, det, 1.0)
    s = p - tri[:, 0]
    u = np.einsum("pi,pi->p", s, h) / inv
    qv = np.cross(s, e1)
    v = np.einsum("pi,pi->p", d, qv) / inv
    t = np.einsum("pi,pi->p", e2, qv) / inv
    return (
        ok
        & (u >= -EPS)
        & (v >= -EPS)
        & (u + v <= 1.0 + EPS)
        & (t >= -EPS)
        & (t <= 1.0 + EPS)
    )


def _coplanar_overlap(t1: np.ndarray, t2: np.ndarray, n: np.ndarray) -> np.ndarray:
    """2D overlap of coplanar triangle pairs: edge crossings or containment."""
    # drop the dominant normal axis
    axis = np.argmax(np.abs(n), axis=1)
    cols = np.array([[1, 2], [0, 2], [0, 1]])
    take = cols[axis]  # (P, 2)
    idx = np.arange(len(t1))[:, None, None]
    a = t1[idx, np.arange(3)[None, :, None], take[:, None, :]]
    b = t2[idx, np.arange(3)[None, :, None], take[:, None, :]]

    out = np.zeros(len(t1), dtype=bool)
    for i in range(3):
        for j in range(3):
            out |= _segments_cross_2d(a[:, i], a[:, (i + 1) % 3], b[:, j], b[:, (j + 1) % 3])
    out |= _point_in_tri_2d(a[:, 0], b)
    out |= _point_in_tri_2d(b[:, 0], a)
    return out


def _segments_cross_2d(p0, p1, q0, q1) -> np.ndarray:
    def orient(a, b, c):
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    d1 = orient(q0, q1, p0)
    d2 = orient(q0, q1, p1)
    d3 = orient(p0, p1, q0)
    d4 = orient(p0, p1, q1)
    return (
        ((d1 > EPS) & (d2 < -EPS) | (d1 < -EPS) & (d2 > EPS))
        & ((d3 > EPS) & (d4 < -EPS) | (d3 < -EPS) & (d4 > EPS))
    )


def _point_in_tri_2d(p: np.ndarray, tri: np.ndarray) -> np.ndarray:
    def orient(a, b, c):
        return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    s0 = orient(tri[:, 0], tri[:, 1], p)
    s1 = orient(tri[:, 1], tri[:, 2], p)
    s2 = orient(tri[:, 2], tri[:, 0], p)
    return ((s0 >= -EPS) & (s1 >= -EPS) & (s2 >= -EPS)) | ((s0 <= EPS) & (s1 <= EPS) & (s2 <= EPS))
