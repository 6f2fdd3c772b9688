"""Mesh file I/O: OBJ text (primary interchange) and binary PLY (archival).

OBJ honors only ``v x y z`` and ``f i j k`` records (1-based indices;
``i/j/k`` style vertex references keep their first field); every other
record type is counted and ignored, and the count is exposed as
``mesh.io_warnings``. Floats are written with 17 significant digits, which
round-trips float64 exactly. Binary PLY is little-endian float64/int32 and
round-trips bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import Mesh


class MeshFormatError(ValueError):
    """Raised for unparseable or out-of-contract mesh files."""


def load(path: str | Path) -> Mesh:
    """Load a mesh from .obj or .ply, dispatching on the file suffix."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".ply":
        return _load_ply(path)
    raise MeshFormatError(f"unsupported mesh format '{suffix}' (expected .obj or .ply)")


def save(mesh: Mesh, path: str | Path) -> None:
    """Save a mesh to .obj or .ply, dispatching on the file suffix."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        _save_obj(mesh, path)
    elif suffix == ".ply":
        _save_ply(mesh, path)
    else:
        raise MeshFormatError(f"unsupported mesh format '{suffix}' (expected .obj or .ply)")


# -- OBJ ---------------------------------------------------------------------


def _load_obj(path: Path) -> Mesh:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    ignored = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            tag = fields[0]
            if tag == "v":
                if len(fields) < 4:
                    raise MeshFormatError(f"{path.name}: malformed vertex at line {lineno}")
                try:
                    vertices.append((float(fields[1]), float(fields[2]), float(fields[3])))
                except ValueError as exc:
                    raise MeshFormatError(f"{path.name}: bad vertex coordinate at line {lineno}") from exc
            elif tag == "f":
                refs = fields[1:]
                if len(refs) != 3:
                    raise MeshFormatError(f"{path.name}: non-triangle face at line {lineno}")
                idx = []
                for ref in refs:
                    head = ref.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as exc:
                        raise MeshFormatError(f"{path.name}: bad face index at line {lineno}") from exc
                    if i < 0:
                        i = len(vertices) + 1 + i  # negative refs count from the end
                    if i == 0:
                        raise MeshFormatError(f"{path.name}: index out of range at line {lineno} (OBJ indices are 1-based)")
                    idx.append(i - 1)
                if any(i < 0 or i >= len(vertices) for i in idx):
                    raise MeshFormatError(f"{path.name}: index out of range at line {lineno}")
                faces.append(tuple(idx))
            else:
                ignored += 1
    mesh = Mesh(
        np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        np.asarray(faces, dtype=np.int64).reshape(-1, 3),
    )
    mesh.io_warnings = ignored
    return mesh


def _save_obj(mesh: Mesh, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


# -- binary PLY ---------------------------------------------------------------

_PLY_FLOATS = {"double": "<f8", "float64": "<f8", "float": "<f4", "float32": "<f4"}
_PLY_INTS = {"int": "<i4", "int32": "<i4", "uint": "<u4", "uint32": "<u4"}
_PLY_COUNTS = {"uchar": "<u1", "uint8": "<u1", "uint": "<u4", "int": "<i4", "uint32": "<u4", "int32": "<i4"}


def _load_ply(path: Path) -> Mesh:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise MeshFormatError(f"{path.name}: not a PLY file")
        fmt = None
        elements: list[tuple[str, int, list[tuple[str, ...]]]] = []
        while True:
            line = fh.readline()
            if not line:
                raise MeshFormatError(f"{path.name}: unexpected end of PLY header")
            fields = line.decode("ascii", errors="replace").split()
            if not fields or fields[0] == "comment":
                continue
            if fields[0] == "format":
                fmt = fields[1]
            elif fields[0] == "element":
                elements.append((fields[1], int(fields[2]), []))
            elif fields[0] == "property":
                if not elements:
                    raise MeshFormatError(f"{path.name}: property before element in header")
                elements[-1][2].append(tuple(fields[1:]))
            elif fields[0] == "end_header":
                break
        if fmt != "binary_little_endian":
            raise MeshFormatError(f"{path.name}: only binary little-endian PLY is supported, got {fmt}")

        verts = None
        faces = None
        for name, count, props in elements:
            if name == "vertex":
                names = [p[-1] for p in props]
                if names[:3] != ["x", "y", "z"]:
                    raise MeshFormatError(f"{path.name}: vertex element must start with x, y, z")
                dtypes = []
                for p in props:
                    if p[0] not in _PLY_FLOATS:
                        raise MeshFormatError(f"{path.name}: unsupported vertex property type {p[0]}")
                    dtypes.append((p[-1], _PLY_FLOATS[p[0]]))
                arr = np.frombuffer(fh.read(count * np.dtype(dtypes).itemsize), dtype=dtypes, count=count)
                verts = np.stack([arr["x"], arr["y"], arr["z"]], axis=1).astype(np.float64)
            elif name == "face":
                if len(props) != 1 or props[0][0] != "list":
                    raise MeshFormatError(f"{path.name}: face element must hold a single list property")
                _, count_t, idx_t, _ = props[0]
                if count_t not in _PLY_COUNTS or idx_t not in _PLY_INTS:
                    raise MeshFormatError(f"{path.name}: unsupported face list types {count_t}/{idx_t}")
                rec = np.dtype([("n", _PLY_COUNTS[count_t]), ("idx", _PLY_INTS[idx_t], 3)])
                arr = np.frombuffer(fh.read(count * rec.itemsize), dtype=rec, count=count)
                if count and not (arr["n"] == 3).all():
                    bad = int(np.flatnonzero(arr["n"] != 3)[0])
                    raise MeshFormatError(f"{path.name}: non-triangle face at record {bad}")
                faces = arr["idx"].astype(np.int64)
            else:
                raise MeshFormatError(f"{path.name}: unsupported element '{name}'")
        if verts is None or faces is None:
            raise MeshFormatError(f"{path.name}: PLY file must contain vertex and face elements")
        if len(faces) and (faces.min() < 0 or faces.max() >= len(verts)):
            raise MeshFormatError(f"{path.name}: face index out of range")
        mesh = Mesh(verts, faces)
        mesh.io_warnings = 0
        return mesh


def _save_ply(mesh: Mesh, path: Path) -> None:
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {mesh.n_vertices}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        f"element face {mesh.n_faces}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    rec = np.dtype([("n", "<u1"), ("idx", "<i4", 3)])
    body = np.empty(mesh.n_faces, dtype=rec)
    body["n"] = 3
    body["idx"] = mesh.faces.astype("<i4")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(mesh.vertices, dtype="<f8").tobytes())
        fh.write(body.tobytes())
