"""JSON encodings for matrices, group specs and meshes.

Matrices are row-major nested arrays with complex entries written as
``[re, im]`` pairs.
"""
from __future__ import annotations

import json

import numpy as np

from .lie import GroupSpec, StructureError


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 2:
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]
    return [matrix_to_json(x) for x in a]


def matrix_from_json(obj):
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1] != 2:
        raise StructureError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def mesh_to_json(mesh):
    from .mesh import KINDS

    grid = mesh.grid_shape
    flat = mesh.samples.reshape(-1, *mesh.samples.shape[len(grid):])
    out = {
        "kind": KINDS[len(grid)],
        "group": mesh.spec.to_json(),
        "dims": [int(d) for d in grid],
        "samples": [matrix_to_json(s) for s in flat],
    }
    if mesh.tuple_valued:
        out["arity"] = int(mesh.samples.shape[-3])
    if any(mesh.seams):
        out["seams"] = [list(map(int, s)) for s in mesh.seams]
    return out


def mesh_from_json(obj):
    from .mesh import KINDS, mesh_class

    kind = obj.get("kind")
    if kind not in KINDS.values():
        raise StructureError(f"unknown mesh kind {kind!r}")
    spec = GroupSpec.from_json(obj["group"])
    dims = tuple(int(d) for d in obj["dims"])
    samples = matrix_from_json(obj["samples"])
    tuple_valued = "arity" in obj
    tail = ((int(obj["arity"]),) if tuple_valued else ()) + (spec.n, spec.n)
    try:
        samples = samples.reshape(*dims, *tail)
    except ValueError:
        raise StructureError(f"samples do not match dims {dims} and shape {tail}") from None
    seams = tuple(tuple(s) for s in obj.get("seams", [()] * len(dims)))
    cls = mesh_class(len(dims))
    return cls(samples, spec, tuple_valued=tuple_valued, seams=seams)


def dump(obj, path=None):
    """Deterministic JSON text (sorted keys); written to ``path`` if given."""
    text = json.dumps(obj, sort_keys=True, indent=1)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
