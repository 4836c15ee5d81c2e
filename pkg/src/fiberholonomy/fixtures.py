"""Writer for the small fixture set shipped in ``fixtures/``.

``python -m fiberholonomy.fixtures DIR`` regenerates it; output is
deterministic, so the shipped files can be compared byte for byte.
"""
from __future__ import annotations

import os
import sys

import numpy as np

from . import jsonio
from .constructions import genus_one_setup
from .mesh import CubeMesh, SquareMesh

GENUS_ONE = {"genus": 1, "group": {"family": "SU", "n": 2, "metric_scale": 1 / (4 * np.pi**2)}}


def fixture_set():
    """``{filename: json object}`` for every shipped fixture."""
    setup = genus_one_setup(0)
    spec = setup.data.spec
    out = {}

    # constant homotopy at the first genus-one string
    s = setup.string(1, 4)
    h = np.broadcast_to(s.w.samples[:, None], (5, 5) + s.w.samples.shape[1:])
    H = np.broadcast_to(s.phi.samples[:, :, None], (5, 5, 5) + s.phi.samples.shape[2:])
    out["constant_homotopy.json"] = {
        "type": "homotopy",
        "map": GENUS_ONE,
        "h": jsonio.mesh_to_json(SquareMesh(h, spec, tuple_valued=True)),
        "H": jsonio.mesh_to_json(CubeMesh(H, spec)),
    }

    # a small genuine homotopy between the two strings, as separate mesh files
    hh = setup.homotopy(8, detour=1.0)
    out["small_homotopy.h.json"] = jsonio.mesh_to_json(hh.h)
    out["small_homotopy.H.json"] = jsonio.mesh_to_json(hh.H)
    ref = {"type": "homotopy", "map": GENUS_ONE, "h": "small_homotopy.h.json", "H": "small_homotopy.H.json"}
    out["small_homotopy.json"] = ref
    out["small_homotopy_reversed.json"] = dict(ref, reverse=True)

    # the well-definedness pair: two schedules, the second carrying a bubble
    gen = {"type": "generator", "family": "genus_one", "map": GENUS_ONE, "seed": 0, "resolutions": [32, 64, 96]}
    out["genus1_pair_a.json"] = dict(gen, detour=0.0, bubble=False)
    out["genus1_pair_b.json"] = dict(gen, detour=1.0, bubble=True)

    # configs
    out["verify_default.json"] = dict(GENUS_ONE, seed=0, points=10, steps=[1e-2, 5e-3, 2.5e-3],
                                      equivariant_points=20, fd_step=1e-4)
    out["verify_empty_word.json"] = {"word": "", "seed": 0}
    out["word_point.json"] = {"point": jsonio.matrix_to_json(setup.q)}
    return out


def write_fixtures(directory):
    os.makedirs(directory, exist_ok=True)
    for name, obj in sorted(fixture_set().items()):
        jsonio.dump(obj, os.path.join(directory, name))


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
