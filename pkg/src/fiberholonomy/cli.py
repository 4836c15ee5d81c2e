"""Command-line driver: ``fiberholonomy {verify,holonomy,periods,word,moment,probe}``.

Reports are JSON (sorted keys) on stdout or in ``--json OUT``; ``--csv OUT``
writes the scalar leaves as ``key,value`` rows. Exit codes: 0 pass, 1 a check
failed, 2 usage or data error (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import jsonio
from .lie import CutLocusError, GroupSpec, StructureError, algebra_norm
from .words import Word, WordForm, WordSyntaxError, parse_word, relator_word

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config and shared helpers


def load_config(path):
    if path is None:
        return {}
    try:
        return jsonio.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def group_from(cfg):
    return GroupSpec.from_json(cfg["group"]) if "group" in cfg else GroupSpec()


def word_from(cfg, spec):
    """The word map named by ``cfg`` (``word`` source or ``genus``); ``""`` is the trivial word."""
    src = cfg.get("word")
    if src is not None:
        if not str(src).strip():
            return WordForm(Word((), 1), spec)
        return WordForm(parse_word(str(src)), spec)
    return WordForm(relator_word(int(cfg.get("genus", 1))), spec)


def mapdata_from_json(obj, base_dir="."):
    from .bundle import MapData

    spec = group_from(obj)
    if "class" in obj:
        return MapData.conjugacy_class(jsonio.matrix_from_json(obj["class"]), spec)
    return MapData(word_from(obj, spec))


def _mesh(obj, base_dir):
    if isinstance(obj, str):
        obj = jsonio.load(os.path.join(base_dir, obj))
    return jsonio.mesh_from_json(obj)


def flatten(report, prefix=""):
    """Scalar leaves of a nested report as ``(dotted key, value)`` pairs."""
    rows = []
    if isinstance(report, dict):
        for k in sorted(report):
            rows += flatten(report[k], f"{prefix}{k}.")
    elif isinstance(report, list):
        if all(not isinstance(v, (dict, list)) for v in report):
            rows.append((prefix[:-1], " ".join(str(v) for v in report)))
        else:
            for i, v in enumerate(report):
                rows += flatten(v, f"{prefix}{i}.")
    else:
        rows.append((prefix[:-1], report))
    return rows


def _clean(obj):
    """JSON-safe copy: numpy scalars to floats, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


def emit(report, args, out=sys.stdout):
    report = _clean(report)
    text = json.dumps(report, sort_keys=True, indent=1)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        out.write(text + "\n")
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in flatten(report):
            w.writerow([k, v])
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    return report


def _opt(args, cfg, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args, cfg):
    from .identities import d_zeta_residuals, equivariant_residuals

    spec = group_from(cfg)
    form = word_from(cfg, spec)
    sign = args.debug_cocycle_sign if args.debug_cocycle_sign is not None else cfg.get("cocycle_sign")
    if sign is not None:
        form = WordForm(form.word, spec, cocycle_sign=int(sign))
    seed = _opt(args, cfg, "seed", 0)
    steps = tuple(cfg.get("steps", (1e-2, 5e-3, 2.5e-3)))
    tol = _opt(args, cfg, "tol", 1e-4)
    eq_tol = cfg.get("equivariant_tol", 1e-6)
    min_order = cfg.get("min_order", 1.0)
    res, orders = d_zeta_residuals(form, seed, int(cfg.get("points", 10)), steps)
    trivial = max(res) == 0.0
    dz_pass = trivial or (res[-1] <= tol and all(o >= min_order for o in orders))
    eq = equivariant_residuals(form, seed, int(cfg.get("equivariant_points", 20)), float(cfg.get("fd_step", 1e-4)))
    eq_pass = all(v <= eq_tol for v in eq.values())
    report = {
        "group": spec.to_json(),
        "word": str(form.word),
        "seed": seed,
        "d_zeta": {"steps": list(steps), "residuals": res, "orders": orders, "tol": tol, "pass": dz_pass},
        "equivariant": {"residuals": eq, "tol": eq_tol, "pass": eq_pass},
        "pass": dz_pass and eq_pass,
    }
    return report


def _holonomy_of(fixture_path, args, cfg):
    from .bundle import holonomy
    from .constructions import genus_one_setup
    from .mesh import HomotopyCD11

    obj = jsonio.load(fixture_path)
    base = os.path.dirname(os.path.abspath(fixture_path))
    kind = obj.get("type")
    tol = _opt(args, cfg, "tol", 1e-2)
    workers = _opt(args, cfg, "workers", 1)
    if kind == "homotopy":
        data = mapdata_from_json(obj.get("map", {}), base)
        hh = HomotopyCD11(_mesh(obj["h"], base), _mesh(obj["H"], base))
        if obj.get("reverse"):
            hh = hh.reversed()
        return holonomy(hh, data, tol=tol, workers=workers)
    if kind == "generator":
        family = obj.get("family")
        if family != "genus_one":
            raise UsageError(f"unknown homotopy family {family!r}")
        setup = genus_one_setup(int(obj.get("seed", 0)), group_from(obj.get("map", {})))
        detour = float(obj.get("detour", 0.0))
        bub = bool(obj.get("bubble", False))

        def fam(n):
            hh = setup.homotopy(n, detour, bub)
            return hh.reversed() if obj.get("reverse") else hh

        return holonomy(fam, setup.data, tuple(obj.get("resolutions", (32, 64, 96))), tol=tol, workers=workers)
    raise UsageError(f"unknown fixture type {kind!r}")


def cmd_holonomy(args, cfg):
    from .bundle import compare_homotopies

    files = args.fixtures or cfg.get("fixtures", [])
    if not files or len(files) > 2:
        raise UsageError("holonomy takes one fixture, or two for a well-definedness comparison")
    reps = [_holonomy_of(f, args, cfg) for f in files]
    if len(reps) == 1:
        report = reps[0].to_json()
        report["pass"] = reps[0].passed
        return report
    tol = _opt(args, cfg, "tol", 1e-2)
    snap = compare_homotopies(reps[0], reps[1], tol)
    return {
        "first": reps[0].to_json(),
        "second": reps[1].to_json(),
        "difference": {"value": reps[0].A - reps[1].A, "snap": snap.to_json()},
        "pass": snap.passed,
    }


def cmd_periods(args, cfg):
    from .constructions import period_cube
    from .quadrature import converge, integrate_3form

    spec = group_from(cfg)
    if args.family:
        spec = GroupSpec(args.family, args.n if args.n else (1 if args.family == "U1" else 2), spec.metric_scale)
    if args.metric_scale:
        spec = GroupSpec(spec.family, spec.n, args.metric_scale)
    resolutions = tuple(args.resolutions or cfg.get("resolutions", (32, 64, 96)))
    tol = _opt(args, cfg, "tol", 1e-2)
    workers = _opt(args, cfg, "workers", 1)

    def lam(g, x, y, z):
        return spec.cartan3(x, y, z)

    rep = converge(lambda n: integrate_3form(period_cube(n, spec), lam, workers), resolutions, tol, 2.0)
    out = rep.to_json()
    out["group"] = spec.to_json()
    out["pass"] = rep.passed
    return out


def _read_point(path, arity, spec):
    obj = jsonio.load(path)
    pt = jsonio.matrix_from_json(obj["point"] if isinstance(obj, dict) else obj)
    if pt.shape != (arity, spec.n, spec.n):
        raise UsageError(f"point must be an arity-{arity} tuple of {spec.n}x{spec.n} matrices")
    spec.check_group(pt, 1e-8)
    return pt


def cmd_word(args, cfg):
    from .identities import d_zeta_residuals, rng_for

    spec = group_from(cfg)
    src = args.src if args.src is not None else cfg.get("word")
    if src is None:
        raise UsageError("word needs a source string")
    form = WordForm(parse_word(src), spec)
    seed = _opt(args, cfg, "seed", 0)
    if args.point:
        pt = _read_point(args.point, form.arity, spec)
    else:
        pt = spec.random_element(rng_for(seed, 5), (form.arity,))
    value = form.value(pt)
    report = {
        "word": str(form.word),
        "arity": form.arity,
        "degree_vector": form.degree_vector.tolist(),
        "plan": form.plan_json(),
        "point": jsonio.matrix_to_json(pt),
        "value": jsonio.matrix_to_json(value),
        "pass": True,
    }
    if args.check_zeta:
        tol = _opt(args, cfg, "tol", 1e-4)
        res, orders = d_zeta_residuals(form, seed, int(cfg.get("points", 5)))
        ok = max(res) == 0.0 or (res[-1] <= tol and all(o >= 1.0 for o in orders))
        report["zeta_check"] = {"residuals": res, "orders": orders, "tol": tol, "pass": ok}
        report["pass"] = ok
    return report


def cmd_moment(args, cfg):
    from .constructions import curvature_loop
    from .identities import rng_for
    from .moment import momentum, momentum_defect

    spec = group_from(cfg)
    seed = _opt(args, cfg, "seed", 0)
    genus = int(cfg.get("genus", args.genus or 1))
    loop = curvature_loop(seed, spec, genus)
    data = loop.data
    ladder = tuple(cfg.get("resolutions", (16, 32, 64)))
    h0 = float(cfg.get("fd_step", 1e-4)) * ladder[-1] / ladder[0]
    rng = rng_for(seed, 6)
    x = spec.random_algebra(rng)
    defects = []
    for k, n in enumerate(ladder):
        p = loop.point(n)
        defects.append(momentum_defect(p, x, loop.tangents(n)[0], data, h0 / 2**k))
    from .calculus import refinement_orders

    orders = refinement_orders([1.0 / n for n in ladder], defects).tolist()
    p = loop.point(ladder[-1])
    mu = momentum(p, data)
    gs = spec.random_element(rng, (int(cfg.get("conjugations", 50)),))
    from .lie import adjoint, dagger

    eq = max(float(algebra_norm(momentum(p.conjugated(g, data), data) - adjoint(g, mu))) for g in gs)
    tol = _opt(args, cfg, "tol", 1e-3)
    ok = defects[-1] <= tol and all(o >= 1.0 for o in orders) and eq <= 1e-10
    return {
        "momentum": jsonio.matrix_to_json(mu),
        "momentum_norm": float(algebra_norm(mu)),
        "defect": {"resolutions": list(ladder), "values": defects, "orders": orders, "tol": tol},
        "equivariance_defect": eq,
        "pass": ok,
    }


def cmd_probe(args, cfg):
    from .bundle import MapData
    from .identities import rng_for
    from .lie import exp
    from .moment import flatness_probe

    spec = group_from(cfg)
    genus = int(cfg.get("genus", args.genus or 1))
    data = MapData.relator(genus, spec)
    tol = _opt(args, cfg, "tol", 1e-10)
    if args.point:
        pt = _read_point(args.point, data.arity, spec)
    else:
        rng = rng_for(_opt(args, cfg, "seed", 0), 7)
        if args.flat:
            # commuting tuple: a common maximal torus, conjugated
            g = spec.random_element(rng)
            angles = rng.uniform(-np.pi, np.pi, data.arity)
            d = np.zeros((data.arity, spec.n, spec.n), dtype=complex)
            d[:, 0, 0], d[:, 1, 1] = 1j * angles, -1j * angles
            pt = g @ exp(d) @ g.conj().T
        else:
            pt = spec.random_element(rng, (data.arity,))
    rep = flatness_probe(pt, data, tol)
    out = rep.to_json()
    out["momentum"] = jsonio.matrix_to_json(rep.momentum)
    return out


COMMANDS = {
    "verify": cmd_verify,
    "holonomy": cmd_holonomy,
    "periods": cmd_periods,
    "word": cmd_word,
    "moment": cmd_moment,
    "probe": cmd_probe,
}


# ---------------------------------------------------------------------------
# argument parsing


def _globals(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=d, help="JSON config file")
    p.add_argument("--seed", type=int, metavar="U64", default=d)
    p.add_argument("--workers", type=int, metavar="N", default=d)
    p.add_argument("--json", metavar="OUT", default=d, help="write the report here instead of stdout")
    p.add_argument("--csv", metavar="OUT", default=d)
    p.add_argument("--tol", type=float, metavar="REAL", default=d)


def build_parser():
    p = argparse.ArgumentParser(prog="fiberholonomy", description=__doc__.splitlines()[0])
    _globals(p, False)
    sub = p.add_subparsers(dest="command", required=True)
    sp = {name: sub.add_parser(name) for name in COMMANDS}
    for s in sp.values():
        _globals(s, True)
    sp["verify"].add_argument("--debug-cocycle-sign", type=int, choices=(-1, 1), default=None,
                              help="override the calibrated cocycle sign (for contrast runs)")
    sp["holonomy"].add_argument("fixtures", nargs="*", help="homotopy fixture file(s)")
    sp["periods"].add_argument("--family", choices=("SU", "U1"))
    sp["periods"].add_argument("--n", type=int)
    sp["periods"].add_argument("--metric-scale", type=float)
    sp["periods"].add_argument("--resolutions", type=int, nargs=3)
    sp["word"].add_argument("src", nargs="?")
    sp["word"].add_argument("--point", metavar="PATH")
    sp["word"].add_argument("--check-zeta", action="store_true")
    sp["moment"].add_argument("--genus", type=int)
    sp["probe"].add_argument("--genus", type=int)
    sp["probe"].add_argument("--point", metavar="PATH")
    sp["probe"].add_argument("--flat", action="store_true", help="sample a commuting tuple")
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    for name in ("config", "seed", "workers", "json", "csv", "tol"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = load_config(args.config)
        if args.workers is not None and args.workers < 1:
            raise UsageError("--workers must be positive")
        report = COMMANDS[args.command](args, cfg)
    except WordSyntaxError as exc:
        print(f"error: word syntax: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, StructureError, CutLocusError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(report, args, out)
    return EXIT_PASS if report.get("pass", True) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
