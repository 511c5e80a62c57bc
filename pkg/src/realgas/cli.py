"""Command-line interface.

Every command writes one table (CSV or JSON) to ``--out`` or stdout.  Runs
are deterministic; nothing is random, so ``--seed`` is refused.

Exit codes: 0 success, 2 bad input or domain, 3 solver did not converge,
4 file I/O.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np
from scipy.spatial import cKDTree

from . import errors
from .filtration import (HomogeneousAnisotropic, Isotropic, MediumSpec, SourceSpec,
                         build_q_profile, invert_q)
from .gas_models import model_from_string
from .isentrope import isentrope_from_constant, make_isentrope, sound_speed_on_isentrope
from .laplace import BoxDomain, assemble_dirichlet_field
from .phase_equilibrium import (binodal_charts, binodal_curve, critical_point, spinodal_T,
                                spinodal_volumes)
from .phase_map import BinodalTable, map_field, phase_of
from .thermo_core import (evaluate_state, heat_capacity_p, heat_capacity_v, pressure,
                          sound_speed_sq)

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {"type": "string"},
        "n": {"type": "number", "exclusiveMinimum": 0},
        "sigma0": {"type": "number"},
        "c": {"type": "number", "exclusiveMinimum": 0},
        "medium": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mu", "permeability"],
            "properties": {
                "mu": {"type": "number", "exclusiveMinimum": 0},
                "permeability": {
                    "oneOf": [
                        {"type": "object", "additionalProperties": False,
                         "required": ["isotropic"],
                         "properties": {"isotropic": {"type": "number", "exclusiveMinimum": 0}}},
                        {"type": "object", "additionalProperties": False,
                         "required": ["eigs"],
                         "properties": {"eigs": _vec3,
                                        "frame": {"type": "array", "items": _vec3,
                                                  "minItems": 3, "maxItems": 3}}},
                    ]
                },
            },
        },
        "v_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "samples": {"type": "integer", "minimum": 64},
        "box": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lower", "upper"],
            "properties": {
                "lower": _vec3,
                "upper": _vec3,
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 8},
                          "minItems": 3, "maxItems": 3},
            },
        },
        "sources": {
            "type": "array",
            "items": {"type": "object", "additionalProperties": False,
                      "required": ["pos", "I"],
                      "properties": {"pos": _vec3, "I": {"type": "number"}}},
        },
        "v0": {
            "oneOf": [
                {"type": "number"},
                {"type": "object", "additionalProperties": False,
                 "required": ["expr", "file"],
                 "properties": {"expr": {"const": "table"}, "file": {"type": "string"}}},
            ]
        },
        "binodal": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"T_min": {"type": "number", "exclusiveMinimum": 0},
                           "num": {"type": "integer", "minimum": 4}},
        },
        "radial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["r_min", "r_max"],
            "properties": {"r_min": {"type": "number", "exclusiveMinimum": 0},
                           "r_max": {"type": "number", "exclusiveMinimum": 0},
                           "steps": {"type": "integer", "minimum": 2}},
        },
        "source": {
            "type": "object",
            "additionalProperties": False,
            "required": ["I"],
            "properties": {"I": {"type": "number"}},
        },
    },
    "not": {"required": ["sigma0", "c"]},
}


def load_scenario(path):
    """Read and validate a scenario file; unknown keys are rejected."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise errors.ParamError(f"{path}: invalid JSON ({exc})") from exc
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise errors.ParamError(f"{path}: scenario invalid at {where}: {exc.message}") from exc
    return data


# emitters --------------------------------------------------------------------------
def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def render_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def render_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def render_table(columns, rows, fmt, extra=None):
    if fmt == "json":
        payload = {"columns": list(columns), "rows": [list(r) for r in rows]}
        if extra:
            payload.update(extra)
        return render_json(payload)
    return render_csv(columns, rows)


def write_output(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


class _IOFailure(Exception):
    pass


# scenario plumbing -----------------------------------------------------------------
def _setting(args, scenario, key, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    return scenario.get(key, default)


def _model(args, scenario):
    return model_from_string(_setting(args, scenario, "model", "vdw"),
                             float(_setting(args, scenario, "n", 3.0)))


def _isentrope(args, scenario, model):
    sigma0 = _setting(args, scenario, "sigma0")
    c = _setting(args, scenario, "c")
    if sigma0 is not None and c is not None:
        raise errors.ParamError("give either sigma0 or c, not both")
    if c is not None:
        return isentrope_from_constant(model, float(c))
    if sigma0 is None:
        raise errors.ParamError("an entropy level is required (--sigma0 or --c)")
    return make_isentrope(model, float(sigma0))


def _medium(scenario):
    spec = scenario.get("medium", {"mu": 1.0, "permeability": {"isotropic": 1.0}})
    perm = spec["permeability"]
    if "isotropic" in perm:
        return MediumSpec(float(spec["mu"]), Isotropic(float(perm["isotropic"])))
    frame = perm.get("frame", np.eye(3).tolist())
    return MediumSpec(float(spec["mu"]), HomogeneousAnisotropic(tuple(perm["eigs"]),
                                                                tuple(map(tuple, frame))))


def _profile(args, scenario, model):
    iso = _isentrope(args, scenario, model)
    v_range = _setting(args, scenario, "v_range")
    if v_range is None:
        raise errors.ParamError("a volume range is required (--v-range or scenario v_range)")
    samples = int(_setting(args, scenario, "samples", 256))
    return build_q_profile(iso, _medium(scenario), tuple(v_range), samples)


def _binodal_table(model, scenario, profile=None):
    spec = scenario.get("binodal", {})
    T_min = spec.get("T_min")
    if T_min is None and profile is not None:
        T_min = 0.9 * float(np.min(profile.iso.tau(profile.v)))
    if T_min is None:
        raise errors.ParamError("binodal.T_min is required")
    return BinodalTable.build(model, float(T_min), int(spec.get("num", 256)))


def _v0_function(spec, scenario_dir):
    if isinstance(spec, (int, float)):
        return float(spec)
    path = Path(spec["file"])
    if not path.is_absolute():
        path = scenario_dir / path
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    if table.shape[1] != 4:
        raise errors.ParamError(f"{path}: v0 table needs columns x1,x2,x3,v0")
    tree = cKDTree(table[:, :3])

    def v0(points):
        _, idx = tree.query(points)
        return table[idx, 3]

    return v0


def _label(table, profile, v):
    if v is None:
        return ""
    return phase_of(table, v, profile.iso.tau(v)).value


# commands --------------------------------------------------------------------------
def cmd_state(args, scenario):
    model = _model(args, scenario)
    T, v = args.T, args.v
    st = evaluate_state(model, T, v)
    row = {"T": T, "v": v, "p": st.p, "eps": st.eps, "sigma": st.sigma, "gamma": st.gamma,
           "eta": st.eta, "Cv": heat_capacity_v(model, T, v)}
    for key, fn in (("Cp", heat_capacity_p), ("Cs", sound_speed_sq)):
        try:
            row[key] = fn(model, T, v)
        except errors.SingularError:
            row[key] = math.nan
    row["applicability"] = st.applicability.value
    cols = list(row)
    return render_table(cols, [[row[c] for c in cols]], args.format)


def cmd_binodal(args, scenario):
    model = _model(args, scenario)
    crit = critical_point(model)
    T_max = min(args.T_max, crit.T) if args.T_max is not None else crit.T
    grid = np.linspace(T_max, args.T_min, args.steps)
    grid = grid[grid < crit.T]
    points = binodal_curve(model, grid, crit=crit)
    cols = ["T", "v1", "v2", "p", "dQ", "dW", "dEps"]
    rows = [[cp.T, cp.v1, cp.v2, cp.p, cp.dQ, cp.dW, cp.dEps] for cp in points]
    rows.append([crit.T, crit.v, crit.v, crit.p, 0.0, 0.0, 0.0])
    if args.with_spinodal:
        cols += ["v_spin_left", "v_spin_right"]
        for r in rows[:-1]:
            r.extend(spinodal_volumes(model, r[0], crit))
        rows[-1].extend([crit.v, crit.v])
    rows.sort(key=lambda r: r[0])
    extra = None
    if args.format == "json":
        extra = {"critical": {"T": crit.T, "v": crit.v, "p": crit.p},
                 "charts": binodal_charts(points)}
    return render_table(cols, rows, args.format, extra)


def cmd_spinodal(args, scenario):
    model = _model(args, scenario)
    vs = np.geomspace(args.v_min - model.v_min, args.v_max - model.v_min, args.steps) + model.v_min
    rows = []
    for v in vs:
        T = spinodal_T(model, float(v))
        rows.append([float(v), T, pressure(model, T, float(v))])
    return render_table(["v", "T", "p"], rows, args.format)


def cmd_isentrope(args, scenario):
    model = _model(args, scenario)
    iso = _isentrope(args, scenario, model)
    vs = np.geomspace(args.v_min - model.v_min, args.v_max - model.v_min, args.steps) + model.v_min
    T = iso.tau(vs)
    p = pressure(model, T, vs)
    cs = sound_speed_on_isentrope(iso, vs)
    rows = [list(r) for r in zip(vs, T, p, cs)]
    extra = {"form": iso.form.value, "c": iso.c, "sigma0": iso.sigma0} if args.format == "json" else None
    return render_table(["v", "T", "p", "Cs"], rows, args.format, extra)


def cmd_qprofile(args, scenario):
    model = _model(args, scenario)
    prof = _profile(args, scenario, model)
    rows = [[float(v), float(q), float(dq), prof.branch_of(float(v))]
            for v, q, dq in zip(prof.v, prof.q, prof.dq)]
    extra = None
    if args.format == "json":
        extra = {"v_ref": prof.v_ref, "folds": list(prof.folds),
                 "branches": [b.__dict__ for b in prof.branches]}
    return render_table(["v", "Q", "dQ", "branch_id"], rows, args.format, extra)


def cmd_source(args, scenario):
    model = _model(args, scenario)
    prof = _profile(args, scenario, model)
    table = _binodal_table(model, scenario, prof)
    if "source" in scenario:
        I = float(scenario["source"]["I"])
    elif scenario.get("sources"):
        I = float(scenario["sources"][0]["I"])
    else:
        raise errors.ParamError("scenario needs source.I")
    radial = scenario.get("radial", {"r_min": 0.05, "r_max": 1.0})
    radii = np.geomspace(radial["r_min"], radial["r_max"], int(radial.get("steps", 64)))
    nb = len(prof.branches)
    cols = ["r", "u"]
    for b in range(nb):
        cols += [f"v_{b}", f"T_{b}", f"label_{b}"]
    rows = []
    src = SourceSpec((0.0, 0.0, 0.0), I)
    for r in radii:
        u = src.I / (4 * np.pi * r)
        hits = dict((bid, v) for v, bid in invert_q(prof, u))
        row = [float(r), float(u)]
        for b in range(nb):
            v = hits.get(b)
            row += [v, None if v is None else prof.iso.tau(v), _label(table, prof, v)]
        rows.append(row)
    return render_table(cols, rows, args.format)


def _dirichlet(args, scenario):
    model = _model(args, scenario)
    prof = _profile(args, scenario, model)
    if "box" not in scenario:
        raise errors.ParamError("scenario needs a box")
    box = scenario["box"]
    domain = BoxDomain(tuple(box["lower"]), tuple(box["upper"]),
                       tuple(box.get("shape", (32, 32, 32))))
    sources = [SourceSpec(tuple(s["pos"]), float(s["I"])) for s in scenario.get("sources", [])]
    if "v0" not in scenario:
        raise errors.ParamError("scenario needs boundary volumes v0")
    v0 = _v0_function(scenario["v0"], Path(args.scenario).parent if args.scenario else Path("."))
    medium = _medium(scenario)
    hf = assemble_dirichlet_field(domain, prof, sources, v0, medium=medium)
    table = _binodal_table(model, scenario, prof)
    labeled = map_field(hf, prof, table)
    return model, prof, hf, labeled


def _summary(hf, labeled):
    return {"residual": hf.residual, "iterations": len(hf.u0.history),
            "boundary_branch": hf.branch_id, "interfaces": labeled.interface_radii(),
            "center": labeled.center}


def cmd_dirichlet(args, scenario):
    _, _, hf, labeled = _dirichlet(args, scenario)
    rows = [[*map(float, x), float(u)] for x, u in zip(labeled.points, labeled.u)]
    summary = _summary(hf, labeled)
    if args.summary:
        write_output(render_json(summary), args.summary)
    extra = {"summary": summary} if args.format == "json" else None
    return render_table(["x1", "x2", "x3", "u"], rows, args.format, extra)


def cmd_phasemap(args, scenario):
    _, _, hf, labeled = _dirichlet(args, scenario)
    summary = _summary(hf, labeled)
    if args.summary:
        write_output(render_json(summary), args.summary)
    extra = {"summary": summary} if args.format == "json" else None
    return render_table(["x1", "x2", "x3", "branch_id", "v", "T", "label"], labeled.records(),
                        args.format, extra)


COMMANDS = {
    "state": cmd_state, "binodal": cmd_binodal, "spinodal": cmd_spinodal,
    "isentrope": cmd_isentrope, "qprofile": cmd_qprofile, "source": cmd_source,
    "dirichlet": cmd_dirichlet, "phasemap": cmd_phasemap,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="ideal, vdw, pr or virial:<file>")
    common.add_argument("--n", type=float, help="degrees of freedom")
    common.add_argument("--sigma0", type=float, help="entropy level, sigma = R_eff(phi + T phi_T)")
    common.add_argument("--c", type=float, help="isentrope prefactor instead of sigma0")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--seed", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="realgas",
                                     description="Real-gas thermodynamics and filtration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[common], help="state functions at one (T, v)")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--v", type=float, required=True)

    p = sub.add_parser("binodal", parents=[common], help="coexistence curve table")
    p.add_argument("--T-min", type=float, required=True)
    p.add_argument("--T-max", type=float)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--with-spinodal", action="store_true")

    for name, text in (("spinodal", "spinodal curve T(v)"), ("isentrope", "isentrope T(v)")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--v-min", type=float, required=True)
        p.add_argument("--v-max", type=float, required=True)
        p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("qprofile", parents=[common], help="tabulated Q(v) and its branches")
    p.add_argument("--v-range", type=float, nargs=2, dest="v_range")
    p.add_argument("--samples", type=int)

    sub.add_parser("source", parents=[common], help="radial single-source profile")
    for name, text in (("dirichlet", "box Dirichlet field"), ("phasemap", "phase labels on the box")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--summary", help="write the summary JSON here")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        print("realgas: --seed is not accepted; every command is deterministic", file=sys.stderr)
        return EXIT_INPUT
    try:
        scenario = load_scenario(args.scenario) if args.scenario else {}
        text = COMMANDS[args.command](args, scenario)
        write_output(text, args.out)
    except (_IOFailure, OSError) as exc:
        print(f"realgas: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (errors.ConvergenceError, errors.QuadratureError) as exc:
        print(f"realgas: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (errors.RealGasError, ValueError) as exc:
        print(f"realgas: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
