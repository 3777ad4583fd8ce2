"""Command-line front end: ``ruledsurf analyze|classify|reconstruct|verify``.

Exit status: 0 success, 1 a check failed, 2 bad spec or I/O, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from .classification import (
    GridSpec,
    SurfaceClass,
    check_corollary2,
    interior_samples,
    verify_surface,
)
from .expressions import EvaluationError
from .families import CurveFamily, DegenerateFieldError, family_normal_curvature
from .frames import (
    DegenerateMapError,
    IntegrationError,
    RawRuledMap,
    TorsalPointError,
    extract_standard_form,
    integrate_striction_frame,
)
from .geometry import (
    RuledSurface,
    curvature_scalars,
    fd_geometry_oracle,
    normal_curvature,
    sample_mesh,
)
from .profiles import InvariantProfile, InvariantViolation, ProfileDomainError
from .specs import SpecError, SurfaceSpec, build_profile, load_spec, parse_spec, read_csv, write_csv, write_obj, write_report

EXIT_OK, EXIT_CHECK, EXIT_SPEC, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (ArithmeticError, IntegrationError, TorsalPointError, DegenerateMapError,
                  DegenerateFieldError, ProfileDomainError, InvariantViolation)

ANALYZE_COLUMNS = ("u", "v", "w", "g11", "g12", "g22", "h11", "h12", "h22", "K", "H", "k1", "k2")

BUILTIN_SPECS = {
    "helicoid": {"builtin": "helicoid", "params": {"delta0": 1}},
    "edlinger": {"builtin": "edlinger", "params": {"k0": -1, "delta0": 1}},
    "const_drall_orthoid": {"builtin": "const_drall_orthoid", "params": {"k": 0.7, "delta0": 1}},
    "const_drall_conoid": {"builtin": "const_drall_conoid", "params": {"lambda": 1, "delta0": 1}},
}
# profiles on which the converse statements are exercised
WITNESS_SPECS = {
    "perturbed_edlinger": {"k": "-1", "delta": "1", "lambda": "1.05"},
    "corollary_witness": {"k": "1", "delta": "1", "lambda": "0"},
}


def builtin_spec(name, grid=(32, 16)) -> SurfaceSpec:
    inv = {**BUILTIN_SPECS, **WITNESS_SPECS}[name]
    return parse_spec({"invariants": inv, "domain": [0, 2 * math.pi], "v_range": [-2, 2], "grid": list(grid)})


def class_label(flags: SurfaceClass) -> str:
    """Most specific class name: helicoid and Edlinger imply their parents."""
    if SurfaceClass.WENDELFLAECHE in flags:
        return "WENDELFLAECHE"
    if SurfaceClass.EDLINGER in flags:
        return "EDLINGER"
    parts = [f.name for f in (SurfaceClass.CONST_DRALL, SurfaceClass.ORTHOID, SurfaceClass.KONOID) if f in flags]
    return "+".join(parts) if parts else "GENERIC_SKEW"


def _check(name, measured, tolerance, comparison="<="):
    measured = float(measured)
    passed = measured <= tolerance if comparison == "<=" else measured > tolerance
    return {"name": name, "measured": measured, "comparison": comparison, "tolerance": float(tolerance),
            "passed": bool(passed)}


def _flag_check(name, ok):
    return {"name": name, "measured": 1.0 if ok else 0.0, "comparison": "==", "tolerance": 1.0,
            "passed": bool(ok)}


def _grid(spec: SurfaceSpec, profile: InvariantProfile):
    nu, nv = spec.grid
    a, b = profile.domain
    return np.linspace(a, b, nu), np.linspace(spec.v_range[0], spec.v_range[1], nv)


def _base_report(command, spec):
    return {"command": command, "spec": spec.to_json(), "tolerances": spec.tolerances()}


# --- analyze --------------------------------------------------------------------

def analyze_rows(spec: SurfaceSpec, profile=None):
    profile = profile or build_profile(spec)
    uu, vv = _grid(spec, profile)
    rows = []
    for u in uu:
        for v in vv:
            geo = curvature_scalars(profile, u, v)
            g, h = geo.g, geo.h
            rows.append((u, v, geo.w, g[0, 0], g[0, 1], g[1, 1], h[0, 0], h[0, 1], h[1, 1],
                         geo.K, geo.H, geo.k1, geo.k2))
    return np.array(rows)


def cmd_analyze(spec: SurfaceSpec, out_dir) -> tuple[dict, int]:
    """Curvature grid CSV plus a report with the range of every column."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = analyze_rows(spec)
    write_csv(out_dir / "analyze.csv", ANALYZE_COLUMNS, data)
    report = _base_report("analyze", spec)
    report["ranges"] = {c: {"min": float(np.min(data[:, i])), "max": float(np.max(data[:, i]))}
                        for i, c in enumerate(ANALYZE_COLUMNS)}
    report["checks"] = [_check("K < 0", float(np.max(data[:, 9])), 0.0, "<=")]
    report["checks"][0]["passed"] = bool(np.all(data[:, 9] < 0))
    return _finish(report, out_dir, ["analyze.csv"])


# --- classify -------------------------------------------------------------------

def _classification_dict(rep):
    fits = {}
    for fam, fit in rep.fits.items():
        fits[fam.value] = {
            "n": fit.n,
            "zero": fit.zero,
            "residual": fit.residual,
            "accepted": fit.accepted,
            "rows": [{"n": m.row.n, "f": m.row.shape, "label": m.row.label,
                      "shape_residual": m.shape_residual, "match": m.shape_match}
                     for m in rep.matches[fam]],
        }
    cor = None
    if rep.corollary is not None:
        c = rep.corollary
        cor = {"holds": c.holds, "max_residual": c.max_residual, "witness": list(c.witness),
               "assignment": c.assignment}
    m = rep.measures
    return {
        "class": class_label(rep.flags),
        "flags": rep.flags.names,
        "invariants": {"max_abs_ddelta": m.max_ddelta, "max_abs_delta": m.max_delta,
                       "max_abs_lambda": m.max_lambda, "max_abs_k": m.max_k,
                       "max_abs_k_lambda_plus_1": m.max_edlinger},
        "fits": fits,
        "rows": [{"family": r.family, "n": r.n, "f": r.shape, "label": r.label} for r in rep.observed_rows],
        "expected_rows": [{"family": r.family, "n": r.n, "f": r.shape} for r in rep.expected_rows],
        "corollary": cor,
        "corollary_note": rep.corollary_note,
        "disagreements": list(rep.disagreements),
        "notes": list(rep.notes),
    }


def classify_profile(spec: SurfaceSpec, profile):
    tol = spec.tolerances()
    nu, nv = spec.grid
    grid = GridSpec(nu=max(nu, 9), nv=max(nv, 11), v_range=spec.v_range)
    return verify_surface(profile, grid, tol=tol["fit"], shape_tol=tol["shape"], corollary_tol=tol["corollary"])


def cmd_classify(spec: SurfaceSpec, out_dir) -> tuple[dict, int]:
    profile = build_profile(spec)
    rep = classify_profile(spec, profile)
    report = _base_report("classify", spec)
    report["classification"] = _classification_dict(rep)
    report["checks"] = [_flag_check("classification consistent with invariants", rep.consistent)]
    return _finish(report, out_dir, [])


# --- reconstruct ----------------------------------------------------------------

def _max_collinearity(mesh):
    pts = mesh.vertices.reshape(mesh.nu, mesh.nv, 3)
    worst = 0.0
    for ruling in pts:
        p0, p1 = ruling[0], ruling[-1]
        d = p1 - p0
        dist = np.linalg.norm(np.cross(ruling - p0, d), axis=1) / np.linalg.norm(d)
        scale = max(1.0, float(np.max(np.abs(ruling))))
        worst = max(worst, float(np.max(dist)) / scale)
    return worst


def _relative_error(got, ref):
    ref = np.asarray(ref, dtype=float)
    return float(np.max(np.abs(np.asarray(got) - ref)) / max(float(np.max(np.abs(ref))), 1.0))


def roundtrip_errors(profile, u, s, e):
    """Re-extract invariants from striction samples and rulings; max relative error per invariant."""
    raw = RawRuledMap.from_samples(u, s, e)
    ext, _ = extract_standard_form(raw, len(u))
    # integrated frames are unit speed, so arc length equals u
    t = np.clip(np.asarray(u, dtype=float), *ext.domain)
    return {
        "k": _relative_error(ext.k(t), np.broadcast_to(profile.k(u), t.shape)),
        "delta": _relative_error(ext.delta(t), np.broadcast_to(profile.delta(u), t.shape)),
        "lambda": _relative_error(ext.lam(t), np.broadcast_to(profile.lam(u), t.shape)),
    }


def cmd_reconstruct(spec: SurfaceSpec, out_dir) -> tuple[dict, int]:
    """Integrate the frame, write the OBJ mesh and the striction / ruling polylines."""
    if spec.invariants is None:
        raise SpecError("invariants", "reconstruct needs an invariants spec")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    profile = build_profile(spec)
    surface = RuledSurface.from_profile(profile, spec.v_range)
    mesh = sample_mesh(surface, *spec.grid)
    write_obj(out_dir / "mesh.obj", mesh)
    c = surface.striction
    write_csv(out_dir / "striction.csv", ("u", "x", "y", "z"), np.column_stack([c.u, c.s]))
    write_csv(out_dir / "rulings.csv", ("u", "ex", "ey", "ez"), np.column_stack([c.u, c.e]))

    # round trip from the files just written
    _, srows = read_csv(out_dir / "striction.csv")
    _, erows = read_csv(out_dir / "rulings.csv")
    errs = roundtrip_errors(profile, srows[:, 0], srows[:, 1:], erows[:, 1:])
    tol = spec.tolerances()
    nu, nv = spec.grid
    report = _base_report("reconstruct", spec)
    report["mesh"] = {"vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)), "nu": nu, "nv": nv}
    report["striction_samples"] = int(len(c.u))
    report["checks"] = [
        _flag_check("vertex count nu*nv", len(mesh.vertices) == nu * nv),
        _flag_check("quad count (nu-1)*(nv-1)", len(mesh.faces) == (nu - 1) * (nv - 1)),
        _check("rulings collinear", _max_collinearity(mesh), 1e-12),
        _check("frame drift before renormalization", float(np.max(c.pre_drift, initial=0.0)), 1e-9),
        _check("frame drift after renormalization", float(np.max(c.post_drift, initial=0.0)), 1e-15),
    ] + [_check(f"round trip {name}", err, tol["roundtrip"]) for name, err in errs.items()]
    return _finish(report, out_dir, ["mesh.obj", "striction.csv", "rulings.csv"])


# --- verify ---------------------------------------------------------------------

def verification_checks(spec: SurfaceSpec, profile=None, label=""):
    """The invariant / theorem battery for one spec, as a list of check records."""
    profile = profile or build_profile(spec)
    tol = spec.tolerances()
    pre = f"{label}: " if label else ""
    checks = []

    if spec.invariants is not None:
        a, b = profile.domain
        curve = integrate_striction_frame(profile, a, b, 1e-3)
        checks.append(_check(pre + "frame drift before renormalization", float(np.max(curve.pre_drift)), 1e-9))
        checks.append(_check(pre + "frame drift after renormalization", float(np.max(curve.post_drift)), 1e-15))
        for name, err in roundtrip_errors(profile, curve.u, curve.s, curve.e).items():
            checks.append(_check(pre + f"round trip {name}", err, tol["roundtrip"]))
        surface = RuledSurface(profile, curve, spec.v_range)
        uo = interior_samples(profile, 6, 0.05)
        vo = np.linspace(spec.v_range[0], spec.v_range[1], 6)
        err_K = err_H = 0.0
        for u in uo:
            for v in vo:
                ref = curvature_scalars(profile, u, v)
                fd = fd_geometry_oracle(surface, u, v)
                err_K = max(err_K, abs(fd.K - ref.K) / abs(ref.K))
                err_H = max(err_H, abs(fd.H - ref.H) / max(abs(ref.H), math.sqrt(abs(ref.K))))
        checks.append(_check(pre + "oracle K", err_K, tol["oracle"]))
        checks.append(_check(pre + "oracle H", err_H, tol["oracle"]))

    # structural identities
    uu = interior_samples(profile, 20, 0.0)
    vv = np.linspace(spec.v_range[0], spec.v_range[1], 20)
    s3 = prod = tr = ruling = 0.0
    kmax = -math.inf
    for u in uu:
        for v in vv:
            geo = curvature_scalars(profile, u, v)
            s3 = max(s3, abs(family_normal_curvature(CurveFamily.S3, profile, u, v) - 2 * geo.H)
                     / max(abs(2 * geo.H), math.sqrt(abs(geo.K))))
            prod = max(prod, abs(geo.k1 * geo.k2 - geo.K) / abs(geo.K))
            tr = max(tr, abs(geo.k1 + geo.k2 - 2 * geo.H) / max(abs(geo.k1), abs(geo.k2)))
            ruling = max(ruling, abs(normal_curvature(profile, u, v, (0.0, 1.0))))
            kmax = max(kmax, geo.K)
    checks.append(_check(pre + "S3 normal curvature = 2H", s3, 1e-12))
    checks.append(_check(pre + "k1 k2 = K", prod, 1e-12))
    checks.append(_check(pre + "k1 + k2 = 2H", tr, 1e-12))
    checks.append(_check(pre + "rulings asymptotic", ruling, 0.0))
    checks.append(_flag_check(pre + "K < 0", kmax < 0))

    rep = classify_profile(spec, profile)
    checks.append(_flag_check(pre + "classification consistent with invariants", rep.consistent))
    if SurfaceClass.EDLINGER in rep.flags:
        checks.append(_check(pre + "corollary holds", rep.corollary.max_residual, tol["corollary"]))
    else:
        s2 = rep.fits[CurveFamily.S2]
        absent = not any(r.family == "S2" and r.n == -3 for r in rep.observed_rows)
        checks.append(_flag_check(pre + "converse: S2 n=-3 row absent", absent))
        if not s2.zero:
            checks.append(_check(pre + "converse: S2 n=-3 residual", s2.residuals[-3], 1e-3, ">"))
        if rep.corollary is not None:
            # non-Edlinger: the identity must fail somewhere; small perturbations of
            # the Edlinger locus fail by a correspondingly small margin
            cor = check_corollary2(profile, [(u, v) for u in uu for v in vv], tol["corollary"])
            bound = 0.1 if rep.measures.max_edlinger >= 0.5 else 1e-3
            checks.append(_check(pre + "converse: corollary fails", cor.max_residual, bound, ">"))
    return checks, rep


def cmd_verify(spec: SurfaceSpec | None, out_dir, all_builtins=False, grid=None) -> tuple[dict, int]:
    if all_builtins:
        specs = [(name, builtin_spec(name, grid or (32, 16))) for name in (*BUILTIN_SPECS, *WITNESS_SPECS)]
    else:
        if spec is None:
            raise SpecError("", "verify needs --spec or --all-builtins")
        specs = [("", spec)]
    report = {"command": "verify", "surfaces": [], "checks": []}
    for name, sp in specs:
        checks, rep = verification_checks(sp, label=name)
        report["surfaces"].append({"name": name or "spec", "spec": sp.to_json(), "class": class_label(rep.flags)})
        report["checks"].extend(checks)
    return _finish(report, out_dir, [])


# --- driver ---------------------------------------------------------------------

def _finish(report, out_dir, outputs):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = all(c["passed"] for c in report.get("checks", []))
    report["outputs"] = outputs + ["report.json"]
    report["status"] = "pass" if ok else "fail"
    write_report(out_dir / "report.json", report)
    return report, EXIT_OK if ok else EXIT_CHECK


def _parse_grid(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected NUxNV, got {text!r}")
    nu, nv = int(m.group(1)), int(m.group(2))
    if nu < 2 or nv < 2:
        raise argparse.ArgumentTypeError("nu and nv must be at least 2")
    return nu, nv


def _positive(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def build_parser():
    p = argparse.ArgumentParser(prog="ruledsurf", description="Skew ruled surfaces from their invariants.")
    p.add_argument("command", choices=("analyze", "classify", "reconstruct", "verify"))
    p.add_argument("--spec", metavar="PATH", help="JSON surface spec")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    p.add_argument("--tol", type=_positive, metavar="X", help="override the fit and shape tolerance")
    p.add_argument("--grid", type=_parse_grid, metavar="NUxNV", help="override the spec grid")
    p.add_argument("--all-builtins", action="store_true", help="verify every built-in surface")
    return p


def _apply_overrides(spec, args):
    if args.grid:
        spec.grid = args.grid
    if args.tol:
        spec.tol = {**spec.tol, "fit": args.tol, "shape": args.tol}
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    if args.all_builtins and args.command != "verify":
        print("error: --all-builtins only applies to verify", file=sys.stderr)
        return EXIT_SPEC
    try:
        spec = None
        if args.spec:
            spec = _apply_overrides(load_spec(args.spec), args)
        elif not (args.command == "verify" and args.all_builtins):
            raise SpecError("", f"{args.command} needs --spec PATH")
        if args.command == "analyze":
            report, code = cmd_analyze(spec, args.out)
        elif args.command == "classify":
            report, code = cmd_classify(spec, args.out)
        elif args.command == "reconstruct":
            report, code = cmd_reconstruct(spec, args.out)
        else:
            report, code = cmd_verify(spec, args.out, args.all_builtins, args.grid)
    except SpecError as err:
        print(f"spec error: {err}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_SPEC
    except NUMERIC_ERRORS as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    failed = [c["name"] for c in report.get("checks", []) if not c["passed"]]
    summary = report.get("classification", {}).get("class")
    print(f"{args.command}: {report['status']}" + (f" ({summary})" if summary else ""))
    for name in failed:
        print(f"  failed: {name}")
    return code


if __name__ == "__main__":
    sys.exit(main())
