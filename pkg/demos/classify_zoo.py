"""Classify a handful of surfaces by the shape of their normal curvatures."""
from ruledsurf import InvariantProfile, make_builtin_profile, verify_surface
from ruledsurf.cli import class_label

zoo = {
    "helicoid": make_builtin_profile("helicoid", delta0=1.0),
    "edlinger": make_builtin_profile("edlinger", k0=-2.0, delta0=0.5),
    "orthoid": make_builtin_profile("const_drall_orthoid", k="0.7", delta0=1.0),
    "conoid": make_builtin_profile("const_drall_conoid", lam=1.0, delta0=1.0),
    "twisted orthoid": make_builtin_profile("const_drall_orthoid", k="0.5 + 0.3*sin(u)", delta0=1.0),
    "generic": InvariantProfile(0.3, "1 + 0.1*sin(u)", lam=0.2, name="generic"),
}

for name, profile in zoo.items():
    rep = verify_surface(profile)
    rows = sorted(f"{r.family}:{'0' if r.n is None else r.n}" for r in rep.observed_rows)
    status = "consistent" if rep.consistent else "; ".join(rep.disagreements)
    print(f"{name:16s} {class_label(rep.flags):22s} {' '.join(rows) or '-':40s} {status}")
