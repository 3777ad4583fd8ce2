"""A walk around an Edlinger surface.

Edlinger surfaces have constant drall and k * lambda = -1.  Their striction
line is a curvature line, and both principal curvatures are pure powers of
w = sqrt(v^2 + delta^2).  This script checks that numerically.
"""
import numpy as np

from ruledsurf import (
    CurveFamily,
    InvariantProfile,
    check_corollary2,
    curvature_scalars,
    edlinger_principal_curvatures,
    make_builtin_profile,
    verify_surface,
)

profile = make_builtin_profile("edlinger", k0=-1.0, delta0=1.0)

# Pointwise: the general principal curvatures against the Edlinger closed form.
print("   v        k1          -k/w        k2       delta^2/(k w^3)")
for v in np.linspace(-2, 2, 5):
    geo = curvature_scalars(profile, 1.0, v)
    a, b = edlinger_principal_curvatures(profile, 1.0, v)
    print(f"{v:5.1f}  {geo.k1:10.6f}  {a:10.6f}  {geo.k2:10.6f}  {b:10.6f}")

# Fit k_N = f(u) w^n along every family and look the fits up in the table.
report = verify_surface(profile)
print("\nclass flags:", report.flags.names)
for fam, fit in report.fits.items():
    rows = ", ".join(f"{r.shape} ({r.label})" for r in report.rows_for(fam)) or "no row"
    print(f"  {fam.value:12s} {fit.describe():40s} -> {rows}")

# The principal curvatures of an Edlinger surface satisfy delta^2 k1^3 + k^4 k2 = 0.
grid = [(u, v) for u in np.linspace(0.5, 5.5, 6) for v in np.linspace(-3, 3, 7)]
res = check_corollary2(profile, grid)
print(f"\ndelta^2 k1^3 + k^4 k2: max relative residual {res.max_residual:.2e} (holds: {res.holds})")

# Move off the Edlinger locus and the S2 power law breaks down.
bent = InvariantProfile(-1.0, 1.0, lam=1.05, name="bent")
rep = verify_surface(bent)
print(f"lambda = 1.05: S2 residual at n=-3 is {rep.fits[CurveFamily.S2].residuals[-3]:.3g}; flags {rep.flags.names}")
