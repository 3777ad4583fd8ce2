"""Skew ruled surfaces from their invariants (conical curvature, drall, striction).

Integrate the companion frame, evaluate curvature data in closed form and by
finite differences, and classify surfaces by the power-law shape of the
normal curvature along distinguished curve families.
"""
from .classification import (
    PowerLawFit,
    SurfaceClass,
    check_corollary2,
    classify_by_invariants,
    fit_power_law,
    theorem_table_lookup,
    verify_surface,
)
from .expressions import evaluate, parse_expression
from .families import CurveFamily, direction_field, family_normal_curvature, integrate_family_curve
from .frames import RawRuledMap, StrictionCurve, extract_standard_form, integrate_striction_frame
from .geometry import (
    DirectionUV,
    RuledSurface,
    curvature_scalars,
    edlinger_principal_curvatures,
    fd_geometry_oracle,
    fundamental_tensors,
    normal_curvature,
    sample_mesh,
)
from .profiles import InvariantProfile, make_builtin_profile
from .specs import SurfaceSpec, load_spec

__all__ = [
    "CurveFamily", "DirectionUV", "InvariantProfile", "PowerLawFit", "RawRuledMap", "RuledSurface",
    "StrictionCurve", "SurfaceClass", "SurfaceSpec", "check_corollary2", "classify_by_invariants",
    "curvature_scalars", "direction_field", "edlinger_principal_curvatures", "evaluate",
    "extract_standard_form", "family_normal_curvature", "fd_geometry_oracle", "fit_power_law",
    "fundamental_tensors", "integrate_family_curve", "integrate_striction_frame", "load_spec",
    "make_builtin_profile", "normal_curvature", "parse_expression", "sample_mesh",
    "theorem_table_lookup", "verify_surface",
]
__version__ = "0.1.0"
