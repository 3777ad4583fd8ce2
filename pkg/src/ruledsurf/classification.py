"""Power-law shape detection k_N = f(u) w^n and the classification table.

The table below lists, per curve family, which surface classes carry a
normal curvature of the form f(u) w^n (``n=None`` marks the f == 0 rows):

    family     f                 n    class
    principal  -k                -1   Edlinger
               +-delta           -2   helicoid
               delta^2/k         -3   Edlinger
    S1         0                 -    helicoid
               -k                -1   const-drall orthoid or Edlinger
    S2         0                 -    orthoid
               delta^2/k         -3   Edlinger
    S3         0                 -    helicoid
               -k                -1   const-drall orthoid
               -delta^2 lambda   -3   const-drall conoid
    S4         0                 -    helicoid
               -k                -1   const-drall orthoid or Edlinger
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .families import CurveFamily, family_normal_curvature
from .geometry import curvature_scalars
from .profiles import InvariantProfile

N_RANGE = range(-6, 4)
MEDIAN_FLOOR = 1e-14


class SurfaceClass(enum.Flag):
    WENDELFLAECHE = enum.auto()
    EDLINGER = enum.auto()
    ORTHOID = enum.auto()
    CONST_DRALL = enum.auto()
    KONOID = enum.auto()
    GENERIC_SKEW = enum.auto()

    @property
    def names(self):
        return [m.name for m in SurfaceClass if m in self]


NAMED = (SurfaceClass.WENDELFLAECHE | SurfaceClass.EDLINGER | SurfaceClass.ORTHOID
         | SurfaceClass.CONST_DRALL | SurfaceClass.KONOID)


# --- power-law fitting ----------------------------------------------------------

@dataclass(frozen=True)
class PowerLawFit:
    """Best integer exponent n with per-u factors f(u) = median_v(k_N w^-n).

    ``zero`` marks an identically vanishing grid (f == 0, n meaningless).
    """

    n: int | None
    u: np.ndarray
    f: np.ndarray
    residual: float
    accepted: bool
    zero: bool = False
    residuals: dict = field(default_factory=dict)

    def describe(self):
        if self.zero:
            return "f = 0"
        return f"n = {self.n}, residual = {self.residual:.3g}" + ("" if self.accepted else " (rejected)")


def _residual(kN, w, n):
    c = kN * w ** (-float(n))
    med = np.median(c, axis=1)
    res = np.max(np.abs(c - med[:, None]) / np.maximum(np.abs(med), MEDIAN_FLOOR)[:, None])
    return float(res), med


def fit_power_law(kN_grid, w_grid, tol=1e-8, u=None, n_range=N_RANGE, zero_atol=MEDIAN_FLOOR) -> PowerLawFit:
    """Fit k_N[i, j] = f(u_i) w[i, j]^n over integer n in ``n_range``.

    Rows are u-samples, columns v-samples.  The residual for a candidate n
    is the largest deviation of k_N w^-n from its row median, relative to
    that median.
    """
    kN = np.asarray(kN_grid, dtype=float)
    w = np.asarray(w_grid, dtype=float)
    if kN.ndim != 2 or kN.shape != w.shape:
        raise ValueError("k_N and w grids must be matching 2-D arrays")
    if kN.shape[0] < 5 or kN.shape[1] < 5:
        raise ValueError("power-law fit needs at least a 5x5 grid")
    if not (np.all(np.isfinite(kN)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite values in fit input")
    if np.any(w <= 0):
        raise ValueError("w must be positive")
    u = np.arange(kN.shape[0], dtype=float) if u is None else np.asarray(u, dtype=float)
    if np.max(np.abs(kN)) <= zero_atol:
        return PowerLawFit(None, u, np.zeros(kN.shape[0]), 0.0, True, zero=True)
    residuals, factors = {}, {}
    for n in n_range:
        residuals[n], factors[n] = _residual(kN, w, n)
    best = min(residuals, key=residuals.get)
    res = residuals[best]
    return PowerLawFit(best, u, factors[best], res, res <= tol, residuals=residuals)


# --- invariant predicates -----------------------------------------------------------

@dataclass(frozen=True)
class InvariantMeasures:
    max_ddelta: float
    max_delta: float
    max_lambda: float
    max_k: float
    max_edlinger: float  # max |k lambda + 1|


def invariant_measures(profile, u_samples):
    u = np.asarray(u_samples, dtype=float)
    k, d, dd, lam = (np.broadcast_to(np.asarray(x, dtype=float), u.shape) for x in profile.values(u))
    return InvariantMeasures(float(np.max(np.abs(dd))), float(np.max(np.abs(d))), float(np.max(np.abs(lam))),
                             float(np.max(np.abs(k))), float(np.max(np.abs(k * lam + 1.0))))


def classify_by_invariants(profile: InvariantProfile, u_samples=None, tol=1e-8) -> SurfaceClass:
    """Class flags from delta' = 0, lambda = 0, k = 0 and k lambda + 1 = 0 on samples."""
    if u_samples is None:
        u_samples = interior_samples(profile, 41)
    if len(u_samples) < 20:
        raise ValueError("need at least 20 u-samples")
    m = invariant_measures(profile, u_samples)
    flags = SurfaceClass(0)
    if m.max_ddelta <= tol * m.max_delta:
        flags |= SurfaceClass.CONST_DRALL
    if m.max_lambda <= tol:
        flags |= SurfaceClass.ORTHOID
    if m.max_k <= tol:
        flags |= SurfaceClass.KONOID
    if SurfaceClass.CONST_DRALL in flags and m.max_edlinger <= tol:
        flags |= SurfaceClass.EDLINGER
    if SurfaceClass.ORTHOID | SurfaceClass.KONOID | SurfaceClass.CONST_DRALL in flags:
        flags |= SurfaceClass.WENDELFLAECHE
    if not flags:
        flags = SurfaceClass.GENERIC_SKEW
    return flags


# --- the theorem table -----------------------------------------------------------

CDO = SurfaceClass.CONST_DRALL | SurfaceClass.ORTHOID
CDK = SurfaceClass.CONST_DRALL | SurfaceClass.KONOID


def _minus_k(p, u):
    return -np.asarray(p.k(u), dtype=float)


def _plus_minus_delta(p, u):
    return np.asarray(p.delta(u), dtype=float)


def _delta2_over_k(p, u):
    k = np.asarray(p.k(u), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(p.delta(u), dtype=float) ** 2 / k


def _minus_delta2_lambda(p, u):
    return -np.asarray(p.delta(u), dtype=float) ** 2 * np.asarray(p.lam(u), dtype=float)


@dataclass(frozen=True)
class TableRow:
    family: str  # PRINCIPAL, S1..S4
    n: int | None  # None for the f == 0 rows
    shape: str
    shape_fn: Callable | None
    classes: tuple  # alternatives, each a SurfaceClass combination
    label: str
    signed: bool = True  # False: f matches up to sign (the +-delta row)

    @property
    def key(self):
        return (self.family, self.n, self.shape)

    def admits(self, flags):
        return any((req & flags) == req for req in self.classes)


THEOREM_TABLE = (
    TableRow("PRINCIPAL", -1, "-k", _minus_k, (SurfaceClass.EDLINGER,), "Edlinger surface"),
    TableRow("PRINCIPAL", -2, "+-delta", _plus_minus_delta, (SurfaceClass.WENDELFLAECHE,), "helicoid", signed=False),
    TableRow("PRINCIPAL", -3, "delta^2/k", _delta2_over_k, (SurfaceClass.EDLINGER,), "Edlinger surface"),
    TableRow("S1", None, "0", None, (SurfaceClass.WENDELFLAECHE,), "helicoid"),
    TableRow("S1", -1, "-k", _minus_k, (CDO, SurfaceClass.EDLINGER), "const-drall orthoid or Edlinger surface"),
    TableRow("S2", None, "0", None, (SurfaceClass.ORTHOID,), "orthoid"),
    TableRow("S2", -3, "delta^2/k", _delta2_over_k, (SurfaceClass.EDLINGER,), "Edlinger surface"),
    TableRow("S3", None, "0", None, (SurfaceClass.WENDELFLAECHE,), "helicoid"),
    TableRow("S3", -1, "-k", _minus_k, (CDO,), "const-drall orthoid"),
    TableRow("S3", -3, "-delta^2 lambda", _minus_delta2_lambda, (CDK,), "const-drall conoid"),
    TableRow("S4", None, "0", None, (SurfaceClass.WENDELFLAECHE,), "helicoid"),
    TableRow("S4", -1, "-k", _minus_k, (CDO, SurfaceClass.EDLINGER), "const-drall orthoid or Edlinger surface"),
)


def _table_family(family):
    if isinstance(family, str) and family.upper() == "PRINCIPAL":
        return "PRINCIPAL"
    family = CurveFamily(family)
    if family in (CurveFamily.PRINCIPAL_1, CurveFamily.PRINCIPAL_2):
        return "PRINCIPAL"
    return family.value


@dataclass(frozen=True)
class RowMatch:
    row: TableRow
    shape_match: bool
    shape_residual: float


def shape_residual(row: TableRow, fit: PowerLawFit, profile) -> float:
    if row.shape_fn is None:
        return 0.0 if fit.zero else math.inf
    expected = row.shape_fn(profile, fit.u)
    if not np.all(np.isfinite(expected)):
        return math.inf
    f = fit.f
    if not row.signed:
        f, expected = np.abs(f), np.abs(expected)
    scale = max(float(np.max(np.abs(expected))), MEDIAN_FLOOR)
    return float(np.max(np.abs(f - expected)) / scale)


def theorem_table_lookup(family, fit: PowerLawFit, profile: InvariantProfile, shape_tol=1e-8):
    """Rows matching (family, n) of an accepted fit, with the f-shape verified.

    Returns an empty list when the fit lies outside the table.
    """
    fam = _table_family(family)
    if not (fit.accepted or fit.zero):
        return []
    out = []
    for row in THEOREM_TABLE:
        if row.family != fam:
            continue
        if fit.zero != (row.n is None) or (not fit.zero and row.n != fit.n):
            continue
        r = shape_residual(row, fit, profile)
        out.append(RowMatch(row, r <= shape_tol, r))
    return out


def expected_rows(flags: SurfaceClass, profile, u_samples, atol=1e-12):
    """Table rows that the invariant classes predict, skipping rows whose f vanishes."""
    rows = []
    for row in THEOREM_TABLE:
        if not row.admits(flags):
            continue
        if row.shape_fn is not None:
            f = row.shape_fn(profile, np.asarray(u_samples))
            if not np.all(np.isfinite(f)) or np.max(np.abs(f)) <= atol:
                continue
        rows.append(row)
    return rows


# --- the corollary: delta^2 k1^3 + k^4 k2 = 0 -------------------------------------

class CorollaryPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class CorollaryResult:
    holds: bool
    max_residual: float
    witness: tuple  # (u, v) of the largest relative residual
    assignment: str  # which principal branch played k1
    residuals: dict


def _corollary_residual(d, k, k1, k2):
    a, b = d * d * k1 ** 3, k ** 4 * k2
    return abs(a + b) / max(abs(a), abs(b), MEDIAN_FLOOR)


def check_corollary2(profile: InvariantProfile, grid, tol=1e-10, edlinger_tol=1e-9) -> CorollaryResult:
    """Test delta^2 k1^3 + k^4 k2 = 0 on (u, v) samples.

    On Edlinger points k1 is the -k/w branch.  Elsewhere both assignments
    of the two principal curvatures are tried and the better one reported.
    """
    pts = [(float(u), float(v)) for u, v in grid]
    per_assignment = {"k1=-k/w branch": [], "k1=larger": [], "k1=smaller": []}
    edlinger_everywhere = True
    for u, v in pts:
        k, d, dd, lam = (float(x) for x in profile.values(u))
        if k == 0.0:
            raise CorollaryPreconditionError(f"k vanishes at u={u}")
        geo = curvature_scalars(profile, u, v)
        if abs(dd) <= edlinger_tol and abs(k * lam + 1.0) <= edlinger_tol:
            # -k/w has the sign of -k; the two principal curvatures have opposite signs
            big_is_branch = -k > 0
            kb, ko = (geo.k1, geo.k2) if big_is_branch else (geo.k2, geo.k1)
            per_assignment["k1=-k/w branch"].append(_corollary_residual(d, k, kb, ko))
        else:
            edlinger_everywhere = False
        per_assignment["k1=larger"].append(_corollary_residual(d, k, geo.k1, geo.k2))
        per_assignment["k1=smaller"].append(_corollary_residual(d, k, geo.k2, geo.k1))
    if edlinger_everywhere:
        chosen = "k1=-k/w branch"
    else:
        chosen = min(("k1=larger", "k1=smaller"), key=lambda key: max(per_assignment[key]))
    res = np.array(per_assignment[chosen])
    i = int(np.argmax(res))
    maxima = {key: float(max(vals)) for key, vals in per_assignment.items() if vals}
    return CorollaryResult(bool(res[i] <= tol), float(res[i]), pts[i], chosen, maxima)


# --- orchestration ---------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    nu: int = 9
    nv: int = 11
    v_range: tuple = (-10.0, 10.0)
    margin: float = 0.01  # fraction of the domain left out at each end


def interior_samples(profile, num, margin=0.01):
    a, b = profile.domain
    pad = margin * (b - a)
    return np.linspace(a + pad, b - pad, num)


FIT_FAMILIES = (CurveFamily.PRINCIPAL_1, CurveFamily.PRINCIPAL_2, CurveFamily.S1, CurveFamily.S2,
                CurveFamily.S3, CurveFamily.S4)


def normal_curvature_grid(family, profile, u, v):
    family = CurveFamily(family)
    kN = np.empty((len(u), len(v)))
    w = np.empty_like(kN)
    for i, uu in enumerate(u):
        for j, vv in enumerate(v):
            if family in (CurveFamily.PRINCIPAL_1, CurveFamily.PRINCIPAL_2):
                geo = curvature_scalars(profile, uu, vv)
                kN[i, j] = geo.k1 if family is CurveFamily.PRINCIPAL_1 else geo.k2
                w[i, j] = geo.w
            else:
                kN[i, j] = family_normal_curvature(family, profile, uu, vv)
                w[i, j] = math.hypot(vv, float(profile.delta(uu)))
    return kN, w


@dataclass
class ClassificationReport:
    profile_name: str
    tol: float
    flags: SurfaceClass
    measures: InvariantMeasures
    fits: dict  # CurveFamily -> PowerLawFit
    matches: dict  # CurveFamily -> list[RowMatch]
    observed_rows: list
    expected_rows: list
    corollary: CorollaryResult | None
    corollary_note: str = ""
    disagreements: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def consistent(self):
        return not self.disagreements

    def rows_for(self, family):
        return [m.row for m in self.matches.get(CurveFamily(family), []) if m.shape_match]


def verify_surface(profile: InvariantProfile, grid: GridSpec | None = None, tol=1e-8,
                   shape_tol=None, corollary_tol=1e-10) -> ClassificationReport:
    """Fit every family, look the fits up in the table and cross-check against the invariants."""
    grid = grid or GridSpec()
    shape_tol = tol if shape_tol is None else shape_tol
    u = interior_samples(profile, max(grid.nu, 5), grid.margin)
    v = np.linspace(grid.v_range[0], grid.v_range[1], max(grid.nv, 5))
    flags = classify_by_invariants(profile, interior_samples(profile, max(41, grid.nu), grid.margin), tol)
    measures = invariant_measures(profile, u)

    # zero threshold relative to the surface's curvature scale 1/|delta|
    curv_scale = 1.0 / float(np.min(np.abs(np.asarray(profile.delta(u), dtype=float))))
    zero_atol = max(MEDIAN_FLOOR, tol * curv_scale)

    fits, matches, observed = {}, {}, []
    notes = []
    for fam in FIT_FAMILIES:
        kN, w = normal_curvature_grid(fam, profile, u, v)
        fit = fit_power_law(kN, w, tol, u=u, zero_atol=zero_atol)
        fits[fam] = fit
        found = theorem_table_lookup(fam, fit, profile, shape_tol)
        matches[fam] = found
        good = [m.row for m in found if m.shape_match]
        for row in good:
            if row not in observed:
                observed.append(row)
        if (fit.accepted or fit.zero) and not good:
            notes.append(f"{fam.value}: {fit.describe()} is outside the table")

    expected = expected_rows(flags, profile, u, atol=zero_atol)
    disagreements = []
    for row in observed:
        if not row.admits(flags):
            disagreements.append(f"row {row.family} {row.shape} predicts {row.label}, invariants give {flags.names}")
    for row in expected:
        if row not in observed:
            disagreements.append(f"invariants {flags.names} predict row {row.family} n={row.n} f={row.shape}, not found")
    if not observed:
        notes.append("no fit matches a table row: outside table")

    corollary, cnote = None, ""
    k_vals = np.asarray(profile.k(u), dtype=float)
    if np.all(k_vals != 0.0):
        pts = [(uu, vv) for uu in u for vv in v]
        corollary = check_corollary2(profile, pts, corollary_tol)
        if SurfaceClass.EDLINGER in flags and not corollary.holds:
            disagreements.append("Edlinger surface violates delta^2 k1^3 + k^4 k2 = 0")
        if corollary.holds and SurfaceClass.EDLINGER not in flags:
            disagreements.append("delta^2 k1^3 + k^4 k2 = 0 holds but the surface is not Edlinger")
    else:
        cnote = "k vanishes on the grid; corollary not applicable"

    return ClassificationReport(profile.name, tol, flags, measures, fits, matches, observed, expected,
                                corollary, cnote, disagreements, notes)
