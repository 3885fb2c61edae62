"""Kummer map, projective collinearity, and secancy-constant fits.

The Kummer map sends Z to the 2^g-vector of level-two theta values; its
image lives in projective space, so all comparisons here are scale-free.

Both secancy fits are linear least-squares problems in two unknowns:

  discrete      Th[eps]((A-U-V)/2) + e^p Th[eps]((A+U-V)/2)
                    = e^E Th[eps]((A+V-U)/2)           for all eps,
  semidiscrete  d_V Th[eps]((A-U)/2) - e^p Th[eps]((A+U)/2)
                    + E Th[eps]((A-U)/2) = 0           for all eps.

A is only determined up to theta-characteristic conventions, so the fit
is repeated over all 4^g half-period shifts of A and the best residual
wins (deterministic tie-break: lowest shift index).  Note the literal
covariance of the semidiscrete fit: replacing V by lam*V rescales the
fitted (e^p, E) to (lam e^p, lam E) and leaves the residual unchanged.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, DimensionMismatch, RankDeficient, ZeroVector
from .theta import (
    DEFAULT_TOL,
    PeriodMatrix,
    half_period,
    lattice_distance,
    level_two_vector,
)

RANK_TOL = 1e-12


@dataclass(frozen=True)
class ProjectivePoint:
    """Point of CP^(2^g - 1): homogeneous coordinates on a shared logscale."""

    coords: np.ndarray
    logscale: float
    g: int

    def unit(self) -> np.ndarray:
        n = np.linalg.norm(self.coords)
        if n == 0:
            raise ZeroVector("projective point has no nonzero coordinate")
        return self.coords / n


def projective_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """Gap between projective points: 0 iff equal up to one complex scale.

    Computed as the norm of the phase-aligned difference of unit vectors,
    which stays accurate down to machine precision (the 1 - |<a,b>|^2 form
    loses half the digits to cancellation near equality).
    """
    if p.g != q.g:
        raise DimensionMismatch("projective points of different genus")
    a, b = p.unit(), q.unit()
    c = np.vdot(b, a)
    if abs(c) == 0.0:
        return float(np.sqrt(2.0))
    return float(np.linalg.norm(a - (c / abs(c)) * b))


@dataclass(frozen=True)
class SecancyData:
    """Fitted secancy constants with their least-squares residual."""

    U: np.ndarray
    V: np.ndarray
    A: np.ndarray
    p: complex
    E: complex
    exp_p: complex
    exp_E: complex | None
    residual: float
    calibration_shift: int
    kind: str


def kummer_map(Z, B: PeriodMatrix, tol: float = DEFAULT_TOL) -> ProjectivePoint:
    """Level-two theta vector of Z as a projective point."""
    vec = level_two_vector(Z, B, tol=tol)
    if np.all(np.abs(vec.coords) < 1e-250):
        raise ZeroVector("all Kummer coordinates vanished at common scale")
    return ProjectivePoint(vec.coords, vec.logscale, B.g)


def collinearity_defect(p1: ProjectivePoint, p2: ProjectivePoint,
                        p3: ProjectivePoint) -> float:
    """sigma_3 / sigma_1 of the stacked unit coordinate rows; 0 iff collinear."""
    if not (p1.g == p2.g == p3.g):
        raise DimensionMismatch("points live in different projective spaces")
    M = np.stack([p1.unit(), p2.unit(), p3.unit()])
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[2] / sv[0])


def _common_scale(vectors):
    ref = max(v.logscale for v in vectors)
    return [v.coords * np.exp(v.logscale - ref) for v in vectors]


def _solve(M: np.ndarray, r: np.ndarray):
    scale = max(float(np.max(np.abs(M))), float(np.max(np.abs(r))), 1e-300)
    Ms, rs = M / scale, r / scale
    sv = np.linalg.svd(Ms, compute_uv=False)
    if sv[-1] / sv[0] < RANK_TOL:
        return None
    w, *_ = np.linalg.lstsq(Ms, rs, rcond=None)
    rel = np.linalg.norm(Ms @ w - rs) / (np.linalg.norm(rs)
                                         + np.linalg.norm(Ms @ w) + 1e-300)
    return w, float(rel)


def _check_distinct(B, pairs):
    for name, vec in pairs:
        if lattice_distance(vec, B) < 1e-8:
            raise CoincidentPoints(f"{name} vanishes modulo the lattice")


def fit_secancy_discrete(U, V, A, B: PeriodMatrix,
                         tol: float = DEFAULT_TOL) -> SecancyData:
    """Best-fitting (e^p, e^E) for the three-term level-two system."""
    U = np.atleast_1d(np.asarray(U, complex))
    V = np.atleast_1d(np.asarray(V, complex))
    A = np.atleast_1d(np.asarray(A, complex))
    _check_distinct(B, [("U-V", U - V), ("U-A", U - A), ("V-A", V - A)])
    best = None
    for k in range(4 ** B.g):
        As = A + half_period(B, k)
        v1 = level_two_vector((As - U - V) / 2.0, B, tol=tol)
        v2 = level_two_vector((As + U - V) / 2.0, B, tol=tol)
        v3 = level_two_vector((As + V - U) / 2.0, B, tol=tol)
        c1, c2, c3 = _common_scale([v1, v2, v3])
        M = np.stack([c2, -c3], axis=1)
        sol = _solve(M, -c1)
        if sol is None:
            continue
        (ep, eE), rel = sol
        if best is None or rel < best[0]:
            best = (rel, k, ep, eE)
    if best is None:
        raise RankDeficient("design matrix rank deficient for every shift")
    rel, k, ep, eE = best
    return SecancyData(U, V, A, cmath.log(ep), cmath.log(eE), ep, eE,
                       rel, k, "discrete")


def fit_secancy_semidiscrete(U, V, A, B: PeriodMatrix,
                             tol: float = DEFAULT_TOL) -> SecancyData:
    """Best-fitting (e^p, E) for the tangency system with analytic d_V."""
    U = np.atleast_1d(np.asarray(U, complex))
    V = np.atleast_1d(np.asarray(V, complex))
    A = np.atleast_1d(np.asarray(A, complex))
    _check_distinct(B, [("U-A", U - A)])
    if np.linalg.norm(V) == 0:
        raise CoincidentPoints("V must be nonzero")
    best = None
    for k in range(4 ** B.g):
        As = A + half_period(B, k)
        vm = level_two_vector((As - U) / 2.0, B, tol=tol)
        vp = level_two_vector((As + U) / 2.0, B, tol=tol)
        dv = level_two_vector((As - U) / 2.0, B, deriv_dir=V, tol=tol)
        cm_, cp, cd = _common_scale([vm, vp, dv])
        M = np.stack([cp, -cm_], axis=1)
        sol = _solve(M, cd)
        if sol is None:
            continue
        (ep, E), rel = sol
        if best is None or rel < best[0]:
            best = (rel, k, ep, E)
    if best is None:
        raise RankDeficient("design matrix rank deficient for every shift")
    rel, k, ep, E = best
    return SecancyData(U, V, A, cmath.log(ep), E, ep, None, rel, k, "semidiscrete")
