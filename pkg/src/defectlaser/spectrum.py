"""Effective non-Hermitian two-level/phonon spectrum and exceptional points.

The active phonon mode (effective damping gamma_m_eff = gamma_m - G0,
negative above threshold) and the lossy defect form a 2x2 non-Hermitian
block in the basis {|n_b, g>, |n_b - 1, e>}.  Both eigenvalues and
eigenvectors coalesce at the exceptional point; at resonance
(omega_q = omega_m) the EP sits at gamma_q = gamma_m_eff + 2 sqrt(n_b) g_d
while the gain minimum sits at gamma_q = sqrt(2 n_b) g_d.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InvalidParameterError


@dataclass(frozen=True)
class EffectiveParams:
    """Parameters of the reduced phonon-defect block at phonon number n_b."""

    n_b: float
    omega_m: float
    omega_q: float
    gamma_m_eff: float  # may be negative (net mechanical gain)
    gamma_q: float
    g_d: float

    def __post_init__(self):
        if self.n_b < 1:
            raise InvalidParameterError(
                "n_b must be >= 1: the basis |n_b,g>, |n_b-1,e> needs a phonon")
        if self.omega_m <= 0 or self.omega_q <= 0:
            raise InvalidParameterError("omega_m and omega_q must be > 0")
        if self.gamma_q < 0 or self.g_d < 0:
            raise InvalidParameterError("gamma_q and g_d must be >= 0")


@dataclass(frozen=True)
class SpectrumResult:
    E_plus: complex
    E_minus: complex
    weights_plus: tuple[float, float]   # (|phonon|^2, |defect|^2), sums to 1
    weights_minus: tuple[float, float]
    gap: float
    gamma_q_EP: float
    gamma_q_min: float
    phase: str                          # below-EP | at-EP | above-EP
    eigvec_overlap: float               # |<v+|v->|, -> 1 at the EP
    eff: EffectiveParams

    CSV_FIELDS = ("E_plus_re", "E_plus_im", "E_minus_re", "E_minus_im",
                  "gap", "L", "phase", "gamma_q_EP", "gamma_q_min")

    @property
    def localization(self) -> float:
        """max over eigenvectors of | |w_phonon|^2 - |w_defect|^2 |."""
        return max(abs(self.weights_plus[0] - self.weights_plus[1]),
                   abs(self.weights_minus[0] - self.weights_minus[1]))

    def csv_row(self) -> list:
        return [self.E_plus.real, self.E_plus.imag,
                self.E_minus.real, self.E_minus.imag,
                self.gap, self.localization, self.phase,
                self.gamma_q_EP, self.gamma_q_min]


@dataclass(frozen=True)
class EpSearchResult:
    gamma_q: float
    disc_abs: float
    found: bool
    message: str = ""


@dataclass(frozen=True)
class PhaseClassification:
    phase: str
    localization: float
    eigvec_overlap: float
    degenerate: bool


def _matrix(eff: EffectiveParams) -> np.ndarray:
    """Explicit 2x2 block of the effective Hamiltonian."""
    zm = eff.omega_m - 1j * eff.gamma_m_eff
    zq = eff.omega_q - 1j * eff.gamma_q
    kappa = eff.g_d * math.sqrt(eff.n_b)
    return np.array([[eff.n_b * zm, kappa],
                     [kappa, (eff.n_b - 1.0) * zm + zq]], dtype=complex)


def discriminant(eff: EffectiveParams, gamma_q: float | None = None) -> complex:
    """4 n_b g_d^2 + [omega_q - omega_m - i(gamma_q - gamma_m_eff)]^2."""
    gq = eff.gamma_q if gamma_q is None else gamma_q
    z = eff.omega_q - eff.omega_m - 1j * (gq - eff.gamma_m_eff)
    return 4.0 * eff.n_b * eff.g_d ** 2 + z * z


def gamma_q_ep_resonant(eff: EffectiveParams) -> float:
    """Closed-form EP loss rate for omega_q = omega_m."""
    return eff.gamma_m_eff + 2.0 * math.sqrt(eff.n_b) * eff.g_d


def turning_point(eff: EffectiveParams) -> float:
    """Defect loss at which the gain is minimal, sqrt(2 n_b) g_d on resonance.

    Off resonance the root of d(Gd)/d(gamma_q) = 0 is found numerically.
    Returns 0 when n_b g_d = 0 on resonance (no interior minimum).
    """
    if eff.omega_q == eff.omega_m:
        return math.sqrt(2.0 * eff.n_b) * eff.g_d if eff.g_d > 0 else 0.0
    dq2 = (eff.omega_q - eff.omega_m) ** 2
    sat = dq2 + 2.0 * eff.g_d ** 2 * eff.n_b

    def dGd(gq):
        # derivative of -g^2 gq / (gq^2 + sat), up to a positive factor
        return sat - gq * gq

    hi = 4.0 * math.sqrt(sat) + eff.omega_m
    return optimize.brentq(dGd, 0.0, hi, xtol=1e-12 * max(1.0, math.sqrt(sat)))


def eigenvalues(eff: EffectiveParams, ep_tol: float | None = None) -> SpectrumResult:
    """Eigenvalues/eigenvectors of the effective block.

    The closed form uses the principal square root (Re >= 0); labels are
    fixed by that branch.  A direct 2x2 diagonalization cross-checks the
    closed form to 1e-12 relative (raises on disagreement).  ``ep_tol`` is
    the rate tolerance for the at-EP phase label (default 1e-9 omega_m).
    """
    if ep_tol is None:
        ep_tol = 1e-9 * eff.omega_m
    zm = eff.omega_m - 1j * eff.gamma_m_eff
    zq = eff.omega_q - 1j * eff.gamma_q
    center = (eff.n_b - 0.5) * zm + 0.5 * zq
    root = cmath.sqrt(discriminant(eff))
    e_plus = center + 0.5 * root
    e_minus = center - 0.5 * root

    mat = _matrix(eff)
    ev = np.linalg.eigvals(mat)
    # match eig output to the branch-labelled closed form
    if (abs(ev[0] - e_plus) + abs(ev[1] - e_minus)
            > abs(ev[1] - e_plus) + abs(ev[0] - e_minus)):
        ev = ev[::-1]
    scale = max(abs(e_plus), abs(e_minus), 1.0)
    mismatch = max(abs(ev[0] - e_plus), abs(ev[1] - e_minus)) / scale
    # eig loses ~sqrt(eps) digits at a defective point; only enforce the
    # cross-check where the eigenproblem is well conditioned
    if abs(root) > 1e-6 * scale and mismatch > 1e-12:
        raise ArithmeticError(
            f"closed form and 2x2 diagonalization disagree: {mismatch:.3e}")

    w_plus, v_plus = _eigvec(mat, e_plus)
    w_minus, v_minus = _eigvec(mat, e_minus)
    overlap = abs(np.vdot(v_plus, v_minus))

    gq_ep = gamma_q_ep_resonant(eff)
    if eff.omega_q == eff.omega_m:
        diff = eff.gamma_q - gq_ep
        phase = "at-EP" if abs(diff) <= ep_tol else (
            "below-EP" if diff < 0 else "above-EP")
    else:
        re_disc = discriminant(eff).real
        phase = "at-EP" if abs(re_disc) <= ep_tol ** 2 else (
            "below-EP" if re_disc > 0 else "above-EP")

    return SpectrumResult(E_plus=e_plus, E_minus=e_minus,
                          weights_plus=w_plus, weights_minus=w_minus,
                          gap=abs(e_plus - e_minus),
                          gamma_q_EP=gq_ep,
                          gamma_q_min=turning_point(eff),
                          phase=phase, eigvec_overlap=overlap, eff=eff)


def _eigvec(mat: np.ndarray, e: complex) -> tuple[tuple[float, float], np.ndarray]:
    """Normalized eigenvector for eigenvalue e; stable at degeneracy."""
    # (mat - e) v = 0 for a 2x2: use the better-conditioned row
    r1 = (mat[0, 1], e - mat[0, 0])
    r2 = (e - mat[1, 1], mat[1, 0])
    v = np.array(r1 if abs(r1[0]) + abs(r1[1]) >= abs(r2[0]) + abs(r2[1])
                 else r2, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        v = np.array([1.0, 0.0], dtype=complex)
        norm = 1.0
    v = v / norm
    return (abs(v[0]) ** 2, abs(v[1]) ** 2), v


def locate_ep(eff: EffectiveParams, bracket: tuple[float, float]) -> EpSearchResult:
    """Defect loss minimizing |discriminant| inside ``bracket``.

    ``eff.gamma_q`` is ignored; the search treats gamma_q as free.  On
    resonance the minimum is the exact EP; off resonance it is the closest
    approach.  A minimum on the bracket edge is reported as not found.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    if eff.omega_q == eff.omega_m:
        gq = gamma_q_ep_resonant(eff)
        if lo <= gq <= hi:
            return EpSearchResult(
                gamma_q=gq, disc_abs=abs(discriminant(eff, gamma_q=gq)),
                found=True)
        return EpSearchResult(gamma_q=gq, disc_abs=math.nan, found=False,
                              message="resonant EP lies outside the bracket")

    def f(gq):
        return abs(discriminant(eff, gamma_q=gq))

    res = optimize.minimize_scalar(
        f, bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-9 * eff.omega_m})
    gq = float(res.x)
    edge = 2.0 * (hi - lo) * 1e-6
    if gq - lo < edge or hi - gq < edge:
        # check the interior point is actually better than the edges
        if f(lo) <= res.fun or f(hi) <= res.fun:
            return EpSearchResult(gamma_q=gq, disc_abs=float(res.fun),
                                  found=False,
                                  message="no interior minimum of the "
                                          "discriminant in the bracket")
    return EpSearchResult(gamma_q=gq, disc_abs=float(res.fun), found=True)


def classify_phase(result: SpectrumResult, tol: float = 1e-6) -> PhaseClassification:
    """Phase label plus eigenvector localization metric.

    Below the EP the two supermodes share phonon and defect weight equally
    (localization ~ 0); above it one localizes on the phonon, the other on
    the defect.  ``tol`` separates the two regimes; degeneracy is flagged
    through the eigenvector overlap.
    """
    loc = result.localization
    degenerate = result.eigvec_overlap > 1.0 - 1e-6
    if result.phase == "at-EP" or degenerate:
        label = "at-EP"
    else:
        label = "below-EP" if loc <= tol else "above-EP"
        # trust the eigenvalue-based label when they disagree
        if label != result.phase:
            label = result.phase
    return PhaseClassification(phase=label, localization=loc,
                               eigvec_overlap=result.eigvec_overlap,
                               degenerate=degenerate)
