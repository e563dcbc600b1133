"""Adiabatic-elimination steady state, mechanical gain and threshold.

The optical supermodes and the defect coherence are eliminated assuming
they follow the slowly varying mechanical amplitude, which yields closed
forms for the steady amplitudes, the mechanical gain G = G0 + Gd, the
frequency pull, the threshold power and the stimulated phonon number
N_b = exp[2 (G - gamma_m) / gamma_m].

The phonon number n_b that saturates the defect response and shifts the
optical resonance is an input everywhere; ``solve_nb_fixed_point`` closes
the loop n_b = N_b(G(n_b)) self-consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import HBAR
from .errors import SingularParameterError
from .params import SystemParams, derive_quantities

_EXP_MAX = 700.0  # exp overflow guard; beyond this N_b is reported as inf


@dataclass(frozen=True)
class SteadyOptics:
    """Eliminated optical/defect amplitudes at given (b, n_b)."""

    a_plus: complex
    a_minus: complex
    p: complex
    sigma_minus: complex
    alpha: float
    delta_n: float


@dataclass(frozen=True)
class GainResult:
    """Gain, frequency pull, drive term, threshold and phonon numbers
    for one parameter point, linearized about b = 0 at phonon number n_b.
    """

    G: float
    G0: float
    Gd: float
    omega_prime: float
    C: complex
    alpha: float
    delta_n: float
    n_b: float
    N_b: float
    P_th: float
    P_th0: float
    P_thd: float
    a_plus: complex
    a_minus: complex
    p: complex
    sigma_minus: complex

    CSV_FIELDS = ("G", "G0", "Gd", "omega_prime", "C_re", "C_im", "alpha",
                  "delta_n", "n_b", "N_b", "P_th", "P_th0", "P_thd",
                  "a_plus_re", "a_plus_im", "a_minus_re", "a_minus_im",
                  "p_re", "p_im", "sigma_minus_re", "sigma_minus_im")

    def csv_row(self) -> list[float]:
        return [self.G, self.G0, self.Gd, self.omega_prime,
                self.C.real, self.C.imag, self.alpha, self.delta_n,
                self.n_b, self.N_b, self.P_th, self.P_th0, self.P_thd,
                self.a_plus.real, self.a_plus.imag,
                self.a_minus.real, self.a_minus.imag,
                self.p.real, self.p.imag,
                self.sigma_minus.real, self.sigma_minus.imag]


@dataclass(frozen=True)
class FixedPointReport:
    """Outcome of the self-consistent phonon-number iteration."""

    n_b_star: float
    iterations: int
    residual: float
    converged: bool
    history: tuple[float, ...]
    method: str = "damped"


def steady_optics(params: SystemParams, b: complex, n_b: float) -> SteadyOptics:
    """Closed-form steady supermode amplitudes at mechanical amplitude b.

    ``n_b`` is the phonon number entering the saturation terms; callers
    decide whether it equals |b|^2 (dynamics closure) or labels a sector
    (linear-response gain).
    """
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    d = derive_quantities(params)
    opt, mech, tls = params.optical, params.mechanical, params.tls
    gam = opt.cavity_loss
    J = opt.coupling
    delta = opt.pump_detuning
    wm = mech.mech_freq
    kx = d.xi * d.x0
    b = complex(b)

    alpha = J * J + gam * gam - delta * delta + 0.25 * kx * kx * n_b
    denom_sq = alpha * alpha + 4.0 * delta * delta * gam * gam
    if denom_sq == 0.0:
        raise SingularParameterError(
            "alpha^2 + 4 Delta^2 gamma^2 vanished; supermode elimination "
            "is singular (requires gamma = 0 and alpha = 0)")

    denom = 2.0 * math.sqrt(2.0) * (alpha - 2j * gam * delta)
    a_plus = d.eps_l * (2j * d.omega_minus + 2.0 * gam + 1j * kx * b) / denom
    a_minus = d.eps_l * (2j * d.omega_plus + 2.0 * gam + 1j * kx * b.conjugate()) / denom
    delta_n = abs(a_plus) ** 2 - abs(a_minus) ** 2

    drive = (d.eps_l * a_plus + d.eps_l * a_minus.conjugate()) / math.sqrt(2.0)
    p = (drive - 0.5j * kx * delta_n * b) / (1j * (2.0 * J - wm) + 2.0 * gam)

    dq = tls.tls_freq - wm
    tls_den = tls.tls_loss ** 2 + dq * dq + 2.0 * tls.coupling ** 2 * n_b
    if tls.coupling == 0.0:
        sigma_minus = 0.0 + 0.0j
    else:
        if tls_den == 0.0:
            raise SingularParameterError(
                "undamped resonant defect at n_b = 0: two-level elimination "
                "is singular")
        sigma_minus = -(tls.coupling * dq + 1j * tls.coupling * tls.tls_loss) \
            / tls_den * b

    return SteadyOptics(a_plus=a_plus, a_minus=a_minus, p=p,
                        sigma_minus=sigma_minus, alpha=alpha, delta_n=delta_n)


def _gd_term(tls, wm: float, n_b: float) -> tuple[float, float]:
    """Defect gain Gd and its frequency-pull companion."""
    if tls.coupling == 0.0:
        return 0.0, 0.0
    dq = tls.tls_freq - wm
    den = tls.tls_loss ** 2 + dq * dq + 2.0 * tls.coupling ** 2 * n_b
    if den == 0.0:
        raise SingularParameterError(
            "undamped resonant defect at n_b = 0: two-level elimination "
            "is singular")
    g2 = tls.coupling ** 2
    return -g2 * tls.tls_loss / den, g2 * dq / den


def gain(params: SystemParams, n_b: float) -> GainResult:
    """Mechanical gain G = G0 + Gd and companions at phonon number n_b.

    The population inversion is evaluated from the steady optics at b = 0
    (linear response).  The pull omega_prime keeps the eps_l^2 term
    consistent with the linearized mechanical equation; the drive-induced
    piece carries gamma^2 over the supermode response bandwidth.
    """
    d = derive_quantities(params)
    opt, mech, tls = params.optical, params.mechanical, params.tls
    gam = opt.cavity_loss
    J = opt.coupling
    delta = opt.pump_detuning
    wm = mech.mech_freq
    kx = d.xi * d.x0
    eps2 = d.eps_l ** 2

    so = steady_optics(params, 0.0, n_b)
    alpha = so.alpha
    delta_n = so.delta_n
    dj = 2.0 * J - wm
    nj = dj * dj + 4.0 * gam * gam
    denom_sq = alpha * alpha + 4.0 * delta * delta * gam * gam

    G0 = kx * kx * gam / (2.0 * nj) * (delta_n - delta * dj * eps2 / denom_sq)
    Gd, pull_d = _gd_term(tls, wm, n_b)
    G = G0 + Gd

    omega_prime = (pull_d
                   - kx * kx * dj * delta_n / (4.0 * nj)
                   - kx * kx * gam * gam * delta * eps2 / (nj * denom_sq))

    C = (1j * eps2 * kx / (2j * dj + 4.0 * gam)
         * ((gam - 1j * J) * alpha + 2.0 * delta * delta * gam) / denom_sq)

    exponent = 2.0 * (G - mech.mech_loss) / mech.mech_loss
    N_b = math.inf if exponent > _EXP_MAX else math.exp(exponent)

    P_th0, P_thd = _threshold_terms(params, d, alpha, denom_sq, nj, n_b)

    return GainResult(G=G, G0=G0, Gd=Gd, omega_prime=omega_prime, C=C,
                      alpha=alpha, delta_n=delta_n, n_b=n_b, N_b=N_b,
                      P_th=P_th0 + P_thd, P_th0=P_th0, P_thd=P_thd,
                      a_plus=so.a_plus, a_minus=so.a_minus, p=so.p,
                      sigma_minus=so.sigma_minus)


def _threshold_terms(params, d, alpha, denom_sq, nj, n_b):
    opt, mech, tls = params.optical, params.mechanical, params.tls
    gam = opt.cavity_loss
    J = opt.coupling
    delta = opt.pump_detuning
    wm = mech.mech_freq
    kx2 = (d.xi * d.x0) ** 2
    dj = 2.0 * J - wm
    wcj = opt.cavity_freq + J

    p_th0 = (2.0 * HBAR * nj * wcj * mech.mech_loss / kx2
             + HBAR * delta * dj * wcj * gam * d.eps_l ** 2 / denom_sq)
    if tls.coupling == 0.0:
        p_thd = 0.0
    else:
        dq = wm - tls.tls_freq
        tls_den = tls.tls_loss ** 2 + dq * dq + 2.0 * tls.coupling ** 2 * n_b
        if tls_den == 0.0:
            raise SingularParameterError(
                "undamped resonant defect at n_b = 0: two-level elimination "
                "is singular")
        p_thd = (2.0 * HBAR * tls.coupling ** 2 * tls.tls_loss * wcj * nj
                 / (kx2 * tls_den))
    return p_th0, p_thd


def threshold_power(params: SystemParams, n_b: float) -> tuple[float, float, float]:
    """Pump power at which G = gamma_m: total, defect-free and defect parts."""
    d = derive_quantities(params)
    so = steady_optics(params, 0.0, n_b)
    opt = params.optical
    dj = 2.0 * opt.coupling - params.mechanical.mech_freq
    nj = dj * dj + 4.0 * opt.cavity_loss ** 2
    denom_sq = so.alpha ** 2 + 4.0 * opt.pump_detuning ** 2 * opt.cavity_loss ** 2
    p_th0, p_thd = _threshold_terms(params, d, so.alpha, denom_sq, nj, n_b)
    return p_th0 + p_thd, p_th0, p_thd


def solve_nb_fixed_point(params: SystemParams, n_b0: float = 0.0,
                         tol: float = 1e-10, max_iter: int = 200,
                         relaxation: float = 0.5,
                         accelerate: bool = True) -> FixedPointReport:
    """Self-consistent phonon number from n_b = N_b(G(n_b)).

    Damped iteration n <- (1-eta) n + eta N_b(G(n)), with a safeguarded
    Aitken delta-squared extrapolation every third step (skipped whenever
    it would leave [0, inf)).  Convergence is declared on the residual
    |N_b(G(n)) - n| <= tol * max(1, n).

    Far above threshold the map is exponentially steep and the damped
    iteration oscillates; the solver then falls back to bracketing
    bisection on N_b(G(n)) - n, which the report flags via ``method``.
    Genuine non-convergence is reported, not raised.
    """
    if n_b0 < 0:
        raise ValueError("n_b0 must be >= 0")

    def f(n):
        return gain(params, n).N_b

    history = [n_b0]
    n = n_b0
    residual = math.inf
    for it in range(1, max_iter + 1):
        fn = f(n)
        residual = abs(fn - n)
        if residual <= tol * max(1.0, abs(n)) and math.isfinite(fn):
            return FixedPointReport(n_b_star=n, iterations=it - 1,
                                    residual=residual, converged=True,
                                    history=tuple(history))
        if not math.isfinite(fn):
            n = min(fn, 1e300) if fn > 0 else 0.0
        else:
            n = (1.0 - relaxation) * n + relaxation * fn
        history.append(n)
        if accelerate and len(history) >= 3 and it % 3 == 0:
            x0, x1, x2 = history[-3], history[-2], history[-1]
            d1, d2 = x1 - x0, x2 - x1
            dd = d2 - d1
            if dd != 0.0 and math.isfinite(dd):
                cand = x2 - d2 * d2 / dd
                if math.isfinite(cand) and cand >= 0.0:
                    n = cand
                    history.append(n)
    fn = f(n)
    residual = abs(fn - n)
    if residual <= tol * max(1.0, abs(n)):
        return FixedPointReport(n_b_star=n, iterations=max_iter,
                                residual=residual, converged=True,
                                history=tuple(history))
    return _bisect_fixed_point(f, history, tol, max_iter)


def _bisect_fixed_point(f, history, tol, max_iter) -> FixedPointReport:
    """Bracketing fallback for the steep above-threshold regime."""
    g = lambda n: f(n) - n
    lo = 0.0
    g_lo = g(lo)
    if g_lo <= 0.0:
        # f(0) <= 0 is impossible (N_b > 0); f(0) ~ 0 means lo is the root
        n = f(lo)
        return FixedPointReport(n_b_star=n, iterations=len(history),
                                residual=abs(f(n) - n),
                                converged=abs(f(n) - n) <= tol * max(1.0, n),
                                history=tuple(history + [n]),
                                method="bisection")
    hi = max(1.0, 2.0 * max(h for h in history if math.isfinite(h)))
    for _ in range(200):
        if g(hi) < 0.0:
            break
        hi *= 8.0
        if hi > 1e300:
            return FixedPointReport(n_b_star=hi, iterations=len(history),
                                    residual=math.inf, converged=False,
                                    history=tuple(history),
                                    method="bisection")
    extra = 0
    a, b = lo, hi
    while extra < 400:
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        extra += 1
        if g(mid) > 0.0:
            a = mid
        else:
            b = mid
        history.append(mid)
    n = 0.5 * (a + b)
    residual = abs(f(n) - n)
    return FixedPointReport(n_b_star=n, iterations=len(history),
                            residual=residual,
                            converged=bool(residual <= tol * max(1.0, abs(n))),
                            history=tuple(history), method="bisection")
