"""Steady states of the coupled cavity-cavity-dot-mirror system.

Eliminating cavity B, the dot coherence and the mirror displacement from
the mean-field fixed-point equations leaves a single complex condition on
the cavity-A amplitude ``a_s``,

    a_s * [(i*Delta + kappa_a)*(A1 + i*A2) + J^2*(kappa_d + i*delta_d)]
        = eta0*(A1 + i*A2) + i*J*g*lambda*exp(-i*theta)*N,

with the effective detuning Delta = delta_a - omega_m*chi^2*(P + C),
P = |a_s|^2 the transmitted power, C the rocking parameter of the fast
drive modulation, and

    A1 = -g^2*N + kappa_b*kappa_d - delta_b*delta_d,
    A2 = delta_b*kappa_d + kappa_b*delta_d.

Taking the squared modulus turns this into a real cubic in P whose
coefficients are assembled in :func:`cubic_coefficients`; the full
symbolic derivation lives in docs/cubic_derivation.md.  The same fixed
point is found independently by :func:`steady_state_direct`, a damped
Newton iteration on ``a_s`` itself, which serves as the runtime oracle
for the cubic route.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, InvalidDriveError, NoConvergenceError, SingularResponseError
from .params import DriveConfig, SystemParams

# Roots closer than this (relative) are merged into one with multiplicity.
ROOT_MERGE_TOL = 1e-8
# Tiny negative real roots are clamped to zero instead of discarded.
ROOT_CLAMP_TOL = 1e-10
# |imag| below this (relative) classifies a polynomial root as real.
ROOT_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class SteadyState:
    """Mean-field fixed point of the slowly varying amplitudes.

    ``sigma_eg_s`` keeps the published sign convention for the dot
    coherence; the variable integrated by the equations of motion is its
    negative (see docs/KNOWN_ERRATA.md).
    """

    a_s: complex
    b_s: complex
    sigma_eg_s: complex
    q_s: float
    p_s: float
    p_trans: float
    eff_detuning: float

    @property
    def sigma_ge_s(self) -> complex:
        """Coherence in the convention of the equations of motion."""
        return -self.sigma_eg_s


def rocking_parameter(drive: DriveConfig) -> float:
    """Effective static power shift C = p_amp^2 / (2*omega_mod^2)."""
    if drive.p_amp == 0.0:
        return 0.0
    if drive.omega_mod <= 0.0:
        raise InvalidDriveError(
            f"p_amp={drive.p_amp} > 0 requires omega_mod > 0, got {drive.omega_mod}")
    return drive.p_amp**2 / (2.0 * drive.omega_mod**2)


def helper_constants(params: SystemParams) -> tuple[float, float]:
    """A1, A2 of the eliminated cavity-B/dot block.

    (A1 + i*A2) = (kappa_b + i*delta_b)*(kappa_d + i*delta_d) - g^2*N.
    """
    a1 = -params.g_qd**2 * params.n_inversion + params.kappa_b * params.kappa_d \
        - params.delta_b * params.delta_d
    a2 = params.delta_b * params.kappa_d + params.kappa_b * params.delta_d
    return a1, a2


def _drive_terms(params: SystemParams, eta0: float) -> complex:
    """Numerator eta0*(A1+i*A2) + i*J*g*lambda*exp(-i*theta)*N of a_s."""
    a1, a2 = helper_constants(params)
    qd_drive = (1j * params.j_coupling * params.g_qd * params.lambda_pump
                * params.n_inversion * cmath.exp(-1j * params.theta))
    return eta0 * (a1 + 1j * a2) + qd_drive


def effective_detuning(params: SystemParams, p_trans: float, c_rocking: float) -> float:
    """Delta = delta_a - omega_m*chi^2*(p_trans + C)."""
    return params.delta_a - params.omega_m * params.chi**2 * (p_trans + c_rocking)


def cubic_coefficients(params: SystemParams, eta0: float,
                       c_rocking: float) -> tuple[float, float, float, float]:
    """Coefficients (c3, c2, c1, c0) of the transmitted-power cubic.

    c3*P^3 + c2*P^2 + c1*P + c0 = 0 with P = |a_s|^2.  Re-derived from the
    fixed-point equations (docs/cubic_derivation.md); deviations from the
    published closed form are listed in docs/KNOWN_ERRATA.md.
    """
    a1, a2 = helper_constants(params)
    a_sq = a1 * a1 + a2 * a2
    beta = params.omega_m * params.chi**2
    j2 = params.j_coupling**2
    # detuning with only the rocking shift applied
    dt = params.delta_a - beta * c_rocking
    # real/imag parts of the response denominator at P = 0
    r0 = params.kappa_a * a1 + j2 * params.kappa_d - dt * a2
    i0 = dt * a1 + params.kappa_a * a2 + j2 * params.delta_d

    c3 = a_sq * beta * beta
    c2 = -2.0 * beta * (dt * a_sq - j2 * (params.kappa_d * a2 - params.delta_d * a1))
    c1 = r0 * r0 + i0 * i0

    lam_n = (params.j_coupling * params.g_qd * params.lambda_pump * params.n_inversion)
    c0 = -(eta0**2 * a_sq
           + 2.0 * eta0 * lam_n * (a1 * math.sin(params.theta) + a2 * math.cos(params.theta))
           + lam_n**2)
    return c3, c2, c1, c0


def _polish_real_root(coeffs, x: float) -> float:
    """A few Newton steps on the polynomial; keeps the input on failure."""
    for _ in range(3):
        p = 0.0
        dp = 0.0
        for c in coeffs:
            dp = dp * x + p
            p = p * x + c
        if dp == 0.0 or not math.isfinite(p):
            return x
        step = p / dp
        if not math.isfinite(step):
            return x
        x = x - step
    return x


def solve_transmitted_power(params: SystemParams, eta0: float,
                            c_rocking: float) -> list[tuple[float, int]]:
    """All physical roots of the transmitted-power polynomial.

    Returns ascending (p_trans, multiplicity) pairs.  Complex pairs and
    genuinely negative roots are discarded; tiny negatives are clamped to
    zero; near-coincident roots are merged.
    """
    coeffs = np.array(cubic_coefficients(params, eta0, c_rocking), dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise DegenerateModelError("non-finite polynomial coefficients")
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        raise DegenerateModelError("transmitted-power polynomial vanished identically")
    trimmed = coeffs.copy()
    while trimmed.size > 1 and abs(trimmed[0]) <= 1e-14 * scale:
        trimmed = trimmed[1:]
    if trimmed.size == 1:
        if abs(trimmed[0]) <= 1e-14 * scale:
            raise DegenerateModelError("transmitted-power polynomial vanished identically")
        return []  # nonzero constant: no roots

    raw = np.roots(trimmed)
    real_roots = []
    for z in raw:
        if abs(z.imag) > ROOT_IMAG_TOL * max(1.0, abs(z)):
            continue
        x = _polish_real_root(trimmed, z.real)
        if x < -ROOT_CLAMP_TOL * max(1.0, abs(x)):
            continue
        real_roots.append(max(x, 0.0))
    real_roots.sort()

    merged: list[tuple[float, int]] = []
    for x in real_roots:
        if merged and abs(x - merged[-1][0]) <= ROOT_MERGE_TOL * max(1.0, abs(x)):
            prev, mult = merged[-1]
            merged[-1] = (prev, mult + 1)
        else:
            merged.append((x, 1))
    return merged


def _assemble_state(params: SystemParams, eta0: float, c_rocking: float,
                    a_s: complex) -> SteadyState:
    """Back-substitute a_s into the eliminated variables."""
    p_trans = abs(a_s) ** 2
    delta = effective_detuning(params, p_trans, c_rocking)
    dd = params.kappa_d + 1j * params.delta_d
    lam_phase = params.lambda_pump * cmath.exp(-1j * params.theta)
    n = params.n_inversion

    den_b = params.kappa_b + 1j * params.delta_b - params.g_qd**2 * n / dd
    if abs(den_b) < 1e-12:
        raise SingularResponseError("cavity-B/dot response denominator vanished")
    b_s = -(1j * params.j_coupling * a_s + params.g_qd * lam_phase * n / dd) / den_b
    sigma_eg_s = -1j * (params.g_qd * b_s - lam_phase) * n / dd
    q_s = params.chi * (p_trans + c_rocking)
    return SteadyState(a_s=a_s, b_s=b_s, sigma_eg_s=sigma_eg_s, q_s=q_s,
                       p_s=0.0, p_trans=p_trans, eff_detuning=delta)


def steady_state_from_ptrans(params: SystemParams, eta0: float, c_rocking: float,
                             p_trans: float) -> SteadyState:
    """Steady state on the branch with transmitted power ``p_trans``.

    ``p_trans`` is normally a root from :func:`solve_transmitted_power`;
    the returned amplitude then satisfies |a_s|^2 = p_trans to the root
    accuracy.  Phase convention: the two pump frames coincide (the drive
    frequency offset is zero).
    """
    if p_trans < 0.0:
        raise ValueError(f"p_trans must be >= 0, got {p_trans}")
    a1, a2 = helper_constants(params)
    delta = effective_detuning(params, p_trans, c_rocking)
    den = ((1j * delta + params.kappa_a) * (a1 + 1j * a2)
           + params.j_coupling**2 * (params.kappa_d + 1j * params.delta_d))
    if abs(den) < 1e-12:
        raise SingularResponseError(
            f"cavity-A response denominator vanished at p_trans={p_trans}")
    a_s = _drive_terms(params, eta0) / den
    return _assemble_state(params, eta0, c_rocking, a_s)


def meanfield_residual(params: SystemParams, eta0: float, c_rocking: float,
                       state: SteadyState) -> np.ndarray:
    """Right-hand sides of the mean-field equations at a candidate state.

    Evaluated directly from the unreduced equations of motion (with the
    averaged radiation-pressure shift ``+ G*C``), so it is independent of
    the elimination algebra used elsewhere.  Returns 7 real residuals.
    """
    a, b = state.a_s, state.b_s
    sig = state.sigma_ge_s
    q, p = state.q_s, state.p_s
    g_om = params.omega_m * params.chi  # optomechanical coupling G
    da = (-1j * params.delta_a * a - 1j * params.j_coupling * b + eta0
          + 1j * g_om * a * q - params.kappa_a * a)
    db = (-1j * params.delta_b * b - 1j * params.g_qd * sig
          - 1j * params.j_coupling * a - params.kappa_b * b)
    dsig = ((-1j * params.delta_d - params.kappa_d) * sig
            + 1j * params.g_qd * b * params.n_inversion
            - 1j * params.lambda_pump * cmath.exp(-1j * params.theta) * params.n_inversion)
    dq = params.omega_m * p
    dp = (-params.omega_m * q + g_om * (abs(a) ** 2 + c_rocking) - params.gamma_m * p)
    return np.array([da.real, da.imag, db.real, db.imag,
                     abs(dsig), dq, dp], dtype=float)


def steady_state_direct(params: SystemParams, eta0: float, c_rocking: float,
                        initial_guess: complex | None = None,
                        max_iter: int = 200, max_halvings: int = 40) -> SteadyState:
    """Fixed point by damped Newton iteration on the complex amplitude a_s.

    Independent of the polynomial route: iterates the self-consistency
    condition with Delta evaluated at the current |a_s|^2.  Raises
    :class:`NoConvergenceError` when the residual cannot be driven below
    tolerance; callers retry from a different branch guess.
    """
    a1, a2 = helper_constants(params)
    asum = a1 + 1j * a2
    j2 = params.j_coupling**2
    beta = params.omega_m * params.chi**2
    dt = params.delta_a - beta * c_rocking
    src = _drive_terms(params, eta0)
    dd = params.kappa_d + 1j * params.delta_d

    def denom(p):
        return (1j * (dt - beta * p) + params.kappa_a) * asum + j2 * dd

    if initial_guess is None:
        initial_guess = src / denom(0.0) if abs(denom(0.0)) > 1e-300 else 0.0
    a = complex(initial_guess)
    if not (math.isfinite(a.real) and math.isfinite(a.imag)):
        raise ValueError("initial_guess must be finite")

    res_scale = max(1.0, abs(src))
    dw = -1j * beta * asum  # d(denom)/d|a|^2

    def residual(a):
        return a * denom(abs(a) ** 2) - src

    r = residual(a)
    for _ in range(max_iter):
        if abs(r) < 1e-12 * res_scale:
            break
        p = abs(a) ** 2
        w = denom(p)
        # Wirtinger derivatives of r = a*W(|a|^2) - src
        r_a = w + p * dw
        r_ac = a * a * dw
        det = (r_a.real + r_ac.real) * (r_a.real - r_ac.real) \
            - (r_ac.imag - r_a.imag) * (r_a.imag + r_ac.imag)
        if det == 0.0 or not math.isfinite(det):
            raise NoConvergenceError("singular Newton system for steady state")
        # solve r_a*step + r_ac*conj(step) = -r as a real 2x2 system
        rhs_re, rhs_im = -r.real, -r.imag
        m11 = r_a.real + r_ac.real
        m12 = -r_a.imag + r_ac.imag
        m21 = r_a.imag + r_ac.imag
        m22 = r_a.real - r_ac.real
        sx = (rhs_re * m22 - rhs_im * m12) / det
        sy = (rhs_im * m11 - rhs_re * m21) / det
        step = complex(sx, sy)

        improved = False
        for _ in range(max_halvings):
            a_new = a + step
            r_new = residual(a_new)
            if abs(r_new) < abs(r):
                a, r = a_new, r_new
                improved = True
                break
            step *= 0.5
        if not improved:
            raise NoConvergenceError(
                f"Newton damping exhausted at residual {abs(r):.3e}")
    else:
        raise NoConvergenceError(
            f"no convergence after {max_iter} iterations (residual {abs(r):.3e})")

    state = _assemble_state(params, eta0, c_rocking, a)
    full = meanfield_residual(params, eta0, c_rocking, state)
    if np.max(np.abs(full)) >= 1e-10:
        raise NoConvergenceError(
            f"converged amplitude fails mean-field residual check ({np.max(np.abs(full)):.3e})")
    return state
