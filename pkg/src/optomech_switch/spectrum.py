"""Displacement noise spectrum of the movable mirror.

The linear fluctuation system dO/dt = M O + f(t) is solved channel by
channel in Fourier space, O(w) = (-i w I - M)^{-1} f(w), and the
symmetrized position spectrum is assembled from the input-noise
correlations: delta-correlated vacuum noise for both cavities (including
the imaginary amplitude-phase cross correlations, which cancel in the
symmetrized combination and are carried along as a consistency check)
and the Brownian force on the mirror with spectral weight

    (gamma_m / omega_m) * w * [1 + coth(hbar*w / (2 kB T))].

The delta-function bookkeeping is fixed so that for a decoupled mirror at
high temperature  integral S_q(w) dw / (2 pi) = kB T / (hbar omega_m),
the equipartition value for the dimensionless displacement quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import NumericalError, SingularResponseError, UnstableStateError
from .linearize import DriftMatrix, drift_matrix, stability
from .params import SystemParams
from .steady_state import SteadyState

# Relative ceiling on the imaginary residue of the assembled spectrum.
REALITY_TOL = 1e-12
# Peaks must protrude by this fraction of the global maximum.
PEAK_PROMINENCE_FRACTION = 0.01

DEFAULT_OMEGA_MAX = 2.5
DEFAULT_OMEGA_POINTS = 2000


@dataclass(frozen=True)
class NoiseModel:
    """Rates entering the input-noise correlations."""

    thermal_ratio: float  # hbar*omega_m / (kB*T)
    gamma_m: float
    omega_m: float
    kappa_a: float
    kappa_b: float

    def __post_init__(self):
        if not self.thermal_ratio > 0.0:
            raise ValueError(f"thermal_ratio must be > 0, got {self.thermal_ratio}")

    @classmethod
    def from_params(cls, params: SystemParams) -> "NoiseModel":
        return cls(thermal_ratio=params.thermal_ratio, gamma_m=params.gamma_m,
                   omega_m=params.omega_m, kappa_a=params.kappa_a,
                   kappa_b=params.kappa_b)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    prominence: float


@dataclass(frozen=True)
class SpectrumSeries:
    omega_grid: np.ndarray
    s_q: np.ndarray
    peaks: tuple[Peak, ...] = field(default_factory=tuple)


def default_omega_grid(omega_max: float = DEFAULT_OMEGA_MAX,
                       n_points: int = DEFAULT_OMEGA_POINTS) -> np.ndarray:
    return np.linspace(0.0, omega_max, n_points)


def thermal_coth_times_omega(omega, noise: NoiseModel):
    """Even part w*coth(hbar*w/(2 kB T)) of the Brownian weight.

    Evaluated by series near w = 0, where the product has the finite
    limit 2 kB T / hbar = 2*omega_m/thermal_ratio.
    """
    omega = np.asarray(omega, dtype=float)
    r = noise.thermal_ratio
    x = omega * r / (2.0 * noise.omega_m)
    small = np.abs(x) < 1e-4
    return np.where(small,
                    2.0 * noise.omega_m / r + omega * x / 3.0,
                    omega / np.tanh(np.where(small, 1.0, x)))


def brownian_weight(omega, noise: NoiseModel):
    """(gamma_m/omega_m) * w * [1 + coth(hbar*w/(2 kB T))], any sign of w."""
    omega = np.asarray(omega, dtype=float)
    return noise.gamma_m / noise.omega_m * (omega + thermal_coth_times_omega(omega, noise))


def _input_matrix(noise: NoiseModel) -> np.ndarray:
    """Column k is the state-space footprint of noise channel k.

    Channel order: Brownian force, (u_in, v_in) of cavity B, (u_in, v_in)
    of cavity A, with the square-root decay-rate input couplings.
    """
    f = np.zeros((6, 5))
    f[1, 0] = 1.0
    f[2, 1] = np.sqrt(noise.kappa_b)
    f[3, 2] = np.sqrt(noise.kappa_b)
    f[4, 3] = np.sqrt(noise.kappa_a)
    f[5, 4] = np.sqrt(noise.kappa_a)
    return f


def _correlation_matrix(omega, noise: NoiseModel) -> np.ndarray:
    """Channel correlation matrix D(w), shape (nw, 5, 5), complex.

    Optical blocks are [[1, i], [-i, 1]] per cavity; the Brownian channel
    carries the full (non-symmetrized) weight at the given frequency.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    d = np.zeros((omega.size, 5, 5), dtype=complex)
    d[:, 0, 0] = brownian_weight(omega, noise)
    for base in (1, 3):
        d[:, base, base] = 1.0
        d[:, base + 1, base + 1] = 1.0
        d[:, base, base + 1] = 1j
        d[:, base + 1, base] = -1j
    return d


def _q_transfer(dm: DriftMatrix, noise: NoiseModel, omega_grid: np.ndarray) -> np.ndarray:
    """T_k(w): response of q to unit noise in channel k, shape (nw, 5)."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    nw = omega_grid.size
    a = -1j * omega_grid[:, None, None] * np.eye(6) - dm.m[None, :, :]
    f = np.broadcast_to(_input_matrix(noise), (nw, 6, 5))
    try:
        x = np.linalg.solve(a, f)
    except np.linalg.LinAlgError as exc:
        raise SingularResponseError(f"singular response matrix: {exc}") from exc
    return x[:, 0, :]


def spectrum_matrix(params: SystemParams, steady: SteadyState, noise: NoiseModel,
                    omega_grid: np.ndarray | None = None) -> SpectrumSeries:
    """Symmetrized displacement spectrum S_q(w) by matrix inversion.

    Refuses dynamically unstable steady states.  The assembled spectrum
    is checked to be real (to REALITY_TOL, relative) and non-negative.
    """
    if omega_grid is None:
        omega_grid = default_omega_grid()
    omega_grid = np.asarray(omega_grid, dtype=float)
    dm = drift_matrix(params, steady)
    report = stability(dm)
    if not report.stable:
        raise UnstableStateError(
            f"steady state is not stable (max Re eig = {report.max_real_part:.3e})")

    t = _q_transfer(dm, noise, omega_grid)
    tc = np.conj(t)
    d_plus = _correlation_matrix(omega_grid, noise)
    d_minus = _correlation_matrix(-omega_grid, noise)
    # S = 1/2 [ T(w) D(w) T(-w) + T(-w) D(-w) T(w) ], with T(-w) = conj T(w)
    s1 = np.einsum("wj,wjk,wk->w", t, d_plus, tc)
    s2 = np.einsum("wj,wjk,wk->w", tc, d_minus, t)
    s_complex = 0.5 * (s1 + s2)

    scale = np.max(np.abs(s_complex.real)) or 1.0
    if np.max(np.abs(s_complex.imag)) >= REALITY_TOL * scale:
        raise NumericalError(
            f"spectrum reality check failed: max |Im| = {np.max(np.abs(s_complex.imag)):.3e} "
            f"vs scale {scale:.3e}")
    s_q = s_complex.real
    if np.min(s_q) < -REALITY_TOL * scale:
        raise NumericalError(f"negative spectral density: min = {np.min(s_q):.3e}")
    s_q = np.maximum(s_q, 0.0)
    peaks = detect_peaks(omega_grid, s_q)
    return SpectrumSeries(omega_grid=omega_grid, s_q=s_q, peaks=peaks)


def detect_peaks(omega_grid: np.ndarray, s_q: np.ndarray) -> tuple[Peak, ...]:
    """Local maxima with prominence >= 1% of the global maximum."""
    s_q = np.asarray(s_q, dtype=float)
    if s_q.size == 0:
        return ()
    top = np.max(s_q)
    if not np.isfinite(top) or top <= 0.0 or np.all(s_q == s_q[0]):
        return ()
    idx, props = find_peaks(s_q, prominence=PEAK_PROMINENCE_FRACTION * top)
    return tuple(Peak(position=float(omega_grid[i]), height=float(s_q[i]),
                      prominence=float(p))
                 for i, p in zip(idx, props["prominences"]))
