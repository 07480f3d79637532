"""Linearized fluctuation dynamics about a steady state.

Gaussian fluctuations of the mirror and the two cavity quadratures obey
dO/dt = M O + f with state order O = [q, p, u1, v1, u2, v2], where
(u1, v1) are the amplitude/phase quadratures of cavity B, (u2, v2) those
of cavity A, and f collects the Brownian force and the input vacuum
noises.  The dot operators are held fluctuation-free, so they do not
appear.  The cavity-A block carries the effective detuning Delta of the
steady state, not the bare detuning: the static mirror displacement
shifts the resonance (docs/KNOWN_ERRATA.md).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams
from .steady_state import SteadyState

# Eigenvalues with real part above this count as unstable.
STABILITY_TOL = -1e-10

STATE_LABELS = ("q", "p", "u1", "v1", "u2", "v2")


@dataclass(frozen=True)
class FluctuationAmplitudes:
    """Real optomechanical coupling entries of the drift matrix.

    a_plus  = sqrt(2)*omega_m*chi*Re(a_s)
    a_minus_i = -sqrt(2)*omega_m*chi*Im(a_s)  (the real combination i*a_-)
    """

    a_plus: float
    a_minus_i: float


def fluctuation_amplitudes(steady: SteadyState, params: SystemParams) -> FluctuationAmplitudes:
    scale = math.sqrt(2.0) * params.omega_m * params.chi
    return FluctuationAmplitudes(a_plus=scale * steady.a_s.real,
                                 a_minus_i=-scale * steady.a_s.imag)


@dataclass(frozen=True)
class DriftMatrix:
    m: np.ndarray  # 6x6 real, state order [q, p, u1, v1, u2, v2]
    eff_detuning: float


def drift_matrix(params: SystemParams, steady: SteadyState) -> DriftMatrix:
    """6x6 drift matrix at the given fixed point.

    The caller guarantees ``steady`` is an actual fixed point (mean-field
    residual below 1e-8); the matrix is then time independent.
    """
    amp = fluctuation_amplitudes(steady, params)
    ap, iam = amp.a_plus, amp.a_minus_i
    wm, gm = params.omega_m, params.gamma_m
    ka, kb, j = params.kappa_a, params.kappa_b, params.j_coupling
    db, d = params.delta_b, steady.eff_detuning
    m = np.array([
        [0.0,  wm,   0.0,  0.0,  0.0,  0.0],
        [-wm, -gm,   0.0,  0.0,  ap,  -iam],
        [0.0,  0.0, -kb,   db,   0.0,  j],
        [0.0,  0.0, -db,  -kb,  -j,    0.0],
        [iam,  0.0,  0.0,  j,   -ka,   d],
        [ap,   0.0, -j,    0.0, -d,   -ka],
    ])
    if not np.all(np.isfinite(m)):
        raise ValueError("drift matrix has non-finite entries")
    return DriftMatrix(m=m, eff_detuning=d)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    eigenvalues: np.ndarray
    max_real_part: float


def stability(dm: DriftMatrix) -> StabilityReport:
    """Lyapunov stability of the fixed point: all Re(eig) < -1e-10."""
    eig = np.linalg.eigvals(dm.m)
    max_re = float(np.max(eig.real))
    return StabilityReport(stable=max_re < STABILITY_TOL, eigenvalues=eig,
                           max_real_part=max_re)
