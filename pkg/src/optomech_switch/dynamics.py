"""Time-domain mean-field dynamics and optical-switch figures of merit.

Integrates the slowly varying mean amplitudes of the two cavities, the
dot coherence and the mirror under the modulated pump
eta(t) = eta0 + p_amp*cos(omega_mod*t).  The dot inversion stays pinned
at its configured value.  From the periodic long-time response the
module extracts the switch ratio (max/min output power over a drive
cycle), the gain (output to input power-modulation amplitude) and the
-3 dB bandwidth of the gain versus modulation frequency.

Runs are deterministic: a fixed adaptive integrator with fixed
tolerances, no randomness.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (DegenerateGridError, DegenerateModelError, IntegrationFailureError,
                     UndefinedGainError, UndefinedRatioError)
from .params import DriveConfig, SystemParams
from .steady_state import SteadyState, solve_transmitted_power, steady_state_from_ptrans

# |state|^2 beyond this aborts the integration as a blow-up.
BLOWUP_NORM = 1e8
DEFAULT_TOL = 1e-8
SAMPLES_PER_PERIOD = 96
# transient policy: drive periods discarded / measured
DEFAULT_TRANSIENT_PERIODS = 50
DEFAULT_MEASURE_PERIODS = 10


@dataclass(frozen=True)
class TimeTrace:
    t: np.ndarray
    a: np.ndarray       # complex cavity-A amplitude
    b: np.ndarray       # complex cavity-B amplitude
    sigma: np.ndarray   # complex dot coherence (equation-of-motion sign)
    q: np.ndarray
    p: np.ndarray
    output_power: np.ndarray
    drive_power: np.ndarray

    def window(self, t_start: float, t_end: float) -> "TimeTrace":
        keep = (self.t >= t_start) & (self.t <= t_end)
        return TimeTrace(t=self.t[keep], a=self.a[keep], b=self.b[keep],
                         sigma=self.sigma[keep], q=self.q[keep], p=self.p[keep],
                         output_power=self.output_power[keep],
                         drive_power=self.drive_power[keep])


@dataclass(frozen=True)
class SwitchMetrics:
    switch_ratio: float
    gain: float
    bandwidth: float | None = None


def drive_value(t, drive: DriveConfig):
    """Instantaneous pump amplitude eta(t)."""
    return drive.eta0 + drive.p_amp * np.cos(drive.omega_mod * np.asarray(t))


def state_vector(steady: SteadyState) -> np.ndarray:
    """Initial condition vector for the integrator from a fixed point."""
    sig = steady.sigma_ge_s
    return np.array([steady.a_s.real, steady.a_s.imag,
                     steady.b_s.real, steady.b_s.imag,
                     sig.real, sig.imag, steady.q_s, steady.p_s])


def _rhs_factory(params: SystemParams, eta_func, c_rocking: float):
    ka, kb, kd = params.kappa_a, params.kappa_b, params.kappa_d
    da, db, dd = params.delta_a, params.delta_b, params.delta_d
    j, g, n = params.j_coupling, params.g_qd, params.n_inversion
    wm, gm = params.omega_m, params.gamma_m
    g_om = params.omega_m * params.chi
    lam_sin = params.lambda_pump * n * math.sin(params.theta)
    lam_cos = params.lambda_pump * n * math.cos(params.theta)

    def rhs(t, y):
        ar, ai, br, bi, sr, si, q, p = y
        eta = eta_func(t)
        dar = -ka * ar + da * ai + j * bi + eta - g_om * q * ai
        dai = -ka * ai - da * ar - j * br + g_om * q * ar
        dbr = -kb * br + db * bi + g * si + j * ai
        dbi = -kb * bi - db * br - g * sr - j * ar
        dsr = -kd * sr + dd * si - g * n * bi - lam_sin
        dsi = -kd * si - dd * sr + g * n * br - lam_cos
        dq = wm * p
        dp = -wm * q + g_om * (ar * ar + ai * ai + c_rocking) - gm * p
        return (dar, dai, dbr, dbi, dsr, dsi, dq, dp)

    return rhs


def _blowup_event(t, y):
    return BLOWUP_NORM - float(np.dot(y, y))


_blowup_event.terminal = True
_blowup_event.direction = -1


def _integrate(params: SystemParams, eta_func, t_span, y0, tol, c_rocking,
               t_eval) -> np.ndarray:
    rhs = _rhs_factory(params, eta_func, c_rocking)
    kwargs = dict(t_span=t_span, y0=y0, t_eval=t_eval, rtol=tol,
                  atol=tol * 1e-2, events=_blowup_event, dense_output=False)
    sol = solve_ivp(rhs, method="RK45", **kwargs)
    if not sol.success and sol.status != 1:
        # step-size trouble with the explicit pair: retry implicitly
        sol = solve_ivp(rhs, method="Radau", **kwargs)
    if sol.t_events[0].size:
        raise IntegrationFailureError("state norm blew up",
                                      last_valid_time=float(sol.t_events[0][0]))
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else t_span[0]
        raise IntegrationFailureError(f"integrator failed: {sol.message}",
                                      last_valid_time=last)
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationFailureError("non-finite state encountered",
                                      last_valid_time=float(sol.t[-1]))
    return sol.y


def integrate_meanfield(params: SystemParams, drive: DriveConfig, t_span,
                        init=None, tol: float = DEFAULT_TOL,
                        n_samples: int | None = None,
                        c_rocking: float = 0.0) -> TimeTrace:
    """Integrate the mean-field equations over ``t_span``.

    ``init`` may be a SteadyState, an 8-vector, or None (vacuum start).
    ``c_rocking`` adds the averaged radiation-pressure shift of a fast
    modulation to the mirror force; leave it at 0 when the modulation is
    integrated explicitly.  Samples are uniform; with a modulated drive
    the density defaults to SAMPLES_PER_PERIOD per drive period.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must have positive length")
    if init is None:
        y0 = np.zeros(8)
    elif isinstance(init, SteadyState):
        y0 = state_vector(init)
    else:
        y0 = np.asarray(init, dtype=float)
        if y0.shape != (8,):
            raise ValueError("init vector must have 8 components")
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")

    if n_samples is None:
        if drive.p_amp > 0.0 and drive.omega_mod > 0.0:
            # +1 keeps the sample step commensurate with the drive period
            period = 2.0 * math.pi / drive.omega_mod
            n_samples = max(2, int(round((t1 - t0) / period * SAMPLES_PER_PERIOD)) + 1)
        else:
            n_samples = 2000
    t_eval = np.linspace(t0, t1, n_samples)

    y = _integrate(params, lambda t: drive.eta0 + drive.p_amp * math.cos(drive.omega_mod * t),
                   (t0, t1), y0, tol, c_rocking, t_eval)
    a = y[0] + 1j * y[1]
    b = y[2] + 1j * y[3]
    sigma = y[4] + 1j * y[5]
    eta = drive_value(t_eval, drive)
    return TimeTrace(t=t_eval, a=a, b=b, sigma=sigma, q=y[6], p=y[7],
                     output_power=np.abs(a) ** 2, drive_power=eta**2)


def _refined_extrema(t: np.ndarray, series: np.ndarray) -> tuple[float, float]:
    """(max, min) of a sampled smooth series, parabola-refined at interior extrema."""

    def refine(idx):
        if idx == 0 or idx == series.size - 1:
            return series[idx]
        y0, y1, y2 = series[idx - 1], series[idx], series[idx + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom == 0.0:
            return y1
        delta = 0.5 * (y0 - y2) / denom
        if abs(delta) > 1.0:
            return y1
        return y1 - 0.25 * (y0 - y2) * delta

    return float(refine(int(np.argmax(series)))), float(refine(int(np.argmin(series))))


def switch_ratio(trace: TimeTrace, measure_window=None) -> float:
    """max/min of the output power over the measured window."""
    if measure_window is not None:
        trace = trace.window(*measure_window)
    if trace.t.size < 2:
        raise DegenerateGridError("measurement window contains fewer than 2 samples")
    hi, lo = _refined_extrema(trace.t, trace.output_power)
    if lo <= 1e-30:
        raise UndefinedRatioError(f"minimum output power {lo:.3e} is not positive")
    return hi / lo


def gain(trace: TimeTrace, drive: DriveConfig, measure_window=None) -> float:
    """Output power modulation amplitude over input power modulation amplitude."""
    if drive.p_amp <= 0.0:
        raise UndefinedGainError("gain requires a modulated drive (p_amp > 0)")
    if measure_window is not None:
        trace = trace.window(*measure_window)
    if trace.t.size < 2:
        raise DegenerateGridError("measurement window contains fewer than 2 samples")
    out_hi, out_lo = _refined_extrema(trace.t, trace.output_power)
    in_hi, in_lo = _refined_extrema(trace.t, trace.drive_power)
    in_amp = 0.5 * (in_hi - in_lo)
    if in_amp <= 0.0:
        raise UndefinedGainError("input power modulation amplitude vanished")
    return 0.5 * (out_hi - out_lo) / in_amp


def lower_branch_state(params: SystemParams, eta0: float,
                       c_rocking: float = 0.0) -> SteadyState:
    """Steady state on the lowest-power branch at the given bias."""
    roots = solve_transmitted_power(params, eta0, c_rocking)
    if not roots:
        raise DegenerateModelError("no steady-state root at the requested bias")
    return steady_state_from_ptrans(params, eta0, c_rocking, roots[0][0])


def driven_response(params: SystemParams, drive: DriveConfig,
                    transient_periods: int = DEFAULT_TRANSIENT_PERIODS,
                    measure_periods: int = DEFAULT_MEASURE_PERIODS,
                    tol: float = DEFAULT_TOL,
                    init=None) -> tuple[TimeTrace, tuple[float, float]]:
    """Drive from the lower branch, discard the transient, return the trace
    and the measurement window."""
    if drive.omega_mod <= 0.0 or drive.p_amp <= 0.0:
        raise UndefinedGainError("driven response requires p_amp > 0 and omega_mod > 0")
    period = 2.0 * math.pi / drive.omega_mod
    t_end = (transient_periods + measure_periods) * period
    if init is None:
        init = lower_branch_state(params, drive.eta0, 0.0)
    trace = integrate_meanfield(params, drive, (0.0, t_end), init=init, tol=tol)
    window = (transient_periods * period, t_end)
    return trace, window


def switch_metrics(params: SystemParams, drive: DriveConfig,
                   transient_periods: int = DEFAULT_TRANSIENT_PERIODS,
                   measure_periods: int = DEFAULT_MEASURE_PERIODS,
                   tol: float = DEFAULT_TOL) -> SwitchMetrics:
    """Switch ratio and gain at the configured drive (no bandwidth scan)."""
    trace, window = driven_response(params, drive, transient_periods,
                                    measure_periods, tol)
    return SwitchMetrics(switch_ratio=switch_ratio(trace, window),
                         gain=gain(trace, drive, window))


def gain_vs_frequency(params: SystemParams, eta0: float, p_amp: float,
                      omega_grid, transient_periods: int = DEFAULT_TRANSIENT_PERIODS,
                      measure_periods: int = DEFAULT_MEASURE_PERIODS,
                      tol: float = DEFAULT_TOL) -> np.ndarray:
    """Simulated gain at each modulation frequency of the grid."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    init = lower_branch_state(params, eta0, 0.0)
    values = np.empty(omega_grid.size)
    for i, om in enumerate(omega_grid):
        drive = DriveConfig(eta0=eta0, p_amp=p_amp, omega_mod=float(om))
        trace, window = driven_response(params, drive, transient_periods,
                                        measure_periods, tol, init=init)
        values[i] = gain(trace, drive, window)
    return values


def bandwidth(params: SystemParams, eta0: float, p_amp: float, omega_grid,
              transient_periods: int = DEFAULT_TRANSIENT_PERIODS,
              measure_periods: int = DEFAULT_MEASURE_PERIODS,
              tol: float = DEFAULT_TOL,
              gain_curve: np.ndarray | None = None) -> float:
    """-3 dB width of gain(omega_mod): measure of {gain >= max/sqrt(2)}.

    Interval boundaries between grid points are located by linear
    interpolation.  A precomputed ``gain_curve`` on the same grid may be
    supplied to avoid re-simulation.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size < 2:
        raise DegenerateGridError("bandwidth needs at least 2 frequency points")
    if np.any(np.diff(omega_grid) <= 0.0):
        raise DegenerateGridError("frequency grid must be strictly ascending")
    g = gain_curve if gain_curve is not None else gain_vs_frequency(
        params, eta0, p_amp, omega_grid, transient_periods, measure_periods, tol)
    g = np.asarray(g, dtype=float)
    top = np.max(g)
    if top <= 0.0:
        return 0.0
    return threshold_measure(omega_grid, g, top / math.sqrt(2.0))


def threshold_measure(x: np.ndarray, y: np.ndarray, level: float) -> float:
    """Total length of {x : y(x) >= level} for a piecewise-linear y."""
    total = 0.0
    for i in range(x.size - 1):
        x0, x1 = x[i], x[i + 1]
        y0, y1 = y[i] - level, y[i + 1] - level
        if y0 >= 0.0 and y1 >= 0.0:
            total += x1 - x0
        elif y0 >= 0.0 or y1 >= 0.0:
            cross = x0 + (x1 - x0) * y0 / (y0 - y1)
            total += (cross - x0) if y0 >= 0.0 else (x1 - cross)
    return float(total)


def hysteresis_sweep(params: SystemParams, input_ramp, c_rocking: float = 0.0,
                     rate: float | None = None, tol: float = DEFAULT_TOL,
                     settle_time: float | None = None):
    """Quasi-static up-then-down sweep of the input power.

    ``input_ramp`` is the ascending grid of input powers (eta0^2) for the
    upward leg; the downward leg retraces it in reverse.  The default
    ramp rate gamma_m/20 per unit input power keeps the sweep adiabatic
    relative to the mechanical relaxation.  Between the legs the drive is
    held at the top input for ``settle_time`` so post-jump ringing does
    not contaminate the downward leg.  Returns (up, down), each an (n, 2)
    array of (input_power, output_power).
    """
    ramp = np.asarray(input_ramp, dtype=float)
    if ramp.size < 2 or np.any(np.diff(ramp) <= 0.0):
        raise DegenerateGridError("input ramp must be ascending with >= 2 points")
    if np.any(ramp < 0.0):
        raise ValueError("input powers must be >= 0")
    if rate is None:
        rate = params.gamma_m / 20.0
    if settle_time is None:
        settle_time = 20.0 * max(1.0 / params.kappa_a,
                                 params.gamma_m / params.omega_m**2,
                                 1.0 / params.gamma_m)
    span = ramp[-1] - ramp[0]
    duration = span / rate

    def leg(powers, y0):
        p0, p1 = powers[0], powers[-1]

        def eta_func(t):
            frac = min(max(t / duration, 0.0), 1.0)
            return math.sqrt(p0 + (p1 - p0) * frac)

        t_eval = (powers - p0) / (p1 - p0) * duration
        y = _integrate(params, eta_func, (0.0, duration), y0, tol, c_rocking,
                       t_eval)
        out = y[0] ** 2 + y[1] ** 2
        return np.column_stack([powers, out]), y[:, -1]

    start = lower_branch_state(params, math.sqrt(ramp[0]), c_rocking)
    up, y_top = leg(ramp, state_vector(start))
    eta_top = math.sqrt(ramp[-1])
    y_settled = _integrate(params, lambda t: eta_top, (0.0, settle_time), y_top,
                           tol, c_rocking, np.array([0.0, settle_time]))[:, -1]
    down, _ = leg(ramp[::-1], y_settled)
    return up, down


def jump_input_power(curve: np.ndarray) -> tuple[float, float]:
    """Input power at the largest output jump of a swept curve.

    A jump may smear over several ramp samples, so consecutive
    same-direction output steps are aggregated into runs; the largest run
    wins and its half-change point is reported.  Returns (input power at
    the jump, jump magnitude).
    """
    inp, out = curve[:, 0], curve[:, 1]
    steps = np.diff(out)
    best = (0.0, 0, 0)  # |total change|, start, stop (inclusive step range)
    i = 0
    while i < steps.size:
        sign = np.sign(steps[i])
        j = i
        while j + 1 < steps.size and np.sign(steps[j + 1]) == sign:
            j += 1
        total = abs(out[j + 1] - out[i])
        if total > best[0]:
            best = (total, i, j)
        i = j + 1
    total, i, j = best
    if total == 0.0:
        return float(inp[0]), 0.0
    cum = np.abs(out[i:j + 2] - out[i])
    half = np.searchsorted(cum, 0.5 * total)
    k = min(i + max(half, 1) - 1, j)
    return float(0.5 * (inp[k] + inp[k + 1])), float(total)


def linear_gain(params: SystemParams, eta0: float, omega_mod: float) -> float:
    """Small-signal gain of the linear system (valid for chi = 0).

    First-harmonic response of the output power to a unit-amplitude power
    modulation, from the exact sideband solution of the coupled linear
    cavity/dot equations.
    """
    if params.chi != 0.0:
        raise ValueError("linear_gain applies to the chi = 0 system only")
    if eta0 == 0.0:
        raise UndefinedGainError("linear gain needs a nonzero bias")
    a_s = _linear_amplitude(params, eta0)

    def sideband(sign):
        om = sign * omega_mod
        dd = params.kappa_d + 1j * (params.delta_d + om)
        den_b = params.kappa_b + 1j * (params.delta_b + om) \
            - params.g_qd**2 * params.n_inversion / dd
        return 0.5 / (params.kappa_a + 1j * (params.delta_a + om)
                      + params.j_coupling**2 / den_b)

    z_plus = np.conj(a_s) * sideband(+1)
    z_minus = np.conj(a_s) * sideband(-1)
    return float(abs(z_plus + np.conj(z_minus)) / eta0)


def _linear_amplitude(params: SystemParams, eta0: float) -> complex:
    dd = params.kappa_d + 1j * params.delta_d
    den_b = params.kappa_b + 1j * params.delta_b \
        - params.g_qd**2 * params.n_inversion / dd
    num = eta0 + (-1j * params.j_coupling) * (
        -params.g_qd * params.lambda_pump * params.n_inversion
        * cmath.exp(-1j * params.theta) / dd) / den_b
    return num / (params.kappa_a + 1j * params.delta_a
                  + params.j_coupling**2 / den_b)
