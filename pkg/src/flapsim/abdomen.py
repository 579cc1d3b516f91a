"""Wing-abdomen coupling pipeline.

The abdomen is a point mass on a rod through a pivot behind the thorax; the
rod's near end rides the thorax slider, so slider motion undulates the
abdomen in antiphase with the wings.  The coupling is evaluated in the same
staged, one-pass fashion as the force construction it reproduces:

1. a baseline wing run gives the slider history x(t) and drive force F1(t);
2. the abdomen angle, its derivatives, and the vertical slider force F2 they
   require follow from x(t) alone;
3. the wing run is repeated with the drive replaced by F3(t) = F1(t) + F2(t).

Dead-center stops give x(t) velocity corners whose raw one-sample second
differences would be impulsive; the pipeline therefore evaluates the angle
derivatives on a short boxcar-regularized copy of the angle series (default
window 2 ms, the nominal dead-center passage time), which spreads each
reversal impulse over the passage window while leaving its integral intact.
The angle series itself is never smoothed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import aero, flapdyn
from .errors import InsufficientDataError, PipelineStageError, ValidationError
from .params import AbdomenParams, Environment, SimConfig, ThoraxLinkage, WingGeometry, mean_chord

REVERSAL_SMOOTHING = 2e-3  # s, boxcar window for derivative regularization
_DELTA_FLOOR = 1e-12  # rad, motion below this counts as numerical standstill


@dataclass
class AbdomenTrace:
    """Time-aligned abdomen angle, derivatives, and slider reaction force.

    ``theta_D`` is exact; the derivative series may come from a
    boxcar-regularized copy (see module docstring).  ``F2`` is filled by the
    pipeline; standalone kinematics leaves it None.
    """

    t: np.ndarray
    theta_D: np.ndarray
    theta_D_dot: np.ndarray
    theta_D_ddot: np.ndarray
    F2: Optional[np.ndarray] = None


@dataclass
class CoupledResult:
    """Everything the coupling pipeline produces."""

    baseline: flapdyn.Trajectory
    corrected: flapdyn.Trajectory
    trace: AbdomenTrace
    F3: np.ndarray
    freq_baseline: float
    freq_corrected: float
    mean_lift_baseline: float
    mean_lift_corrected: float
    lift_gain: float
    M_abdomen: np.ndarray = field(default=None)
    M_drag: np.ndarray = field(default=None)
    M_total: np.ndarray = field(default=None)
    meta: dict = field(default_factory=dict)


def abdomen_angle(ab: AbdomenParams, x) -> np.ndarray | float:
    """Abdomen rod angle -arctan((x - d4)/d3); strictly decreasing in x."""
    arr = np.asarray(x, dtype=float)
    out = -np.arctan((arr - ab.d4) / ab.d3)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _boxcar(values: np.ndarray, window: int) -> np.ndarray:
    """Zero-phase boxcar mean with reflected ends; window forced odd."""
    if window <= 1:
        return values
    if window % 2 == 0:
        window += 1
    pad = window // 2
    if pad >= values.size:
        raise ValidationError("smoothing window longer than the series")
    padded = np.concatenate([values[pad:0:-1], values, values[-2 : -2 - pad : -1]])
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


def abdomen_kinematics(
    ab: AbdomenParams,
    x_series: np.ndarray,
    dt: float,
    smooth_window: float = 0.0,
) -> AbdomenTrace:
    """Abdomen angle and its time derivatives from a slider history.

    Centered finite differences, one-sided at the ends.  ``smooth_window``
    (seconds) selects the derivative regularization window; 0 keeps plain
    differences of the exact angle series.
    """
    x = np.asarray(x_series, dtype=float)
    if x.ndim != 1 or x.size < 5:
        raise InsufficientDataError("abdomen_kinematics: need at least 5 slider samples")
    if dt <= 0.0:
        raise ValidationError("abdomen_kinematics: dt must be positive")
    theta = abdomen_angle(ab, x)
    base = _boxcar(theta, int(round(smooth_window / dt))) if smooth_window > 0.0 else theta
    dot = np.empty_like(base)
    dot[1:-1] = (base[2:] - base[:-2]) / (2.0 * dt)
    dot[0] = (base[1] - base[0]) / dt
    dot[-1] = (base[-1] - base[-2]) / dt
    ddot = np.empty_like(base)
    ddot[1:-1] = (base[2:] - 2.0 * base[1:-1] + base[:-2]) / (dt * dt)
    ddot[0] = (base[2] - 2.0 * base[1] + base[0]) / (dt * dt)
    ddot[-1] = (base[-1] - 2.0 * base[-2] + base[-3]) / (dt * dt)
    t = np.arange(x.size) * dt
    return AbdomenTrace(t=t, theta_D=theta, theta_D_dot=dot, theta_D_ddot=ddot)


def slider_reaction(ab: AbdomenParams, theta_D, theta_D_ddot, x, env: Environment):
    """Vertical slider force sustaining the abdomen motion.

    F2 = -(m2*d5*theta_D_ddot + m2*g*cos(theta_D)) * d3*d5/((x - d4)^2 + d3^2).
    """
    theta_D = np.asarray(theta_D, dtype=float)
    theta_D_ddot = np.asarray(theta_D_ddot, dtype=float)
    xa = np.asarray(x, dtype=float)
    lever = ab.d3 * ab.d5 / ((xa - ab.d4) ** 2 + ab.d3**2)
    out = -(ab.m2 * ab.d5 * theta_D_ddot + ab.m2 * env.g * np.cos(theta_D)) * lever
    if out.ndim == 0:
        return float(out)
    return out


def antiphase_check(traj: flapdyn.Trajectory, trace: AbdomenTrace) -> float:
    """Fraction of motion intervals where the abdomen moves against the wing.

    Compares the signs of per-sample increments of -theta_A and theta_D;
    intervals where either increment is below the floating-noise floor are
    excluded as standstill.  Errors out when nothing moves at all.
    """
    d_wing = np.diff(traj.theta_A)
    d_abd = np.diff(trace.theta_D)
    moving = (np.abs(d_wing) > _DELTA_FLOOR) & (np.abs(d_abd) > _DELTA_FLOOR)
    if not np.any(moving):
        raise InsufficientDataError("antiphase_check: no moving samples in the record")
    agree = np.sign(-d_wing[moving]) == np.sign(d_abd[moving])
    return float(np.mean(agree))


def pitch_moments(
    result: CoupledResult,
    ab: AbdomenParams,
    wing: WingGeometry,
    env: Environment,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pitch moments about the vehicle mass center along the corrected run.

    M_drag places the summed two-wing drag at the chord's quarter point with
    the same sign convention as the drive force; M_abdomen is the abdominal
    weight-plus-inertia term m2*(g*cos(theta_D) + d5*theta_D_ddot)*d5.
    """
    corrected = result.corrected
    trace = abdomen_kinematics(
        ab,
        corrected.x,
        corrected.dt,
        smooth_window=result.meta.get("smooth_window_s", REVERSAL_SMOOTHING),
    )
    m_abdomen = ab.m2 * (env.g * np.cos(trace.theta_D) + ab.d5 * trace.theta_D_ddot) * ab.d5
    arm = ab.d_c - mean_chord(wing) / 4.0
    signed_drag = np.sign(corrected.theta_dot) * 2.0 * corrected.F_drag
    m_drag = signed_drag * arm
    return m_abdomen, m_drag, m_abdomen + m_drag


def coupled_pipeline(
    config: SimConfig,
    link: ThoraxLinkage,
    wing: WingGeometry,
    ab: AbdomenParams,
    env: Environment,
    smooth_window: float = REVERSAL_SMOOTHING,
) -> CoupledResult:
    """Run the three-stage wing-abdomen coupling and collect all series.

    Requires ``abdomen_mode == 'undulating'``.  Both wing runs share one
    frozen set of aerodynamic coefficients from a single Reynolds pre-pass.
    A massless abdomen short-circuits stage 3: the corrected run is the
    baseline run.
    """
    if config.abdomen_mode != "undulating":
        raise ValidationError(
            "coupled_pipeline requires sim.abdomen_mode = 'undulating' "
            f"(got {config.abdomen_mode!r})"
        )
    try:
        re_value, f_dry, stroke = flapdyn._reynolds_prepass(config, link, wing, env)
        coeffs = aero.coefficients_from_re(re_value)
        baseline = flapdyn.simulate(config, link, wing, env, coeffs=coeffs)
        freq_baseline = flapdyn.flapping_frequency(baseline)
    except Exception as exc:
        raise PipelineStageError("stage 1 (baseline wing run)", exc) from exc
    try:
        trace = abdomen_kinematics(ab, baseline.x, config.dt, smooth_window=smooth_window)
        trace.F2 = slider_reaction(ab, trace.theta_D, trace.theta_D_ddot, baseline.x, env)
        f3 = baseline.F1 + trace.F2
    except Exception as exc:
        raise PipelineStageError("stage 2 (abdomen reaction)", exc) from exc
    try:
        if np.any(trace.F2 != 0.0):
            corrected = flapdyn.simulate(
                config, link, wing, env, coeffs=coeffs, drive_series=f3
            )
            freq_corrected = flapdyn.flapping_frequency(corrected)
        else:
            corrected = baseline
            freq_corrected = freq_baseline
        mean_base = aero.average_lift(baseline.t, baseline.F_lift, 1.0 / freq_baseline)
        mean_corr = aero.average_lift(corrected.t, corrected.F_lift, 1.0 / freq_corrected)
    except Exception as exc:
        raise PipelineStageError("stage 3 (corrected wing run)", exc) from exc
    result = CoupledResult(
        baseline=baseline,
        corrected=corrected,
        trace=trace,
        F3=f3,
        freq_baseline=freq_baseline,
        freq_corrected=freq_corrected,
        mean_lift_baseline=mean_base,
        mean_lift_corrected=mean_corr,
        lift_gain=mean_corr / mean_base - 1.0,
        meta={
            "reynolds": re_value,
            "f_dry_hz": f_dry,
            "stroke_rad": stroke,
            "smooth_window_s": smooth_window,
        },
    )
    result.M_abdomen, result.M_drag, result.M_total = pitch_moments(result, ab, wing, env)
    return result
