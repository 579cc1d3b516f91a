"""Quasi-steady blade-element force model.

Only the translational drag (opposing the wing-strip velocity) and the
translational lift (perpendicular to it) are modeled; rotational and
added-mass terms are excluded.  The drag/lift coefficients follow fitted
Reynolds-number power laws evaluated once per run, then held fixed.  Strip
speed is r*theta_dot, so the strip sums factor into theta_dot^2 times fixed
chord-weighted integrals; numpy's pairwise summation keeps the accumulation
order-independent and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InsufficientDataError, ModelRangeError, ValidationError
from .params import Environment, WingGeometry, chord_at

# fitted coefficient laws: value = const - scale * Re**exponent
_A_D = (1.873, 3.14, -0.369)
_C_D0 = (0.031, -10.48, -0.764)  # C_D0 grows at low Re, so the scale enters negated
_A_L = (1.966, 3.94, -0.429)


@dataclass(frozen=True)
class AeroCoefficients:
    """Reynolds-dependent constants of the drag/lift coefficient laws."""

    A_D: float
    C_D0: float
    A_L: float


@dataclass(frozen=True)
class StripForces:
    """Magnitudes of one half-wing's drag, lift, and drag moment about the flapping axis."""

    F_drag: float
    F_lift: float
    M_Fdrag: float


def coefficients_from_re(Re: float) -> AeroCoefficients:
    """Evaluate the three fitted power laws at Reynolds number ``Re``.

    Below roughly Re = 5 the fits turn negative and are meaningless; that is
    reported as a :class:`ModelRangeError` naming the offending coefficient.
    """
    if Re <= 0.0:
        raise ValidationError("coefficients_from_re: Re must be positive")
    a_d = _A_D[0] - _A_D[1] * Re ** _A_D[2]
    c_d0 = _C_D0[0] - _C_D0[1] * Re ** _C_D0[2]
    a_l = _A_L[0] - _A_L[1] * Re ** _A_L[2]
    for name, value in (("A_D", a_d), ("C_D0", c_d0), ("A_L", a_l)):
        if value < 0.0:
            raise ModelRangeError(
                f"Re={Re!r} is below the validity floor of the coefficient laws "
                f"({name} = {value!r} < 0)",
                coefficient=name,
                value=value,
            )
    return AeroCoefficients(A_D=a_d, C_D0=c_d0, A_L=a_l)


def lift_drag_coeff(c: AeroCoefficients, alpha: float) -> tuple[float, float]:
    """Translational lift and drag coefficients at angle of attack ``alpha``.

    C_Lt = A_L*sin(2*alpha); C_Dt = C_D0 + A_D*(1 - cos(2*alpha)).
    """
    if not 0.0 <= alpha <= math.pi / 2:
        raise ValidationError("lift_drag_coeff: alpha must lie in [0, pi/2]")
    c_lt = c.A_L * math.sin(2.0 * alpha)
    c_dt = c.C_D0 + c.A_D * (1.0 - math.cos(2.0 * alpha))
    return c_lt, c_dt


def chord_weighted_sums(wing: WingGeometry, n_strips: int) -> tuple[float, float]:
    """Midpoint-rule strip sums (sum c*r^2*dr, sum c*r^3*dr) over one half wing.

    The first weights strip speed squared (forces), the second adds the moment
    arm (drag moment).
    """
    if n_strips < 8:
        raise ValidationError("chord_weighted_sums: need at least 8 strips")
    dr = wing.l6 / n_strips
    r_mid = (np.arange(n_strips) + 0.5) * dr
    c_mid = chord_at(wing, r_mid)
    a2 = float(np.sum(c_mid * r_mid**2 * dr))
    a3 = float(np.sum(c_mid * r_mid**3 * dr))
    return a2, a3


def strip_forces(
    wing: WingGeometry,
    theta_dot: float,
    alpha: float,
    coeffs: AeroCoefficients,
    env: Environment,
    n_strips: int,
) -> StripForces:
    """Blade-element force magnitudes for one half wing at angular speed ``theta_dot``.

    Each strip contributes (1/2)*rho*c*(r*theta_dot)^2*C*dr; the common
    theta_dot^2 factors out of the midpoint sums.  Signs are the caller's
    responsibility (drag opposes the motion, the drag moment resists it).
    """
    c_lt, c_dt = lift_drag_coeff(coeffs, alpha)
    a2, a3 = chord_weighted_sums(wing, n_strips)
    q = 0.5 * env.rho * theta_dot * theta_dot
    return StripForces(F_drag=q * c_dt * a2, F_lift=q * c_lt * a2, M_Fdrag=q * c_dt * a3)


def average_lift(
    t: np.ndarray,
    lift: Union[np.ndarray, list],
    period: float,
) -> float:
    """Time-weighted mean of a lift series over the trailing whole number of cycles.

    Trapezoid rule in time; the window end is the last sample and the start is
    interpolated so the span is an exact multiple of ``period``.  Raises
    :class:`InsufficientDataError` when the series spans less than one period.
    """
    t = np.asarray(t, dtype=float)
    lift = np.asarray(lift, dtype=float)
    if t.ndim != 1 or t.shape != lift.shape or t.size < 2:
        raise ValidationError("average_lift: need matching 1-d time and lift series")
    if period <= 0.0:
        raise ValidationError("average_lift: period must be positive")
    span = t[-1] - t[0]
    n_cycles = math.floor(span / period + 1e-9)
    if n_cycles < 1:
        raise InsufficientDataError(
            f"average_lift: series spans {span!r} s, shorter than one period {period!r} s"
        )
    t_start = t[-1] - n_cycles * period
    i0 = int(np.searchsorted(t, t_start, side="right"))
    lift_start = float(np.interp(t_start, t, lift))
    tw = np.concatenate([[t_start], t[i0:]])
    lw = np.concatenate([[lift_start], lift[i0:]])
    return float(np.trapezoid(lw, tw) / (tw[-1] - tw[0]))
