"""Time integration of the wing-base equation of motion under crank drive.

One rigid half wing with moment of inertia ``I_wing`` rotates about the
flapping axis.  Moments on it: the slider drive force through the linkage
lever, the lumped torsional-spring restoring torque (always opposing
deflection from neutral), the quasi-steady drag moment (always resisting the
motion), and gravity on the wing mass center.  A classic fixed-step
fourth-order Runge-Kutta scheme advances (theta_A, theta_dot); the slider
displacement is recomputed from the wing angle at every sample, so the
single-degree-of-freedom constraint holds exactly.

Dead centers
------------
The crank cannot push the slider past its dead centers, and the quasi-static
force model cannot represent the crank sweeping through them.  Three rules
stand in for that passage:

* the transmitted force is evaluated with the slider clamped a small margin
  (``DEAD_CENTER_MARGIN``) inside the dead centers, so a parked mechanism can
  always be driven off a dead center;
* reaching a dead center is an inelastic stop: the state is projected back to
  the margin boundary and any outward angular velocity is dropped (the wing's
  momentum goes into carrying the crank over);
* the commanded drive direction flips when the slider reaches a dead center,
  detected either by the stop itself or by the slider retreating more than
  ``TOGGLE_HYSTERESIS`` from its extreme excursion against the commanded
  direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import aero, linkage
from .errors import (
    GeometryError,
    InsufficientDataError,
    SimulationDivergedError,
    ValidationError,
)
from .params import Environment, SimConfig, ThoraxLinkage, WingGeometry, neutral_wall_angle

DEAD_CENTER_MARGIN = 3e-6  # m, closest approach of the force model to a dead center
TOGGLE_HYSTERESIS = 1e-6  # m, slider retreat that counts as a stroke reversal
DRY_RUN_DURATION = 0.75  # s, coarse aero-free run for the Reynolds pre-pass
FALLBACK_FREQUENCY = 0.5  # Hz, Reynolds pre-pass floor when no oscillation appears
_SPEED_LIMIT = 1e4  # rad/s, beyond this the run is declared diverged
_OVERRUN_FRACTION = 0.25  # of the slider window; larger overshoots are divergence


@dataclass(frozen=True)
class WingState:
    """Integrator state at one instant."""

    t: float
    theta_A: float
    theta_dot: float
    x: float
    stroke_dir: int


@dataclass
class Trajectory:
    """Uniformly sampled wing trajectory with the forces acting along it.

    ``F1`` is the signed drive force on the slider; ``F_lift``, ``F_drag`` and
    ``M_Fdrag`` are half-wing force magnitudes from the blade-element model.
    ``meta`` records the run conditions (frozen Reynolds number, coefficient
    values, configuration echo).
    """

    t: np.ndarray
    theta_A: np.ndarray
    theta_dot: np.ndarray
    x: np.ndarray
    F1: np.ndarray
    F_lift: np.ndarray
    F_drag: np.ndarray
    M_Fdrag: np.ndarray
    meta: dict

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


class _Dynamics:
    """Precomputed constants and the moment balance for one run."""

    def __init__(
        self,
        link: ThoraxLinkage,
        wing: WingGeometry,
        env: Environment,
        config: SimConfig,
        coeffs: Optional[aero.AeroCoefficients],
        drive_series: Optional[np.ndarray] = None,
    ):
        if config.aero_enabled and coeffs is None:
            raise ValidationError("aero enabled but no coefficients supplied")
        self.link = link
        self.wing = wing
        self.env = env
        self.config = config
        self.coeffs = coeffs
        self.theta_neutral = neutral_wall_angle(link)
        self.sin_theta_neutral = math.sin(self.theta_neutral)
        self.x_hi = link.slider_max - DEAD_CENTER_MARGIN
        self.x_lo = link.slider_min + DEAD_CENTER_MARGIN
        if self.x_lo >= self.x_hi:
            raise ValidationError("slider window collapses inside the dead-center margins")
        self.theta_hi = linkage.wing_from_slider(link, self.x_hi)
        self.theta_lo = linkage.wing_from_slider(link, self.x_lo)
        self.K = link.K if config.hinges_enabled else 0.0
        if config.aero_enabled:
            c_lt, c_dt = aero.lift_drag_coeff(coeffs, config.alpha)
            a2, a3 = aero.chord_weighted_sums(wing, config.n_strips)
            q = 0.5 * env.rho
            self.q_drag_moment = q * c_dt * a3
            self.q_drag_force = q * c_dt * a2
            self.q_lift_force = q * c_lt * a2
            self.c_lt, self.c_dt = c_lt, c_dt
        else:
            self.q_drag_moment = self.q_drag_force = self.q_lift_force = 0.0
            self.c_lt = self.c_dt = 0.0
        self.m_grav = wing.m1 * env.g * wing.R_C
        self.tau_over_l5 = config.tau / link.l5
        self.drive_series = drive_series
        if drive_series is not None:
            self._series_last = len(drive_series) - 1

    # -- drive force ------------------------------------------------------

    def drive(self, x: float, t: float, stroke_dir: int) -> float:
        if self.drive_series is not None:
            return self._series_at(t)
        link = self.link
        xc = x
        if xc > self.x_hi:
            xc = self.x_hi
        elif xc < self.x_lo:
            xc = self.x_lo
        s = link.d2 + xc
        cos_psi = (link.l4 * link.l4 + link.l5 * link.l5 - s * s) / (2.0 * link.l4 * link.l5)
        if cos_psi > 1.0:
            cos_psi = 1.0
        elif cos_psi < -1.0:
            cos_psi = -1.0
        sin_psi = math.sqrt(1.0 - cos_psi * cos_psi)
        sin_phi = link.l5 * sin_psi / s
        cos_phi = math.sqrt(max(0.0, 1.0 - sin_phi * sin_phi))
        return stroke_dir * self.tau_over_l5 * sin_psi * cos_phi

    def _series_at(self, t: float) -> float:
        series = self.drive_series
        pos = t / self.config.dt
        i = int(pos)
        if i >= self._series_last:
            return float(series[self._series_last])
        if i < 0:
            return float(series[0])
        w = pos - i
        return float(series[i] * (1.0 - w) + series[i + 1] * w)

    # -- moment balance ---------------------------------------------------

    def slider(self, theta: float) -> float:
        arg = (self.link.l1 * math.cos(theta) - self.link.l3 + self.link.d1) / self.link.l2
        if arg > 1.0 or arg < -1.0:
            raise GeometryError(f"wing angle {theta!r} rad outside the linkage working range")
        cos_d = math.sqrt(1.0 - arg * arg)
        return (
            self.link.l2 * self.sin_theta_neutral
            - self.link.l2 * cos_d
            + self.link.l1 * math.sin(theta)
        )

    def acceleration(self, theta: float, theta_dot: float, t: float, stroke_dir: int) -> float:
        link = self.link
        arg = (link.l1 * math.cos(theta) - link.l3 + link.d1) / link.l2
        if arg > 1.0 or arg < -1.0:
            raise GeometryError(f"wing angle {theta!r} rad outside the linkage working range")
        delta = math.asin(arg)
        cos_d = math.sqrt(1.0 - arg * arg)
        x = link.l2 * self.sin_theta_neutral - link.l2 * cos_d + link.l1 * math.sin(theta)
        f1 = self.drive(x, t, stroke_dir)
        moment = f1 * link.l1 * math.cos(theta + delta) / (2.0 * cos_d)
        if self.K != 0.0 and theta != 0.0:
            theta_b = abs(self.theta_neutral - (math.pi / 2.0 - theta - delta))
            theta_c = abs(self.theta_neutral - (math.pi / 2.0 - delta))
            moment -= math.copysign(self.K * (abs(theta) + theta_b + theta_c), theta)
        if theta_dot != 0.0:
            moment -= math.copysign(self.q_drag_moment * theta_dot * theta_dot, theta_dot)
        moment -= self.m_grav * math.cos(theta)
        return moment / self.wing.I_wing


def spring_torque(link: ThoraxLinkage, theta_A: float) -> float:
    """Signed lumped spring torque on the wing base; always opposes deflection."""
    if theta_A == 0.0:
        return 0.0
    theta_b, theta_c = linkage.spring_deflections(link, theta_A)
    return -math.copysign(link.K * (abs(theta_A) + theta_b + theta_c), theta_A)


class WingIntegrator:
    """Fixed-step RK4 integrator with dead-center handling.

    Holds the per-run precomputation and the slider-excursion tracker used for
    stroke reversal detection; states themselves stay immutable.
    """

    def __init__(
        self,
        link: ThoraxLinkage,
        wing: WingGeometry,
        env: Environment,
        config: SimConfig,
        coeffs: Optional[aero.AeroCoefficients] = None,
        drive_series: Optional[np.ndarray] = None,
    ):
        self.dyn = _Dynamics(link, wing, env, config, coeffs, drive_series)
        self.dt = config.dt
        self._x_extreme: Optional[float] = None

    def initial_state(self) -> WingState:
        cfg = self.dyn.config
        theta0 = cfg.initial_angle if cfg.initial_angle is not None else self.dyn.theta_hi
        if not self.dyn.theta_lo <= theta0 <= self.dyn.theta_hi:
            raise ValidationError(
                "sim.initial_angle outside the reachable stroke "
                f"[{self.dyn.theta_lo!r}, {self.dyn.theta_hi!r}] rad"
            )
        x0 = self.dyn.slider(theta0)
        self._x_extreme = x0
        return WingState(t=0.0, theta_A=theta0, theta_dot=0.0, x=x0, stroke_dir=-1)

    def step(self, state: WingState) -> WingState:
        dyn = self.dyn
        h = self.dt
        t, th, om, dirn = state.t, state.theta_A, state.theta_dot, state.stroke_dir
        if self._x_extreme is None:
            self._x_extreme = state.x
        try:
            k1v = dyn.acceleration(th, om, t, dirn)
            k1x = om
            om2 = om + 0.5 * h * k1v
            k2v = dyn.acceleration(th + 0.5 * h * k1x, om2, t + 0.5 * h, dirn)
            k2x = om2
            om3 = om + 0.5 * h * k2v
            k3v = dyn.acceleration(th + 0.5 * h * k2x, om3, t + 0.5 * h, dirn)
            k3x = om3
            om4 = om + h * k3v
            k4v = dyn.acceleration(th + h * k3x, om4, t + h, dirn)
            k4x = om4
        except GeometryError as exc:
            raise SimulationDivergedError(
                f"integration left the reachable linkage range at t={t!r} s ({exc})",
                last_state=state,
            ) from exc
        th_new = th + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        om_new = om + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t_new = t + h
        if not (math.isfinite(th_new) and math.isfinite(om_new)) or abs(om_new) > _SPEED_LIMIT:
            raise SimulationDivergedError(
                f"non-finite or runaway state at t={t_new!r} s", last_state=state
            )
        try:
            x_new = dyn.slider(th_new)
        except GeometryError as exc:
            raise SimulationDivergedError(
                f"integration left the reachable linkage range at t={t_new!r} s ({exc})",
                last_state=state,
            ) from exc
        overrun = _OVERRUN_FRACTION * (dyn.x_hi - dyn.x_lo)
        if x_new > dyn.x_hi + overrun or x_new < dyn.x_lo - overrun:
            raise SimulationDivergedError(
                f"slider overran a dead center by more than {overrun!r} m at t={t_new!r} s",
                last_state=state,
            )
        contact_top = contact_bottom = False
        if x_new >= dyn.x_hi:
            th_new, x_new = dyn.theta_hi, dyn.x_hi
            if om_new > 0.0:
                om_new = 0.0
            contact_top = True
        elif x_new <= dyn.x_lo:
            th_new, x_new = dyn.theta_lo, dyn.x_lo
            if om_new < 0.0:
                om_new = 0.0
            contact_bottom = True
        if dyn.drive_series is None:
            if contact_top:
                dirn = -1
                self._x_extreme = x_new
            elif contact_bottom:
                dirn = +1
                self._x_extreme = x_new
            elif dirn > 0:
                if x_new > self._x_extreme:
                    self._x_extreme = x_new
                elif x_new < self._x_extreme - TOGGLE_HYSTERESIS:
                    dirn = -1
                    self._x_extreme = x_new
            else:
                if x_new < self._x_extreme:
                    self._x_extreme = x_new
                elif x_new > self._x_extreme + TOGGLE_HYSTERESIS:
                    dirn = +1
                    self._x_extreme = x_new
        else:
            f3 = dyn.drive(x_new, t_new, dirn)
            if f3 > 0.0:
                dirn = +1
            elif f3 < 0.0:
                dirn = -1
        return WingState(t=t_new, theta_A=th_new, theta_dot=om_new, x=x_new, stroke_dir=dirn)

    def run(self) -> Trajectory:
        dyn = self.dyn
        cfg = dyn.config
        n = int(round(cfg.duration / cfg.dt))
        t = np.empty(n + 1)
        theta = np.empty(n + 1)
        theta_dot = np.empty(n + 1)
        x = np.empty(n + 1)
        f1 = np.empty(n + 1)
        state = self.initial_state()
        for k in range(n + 1):
            t[k] = state.t
            theta[k] = state.theta_A
            theta_dot[k] = state.theta_dot
            x[k] = state.x
            f1[k] = dyn.drive(state.x, state.t, state.stroke_dir)
            if k < n:
                state = self.step(state)
        w2 = theta_dot * theta_dot
        traj = Trajectory(
            t=t,
            theta_A=theta,
            theta_dot=theta_dot,
            x=x,
            F1=f1,
            F_lift=dyn.q_lift_force * w2,
            F_drag=dyn.q_drag_force * w2,
            M_Fdrag=dyn.q_drag_moment * w2,
            meta={},
        )
        return traj


def wing_acceleration(
    state: WingState,
    link: ThoraxLinkage,
    wing: WingGeometry,
    coeffs: Optional[aero.AeroCoefficients],
    env: Environment,
    tau: float,
    alpha: float,
    hinges_enabled: bool,
    n_strips: int = 256,
    aero_enabled: bool = True,
) -> float:
    """Angular acceleration of the wing base at ``state`` (rad/s^2).

    Moment balance: drive force through the linkage lever, minus the lumped
    spring restoring torque, the resisting drag moment, and gravity, divided
    by the wing inertia.
    """
    cfg = SimConfig(
        tau=tau,
        alpha=alpha,
        hinges_enabled=hinges_enabled,
        n_strips=n_strips,
        aero_enabled=aero_enabled and coeffs is not None,
    )
    dyn = _Dynamics(link, wing, env, cfg, coeffs if cfg.aero_enabled else None)
    return dyn.acceleration(state.theta_A, state.theta_dot, state.t, state.stroke_dir)


def step(
    state: WingState,
    dt: float,
    link: ThoraxLinkage,
    wing: WingGeometry,
    env: Environment,
    config: SimConfig,
    coeffs: Optional[aero.AeroCoefficients] = None,
) -> WingState:
    """One RK4 update of ``state`` by ``dt`` under ``config``.

    Stateless convenience wrapper around :class:`WingIntegrator`; the
    reversal tracker is seeded from the given state, so sequences of calls
    detect reversals only across a single step.
    """
    if dt <= 0.0:
        raise ValidationError("step: dt must be positive")
    cfg = replace(config, dt=dt, duration=10.0 * dt)
    integrator = WingIntegrator(link, wing, env, cfg, coeffs)
    integrator._x_extreme = state.x
    return integrator.step(state)


def frequency_from_angle_series(t: np.ndarray, theta: np.ndarray) -> float:
    """Flapping frequency from upward mean-crossings, first (transient) cycle discarded."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s = theta - theta.mean()
    below = s[:-1] < 0.0
    above = s[1:] >= 0.0
    idx = np.nonzero(below & above)[0]
    if idx.size < 3:
        raise InsufficientDataError(
            f"need at least 3 upward mean-crossings to estimate a frequency, found {idx.size}"
        )
    frac = -s[idx] / (s[idx + 1] - s[idx])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    periods = np.diff(crossings)[1:]
    return float(1.0 / periods.mean())


def flapping_frequency(traj: Trajectory) -> float:
    """Flapping frequency of a simulated trajectory, Hz."""
    return frequency_from_angle_series(traj.t, traj.theta_A)


def _reynolds_prepass(
    config: SimConfig,
    link: ThoraxLinkage,
    wing: WingGeometry,
    env: Environment,
) -> tuple[float, float, float]:
    """Frozen flow condition for a run: (Re, dry-run frequency, stroke amplitude).

    The frequency comes from a coarse drive-only run without aerodynamic
    forces; the stroke is the dead-center-to-dead-center wing excursion.  When
    the dry run never oscillates (zero torque, say) the frequency falls back
    to the small-angle spring-inertia estimate, floored at
    ``FALLBACK_FREQUENCY``.
    """
    dry_duration = max(min(config.duration, DRY_RUN_DURATION), 10.0 * config.dt)
    dry_cfg = replace(config, aero_enabled=False, duration=dry_duration)
    integrator = WingIntegrator(link, wing, env, dry_cfg)
    dry = integrator.run()
    try:
        f_dry = flapping_frequency(dry)
    except InsufficientDataError:
        k_eff = 2.0 * link.K if config.hinges_enabled else 0.0
        f_dry = max(FALLBACK_FREQUENCY, math.sqrt(k_eff / wing.I_wing) / (2.0 * math.pi))
    stroke = integrator.dyn.theta_hi - integrator.dyn.theta_lo
    from .params import reynolds  # local import to keep module load light

    return reynolds(wing, f_dry, stroke, env), f_dry, stroke


def simulate(
    config: SimConfig,
    link: ThoraxLinkage,
    wing: WingGeometry,
    env: Environment,
    coeffs: Optional[aero.AeroCoefficients] = None,
    drive_series: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Integrate a full run from rest at the configured release angle.

    The release defaults to the maximum upstroke angle with the first stroke
    commanded downward.  When aerodynamics is enabled and no coefficients are
    given, a Reynolds pre-pass (dry run) fixes them for the whole run.
    ``drive_series`` replaces the crank drive with a prescribed slider-force
    time series on the same sampling grid (used by the abdomen coupling).
    """
    meta: dict = {
        "tau_nm": config.tau,
        "alpha_rad": config.alpha,
        "dt_s": config.dt,
        "duration_s": config.duration,
        "n_strips": config.n_strips,
        "hinges_enabled": config.hinges_enabled,
        "aero_enabled": config.aero_enabled,
        "drive": "series" if drive_series is not None else "crank",
    }
    if config.aero_enabled and coeffs is None:
        re_value, f_dry, stroke = _reynolds_prepass(config, link, wing, env)
        coeffs = aero.coefficients_from_re(re_value)
        meta.update({"reynolds": re_value, "f_dry_hz": f_dry, "stroke_rad": stroke})
    series = None if drive_series is None else np.asarray(drive_series, dtype=float)
    integrator = WingIntegrator(link, wing, env, config, coeffs, series)
    traj = integrator.run()
    if config.aero_enabled:
        meta.update(
            {
                "A_D": coeffs.A_D,
                "C_D0": coeffs.C_D0,
                "A_L": coeffs.A_L,
                "C_Lt": integrator.dyn.c_lt,
                "C_Dt": integrator.dyn.c_dt,
            }
        )
    meta["initial_angle_rad"] = float(traj.theta_A[0])
    traj.meta = meta
    return traj


def hinge_effect(
    config: SimConfig,
    link: ThoraxLinkage,
    wing: WingGeometry,
    env: Environment,
) -> float:
    """Relative flapping-frequency change from enabling the flexible hinges.

    Runs the same configuration with and without the torsional springs (each
    with its own Reynolds pre-pass) and returns (f_on - f_off)/f_off.
    """
    f_on = flapping_frequency(simulate(replace(config, hinges_enabled=True), link, wing, env))
    f_off = flapping_frequency(simulate(replace(config, hinges_enabled=False), link, wing, env))
    return (f_on - f_off) / f_off
