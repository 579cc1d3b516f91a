"""Kinematics and force transmission of the crank-slider plus pseudo-rigid thorax.

Pure functions of an immutable :class:`~flapsim.params.ThoraxLinkage`.  The
single degree of freedom is the wing-base angle ``theta_A`` (positive above
horizontal); the slider displacement ``x`` (positive upward from the neutral
point) follows from it, and the crank pose follows from ``x``.  Force
transmission vanishes at the two dead centers, where the crank and the slide
linkage are collinear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DeadCenterOverrunError, UnreachableDisplacementError
from .params import (
    ThoraxLinkage,
    ValidationError,
    clamped_arccos,
    clamped_arcsin,
    neutral_wall_angle,
)

BISECT_RESIDUAL = 1e-12  # m, wing_from_slider termination
BRACKET_LO = math.radians(-70.0)
BRACKET_HI = math.radians(80.0)
BRACKET_STEP = math.radians(10.0)
BRACKET_LIMIT = math.radians(105.0)


@dataclass(frozen=True)
class SliderState:
    """Slider displacement plus the commanded drive direction (+1 up, -1 down)."""

    x: float
    stroke_dir: int = +1

    def __post_init__(self):
        if self.stroke_dir not in (+1, -1):
            raise ValidationError("stroke_dir must be +1 or -1")


@dataclass(frozen=True)
class CrankPose:
    """Crank-to-rod angle psi and rod-to-vertical angle phi, radians."""

    psi: float
    phi: float


def delta_angle(link: ThoraxLinkage, theta_A: float) -> float:
    """Rod correction angle delta = arcsin((l1*cos(theta_A) - l3 + d1)/l2)."""
    arg = (link.l1 * math.cos(theta_A) - link.l3 + link.d1) / link.l2
    try:
        return clamped_arcsin(arg, "delta angle")
    except ValidationError:
        raise UnreachableDisplacementError(
            f"linkage cannot reach wing angle {theta_A!r} rad "
            "(|l1*cos(theta_A) - l3 + d1| > l2)"
        ) from None


def slider_from_wing(link: ThoraxLinkage, theta_A: float) -> float:
    """Slider displacement for a wing angle: x = l2*sin(Theta) - l2*cos(delta) + l1*sin(theta_A)."""
    theta_neutral = neutral_wall_angle(link)
    d = delta_angle(link, theta_A)
    return link.l2 * math.sin(theta_neutral) - link.l2 * math.cos(d) + link.l1 * math.sin(theta_A)


def wing_from_slider(link: ThoraxLinkage, x: float) -> float:
    """Wing angle producing slider displacement ``x``; bisection to < 1e-12 m residual.

    ``slider_from_wing`` is strictly increasing over the working range, so the
    root is unique.  The initial bracket [-70 deg, 80 deg] shrinks inward where
    the linkage geometry is undefined and widens in 10 deg steps when the
    target sits outside it.
    """

    def f_or_none(theta: float):
        try:
            return slider_from_wing(link, theta) - x
        except ValidationError:
            return None

    lo, flo = BRACKET_LO, f_or_none(BRACKET_LO)
    while flo is None and lo < -BRACKET_STEP / 2:
        lo += BRACKET_STEP
        flo = f_or_none(lo)
    hi, fhi = BRACKET_HI, f_or_none(BRACKET_HI)
    while fhi is None and hi > BRACKET_STEP / 2:
        hi -= BRACKET_STEP
        fhi = f_or_none(hi)
    if flo is None or fhi is None:
        raise UnreachableDisplacementError(
            f"no wing angle yields slider displacement {x!r} m"
        )
    while flo * fhi > 0.0:
        widened = False
        if lo > -BRACKET_LIMIT:
            v = f_or_none(lo - BRACKET_STEP)
            if v is not None:
                lo, flo = lo - BRACKET_STEP, v
                widened = True
        if flo * fhi > 0.0 and hi < BRACKET_LIMIT:
            v = f_or_none(hi + BRACKET_STEP)
            if v is not None:
                hi, fhi = hi + BRACKET_STEP, v
                widened = True
        if flo * fhi > 0.0 and not widened:
            raise UnreachableDisplacementError(
                f"no wing angle yields slider displacement {x!r} m"
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = slider_from_wing(link, mid) - x
        if abs(fm) < BISECT_RESIDUAL:
            return mid
        if flo * fm <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _crank_terms(link: ThoraxLinkage, x: float) -> tuple[CrankPose, float, float]:
    """Crank pose plus (sin_psi, cos_phi) in sqrt form, exact at dead centers."""
    s = link.d2 + x
    arg = (link.l4**2 + link.l5**2 - s**2) / (2.0 * link.l4 * link.l5)
    try:
        psi = clamped_arccos(arg, "crank angle")
    except ValidationError:
        raise DeadCenterOverrunError(
            f"slider displacement {x!r} m lies beyond a dead center "
            f"(reachable window [{link.slider_min!r}, {link.slider_max!r}] m)"
        ) from None
    arg = min(1.0, max(-1.0, arg))
    sin_psi = math.sqrt(1.0 - arg * arg)
    sin_phi = link.l5 * sin_psi / s
    phi = clamped_arcsin(sin_phi, "rod-to-vertical angle")
    cos_phi = math.sqrt(max(0.0, 1.0 - sin_phi * sin_phi))
    return CrankPose(psi=psi, phi=phi), sin_psi, cos_phi


def crank_pose(link: ThoraxLinkage, x: float) -> CrankPose:
    """Crank pose at slider displacement ``x``.

    cos(psi) = (l4^2 + l5^2 - (d2+x)^2)/(2*l4*l5), sin(phi) = l5*sin(psi)/(d2+x).
    Raises :class:`DeadCenterOverrunError` when ``x`` lies outside the window
    the crank can reach.
    """
    pose, _, _ = _crank_terms(link, x)
    return pose


def drive_force(link: ThoraxLinkage, tau: float, s: SliderState) -> float:
    """Vertical force on the slider from crank torque ``tau``, signed by stroke_dir.

    F1 = stroke_dir * (tau/l5) * sin(psi) * cos(phi); exactly zero at the dead
    centers where the crank cannot push.
    """
    _, sin_psi, cos_phi = _crank_terms(link, s.x)
    return s.stroke_dir * (tau / link.l5) * sin_psi * cos_phi


def spring_deflections(link: ThoraxLinkage, theta_A: float) -> tuple[float, float]:
    """Deflection magnitudes of the wall spring (theta_B) and base spring (theta_C).

    Both are zero in the neutral configuration, where Theta = pi/2 - delta(0).
    """
    theta_neutral = neutral_wall_angle(link)
    d = delta_angle(link, theta_A)
    theta_b = abs(theta_neutral - (math.pi / 2.0 - theta_A - d))
    theta_c = abs(theta_neutral - (math.pi / 2.0 - d))
    return theta_b, theta_c


def static_stroke(link: ThoraxLinkage, x_max: float) -> tuple[float, float]:
    """Wing angles reached at slider displacements +x_max and -x_max."""
    theta_up = wing_from_slider(link, +x_max)
    theta_down = wing_from_slider(link, -x_max)
    return theta_up, theta_down
