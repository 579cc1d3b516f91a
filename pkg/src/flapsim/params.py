"""Physical parameters of the flapper and the geometric quantities derived from them.

All values are SI internally (meters, kilograms, radians, seconds).  The thorax
is a pseudo-rigid crank-slider driving two wing-base linkages through torsional
spring joints; the wing planform is a simple quadrilateral; the abdomen is a
point mass on a seesaw rod behind the thorax.  Two named parameter presets
ship with the package: ``model`` (the design values) and ``prototype`` (the
as-built abdomen: shorter rod, lighter mass).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import GeometryError, ValidationError

ARC_CLAMP_TOL = 1e-12  # roundoff allowance at dead centers before hard-erroring

ABDOMEN_MODES = ("none", "fixed-mass", "undulating")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def clamped_arccos(arg: float, what: str) -> float:
    """arccos with a 1e-12 tolerance band outside [-1, 1]; beyond it, GeometryError."""
    if arg > 1.0:
        if arg > 1.0 + ARC_CLAMP_TOL:
            raise GeometryError(f"{what}: arccos argument {arg!r} > 1")
        arg = 1.0
    elif arg < -1.0:
        if arg < -1.0 - ARC_CLAMP_TOL:
            raise GeometryError(f"{what}: arccos argument {arg!r} < -1")
        arg = -1.0
    return math.acos(arg)


def clamped_arcsin(arg: float, what: str) -> float:
    """arcsin companion of :func:`clamped_arccos`."""
    if arg > 1.0:
        if arg > 1.0 + ARC_CLAMP_TOL:
            raise GeometryError(f"{what}: arcsin argument {arg!r} > 1")
        arg = 1.0
    elif arg < -1.0:
        if arg < -1.0 - ARC_CLAMP_TOL:
            raise GeometryError(f"{what}: arcsin argument {arg!r} < -1")
        arg = -1.0
    return math.asin(arg)


@dataclass(frozen=True)
class ThoraxLinkage:
    """Pseudo-rigid half-thorax: link lengths, crank-slider geometry, joint stiffness.

    Lengths in meters, stiffness in N*m/rad.  ``l1`` wing-base linkage, ``l2``
    thoracic-wall linkage, ``l3`` thorax-base linkage, ``l4`` slide linkage
    (connecting rod), ``l5`` crank, ``d1`` tergum length, ``d2`` neutral
    slider-to-crank-axis distance, ``K`` torsional stiffness shared by the
    three spring joints.
    """

    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    d1: float
    d2: float
    K: float

    DESIGN_STROKE: float = field(default=0.010, repr=False)  # designed slider travel, m

    def __post_init__(self):
        for name in ("l1", "l2", "l3", "l4", "l5", "d1", "d2"):
            _require(getattr(self, name) > 0.0, f"linkage.{name} must be positive")
        _require(self.K >= 0.0, "linkage.K must be nonnegative")
        _require(
            abs(self.l1 + self.d1 - self.l3) <= self.l2 * (1.0 + ARC_CLAMP_TOL),
            "linkage: |l1 + d1 - l3| must not exceed l2 (neutral wall angle undefined)",
        )
        s = self.DESIGN_STROKE
        _require(
            abs(self.l4 - self.l5) <= self.d2 - s,
            "linkage: crank-slider cannot fold to the design downstroke "
            "(|l4 - l5| > d2 - design stroke)",
        )
        _require(
            self.d2 + s <= self.l4 + self.l5,
            "linkage: crank-slider cannot extend to the design upstroke "
            "(d2 + design stroke > l4 + l5)",
        )

    @property
    def slider_max(self) -> float:
        """Slider displacement at the extended dead center (crank and rod aligned)."""
        return self.l4 + self.l5 - self.d2

    @property
    def slider_min(self) -> float:
        """Slider displacement at the folded dead center."""
        return abs(self.l4 - self.l5) - self.d2


@dataclass(frozen=True)
class HingeSpec:
    """Flexural hinge treated as a small cantilever: modulus and cross-section."""

    E: float  # Young's modulus, Pa
    b: float  # width, m
    t: float  # thickness, m
    H: float  # length, m

    def __post_init__(self):
        for name in ("E", "b", "t", "H"):
            _require(getattr(self, name) > 0.0, f"hinge.{name} must be positive")


@dataclass(frozen=True)
class WingGeometry:
    """One-wing planform and inertia.

    ``l6`` span along the flapping axis, ``l7`` hindwing inner-edge length,
    ``c_r`` root chord, ``Phi`` angle between the hindwing inner edge and the
    flapping axis (rad), ``I_wing`` half-wing moment of inertia about the
    flapping axis, ``R_C`` spanwise mass-center position, ``m1`` half-wing mass.
    """

    l6: float
    l7: float
    c_r: float
    Phi: float
    I_wing: float
    R_C: float
    m1: float

    def __post_init__(self):
        for name in ("l6", "l7", "c_r", "Phi", "I_wing", "R_C", "m1"):
            _require(getattr(self, name) > 0.0, f"wing.{name} must be positive")
        _require(self.Phi < math.pi / 2, "wing.Phi must lie in (0, pi/2)")
        _require(
            self.l7 * math.sin(self.Phi) < self.l6,
            "wing: trailing corner must sit inboard of the tip (l7*sin(Phi) < l6)",
        )

    @property
    def r_break(self) -> float:
        """Spanwise station of the trailing corner, where the chord law changes."""
        return self.l7 * math.sin(self.Phi)


@dataclass(frozen=True)
class AbdomenParams:
    """Seesaw abdomen: pivot offsets from the slider, rod length, point mass.

    ``d3`` horizontal pivot-to-slider distance, ``d4`` vertical pivot offset of
    the slider's neutral position, ``d5`` pivot-to-mass distance, ``m2``
    abdomen mass, ``d_c`` distance from the vehicle mass center to its
    foremost point.  ``m2`` may be zero (massless limit used in sweeps).
    """

    d3: float
    d4: float
    d5: float
    m2: float
    d_c: float

    def __post_init__(self):
        for name in ("d3", "d5", "d_c"):
            _require(getattr(self, name) > 0.0, f"abdomen.{name} must be positive")
        _require(self.m2 >= 0.0, "abdomen.m2 must be nonnegative")


@dataclass(frozen=True)
class Environment:
    """Ambient air and gravity."""

    rho: float = 1.225  # air density, kg/m^3
    nu: float = 1.5e-5  # kinematic viscosity, m^2/s
    g: float = 9.81  # gravitational acceleration, m/s^2

    def __post_init__(self):
        for name in ("rho", "nu", "g"):
            _require(getattr(self, name) > 0.0, f"env.{name} must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Run controls for the wing integrator.

    ``tau`` constant crank torque, ``alpha`` fixed angle of attack, ``dt``
    integration step, ``duration`` simulated span, ``n_strips`` blade elements
    per half wing, ``hinges_enabled`` includes/excludes the torsional springs,
    ``abdomen_mode`` selects the abdomen treatment for coupled runs,
    ``aero_enabled`` switches the quasi-steady force model (off only for dry
    runs and conservative checks), ``initial_angle`` overrides the release
    angle (None = maximum upstroke).
    """

    tau: float = 0.03
    alpha: float = math.radians(70.0)
    dt: float = 2e-5
    duration: float = 2.0
    n_strips: int = 256
    hinges_enabled: bool = True
    abdomen_mode: str = "undulating"
    aero_enabled: bool = True
    initial_angle: Optional[float] = None

    def __post_init__(self):
        _require(self.dt > 0.0, "sim.dt must be positive")
        _require(self.duration >= 10.0 * self.dt, "sim.duration must be at least 10*dt")
        _require(self.n_strips >= 8, "sim.n_strips must be at least 8")
        _require(self.tau >= 0.0, "sim.tau must be nonnegative")
        _require(0.0 < self.alpha <= math.pi / 2, "sim.alpha must lie in (0, pi/2]")
        _require(
            self.abdomen_mode in ABDOMEN_MODES,
            f"sim.abdomen_mode must be one of {ABDOMEN_MODES}",
        )


def hinge_stiffness(spec: HingeSpec) -> float:
    """Torsional stiffness of a flexural hinge, E*(b*t^3/12)/H in N*m/rad."""
    return spec.E * (spec.b * spec.t**3 / 12.0) / spec.H


def neutral_wall_angle(link: ThoraxLinkage) -> float:
    """Angle between the thoracic-wall linkage and the horizontal at rest.

    arccos((l1 + d1 - l3)/l2); the unloaded slider sits at the neutral point
    and the wing is horizontal.
    """
    arg = (link.l1 + link.d1 - link.l3) / link.l2
    return clamped_arccos(arg, "neutral wall angle")


def chord_at(wing: WingGeometry, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Chord of the quadrilateral planform at spanwise station ``r``.

    Inboard of the trailing corner the trailing edge runs along the hindwing
    inner edge (c = c_r + r*cot(Phi)); outboard it closes linearly to a point
    at the tip.  Spanwise mean of this distribution equals :func:`mean_chord`.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > wing.l6):
        raise ValidationError("chord_at: spanwise position outside [0, l6]")
    a = wing.r_break
    c_peak = wing.c_r + wing.l7 * math.cos(wing.Phi)
    inner = wing.c_r + arr / math.tan(wing.Phi)
    outer = c_peak * (wing.l6 - arr) / (wing.l6 - a)
    out = np.where(arr <= a, inner, outer)
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


def mean_chord(wing: WingGeometry) -> float:
    """Mean chord of the planform: c_r*l7*sin(Phi)/(2*l6) + c_r/2 + l7*cos(Phi)/2."""
    return (
        wing.c_r * wing.l7 * math.sin(wing.Phi) / (2.0 * wing.l6)
        + wing.c_r / 2.0
        + wing.l7 * math.cos(wing.Phi) / 2.0
    )


def second_moment_radius(wing: WingGeometry, n: int = 4096) -> float:
    """Radius of the second moment of area, sqrt(integral(c*r^2)/S) with S = mean_chord*l6.

    Composite Simpson quadrature with ``n`` intervals (rounded up to even).
    """
    _require(n >= 64, "second_moment_radius: need at least 64 quadrature points")
    n = n + (n % 2)
    r = np.linspace(0.0, wing.l6, n + 1)
    f = chord_at(wing, r) * r**2
    h = wing.l6 / n
    integral = (h / 3.0) * (f[0] + f[-1] + 4.0 * np.sum(f[1:-1:2]) + 2.0 * np.sum(f[2:-1:2]))
    S = mean_chord(wing) * wing.l6
    return math.sqrt(integral / S)


def reynolds(
    wing: WingGeometry,
    f: float,
    stroke: float,
    env: Environment,
    n: int = 4096,
) -> float:
    """Flapping Reynolds number from mean chord and the second-moment reference speed.

    The reference speed is f*l with l the arc length swept per cycle by the
    point at the second-moment radius: both half-strokes, so l = 2*stroke*R2.
    """
    _require(f > 0.0, "reynolds: flapping frequency must be positive")
    _require(stroke > 0.0, "reynolds: stroke amplitude must be positive")
    r2 = second_moment_radius(wing, n)
    u_ref = f * 2.0 * stroke * r2
    return mean_chord(wing) * u_ref / env.nu


@dataclass(frozen=True)
class Preset:
    """A complete, validated parameter bundle for one vehicle configuration."""

    name: str
    linkage: ThoraxLinkage
    wing: WingGeometry
    abdomen: AbdomenParams
    env: Environment
    sim: SimConfig

    def with_sim(self, **kwargs) -> "Preset":
        return replace(self, sim=replace(self.sim, **kwargs))


_LINKAGE = ThoraxLinkage(
    l1=14.95e-3,
    l2=13.49e-3,
    l3=13.75e-3,
    l4=30.0e-3,
    l5=10.0e-3,
    d1=4.89e-3,
    d2=30.0e-3,
    K=1.57e-3,
)

_WING = WingGeometry(
    l6=190.0e-3,
    l7=100.0e-3,
    c_r=65.0e-3,
    Phi=math.radians(10.0),
    I_wing=3.98e-6,
    R_C=81.7e-3,
    m1=0.425e-3,
)

_ABDOMEN_MODEL = AbdomenParams(d3=55.0e-3, d4=3.75e-3, d5=150.0e-3, m2=2.0e-3, d_c=60.0e-3)

# as-built abdomen: shorter rod, lighter ring stack
_ABDOMEN_PROTOTYPE = AbdomenParams(d3=55.0e-3, d4=3.75e-3, d5=80.0e-3, m2=1.8e-3, d_c=60.0e-3)

PRESET_NAMES = ("model", "prototype")


def preset(name: str = "model") -> Preset:
    """Return a named parameter preset ('model' or 'prototype')."""
    if name == "model":
        abdomen = _ABDOMEN_MODEL
    elif name == "prototype":
        abdomen = _ABDOMEN_PROTOTYPE
    else:
        raise ValidationError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return Preset(
        name=name,
        linkage=_LINKAGE,
        wing=_WING,
        abdomen=abdomen,
        env=Environment(),
        sim=SimConfig(),
    )
