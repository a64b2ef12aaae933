"""Ideal slip-less motion models and the slip-vector computation.

All velocities are planar twists expressed in the vehicle body frame: the
x axis points along the longitudinal direction, y to the left, and positive
angular velocity is counter-clockwise seen from above. The slip twist is the
difference between what an ideal rolling vehicle would do for a command and
what the vehicle was observed doing; its magnitude is the per-step motion
distortion that the rest of the package summarizes and compares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParameterError

__all__ = [
    "BodyVelocity",
    "WheelCommand",
    "AckermannCommand",
    "VehicleSpec",
    "ideal_diff_drive",
    "ideal_bicycle",
    "slip",
    "slip_modulus",
]


def _check_finite(owner, **fields):
    for name, value in fields.items():
        if not math.isfinite(value):
            raise ParameterError(f"{owner}.{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class BodyVelocity:
    """Planar body twist: vx [m/s] longitudinal, vy [m/s] lateral, omega [rad/s].

    Value type with componentwise arithmetic; construction rejects NaN and
    infinity so they cannot propagate silently through a pipeline.
    """

    vx: float
    vy: float
    omega: float

    def __post_init__(self):
        _check_finite("BodyVelocity", vx=self.vx, vy=self.vy, omega=self.omega)

    def __add__(self, other):
        if not isinstance(other, BodyVelocity):
            return NotImplemented
        return BodyVelocity(self.vx + other.vx, self.vy + other.vy, self.omega + other.omega)

    def __sub__(self, other):
        if not isinstance(other, BodyVelocity):
            return NotImplemented
        return BodyVelocity(self.vx - other.vx, self.vy - other.vy, self.omega - other.omega)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return BodyVelocity(self.vx * scalar, self.vy * scalar, self.omega * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return BodyVelocity(-self.vx, -self.vy, -self.omega)

    def as_tuple(self):
        return (self.vx, self.vy, self.omega)


@dataclass(frozen=True)
class WheelCommand:
    """Timestamped left/right wheel angular velocities [rad/s] at time t [s]."""

    t: float
    omega_l: float
    omega_r: float

    def __post_init__(self):
        _check_finite("WheelCommand", t=self.t, omega_l=self.omega_l, omega_r=self.omega_r)


@dataclass(frozen=True)
class AckermannCommand:
    """Timestamped forward-speed / steering-angle command for a car-like vehicle.

    The steering angle must stay strictly inside (-pi/2, pi/2); at +/-pi/2 the
    front wheel is perpendicular to the chassis and the model degenerates.
    """

    t: float
    v_cmd: float
    delta: float

    def __post_init__(self):
        _check_finite("AckermannCommand", t=self.t, v_cmd=self.v_cmd, delta=self.delta)
        if abs(self.delta) >= math.pi / 2:
            raise ParameterError(
                f"steering angle must satisfy |delta| < pi/2, got {self.delta!r}"
            )


@dataclass(frozen=True)
class VehicleSpec:
    """Physical vehicle parameters.

    mass and v_max are always required (they define the kinetic-energy
    proxy). wheel_radius and track_width parameterize the differential-drive
    model and may be omitted for vehicles that only appear in a deployment
    catalog. wheelbase is needed only by the bicycle model.
    """

    name: str
    mass: float
    v_max: float
    wheel_radius: Optional[float] = None
    track_width: Optional[float] = None
    wheelbase: Optional[float] = None

    def __post_init__(self):
        if not self.name:
            raise ParameterError("VehicleSpec.name must be a non-empty string")
        for field_name in ("mass", "v_max"):
            value = getattr(self, field_name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"VehicleSpec.{field_name} must be positive, got {value!r}")
        for field_name in ("wheel_radius", "track_width", "wheelbase"):
            value = getattr(self, field_name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ParameterError(
                    f"VehicleSpec.{field_name} must be positive when given, got {value!r}"
                )


def ideal_diff_drive(cmd: WheelCommand, spec: VehicleSpec) -> BodyVelocity:
    """Body twist of a perfectly rolling skid-steer for one wheel command.

    The model is linear in the wheel speeds,

        vx    = r * (omega_l + omega_r) / 2
        vy    = 0
        omega = r * (omega_r - omega_l) / b,

    with wheel radius r and track width b. The lateral component is exactly
    zero: without slip a skid-steer cannot translate sideways.
    """
    if spec.wheel_radius is None or spec.track_width is None:
        raise ParameterError(
            f"vehicle {spec.name!r} needs wheel_radius and track_width for the "
            "differential-drive model"
        )
    r = spec.wheel_radius
    return BodyVelocity(
        r * (cmd.omega_l + cmd.omega_r) / 2.0,
        0.0,
        r * (cmd.omega_r - cmd.omega_l) / spec.track_width,
    )


def ideal_bicycle(cmd: AckermannCommand, spec: VehicleSpec) -> BodyVelocity:
    """Body twist of a kinematic bicycle evaluated at the rear axle.

    omega = v * tan(delta) / wheelbase, and the lateral velocity is zero at
    the rear axle by construction. This is the minimal slip-less analogue of
    the differential-drive model for Ackermann-steered vehicles.
    """
    if spec.wheelbase is None:
        raise ParameterError(f"vehicle {spec.name!r} needs wheelbase for the bicycle model")
    return BodyVelocity(
        cmd.v_cmd,
        0.0,
        cmd.v_cmd * math.tan(cmd.delta) / spec.wheelbase,
    )


def slip(ideal: BodyVelocity, observed: BodyVelocity) -> BodyVelocity:
    """Slip body velocity: the componentwise difference ideal - observed."""
    return ideal - observed


def slip_modulus(g: BodyVelocity, angular_weight: float = 1.0) -> float:
    """Magnitude of a slip twist, folding the angular term in via a length scale.

    Returns sqrt(gx^2 + gy^2 + (angular_weight * gomega)^2). The default
    weight of 1 m keeps the plain Euclidean norm of the mixed-unit triple;
    passing a different weight trades radians against meters explicitly.
    """
    if not (math.isfinite(angular_weight) and angular_weight >= 0.0):
        raise ParameterError(f"angular_weight must be >= 0, got {angular_weight!r}")
    gw = angular_weight * g.omega
    return math.sqrt(g.vx * g.vx + g.vy * g.vy + gw * gw)
