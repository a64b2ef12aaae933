"""Synthetic command/velocity/pose generation with configurable slip and lag.

This is an evaluation harness for the distortion pipeline, not a physics
claim: it injects known amounts of longitudinal slip, lateral coupling,
angular scaling, first-order response lag, and sensor noise, so the metric
can be checked against closed-form expectations. Outputs are written in the
ingest CSV formats, so simulated data flows through the exact same pipeline
as real logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .configfile import read_kv_file
from .errors import ParameterError, ParseError
from .ingest import (
    PoseSample,
    TimedVelocity,
    write_command_csv,
    write_pose_csv,
    write_sidecar,
    write_velocity_csv,
)
from .kinematics import BodyVelocity, VehicleSpec, WheelCommand

__all__ = [
    "SlipModel",
    "IDENTITY_SLIP",
    "Scenario",
    "PROFILES",
    "generate_commands",
    "apply_slip",
    "write_dataset",
    "load_scenario",
    "run_scenario",
]

PROFILES = ("ramp", "step", "sine", "random_walk", "mixed")


@dataclass(frozen=True)
class SlipModel:
    """Generative slip and lag model applied to ideal twists.

    lon_slip      fraction of longitudinal velocity lost, in [0, 1)
    lat_coupling  lateral velocity per unit yaw rate, scaled by track width
    ang_scale     fraction of the ideal yaw rate realized, in (0, 1]
    tau           first-order lag time constant [s]; 0 is instantaneous
    noise_sigma   std of additive Gaussian noise on each velocity channel
    """

    lon_slip: float = 0.0
    lat_coupling: float = 0.0
    ang_scale: float = 1.0
    tau: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lon_slip < 1.0):
            raise ParameterError(f"lon_slip must lie in [0, 1), got {self.lon_slip!r}")
        if not (0.0 < self.ang_scale <= 1.0):
            raise ParameterError(f"ang_scale must lie in (0, 1], got {self.ang_scale!r}")
        if not (math.isfinite(self.tau) and self.tau >= 0.0):
            raise ParameterError(f"tau must be >= 0, got {self.tau!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0.0):
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        if not math.isfinite(self.lat_coupling):
            raise ParameterError(f"lat_coupling must be finite, got {self.lat_coupling!r}")


IDENTITY_SLIP = SlipModel()


def _require_geometry(spec: VehicleSpec):
    if spec.wheel_radius is None or spec.track_width is None:
        raise ParameterError(
            f"vehicle {spec.name!r} needs wheel_radius and track_width for simulation"
        )


def generate_commands(
    profile: str,
    duration: float,
    dt: float,
    spec: VehicleSpec,
    seed: int = 0,
    step_time: Optional[float] = None,
    sine_freq: float = 0.1,
) -> List[WheelCommand]:
    """Deterministic wheel-command stream for a named excitation profile.

    Profiles: ``ramp`` (linear spin-up to full speed), ``step`` (idle, then a
    jump to full speed at step_time, default mid-run), ``sine`` (smooth speed
    and yaw oscillation), ``random_walk`` (seeded bounded wander), ``mixed``
    (the four in sequence, a quarter of the duration each). Wheel speeds are
    bounded so the ideal longitudinal speed never exceeds spec.v_max.
    """
    if profile not in PROFILES:
        raise ParameterError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    if not (duration > 0 and dt > 0):
        raise ParameterError(f"duration and dt must be positive, got {duration!r}, {dt!r}")
    if sine_freq <= 0:
        raise ParameterError(f"sine_freq must be positive, got {sine_freq!r}")
    if step_time is not None and not (0.0 <= step_time < duration):
        raise ParameterError(f"step_time must lie in [0, duration), got {step_time!r}")
    _require_geometry(spec)

    n = max(int(round(duration / dt)), 1)
    t = np.arange(n) * dt
    wl, wr = _profile_wheels(profile, t, duration, dt, spec, seed, step_time, sine_freq)
    return [WheelCommand(float(ti), float(a), float(b)) for ti, a, b in zip(t, wl, wr)]


def _profile_wheels(profile, t, duration, dt, spec, seed, step_time, sine_freq):
    r, b = spec.wheel_radius, spec.track_width
    omega_max = spec.v_max / r
    n = t.size
    if profile == "ramp":
        w = omega_max * t / duration
        return w, w.copy()
    if profile == "step":
        at = duration / 2.0 if step_time is None else step_time
        w = np.where(t >= at - 1e-12, omega_max, 0.0)
        return w, w.copy()
    if profile == "sine":
        # Speed swings over [0, v_max] starting from rest; yaw rate oscillates
        # in quadrature with a modest amplitude.
        fx = 0.5 * spec.v_max * (1.0 + np.sin(2.0 * math.pi * sine_freq * t - math.pi / 2.0))
        fomega = (0.5 * spec.v_max / b) * np.sin(2.0 * math.pi * sine_freq * t)
        wl = (fx - 0.5 * b * fomega) / r
        wr = (fx + 0.5 * b * fomega) / r
        # The yaw term cancels in fx, so the v_max bound is preserved exactly.
        return wl, wr
    if profile == "random_walk":
        rng = np.random.default_rng(seed)
        steps = rng.normal(0.0, 0.05 * omega_max, size=(n, 2))
        walk = np.clip(np.cumsum(steps, axis=0), -omega_max, omega_max)
        return walk[:, 0], walk[:, 1]
    # mixed: one quarter each of ramp, step, sine, random_walk
    quarter = duration / 4.0
    n_seg = [n // 4, n // 4, n // 4, n - 3 * (n // 4)]
    parts_l, parts_r = [], []
    for segment, seg_n in zip(("ramp", "step", "sine", "random_walk"), n_seg):
        if seg_n == 0:
            continue
        seg_t = np.arange(seg_n) * dt
        seg_l, seg_r = _profile_wheels(
            segment, seg_t, max(quarter, seg_n * dt), dt, spec, seed, None, sine_freq
        )
        parts_l.append(seg_l)
        parts_r.append(seg_r)
    return np.concatenate(parts_l), np.concatenate(parts_r)


def apply_slip(
    commands: Sequence[WheelCommand],
    spec: VehicleSpec,
    model: SlipModel,
    seed: int = 0,
) -> Tuple[List[TimedVelocity], List[PoseSample]]:
    """Observed velocities and integrated poses for a command stream.

    Velocity targets per step: vx = (1 - lon_slip) * fx, vy = lat_coupling *
    track_width * fomega, omega = ang_scale * fomega, where f is the ideal
    differential-drive twist. With tau > 0 the observed velocity starts from
    rest and follows the explicit first-order update
    ``v += (dt / tau) * (target - v)`` (a tau at or below dt degrades to an
    instantaneous response). Gaussian noise is added per channel afterwards.
    Poses integrate the observed twist with a second-order midpoint scheme
    (trapezoidal velocities, mid-interval heading).
    """
    if len(commands) == 0:
        raise ParameterError("empty command stream")
    _require_geometry(spec)
    r, b = spec.wheel_radius, spec.track_width

    t = np.array([c.t for c in commands], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ParameterError("command timestamps must be strictly increasing")
    wl = np.array([c.omega_l for c in commands], dtype=float)
    wr = np.array([c.omega_r for c in commands], dtype=float)
    fx = r * (wl + wr) / 2.0
    fomega = r * (wr - wl) / b

    target = np.column_stack(
        (
            (1.0 - model.lon_slip) * fx,
            model.lat_coupling * b * fomega,
            model.ang_scale * fomega,
        )
    )
    n = t.size
    if model.tau == 0.0:
        v = target.copy()
    else:
        v = np.zeros_like(target)
        dts = np.diff(t)
        for k in range(1, n):
            coeff = min(dts[k - 1] / model.tau, 1.0)
            v[k] = v[k - 1] + coeff * (target[k - 1] - v[k - 1])
    if model.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        v = v + rng.normal(0.0, model.noise_sigma, size=v.shape)

    velocities = [
        (float(ti), BodyVelocity(float(row[0]), float(row[1]), float(row[2])))
        for ti, row in zip(t, v)
    ]

    # Pose integration: trapezoidal yaw, then displacement along the
    # mid-interval heading with trapezoidal body velocity.
    yaw = np.empty(n)
    yaw[0] = 0.0
    if n > 1:
        dts = np.diff(t)
        yaw[1:] = np.cumsum(0.5 * dts * (v[:-1, 2] + v[1:, 2]))
    x = np.empty(n)
    y = np.empty(n)
    x[0] = y[0] = 0.0
    for k in range(n - 1):
        dt_k = t[k + 1] - t[k]
        yaw_mid = 0.5 * (yaw[k] + yaw[k + 1])
        vx_mid = 0.5 * (v[k, 0] + v[k + 1, 0])
        vy_mid = 0.5 * (v[k, 1] + v[k + 1, 1])
        c_mid, s_mid = math.cos(yaw_mid), math.sin(yaw_mid)
        x[k + 1] = x[k] + dt_k * (vx_mid * c_mid - vy_mid * s_mid)
        y[k + 1] = y[k] + dt_k * (vx_mid * s_mid + vy_mid * c_mid)

    poses = [
        PoseSample(float(ti), float(xi), float(yi), float(yawi))
        for ti, xi, yi, yawi in zip(t, x, y, yaw)
    ]
    return velocities, poses


def write_dataset(
    directory,
    spec: VehicleSpec,
    terrain: str,
    commands: Sequence[WheelCommand],
    velocities: Sequence[TimedVelocity],
    poses: Sequence[PoseSample],
    name: Optional[str] = None,
) -> Path:
    """Write a dataset directory in the ingest formats; returns the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_sidecar(directory / "dataset.toml", spec, terrain, name=name)
    write_command_csv(directory / "commands.csv", commands)
    write_velocity_csv(directory / "velocities.csv", velocities)
    write_pose_csv(directory / "poses.csv", poses)
    return directory


# ---------------------------------------------------------------------------
# Scenario config files

_SCENARIO_DEFAULTS = {
    "name": "sim",
    "profile": "step",
    "duration": 10.0,
    "dt": 0.05,
    "seed": 0,
    "step_time": None,
    "sine_freq": 0.1,
    "lon_slip": 0.0,
    "lat_coupling": 0.0,
    "ang_scale": 1.0,
    "tau": 0.0,
    "noise_sigma": 0.0,
    "vehicle": "simbot",
    "wheel_radius": 0.3,
    "track_width": 1.2,
    "mass": 100.0,
    "v_max": 1.0,
    "terrain": "asphalt",
}


@dataclass(frozen=True)
class Scenario:
    """Fully resolved simulation scenario: profile, slip model, vehicle, seed."""

    name: str
    profile: str
    duration: float
    dt: float
    seed: int
    slip: SlipModel
    vehicle: VehicleSpec
    terrain: str
    step_time: Optional[float] = None
    sine_freq: float = 0.1


def load_scenario(path) -> Scenario:
    """Read a scenario config (``key = value``); unknown keys are rejected."""
    data = read_kv_file(path)
    unknown = [k for k in data if k not in _SCENARIO_DEFAULTS]
    if unknown:
        raise ParseError(f"unknown keys: {', '.join(sorted(unknown))}", path=path)
    merged = dict(_SCENARIO_DEFAULTS)
    merged.update(data)

    def number(key):
        value = merged[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"key {key!r} must be a number, got {value!r}", path=path)
        return float(value)

    slip = SlipModel(
        lon_slip=number("lon_slip"),
        lat_coupling=number("lat_coupling"),
        ang_scale=number("ang_scale"),
        tau=number("tau"),
        noise_sigma=number("noise_sigma"),
    )
    vehicle = VehicleSpec(
        name=str(merged["vehicle"]),
        mass=number("mass"),
        v_max=number("v_max"),
        wheel_radius=number("wheel_radius"),
        track_width=number("track_width"),
    )
    return Scenario(
        name=str(merged["name"]),
        profile=str(merged["profile"]),
        duration=number("duration"),
        dt=number("dt"),
        seed=int(number("seed")),
        slip=slip,
        vehicle=vehicle,
        terrain=str(merged["terrain"]),
        step_time=None if merged["step_time"] is None else number("step_time"),
        sine_freq=number("sine_freq"),
    )


def run_scenario(scenario: Scenario, out_dir, seed: Optional[int] = None) -> Path:
    """Generate, slip-distort, and write one scenario as a dataset directory."""
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    commands = generate_commands(
        scenario.profile,
        scenario.duration,
        scenario.dt,
        scenario.vehicle,
        seed=scenario.seed,
        step_time=scenario.step_time,
        sine_freq=scenario.sine_freq,
    )
    velocities, poses = apply_slip(commands, scenario.vehicle, scenario.slip, seed=scenario.seed)
    return write_dataset(
        out_dir,
        scenario.vehicle,
        scenario.terrain,
        commands,
        velocities,
        poses,
        name=scenario.name,
    )
