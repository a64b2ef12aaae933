"""Deployment-log ingestion: CSV parsing, pose differentiation, alignment.

File formats (UTF-8, '.' decimal separator, LF or CRLF line endings):

    commands.csv    header ``t,omega_l,omega_r``   (SI units)
    poses.csv       header ``t,x,y,yaw``
    velocities.csv  header ``t,vx,vy,omega``       (body frame)
    dataset.toml    ``key = value`` sidecar, see :func:`load_sidecar`

Timestamps are opaque seconds and must be strictly increasing within a
stream. Rows with non-finite or unparseable numbers are rejected with the
offending line number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .configfile import read_kv_file, write_kv_file
from .errors import AlignmentError, InsufficientDataError, ParameterError, ParseError
from .fileio import atomic_write_text, fmt_float
from .kinematics import BodyVelocity, VehicleSpec, WheelCommand

__all__ = [
    "PoseSample",
    "AlignedDataset",
    "wrap_angle",
    "parse_log",
    "parse_command_csv",
    "parse_pose_csv",
    "parse_velocity_csv",
    "body_velocity_from_poses",
    "align",
    "load_sidecar",
    "write_sidecar",
    "load_dataset",
    "write_command_csv",
    "write_pose_csv",
    "write_velocity_csv",
    "iter_csv_rows",
]

SIDECAR_FILENAME = "dataset.toml"
COMMANDS_FILENAME = "commands.csv"
POSES_FILENAME = "poses.csv"
VELOCITIES_FILENAME = "velocities.csv"

DEFAULT_GRID_DT = 0.05
DEFAULT_MAX_GAP = 0.2

TimedVelocity = Tuple[float, BodyVelocity]


def wrap_angle(angle):
    """Wrap an angle (scalar or array) into (-pi, pi]."""
    return math.pi - (math.pi - np.asarray(angle)) % (2.0 * math.pi)


@dataclass(frozen=True)
class PoseSample:
    """Timestamped planar pose; yaw is normalized into (-pi, pi] on construction."""

    t: float
    x: float
    y: float
    yaw: float

    def __post_init__(self):
        for name in ("t", "x", "y", "yaw"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"PoseSample.{name} must be finite, got {value!r}")
        object.__setattr__(self, "yaw", float(wrap_angle(self.yaw)))


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """Command and velocity streams resampled onto one shared time grid.

    Both streams are stored as parallel arrays over the same ``t`` so the
    equal-length / identical-timestamp invariant holds by construction.
    """

    name: str
    vehicle: Optional[VehicleSpec]
    terrain: str
    grid_dt: float
    t: np.ndarray
    omega_l: np.ndarray
    omega_r: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        if self.grid_dt <= 0:
            raise ParameterError(f"grid_dt must be positive, got {self.grid_dt!r}")
        arrays = {}
        for field_name in ("t", "omega_l", "omega_r", "vx", "vy", "omega"):
            arrays[field_name] = np.asarray(getattr(self, field_name), dtype=float)
            object.__setattr__(self, field_name, arrays[field_name])
        lengths = {a.shape for a in arrays.values()}
        if len(lengths) != 1:
            raise ParameterError(f"aligned channels must share one length, got {lengths}")

    def __len__(self):
        return self.t.size

    def commands(self) -> List[WheelCommand]:
        return [
            WheelCommand(float(t), float(wl), float(wr))
            for t, wl, wr in zip(self.t, self.omega_l, self.omega_r)
        ]

    def velocities(self) -> List[TimedVelocity]:
        return [
            (float(t), BodyVelocity(float(vx), float(vy), float(om)))
            for t, vx, vy, om in zip(self.t, self.vx, self.vy, self.omega)
        ]


def iter_csv_rows(path, columns):
    """Yield (line_number, values) for the named numeric columns of a CSV file.

    Validates the header, numeric parsing, and finiteness; other columns are
    ignored. The header is line 1, so the first data row reports line 2.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path=path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"empty file, expected header {','.join(columns)}", path=path, line=1)
        missing = [c for c in columns if c not in header]
        if missing:
            raise ParseError(f"missing columns: {', '.join(missing)}", path=path, line=1)
        indices = [header.index(c) for c in columns]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", path=path, line=lineno)
            values = []
            for column, index in zip(columns, indices):
                text = row[index].strip()
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(f"column {column!r}: cannot parse {text!r}", path=path, line=lineno)
                if not math.isfinite(value):
                    raise ParseError(f"column {column!r}: non-finite value {text!r}", path=path, line=lineno)
                values.append(value)
            yield lineno, values


def _check_increasing(previous, current, path, lineno):
    if previous is not None and current <= previous:
        raise ParseError(
            f"timestamp {current!r} does not increase past {previous!r}", path=path, line=lineno
        )


def parse_command_csv(path) -> List[WheelCommand]:
    out, prev = [], None
    for lineno, (t, wl, wr) in iter_csv_rows(path, ("t", "omega_l", "omega_r")):
        _check_increasing(prev, t, path, lineno)
        prev = t
        out.append(WheelCommand(t, wl, wr))
    return out


def parse_pose_csv(path) -> List[PoseSample]:
    out, prev = [], None
    for lineno, (t, x, y, yaw) in iter_csv_rows(path, ("t", "x", "y", "yaw")):
        _check_increasing(prev, t, path, lineno)
        prev = t
        out.append(PoseSample(t, x, y, yaw))
    return out


def parse_velocity_csv(path) -> List[TimedVelocity]:
    out, prev = [], None
    for lineno, (t, vx, vy, om) in iter_csv_rows(path, ("t", "vx", "vy", "omega")):
        _check_increasing(prev, t, path, lineno)
        prev = t
        out.append((t, BodyVelocity(vx, vy, om)))
    return out


_PARSERS = {
    "command_csv": parse_command_csv,
    "pose_csv": parse_pose_csv,
    "velocity_csv": parse_velocity_csv,
}


def parse_log(path, format: str):
    """Parse a log file in one of the supported formats.

    format is one of ``command_csv``, ``pose_csv``, ``velocity_csv``.
    """
    try:
        parser = _PARSERS[format]
    except KeyError:
        raise ParameterError(f"unknown log format {format!r}; expected one of {sorted(_PARSERS)}")
    return parser(path)


def body_velocity_from_poses(poses: Sequence[PoseSample]) -> List[TimedVelocity]:
    """Estimate body velocities from a pose sequence by finite differences.

    Interior samples use central differences, which are second-order accurate
    and exact for straight-line motion and for rotation in place; the two
    endpoints fall back to one-sided differences. World-frame displacement
    rates are rotated into the body frame of the middle sample, and yaw is
    unwrapped before differencing so crossing the +/-pi seam does not spike
    the yaw rate.
    """
    if len(poses) < 3:
        raise InsufficientDataError(f"need at least 3 poses, got {len(poses)}")
    t = np.array([p.t for p in poses], dtype=float)
    if np.any(np.diff(t) <= 0):
        bad = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 1
        raise ParseError(f"pose timestamps must be strictly increasing (sample index {bad})")
    x = np.array([p.x for p in poses], dtype=float)
    y = np.array([p.y for p in poses], dtype=float)
    yaw = np.unwrap(np.array([p.yaw for p in poses], dtype=float))

    n = t.size
    vx_world = np.empty(n)
    vy_world = np.empty(n)
    omega = np.empty(n)
    span = t[2:] - t[:-2]
    vx_world[1:-1] = (x[2:] - x[:-2]) / span
    vy_world[1:-1] = (y[2:] - y[:-2]) / span
    omega[1:-1] = (yaw[2:] - yaw[:-2]) / span
    vx_world[0] = (x[1] - x[0]) / (t[1] - t[0])
    vy_world[0] = (y[1] - y[0]) / (t[1] - t[0])
    omega[0] = (yaw[1] - yaw[0]) / (t[1] - t[0])
    vx_world[-1] = (x[-1] - x[-2]) / (t[-1] - t[-2])
    vy_world[-1] = (y[-1] - y[-2]) / (t[-1] - t[-2])
    omega[-1] = (yaw[-1] - yaw[-2]) / (t[-1] - t[-2])

    c, s = np.cos(yaw), np.sin(yaw)
    vx_body = c * vx_world + s * vy_world
    vy_body = -s * vx_world + c * vy_world
    return [
        (float(ti), BodyVelocity(float(vxi), float(vyi), float(omi)))
        for ti, vxi, vyi, omi in zip(t, vx_body, vy_body, omega)
    ]


def _nearest_distance(query: np.ndarray, samples: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(samples, query)
    left = np.clip(idx - 1, 0, samples.size - 1)
    right = np.clip(idx, 0, samples.size - 1)
    return np.minimum(np.abs(query - samples[left]), np.abs(samples[right] - query))


def align(
    commands: Sequence[WheelCommand],
    velocities: Sequence[TimedVelocity],
    grid_dt: float = DEFAULT_GRID_DT,
    max_gap: float = DEFAULT_MAX_GAP,
    *,
    name: str = "dataset",
    vehicle: Optional[VehicleSpec] = None,
    terrain: str = "unknown",
) -> AlignedDataset:
    """Resample both streams onto a shared uniform grid over their overlap.

    All channels are linearly interpolated; the grid never extends past
    either stream, so nothing is extrapolated. Grid points farther than
    max_gap from the nearest raw sample of either stream are dropped, so
    holes in a log are not papered over by interpolation.
    """
    if grid_dt <= 0:
        raise ParameterError(f"grid_dt must be positive, got {grid_dt!r}")
    if max_gap < grid_dt:
        raise ParameterError(f"max_gap ({max_gap!r}) must be >= grid_dt ({grid_dt!r})")
    if len(commands) == 0:
        raise InsufficientDataError("empty command stream")
    if len(velocities) == 0:
        raise InsufficientDataError("empty velocity stream")

    tc = np.array([c.t for c in commands], dtype=float)
    tv = np.array([t for t, _ in velocities], dtype=float)
    t0 = max(tc[0], tv[0])
    t1 = min(tc[-1], tv[-1])
    if t0 > t1:
        raise AlignmentError(
            f"streams do not overlap: commands span [{tc[0]}, {tc[-1]}], "
            f"velocities span [{tv[0]}, {tv[-1]}]"
        )

    count = int(math.floor((t1 - t0) / grid_dt + 1e-9)) + 1
    grid = t0 + np.arange(count) * grid_dt
    keep = (_nearest_distance(grid, tc) <= max_gap) & (_nearest_distance(grid, tv) <= max_gap)
    grid = grid[keep]
    if grid.size == 0:
        raise AlignmentError("no grid point lies within max_gap of both streams")

    wl = np.interp(grid, tc, np.array([c.omega_l for c in commands], dtype=float))
    wr = np.interp(grid, tc, np.array([c.omega_r for c in commands], dtype=float))
    vx = np.interp(grid, tv, np.array([v.vx for _, v in velocities], dtype=float))
    vy = np.interp(grid, tv, np.array([v.vy for _, v in velocities], dtype=float))
    om = np.interp(grid, tv, np.array([v.omega for _, v in velocities], dtype=float))
    return AlignedDataset(name, vehicle, terrain, grid_dt, grid, wl, wr, vx, vy, om)


# Sidecar keys: name (optional), vehicle, wheel_radius, track_width, mass,
# v_max, terrain, wheelbase (optional).
_SIDECAR_REQUIRED = ("vehicle", "wheel_radius", "track_width", "mass", "v_max", "terrain")
_SIDECAR_OPTIONAL = ("name", "wheelbase")


def load_sidecar(path) -> Tuple[Optional[str], VehicleSpec, str]:
    """Read a dataset sidecar; returns (dataset name or None, vehicle, terrain)."""
    data = read_kv_file(path)
    missing = [k for k in _SIDECAR_REQUIRED if k not in data]
    if missing:
        raise ParseError(f"missing keys: {', '.join(missing)}", path=path)
    unknown = [k for k in data if k not in _SIDECAR_REQUIRED + _SIDECAR_OPTIONAL]
    if unknown:
        raise ParseError(f"unknown keys: {', '.join(sorted(unknown))}", path=path)

    def as_float(key):
        value = data[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"key {key!r} must be a number, got {value!r}", path=path)
        return float(value)

    wheelbase = None
    if "wheelbase" in data:
        value = data["wheelbase"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"key 'wheelbase' must be a number, got {value!r}", path=path)
        wheelbase = float(value)
    spec = VehicleSpec(
        name=str(data["vehicle"]),
        mass=as_float("mass"),
        v_max=as_float("v_max"),
        wheel_radius=as_float("wheel_radius"),
        track_width=as_float("track_width"),
        wheelbase=wheelbase,
    )
    name = data.get("name")
    return (str(name) if name is not None else None), spec, str(data["terrain"])


def write_sidecar(path, spec: VehicleSpec, terrain: str, name: Optional[str] = None) -> Path:
    data = {}
    if name is not None:
        data["name"] = name
    data.update(
        vehicle=spec.name,
        wheel_radius=spec.wheel_radius,
        track_width=spec.track_width,
        mass=spec.mass,
        v_max=spec.v_max,
        terrain=terrain,
        wheelbase=spec.wheelbase,
    )
    return write_kv_file(path, data)


def _csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt_float(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_command_csv(path, commands: Sequence[WheelCommand]) -> Path:
    rows = ((c.t, c.omega_l, c.omega_r) for c in commands)
    return atomic_write_text(path, _csv_text(("t", "omega_l", "omega_r"), rows))


def write_pose_csv(path, poses: Sequence[PoseSample]) -> Path:
    rows = ((p.t, p.x, p.y, p.yaw) for p in poses)
    return atomic_write_text(path, _csv_text(("t", "x", "y", "yaw"), rows))


def write_velocity_csv(path, velocities: Sequence[TimedVelocity]) -> Path:
    rows = ((t, v.vx, v.vy, v.omega) for t, v in velocities)
    return atomic_write_text(path, _csv_text(("t", "vx", "vy", "omega"), rows))


def load_dataset(directory, grid_dt: float = DEFAULT_GRID_DT, max_gap: float = DEFAULT_MAX_GAP) -> AlignedDataset:
    """Load a dataset directory (sidecar + commands + poses or velocities).

    Prefers ``velocities.csv`` when both velocity sources are present; poses
    are differentiated with :func:`body_velocity_from_poses` otherwise.
    """
    directory = Path(directory)
    sidecar_path = directory / SIDECAR_FILENAME
    if not sidecar_path.exists():
        raise ParseError(f"missing sidecar file {SIDECAR_FILENAME}", path=directory)
    name, spec, terrain = load_sidecar(sidecar_path)

    commands_path = directory / COMMANDS_FILENAME
    if not commands_path.exists():
        raise ParseError(f"missing {COMMANDS_FILENAME}", path=directory)
    commands = parse_command_csv(commands_path)

    velocities_path = directory / VELOCITIES_FILENAME
    poses_path = directory / POSES_FILENAME
    if velocities_path.exists():
        velocities = parse_velocity_csv(velocities_path)
    elif poses_path.exists():
        velocities = body_velocity_from_poses(parse_pose_csv(poses_path))
    else:
        raise ParseError(f"need {VELOCITIES_FILENAME} or {POSES_FILENAME}", path=directory)

    return align(
        commands,
        velocities,
        grid_dt,
        max_gap,
        name=name or directory.name,
        vehicle=spec,
        terrain=terrain,
    )
