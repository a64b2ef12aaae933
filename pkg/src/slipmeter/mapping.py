"""Deployment catalog and the kinetic-energy vs terrain-complexity map.

Deployments are plotted with terrain complexity (an ordinal scale) on the x
axis and maximum kinetic energy on a log y axis, over a background shaded by
deployment-risk zone. The default terrain ordering and the zone thresholds
are documented conventions, configurable by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

from .errors import ParameterError, ParseError, TerrainNotFoundError, ValidationError
from .fileio import atomic_write_text, fmt_float
from .kinematics import VehicleSpec
from .metrics import kinetic_energy

__all__ = [
    "TerrainClass",
    "TerrainScale",
    "DeploymentRecord",
    "Catalog",
    "RiskZoning",
    "default_terrain_scale",
    "default_risk_zoning",
    "deployment_record",
    "build_catalog",
    "read_catalog_csv",
    "write_catalog_csv",
    "read_terrain_scale_csv",
    "render_map",
    "KE_RELATIVE_TOLERANCE",
]

# Stored kinetic energies may deviate from 0.5*m*v_max^2 by at most 0.1 %.
KE_RELATIVE_TOLERANCE = 1e-3

CATALOG_COLUMNS = ("label", "vehicle", "mass", "v_max", "terrain", "model_type")
MAP_CSV_COLUMNS = ("label", "terrain_ordinal", "kinetic_energy", "model_type")


@dataclass(frozen=True)
class TerrainClass:
    """One rung of the terrain-complexity ladder."""

    name: str
    ordinal: int
    descriptors: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ParameterError("TerrainClass.name must be non-empty")
        if int(self.ordinal) != self.ordinal or self.ordinal < 1:
            raise ParameterError(f"TerrainClass.ordinal must be an integer >= 1, got {self.ordinal!r}")
        object.__setattr__(self, "ordinal", int(self.ordinal))
        object.__setattr__(self, "descriptors", tuple(self.descriptors))


class TerrainScale:
    """Ordered terrain classes with alias-aware name lookup."""

    def __init__(self, classes: Sequence[TerrainClass], aliases: Optional[dict] = None):
        ordered = tuple(sorted(classes, key=lambda c: c.ordinal))
        if not ordered:
            raise ValidationError("terrain scale needs at least one class")
        ordinals = [c.ordinal for c in ordered]
        if len(set(ordinals)) != len(ordinals):
            raise ValidationError("terrain ordinals must be unique")
        names = [c.name for c in ordered]
        if len(set(names)) != len(names):
            raise ValidationError("terrain names must be unique")
        self.classes = ordered
        self._by_name = {c.name: c for c in ordered}
        self._aliases = {}
        for alias, target in (aliases or {}).items():
            if target not in self._by_name:
                raise ValidationError(f"alias {alias!r} points at unknown terrain {target!r}")
            self._aliases[_normalize(alias)] = target

    def __iter__(self):
        return iter(self.classes)

    def __len__(self):
        return len(self.classes)

    @property
    def max_ordinal(self) -> int:
        return self.classes[-1].ordinal

    def lookup(self, name: str) -> TerrainClass:
        key = _normalize(name)
        key = self._aliases.get(key, key)
        try:
            return self._by_name[key]
        except KeyError:
            known = ", ".join(c.name for c in self.classes)
            raise TerrainNotFoundError(f"unknown terrain {name!r}; known terrains: {known}")


def _normalize(name: str) -> str:
    return name.strip().lower().replace(" ", "_").replace("-", "_")


def default_terrain_scale() -> TerrainScale:
    """Built-in complexity ordering from flat hard ground to steep deep snow."""
    classes = (
        TerrainClass("asphalt", 1, ("flat", "hard", "high-friction")),
        TerrainClass("grass", 2, ("flat", "soft", "moderate-friction")),
        TerrainClass("gravel", 3, ("loose-surface", "hard-base")),
        TerrainClass("dirt", 4, ("uneven", "compactable")),
        TerrainClass("sand", 5, ("loose", "deformable")),
        TerrainClass("snow", 6, ("deformable", "low-friction")),
        TerrainClass("ice", 7, ("hard", "very-low-friction")),
        TerrainClass("deep_snow_slopes", 8, ("steep", "deep", "sinkage-prone")),
    )
    aliases = {
        "tile": "asphalt",
        "concrete": "asphalt",
        "pavement": "asphalt",
        "deep_snow": "deep_snow_slopes",
        "deep_snow_with_slopes": "deep_snow_slopes",
        "deep_snow_with_steep_slopes": "deep_snow_slopes",
    }
    return TerrainScale(classes, aliases)


def read_terrain_scale_csv(path) -> TerrainScale:
    """User override scale: CSV with header ``name,ordinal`` (no aliases)."""
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path=path)
    import csv

    classes = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file, expected header name,ordinal", path=path, line=1)
        missing = [c for c in ("name", "ordinal") if c not in header]
        if missing:
            raise ParseError(f"missing columns: {', '.join(missing)}", path=path, line=1)
        name_i, ord_i = header.index("name"), header.index("ordinal")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                ordinal = int(row[ord_i].strip())
            except (ValueError, IndexError):
                raise ParseError(f"cannot parse ordinal {row[ord_i]!r}", path=path, line=lineno)
            classes.append(TerrainClass(_normalize(row[name_i]), ordinal))
    return TerrainScale(classes)


@dataclass(frozen=True)
class DeploymentRecord:
    """One vehicle-on-terrain deployment: a point on the difficulty map."""

    label: str
    vehicle: VehicleSpec
    terrain: TerrainClass
    max_kinetic_energy: float
    metric_median: Optional[float] = None
    model_type: str = "unspecified"

    def __post_init__(self):
        if not self.label:
            raise ParameterError("DeploymentRecord.label must be non-empty")


def deployment_record(
    label: str,
    vehicle: VehicleSpec,
    terrain: TerrainClass,
    model_type: str = "unspecified",
    metric_median: Optional[float] = None,
) -> DeploymentRecord:
    """Record with kinetic energy computed from the vehicle spec."""
    return DeploymentRecord(
        label, vehicle, terrain, kinetic_energy(vehicle), metric_median, model_type
    )


@dataclass(frozen=True)
class Catalog:
    records: Tuple[DeploymentRecord, ...]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def build_catalog(records: Sequence[DeploymentRecord]) -> Catalog:
    """Validate records into a catalog, keeping the input order.

    Labels must be unique and each stored kinetic energy must agree with
    0.5*m*v_max^2 recomputed from the vehicle spec within 0.1 %.
    """
    seen = set()
    for record in records:
        if record.label in seen:
            raise ValidationError(f"duplicate deployment label {record.label!r}")
        seen.add(record.label)
        expected = kinetic_energy(record.vehicle)
        if abs(record.max_kinetic_energy - expected) > KE_RELATIVE_TOLERANCE * expected:
            raise ValidationError(
                f"{record.label!r}: stored kinetic energy {record.max_kinetic_energy!r} J "
                f"does not match 0.5*m*v_max^2 = {expected!r} J"
            )
    return Catalog(tuple(records))


@dataclass(frozen=True)
class RiskZoning:
    """Rectangular risk thresholds over (kinetic energy, terrain ordinal).

    thresholds[i] = (ke_bound, ordinal_bound) separates zone i from zone
    i + 1. A record crosses boundary i when its ordinal reaches
    ordinal_bound, or when its kinetic energy reaches ke_bound on terrain at
    least as complex as the previous boundary's ordinal. With the defaults:
    medium risk from ordinal 3 or 100 J, high risk from ordinal 6 or from
    1000 J on at-least-medium terrain.
    """

    thresholds: Tuple[Tuple[float, int], ...] = ((100.0, 3), (1000.0, 6))

    def __post_init__(self):
        normalized = tuple((float(ke), int(o)) for ke, o in self.thresholds)
        if not normalized:
            raise ParameterError("RiskZoning needs at least one threshold")
        for ke, o in normalized:
            if not (math.isfinite(ke) and ke > 0) or o < 1:
                raise ParameterError(f"invalid threshold ({ke!r}, {o!r})")
        kes = [ke for ke, _ in normalized]
        ords = [o for _, o in normalized]
        if sorted(set(kes)) != kes or sorted(set(ords)) != ords:
            raise ParameterError("thresholds must be strictly increasing in both bounds")
        object.__setattr__(self, "thresholds", normalized)

    @property
    def zone_count(self) -> int:
        return len(self.thresholds) + 1

    def zone(self, ke: float, ordinal: int) -> int:
        """Zone index (0 is lowest risk); a pure function of its inputs."""
        zone = 0
        for i, (ke_bound, ordinal_bound) in enumerate(self.thresholds):
            gate = self.thresholds[i - 1][1] if i > 0 else None
            crossed = ordinal >= ordinal_bound or (
                ke >= ke_bound and (gate is None or ordinal >= gate)
            )
            if not crossed:
                break
            zone = i + 1
        return zone

    def zone_name(self, index: int) -> str:
        if self.zone_count == 3:
            return ("low", "medium", "high")[index]
        return f"zone-{index}"


def default_risk_zoning() -> RiskZoning:
    return RiskZoning()


def write_catalog_csv(catalog: Catalog, path) -> Path:
    lines = [",".join(CATALOG_COLUMNS)]
    for r in catalog:
        lines.append(
            ",".join(
                (
                    r.label,
                    r.vehicle.name,
                    fmt_float(r.vehicle.mass),
                    fmt_float(r.vehicle.v_max),
                    r.terrain.name,
                    r.model_type,
                )
            )
        )
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_catalog_csv(path, scale: Optional[TerrainScale] = None) -> Catalog:
    """Load a catalog CSV (header ``label,vehicle,mass,v_max,terrain,model_type``).

    Vehicles in a catalog carry only mass and v_max; wheel geometry is not
    part of the map and stays unset.
    """
    scale = scale or default_terrain_scale()
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path=path)
    import csv

    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"empty file, expected header {','.join(CATALOG_COLUMNS)}", path=path, line=1)
        missing = [c for c in CATALOG_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"missing columns: {', '.join(missing)}", path=path, line=1)
        idx = {c: header.index(c) for c in CATALOG_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                mass = float(row[idx["mass"]])
                v_max = float(row[idx["v_max"]])
            except (ValueError, IndexError):
                raise ParseError("cannot parse mass/v_max as numbers", path=path, line=lineno)
            spec = VehicleSpec(name=row[idx["vehicle"]].strip(), mass=mass, v_max=v_max)
            terrain = scale.lookup(row[idx["terrain"]])
            records.append(
                deployment_record(
                    row[idx["label"]].strip(),
                    spec,
                    terrain,
                    model_type=row[idx["model_type"]].strip(),
                )
            )
    return build_catalog(records)


# ---------------------------------------------------------------------------
# Rendering

_ZONE_FILLS = ("#e8f3e6", "#fdf2d2", "#f9dfdc", "#efc9c9", "#e0b1b1")
_MARKER_COLOR = "#30507c"

_WIDTH, _HEIGHT = 720, 480
_M_LEFT, _M_RIGHT, _M_TOP, _M_BOTTOM = 70, 170, 40, 80


def render_map(
    catalog: Catalog,
    zoning: Optional[RiskZoning] = None,
    output=None,
    scale: Optional[TerrainScale] = None,
) -> Tuple[Path, Path]:
    """Write the difficulty map as <output>.csv and <output>.svg.

    The CSV holds one row per record (label, terrain ordinal, kinetic energy,
    model type); the SVG is a static scatter plot with log-scaled kinetic
    energy, risk-zone shading, and one marker shape per model type. Returns
    the two paths written.
    """
    if len(catalog) == 0:
        raise ValidationError("cannot render an empty catalog")
    if output is None:
        raise ParameterError("output path base is required")
    zoning = zoning or default_risk_zoning()
    scale = scale or default_terrain_scale()
    for record in catalog:
        ke = record.max_kinetic_energy
        if not (math.isfinite(ke) and ke > 0):
            raise ValidationError(
                f"{record.label!r}: kinetic energy must be positive and finite for a log axis, got {ke!r}"
            )

    base = Path(output)
    csv_path = base.with_name(base.name + ".csv")
    svg_path = base.with_name(base.name + ".svg")

    lines = [",".join(MAP_CSV_COLUMNS)]
    for r in catalog:
        lines.append(
            ",".join(
                (r.label, str(r.terrain.ordinal), fmt_float(r.max_kinetic_energy), r.model_type)
            )
        )
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    atomic_write_text(svg_path, _render_svg(catalog, zoning, scale))
    return csv_path, svg_path


def _render_svg(catalog: Catalog, zoning: RiskZoning, scale: TerrainScale) -> str:
    x0, x1 = _M_LEFT, _WIDTH - _M_RIGHT
    y_top, y_bottom = _M_TOP, _HEIGHT - _M_BOTTOM

    max_ordinal = max(scale.max_ordinal, max(r.terrain.ordinal for r in catalog))
    ord_lo, ord_hi = 0.5, max_ordinal + 0.5

    kes = [r.max_kinetic_energy for r in catalog]
    decade_lo = math.floor(math.log10(min(kes)))
    decade_hi = math.ceil(math.log10(max(kes)))
    if decade_hi <= decade_lo:
        decade_hi = decade_lo + 1
    log_lo, log_hi = float(decade_lo), float(decade_hi)

    def x_of(ordinal: float) -> float:
        return x0 + (ordinal - ord_lo) / (ord_hi - ord_lo) * (x1 - x0)

    def y_of(ke: float) -> float:
        return y_bottom - (math.log10(ke) - log_lo) / (log_hi - log_lo) * (y_bottom - y_top)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
    ]

    # Risk-zone shading: per ordinal column, split the KE axis at the zone
    # thresholds and fill each segment with its zone color.
    ke_lo, ke_hi = 10.0**log_lo, 10.0**log_hi
    for ordinal in range(1, max_ordinal + 1):
        col_x0 = x_of(max(ordinal - 0.5, ord_lo))
        col_x1 = x_of(min(ordinal + 0.5, ord_hi))
        edges = [ke_lo]
        for ke_bound, _ in zoning.thresholds:
            if ke_lo < ke_bound < ke_hi:
                edges.append(ke_bound)
        edges.append(ke_hi)
        for seg_lo, seg_hi in zip(edges[:-1], edges[1:]):
            zone = zoning.zone(math.sqrt(seg_lo * seg_hi), ordinal)
            fill = _ZONE_FILLS[min(zone, len(_ZONE_FILLS) - 1)]
            parts.append(
                f'<rect x="{col_x0:.2f}" y="{y_of(seg_hi):.2f}" width="{col_x1 - col_x0:.2f}" '
                f'height="{y_of(seg_lo) - y_of(seg_hi):.2f}" fill="{fill}"/>'
            )

    # Decade gridlines and y tick labels.
    for decade in range(decade_lo, decade_hi + 1):
        y = y_of(10.0**decade)
        parts.append(
            f'<line x1="{x0}" y1="{y:.2f}" x2="{x1}" y2="{y:.2f}" stroke="#c8c8c8" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{10.0 ** decade:g}</text>'
        )

    # X ticks: terrain names at their ordinals.
    for terrain in scale:
        if terrain.ordinal > max_ordinal:
            continue
        x = x_of(terrain.ordinal)
        parts.append(
            f'<line x1="{x:.2f}" y1="{y_bottom}" x2="{x:.2f}" y2="{y_bottom + 4}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{y_bottom + 16}" font-size="10" text-anchor="end" '
            f'transform="rotate(-30 {x:.2f} {y_bottom + 16})">{escape(terrain.name)} ({terrain.ordinal})</text>'
        )

    # Axes.
    parts.append(
        f'<rect x="{x0}" y="{y_top}" width="{x1 - x0}" height="{y_bottom - y_top}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{_HEIGHT - 12}" text-anchor="middle" font-size="12">'
        "terrain complexity (ordinal)</text>"
    )
    parts.append(
        f'<text x="18" y="{(y_top + y_bottom) / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {(y_top + y_bottom) / 2:.2f})">max kinetic energy [J]</text>'
    )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="24" text-anchor="middle" font-size="14">'
        "UGV deployment difficulty map</text>"
    )

    # Markers, one shape per model type, deterministic assignment.
    model_types = sorted({r.model_type for r in catalog})
    shape_of = {m: _MARKER_SHAPES[i % len(_MARKER_SHAPES)] for i, m in enumerate(model_types)}
    for record in catalog:
        x = x_of(record.terrain.ordinal)
        y = y_of(record.max_kinetic_energy)
        shape = shape_of[record.model_type]
        parts.append(f'<g id={quoteattr("pt-" + record.label)} transform="translate({x:.2f},{y:.2f})">')
        parts.append(_MARKER_SVG[shape])
        parts.append(f'<text x="8" y="-6" font-size="10">{escape(record.label)}</text>')
        parts.append("</g>")

    # Legend: model types, then risk zones.
    legend_x = x1 + 18
    legend_y = y_top + 10
    parts.append(f'<text x="{legend_x}" y="{legend_y}" font-size="11" font-weight="bold">model type</text>')
    for i, model_type in enumerate(model_types):
        y = legend_y + 18 + i * 18
        parts.append(f'<g transform="translate({legend_x + 6},{y - 4})">{_MARKER_SVG[shape_of[model_type]]}</g>')
        parts.append(f'<text x="{legend_x + 18}" y="{y}" font-size="10">{escape(model_type)}</text>')
    zone_y = legend_y + 18 + len(model_types) * 18 + 16
    parts.append(f'<text x="{legend_x}" y="{zone_y}" font-size="11" font-weight="bold">risk</text>')
    for i in range(zoning.zone_count):
        y = zone_y + 18 + i * 18
        fill = _ZONE_FILLS[min(i, len(_ZONE_FILLS) - 1)]
        parts.append(
            f'<rect x="{legend_x}" y="{y - 10}" width="12" height="12" fill="{fill}" stroke="#999999"/>'
        )
        parts.append(f'<text x="{legend_x + 18}" y="{y}" font-size="10">{escape(zoning.zone_name(i))}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


_MARKER_SHAPES = ("circle", "square", "diamond", "triangle", "cross")
_MARKER_SVG = {
    "circle": f'<circle r="5" fill="{_MARKER_COLOR}"/>',
    "square": f'<rect x="-4.5" y="-4.5" width="9" height="9" fill="{_MARKER_COLOR}"/>',
    "diamond": f'<path d="M 0 -6 L 6 0 L 0 6 L -6 0 Z" fill="{_MARKER_COLOR}"/>',
    "triangle": f'<path d="M 0 -6 L 5.5 4.5 L -5.5 4.5 Z" fill="{_MARKER_COLOR}"/>',
    "cross": f'<path d="M -5 -5 L 5 5 M -5 5 L 5 -5" stroke="{_MARKER_COLOR}" stroke-width="2" fill="none"/>',
}
