"""Per-step distortion series, robust summaries, and rank-based comparison.

The headline statistic is the median of the slip-modulus series; two
datasets are compared with a two-sided Mann-Whitney U test on their moduli
(exact null distribution for small tie-free samples, normal approximation
with tie and continuity corrections otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, ParseError
from .fileio import atomic_write_text, fmt_float
from .ingest import AlignedDataset, iter_csv_rows
from .kinematics import VehicleSpec

__all__ = [
    "DistortionSeries",
    "SummaryStats",
    "ComparisonResult",
    "MannWhitneyResult",
    "distortion_series",
    "series_from_slip",
    "decimate",
    "summarize",
    "mann_whitney",
    "compare",
    "kinetic_energy",
    "write_series_csv",
    "read_series_csv",
    "EXACT_PRODUCT_LIMIT",
]

# Exact Mann-Whitney null distribution is used up to this n_a * n_b product
# (and only for tie-free samples, where the exact distribution is valid).
EXACT_PRODUCT_LIMIT = 400

SERIES_COLUMNS = ("t", "gx", "gy", "gomega", "modulus")


@dataclass(frozen=True, eq=False)
class DistortionSeries:
    """Slip vectors and their moduli for one dataset on its aligned grid.

    modulus[i] is always recomputable from (gx, gy, gomega)[i] and
    angular_weight; loaders verify this.
    """

    dataset_name: str
    t: np.ndarray
    gx: np.ndarray
    gy: np.ndarray
    gomega: np.ndarray
    modulus: np.ndarray
    angular_weight: float = 1.0

    def __post_init__(self):
        arrays = {}
        for field_name in ("t", "gx", "gy", "gomega", "modulus"):
            arrays[field_name] = np.asarray(getattr(self, field_name), dtype=float)
            object.__setattr__(self, field_name, arrays[field_name])
        lengths = {a.shape for a in arrays.values()}
        if len(lengths) != 1:
            raise ParameterError(f"series channels must share one length, got {lengths}")

    def __len__(self):
        return self.t.size


def _moduli(gx, gy, gomega, angular_weight):
    gw = angular_weight * gomega
    return np.sqrt(gx * gx + gy * gy + gw * gw)


def series_from_slip(name, t, gx, gy, gomega, angular_weight: float = 1.0) -> DistortionSeries:
    """Build a consistent series from slip components, recomputing the moduli."""
    if not (math.isfinite(angular_weight) and angular_weight >= 0.0):
        raise ParameterError(f"angular_weight must be >= 0, got {angular_weight!r}")
    gx = np.asarray(gx, dtype=float)
    gy = np.asarray(gy, dtype=float)
    gomega = np.asarray(gomega, dtype=float)
    return DistortionSeries(name, t, gx, gy, gomega, _moduli(gx, gy, gomega, angular_weight), angular_weight)


def distortion_series(
    ds: AlignedDataset, angular_weight: float = 1.0, stride: int = 1
) -> DistortionSeries:
    """Per-step slip between the ideal differential-drive twist and the observed one.

    stride keeps every stride-th grid step, a crude decorrelation knob for the
    downstream rank test; the default keeps everything.
    """
    if int(stride) != stride or stride < 1:
        raise ParameterError(f"stride must be a positive integer, got {stride!r}")
    if ds.vehicle is None:
        raise ParameterError("aligned dataset carries no vehicle spec")
    if ds.vehicle.wheel_radius is None or ds.vehicle.track_width is None:
        raise ParameterError(
            f"vehicle {ds.vehicle.name!r} needs wheel_radius and track_width"
        )
    if len(ds) == 0:
        raise InsufficientDataError("aligned dataset is empty")

    sl = slice(None, None, int(stride))
    r, b = ds.vehicle.wheel_radius, ds.vehicle.track_width
    wl, wr = ds.omega_l[sl], ds.omega_r[sl]
    fx = r * (wl + wr) / 2.0
    fomega = r * (wr - wl) / b
    gx = fx - ds.vx[sl]
    gy = 0.0 - ds.vy[sl]
    gomega = fomega - ds.omega[sl]
    return series_from_slip(ds.name, ds.t[sl], gx, gy, gomega, angular_weight)


def decimate(series: DistortionSeries, stride: int) -> DistortionSeries:
    """Keep every stride-th sample of an existing series."""
    if int(stride) != stride or stride < 1:
        raise ParameterError(f"stride must be a positive integer, got {stride!r}")
    if stride == 1:
        return series
    sl = slice(None, None, int(stride))
    return DistortionSeries(
        series.dataset_name,
        series.t[sl],
        series.gx[sl],
        series.gy[sl],
        series.gomega[sl],
        series.modulus[sl],
        series.angular_weight,
    )


@dataclass(frozen=True)
class SummaryStats:
    """Order statistics of a modulus series (linear-interpolation quantiles)."""

    n: int
    median: float
    q25: float
    q75: float
    mean: float
    max: float

    def as_dict(self):
        return {
            "n": self.n,
            "median": self.median,
            "q25": self.q25,
            "q75": self.q75,
            "mean": self.mean,
            "max": self.max,
        }


def summarize(series: DistortionSeries) -> SummaryStats:
    """Summary statistics of the modulus series.

    Quantiles use linear interpolation between order statistics (numpy's
    default, Hyndman-Fan type 7), stated explicitly because the median is the
    headline output.
    """
    m = series.modulus
    if m.size == 0:
        raise InsufficientDataError("empty distortion series")
    q25, median, q75 = (float(q) for q in np.quantile(m, (0.25, 0.5, 0.75)))
    return SummaryStats(int(m.size), median, q25, q75, float(m.mean()), float(m.max()))


def kinetic_energy(spec: VehicleSpec) -> float:
    """Worst-case translational kinetic energy 0.5 * mass * v_max**2 [J]."""
    return 0.5 * spec.mass * spec.v_max**2


# ---------------------------------------------------------------------------
# Mann-Whitney U


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their rank block."""
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts + 1
    midranks = (starts + ends) / 2.0
    return midranks[inverse]


def _exact_u_counts(n1: int, n2: int) -> list:
    """Null-distribution counts of U for sample sizes n1, n2 (exact integers).

    counts[u] is the number of the C(n1+n2, n1) equally likely rank
    configurations with statistic u; computed as the coefficients of the
    Gaussian binomial coefficient via polynomial multiply/divide.
    """
    coeffs = [1]
    for i in range(1, n1 + 1):
        shift = n2 + i
        degree = len(coeffs) - 1 + shift
        multiplied = [0] * (degree + 1)
        for k in range(degree + 1):
            value = coeffs[k] if k < len(coeffs) else 0
            if k >= shift and k - shift < len(coeffs):
                value -= coeffs[k - shift]
            multiplied[k] = value
        quotient_degree = degree - i
        quotient = [0] * (quotient_degree + 1)
        for k in range(quotient_degree + 1):
            quotient[k] = multiplied[k] + (quotient[k - i] if k >= i else 0)
        coeffs = quotient
    return coeffs


def _exact_two_sided_p(u: int, n1: int, n2: int) -> float:
    counts = _exact_u_counts(n1, n2)
    total = sum(counts)
    tail_le = sum(counts[: u + 1])
    tail_ge = sum(counts[u:])
    return min(1.0, 2.0 * min(tail_le, tail_ge) / total)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _approx_two_sided_p(u1: float, n1: int, n2: int, pooled: np.ndarray) -> float:
    n = n1 + n2
    mu = n1 * n2 / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float((counts.astype(float) ** 3 - counts).sum())
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0.0:
        return 1.0
    big_u = max(u1, n1 * n2 - u1)
    z = (big_u - mu - 0.5) / math.sqrt(variance)
    return min(1.0, 2.0 * _normal_sf(z))


@dataclass(frozen=True)
class MannWhitneyResult:
    u_statistic: float  # U of the first sample, in [0, n1*n2]
    p_value: float
    method: str  # "exact" or "normal"


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U rank test.

    The exact null distribution is used when the pooled sample is tie-free
    and n_a * n_b <= EXACT_PRODUCT_LIMIT; the exact distribution assumes
    continuous data, so any tie forces the corrected normal approximation.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.size == 0 or y.size == 0:
        raise InsufficientDataError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    if not np.all(np.isfinite(pooled)):
        raise ParameterError("samples must be finite")
    n1, n2 = int(x.size), int(y.size)
    ranks = _midranks(pooled)
    u1 = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0
    tie_free = np.unique(pooled).size == pooled.size
    if tie_free and n1 * n2 <= EXACT_PRODUCT_LIMIT:
        p = _exact_two_sided_p(int(round(u1)), n1, n2)
        method = "exact"
    else:
        p = _approx_two_sided_p(u1, n1, n2, pooled)
        method = "normal"
    return MannWhitneyResult(u1, p, method)


@dataclass(frozen=True)
class ComparisonResult:
    """Outcome of comparing dataset B against dataset A.

    median_ratio is median(B) / median(A); a zero denominator is surfaced as
    an infinite (or NaN when both are zero) ratio with ratio_degenerate set,
    never silently dropped.
    """

    u_statistic: float
    p_value: float
    median_ratio: float
    significant: bool
    median_a: float
    median_b: float
    n_a: int
    n_b: int
    alpha: float
    method: str
    ratio_degenerate: bool = False

    def as_dict(self):
        return {
            "u_statistic": self.u_statistic,
            "p_value": self.p_value,
            "median_a": self.median_a,
            "median_b": self.median_b,
            "median_ratio": self.median_ratio,
            "ratio_degenerate": self.ratio_degenerate,
            "significant": self.significant,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "alpha": self.alpha,
            "method": self.method,
        }


def compare(a: DistortionSeries, b: DistortionSeries, alpha: float = 0.05) -> ComparisonResult:
    """Test whether series B differs in difficulty from series A (two-sided)."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    median_a = summarize(a).median
    median_b = summarize(b).median
    result = mann_whitney(a.modulus, b.modulus)
    if median_a == 0.0:
        ratio = math.nan if median_b == 0.0 else math.inf
        degenerate = True
    else:
        ratio = median_b / median_a
        degenerate = False
    return ComparisonResult(
        u_statistic=result.u_statistic,
        p_value=result.p_value,
        median_ratio=ratio,
        significant=result.p_value < alpha,
        median_a=median_a,
        median_b=median_b,
        n_a=len(a),
        n_b=len(b),
        alpha=alpha,
        method=result.method,
        ratio_degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Series file format: CSV with header t,gx,gy,gomega,modulus


def write_series_csv(series: DistortionSeries, path):
    lines = [",".join(SERIES_COLUMNS)]
    for i in range(len(series)):
        lines.append(
            ",".join(
                fmt_float(v)
                for v in (series.t[i], series.gx[i], series.gy[i], series.gomega[i], series.modulus[i])
            )
        )
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_series_csv(path, dataset_name: Optional[str] = None, angular_weight: float = 1.0) -> DistortionSeries:
    """Load a distortion series CSV, checking that moduli match the slip columns.

    angular_weight must match the value used when the series was computed;
    a mismatch is reported as a parse error rather than silently accepted.
    """
    rows = [values for _, values in iter_csv_rows(path, SERIES_COLUMNS)]
    data = np.array(rows, dtype=float).reshape(len(rows), len(SERIES_COLUMNS))
    t, gx, gy, gomega, modulus = (data[:, i] for i in range(len(SERIES_COLUMNS)))
    expected = _moduli(gx, gy, gomega, angular_weight)
    if not np.allclose(modulus, expected, rtol=0.0, atol=1e-9):
        raise ParseError(
            "modulus column does not match the slip columns for "
            f"angular_weight={angular_weight!r}; pass the weight the series was computed with",
            path=path,
        )
    name = dataset_name if dataset_name is not None else Path(path).stem.replace(".distortion", "")
    return DistortionSeries(name, t, gx, gy, gomega, modulus, angular_weight)
