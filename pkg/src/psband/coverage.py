"""Coverage rasters, per-site link reports and coverage radius probing."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .geo import BoundingBox, GeoPoint, destination_point, grid_axes, grid_shape
from .rf import LinkReport, link_budget
from .scenario import Scenario

DEFAULT_MAX_RADIUS_M = 200_000.0


@dataclass(frozen=True, eq=False)
class CoverageRaster:
    """Received power on a row-major grid (rows south to north, columns west to east)."""

    bbox: BoundingBox
    resolution_m: float
    lats: tuple[float, ...]
    lons: tuple[float, ...]
    rx_power_dbm: np.ndarray
    sensitivity_dbm: float

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.lats), len(self.lons)

    @property
    def size(self) -> int:
        return len(self.lats) * len(self.lons)

    @property
    def covered(self) -> np.ndarray:
        return self.rx_power_dbm >= self.sensitivity_dbm

    @property
    def cell_height_m(self) -> float:
        return self.bbox.height_m / (len(self.lats) - 1)

    @property
    def cell_width_m(self) -> float:
        return self.bbox.width_m / (len(self.lons) - 1)

    def cells(self) -> Iterator[tuple[float, float, float, bool]]:
        """(lat, lon, rx_power_dbm, covered) in row-major order."""
        cov = self.covered
        for i, lat in enumerate(self.lats):
            for j, lon in enumerate(self.lons):
                yield lat, lon, float(self.rx_power_dbm[i, j]), bool(cov[i, j])

    def nearest_cell(self, point: GeoPoint) -> tuple[int, int]:
        lat0, lon0 = self.lats[0], self.lons[0]
        dlat = (self.lats[-1] - lat0) / (len(self.lats) - 1)
        dlon = (self.lons[-1] - lon0) / (len(self.lons) - 1)
        i = min(max(round((point.lat_deg - lat0) / dlat), 0), len(self.lats) - 1)
        j = min(max(round((point.lon_deg - lon0) / dlon), 0), len(self.lons) - 1)
        return i, j

    def covers(self, point: GeoPoint) -> bool:
        return bool(self.covered[self.nearest_cell(point)])


def _rows_power(scenario: Scenario, lats: Sequence[float], lons: Sequence[float]) -> list[float]:
    tx = scenario.tx
    env = scenario.environment
    out = []
    for lat in lats:
        for lon in lons:
            rx = scenario.reference_receiver(GeoPoint(lat, lon))
            out.append(link_budget(tx, rx, env, clamp_near_field=True).rx_power_dbm)
    return out


def compute_coverage(scenario: Scenario, workers: int = 1) -> CoverageRaster:
    """Evaluate the link to a reference receiver at every grid cell.

    With ``workers > 1`` rows are farmed out to a process pool; each cell is
    computed independently, so the result is bit-identical for any worker count.
    """
    lats, lons = grid_axes(scenario.bbox, scenario.resolution_m)
    rows, cols = len(lats), len(lons)
    if workers <= 1:
        flat = _rows_power(scenario, lats, lons)
    else:
        step = max(1, math.ceil(rows / (workers * 4)))
        chunks = [lats[i:i + step] for i in range(0, rows, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_rows_power, [scenario] * len(chunks), chunks, [lons] * len(chunks))
            flat = [v for part in parts for v in part]
    power = np.asarray(flat, dtype=np.float64).reshape(rows, cols)
    return CoverageRaster(scenario.bbox, scenario.resolution_m, tuple(lats), tuple(lons), power,
                          scenario.rx_sensitivity_dbm)


def evaluate_rx_sites(scenario: Scenario) -> dict[int, LinkReport]:
    """Link report for each Rx site with its own antenna and sensitivity, keyed by site id."""
    tx = scenario.tx
    return {s.id: link_budget(tx, scenario.site_receiver(s), scenario.environment) for s in scenario.rx_sites}


def coverage_radius_m(
    scenario: Scenario,
    bearing_deg: float,
    step_m: float | None = None,
    max_radius_m: float = DEFAULT_MAX_RADIUS_M,
) -> float:
    """Largest probe distance along ``bearing_deg`` with every nearer probe covered.

    Probes sit at multiples of ``step_m`` (default: the grid resolution) and
    use the reference receiver. Returns 0 when the first probe is uncovered.
    """
    step = scenario.resolution_m if step_m is None else step_m
    if not step > 0:
        raise ValueError("probe step must be positive")
    tx = scenario.tx
    env = scenario.environment
    origin = scenario.tx_location
    n_max = int(max_radius_m // step)
    for k in range(1, n_max + 1):
        probe = destination_point(origin, bearing_deg % 360.0, k * step)
        if not link_budget(tx, scenario.reference_receiver(probe), env).covered:
            return (k - 1) * step
    return n_max * step


@dataclass(frozen=True)
class CoverageSummary:
    covered_count: int
    total_count: int
    max_rx_power_dbm: float
    min_rx_power_dbm: float
    covered_area_m2: float
    radius_by_bearing_m: Mapping[float, float] = field(default_factory=dict)

    @property
    def covered_fraction(self) -> float:
        return self.covered_count / self.total_count


def summarize(raster: CoverageRaster, radii: Mapping[float, float] | None = None) -> CoverageSummary:
    covered = int(np.count_nonzero(raster.covered))
    return CoverageSummary(
        covered_count=covered,
        total_count=raster.size,
        max_rx_power_dbm=float(raster.rx_power_dbm.max()),
        min_rx_power_dbm=float(raster.rx_power_dbm.min()),
        covered_area_m2=covered * raster.cell_height_m * raster.cell_width_m,
        radius_by_bearing_m=dict(radii or {}),
    )


def grid_size(scenario: Scenario) -> tuple[int, int]:
    return grid_shape(scenario.bbox, scenario.resolution_m)
