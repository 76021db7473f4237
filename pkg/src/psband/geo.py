"""Spherical-earth geodesy: distances, bearings, forward solutions and grids.

All angles are in degrees and all lengths in meters. Heights carried on
:class:`GeoPoint` are antenna heights above ground; they play no part in the
great-circle computations here (slant range is handled by the link budget).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0


class GeoError(ValueError):
    """Invalid geometry input."""


def normalize_lon(lon_deg: float) -> float:
    """Wrap a longitude to [-180, 180); +180 maps to -180."""
    lon = (lon_deg + 180.0) % 360.0 - 180.0
    # float modulo can land exactly on +180 for inputs just below -180
    if lon >= 180.0:
        lon -= 360.0
    return lon


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float
    height_m: float = 0.0

    def __post_init__(self):
        for name in ("lat_deg", "lon_deg", "height_m"):
            if not math.isfinite(getattr(self, name)):
                raise GeoError(f"{name} must be finite")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise GeoError(f"latitude {self.lat_deg} outside [-90, 90]")
        if self.height_m < 0:
            raise GeoError(f"height {self.height_m} m is negative")
        object.__setattr__(self, "lon_deg", normalize_lon(self.lon_deg))

    def with_height(self, height_m: float) -> GeoPoint:
        return GeoPoint(self.lat_deg, self.lon_deg, height_m)


@dataclass(frozen=True)
class BoundingBox:
    min_lat_deg: float
    min_lon_deg: float
    max_lat_deg: float
    max_lon_deg: float

    def __post_init__(self):
        if not (-90.0 <= self.min_lat_deg <= 90.0 and -90.0 <= self.max_lat_deg <= 90.0):
            raise GeoError("bounding box latitude outside [-90, 90]")
        if self.min_lat_deg > self.max_lat_deg or self.min_lon_deg > self.max_lon_deg:
            raise GeoError("bounding box min exceeds max")

    @property
    def mid_lat_deg(self) -> float:
        return 0.5 * (self.min_lat_deg + self.max_lat_deg)

    @property
    def height_m(self) -> float:
        """North-south extent in meters."""
        return math.radians(self.max_lat_deg - self.min_lat_deg) * EARTH_RADIUS_M

    @property
    def width_m(self) -> float:
        """East-west extent in meters, measured at the mid latitude."""
        return (
            math.radians(self.max_lon_deg - self.min_lon_deg)
            * EARTH_RADIUS_M
            * math.cos(math.radians(self.mid_lat_deg))
        )

    @classmethod
    def centered(cls, center: GeoPoint, span_m: float) -> BoundingBox:
        """Square box of side ``span_m`` (at the center latitude) around ``center``."""
        half_lat = math.degrees(0.5 * span_m / EARTH_RADIUS_M)
        half_lon = half_lat / math.cos(math.radians(center.lat_deg))
        return cls(
            center.lat_deg - half_lat,
            center.lon_deg - half_lon,
            center.lat_deg + half_lat,
            center.lon_deg + half_lon,
        )


def great_circle_distance_m(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine distance in meters; heights are ignored."""
    lat1 = math.radians(a.lat_deg)
    lat2 = math.radians(b.lat_deg)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> float:
    """Initial great-circle bearing from ``a`` to ``b``, clockwise from true north, in [0, 360)."""
    if a.lat_deg == b.lat_deg and a.lon_deg == b.lon_deg:
        raise GeoError("undefined bearing: coincident points")
    lat1 = math.radians(a.lat_deg)
    lat2 = math.radians(b.lat_deg)
    dlon = math.radians(b.lon_deg - a.lon_deg)
    x = math.sin(dlon) * math.cos(lat2)
    y = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    bearing = math.degrees(math.atan2(x, y)) % 360.0
    return 0.0 if bearing >= 360.0 else bearing


def destination_point(origin: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """Point reached by travelling ``distance_m`` from ``origin`` on the given initial bearing.

    The returned point keeps the origin's height.
    """
    if distance_m < 0:
        raise GeoError("distance must be nonnegative")
    if distance_m == 0:
        return origin
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    lat1 = math.radians(origin.lat_deg)
    lon1 = math.radians(origin.lon_deg)
    sin_lat2 = math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    lat2 = math.asin(max(-1.0, min(1.0, sin_lat2)))
    lon2 = lon1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * sin_lat2,
    )
    return GeoPoint(math.degrees(lat2), math.degrees(lon2), origin.height_m)


def grid_shape(bbox: BoundingBox, resolution_m: float) -> tuple[int, int]:
    """(rows, cols) of the sampling grid: ``ceil(span / resolution) + 1`` per axis."""
    if not resolution_m > 0:
        raise GeoError("resolution must be positive")
    height, width = bbox.height_m, bbox.width_m
    if height <= 0 or width <= 0:
        raise GeoError("degenerate bounding box")
    if resolution_m > height or resolution_m > width:
        raise GeoError("grid underflow: resolution larger than bounding box span")
    return math.ceil(height / resolution_m) + 1, math.ceil(width / resolution_m) + 1


def grid_axes(bbox: BoundingBox, resolution_m: float) -> tuple[list[float], list[float]]:
    """Latitudes (south to north) and longitudes (west to east) of the grid lines."""
    rows, cols = grid_shape(bbox, resolution_m)
    dlat = (bbox.max_lat_deg - bbox.min_lat_deg) / (rows - 1)
    dlon = (bbox.max_lon_deg - bbox.min_lon_deg) / (cols - 1)
    lats = [bbox.min_lat_deg + i * dlat for i in range(rows)]
    lons = [bbox.min_lon_deg + j * dlon for j in range(cols)]
    return lats, lons


def make_grid(bbox: BoundingBox, resolution_m: float, height_m: float = 0.0) -> list[GeoPoint]:
    """Row-major sampling grid over ``bbox``.

    Rows run south to north and columns west to east; spacing on both axes
    is at most ``resolution_m`` at the box's mid latitude. Every point
    carries ``height_m``.
    """
    lats, lons = grid_axes(bbox, resolution_m)
    return [GeoPoint(lat, lon, height_m) for lat in lats for lon in lons]
