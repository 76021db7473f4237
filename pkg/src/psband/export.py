"""Raster CSV and coverage GeoJSON writers."""

from __future__ import annotations

import io
import json

from .coverage import CoverageRaster

CSV_HEADER = "lat_deg,lon_deg,rx_power_dbm,covered"


def write_raster_csv(raster: CoverageRaster) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for lat, lon, power, covered in raster.cells():
        buf.write(f"{lat:.6f},{lon:.6f},{power:.2f},{int(covered)}\n")
    return buf.getvalue()


def write_coverage_geojson(raster: CoverageRaster) -> str:
    """FeatureCollection with one square polygon per covered cell.

    Rings are counter-clockwise and closed; coordinates are [lon, lat].
    """
    half_lat = (raster.lats[-1] - raster.lats[0]) / (len(raster.lats) - 1) / 2
    half_lon = (raster.lons[-1] - raster.lons[0]) / (len(raster.lons) - 1) / 2
    features = []
    for lat, lon, power, covered in raster.cells():
        if not covered:
            continue
        s, n = round(lat - half_lat, 7), round(lat + half_lat, 7)
        w, e = round(lon - half_lon, 7), round(lon + half_lon, 7)
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [[[w, s], [e, s], [e, n], [w, n], [w, s]]]},
            "properties": {"rx_power_dbm": round(power, 2)},
        })
    return json.dumps({"type": "FeatureCollection", "features": features}, separators=(",", ":")) + "\n"
