"""Scenario files: flat ``section.key = value`` text, parsed into a validated :class:`Scenario`.

Every default is resolved at parse time and stored on the scenario, so
:func:`serialize_scenario` writes a complete file and parsing that file
reproduces the same scenario.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import regulatory as reg
from .geo import BoundingBox, GeoError, GeoPoint
from .rf import (
    AntennaPattern,
    DirectionalSector,
    Environment,
    HalfWaveDipole,
    Isotropic,
    LinkError,
    PropagationModel,
    RadioEndpoint,
    dbm_from_w,
)

ANTENNA_KINDS = ("isotropic", "dipole", "directional")
DEFAULT_GRID_SPAN_M = 30_000.0


class ScenarioError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        super().__init__(": ".join(where + [message]))


@dataclass(frozen=True)
class RxSite:
    id: int
    location: GeoPoint
    sensitivity_dbm: float
    antenna: AntennaPattern = Isotropic()


def antenna_from_kind(kind: str, sector: DirectionalSector) -> AntennaPattern:
    if kind == "isotropic":
        return Isotropic()
    if kind == "dipole":
        return HalfWaveDipole()
    if kind == "directional":
        return sector
    raise ScenarioError(f"unknown antenna {kind!r} (expected one of {', '.join(ANTENNA_KINDS)})")


def kind_of(antenna: AntennaPattern) -> str:
    if isinstance(antenna, Isotropic):
        return "isotropic"
    if isinstance(antenna, HalfWaveDipole):
        return "dipole"
    return "directional"


@dataclass(frozen=True)
class Scenario:
    tx_location: GeoPoint
    tx_power_w: float
    channel: reg.AggregateChannel
    tx_antenna: str
    rx_sensitivity_dbm: float
    name: str = "scenario"
    power_class: reg.PowerClass = reg.PowerClass.HIGH
    sector: DirectionalSector = DirectionalSector()
    airborne: bool = False
    rx_height_m: float = 2.0
    rx_sites: tuple[RxSite, ...] = ()
    environment: Environment = Environment()
    bbox: BoundingBox | None = None
    resolution_m: float = 100.0
    registry: str = "incumbents_us.txt"
    mask: str = "DSRC-A"

    def __post_init__(self):
        if self.bbox is None:
            object.__setattr__(self, "bbox", BoundingBox.centered(self.tx_location, DEFAULT_GRID_SPAN_M))
        if self.tx_antenna not in ANTENNA_KINDS:
            raise ScenarioError(f"unknown antenna {self.tx_antenna!r}", "tx.antenna")
        if not reg.BAND_LOW_MHZ <= self.freq_mhz <= reg.BAND_HIGH_MHZ:
            raise ScenarioError(f"{self.freq_mhz} MHz outside the band", "tx.channels")
        if not (self.tx_power_w > 0 and math.isfinite(self.tx_power_w)):
            raise ScenarioError("must be positive and finite", "tx.power_w")
        check = reg.check_tx_power(self.tx_power_w, self.channel.total_bandwidth_mhz, self.power_class)
        if not check.passed:
            raise ScenarioError(
                f"{self.tx_power_w:g} W exceeds the {self.power_class.value}-power limit of "
                f"{check.limit_w:g} W for {self.channel.total_bandwidth_mhz} MHz",
                "tx.power_w",
            )
        if not math.isfinite(self.rx_sensitivity_dbm):
            raise ScenarioError("must be finite", "rx.sensitivity_dbm")
        if not self.resolution_m > 0:
            raise ScenarioError("must be positive", "grid.resolution_m")
        ids = [s.id for s in self.rx_sites]
        if ids != list(range(1, len(ids) + 1)):
            raise ScenarioError(f"rx site ids must run 1..n without gaps, got {ids}", "rx")
        for s in self.rx_sites:
            if not math.isfinite(s.sensitivity_dbm):
                raise ScenarioError("must be finite", f"rx.{s.id}.sensitivity_dbm")

    @property
    def freq_mhz(self) -> float:
        return self.channel.center_mhz

    @property
    def antenna(self) -> AntennaPattern:
        return antenna_from_kind(self.tx_antenna, self.sector)

    @property
    def tx(self) -> RadioEndpoint:
        return RadioEndpoint(self.tx_location, self.antenna, self.freq_mhz, tx_power_dbm=dbm_from_w(self.tx_power_w))

    def reference_receiver(self, point: GeoPoint) -> RadioEndpoint:
        """Isotropic receiver at ``point`` (lat/lon) and the scenario's receiver height."""
        loc = point.with_height(self.rx_height_m)
        return RadioEndpoint(loc, Isotropic(), self.freq_mhz, sensitivity_dbm=self.rx_sensitivity_dbm)

    def site_receiver(self, site: RxSite) -> RadioEndpoint:
        return RadioEndpoint(site.location, site.antenna, self.freq_mhz, sensitivity_dbm=site.sensitivity_dbm)

    def with_overrides(self, tx_height_m: float | None = None, antenna: str | None = None) -> Scenario:
        changes = {}
        if tx_height_m is not None:
            try:
                changes["tx_location"] = self.tx_location.with_height(float(tx_height_m))
            except GeoError as exc:
                raise ScenarioError(str(exc), "tx.height_m") from None
        if antenna is not None:
            if antenna not in ANTENNA_KINDS:
                raise ScenarioError(f"unknown antenna {antenna!r}", "tx.antenna")
            changes["tx_antenna"] = antenna
        return dataclasses.replace(self, **changes) if changes else self


# --- parsing ---------------------------------------------------------------

_FLOAT, _INT_LIST, _STR, _BOOL = "float", "ints", "str", "bool"

# key -> (type, default); default None means required
_KEYS: dict[str, tuple[str, object]] = {
    "name": (_STR, "scenario"),
    "tx.lat_deg": (_FLOAT, None),
    "tx.lon_deg": (_FLOAT, None),
    "tx.height_m": (_FLOAT, None),
    "tx.power_w": (_FLOAT, None),
    "tx.channels": (_INT_LIST, None),
    "tx.antenna": (_STR, None),
    "tx.power_class": (_STR, "high"),
    "tx.freq_mhz": (_FLOAT, "derived"),
    "tx.airborne": (_BOOL, False),
    "tx.sector.boresight_az_deg": (_FLOAT, 0.0),
    "tx.sector.az_beamwidth_deg": (_FLOAT, 65.0),
    "tx.sector.el_beamwidth_deg": (_FLOAT, 10.0),
    "tx.sector.max_gain_dbi": (_FLOAT, 15.0),
    "tx.sector.front_to_back_db": (_FLOAT, 25.0),
    "rx.sensitivity_dbm": (_FLOAT, None),
    "rx.height_m": (_FLOAT, 2.0),
    "env.propagation_model": (_STR, "free_space"),
    "env.rain_rate_mm_per_h": (_FLOAT, 0.0),
    "env.rain_coeff_k": (_FLOAT, Environment.rain_coeff_k),
    "env.rain_coeff_alpha": (_FLOAT, Environment.rain_coeff_alpha),
    "env.misc_loss_db": (_FLOAT, 0.0),
    "grid.span_m": (_FLOAT, DEFAULT_GRID_SPAN_M),
    "grid.min_lat_deg": (_FLOAT, "derived"),
    "grid.min_lon_deg": (_FLOAT, "derived"),
    "grid.max_lat_deg": (_FLOAT, "derived"),
    "grid.max_lon_deg": (_FLOAT, "derived"),
    "grid.resolution_m": (_FLOAT, 100.0),
    "registry.path": (_STR, "incumbents_us.txt"),
    "mask.name": (_STR, "DSRC-A"),
}
_REQUIRED = [k for k, (_, d) in _KEYS.items() if d is None]
_RX_FIELDS = {
    "lat_deg": _FLOAT,
    "lon_deg": _FLOAT,
    "height_m": _FLOAT,
    "sensitivity_dbm": _FLOAT,
    "antenna": _STR,
}
_RX_KEY = re.compile(r"rx\.(\d+)\.(\w+)$")
_BBOX_KEYS = ("grid.min_lat_deg", "grid.min_lon_deg", "grid.max_lat_deg", "grid.max_lon_deg")


def _convert(kind: str, value: str, key: str, line: int):
    try:
        if kind == _FLOAT:
            v = float(value)
            if math.isnan(v):
                raise ValueError
            return v
        if kind == _INT_LIST:
            return [int(p) for p in value.replace(" ", "").split(",") if p]
        if kind == _BOOL:
            low = value.lower()
            if low in ("yes", "true", "1"):
                return True
            if low in ("no", "false", "0"):
                return False
            raise ValueError
    except ValueError:
        raise ScenarioError(f"cannot read {value!r} as {kind}", key, line) from None
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; errors carry the line number and key."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    rx: dict[int, dict[str, object]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError("expected 'key = value'", None, lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key in lines:
            raise ScenarioError(f"duplicate key (first on line {lines[key]})", key, lineno)
        lines[key] = lineno
        m = _RX_KEY.match(key)
        if m:
            field = m.group(2)
            if field not in _RX_FIELDS:
                raise ScenarioError("unknown key", key, lineno)
            rx.setdefault(int(m.group(1)), {})[field] = _convert(_RX_FIELDS[field], value, key, lineno)
        elif key in _KEYS:
            values[key] = _convert(_KEYS[key][0], value, key, lineno)
        else:
            raise ScenarioError("unknown key", key, lineno)

    for key in _REQUIRED:
        if key not in values:
            raise ScenarioError("missing required key", key)
    for key, (_, default) in _KEYS.items():
        if key not in values and default not in (None, "derived"):
            values[key] = default

    def fail(message: str, key: str):
        return ScenarioError(message, key, lines.get(key))

    try:
        tx_loc = GeoPoint(values["tx.lat_deg"], values["tx.lon_deg"], values["tx.height_m"])
    except GeoError as exc:
        raise fail(str(exc), "tx.lat_deg") from None
    try:
        power_class = reg.PowerClass.parse(values["tx.power_class"])
    except reg.RegulatoryError as exc:
        raise fail(str(exc), "tx.power_class") from None
    try:
        channel = reg.validate_aggregation(reg.standard_band_plan(), values["tx.channels"])
    except reg.RegulatoryError as exc:
        raise fail(str(exc), "tx.channels") from None
    if "tx.freq_mhz" in values and values["tx.freq_mhz"] != channel.center_mhz:
        raise fail(f"{values['tx.freq_mhz']} MHz does not match the aggregate center "
                   f"{channel.center_mhz} MHz of channels {values['tx.channels']}", "tx.freq_mhz")
    if values["tx.antenna"] not in ANTENNA_KINDS:
        raise fail(f"unknown antenna {values['tx.antenna']!r}", "tx.antenna")
    try:
        sector = DirectionalSector(
            values["tx.sector.boresight_az_deg"] % 360.0,
            values["tx.sector.az_beamwidth_deg"],
            values["tx.sector.el_beamwidth_deg"],
            values["tx.sector.max_gain_dbi"],
            values["tx.sector.front_to_back_db"],
        )
    except LinkError as exc:
        raise fail(str(exc), "tx.sector.boresight_az_deg") from None
    try:
        model = PropagationModel(values["env.propagation_model"])
    except ValueError:
        raise fail(f"unknown model {values['env.propagation_model']!r} (free_space or two_ray)",
                   "env.propagation_model") from None
    try:
        env = Environment(model, values["env.rain_rate_mm_per_h"], values["env.rain_coeff_k"],
                          values["env.rain_coeff_alpha"], values["env.misc_loss_db"])
    except LinkError as exc:
        msg = str(exc)
        key = ("env.misc_loss_db" if "misc" in msg else "env.rain_coeff_k" if "coefficient" in msg
               else "env.rain_rate_mm_per_h")
        raise fail(msg, key) from None

    rx_height = values["rx.height_m"]
    if not (rx_height >= 0 and math.isfinite(rx_height)):
        raise fail("must be nonnegative and finite", "rx.height_m")
    sites = []
    for sid in sorted(rx):
        f = rx[sid]
        for req in ("lat_deg", "lon_deg"):
            if req not in f:
                raise ScenarioError("missing required key", f"rx.{sid}.{req}")
        try:
            loc = GeoPoint(f["lat_deg"], f["lon_deg"], f.get("height_m", rx_height))
        except GeoError as exc:
            raise fail(str(exc), f"rx.{sid}.lat_deg") from None
        kind = f.get("antenna", "isotropic")
        if kind not in ("isotropic", "dipole"):
            raise fail(f"receiver antenna must be isotropic or dipole, got {kind!r}", f"rx.{sid}.antenna")
        sites.append(RxSite(sid, loc, f.get("sensitivity_dbm", values["rx.sensitivity_dbm"]),
                            antenna_from_kind(kind, sector)))

    given = [k for k in _BBOX_KEYS if k in values]
    try:
        if given and len(given) != 4:
            missing = next(k for k in _BBOX_KEYS if k not in values)
            raise fail("bounding box needs all four grid.min/max keys", missing)
        if given:
            bbox = BoundingBox(*(values[k] for k in _BBOX_KEYS))
        else:
            span = values["grid.span_m"]
            if not span > 0:
                raise fail("must be positive", "grid.span_m")
            bbox = BoundingBox.centered(tx_loc, span)
    except GeoError as exc:
        raise fail(str(exc), "grid.min_lat_deg") from None

    try:
        return Scenario(
            name=values["name"],
            tx_location=tx_loc,
            tx_power_w=values["tx.power_w"],
            power_class=power_class,
            channel=channel,
            tx_antenna=values["tx.antenna"],
            sector=sector,
            airborne=values["tx.airborne"],
            rx_sensitivity_dbm=values["rx.sensitivity_dbm"],
            rx_height_m=rx_height,
            rx_sites=tuple(sites),
            environment=env,
            bbox=bbox,
            resolution_m=values["grid.resolution_m"],
            registry=values["registry.path"],
            mask=values["mask.name"],
        )
    except ScenarioError as exc:
        if exc.line is None and exc.key is not None and exc.key in lines:
            raise ScenarioError(str(exc).split(": ", 1)[-1], exc.key, lines[exc.key]) from None
        raise


def serialize_scenario(s: Scenario) -> str:
    """Complete scenario text with every default written out."""
    r = repr
    out = [
        f"name = {s.name}",
        f"tx.lat_deg = {r(s.tx_location.lat_deg)}",
        f"tx.lon_deg = {r(s.tx_location.lon_deg)}",
        f"tx.height_m = {r(s.tx_location.height_m)}",
        f"tx.power_w = {r(s.tx_power_w)}",
        f"tx.power_class = {s.power_class.value}",
        f"tx.channels = {','.join(str(i) for i in s.channel.members)}",
        f"tx.freq_mhz = {r(s.freq_mhz)}",
        f"tx.antenna = {s.tx_antenna}",
        f"tx.airborne = {'yes' if s.airborne else 'no'}",
        f"tx.sector.boresight_az_deg = {r(s.sector.boresight_az_deg)}",
        f"tx.sector.az_beamwidth_deg = {r(s.sector.az_beamwidth_3db_deg)}",
        f"tx.sector.el_beamwidth_deg = {r(s.sector.el_beamwidth_3db_deg)}",
        f"tx.sector.max_gain_dbi = {r(s.sector.max_gain_dbi)}",
        f"tx.sector.front_to_back_db = {r(s.sector.front_to_back_db)}",
        f"rx.height_m = {r(s.rx_height_m)}",
        f"rx.sensitivity_dbm = {r(s.rx_sensitivity_dbm)}",
    ]
    for site in s.rx_sites:
        out += [
            f"rx.{site.id}.lat_deg = {r(site.location.lat_deg)}",
            f"rx.{site.id}.lon_deg = {r(site.location.lon_deg)}",
            f"rx.{site.id}.height_m = {r(site.location.height_m)}",
            f"rx.{site.id}.sensitivity_dbm = {r(site.sensitivity_dbm)}",
            f"rx.{site.id}.antenna = {kind_of(site.antenna)}",
        ]
    env = s.environment
    out += [
        f"env.propagation_model = {env.propagation_model.value}",
        f"env.rain_rate_mm_per_h = {r(env.rain_rate_mm_per_h)}",
        f"env.rain_coeff_k = {r(env.rain_coeff_k)}",
        f"env.rain_coeff_alpha = {r(env.rain_coeff_alpha)}",
        f"env.misc_loss_db = {r(env.misc_loss_db)}",
        f"grid.min_lat_deg = {r(s.bbox.min_lat_deg)}",
        f"grid.min_lon_deg = {r(s.bbox.min_lon_deg)}",
        f"grid.max_lat_deg = {r(s.bbox.max_lat_deg)}",
        f"grid.max_lon_deg = {r(s.bbox.max_lon_deg)}",
        f"grid.resolution_m = {r(s.resolution_m)}",
        f"registry.path = {s.registry}",
        f"mask.name = {s.mask}",
    ]
    return "\n".join(out) + "\n"


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a shipped scenario, e.g. ``"savannah_i16_60m.scn"``."""
    return Path(str(resources.files("psband").joinpath(f"data/scenarios/{name}")))


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file; bare names fall back to the shipped scenarios."""
    p = Path(path)
    if not p.exists() and not p.is_absolute() and len(p.parts) == 1:
        bundled = bundled_scenario_path(p.name)
        if bundled.exists():
            p = bundled
    return parse_scenario(p.read_text(encoding="utf-8"))


def resolve_data_file(name: str, base_dir: Path | None, subdir: str = "") -> Path:
    """Find a referenced data file: as given, next to the scenario, then among shipped data."""
    p = Path(name)
    if p.is_absolute():
        return p
    candidates = [p]
    if base_dir is not None:
        candidates.insert(0, base_dir / p)
    candidates.append(Path(str(resources.files("psband").joinpath("data", subdir, name))))
    for c in candidates:
        if c.exists():
            return c
    raise FileNotFoundError(name)
