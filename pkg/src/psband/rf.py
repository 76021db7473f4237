"""Antenna patterns, propagation loss and the point-to-point link budget."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from importlib import resources
from typing import Union

from .geo import GeoError, GeoPoint, great_circle_distance_m, initial_bearing_deg

SPEED_OF_LIGHT = 299_792_458.0
DIPOLE_PEAK_DBI = 2.15
DIPOLE_FLOOR_DB = 40.0
MIN_DISTANCE_M = 1.0


class LinkError(ValueError):
    pass


# --- antennas ------------------------------------------------------------


@dataclass(frozen=True)
class Isotropic:
    pass


@dataclass(frozen=True)
class HalfWaveDipole:
    """Vertical half-wave dipole, omnidirectional in azimuth."""


@dataclass(frozen=True)
class DirectionalSector:
    boresight_az_deg: float = 0.0
    az_beamwidth_3db_deg: float = 65.0
    el_beamwidth_3db_deg: float = 10.0
    max_gain_dbi: float = 15.0
    front_to_back_db: float = 25.0

    def __post_init__(self):
        for bw in (self.az_beamwidth_3db_deg, self.el_beamwidth_3db_deg):
            if not 0 < bw < 360:
                raise LinkError(f"beamwidth {bw} deg outside (0, 360)")
        if not self.front_to_back_db >= 0:
            raise LinkError("front-to-back ratio must be nonnegative")
        if not math.isfinite(self.max_gain_dbi):
            raise LinkError("max gain must be finite")
        if not math.isfinite(self.boresight_az_deg):
            raise LinkError("boresight azimuth must be finite")


AntennaPattern = Union[Isotropic, HalfWaveDipole, DirectionalSector]


def antenna_gain_dbi(pattern: AntennaPattern, az_deg: float, el_deg: float) -> float:
    """Gain toward (azimuth, elevation); azimuth clockwise from north, elevation up from horizontal."""
    if not (0.0 <= az_deg < 360.0 and -90.0 <= el_deg <= 90.0):
        raise LinkError(f"invalid direction: az={az_deg}, el={el_deg}")
    if isinstance(pattern, Isotropic):
        return 0.0
    if isinstance(pattern, HalfWaveDipole):
        floor = DIPOLE_PEAK_DBI - DIPOLE_FLOOR_DB
        el = math.radians(el_deg)
        cos_el = math.cos(el)
        if abs(el_deg) == 90.0 or cos_el < 1e-12:
            return floor
        ratio = abs(math.cos(0.5 * math.pi * math.sin(el)) / cos_el)
        if ratio == 0.0:
            return floor
        return max(DIPOLE_PEAK_DBI + 20.0 * math.log10(ratio), floor)
    if isinstance(pattern, DirectionalSector):
        off = abs((az_deg - pattern.boresight_az_deg + 180.0) % 360.0 - 180.0)
        att = 12.0 * ((off / pattern.az_beamwidth_3db_deg) ** 2 + (el_deg / pattern.el_beamwidth_3db_deg) ** 2)
        return pattern.max_gain_dbi - min(att, pattern.front_to_back_db)
    raise TypeError(f"not an antenna pattern: {pattern!r}")


# --- propagation ---------------------------------------------------------


class PropagationModel(enum.Enum):
    FREE_SPACE = "free_space"
    TWO_RAY = "two_ray"


@dataclass(frozen=True)
class Environment:
    propagation_model: PropagationModel = PropagationModel.FREE_SPACE
    rain_rate_mm_per_h: float = 0.0
    rain_coeff_k: float = 0.0002425
    rain_coeff_alpha: float = 1.5266
    misc_loss_db: float = 0.0

    def __post_init__(self):
        if not self.rain_rate_mm_per_h >= 0:
            raise LinkError("rain rate must be nonnegative")
        if not (self.rain_coeff_k > 0 and self.rain_coeff_alpha > 0):
            raise LinkError("rain coefficients k and alpha must be positive")
        if not self.misc_loss_db >= 0:
            raise LinkError("misc loss must be nonnegative")


def fspl_db(freq_mhz: float, distance_m: float) -> float:
    """Free-space path loss 20*log10(4*pi*d*f/c)."""
    if not freq_mhz > 0:
        raise LinkError("frequency must be positive")
    if not distance_m >= MIN_DISTANCE_M:
        raise LinkError(f"near-field singularity: distance {distance_m} m below {MIN_DISTANCE_M} m")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * freq_mhz * 1e6 / SPEED_OF_LIGHT)


def two_ray_crossover_m(freq_mhz: float, h_tx_m: float, h_rx_m: float) -> float:
    wavelength = SPEED_OF_LIGHT / (freq_mhz * 1e6)
    return 4.0 * math.pi * h_tx_m * h_rx_m / wavelength


def plane_earth_loss_db(distance_m: float, h_tx_m: float, h_rx_m: float) -> float:
    """Far-field two-ray loss 40*log10(d) - 20*log10(h_tx*h_rx)."""
    return 40.0 * math.log10(distance_m) - 20.0 * math.log10(h_tx_m * h_rx_m)


def two_ray_loss_db(freq_mhz: float, distance_m: float, h_tx_m: float, h_rx_m: float) -> float:
    """Free space up to the crossover distance, plane-earth beyond it.

    The two branches meet at the crossover, so the curve is continuous.
    """
    if not (h_tx_m > 0 and h_rx_m > 0):
        raise LinkError("two-ray requires positive heights")
    if distance_m <= two_ray_crossover_m(freq_mhz, h_tx_m, h_rx_m):
        return fspl_db(freq_mhz, distance_m)
    return plane_earth_loss_db(distance_m, h_tx_m, h_rx_m)


def rain_attenuation_db(env: Environment, distance_m: float) -> float:
    if distance_m < 0:
        raise LinkError("distance must be nonnegative")
    gamma = env.rain_coeff_k * env.rain_rate_mm_per_h ** env.rain_coeff_alpha
    return gamma * distance_m / 1000.0


def _read_p838() -> list[tuple[float, float, float, float, float]]:
    text = resources.files("psband").joinpath("data/rain_p838.txt").read_text(encoding="utf-8")
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append(tuple(float(v) for v in line.split()))
    return rows


def rain_coefficients(freq_ghz: float, polarization: str = "V") -> tuple[float, float]:
    """(k, alpha) from the shipped P.838 table, log-frequency interpolated."""
    rows = _read_p838()
    col = {"H": 1, "V": 3}[polarization.upper()]
    if not rows[0][0] <= freq_ghz <= rows[-1][0]:
        raise LinkError(f"{freq_ghz} GHz outside the shipped coefficient table")
    for lo, hi in zip(rows, rows[1:]):
        if lo[0] <= freq_ghz <= hi[0]:
            t = (math.log10(freq_ghz) - math.log10(lo[0])) / (math.log10(hi[0]) - math.log10(lo[0]))
            log_k = math.log10(lo[col]) + t * (math.log10(hi[col]) - math.log10(lo[col]))
            alpha = lo[col + 1] + t * (hi[col + 1] - lo[col + 1])
            return 10.0 ** log_k, alpha
    raise AssertionError("unreachable")


# --- link budget ---------------------------------------------------------


@dataclass(frozen=True)
class RadioEndpoint:
    location: GeoPoint
    antenna: AntennaPattern
    freq_mhz: float
    tx_power_dbm: float | None = None
    sensitivity_dbm: float | None = None

    def __post_init__(self):
        if not self.freq_mhz > 0:
            raise LinkError("frequency must be positive")


@dataclass(frozen=True)
class LinkReport:
    distance_m: float
    path_loss_db: float
    rain_loss_db: float
    misc_loss_db: float
    tx_gain_dbi: float
    rx_gain_dbi: float
    tx_power_dbm: float
    sensitivity_dbm: float
    rx_power_dbm: float

    @property
    def margin_db(self) -> float:
        return self.rx_power_dbm - self.sensitivity_dbm

    @property
    def covered(self) -> bool:
        return self.rx_power_dbm >= self.sensitivity_dbm


def link_budget(
    tx: RadioEndpoint, rx: RadioEndpoint, env: Environment, clamp_near_field: bool = False
) -> LinkReport:
    """Received power at ``rx`` over the slant path from ``tx``.

    With ``clamp_near_field`` the loss of paths shorter than 1 m (including a
    receiver on top of the transmitter) is evaluated at 1 m instead of raising.
    Raster evaluation uses this; point-to-point reports do not.
    """
    if tx.tx_power_dbm is None:
        raise LinkError("transmitter has no tx power")
    if rx.sensitivity_dbm is None:
        raise LinkError("receiver has no sensitivity")
    if tx.freq_mhz != rx.freq_mhz:
        raise LinkError(f"frequency mismatch: {tx.freq_mhz} vs {rx.freq_mhz} MHz")
    a, b = tx.location, rx.location
    ground = great_circle_distance_m(a, b)
    dh = b.height_m - a.height_m
    slant = math.hypot(ground, dh)
    if slant == 0.0 and not clamp_near_field:
        raise LinkError("degenerate link: coincident endpoints")
    try:
        az_tx = initial_bearing_deg(a, b)
        az_rx = initial_bearing_deg(b, a)
    except GeoError:
        # vertically stacked; azimuth is irrelevant at +-90 deg elevation
        az_tx = az_rx = 0.0
    el_tx = math.degrees(math.atan2(dh, ground))
    g_tx = antenna_gain_dbi(tx.antenna, az_tx, el_tx)
    g_rx = antenna_gain_dbi(rx.antenna, az_rx, -el_tx)

    loss_dist = max(slant, MIN_DISTANCE_M) if clamp_near_field else slant
    if env.propagation_model is PropagationModel.TWO_RAY:
        loss = two_ray_loss_db(tx.freq_mhz, loss_dist, a.height_m, b.height_m)
    else:
        loss = fspl_db(tx.freq_mhz, loss_dist)
    rain = rain_attenuation_db(env, slant)
    rx_power = tx.tx_power_dbm + g_tx + g_rx - loss - rain - env.misc_loss_db
    return LinkReport(
        distance_m=slant,
        path_loss_db=loss,
        rain_loss_db=rain,
        misc_loss_db=env.misc_loss_db,
        tx_gain_dbi=g_tx,
        rx_gain_dbi=g_rx,
        tx_power_dbm=tx.tx_power_dbm,
        sensitivity_dbm=rx.sensitivity_dbm,
        rx_power_dbm=rx_power,
    )


def dbm_from_w(power_w: float) -> float:
    return 10.0 * math.log10(power_w * 1000.0)
