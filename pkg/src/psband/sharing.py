"""Incumbent protection zones and space-division feasibility of a transmitter site.

Protection is purely geometric: a site inside a zone's radius triggers the
zone's policy. Distances are great-circle distances between the site and the
zone center.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .geo import GeoError, GeoPoint, great_circle_distance_m

MILE_M = 1609.344
DEFAULT_RADIUS_M = 250 * MILE_M


class RegistryError(ValueError):
    pass


class ZoneKind(enum.Enum):
    RADIO_ASTRONOMY_PRIMARY = "RadioAstronomyPrimary"
    RADIO_ASTRONOMY_SECONDARY = "RadioAstronomySecondary"
    NAVY_CEC = "NavyCEC"


class Policy(enum.Enum):
    PROHIBIT = "Prohibit"
    REQUIRE_WAIVER = "RequireWaiver"


class Status(enum.IntEnum):
    """Verdict severity; larger is stricter."""

    CLEAR = 0
    WAIVER_REQUIRED = 1
    PROHIBITED = 2

    @property
    def label(self) -> str:
        return {0: "Clear", 1: "WaiverRequired", 2: "Prohibited"}[self.value]


_ALLOWED_POLICIES = {
    ZoneKind.NAVY_CEC: {Policy.REQUIRE_WAIVER},
    ZoneKind.RADIO_ASTRONOMY_PRIMARY: {Policy.PROHIBIT},
    ZoneKind.RADIO_ASTRONOMY_SECONDARY: {Policy.PROHIBIT, Policy.REQUIRE_WAIVER},
}


@dataclass(frozen=True)
class ProtectionZone:
    name: str
    center: GeoPoint
    radius_m: float
    kind: ZoneKind
    policy: Policy

    def __post_init__(self):
        if not self.radius_m > 0:
            raise RegistryError(f"zone {self.name}: radius must be positive")
        if self.policy not in _ALLOWED_POLICIES[self.kind]:
            raise RegistryError(f"zone {self.name}: policy {self.policy.value} not allowed for {self.kind.value}")


@dataclass(frozen=True)
class IncumbentRegistry:
    zones: tuple[ProtectionZone, ...] = ()
    airborne_prohibited: bool = True

    def __post_init__(self):
        seen = set()
        for z in self.zones:
            if z.name in seen:
                raise RegistryError(f"duplicate zone name {z.name!r}")
            seen.add(z.name)

    def zone(self, name: str) -> ProtectionZone:
        for z in self.zones:
            if z.name == name:
                return z
        raise KeyError(name)


@dataclass(frozen=True)
class ZoneDistance:
    zone: ProtectionZone
    distance_m: float

    @property
    def margin_m(self) -> float:
        """Distance beyond the zone edge; nonpositive means inside."""
        return self.distance_m - self.zone.radius_m

    @property
    def inside(self) -> bool:
        return self.distance_m <= self.zone.radius_m


@dataclass(frozen=True)
class FeasibilityVerdict:
    status: Status
    # every zone, nearest edge first
    zones: tuple[ZoneDistance, ...] = field(default=())

    @property
    def triggers(self) -> tuple[ZoneDistance, ...]:
        return tuple(z for z in self.zones if z.inside)


def _parse_bool(text: str) -> bool:
    t = text.lower()
    if t in ("yes", "true", "1"):
        return True
    if t in ("no", "false", "0"):
        return False
    raise ValueError(text)


def load_registry(text: str) -> IncumbentRegistry:
    """Parse a registry file.

    One zone per line: ``name kind policy lat_deg lon_deg [radius_m]``. A
    missing radius, or the word ``default``, means 250 miles. The line
    ``airborne_prohibited yes|no`` sets the global airborne flag (default yes).
    """
    zones = []
    names: dict[str, int] = {}
    airborne = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "airborne_prohibited":
            if len(parts) != 2:
                raise RegistryError(f"line {lineno}: expected 'airborne_prohibited yes|no'")
            try:
                airborne = _parse_bool(parts[1])
            except ValueError:
                raise RegistryError(f"line {lineno}: bad airborne_prohibited value {parts[1]!r}") from None
            continue
        if len(parts) not in (5, 6):
            raise RegistryError(f"line {lineno}: expected 'name kind policy lat_deg lon_deg [radius_m]'")
        name, kind, policy = parts[:3]
        if name in names:
            raise RegistryError(f"line {lineno}: duplicate zone name {name!r} (first on line {names[name]})")
        try:
            kind_v = ZoneKind(kind)
        except ValueError:
            raise RegistryError(f"line {lineno}: unknown zone kind {kind!r}") from None
        try:
            policy_v = Policy(policy)
        except ValueError:
            raise RegistryError(f"line {lineno}: unknown policy {policy!r}") from None
        try:
            lat, lon = float(parts[3]), float(parts[4])
            radius = DEFAULT_RADIUS_M if len(parts) == 5 or parts[5] == "default" else float(parts[5])
        except ValueError:
            raise RegistryError(f"line {lineno}: non-numeric coordinate or radius") from None
        try:
            zones.append(ProtectionZone(name, GeoPoint(lat, lon), radius, kind_v, policy_v))
        except (RegistryError, GeoError) as exc:
            raise RegistryError(f"line {lineno}: {exc}") from None
        names[name] = lineno
    return IncumbentRegistry(tuple(zones), airborne)


def bundled_registry_text(name: str = "incumbents_us.txt") -> str:
    return resources.files("psband").joinpath(f"data/{name}").read_text(encoding="utf-8")


def load_registry_file(path: str | Path) -> IncumbentRegistry:
    return load_registry(Path(path).read_text(encoding="utf-8"))


def evaluate_site(tx: GeoPoint, registry: IncumbentRegistry) -> FeasibilityVerdict:
    """Classify a ground site against every zone; a site on a zone boundary is inside."""
    dists = [ZoneDistance(z, great_circle_distance_m(tx, z.center)) for z in registry.zones]
    dists.sort(key=lambda d: (d.margin_m, d.zone.name))
    status = Status.CLEAR
    for d in dists:
        if d.inside:
            sev = Status.PROHIBITED if d.zone.policy is Policy.PROHIBIT else Status.WAIVER_REQUIRED
            status = max(status, sev)
    return FeasibilityVerdict(status, tuple(dists))


def nearest_incumbent(tx: GeoPoint, registry: IncumbentRegistry) -> tuple[ProtectionZone, float]:
    if not registry.zones:
        raise RegistryError("no incumbents loaded")
    best = min(((great_circle_distance_m(tx, z.center), z.name, z) for z in registry.zones),
               key=lambda t: (t[0], t[1]))
    return best[2], best[0]
