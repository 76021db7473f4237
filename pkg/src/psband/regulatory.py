"""4940-4990 MHz band plan, aggregation rules, power limits and emission masks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

BAND_LOW_MHZ = 4940.0
BAND_HIGH_MHZ = 4990.0

ALLOWED_AGGREGATE_MHZ = (1, 5, 10, 15, 20)
MAX_AGGREGATE_MHZ = 20

# watts per (bandwidth MHz, class); "must not exceed"
_POWER_LIMITS_W = {
    1: (0.005, 0.1),
    5: (0.025, 0.5),
    10: (0.05, 1.0),
    15: (0.075, 1.5),
    20: (0.1, 2.0),
}


class RegulatoryError(ValueError):
    pass


class PowerClass(enum.Enum):
    LOW = "low"
    HIGH = "high"

    @classmethod
    def parse(cls, text: str) -> PowerClass:
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"low": cls.LOW, "lowpower": cls.LOW, "high": cls.HIGH, "highpower": cls.HIGH}
        try:
            return aliases[key]
        except KeyError:
            raise RegulatoryError(f"unknown power class {text!r} (expected low or high)") from None


@dataclass(frozen=True)
class Channel:
    index: int
    center_mhz: float
    bandwidth_mhz: int

    def __post_init__(self):
        if self.bandwidth_mhz not in (1, 5):
            raise RegulatoryError(f"channel {self.index}: bandwidth {self.bandwidth_mhz} MHz not in {{1, 5}}")
        if self.low_mhz < BAND_LOW_MHZ or self.high_mhz > BAND_HIGH_MHZ:
            raise RegulatoryError(f"channel {self.index}: span outside {BAND_LOW_MHZ}-{BAND_HIGH_MHZ} MHz")

    @property
    def low_mhz(self) -> float:
        return self.center_mhz - self.bandwidth_mhz / 2

    @property
    def high_mhz(self) -> float:
        return self.center_mhz + self.bandwidth_mhz / 2


@dataclass(frozen=True)
class BandPlan:
    channels: tuple[Channel, ...]

    def __post_init__(self):
        ones = sum(1 for c in self.channels if c.bandwidth_mhz == 1)
        fives = sum(1 for c in self.channels if c.bandwidth_mhz == 5)
        if (ones, fives) != (10, 8):
            raise RegulatoryError(f"band plan needs ten 1 MHz and eight 5 MHz channels, got {ones} and {fives}")
        edge = BAND_LOW_MHZ
        for ch in self.channels:
            if ch.low_mhz != edge:
                raise RegulatoryError(f"channel {ch.index} does not start at {edge} MHz")
            edge = ch.high_mhz
        if edge != BAND_HIGH_MHZ:
            raise RegulatoryError("band plan does not reach the upper band edge")

    def channel(self, index: int) -> Channel:
        for ch in self.channels:
            if ch.index == index:
                return ch
        raise RegulatoryError(f"no channel with index {index}")

    @property
    def total_bandwidth_mhz(self) -> int:
        return sum(c.bandwidth_mhz for c in self.channels)


@dataclass(frozen=True)
class AggregateChannel:
    members: tuple[int, ...]
    total_bandwidth_mhz: int
    center_mhz: float

    @property
    def low_mhz(self) -> float:
        return self.center_mhz - self.total_bandwidth_mhz / 2

    @property
    def high_mhz(self) -> float:
        return self.center_mhz + self.total_bandwidth_mhz / 2


def standard_band_plan() -> BandPlan:
    """Five 1 MHz, eight 5 MHz, then five 1 MHz channels, indexed 1..18 upward in frequency."""
    centers = [(4940.5 + i, 1) for i in range(5)]
    centers += [(4947.5 + 5 * i, 5) for i in range(8)]
    centers += [(4985.5 + i, 1) for i in range(5)]
    return BandPlan(tuple(Channel(n, c, bw) for n, (c, bw) in enumerate(centers, start=1)))


def validate_aggregation(plan: BandPlan, indices: Iterable[int]) -> AggregateChannel:
    """Combine channels into one operating channel.

    Members must be distinct and frequency-contiguous, and the combined
    width must be one of 1, 5, 10, 15 or 20 MHz.
    """
    idx = list(indices)
    if not idx:
        raise RegulatoryError("empty aggregate")
    if len(set(idx)) != len(idx):
        raise RegulatoryError("duplicate channel in aggregate")
    chans = sorted((plan.channel(i) for i in idx), key=lambda c: c.center_mhz)
    for lo, hi in zip(chans, chans[1:]):
        if lo.high_mhz != hi.low_mhz:
            raise RegulatoryError(f"fragmented aggregate: gap between channels {lo.index} and {hi.index}")
    total = sum(c.bandwidth_mhz for c in chans)
    if total > MAX_AGGREGATE_MHZ:
        raise RegulatoryError(f"aggregation cap exceeded: {total} MHz > {MAX_AGGREGATE_MHZ} MHz")
    if total not in ALLOWED_AGGREGATE_MHZ:
        raise RegulatoryError(f"disallowed aggregate width: {total} MHz")
    center = (chans[0].low_mhz + chans[-1].high_mhz) / 2
    return AggregateChannel(tuple(c.index for c in chans), total, center)


def max_conducted_power_w(bandwidth_mhz: float, power_class: PowerClass) -> float:
    try:
        low, high = _POWER_LIMITS_W[bandwidth_mhz]
    except KeyError:
        raise RegulatoryError(f"no power limit defined for {bandwidth_mhz} MHz") from None
    return low if power_class is PowerClass.LOW else high


@dataclass(frozen=True)
class PowerCheck:
    tx_power_w: float
    limit_w: float
    bandwidth_mhz: int
    power_class: PowerClass

    @property
    def margin_db(self) -> float:
        """Headroom below the limit; negative when over."""
        return 10 * math.log10(self.limit_w / self.tx_power_w)

    @property
    def passed(self) -> bool:
        return self.tx_power_w <= self.limit_w


def check_tx_power(tx_power_w: float, bandwidth_mhz: float, power_class: PowerClass) -> PowerCheck:
    if not tx_power_w > 0:
        raise RegulatoryError("tx power must be positive")
    limit = max_conducted_power_w(bandwidth_mhz, power_class)
    return PowerCheck(tx_power_w, limit, int(bandwidth_mhz), power_class)


# --- emission masks ------------------------------------------------------


@dataclass(frozen=True)
class EmissionMask:
    """Required attenuation versus offset outside the channel edge.

    Breakpoint offsets are in MHz for a channel of ``reference_bandwidth_mhz``;
    for other channel widths offsets scale proportionally, since the
    underlying masks are defined in fractions of the authorized bandwidth.
    """

    name: str
    breakpoints: tuple[tuple[float, float], ...]
    reference_bandwidth_mhz: float = 10.0

    def __post_init__(self):
        if not self.breakpoints:
            raise RegulatoryError(f"mask {self.name}: no breakpoints")
        offsets = [o for o, _ in self.breakpoints]
        atts = [a for _, a in self.breakpoints]
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise RegulatoryError(f"mask {self.name}: offsets must be strictly increasing")
        if any(a < 0 for a in atts) or any(b < a for a, b in zip(atts, atts[1:])):
            raise RegulatoryError(f"mask {self.name}: attenuations must be nonnegative and nondecreasing")
        if not self.reference_bandwidth_mhz > 0:
            raise RegulatoryError(f"mask {self.name}: reference bandwidth must be positive")

    def required_attenuation_db(self, edge_offset_mhz: float, bandwidth_mhz: float | None = None) -> float:
        """Piecewise-linear attenuation at an offset from the channel edge, clamped at both ends."""
        scale = 1.0 if bandwidth_mhz is None else bandwidth_mhz / self.reference_bandwidth_mhz
        pts = [(o * scale, a) for o, a in self.breakpoints]
        if edge_offset_mhz <= pts[0][0]:
            return pts[0][1]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if edge_offset_mhz <= x1:
                return y0 + (y1 - y0) * (edge_offset_mhz - x0) / (x1 - x0)
        return pts[-1][1]


@dataclass(frozen=True)
class PsdSample:
    freq_mhz: float
    psd_dbm_per_mhz: float


@dataclass(frozen=True)
class MaskViolation:
    freq_mhz: float
    psd_dbm_per_mhz: float
    limit_dbm_per_mhz: float

    @property
    def deficit_db(self) -> float:
        return self.psd_dbm_per_mhz - self.limit_dbm_per_mhz


@dataclass(frozen=True)
class ComplianceReport:
    mask_name: str
    reference_psd_dbm_per_mhz: float
    checked: int
    violations: tuple[MaskViolation, ...]

    @property
    def compliant(self) -> bool:
        return not self.violations


def check_emission_mask(
    samples: Sequence[PsdSample], channel: AggregateChannel, mask: EmissionMask
) -> ComplianceReport:
    """Check out-of-band samples against ``mask`` relative to the in-band peak PSD.

    Samples on the channel edges count as in-band. A sample sitting exactly
    on the mask line is compliant.
    """
    if not samples:
        raise RegulatoryError("no PSD samples")
    lo, hi = channel.low_mhz, channel.high_mhz
    inband = [s.psd_dbm_per_mhz for s in samples if lo <= s.freq_mhz <= hi]
    if not inband:
        raise RegulatoryError("reference PSD undefined: no sample inside the channel")
    ref = max(inband)
    violations = []
    checked = 0
    for s in samples:
        if lo <= s.freq_mhz <= hi:
            continue
        checked += 1
        offset = s.freq_mhz - hi if s.freq_mhz > hi else lo - s.freq_mhz
        limit = ref - mask.required_attenuation_db(offset, channel.total_bandwidth_mhz)
        if s.psd_dbm_per_mhz > limit:
            violations.append(MaskViolation(s.freq_mhz, s.psd_dbm_per_mhz, limit))
    return ComplianceReport(mask.name, ref, checked, tuple(violations))


def parse_mask(text: str, name: str) -> EmissionMask:
    """Parse "offset_mhz attenuation_db" lines.

    ``#`` starts a comment. A comment of the form
    ``# reference_bandwidth_mhz: 10`` sets the channel width the offsets
    were written for.
    """
    points = []
    ref_bw = 10.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("reference_bandwidth_mhz:"):
                ref_bw = float(body.split(":", 1)[1])
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise RegulatoryError(f"mask {name} line {lineno}: expected 'offset_mhz attenuation_db'")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise RegulatoryError(f"mask {name} line {lineno}: non-numeric value") from None
    return EmissionMask(name, tuple(points), ref_bw)


def mask_names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files("psband").joinpath("data/masks").iterdir()
                  if p.name.endswith(".txt"))


def load_mask(name_or_path: str | Path) -> EmissionMask:
    """Load a shipped mask by name (e.g. ``"DSRC-A"``) or any mask file by path."""
    path = Path(name_or_path)
    if path.suffix == ".txt" and path.exists():
        return parse_mask(path.read_text(encoding="utf-8"), path.stem)
    res = resources.files("psband").joinpath(f"data/masks/{name_or_path}.txt")
    if not res.is_file():
        raise RegulatoryError(f"unknown mask {name_or_path!r}; shipped masks: {', '.join(mask_names())}")
    return parse_mask(res.read_text(encoding="utf-8"), str(name_or_path))


def parse_psd(text: str) -> list[PsdSample]:
    """Parse "freq_mhz psd_dbm_per_mhz" lines; ``#`` comments allowed."""
    samples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise RegulatoryError(f"PSD line {lineno}: expected 'freq_mhz psd_dbm_per_mhz'")
        try:
            f, p = float(parts[0]), float(parts[1])
        except ValueError:
            raise RegulatoryError(f"PSD line {lineno}: non-numeric value") from None
        if not math.isfinite(f) or math.isnan(p) or p == math.inf:
            raise RegulatoryError(f"PSD line {lineno}: value not finite")
        samples.append(PsdSample(f, p))
    return samples
