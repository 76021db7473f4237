"""Feasibility report: incumbent verdict, regulatory checks, per-site links, coverage."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from . import regulatory as reg
from .coverage import CoverageSummary, compute_coverage, coverage_radius_m, evaluate_rx_sites, summarize
from .rf import LinkReport
from .scenario import Scenario, ScenarioError
from .sharing import MILE_M, FeasibilityVerdict, IncumbentRegistry, ProtectionZone, evaluate_site, nearest_incumbent

SUMMARY_BEARINGS = (0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0)


@dataclass(frozen=True)
class FeasibilityReport:
    scenario_name: str
    verdict: FeasibilityVerdict
    nearest: tuple[ProtectionZone, float] | None
    aggregate: reg.AggregateChannel
    power: reg.PowerCheck
    mask: reg.ComplianceReport | None = None
    rx_links: dict[int, LinkReport] | None = None
    coverage: CoverageSummary | None = None


def check_airborne(scenario: Scenario, registry: IncumbentRegistry) -> None:
    if scenario.airborne and registry.airborne_prohibited:
        raise ScenarioError("airborne operation is prohibited in this band", "tx.airborne")


def build_report(
    scenario: Scenario,
    registry: IncumbentRegistry,
    psd: Sequence[reg.PsdSample] | None = None,
    mask: reg.EmissionMask | None = None,
    with_coverage: bool = True,
    workers: int = 1,
) -> FeasibilityReport:
    check_airborne(scenario, registry)
    mask_report = None
    if psd is not None:
        mask_report = reg.check_emission_mask(psd, scenario.channel, mask or reg.load_mask(scenario.mask))
    summary = None
    if with_coverage:
        raster = compute_coverage(scenario, workers=workers)
        radii = {b: coverage_radius_m(scenario, b) for b in SUMMARY_BEARINGS}
        if scenario.tx_antenna == "directional":
            b = scenario.sector.boresight_az_deg
            radii[b] = coverage_radius_m(scenario, b)
        summary = summarize(raster, radii)
    return FeasibilityReport(
        scenario_name=scenario.name,
        verdict=evaluate_site(scenario.tx_location, registry),
        nearest=nearest_incumbent(scenario.tx_location, registry) if registry.zones else None,
        aggregate=scenario.channel,
        power=reg.check_tx_power(scenario.tx_power_w, scenario.channel.total_bandwidth_mhz, scenario.power_class),
        mask=mask_report,
        rx_links=evaluate_rx_sites(scenario) if scenario.rx_sites else None,
        coverage=summary,
    )


def _km(m: float) -> str:
    return f"{m / 1000:.1f} km ({m / MILE_M:.1f} mi)"


def render_text(r: FeasibilityReport) -> str:
    out = [f"scenario: {r.scenario_name}", f"verdict: {r.verdict.status.label}"]
    if r.nearest is not None:
        zone, dist = r.nearest
        out.append(f"nearest incumbent: {zone.name} ({zone.kind.value}) at great-circle distance {_km(dist)}")
    for z in r.verdict.triggers:
        out.append(f"  inside {z.zone.name}: distance {_km(z.distance_m)}, radius {_km(z.zone.radius_m)}, "
                   f"policy {z.zone.policy.value}, margin {z.margin_m / 1000:+.1f} km")
    a = r.aggregate
    out.append(f"aggregate: channels {','.join(map(str, a.members))}, {a.total_bandwidth_mhz} MHz "
               f"centered {a.center_mhz} MHz: ok")
    p = r.power
    out.append(f"tx power: {p.tx_power_w:g} W vs {p.power_class.value}-power limit {p.limit_w:g} W: "
               f"{'pass' if p.passed else 'FAIL'} (margin {p.margin_db:+.2f} dB)")
    if r.mask is not None:
        m = r.mask
        out.append(f"emission mask {m.mask_name}: {'compliant' if m.compliant else 'NON-COMPLIANT'} "
                   f"({len(m.violations)} of {m.checked} out-of-band samples violate)")
        for v in m.violations:
            out.append(f"  {v.freq_mhz:.3f} MHz: {v.psd_dbm_per_mhz:.2f} dBm/MHz, limit "
                       f"{v.limit_dbm_per_mhz:.2f}, deficit {v.deficit_db:.2f} dB")
    if r.rx_links is not None:
        for sid, link in r.rx_links.items():
            out.append(f"rx {sid}: {'covered' if link.covered else 'NOT covered'}, "
                       f"rx power {link.rx_power_dbm:.2f} dBm, margin {link.margin_db:+.2f} dB, "
                       f"distance {link.distance_m:.0f} m")
    if r.coverage is not None:
        c = r.coverage
        out.append(f"coverage: {c.covered_count}/{c.total_count} cells ({c.covered_fraction:.4f}), "
                   f"area {c.covered_area_m2 / 1e6:.2f} km2, rx power {c.min_rx_power_dbm:.2f}.."
                   f"{c.max_rx_power_dbm:.2f} dBm")
        for b, rad in sorted(c.radius_by_bearing_m.items()):
            out.append(f"  radius @ {b:g} deg: {_km(rad)}")
    return "\n".join(out) + "\n"


def render_json_lines(r: FeasibilityReport) -> str:
    """One JSON object per line, each tagged with a ``record`` type."""
    recs: list[dict] = [{"record": "verdict", "scenario": r.scenario_name, "status": r.verdict.status.label}]
    if r.nearest is not None:
        zone, dist = r.nearest
        recs.append({"record": "nearest_incumbent", "zone": zone.name, "kind": zone.kind.value,
                     "distance_m": round(dist, 1)})
    for z in r.verdict.zones:
        recs.append({"record": "zone", "zone": z.zone.name, "policy": z.zone.policy.value,
                     "distance_m": round(z.distance_m, 1), "radius_m": z.zone.radius_m,
                     "margin_m": round(z.margin_m, 1), "inside": z.inside})
    recs.append({"record": "aggregate", "channels": list(r.aggregate.members),
                 "bandwidth_mhz": r.aggregate.total_bandwidth_mhz, "center_mhz": r.aggregate.center_mhz})
    p = r.power
    recs.append({"record": "power", "tx_power_w": p.tx_power_w, "limit_w": p.limit_w,
                 "power_class": p.power_class.value, "pass": p.passed, "margin_db": round(p.margin_db, 4)})
    if r.mask is not None:
        recs.append({"record": "mask", "mask": r.mask.mask_name, "compliant": r.mask.compliant,
                     "checked": r.mask.checked, "violations": len(r.mask.violations)})
    if r.rx_links is not None:
        for sid, link in r.rx_links.items():
            recs.append({"record": "rx", "id": sid, "covered": link.covered,
                         "rx_power_dbm": round(link.rx_power_dbm, 4), "margin_db": round(link.margin_db, 4),
                         "distance_m": round(link.distance_m, 1)})
    if r.coverage is not None:
        c = r.coverage
        recs.append({"record": "coverage", "covered_cells": c.covered_count, "total_cells": c.total_count,
                     "covered_fraction": c.covered_fraction, "covered_area_m2": round(c.covered_area_m2, 1),
                     "radius_by_bearing_m": {f"{b:g}": v for b, v in sorted(c.radius_by_bearing_m.items())}})
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in recs)
