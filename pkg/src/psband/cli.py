"""Command-line entry point.

Exit codes: 0 success, 1 invalid input (including bad flags), 2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import regulatory as reg
from .coverage import compute_coverage, coverage_radius_m, evaluate_rx_sites
from .export import write_coverage_geojson, write_raster_csv
from .geo import GeoError
from .report import build_report, render_json_lines, render_text
from .rf import LinkError
from .scenario import ANTENNA_KINDS, ScenarioError, bundled_scenario_path, parse_scenario, resolve_data_file, serialize_scenario
from .sharing import RegistryError, load_registry_file

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psband", description="4.9 GHz public-safety band V2X sharing feasibility tools")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("bandplan", help="print the standard channel plan")

    pl = sub.add_parser("power-limit", help="maximum conducted power for a bandwidth and class")
    pl.add_argument("--bandwidth", type=float, required=True, help="MHz: 1, 5, 10, 15 or 20")
    pl.add_argument("--class", dest="power_class", required=True, help="low or high")

    mc = sub.add_parser("mask-check", help="check a measured PSD against an emission mask")
    mc.add_argument("--psd", required=True, help="file of 'freq_mhz psd_dbm_per_mhz' lines")
    mc.add_argument("--mask", required=True, help=f"mask name ({', '.join(reg.mask_names())}) or file")
    mc.add_argument("--channel", required=True, help="channel indices, e.g. 12,13 or 10-13")

    def scenario_cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--scenario", required=True, help="scenario file or shipped scenario name")
        sp.add_argument("--tx-height", type=float, help="override tx.height_m")
        sp.add_argument("--antenna", choices=ANTENNA_KINDS, help="override tx.antenna")
        sp.add_argument("--echo-config", action="store_true", help="print the resolved scenario and exit")
        return sp

    fe = scenario_cmd("feasibility", "full feasibility report")
    fe.add_argument("--psd", help="optional PSD file to check against the scenario's mask")
    fe.add_argument("--format", choices=("text", "json-lines"), default="text")
    fe.add_argument("--no-coverage", action="store_true", help="skip the coverage raster summary")
    fe.add_argument("--workers", type=_positive_int, default=1)

    rr = scenario_cmd("rx-report", "link report for each Rx site")
    rr.add_argument("--out", help="write to file instead of stdout")

    cv = scenario_cmd("coverage", "coverage raster as CSV")
    cv.add_argument("--out", help="CSV output file (default stdout)")
    cv.add_argument("--geojson", help="also write covered cells as GeoJSON")
    cv.add_argument("--workers", type=_positive_int, default=1)

    ra = scenario_cmd("radius", "coverage radius along a bearing")
    ra.add_argument("--bearing", type=float, required=True, help="degrees clockwise from north")
    return p


def _parse_channel(spec: str) -> list[int]:
    spec = spec.strip()
    try:
        if "-" in spec:
            a, b = (int(x) for x in spec.split("-", 1))
            return list(range(a, b + 1))
        return [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise reg.RegulatoryError(f"bad channel spec {spec!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    path = Path(args.scenario)
    if not path.exists() and len(path.parts) == 1 and bundled_scenario_path(path.name).exists():
        path = bundled_scenario_path(path.name)
    scenario = parse_scenario(path.read_text(encoding="utf-8"))
    return scenario.with_overrides(args.tx_height, args.antenna), path.parent


def _run(args) -> int:
    cmd = args.command
    if cmd == "bandplan":
        for ch in reg.standard_band_plan().channels:
            print(f"{ch.index:2d}  {ch.center_mhz:.1f} MHz  {ch.bandwidth_mhz} MHz  [{ch.low_mhz:.1f}, {ch.high_mhz:.1f}]")
        return EXIT_OK
    if cmd == "power-limit":
        bw = args.bandwidth
        limit = reg.max_conducted_power_w(int(bw) if bw == int(bw) else bw, reg.PowerClass.parse(args.power_class))
        print(f"{limit:g} W")
        return EXIT_OK
    if cmd == "mask-check":
        samples = reg.parse_psd(Path(args.psd).read_text(encoding="utf-8"))
        agg = reg.validate_aggregation(reg.standard_band_plan(), _parse_channel(args.channel))
        rep = reg.check_emission_mask(samples, agg, reg.load_mask(args.mask))
        print(f"mask {rep.mask_name}, channel {agg.center_mhz} MHz / {agg.total_bandwidth_mhz} MHz, "
              f"reference {rep.reference_psd_dbm_per_mhz:.2f} dBm/MHz")
        print(f"{'compliant' if rep.compliant else 'NON-COMPLIANT'}: "
              f"{len(rep.violations)} of {rep.checked} out-of-band samples violate")
        for v in rep.violations:
            print(f"  {v.freq_mhz:.3f} MHz  {v.psd_dbm_per_mhz:.2f} dBm/MHz  limit {v.limit_dbm_per_mhz:.2f}  "
                  f"deficit {v.deficit_db:.2f} dB")
        return EXIT_OK

    scenario, base = _load(args)
    if args.echo_config:
        sys.stdout.write(serialize_scenario(scenario))
        return EXIT_OK
    if cmd == "feasibility":
        registry = load_registry_file(resolve_data_file(scenario.registry, base))
        psd = reg.parse_psd(Path(args.psd).read_text(encoding="utf-8")) if args.psd else None
        mask = reg.load_mask(resolve_mask(scenario.mask, base)) if psd is not None else None
        report = build_report(scenario, registry, psd, mask, with_coverage=not args.no_coverage,
                              workers=args.workers)
        sys.stdout.write(render_json_lines(report) if args.format == "json-lines" else render_text(report))
    elif cmd == "rx-report":
        lines = ["id,lat_deg,lon_deg,distance_m,tx_gain_dbi,rx_gain_dbi,path_loss_db,rain_loss_db,"
                 "rx_power_dbm,margin_db,covered"]
        sites = {s.id: s for s in scenario.rx_sites}
        for sid, r in evaluate_rx_sites(scenario).items():
            loc = sites[sid].location
            lines.append(f"{sid},{loc.lat_deg:.6f},{loc.lon_deg:.6f},{r.distance_m:.1f},{r.tx_gain_dbi:.2f},"
                         f"{r.rx_gain_dbi:.2f},{r.path_loss_db:.2f},{r.rain_loss_db:.2f},{r.rx_power_dbm:.2f},"
                         f"{r.margin_db:.2f},{int(r.covered)}")
        _emit("\n".join(lines) + "\n", args.out)
    elif cmd == "coverage":
        raster = compute_coverage(scenario, workers=args.workers)
        _emit(write_raster_csv(raster), args.out)
        if args.geojson:
            Path(args.geojson).write_text(write_coverage_geojson(raster), encoding="utf-8")
    elif cmd == "radius":
        r = coverage_radius_m(scenario, args.bearing)
        print(f"{r:.1f} m")
    return EXIT_OK


def resolve_mask(name: str, base: Path | None) -> str:
    """Mask reference as a file path if one exists next to the scenario, else the shipped name."""
    try:
        p = resolve_data_file(name, base)
        if p.is_file() and p.suffix == ".txt":
            return str(p)
    except FileNotFoundError:
        pass
    return name


def run(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ScenarioError, reg.RegulatoryError, RegistryError, LinkError, GeoError) as exc:
        print(f"psband: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        name = getattr(exc, "filename", None) or exc
        print(f"psband: I/O error: {name}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"psband: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
