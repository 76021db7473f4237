import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psband.geo import GeoPoint, destination_point
from psband.rf import (
    SPEED_OF_LIGHT,
    DirectionalSector,
    Environment,
    HalfWaveDipole,
    Isotropic,
    LinkError,
    PropagationModel,
    RadioEndpoint,
    antenna_gain_dbi,
    fspl_db,
    link_budget,
    plane_earth_loss_db,
    rain_attenuation_db,
    rain_coefficients,
    two_ray_crossover_m,
    two_ray_loss_db,
)


def fspl_oracle(freq_mhz, d_m):
    # textbook km/MHz form: 20log10(d_km) + 20log10(f_MHz) + 20log10(4*pi*1e9/c)
    return 20 * math.log10(d_m / 1000) + 20 * math.log10(freq_mhz) + 20 * math.log10(4 * math.pi * 1e9 / SPEED_OF_LIGHT)


# --- antennas ------------------------------------------------------------


def dipole_directivity_dbi():
    """Numerical directivity of the half-wave dipole field pattern."""
    theta = np.linspace(1e-6, math.pi - 1e-6, 200_001)
    f2 = (np.cos(0.5 * math.pi * np.cos(theta)) / np.sin(theta)) ** 2
    y = f2 * np.sin(theta)
    integral = 2 * math.pi * float(np.sum((y[1:] + y[:-1]) * np.diff(theta)) / 2)
    return 10 * math.log10(4 * math.pi / integral)


def test_dipole_peak_matches_directivity():
    assert dipole_directivity_dbi() == pytest.approx(2.15, abs=0.01)
    for az in (0.0, 90.0, 271.5):
        assert antenna_gain_dbi(HalfWaveDipole(), az, 0.0) == pytest.approx(2.15, abs=1e-12)


def test_dipole_pattern_shape():
    g = [antenna_gain_dbi(HalfWaveDipole(), 0.0, el) for el in (0, 10, 30, 60, 80, 89.9)]
    assert all(b < a for a, b in zip(g, g[1:]))
    assert antenna_gain_dbi(HalfWaveDipole(), 0.0, 90.0) == pytest.approx(2.15 - 40)
    assert antenna_gain_dbi(HalfWaveDipole(), 0.0, -90.0) == pytest.approx(2.15 - 40)
    assert antenna_gain_dbi(HalfWaveDipole(), 0.0, 30.0) == antenna_gain_dbi(HalfWaveDipole(), 0.0, -30.0)
    el = 45.0
    expected = 2.15 + 20 * math.log10(math.cos(math.pi / 2 * math.sin(math.radians(el))) / math.cos(math.radians(el)))
    assert antenna_gain_dbi(HalfWaveDipole(), 10.0, el) == pytest.approx(expected)


def test_isotropic():
    assert antenna_gain_dbi(Isotropic(), 123.0, 45.0) == 0.0


def test_sector_back_lobe():
    s = DirectionalSector(boresight_az_deg=0, max_gain_dbi=15, front_to_back_db=25)
    assert antenna_gain_dbi(s, 180.0, 0.0) == -10.0


def test_sector_three_db_points():
    s = DirectionalSector(boresight_az_deg=40, az_beamwidth_3db_deg=65, el_beamwidth_3db_deg=10, max_gain_dbi=15)
    assert antenna_gain_dbi(s, 40.0, 0.0) == 15.0
    assert antenna_gain_dbi(s, 40 + 32.5, 0.0) == pytest.approx(12.0)
    assert antenna_gain_dbi(s, 40 - 32.5, 0.0) == pytest.approx(12.0)
    assert antenna_gain_dbi(s, 40.0, 5.0) == pytest.approx(12.0)
    assert antenna_gain_dbi(s, 40.0, -5.0) == pytest.approx(12.0)


def test_sector_azimuth_wraps():
    s = DirectionalSector(boresight_az_deg=350)
    assert antenna_gain_dbi(s, 10.0, 0.0) == pytest.approx(antenna_gain_dbi(s, 330.0, 0.0))


@given(st.floats(0, 359.99), st.floats(-90, 90))
def test_sector_bounded(az, el):
    s = DirectionalSector(boresight_az_deg=88)
    g = antenna_gain_dbi(s, az, el)
    assert s.max_gain_dbi - s.front_to_back_db <= g <= s.max_gain_dbi


@pytest.mark.parametrize("az, el", [(360.0, 0), (-1.0, 0), (0, 90.5), (0, -91), (float("nan"), 0)])
def test_invalid_direction(az, el):
    with pytest.raises(LinkError, match="invalid direction"):
        antenna_gain_dbi(Isotropic(), az, el)


def test_sector_invariants():
    for kw in ({"az_beamwidth_3db_deg": 0}, {"el_beamwidth_3db_deg": 360}, {"front_to_back_db": -1},
               {"max_gain_dbi": math.inf}):
        with pytest.raises(LinkError):
            DirectionalSector(**kw)


# --- propagation ---------------------------------------------------------


def test_fspl_reference_value():
    assert fspl_db(4900, 1000) == pytest.approx(106.25, abs=0.01)
    assert fspl_db(4900, 1000) == pytest.approx(fspl_oracle(4900, 1000), abs=1e-9)


def test_fspl_unit_argument():
    f = 10.0  # MHz; keeps c/(4*pi*f) beyond the 1 m near-field limit
    d = SPEED_OF_LIGHT / (4 * math.pi * f * 1e6)
    assert d > 1
    assert fspl_db(f, d) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(100, 100_000), st.floats(1, 1e6))
def test_fspl_doubling(f, d):
    assert fspl_db(f, 2 * d) - fspl_db(f, d) == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_fspl_monotone():
    assert fspl_db(4900, 1001) > fspl_db(4900, 1000)
    assert fspl_db(4901, 1000) > fspl_db(4900, 1000)


@pytest.mark.parametrize("f, d", [(4900, 0), (4900, 0.5), (0, 100), (-1, 100)])
def test_fspl_errors(f, d):
    with pytest.raises(LinkError):
        fspl_db(f, d)


def test_two_ray_near_branch_is_fspl():
    dc = two_ray_crossover_m(4900, 60, 2)
    for d in (10.0, 1000.0, dc / 2, dc):
        assert two_ray_loss_db(4900, d, 60, 2) == fspl_db(4900, d)


def test_two_ray_far_branch():
    # plane-earth formula at 10 km, 60 m x 2 m
    assert plane_earth_loss_db(10_000, 60, 2) == pytest.approx(160 - 20 * math.log10(120), abs=1e-12)
    assert round(plane_earth_loss_db(10_000, 60, 2), 2) == 118.42
    dc = two_ray_crossover_m(4900, 60, 2)
    assert dc > 10_000  # so 10 km itself is still on the free-space branch
    assert two_ray_loss_db(4900, 50_000, 60, 2) == pytest.approx(40 * math.log10(5e4) - 20 * math.log10(120))


def test_two_ray_continuous_at_crossover():
    dc = two_ray_crossover_m(4980, 2, 2)
    assert plane_earth_loss_db(dc, 2, 2) == pytest.approx(fspl_db(4980, dc), abs=1e-9)
    assert two_ray_loss_db(4980, dc * (1 + 1e-9), 2, 2) == pytest.approx(fspl_db(4980, dc), abs=1e-6)


def test_two_ray_height_ordering():
    assert two_ray_loss_db(4900, 10_000, 60, 2) < two_ray_loss_db(4900, 10_000, 2, 2)


@given(st.floats(1, 100), st.floats(1, 100), st.floats(0.5, 5))
def test_two_ray_nonincreasing_in_height(h1, h2, scale):
    lo, hi = min(h1, h2), max(h1, h2)
    d = two_ray_crossover_m(4980, hi, 3) * scale + 10
    assert two_ray_loss_db(4980, d, hi, 3) <= two_ray_loss_db(4980, d, lo, 3) + 1e-9


def test_two_ray_requires_heights():
    with pytest.raises(LinkError, match="positive heights"):
        two_ray_loss_db(4900, 1000, 0, 2)


def test_rain_trivial_cases():
    assert rain_attenuation_db(Environment(rain_rate_mm_per_h=0), 5000) == 0
    assert rain_attenuation_db(Environment(rain_rate_mm_per_h=50), 0) == 0


def test_rain_monotone_in_rate():
    vals = [rain_attenuation_db(Environment(rain_rate_mm_per_h=r), 8000) for r in (1, 5, 25, 100)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    env = Environment(rain_rate_mm_per_h=25, rain_coeff_k=0.0002425, rain_coeff_alpha=1.5266)
    assert rain_attenuation_db(env, 8000) == pytest.approx(0.0002425 * 25 ** 1.5266 * 8)


def test_rain_coefficient_defaults_match_table():
    k, alpha = rain_coefficients(4.98, "V")
    env = Environment()
    assert env.rain_coeff_k == pytest.approx(k, rel=1e-3)
    assert env.rain_coeff_alpha == pytest.approx(alpha, rel=1e-3)
    # on a table row the lookup is exact
    assert rain_coefficients(5.0, "H") == pytest.approx((0.0002162, 1.6969))
    with pytest.raises(LinkError):
        rain_coefficients(12.0)


# --- link budget ---------------------------------------------------------

TX_PT = GeoPoint(32.0, -81.0, 10.0)


def _endpoints(d_m, f=4900.0, tx_ant=HalfWaveDipole(), rx_ant=HalfWaveDipole(), p=30.0, s=-85.0, bearing=45.0):
    rx_pt = destination_point(TX_PT, bearing, d_m)
    return (RadioEndpoint(TX_PT, tx_ant, f, tx_power_dbm=p), RadioEndpoint(rx_pt, rx_ant, f, sensitivity_dbm=s))


def test_link_dipoles_one_km():
    tx, rx = _endpoints(1000)
    r = link_budget(tx, rx, Environment())
    assert r.distance_m == pytest.approx(1000, abs=1e-6)
    assert r.tx_gain_dbi == pytest.approx(2.15) and r.rx_gain_dbi == pytest.approx(2.15)
    assert r.rx_power_dbm == pytest.approx(-71.95, abs=0.01)
    assert r.covered and r.margin_db == pytest.approx(13.05, abs=0.01)


def test_link_zero_loss_passes_power_through():
    f = 10.0
    tx, rx = _endpoints(SPEED_OF_LIGHT / (4 * math.pi * f * 1e6), f=f, tx_ant=Isotropic(), rx_ant=Isotropic())
    r = link_budget(tx, rx, Environment())
    assert r.rx_power_dbm == pytest.approx(30.0, abs=1e-6)


def test_rain_flips_coverage():
    tx, rx = _endpoints(1000)
    margin = link_budget(tx, rx, Environment()).margin_db
    k = 1e-3
    alpha = 1.0
    rate = (margin + 1.0) / k  # rain loss over 1 km = margin + 1 dB
    r = link_budget(tx, rx, Environment(rain_rate_mm_per_h=rate, rain_coeff_k=k, rain_coeff_alpha=alpha))
    assert r.rain_loss_db == pytest.approx(margin + 1.0)
    assert not r.covered


def test_link_identity_exact():
    rnd = random.Random(3)
    for _ in range(200):
        tx, rx = _endpoints(rnd.uniform(5, 50_000), tx_ant=DirectionalSector(rnd.uniform(0, 360)),
                            p=rnd.uniform(-10, 33), bearing=rnd.uniform(0, 360))
        env = Environment(
            propagation_model=rnd.choice(list(PropagationModel)),
            rain_rate_mm_per_h=rnd.uniform(0, 100),
            misc_loss_db=rnd.uniform(0, 10),
        )
        r = link_budget(tx, rx, env)
        ident = r.tx_power_dbm + r.tx_gain_dbi + r.rx_gain_dbi - r.path_loss_db - r.rain_loss_db - r.misc_loss_db
        assert abs(r.rx_power_dbm - ident) <= 1e-9
        assert r.margin_db == r.rx_power_dbm - r.sensitivity_dbm
        assert r.covered == (r.rx_power_dbm >= r.sensitivity_dbm)


def test_link_path_loss_symmetric():
    a = GeoPoint(32.0, -81.0, 60)
    b = GeoPoint(32.05, -81.03, 2)
    sector = DirectionalSector(30)
    for model in PropagationModel:
        env = Environment(propagation_model=model)
        ab = link_budget(RadioEndpoint(a, sector, 4980, tx_power_dbm=30), RadioEndpoint(b, HalfWaveDipole(), 4980, sensitivity_dbm=-85), env)
        ba = link_budget(RadioEndpoint(b, HalfWaveDipole(), 4980, tx_power_dbm=30), RadioEndpoint(a, sector, 4980, sensitivity_dbm=-85), env)
        assert ab.path_loss_db == pytest.approx(ba.path_loss_db, abs=1e-9)
        assert ab.tx_gain_dbi == pytest.approx(ba.rx_gain_dbi, abs=1e-6)
        assert ab.rx_gain_dbi == pytest.approx(ba.tx_gain_dbi, abs=1e-6)


def test_rx_power_decreases_with_distance():
    powers = []
    for d in range(100, 20_000, 250):
        tx, rx = _endpoints(d, tx_ant=Isotropic(), rx_ant=Isotropic(), bearing=123)
        powers.append(link_budget(tx, rx, Environment()).rx_power_dbm)
    assert all(b < a for a, b in zip(powers, powers[1:]))


def test_slant_distance_uses_heights():
    tx = RadioEndpoint(GeoPoint(32, -81, 60), Isotropic(), 4980, tx_power_dbm=30)
    rx = RadioEndpoint(destination_point(GeoPoint(32, -81, 2), 0, 80), Isotropic(), 4980, sensitivity_dbm=-85)
    r = link_budget(tx, rx, Environment())
    assert r.distance_m == pytest.approx(math.hypot(80, 58), abs=1e-6)


def test_link_errors():
    p = GeoPoint(32, -81, 2)
    tx = RadioEndpoint(p, Isotropic(), 4980, tx_power_dbm=30)
    with pytest.raises(LinkError, match="degenerate link"):
        link_budget(tx, RadioEndpoint(p, Isotropic(), 4980, sensitivity_dbm=-85), Environment())
    with pytest.raises(LinkError, match="frequency mismatch"):
        link_budget(tx, RadioEndpoint(GeoPoint(32.1, -81, 2), Isotropic(), 4975, sensitivity_dbm=-85), Environment())
    with pytest.raises(LinkError):
        link_budget(tx, RadioEndpoint(GeoPoint(32.1, -81, 2), Isotropic(), 4980), Environment())


def test_clamped_near_field():
    p = GeoPoint(32, -81, 2)
    tx = RadioEndpoint(p, Isotropic(), 4980, tx_power_dbm=30)
    r = link_budget(tx, RadioEndpoint(p, Isotropic(), 4980, sensitivity_dbm=-85), Environment(), clamp_near_field=True)
    assert r.path_loss_db == fspl_db(4980, 1.0)


def test_vertical_link_hits_dipole_floor():
    tx = RadioEndpoint(GeoPoint(32, -81, 60), HalfWaveDipole(), 4980, tx_power_dbm=30)
    rx = RadioEndpoint(GeoPoint(32, -81, 2), Isotropic(), 4980, sensitivity_dbm=-85)
    r = link_budget(tx, rx, Environment())
    assert r.tx_gain_dbi == pytest.approx(2.15 - 40)
