import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratasim.config import preset
from ratasim.constellation import (
    TWO_PI,
    build_constellation,
    eclipse_fraction,
    elect_root,
    form_sltns,
    in_sunlight,
    orbital_period,
    recharge_rate,
    resource_score,
    sunlit_time,
)
from ratasim.domain import ConfigError

from conftest import make_sat

# Frozen from a 30-digit mpmath evaluation of Kepler's law and the
# cylindrical-shadow arcsine with R_E = 6371 km, mu = 3.986004418e14.
PERIOD_550 = 5730.127089334607
PERIOD_1200 = 6556.028755536671
ECLIPSE_550 = 0.3722441068644836
ECLIPSE_2000 = 0.2753305214038840


def test_orbital_period_oracle():
    assert orbital_period(550.0) == pytest.approx(PERIOD_550, rel=1e-12)
    assert orbital_period(1200.0) == pytest.approx(PERIOD_1200, rel=1e-12)


def test_orbital_period_monotone():
    alts = np.linspace(500, 2000, 50)
    periods = [orbital_period(a) for a in alts]
    assert all(b > a for a, b in zip(periods, periods[1:]))


@pytest.mark.parametrize("alt", [499.9, 2000.1, -5.0])
def test_orbital_period_rejects_out_of_range(alt):
    with pytest.raises(ConfigError):
        orbital_period(alt)


def test_eclipse_fraction_oracle():
    assert eclipse_fraction(550.0) == pytest.approx(ECLIPSE_550, rel=1e-12)
    assert eclipse_fraction(2000.0) == pytest.approx(ECLIPSE_2000, rel=1e-12)
    assert round(eclipse_fraction(550.0), 3) == 0.372
    assert round(eclipse_fraction(2000.0), 3) == 0.275


def test_eclipse_fraction_beta():
    # the beta form agrees with the arcsine form at beta = 0 limit
    assert eclipse_fraction(800.0, 1e-12) == pytest.approx(eclipse_fraction(800.0), abs=1e-9)
    # shrinks with beta and vanishes at high beta
    assert eclipse_fraction(800.0, 0.5) < eclipse_fraction(800.0, 0.2) < eclipse_fraction(800.0)
    assert eclipse_fraction(800.0, 1.4) == 0.0


def test_sunlight_window_centred_on_anti_solar_phase():
    sat = make_sat(eclipse=0.3, phase=0.0, period=1000.0)
    assert in_sunlight(sat, 0.0)
    assert not in_sunlight(sat, 500.0)  # theta = pi
    # window edges at theta = pi -/+ 0.3 pi, i.e. t = 350 and 650
    assert in_sunlight(sat, 349.0)
    assert not in_sunlight(sat, 351.0)
    assert not in_sunlight(sat, 649.0)
    assert in_sunlight(sat, 651.0)
    assert recharge_rate(sat, 0.0) == 100.0
    assert recharge_rate(sat, 500.0) == 0.0


@settings(max_examples=200, deadline=None)
@given(
    f=st.floats(0.0, 0.45),
    phase=st.floats(0.0, TWO_PI, exclude_max=True),
    t0=st.floats(0.0, 20000.0),
    span=st.floats(0.0, 20000.0),
)
def test_sunlit_time_matches_dense_sampling(f, phase, t0, span):
    sat = make_sat(eclipse=f, phase=phase, period=1000.0)
    n = 20000
    ts = t0 + (np.arange(n) + 0.5) * span / n
    theta = (TWO_PI * ts / sat.orbital_period_s + phase) % TWO_PI
    sampled = np.count_nonzero(np.abs(theta - math.pi) >= math.pi * f) * span / n
    assert sunlit_time(sat, t0, t0 + span) == pytest.approx(sampled, abs=span * 2e-3 + 1e-6)


def test_sunlit_time_full_orbits():
    sat = make_sat(eclipse=0.35, phase=1.0, period=1000.0)
    assert sunlit_time(sat, 123.0, 3123.0) == pytest.approx(3 * 650.0, rel=1e-12)
    assert sunlit_time(sat, 5.0, 5.0) == 0.0


def test_resource_score():
    sat = make_sat(battery=200.0)
    assert resource_score(sat) == 1.0
    sat.available_cores = 2
    sat.available_memory_gb = 64.0
    sat.battery_level_wh = 50.0
    assert resource_score(sat) == pytest.approx(0.25 * (0.5 + 0.5 + 1.0 + 0.25))


def _sats(n, rng):
    return [make_sat(i, phase=float(rng.uniform(0, TWO_PI))) for i in range(n)]


@pytest.mark.parametrize("n,k", [(20, 1), (55, 6), (90, 15), (120, 29)])
def test_sltn_partition_sizes(n, k):
    sats = _sats(n, np.random.default_rng(n))
    sltns = form_sltns(sats, k)
    sizes = [len(s) for s in sltns]
    assert len(sltns) == k
    assert sum(sizes) == n
    assert max(sizes) - min(sizes) <= 1
    members = sorted(m for s in sltns for m in s.members)
    assert members == list(range(n))
    if (n, k) == (120, 29):
        assert set(sizes) == {4, 5}


def test_sltn_chunks_are_phase_contiguous():
    sats = _sats(30, np.random.default_rng(1))
    sltns = form_sltns(sats, 4)
    by_phase = [s.id for s in sorted(sats, key=lambda s: s.phase_offset)]
    flat = []
    for sl in sltns:
        flat.extend(sorted(sl.members, key=lambda i: sats[i].phase_offset))
    assert flat == by_phase


def test_root_is_best_score_lowest_id_on_ties():
    sats = [make_sat(i, phase=0.1 * i) for i in range(5)]
    assert form_sltns(sats, 1)[0].root_id == 0
    sats[3].battery_level_wh = 100.0
    sats[1].battery_level_wh = 100.0
    assert form_sltns(sats, 1)[0].root_id == 0
    sats[0].available_cores = 0
    sats[2].available_cores = 0
    sats[4].available_cores = 0
    # 1 and 3 tie on score; lowest id wins
    assert form_sltns(sats, 1)[0].root_id == 1


def test_elect_root_keeps_members():
    sats = [make_sat(i, phase=0.1 * i) for i in range(4)]
    sltn = form_sltns(sats, 1)[0]
    assert elect_root(sltn, sats) is sltn
    sats[0].available_cores = 0
    again = elect_root(sltn, sats)
    assert again.root_id == 1
    assert sorted(again.members) == sorted(sltn.members)


def test_form_sltns_errors():
    sats = _sats(3, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        form_sltns(sats, 0)
    with pytest.raises(ConfigError):
        form_sltns(sats, 4)


def test_build_constellation_draws_inside_ranges():
    config = preset("G4")
    sats = build_constellation(config, np.random.default_rng(3))
    assert [s.id for s in sats] == list(range(120))
    for s in sats:
        assert 500.0 <= s.altitude_km <= 2000.0
        assert 0.0 <= s.phase_offset < TWO_PI
        assert s.orbital_period_s == orbital_period(s.altitude_km)
        assert s.battery_level_wh == s.battery_capacity_wh == 280.0
