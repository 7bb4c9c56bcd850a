import numpy as np
import pytest

from ratasim.config import preset
from ratasim.domain import GROUND, Category, ConfigError
from ratasim.workload import arrival_times, generate_arrivals, read_manifest, write_manifest


def test_g1_count_near_expected():
    counts = [len(generate_arrivals(preset("G1"), s)) for s in range(20)]
    # 1500 expected, Poisson sd ~ 39
    assert abs(np.mean(counts) - 1500) < 30
    assert all(abs(c - 1500) < 200 for c in counts)


def test_g4_count_near_expected():
    n = len(generate_arrivals(preset("G4"), 0))
    assert abs(n - 98010) < 5 * 313


def test_same_seed_same_stream():
    a = generate_arrivals(preset("G2"), 11)
    b = generate_arrivals(preset("G2"), 11)
    assert a == b
    assert a != generate_arrivals(preset("G2"), 12)


def test_times_sorted_inside_window():
    tasks = generate_arrivals(preset("G2"), 3)
    times = [t.arrival_time_s for t in tasks]
    assert times == sorted(times)
    assert 0 < times[0] and times[-1] <= 6000.0
    assert [t.id for t in tasks] == list(range(len(tasks)))


def test_category_ranges_and_mix():
    config = preset("G3")
    tasks = generate_arrivals(config, 5)
    wl = config.workload
    by_cat = {c: [t for t in tasks if t.category is c] for c in Category}
    for cat, group in by_cat.items():
        lo, hi = wl.size_gb[cat.value]
        dlo, dhi = wl.dtn[cat.value]
        assert all(lo <= t.size_gb <= hi for t in group)
        assert all(dlo <= t.dtn_fraction <= dhi for t in group)
        assert len(group) / len(tasks) == pytest.approx(
            config.category_mix[list(Category).index(cat)], abs=0.02)
    assert all(t.origin == GROUND for t in by_cat[Category.GND_TO_SAT])
    assert all(0 <= t.origin < 90 for t in by_cat[Category.SAT_TO_SAT])
    assert np.mean([t.size_gb for t in by_cat[Category.SAT_TO_SAT]]) == pytest.approx(8.5, abs=0.3)
    lo, hi = wl.intensity_flop_per_mb
    assert all(lo <= t.intensity_flop_per_mb <= hi for t in tasks)


def test_interarrival_mean():
    times = arrival_times(2.0, 50000.0, np.random.default_rng(0))
    gaps = np.diff(times)
    assert gaps.mean() == pytest.approx(0.5, rel=0.02)
    assert arrival_times(2.0, 0.0, np.random.default_rng(0)).size == 0


def test_loguniform_option():
    config = preset("G1")
    config.workload.intensity_distribution = "loguniform"
    config.workload.intensity_flop_per_mb = (1e6, 1e9)
    x = np.log10([t.intensity_flop_per_mb for t in generate_arrivals(config, 0)])
    assert x.min() >= 6 and x.max() <= 9
    assert x.mean() == pytest.approx(7.5, abs=0.1)


def test_manifest_round_trip_exact(tmp_path):
    tasks = generate_arrivals(preset("G1"), 9)
    path = tmp_path / "arrivals.csv"
    write_manifest(tasks, path)
    assert read_manifest(path) == tasks


def test_manifest_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("task_id,t\n1,oops\n")
    with pytest.raises(ConfigError):
        read_manifest(bad)
    with pytest.raises(ConfigError):
        read_manifest(tmp_path / "missing.csv")
