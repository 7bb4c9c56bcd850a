from ratasim.domain import (
    BlockReason,
    Category,
    Event,
    EventKind,
    Mode,
    Resource,
    Sltn,
    render_block_reason,
)

from conftest import make_sat, make_task


def test_block_reason_strings():
    assert render_block_reason(BlockReason(Resource.CORES, Mode.ROOT_ONLY)) == "Root-only: Insufficient cores"
    assert str(BlockReason(Resource.ENERGY, Mode.ROOT_ONLY)) == "Root-only: Insufficient energy"
    assert str(BlockReason(Resource.MEMORY, Mode.COOPERATIVE)) == "Cooperative: Insufficient memory"


def test_category_values_match_report_keys():
    assert [c.value for c in Category] == ["SatToSat", "SatToGnd", "GndToSat"]


def test_fresh_satellite_has_full_pools():
    sat = make_sat(battery=250.0)
    assert sat.available_cores == 4
    assert sat.available_memory_gb == 128.0
    assert sat.available_storage_gb == 512.0
    assert sat.battery_level_wh == 250.0
    assert sat.is_quiescent()
    assert sat.allocated() == (0, 0, 0)


def test_task_flops_and_response():
    task = make_task(size=2.0, intensity=300e6, t=5.0)
    assert task.flops == 6.144e11
    assert task.response_time_s is None
    task.completion_time_s = 12.5
    assert task.response_time_s == 7.5


def test_sltn_members_root_first():
    s = Sltn(3, [1, 7])
    assert s.members == [3, 1, 7]
    assert len(s) == 3


def test_events_order_by_time_then_seq():
    a = Event(1.0, 5, EventKind.SIM_END)
    b = Event(1.0, 2, EventKind.TASK_ARRIVAL, 0)
    c = Event(0.5, 9, EventKind.TASK_ARRIVAL, 1)
    assert sorted([a, b, c]) == [c, b, a]
