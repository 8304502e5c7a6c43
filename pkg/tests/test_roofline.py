import io
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdops.roofline import (TITAN_Z, V100, Bound, DeviceSpec, ProfileFormatError,
                            ProfileRecord,
                            attainable_peak, bundled, chart_table, classify, emit_chart,
                            ingest_profiles, load_device, operational_intensity, parse_device,
                            performance, roofline_point)

# reported (space order, dse) -> (OI, GFLOP/s) for the bundled profiles
PRINTED = {
    "titan_z": {
        (8, "basic"): (1.99, 78.54), (12, "basic"): (2.24, 70.70),
        (16, "basic"): (2.48, 78.51), (24, "basic"): (2.71, 75.61),
        (8, "aggressive"): (0.89, 141.88), (12, "aggressive"): (0.86, 127.29),
        (16, "aggressive"): (0.89, 140.06), (24, "aggressive"): (0.88, 126.92),
    },
    "v100": {
        (8, "basic"): (4.90, 693.77), (12, "basic"): (6.90, 740.48),
        (16, "basic"): (9.61, 816.86), (24, "basic"): (7.64, 719.60),
        (8, "aggressive"): (2.18, 1258.16), (12, "aggressive"): (2.56, 1119.42),
        (16, "aggressive"): (3.28, 1251.51), (24, "aggressive"): (2.49, 1509.60),
    },
}


def _records(device):
    return {r.label: r for r in ingest_profiles(bundled(f"{device}_profiles.csv"))}


# -- arithmetic ----------------------------------------------------------------------

@pytest.mark.parametrize("fp, mem, expected, tol", [
    (1_450_112_268, 22_722_746, 1.99, 0.01),
    (32, 1, 1.0, 0.0),
    (1_450_996_129, 9_245_436, 4.90, 0.01),
])
def test_operational_intensity(fp, mem, expected, tol):
    assert operational_intensity(fp, mem) == pytest.approx(expected, abs=tol)


def test_operational_intensity_needs_traffic():
    with pytest.raises(ValueError):
        operational_intensity(10, 0)


@pytest.mark.parametrize("fp, t, expected, tol", [
    (1_450_112_268, 553.92, 78.54, 0.05),
    (641_887_345, 135.73, 141.88, 0.05),
    (929_760_267, 18.48, 1509.60, 1.0),
])
def test_performance(fp, t, expected, tol):
    rec = ProfileRecord(8, "basic", fp, 1, t, 30000, 5)
    assert performance(rec) == pytest.approx(expected, abs=tol)


def test_attainable_peak():
    assert attainable_peak(V100, 2.49) == pytest.approx(2241.0)
    assert attainable_peak(TITAN_Z, 0.89) == pytest.approx(598.08)
    assert attainable_peak(V100, 1e6) == V100.sp_peak
    with pytest.raises(ValueError):
        attainable_peak(V100, 0)


@given(st.floats(1e-3, 1e3))
def test_attainable_is_min_of_roofs(oi):
    for dev in (TITAN_Z, V100):
        att = attainable_peak(dev, oi)
        assert att <= dev.sp_peak and att <= dev.bandwidth * oi * (1 + 1e-12)
        if oi >= dev.ridge_point:
            assert att == dev.sp_peak


def test_ridge_points():
    assert TITAN_Z.ridge_point == pytest.approx(7.06, abs=0.01)
    assert V100.ridge_point == pytest.approx(15.56, abs=0.01)


def test_classification_boundaries():
    assert classify(V100, V100.ridge_point) is Bound.compute
    assert classify(V100, 100.0) is Bound.compute
    assert classify(V100, V100.ridge_point * 0.999) is Bound.memory
    assert classify(TITAN_Z, 0.89) is Bound.memory


def test_titan_z_aggressive_so8_fraction():
    pt = roofline_point(_records("titan_z")[(8, "aggressive")], TITAN_Z)
    assert pt.attainable == pytest.approx(TITAN_Z.bandwidth * pt.oi)
    assert 0.23 <= pt.pct_of_attainable <= 0.25


def test_point_above_roof_warns():
    rec = ProfileRecord(8, "basic", 10 ** 12, 10 ** 9, 0.001, 1, 1)
    with pytest.warns(UserWarning, match="exceeds"):
        roofline_point(rec, V100)


# -- bundled data ----------------------------------------------------------------------

@pytest.mark.parametrize("device", ["titan_z", "v100"])
def test_transcribed_tables_reproduce_printed_oi(device):
    recs = _records(device)
    assert set(recs) == set(PRINTED[device])
    for label, (oi, _) in PRINTED[device].items():
        tol = 0.02 if (device, label) == ("v100", (8, "aggressive")) else 0.01
        r = recs[label]
        assert operational_intensity(r.fp32_per_invocation,
                                     r.mem_transactions_per_invocation) == \
            pytest.approx(oi, abs=tol), label


@pytest.mark.parametrize("device", ["titan_z", "v100"])
def test_transcribed_tables_reproduce_printed_performance(device):
    recs = _records(device)
    for label, (_, perf) in PRINTED[device].items():
        r = recs[label]
        if device == "v100" and label[1] == "basic":
            # times repeat the Titan Z rows; the reported performance cannot be reproduced
            assert performance(r) != pytest.approx(perf, rel=0.005)
            assert any("performance" in msg for msg in r.inconsistencies())
        else:
            assert performance(r) == pytest.approx(perf, rel=0.005), label
            assert r.inconsistencies() == []


def test_every_bundled_point_is_memory_bound():
    for device, dev in (("titan_z", TITAN_Z), ("v100", V100)):
        for r in _records(device).values():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                assert roofline_point(r, dev).bound is Bound.memory


def test_v100_aggressive_band():
    pts = [roofline_point(r, V100) for r in _records("v100").values()
           if r.dse == "aggressive"]
    pcts = [p.pct_of_attainable for p in pts]
    assert all(0.40 <= p <= 0.70 for p in pcts)
    assert max(pcts) >= 0.60


@pytest.mark.parametrize("name, dev", [("titan_z", TITAN_Z), ("v100", V100)])
def test_bundled_devices_match_constants(name, dev):
    assert load_device(bundled(f"{name}.device")) == dev


# -- ingestion ---------------------------------------------------------------------------

def test_ingest_plain_row():
    (rec,) = ingest_profiles(io.StringIO("8,basic,1450112268,22722746,553.92,30000,5\n"))
    assert rec == ProfileRecord(8, "basic", 1450112268, 22722746, 553.92, 30000, 5)
    assert rec.reported_oi is None


def test_ingest_empty_file():
    assert ingest_profiles(io.StringIO("")) == []
    assert ingest_profiles(io.StringIO("# just a comment\n\n")) == []


def test_ingest_header_and_separators():
    text = ('space_order,dse,fp32_count,mem_transactions,total_time_s,timesteps,runs\n'
            '8,aggressive,"641,887,345","22,637,047","135,73",30000,5\n'
            '24,basic,1,2,"1,150.01",30000,5\n')
    a, b = ingest_profiles(io.StringIO(text))
    assert a.fp32_per_invocation == 641_887_345 and a.total_time == pytest.approx(135.73)
    assert b.total_time == pytest.approx(1150.01)


@pytest.mark.parametrize("row, fragment", [
    ("8,basic,-5,22722746,553.92,30000,5", "line 2"),
    ("8,basic,1450112268,22722746,0,30000,5", "line 2"),
    ("8,turbo,1,1,1,1,1", "dse"),
    ("8,basic,1,1,1", "expected 7 fields"),
    ("8,basic,1,2,x,30000,5", "line 2"),
    ('8,basic,"1,45",1,1,1,1', "line 2"),
])
def test_ingest_rejects_bad_rows(row, fragment):
    text = "# comment\n" + row + "\n"
    with pytest.raises(ProfileFormatError, match=fragment):
        ingest_profiles(io.StringIO(text))


def test_ingest_rejects_unknown_header():
    with pytest.raises(ProfileFormatError, match="header"):
        ingest_profiles(io.StringIO("space_order,dse,flops\n"))


def test_device_file_missing_key_is_named():
    text = "name=X\nbandwidth_gbs=100\nsp_peak_gflops=1000\nmemory_gb=4\n"
    with pytest.raises(ProfileFormatError, match="dp_peak_gflops"):
        parse_device(text)


@pytest.mark.parametrize("text, fragment", [
    ("name=X\nbogus=1\n", "bogus"),
    ("name=X\nbandwidth_gbs\n", "key=value"),
    ("name=X\nbandwidth_gbs=fast\n", "bandwidth_gbs"),
])
def test_device_file_errors(text, fragment):
    with pytest.raises(ProfileFormatError, match=fragment):
        parse_device(text)


def test_device_spec_validation():
    with pytest.raises(ValueError):
        DeviceSpec("bad", 0.0, 1.0, 1.0, 1.0)


# -- chart ---------------------------------------------------------------------------------

def test_chart_for_aggressive_rows():
    pts = [roofline_point(r, V100) for r in _records("v100").values()
           if r.dse == "aggressive"]
    chart = emit_chart(pts, V100, "V100")
    assert chart.svg.startswith("<svg") or chart.svg.startswith("<?xml")
    assert chart.svg.count('<circle class="point"') == 4
    for so in (8, 12, 16, 24):
        assert f"so{so}-aggressive" in chart.svg
    rows = [ln for ln in chart.table.splitlines() if not ln.startswith("#")]
    assert len(rows) == 4
    for p in pts:
        assert p.performance <= p.attainable


def test_chart_table_row_for_titan_z_basic_so12():
    pt = roofline_point(_records("titan_z")[(12, "basic")], TITAN_Z)
    (row,) = chart_table([pt]).splitlines()[1:]
    oi, perf, att, pct, label = row.split()
    assert round(float(oi), 2) == 2.24 and perf == "70.70"
    assert label == "so12-basic"
    assert float(att) == pytest.approx(TITAN_Z.bandwidth * float(oi), rel=1e-4)


def test_chart_point_at_ridge():
    # 14000 * 32 flops per 900 transactions: OI is exactly the ridge point
    pt = roofline_point(ProfileRecord(8, "basic", 14000 * 32 * 1000, 900 * 1000, 1.0, 1, 1),
                        V100)
    assert pt.oi == V100.ridge_point
    assert pt.bound is Bound.compute
    assert pt.attainable == pytest.approx(V100.sp_peak)
    chart = emit_chart([pt], V100)
    assert chart.svg.count('<circle class="point"') == 1


def test_chart_needs_points(tmp_path):
    with pytest.raises(ValueError):
        emit_chart([], V100)
    pt = roofline_point(_records("titan_z")[(8, "basic")], TITAN_Z)
    svg, dat = emit_chart([pt], TITAN_Z).write(tmp_path / "sub" / "chart")
    assert svg.exists() and dat.exists() and dat.suffix == ".dat"
