import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlink.config import (PARAMETERS, SweepConfig, build_config, load_config,
                          parse_assignments, parse_quantity, parse_values, to_report)
from qlink.errors import ConfigurationError

TWO_PI = 2 * math.pi


def config(text, experiment=None):
    return build_config(parse_assignments(text.strip().splitlines()), experiment)


def test_minimal_transfer_config_fills_defaults():
    c = config("experiment = transfer\nlength = 30 m\nkappa = 1 MHz")
    f = c.fixed
    assert c.experiment == "transfer" and c.axes == ()
    assert f["length"] == 30.0 and f["kappa"] == pytest.approx(TWO_PI * 1e6)
    assert f["broad_wall"] == pytest.approx(0.02286)
    assert f["center_frequency"] == pytest.approx(TWO_PI * 8.4e9)
    assert f["tolerance"] == 1e-10 and c.tolerance == 1e-10
    assert f["resonant"] is True and f["lamb_compensation"] is True
    assert f["eta"] == 1.0 and f["span"] == pytest.approx(20 * math.pi)
    assert (c.format, c.workers, c.out) == ("csv", 1, None)
    assert set(f) == set(PARAMETERS)


@pytest.mark.parametrize("text", ["1 MHz", "1MHz", "2pi*1MHz", "2 * pi * 1 MHz",
                                  "1000 kHz", "0.001 GHz", "1e6 Hz"])
def test_frequency_spellings_agree(text):
    assert parse_quantity("kappa", text) == pytest.approx(TWO_PI * 1e6, rel=1e-15)


@given(st.floats(1e-3, 1e4, allow_nan=False))
def test_frequency_roundtrip(x):
    value = parse_quantity("kappa", f"{x!r} MHz")
    assert value == pytest.approx(TWO_PI * x * 1e6, rel=1e-15)
    assert to_report("kappa", value) == pytest.approx(x, rel=1e-14)


@pytest.mark.parametrize("key, text, expected", [
    ("length", "250 cm", 2.5), ("length", "5mm", 5e-3),
    ("t1", "11.5 us", 11.5e-6), ("t1", "11.5 µs", 11.5e-6), ("duration", "300 ns", 3e-7),
    ("span", "20pi", 20 * math.pi), ("span", "10", 10.0), ("eta", "4", 4.0),
    ("mode_offset", "-3", -3), ("resonant", "off", False), ("lamb_compensation", "yes", True),
    ("method", "eigen", "eigen"),
])
def test_scalar_kinds(key, text, expected):
    value = parse_quantity(key, text)
    assert type(value) is type(expected)
    assert value == pytest.approx(expected)


@pytest.mark.parametrize("key, text, match", [
    ("kappa", "1", "needs a unit"), ("length", "30", "needs a unit"),
    ("t1", "5", "needs a unit"), ("eta", "4 MHz", "unexpected unit"),
    ("length", "2pi*3 m", "2pi prefix"), ("mode_offset", "1.5", "integer"),
    ("resonant", "maybe", "boolean"), ("method", "nearest", "one of"),
    ("kappa", "fast", "cannot parse"), ("nonsense", "1", "unknown key"),
])
def test_scalar_errors_name_the_key(key, text, match):
    with pytest.raises(ConfigurationError, match=match) as info:
        parse_quantity(key, text, line=7)
    assert repr(key) in str(info.value) and "7" in str(info.value)


def test_lists_share_a_trailing_unit():
    assert parse_values("kappa", "20, 50 MHz") == pytest.approx([TWO_PI * 20e6, TWO_PI * 50e6])
    assert parse_values("length", "1 m, 500 cm") == [1.0, 5.0]
    assert parse_values("eta", "1,4") == [1.0, 4.0]


def test_generators():
    lin = parse_values("eta", "linspace(1, 3, 5)")
    assert lin == pytest.approx([1.0, 1.5, 2.0, 2.5, 3.0])
    log = parse_values("kappa", "logspace(1, 100, 3) MHz")
    assert [to_report("kappa", v) for v in log] == pytest.approx([1.0, 10.0, 100.0])
    assert parse_values("mode_offset", "linspace(-2, 2, 5)") == [-2, -1, 0, 1, 2]


@pytest.mark.parametrize("text, match", [
    ("1, , 2", "empty list item"), ("linspace(1, 2)", "bad generator"),
    ("logspace(-1, 2, 3)", "positive"), ("linspace(1, 2, 0)", "at least one"), ("", "empty"),
])
def test_value_errors(text, match):
    with pytest.raises(ConfigurationError, match=match):
        parse_values("eta", text)


def test_axes_and_points():
    c = config("""
        experiment = transfer
        length = 1, 5 m   # slow axis
        kappa = 1, 2, 3 MHz
        eta = 4
    """)
    assert [k for k, _ in c.axes] == ["length", "kappa"]
    pts = c.points()
    assert len(pts) == 6
    assert [p["length"] for p in pts] == [1.0, 1.0, 1.0, 5.0, 5.0, 5.0]
    assert [to_report("kappa", p["kappa"]) for p in pts[:3]] == pytest.approx([1, 2, 3])
    assert all(p["kappa2"] == p["kappa"] and p["eta"] == 4.0 for p in pts)
    assert pts[0]["g0"] is None


def test_stirap_peak_coupling_default():
    c = config("length = 5 m\nkappa = 10 MHz", experiment="stirap-compare")
    assert c.points()[0]["g0"] == pytest.approx(0.5 * c.fixed["kappa"])


def test_single_point_sweep():
    c = config("experiment = modes\nlength = 30 m")
    assert len(c.points()) == 1


def test_duplicate_key_names_key_and_lines():
    with pytest.raises(ConfigurationError, match=r"<config>:3: duplicate key 'kappa' "
                                                 r"\(first set on line 2\)"):
        parse_assignments(["length = 1 m", "kappa = 1 MHz", "kappa = 2 MHz"])


def test_assignment_errors():
    with pytest.raises(ConfigurationError, match="unknown key 'kapa'"):
        parse_assignments(["kapa = 1 MHz"])
    with pytest.raises(ConfigurationError, match="expected 'key = value'"):
        parse_assignments(["kappa 1 MHz"])
    with pytest.raises(ConfigurationError, match="unknown key 'workers'"):
        parse_assignments(["workers = 2"], allow_settings=False)


def test_missing_keys():
    with pytest.raises(ConfigurationError, match="missing required key 'experiment'"):
        config("length = 1 m")
    with pytest.raises(ConfigurationError, match="missing required key 'kappa'"):
        config("experiment = transfer\nlength = 1 m")
    with pytest.raises(ConfigurationError, match="unknown kind"):
        config("experiment = teleport\nlength = 1 m")


def test_settings_validation():
    base = "experiment = modes\nlength = 1 m\n"
    c = config(base + "workers = 3\nformat = jsonl\nout = data.jsonl")
    assert (c.workers, c.format, c.out) == (3, "jsonl", "data.jsonl")
    for bad in ("workers = 0", "workers = many", "format = xlsx"):
        with pytest.raises(ConfigurationError):
            config(base + bad)


def test_value_error_carries_file_and_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("experiment = transfer\nlength = 30 m\nkappa = 1\n")
    with pytest.raises(ConfigurationError, match=r"bad.cfg:3: key 'kappa'"):
        load_config(path)


def test_digest_tracks_physics_only():
    a = config("experiment = modes\nlength = 30 m")
    b = config("experiment = modes\nlength = 30 m\nworkers = 4\nformat = jsonl\nout = x")
    c = config("experiment = modes\nlength = 31 m")
    assert a.digest() == b.digest() != c.digest()
    assert len(a.digest()) == 16


def test_resolved_reports_mhz():
    c = config("experiment = lamb\nlength = 30 m\nkappa = 1, 5 MHz")
    r = c.resolved()
    assert r["axes"] == [["kappa", [pytest.approx(1.0), pytest.approx(5.0)]]]
    assert r["fixed"]["center_frequency"] == pytest.approx(8400.0)


def test_sweep_config_is_frozen():
    c = SweepConfig("modes", {"length": 1.0})
    with pytest.raises(AttributeError):
        c.workers = 2
