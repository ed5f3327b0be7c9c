import textwrap

import pytest

from kerramp import netlist as nl
from kerramp.config import ConfigError, load_device_config

GOOD = textwrap.dedent(
    """
    [device]
    label = test_device
    topology = reflection

    [port]
    z0_ohm = 50

    [element.1]
    kind = shunt_capacitor
    c_fF = 1200

    [element.2]
    kind = tline
    z0_ohm = 150
    length_um = 3000
    v_ph_m_per_s = 1.15e8

    [element.3]
    kind = kinetic_inductor
    length_squares = 48
    l_per_square_pH = 1.012

    [element.4]
    kind = junction

    [junction]
    kind = ssms_quartic
    l_j_nH = 0.17
    c4_over_c2 = 5.3e-3

    [grid]
    f_start_GHz = 6
    f_stop_GHz = 12
    points = 2001
    """
)


def write(tmp_path, text, name="dev.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestLoadDeviceConfig:
    def test_good_config(self, tmp_path):
        cfg = load_device_config(write(tmp_path, GOOD))
        assert cfg.label == "test_device"
        assert cfg.netlist.topology == nl.REFLECTION
        assert isinstance(cfg.netlist.elements[0], nl.ShuntCapacitor)
        assert cfg.netlist.elements[0].c == pytest.approx(1200e-15)
        assert isinstance(cfg.netlist.elements[1], nl.TlSegment)
        assert cfg.netlist.elements[1].length == pytest.approx(3000e-6)
        assert cfg.netlist.junction.l_j == pytest.approx(0.17e-9)
        assert cfg.junction.kind == "ssms_quartic"
        assert cfg.junction.c4_over_c2 == pytest.approx(5.3e-3)
        assert cfg.grid.count == 2001
        assert cfg.bbq_pin is None

    def test_golden_configs_parse(self):
        from conftest import config_path

        for name in (
            "device_a_like.cfg",
            "device_a_sis_twin.cfg",
            "device_b_like.cfg",
            "device_b_pinned.cfg",
        ):
            cfg = load_device_config(config_path(name))
            assert cfg.netlist.elements

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown section"):
            load_device_config(write(tmp_path, GOOD + "\n[mystery]\nx = 1\n"))

    def test_unknown_key_rejected(self, tmp_path):
        bad = GOOD.replace("c_fF = 1200", "c_fF = 1200\nbogus_key = 3")
        with pytest.raises(ConfigError, match="unknown keys"):
            load_device_config(write(tmp_path, bad))

    def test_wrong_units_key_rejected(self, tmp_path):
        bad = GOOD.replace("c_fF = 1200", "c_pF = 1.2")
        with pytest.raises(ConfigError):
            load_device_config(write(tmp_path, bad))

    def test_junction_not_last_rejected(self, tmp_path):
        bad = GOOD.replace("kind = junction", "kind = series_resistor\nr_ohm = 1")
        with pytest.raises(ConfigError):
            load_device_config(write(tmp_path, bad))

    def test_gap_in_element_numbering(self, tmp_path):
        bad = GOOD.replace("[element.4]", "[element.5]")
        with pytest.raises(ConfigError, match="numbered"):
            load_device_config(write(tmp_path, bad))

    def test_missing_junction_section(self, tmp_path):
        bad = GOOD.replace("[junction]", "[junction_typo]")
        with pytest.raises(ConfigError):
            load_device_config(write(tmp_path, bad))

    def test_bad_number(self, tmp_path):
        bad = GOOD.replace("l_j_nH = 0.17", "l_j_nH = seventeen")
        with pytest.raises(ConfigError, match="not a number"):
            load_device_config(write(tmp_path, bad))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_device_config(str(tmp_path / "nope.cfg"))

    def test_pin_section(self, tmp_path):
        cfg = load_device_config(
            write(tmp_path, GOOD + "\n[bbq_pin]\nl_nH = 1.6\nc_pF = 0.5\nr_ohm = 0.5\n")
        )
        l, c, r = cfg.bbq_pin
        assert l == pytest.approx(1.6e-9)
        assert c == pytest.approx(0.5e-12)
        assert r == pytest.approx(0.5)

    def test_koops_junction(self, tmp_path):
        text = GOOD.replace("kind = ssms_quartic", "kind = koops_cpr").replace(
            "c4_over_c2 = 5.3e-3", "tau_star = 0.7"
        )
        cfg = load_device_config(write(tmp_path, text))
        assert cfg.junction.tau_star == pytest.approx(0.7)
