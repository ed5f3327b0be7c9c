"""Structured text configuration for devices.

INI-style files with units spelled out in the key names, one circuit
element per section, ordered:

    [device]
    label = device_a_like
    topology = reflection          ; or hanger

    [port]
    z0_ohm = 50

    [element.1]
    kind = shunt_capacitor
    c_fF = 1226.6

    [element.2]
    kind = tline
    z0_ohm = 150
    length_um = 3057.2
    v_ph_m_per_s = 1.15e8
    loss_np_per_m = 0              ; optional

    [element.3]
    kind = kinetic_inductor
    length_squares = 48
    l_per_square_pH = 1.012

    [element.4]
    kind = junction                ; must be last

    [junction]
    kind = ssms_quartic            ; sis | ssms_quartic | koops_cpr
    l_j_nH = 0.172
    c4_over_c2 = 5.3e-3            ; ssms_quartic only
    ;tau_star = 0.7                ; koops_cpr only

    [bbq_pin]                      ; optional: skip the circuit solve and
    l_nH = 1.623                   ; use published series-model values
    c_pF = 0.474
    r_ohm = 0.541

    [grid]                         ; optional impedance-scan window
    f_start_GHz = 6
    f_stop_GHz = 12
    points = 4001

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from . import junction as jn
from . import netlist as nl


class ConfigError(ValueError):
    pass


_ELEMENT_KEYS = {
    "tline": {"z0_ohm", "length_um", "v_ph_m_per_s", "loss_np_per_m"},
    "kinetic_inductor": {"length_squares", "l_per_square_pH"},
    "series_inductor": {"l_nH"},
    "series_capacitor": {"c_fF"},
    "series_resistor": {"r_ohm"},
    "shunt_inductor": {"l_nH"},
    "shunt_capacitor": {"c_fF"},
    "shunt_resistor": {"r_ohm"},
    "junction": set(),
}

_JUNCTION_KINDS = {"sis", "ssms_quartic", "koops_cpr"}


@dataclass(frozen=True)
class DeviceConfig:
    label: str
    netlist: nl.Netlist
    junction: jn.JunctionModel
    bbq_pin: tuple[float, float, float] | None  # (L, C, R) in SI
    grid: nl.FrequencyGrid | None


def _getfloat(section, key, sec_name, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"[{sec_name}] missing required key {key!r}")
    try:
        return float(section[key])
    except ValueError as exc:
        raise ConfigError(f"[{sec_name}] {key} = {section[key]!r} is not a number") from exc


def _check_keys(section, allowed, sec_name):
    extra = set(section.keys()) - allowed
    if extra:
        raise ConfigError(f"[{sec_name}] unknown keys: {sorted(extra)}")


def _build_element(kind, section, sec_name):
    if kind == "tline":
        return nl.TlSegment(
            z0=_getfloat(section, "z0_ohm", sec_name),
            length=_getfloat(section, "length_um", sec_name) * 1e-6,
            v_ph=_getfloat(section, "v_ph_m_per_s", sec_name),
            loss=_getfloat(section, "loss_np_per_m", sec_name, default=0.0),
        )
    if kind == "kinetic_inductor":
        return nl.KineticInductor(
            length_squares=_getfloat(section, "length_squares", sec_name),
            l_sq=_getfloat(section, "l_per_square_pH", sec_name) * 1e-12,
        )
    if kind == "series_inductor":
        return nl.SeriesInductor(_getfloat(section, "l_nH", sec_name) * 1e-9)
    if kind == "series_capacitor":
        return nl.SeriesCapacitor(_getfloat(section, "c_fF", sec_name) * 1e-15)
    if kind == "series_resistor":
        return nl.SeriesResistor(_getfloat(section, "r_ohm", sec_name))
    if kind == "shunt_inductor":
        return nl.ShuntInductor(_getfloat(section, "l_nH", sec_name) * 1e-9)
    if kind == "shunt_capacitor":
        return nl.ShuntCapacitor(_getfloat(section, "c_fF", sec_name) * 1e-15)
    if kind == "shunt_resistor":
        return nl.ShuntResistor(_getfloat(section, "r_ohm", sec_name))
    raise ConfigError(f"[{sec_name}] unknown element kind {kind!r}")


def load_device_config(path) -> DeviceConfig:
    """Parse and validate a device configuration file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys carry units and are case-sensitive
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    known = {"device", "port", "junction", "bbq_pin", "grid"}
    element_secs = []
    for sec in parser.sections():
        if sec in known:
            continue
        if sec.startswith("element."):
            try:
                order = int(sec.split(".", 1)[1])
            except ValueError as exc:
                raise ConfigError(f"bad element section name [{sec}]") from exc
            element_secs.append((order, sec))
        else:
            raise ConfigError(f"unknown section [{sec}]")
    if "device" not in parser:
        raise ConfigError("missing [device] section")
    if "junction" not in parser:
        raise ConfigError("missing [junction] section")
    if not element_secs:
        raise ConfigError("no [element.N] sections")
    element_secs.sort()
    orders = [o for o, _ in element_secs]
    if orders != list(range(1, len(orders) + 1)):
        raise ConfigError(f"element sections must be numbered 1..N, got {orders}")

    dev = parser["device"]
    _check_keys(dev, {"label", "topology"}, "device")
    label = dev.get("label", "device")
    topology = dev.get("topology", "reflection").strip().lower()
    if topology not in (nl.REFLECTION, nl.HANGER):
        raise ConfigError(f"[device] topology must be reflection or hanger")

    z_port = 50.0
    if "port" in parser:
        _check_keys(parser["port"], {"z0_ohm"}, "port")
        z_port = _getfloat(parser["port"], "z0_ohm", "port")

    jsec = parser["junction"]
    _check_keys(jsec, {"kind", "l_j_nH", "c4_over_c2", "tau_star", "c2"}, "junction")
    jkind = jsec.get("kind", "").strip().lower()
    if jkind not in _JUNCTION_KINDS:
        raise ConfigError(f"[junction] kind must be one of {sorted(_JUNCTION_KINDS)}")
    l_j = _getfloat(jsec, "l_j_nH", "junction") * 1e-9
    if jkind == "sis":
        model = jn.sis(l_j)
    elif jkind == "ssms_quartic":
        ratio = _getfloat(jsec, "c4_over_c2", "junction")
        c2 = _getfloat(jsec, "c2", "junction", default=1.0)
        model = jn.ssms(l_j, ratio, c2=c2)
    else:
        model = jn.koops(l_j, _getfloat(jsec, "tau_star", "junction"))

    elements = []
    for order, sec_name in element_secs:
        section = parser[sec_name]
        kind = section.get("kind", "").strip().lower()
        if not kind:
            raise ConfigError(f"[{sec_name}] missing kind")
        if kind == "junction":
            if order != len(element_secs):
                raise ConfigError("junction element must be the last [element.N]")
            _check_keys(section, {"kind"}, sec_name)
            elements.append(nl.JunctionPlaceholder(l_j))
            continue
        allowed = _ELEMENT_KEYS.get(kind)
        if allowed is None:
            raise ConfigError(f"[{sec_name}] unknown element kind {kind!r}")
        _check_keys(section, allowed | {"kind"}, sec_name)
        elements.append(_build_element(kind, section, sec_name))
    try:
        netlist = nl.Netlist(tuple(elements), topology, z_port)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    pin = None
    if "bbq_pin" in parser:
        psec = parser["bbq_pin"]
        _check_keys(psec, {"l_nH", "c_pF", "r_ohm"}, "bbq_pin")
        pin = (
            _getfloat(psec, "l_nH", "bbq_pin") * 1e-9,
            _getfloat(psec, "c_pF", "bbq_pin") * 1e-12,
            _getfloat(psec, "r_ohm", "bbq_pin", default=0.0),
        )

    grid = None
    if "grid" in parser:
        gsec = parser["grid"]
        _check_keys(gsec, {"f_start_GHz", "f_stop_GHz", "points"}, "grid")
        grid = nl.FrequencyGrid(
            _getfloat(gsec, "f_start_GHz", "grid") * 1e9,
            _getfloat(gsec, "f_stop_GHz", "grid") * 1e9,
            int(_getfloat(gsec, "points", "grid", default=4001)),
        )

    return DeviceConfig(
        label=label, netlist=netlist, junction=model, bbq_pin=pin, grid=grid
    )
