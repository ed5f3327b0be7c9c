"""Touchstone v1 and CSV trace I/O.

Writers emit RI format in Hz (one- and two-port).  The reader accepts the
common unit keywords (HZ/KHZ/MHZ/GHZ), RI/MA/DB formats, and S or Z
parameter types, which covers both scattering traces for resonance fits
and impedance exports for black-box extraction.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

_UNIT = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


class TouchstoneError(ValueError):
    pass


def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_touchstone(path, freqs_hz, data, z0=50.0, parameter="S", comment=None):
    """Write a .s1p/.s2p file in RI format with frequencies in Hz.

    ``data`` is (N,) complex for one-port or (N, 2, 2) for two-port.
    """
    freqs_hz = np.asarray(freqs_hz, dtype=float)
    data = np.asarray(data, dtype=complex)
    parameter = parameter.upper()
    if parameter not in ("S", "Z"):
        raise TouchstoneError("parameter must be S or Z")
    lines = []
    if comment:
        for c in str(comment).splitlines():
            lines.append(f"! {c}")
    lines.append(f"# HZ {parameter} RI R {z0:g}")
    if data.ndim == 1:
        if data.shape[0] != freqs_hz.size:
            raise TouchstoneError("data length mismatch")
        for f, v in zip(freqs_hz, data):
            lines.append(f"{f:.10e} {v.real:.12e} {v.imag:.12e}")
    elif data.ndim == 3 and data.shape[1:] == (2, 2):
        # Touchstone 2-port column order: S11 S21 S12 S22.
        for f, m in zip(freqs_hz, data):
            lines.append(
                f"{f:.10e} "
                f"{m[0, 0].real:.12e} {m[0, 0].imag:.12e} "
                f"{m[1, 0].real:.12e} {m[1, 0].imag:.12e} "
                f"{m[0, 1].real:.12e} {m[0, 1].imag:.12e} "
                f"{m[1, 1].real:.12e} {m[1, 1].imag:.12e}"
            )
    else:
        raise TouchstoneError("data must be (N,) or (N, 2, 2)")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_touchstone(path):
    """Read a .s1p/.s2p file.

    Returns
    -------
    dict with keys ``freqs_hz``, ``data`` ((N,) complex or (N,2,2)),
    ``z0``, ``parameter`` ("S" or "Z").
    """
    unit = 1.0
    fmt = "RI"
    parameter = "S"
    z0 = 50.0
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("!")[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                toks = line[1:].upper().split()
                i = 0
                while i < len(toks):
                    t = toks[i]
                    if t in _UNIT:
                        unit = _UNIT[t]
                    elif t in ("S", "Z", "Y", "G", "H"):
                        if t not in ("S", "Z"):
                            raise TouchstoneError(f"unsupported parameter {t}")
                        parameter = t
                    elif t in ("RI", "MA", "DB"):
                        fmt = t
                    elif t == "R" and i + 1 < len(toks):
                        z0 = float(toks[i + 1])
                        i += 1
                    i += 1
                continue
            rows.append([float(x) for x in line.split()])
    if not rows:
        raise TouchstoneError(f"no data rows in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise TouchstoneError("ragged touchstone data")
    arr = np.asarray(rows, dtype=float)
    freqs = arr[:, 0] * unit

    def to_complex(a, b):
        if fmt == "RI":
            return a + 1j * b
        if fmt == "MA":
            return a * np.exp(1j * np.radians(b))
        # DB: 20 log10 magnitude, angle in degrees.
        return 10.0 ** (a / 20.0) * np.exp(1j * np.radians(b))

    if width == 3:
        data = to_complex(arr[:, 1], arr[:, 2])
    elif width == 9:
        data = np.empty((arr.shape[0], 2, 2), dtype=complex)
        data[:, 0, 0] = to_complex(arr[:, 1], arr[:, 2])
        data[:, 1, 0] = to_complex(arr[:, 3], arr[:, 4])
        data[:, 0, 1] = to_complex(arr[:, 5], arr[:, 6])
        data[:, 1, 1] = to_complex(arr[:, 7], arr[:, 8])
    else:
        raise TouchstoneError(f"unsupported column count {width}")
    return {"freqs_hz": freqs, "data": data, "z0": z0, "parameter": parameter}


def impedance_from_touchstone(path):
    """Impedance samples from a one-port file (Z directly, or S converted)."""
    ts = read_touchstone(path)
    data = ts["data"]
    if data.ndim != 1:
        raise TouchstoneError("impedance extraction needs a one-port file")
    if ts["parameter"] == "Z":
        return ts["freqs_hz"], data
    gamma = data
    if np.any(np.abs(1.0 - gamma) < 1e-15):
        raise TouchstoneError("|1 - S11| underflow while converting S to Z")
    return ts["freqs_hz"], ts["z0"] * (1.0 + gamma) / (1.0 - gamma)


def write_netlist_scattering(path, net, freqs_hz, l_j=None, comment=None):
    """Export a netlist's linear scattering to Touchstone.

    Reflection netlists produce an .s1p-style one-port S11; hanger
    netlists a two-port with the symmetric through response (S21 = S12,
    S11 = S22 = S21 - 1 for a matched shunt tap).
    """
    from . import netlist as nl

    freqs_hz = np.asarray(freqs_hz, dtype=float)
    if net.topology == nl.REFLECTION:
        data = nl.s11(net, freqs_hz, l_j=l_j)
    else:
        s21 = nl.s21_hanger(net, freqs_hz, l_j=l_j)
        data = np.empty((freqs_hz.size, 2, 2), dtype=complex)
        data[:, 0, 0] = data[:, 1, 1] = s21 - 1.0
        data[:, 0, 1] = data[:, 1, 0] = s21
    write_touchstone(path, freqs_hz, data, z0=net.z_port, comment=comment)


def write_csv_trace(path, freqs_hz, values, value_label="value"):
    """Two-column complex trace as CSV with units in the header."""
    freqs_hz = np.asarray(freqs_hz, dtype=float)
    values = np.asarray(values, dtype=complex)
    lines = [f"frequency_hz,{value_label}_real,{value_label}_imag"]
    for f, v in zip(freqs_hz, values):
        lines.append(f"{f:.10e},{v.real:.12e},{v.imag:.12e}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv_trace(path):
    """Read a trace CSV written by write_csv_trace (or freq,re,im bare)."""
    freqs, vals = [], []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                f = float(parts[0])
            except ValueError:
                continue  # header
            if len(parts) == 2:
                freqs.append(f)
                vals.append(complex(float(parts[1]), 0.0))
            elif len(parts) >= 3:
                freqs.append(f)
                vals.append(complex(float(parts[1]), float(parts[2])))
    if not freqs:
        raise ValueError(f"no numeric rows in {path}")
    return np.asarray(freqs), np.asarray(vals)


def write_csv_matrix(path, row_axis, col_axis, matrix, row_label, col_label, cell_label):
    """Matrix CSV: first row the column axis, first column the row axis."""
    matrix = np.asarray(matrix)
    lines = [f"{row_label}\\{col_label}," + ",".join(f"{c:.10e}" for c in col_axis)]
    for r, row in zip(row_axis, matrix):
        lines.append(f"{r:.10e}," + ",".join(f"{v:.6e}" for v in row))
    header = f"! {cell_label}\n" if cell_label else ""
    _atomic_write(path, header + "\n".join(lines) + "\n")
