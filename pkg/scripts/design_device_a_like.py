"""Tune the representative direct-coupled amplifier netlist.

The published circuit sketch (150 ohm and 25 ohm quarter-wave sections
feeding the junction) cannot reach the measured ~41 MHz linewidth on its
own: a double quarter-wave transformer scales the 50 ohm port by
(25/150)^2 at best, which at ~0.6 nH of mode inductance is a far stronger
coupling than measured.  A port-side shunt capacitor (physically, pad or
launch capacitance) supplies the missing transformation.  This script
searches (C_pad, line quarter-wave frequency, L_J) so the FITTED linear
reflection of the circuit lands on the measured mode:

    f_r ~ 7.52 GHz, kappa_ext/2pi ~ 30 MHz, junction participation ~ 0.29

then adds a series loss resistor for an internal Q of ~660 (so the total
linewidth is ~41 MHz, as measured).  The result is frozen into
configs/device_a_like.cfg.

Run:  python scripts/design_device_a_like.py
"""

import numpy as np
from scipy.optimize import minimize

from kerramp import bbq, fitres
from kerramp import netlist as nl

V_PH = 1.15e8  # CPW phase velocity on InP, m/s
F_TARGET = 7.52e9
KAPPA_EXT_TARGET = 2 * np.pi * 30e6
P_TARGET = 0.29
Q_INT = 660.0


def build(c_pad, f_q, l_j, r_int=0.0):
    quarter = V_PH / (4.0 * f_q)
    elements = [
        nl.ShuntCapacitor(c_pad),
        nl.TlSegment(150.0, quarter, V_PH),
        nl.TlSegment(25.0, quarter, V_PH),
        nl.KineticInductor(48.0, 1.012e-12),
    ]
    if r_int > 0.0:
        elements.append(nl.SeriesResistor(r_int))
    elements.append(nl.JunctionPlaceholder(l_j))
    return nl.Netlist(tuple(elements), nl.REFLECTION, 50.0)


def characterize(net, l_j):
    grid = nl.FrequencyGrid(6e9, 12e9, 4001)
    zf = lambda f: nl.impedance_at_junction_plane(net, f)
    om0, l, c, r = bbq.extract_series_rlc(zf, grid)
    p = bbq.participation(l_j, l)
    f = np.linspace(7.2e9, 7.85e9, 801)
    fit = fitres.fit_reflection(np.column_stack([f, nl.s11(net, f)]))
    return dict(
        f_bbq=om0 / 2 / np.pi, l=l, c=c, r=r, p=p,
        f_r=fit.f_r, kappa=fit.kappa, kappa_ext=fit.kappa_ext,
    )


def cost(x):
    c_pad, f_q, l_j = np.exp(x)
    try:
        ch = characterize(build(c_pad, f_q, l_j), l_j)
    except Exception:
        return 1e6
    return (
        ((ch["f_r"] - F_TARGET) / F_TARGET * 50) ** 2
        + ((ch["kappa_ext"] - KAPPA_EXT_TARGET) / KAPPA_EXT_TARGET) ** 2
        + ((ch["p"] - P_TARGET) / P_TARGET) ** 2
    )


def main():
    x0 = np.log([2.0e-12, 9.4e9, 0.17e-9])
    res = minimize(cost, x0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    c_pad, f_q, l_j = np.exp(res.x)
    net = build(c_pad, f_q, l_j)
    ch = characterize(net, l_j)
    print("lossless design:")
    print(f"  c_pad = {c_pad*1e15:.2f} fF, f_q = {f_q/1e9:.4f} GHz "
          f"(quarter wave = {V_PH/4/f_q*1e6:.2f} um), l_j = {l_j*1e9:.5f} nH")
    for k, v in ch.items():
        print(f"  {k} = {v:.6g}")
    print(f"  fitted kappa_ext/2pi = {ch['kappa_ext']/2/np.pi/1e6:.2f} MHz")

    # Series loss for internal Q ~ 660 at the mode frequency.
    l_tot = ch["l"] + l_j
    r_int = 2 * np.pi * ch["f_r"] * l_tot / Q_INT
    net_lossy = build(c_pad, f_q, l_j, r_int)
    ch2 = characterize(net_lossy, l_j)
    print(f"\nwith r_int = {r_int*1e3:.4f} mOhm (target Q_int ~ {Q_INT:.0f}):")
    for k, v in ch2.items():
        print(f"  {k} = {v:.6g}")
    print(f"  kappa/2pi = {ch2['kappa']/2/np.pi/1e6:.2f} MHz "
          f"(ext {ch2['kappa_ext']/2/np.pi/1e6:.2f}, "
          f"int {(ch2['kappa']-ch2['kappa_ext'])/2/np.pi/1e6:.2f})")
    print(f"  predicted K/2pi (c4/c2 = 5.3e-3) = "
          f"{bbq.predict_kerr(5.3e-3, ch2['p'], bbq.charging_energy_over_h(ch2['c'])):.1f} Hz")


if __name__ == "__main__":
    main()
