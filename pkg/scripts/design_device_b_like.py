"""Tune the representative hanger (device-B-like) netlist.

Branch: coupling capacitor -> high-impedance quarter-wave line -> series
loss -> junction, hanging from a matched 50 ohm feedline.  Targets are the
measured mode of the published gate-tunable resonator:

    f_r ~ 6.63 GHz, kappa/2pi ~ 32.3 MHz, junction participation ~ 0.11

with the coupling split kappa_ext/kappa ~ 0.732, the symmetric-hanger
point at which the textbook third-order-intercept relation
K = hbar w0 kappa^2 / (8 IIP3) is exact, so the intermodulation
cross-check closes on the same circuit.

Run:  python scripts/design_device_b_like.py
"""

import numpy as np
from scipy.optimize import minimize

from kerramp import bbq, fitres
from kerramp import netlist as nl

V_PH = 1.15e8
L_J = 0.200e-9
F_TARGET = 6.63e9
KAPPA_TARGET = 2 * np.pi * 32.3e6
X_TARGET = 0.732  # kappa_ext / kappa, the symmetric-hanger point where the
P_TARGET = 0.110


def build(c_c, f_q, z0, r_int=0.0):
    quarter = V_PH / (4.0 * f_q)
    elements = [nl.SeriesCapacitor(c_c), nl.TlSegment(z0, quarter, V_PH)]
    if r_int > 0.0:
        elements.append(nl.SeriesResistor(r_int))
    elements.append(nl.JunctionPlaceholder(L_J))
    return nl.Netlist(tuple(elements), nl.HANGER, 50.0)


def characterize(net):
    f = np.linspace(6.3e9, 7.0e9, 1201)
    fit = fitres.fit_hanger(np.column_stack([f, nl.s21_hanger(net, f)]))
    grid = nl.FrequencyGrid(5.5e9, 9.5e9, 4001)
    om0, l, c, r = bbq.extract_series_rlc(
        lambda ff: nl.impedance_at_junction_plane(net, ff), grid
    )
    return dict(
        f_r=fit.f_r, kappa=fit.kappa, kappa_ext=fit.kappa_ext,
        x=fit.kappa_ext / fit.kappa, l=l, c=c, r=r,
        p=bbq.participation(L_J, l),
    )


def cost(xv, r_int):
    c_c, f_q, z0 = np.exp(xv)
    try:
        ch = characterize(build(c_c, f_q, z0, r_int))
    except Exception:
        return 1e6
    return (
        ((ch["f_r"] - F_TARGET) / F_TARGET * 50) ** 2
        + ((ch["kappa"] - KAPPA_TARGET) / KAPPA_TARGET) ** 2
        + ((ch["p"] - P_TARGET) / P_TARGET) ** 2
    )


def main():
    # Pass 1: lossless, land f_r/kappa_ext/p (kappa_ext is all of kappa).
    x0 = np.log([8e-15, 6.8e9, 86.0])
    res = minimize(
        lambda v: cost_lossless(v), x0, method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 3000},
    )
    c_c, f_q, z0 = np.exp(res.x)
    ch = characterize(build(c_c, f_q, z0))
    print("lossless pass:", {k: f"{v:.6g}" for k, v in ch.items()})
    # Pass 2: add loss for the 0.618 split, re-tune.
    l_tot = ch["l"] + L_J
    r_int = ch["kappa"] * (1.0 / X_TARGET - 1.0) * l_tot
    res2 = minimize(
        lambda v: cost(v, r_int), np.log([c_c, f_q, z0]), method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 3000},
    )
    c_c, f_q, z0 = np.exp(res2.x)
    ch2 = characterize(build(c_c, f_q, z0, r_int))
    print(f"\nfinal: c_c = {c_c*1e15:.3f} fF, f_q = {f_q/1e9:.4f} GHz "
          f"(quarter wave = {V_PH/4/f_q*1e6:.2f} um), z0 = {z0:.2f} ohm, "
          f"r_int = {r_int*1e3:.3f} mOhm")
    for k, v in ch2.items():
        print(f"  {k} = {v:.6g}")
    print(f"  kappa/2pi = {ch2['kappa']/2/np.pi/1e6:.2f} MHz, "
          f"x = {ch2['x']:.3f}")
    ec = bbq.charging_energy_over_h(ch2["c"])
    print(f"  E_C/h = {ec/1e6:.2f} MHz, predicted K (1.9e-3) = "
          f"{bbq.predict_kerr(1.9e-3, ch2['p'], ec):.1f} Hz")


def cost_lossless(v):
    kap_lossless = KAPPA_TARGET * X_TARGET
    c_c, f_q, z0 = np.exp(v)
    try:
        ch = characterize(build(c_c, f_q, z0))
    except Exception:
        return 1e6
    return (
        ((ch["f_r"] - F_TARGET) / F_TARGET * 50) ** 2
        + ((ch["kappa"] - kap_lossless) / kap_lossless) ** 2
        + ((ch["p"] - P_TARGET) / P_TARGET) ** 2
    )


if __name__ == "__main__":
    main()
