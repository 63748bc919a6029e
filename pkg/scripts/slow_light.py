"""Group-velocity reduction near zero probe detuning.

Evaluates ``v_g / v_EIT`` on the fig7 and fig8 presets plus variants of the
fig8 setting (RF Rabi frequency and ground-state dephasing in units of
``gamma_a``), writes a CSV per case and prints the slow-light window.
"""

import argparse
import os
from dataclasses import replace

from eit5.model import AtomParams
from eit5.observables import slow_light_window
from eit5.sweep import preset, run_sweep, write_outputs

# (label, RF Rabi frequency / gamma_a, ground dephasing / gamma_a)
FIG8_VARIANTS = (
    ("fig8-rf0.01-deph1e-4", 0.01, 1e-4),
    ("fig8-rf0.02-deph1e-4", 0.02, 1e-4),
    ("fig8-rf0.01-deph0", 0.01, 0.0),
)


def variant(rf, dephasing):
    cfg = preset("fig8")
    gamma_a = cfg.atom.gamma_a
    om = rf * gamma_a
    return replace(cfg,
                   atom=AtomParams(gamma_C=dephasing * gamma_a, gamma_Cprime=dephasing * gamma_a),
                   fields=replace(cfg.fields, omega_b_rf=om, omega_c_rf=om),
                   range=(-0.6 * om, 0.6 * om, cfg.range[2]))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results")
    args = parser.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    cases = [("fig7", preset("fig7")), ("fig8", preset("fig8"))]
    cases += [(label, variant(rf, d)) for label, rf, d in FIG8_VARIANTS]
    print(f"{'case':24s} {'min v_g/v_EIT':>14s} {'at delta_p':>12s} {'window (s^-1)':>14s}")
    for label, cfg in cases:
        table = run_sweep(cfg)
        write_outputs(table, os.path.join(args.outdir, f"{label}.csv"))
        cols = table.columns
        win = slow_light_window(cols["delta_p"], cols["vg_ratio"], cfg.fields.omega_b_rf / 2, cfg.scaling)
        print(f"{label:24s} {win.min_ratio:14.4g} {win.at_delta_p:12.4g} {win.width_si:14.4g}")


if __name__ == "__main__":
    main()
