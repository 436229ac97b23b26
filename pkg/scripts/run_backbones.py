#!/usr/bin/env python3
"""Backbone curves of the three oscillator variants at increasing
expansion orders, plus the conservative shooting oracle, written as
plot-ready CSV files."""

import argparse
import os

import numpy as np

from ssmrom.bench import (
    RADIAL_CUBIC,
    _undamped,
    conservative_orbit,
    scale_from_published,
)
from ssmrom.manifold import compute_autonomous_ssm
from ssmrom.model import index1_reduce
from ssmrom.models import build_example
from ssmrom.romdyn import backbone
from ssmrom.spectral import select_master, solve_pencil


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out_backbones")
    ap.add_argument("--orders", default="3,7,13")
    ap.add_argument("--levels", type=int, default=15)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    orders = [int(x) for x in args.orders.split(",")]

    for name in ("oscillator3d:none", "oscillator3d:cubic",
                 "oscillator3d:spherical"):
        tag = name.split(":")[1]
        ex = build_example(name)
        spec = solve_pencil(ex.dae)
        master = select_master(spec, [1])
        rows = []
        sigma = None
        bb_hi = None
        for order in orders:
            ssm = compute_autonomous_ssm(ex.dae, master, order)
            if sigma is None:
                sigma = scale_from_published(
                    compute_autonomous_ssm(ex.dae, master, 13),
                    RADIAL_CUBIC[name],
                )
            rho = np.linspace(0.005, sigma * 0.35, 60)
            bb = backbone(ssm, rho, dof=0)
            bb_hi = bb
            for i in range(rho.size):
                rows.append((order, bb.rho[i], bb.omega[i],
                             bb.amplitude[i]))
        with open(os.path.join(args.out, f"backbone_{tag}.csv"), "w") as fh:
            fh.write("order,rho,omega,amplitude\n")
            for r in rows:
                fh.write(",".join("%.17g" % v for v in r) + "\n")

        # conservative oracle at the requested number of levels
        usys = _undamped(ex.sys)
        uode = index1_reduce(usys, 20.0, 20.0)
        A_max = bb_hi.amplitude[-1]
        orows = []
        v_prev = None
        for a in np.linspace(0.05 * A_max, 0.7 * A_max, args.levels):
            om0 = float(np.interp(a, bb_hi.amplitude, bb_hi.omega))
            guess = (list(v_prev[:-1]) if v_prev is not None
                     else ([0.0] if usys.n_c else [0.0, 0.0]))
            amp, om_c, v_prev, res = conservative_orbit(
                usys, uode, a, np.pi / om0, guess
            )
            orows.append((amp, om_c, res))
        with open(os.path.join(args.out, f"conservative_{tag}.csv"),
                  "w") as fh:
            fh.write("amplitude,omega,residual\n")
            for r in orows:
                fh.write(",".join("%.17g" % v for v in r) + "\n")
        print(f"{tag}: wrote backbones ({orders}) and "
              f"{len(orows)} conservative orbits")


if __name__ == "__main__":
    main()
