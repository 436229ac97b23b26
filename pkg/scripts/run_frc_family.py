#!/usr/bin/env python3
"""Near-resonant forced response curves of an example at several forcing
amplitudes and expansion orders."""

import argparse
import os

from ssmrom.manifold import (
    compute_autonomous_ssm,
    compute_nonautonomous_leading,
)
from ssmrom.models import build_example
from ssmrom.romdyn import frc_continue
from ssmrom.spectral import resonance_report, select_master, solve_pencil


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--example", default="oscillator3d:none")
    ap.add_argument("--pairs", default="1")
    ap.add_argument("--orders", default="3,5,7")
    ap.add_argument("--eps", default="0.005,0.01,0.02")
    ap.add_argument("--omega", default="1.85:2.15")
    ap.add_argument("--dof", type=int, default=0)
    ap.add_argument("--out", default="out_frc")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    pairs = [int(x) for x in args.pairs.split(",")]
    lo, hi = (float(x) for x in args.omega.split(":"))
    om_mid = 0.5 * (lo + hi)

    ex = build_example(args.example)
    spec = solve_pencil(ex.dae)
    master = select_master(spec, pairs)
    rep = resonance_report(spec, master, 3, omega=om_mid)

    for order in (int(x) for x in args.orders.split(",")):
        ssm = compute_autonomous_ssm(ex.dae, master, order)
        nssm = compute_nonautonomous_leading(ssm, ex.dae, om_mid,
                                             r=rep.external_r)
        for eps in (float(x) for x in args.eps.split(",")):
            br = frc_continue(nssm, (lo, hi), eps, dofs=(args.dof,),
                              step=0.005)[0]
            path = os.path.join(
                args.out, f"frc_o{order}_eps{eps:g}.csv"
            )
            with open(path, "w") as fh:
                fh.write("omega,rho1,amplitude,stable\n")
                for p in br.points:
                    fh.write(
                        "%.17g,%.17g,%.17g,%d\n"
                        % (p.omega, p.rho[0],
                           p.amplitudes.get(args.dof, float("nan")),
                           p.stable)
                    )
            sn = [s for s in br.special_points if s["type"] == "SN"]
            print(f"order {order} eps {eps:g}: {len(br.points)} points, "
                  f"{len(sn)} folds -> {path}")


if __name__ == "__main__":
    main()
