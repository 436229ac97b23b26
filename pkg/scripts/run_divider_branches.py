#!/usr/bin/env python3
"""Main and secondary solution branches of the 1:2 internally resonant
divider reduced model: branch points, the fold on the secondary branch
and the period-doubled response."""

import argparse
import os

from ssmrom.models import build_example
from ssmrom.romdyn import branch_switch, frc_continue


def write_branch(path, br):
    with open(path, "w") as fh:
        fh.write("omega,rho1,rho2,stable\n")
        for p in br.points:
            fh.write("%.17g,%.17g,%.17g,%d\n"
                     % (p.omega, p.rho[0], p.rho[1], p.stable))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--forcing", type=float, default=5.0)
    ap.add_argument("--omega", default="44.3:46.4")
    ap.add_argument("--out", default="out_divider")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    lo, hi = (float(x) for x in args.omega.split(":"))

    rom = build_example("divider_rom", forcing=args.forcing).rom
    main_br = frc_continue(rom, (lo, hi), 1.0, r=[0.5, 1.0],
                           step=0.01, max_step=0.05)[0]
    write_branch(os.path.join(args.out, "main_branch.csv"), main_br)
    for s in main_br.special_points:
        print(f"main branch {s['type']} at omega = {s['omega']:.4f}")

    sec = branch_switch(rom, main_br, 0, step=0.005)
    write_branch(os.path.join(args.out, "secondary_branch.csv"), sec)
    for s in sec.special_points:
        print(f"secondary branch {s['type']} at omega = {s['omega']:.4f}")
    print("secondary fundamental frequency at 45.4 rad/s forcing:",
          sec.fundamental_frequency(45.4))


if __name__ == "__main__":
    main()
