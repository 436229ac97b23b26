"""Command-line driver.

Subcommands: validate, eig, ssm, backbone, frc, simulate, inverr,
residual, compare, bench.  Every run writes a ``manifest.json`` with the
resolved parameters, package/library versions and wall time next to its
CSV artifacts.  Exit codes: 0 ok, 1 usage, 2 model error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .model import ModelError, index1_reduce, validate_system
from .recast import ParseError, RecastError

FMT = "%.17g"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    """Resolved configuration of one CLI invocation."""

    command: str
    example: str | None = None
    model_file: str | None = None
    out_dir: str = "."
    pairs: tuple = (1,)
    order: int = 3
    epsilon: float = 0.0
    omega_lo: float | None = None
    omega_hi: float | None = None
    omega: float | None = None
    dofs: tuple = ()
    rho: tuple = ()
    theta: float = 0.0
    t_end: float = 10.0
    kind: str = "full"
    orders: tuple = ()
    tol_res: float = 0.05
    alpha: float = 20.0
    beta: float = 20.0
    rtol: float = 1e-8
    seed: int = 0
    step: float = 0.01
    forcing: float = 5.0
    filter: str = ""
    extra: dict = field(default_factory=dict)


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (bool, np.bool_)):
                cells.append("1" if v else "0")
            elif v is None:
                cells.append("")
            else:
                cells.append(FMT % v)
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def _manifest(cfg: RunConfig, outputs, t0, extra=None):
    import scipy

    data = {
        "command": cfg.command,
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "parameters": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in vars(cfg).items()
            if k != "extra"
        },
        "outputs": outputs,
        "wall_time_s": time.time() - t0,
    }
    if extra:
        data.update(extra)
    path = os.path.join(cfg.out_dir, "manifest.json")
    _atomic_write(path, json.dumps(data, indent=2, default=str) + "\n")


def _load_model(cfg: RunConfig):
    from .models import build_example

    if cfg.model_file:
        from .model import assemble_first_order
        from .models import ExampleModel
        from .modelio import load_system

        sys_ = load_system(cfg.model_file)
        return ExampleModel(
            name=os.path.basename(cfg.model_file),
            params={},
            dae=assemble_first_order(sys_),
            sys=sys_,
            full=sys_,
            dof_names={},
        )
    if not cfg.example:
        raise ModelError("provide --example or --model")
    kwargs = dict(cfg.extra)
    if cfg.example == "divider_rom":
        kwargs.setdefault("forcing", cfg.forcing)
    return build_example(cfg.example, **kwargs)


def _resolve_dofs(ex, names):
    out = []
    for d in names:
        if isinstance(d, int) or (isinstance(d, str) and d.isdigit()):
            out.append(int(d))
        elif d in ex.dof_names:
            out.append(ex.dof_names[d])
        else:
            raise ModelError(f"unknown dof {d!r}")
    return tuple(out)


def _spectral_setup(ex, cfg):
    from .spectral import select_master, solve_pencil

    spec = solve_pencil(ex.dae)
    master = select_master(spec, list(cfg.pairs), tol_res=cfg.tol_res)
    return spec, master


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------
def _cmd_validate(cfg):
    ex = _load_model(cfg)
    if ex.sys is None:
        ok = ex.dae.pencil_regular()
        print(f"pencil regular: {ok}")
        return EXIT_OK if ok else EXIT_MODEL
    rep = validate_system(ex.sys, seed=cfg.seed)
    print(f"G0 rank: {rep.g0_rank} (full: {rep.g0_full_rank})")
    print(f"pencil regular: {rep.pencil_regular}")
    print(f"mass SPD: {rep.mass_spd}")
    print(f"nonlinearity degrees ok: {rep.nonlinearity_degree_ok}")
    for m in rep.messages:
        print("  !", m)
    return EXIT_OK if rep.ok else EXIT_MODEL


def _cmd_eig(cfg, t0):
    from .spectral import solve_pencil

    ex = _load_model(cfg)
    spec = solve_pencil(ex.dae)
    path = os.path.join(cfg.out_dir, "spectrum.csv")
    _write_csv(
        path,
        ["index", "re", "im", "class"],
        [
            (i, re, im, cls) if np.isfinite(re) else (i, "inf", "inf", cls)
            for i, re, im, cls in spec.to_rows()
        ],
    )
    _manifest(cfg, [path], t0)
    print(f"wrote {path}: {len(spec.finite)} finite, "
          f"{spec.infinite_count} infinite")
    return EXIT_OK


def _cmd_ssm(cfg, t0):
    from .manifold import compute_autonomous_ssm
    from .spectral import resonance_report

    ex = _load_model(cfg)
    spec, master = _spectral_setup(ex, cfg)
    ssm = compute_autonomous_ssm(ex.dae, master, cfg.order)
    rep = resonance_report(spec, master, cfg.order, omega=cfg.omega)

    lines = [f"# manifold expansion, order {cfg.order}, style {ssm.style}"]
    lines.append(
        "# master eigenvalues: "
        + ", ".join(FMT % l.real + ("%+.17gj" % l.imag) for l in master.lambdas)
    )
    for name, poly in (("W", ssm.W), ("R", ssm.R)):
        lines.append(f"[{name}]")
        for e, v in poly.sorted_terms():
            exps = " ".join(str(x) for x in e)
            coefs = " ".join(
                (FMT + "%+.17gj") % (c.real, c.imag) for c in v
            )
            lines.append(f"{exps} -> {coefs}")
    path = os.path.join(cfg.out_dir, "ssm.txt")
    _atomic_write(path, "\n".join(lines) + "\n")

    rpath = os.path.join(cfg.out_dir, "resonance.txt")
    rl = [
        f"relative spectral quotient: {rep.sigma}",
        f"absolute spectral quotient: {rep.sigma_abs}",
        f"enumeration capped: {rep.capped}",
        f"violations: {len(rep.violations)}",
    ]
    for exps, lam in rep.violations:
        rl.append(f"  {exps} ~ {lam}")
    rl.append(f"inner resonances: {len(rep.inner)}")
    for i, l, j in rep.inner:
        rl.append(f"  target {i}: l={l} j={j}")
    rl.append(f"external r: {rep.external_r}")
    _atomic_write(rpath, "\n".join(rl) + "\n")
    _manifest(cfg, [path, rpath], t0)
    print(f"wrote {path} ({len(ssm.W.terms)} W terms, "
          f"{len(ssm.R.terms)} R terms)")
    return EXIT_OK


def _cmd_backbone(cfg, t0):
    from .manifold import compute_autonomous_ssm
    from .romdyn import backbone

    ex = _load_model(cfg)
    _, master = _spectral_setup(ex, cfg)
    ssm = compute_autonomous_ssm(ex.dae, master, cfg.order)
    dofs = _resolve_dofs(ex, cfg.dofs)
    rho = np.linspace(cfg.rho[0] if cfg.rho else 0.01,
                      cfg.rho[1] if len(cfg.rho) > 1 else 0.5, 60)
    bb = backbone(ssm, rho, dof=dofs[0] if dofs else None)
    rows = []
    for i in range(len(rho)):
        row = [bb.rho[i], bb.omega[i]]
        if bb.amplitude is not None:
            row.append(bb.amplitude[i])
        rows.append(row)
    hdr = ["rho", "omega"] + (["amplitude"] if bb.amplitude is not None else [])
    path = os.path.join(cfg.out_dir, "backbone.csv")
    _write_csv(path, hdr, rows)
    _manifest(cfg, [path], t0)
    print(f"wrote {path}")
    return EXIT_OK


def _branch_rows(branch, dofs):
    rows = []
    sp_at = {}
    for s in branch.special_points:
        sp_at.setdefault(s["index"], []).append(s["type"])
    for k, p in enumerate(branch.points):
        row = [p.omega]
        row.extend(p.rho)
        for d in dofs:
            row.append(p.amplitudes.get(d, np.nan))
        row.append(p.stable)
        row.append("+".join(sp_at.get(k, [])))
        rows.append(row)
    return rows


def _cmd_frc(cfg, t0):
    from .manifold import (
        compute_autonomous_ssm,
        compute_nonautonomous_leading,
    )
    from .romdyn import branch_switch, frc_continue
    from .spectral import resonance_report

    if cfg.omega_lo is None or cfg.omega_hi is None:
        raise ModelError("frc requires a frequency range --omega lo:hi")
    ex = _load_model(cfg)
    if ex.rom is not None:
        ssm = ex.rom
        r = [0.5, 1.0]
    else:
        spec, master = _spectral_setup(ex, cfg)
        ssm0 = compute_autonomous_ssm(ex.dae, master, cfg.order)
        om_mid = 0.5 * (cfg.omega_lo + cfg.omega_hi)
        rep = resonance_report(spec, master, cfg.order, omega=om_mid)
        r = rep.external_r
        ssm = compute_nonautonomous_leading(ssm0, ex.dae, om_mid, r=r)
    dofs = _resolve_dofs(ex, cfg.dofs)
    branches = frc_continue(
        ssm, (cfg.omega_lo, cfg.omega_hi), cfg.epsilon,
        dofs=dofs, r=r, step=cfg.step,
    )
    outputs = []
    m = ssm.m
    hdr = (
        ["omega"]
        + [f"rho{j + 1}" for j in range(m)]
        + [f"amp_dof{d}" for d in dofs]
        + ["stable", "special"]
    )
    for bi, br in enumerate(branches):
        path = os.path.join(cfg.out_dir, f"frc_branch{bi}.csv")
        _write_csv(path, hdr, _branch_rows(br, dofs))
        outputs.append(path)
        bps = [s for s in br.special_points if s["type"] == "BP"]
        if bps:
            sec = branch_switch(ssm, br, 0, dofs=dofs, step=cfg.step)
            path2 = os.path.join(cfg.out_dir, f"frc_branch{bi}_secondary.csv")
            _write_csv(path2, hdr, _branch_rows(sec, dofs))
            outputs.append(path2)
    _manifest(cfg, outputs, t0)
    for p in outputs:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_simulate(cfg, t0):
    from .fullsim import consistent_ic, simulate_index1
    from .manifold import compute_autonomous_ssm
    from .romdyn import integrate_rom

    ex = _load_model(cfg)
    outputs = []
    if cfg.kind == "rom":
        _, master = _spectral_setup(ex, cfg)
        ssm = compute_autonomous_ssm(ex.dae, master, cfg.order)
        rho = cfg.rho if cfg.rho else (0.1,) * ssm.m
        p0 = ssm.polar_point(np.array(rho), np.full(ssm.m, cfg.theta))
        te = np.linspace(0.0, cfg.t_end, 800)
        tr = integrate_rom(ssm, p0, (0.0, cfg.t_end), epsilon=cfg.epsilon,
                           omega=cfg.omega or 0.0, t_eval=te)
        Z = tr.physical(ssm, cfg.epsilon, cfg.omega or 0.0)
        hdr = ["t"] + [f"z{i}" for i in range(Z.shape[1])]
        rows = [[tr.t[i]] + list(Z[i].real) for i in range(tr.t.size)]
        path = os.path.join(cfg.out_dir, "rom_trajectory.csv")
        _write_csv(path, hdr, rows)
        outputs.append(path)
    else:
        target = ex.full if ex.full is not None else ex.sys
        if target is None:
            raise ModelError("example has no full-order model")
        ode = index1_reduce(target, cfg.alpha, cfg.beta)
        n = target.n
        x0 = np.zeros(n)
        xd0 = np.zeros(n)
        if cfg.rho:
            x0[: len(cfg.rho)] = cfg.rho
        x0, xd0 = consistent_ic(target, x0, xd0)
        te = np.linspace(0.0, cfg.t_end, 800)
        tr = simulate_index1(
            ode, np.concatenate([x0, xd0]), (0.0, cfg.t_end),
            eps=cfg.epsilon, omega=cfg.omega or 0.0, tol=cfg.rtol, t_eval=te,
        )
        hdr = (
            ["t"]
            + [f"x{i}" for i in range(n)]
            + [f"xd{i}" for i in range(n)]
            + [f"mu{i}" for i in range(tr.mu.shape[1])]
            + ["g_norm"]
        )
        rows = [
            [tr.t[i]] + list(tr.x[i]) + list(tr.xd[i]) + list(tr.mu[i])
            + [tr.g_norm[i]]
            for i in range(tr.t.size)
        ]
        path = os.path.join(cfg.out_dir, "trajectory.csv")
        _write_csv(path, hdr, rows)
        outputs.append(path)
    _manifest(cfg, outputs, t0)
    for p in outputs:
        print(f"wrote {p}")
    return EXIT_OK


def _cmd_inverr(cfg, t0):
    from .diagnostics import invariance_error
    from .manifold import compute_autonomous_ssm

    ex = _load_model(cfg)
    _, master = _spectral_setup(ex, cfg)
    orders = cfg.orders or (cfg.order,)
    varrhos = cfg.rho if cfg.rho else (0.1, 0.2, 0.5, 1.0)
    rows = []
    for order in orders:
        ssm = compute_autonomous_ssm(ex.dae, master, int(order))
        for v in varrhos:
            err = invariance_error(ssm, ex.dae, v)
            rows.append([v, int(order), err])
    path = os.path.join(cfg.out_dir, "invariance_error.csv")
    _write_csv(path, ["varrho", "order", "error"], rows)
    _manifest(cfg, [path], t0)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_residual(cfg, t0):
    from .diagnostics import orbit_residual
    from .manifold import (
        compute_autonomous_ssm,
        compute_nonautonomous_leading,
    )
    from .romdyn import fixed_point_at
    from .spectral import resonance_report

    ex = _load_model(cfg)
    spec, master = _spectral_setup(ex, cfg)
    ssm0 = compute_autonomous_ssm(ex.dae, master, cfg.order)
    rep = resonance_report(spec, master, cfg.order, omega=cfg.omega)
    ssm = compute_nonautonomous_leading(ssm0, ex.dae, cfg.omega,
                                        r=rep.external_r)
    pt = fixed_point_at(ssm, cfg.omega, cfg.epsilon)
    hist = orbit_residual(ssm, ex.dae, pt.y, rep.external_r,
                          cfg.epsilon, cfg.omega)
    path = os.path.join(cfg.out_dir, "residual.csv")
    _write_csv(path, ["t", "residual"],
               [[hist.t[i], hist.norm[i]] for i in range(hist.t.size)])
    _manifest(cfg, [path], t0, extra={"max_residual": hist.max})
    print(f"wrote {path}; max residual {hist.max:.6g}")
    return EXIT_OK


def _cmd_compare(cfg, t0):
    from .diagnostics import trajectory_compare
    from .fullsim import consistent_ic, simulate_index1
    from .manifold import compute_autonomous_ssm
    from .romdyn import integrate_rom

    ex = _load_model(cfg)
    _, master = _spectral_setup(ex, cfg)
    ssm = compute_autonomous_ssm(ex.dae, master, cfg.order)
    rho = cfg.rho if cfg.rho else (0.1,) * ssm.m
    p0 = ssm.polar_point(np.array(rho), np.full(ssm.m, cfg.theta))
    z0 = ssm.evaluate(p0).real
    target = ex.full if ex.full is not None else ex.sys
    n = target.n
    x0, xd0 = consistent_ic(target, z0[:n], z0[n:2 * n])
    te = np.linspace(0.0, cfg.t_end, 600)
    tr = integrate_rom(ssm, p0, (0.0, cfg.t_end), t_eval=te)
    Z = tr.physical(ssm)
    ode = index1_reduce(target, cfg.alpha, cfg.beta)
    full = simulate_index1(ode, np.concatenate([x0, xd0]), (0.0, cfg.t_end),
                           tol=cfg.rtol, t_eval=te)
    dofs = _resolve_dofs(ex, cfg.dofs) or tuple(range(n))
    mets = trajectory_compare(tr.t, Z[:, :n].real, full.t, full.x,
                              dofs=list(dofs))
    path = os.path.join(cfg.out_dir, "compare.csv")
    _write_csv(path, ["dof", "rel_sup"],
               [[d, mets.per_dof_sup[i]] for i, d in enumerate(dofs)])
    _manifest(cfg, [path], t0,
              extra={"rel_sup": mets.rel_sup, "rel_rms": mets.rel_rms})
    print(f"rel_sup = {mets.rel_sup:.4g}, rel_rms = {mets.rel_rms:.4g}")
    return EXIT_OK


def _cmd_bench(cfg, t0):
    from .bench import run_suite

    report = run_suite(cfg.filter, out_dir=cfg.out_dir)
    print(report.summary())
    return EXIT_OK if report.all_passed else EXIT_NUMERICAL


# ----------------------------------------------------------------------
def _parse_floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ssmrom",
        description="Reduced-order models of constrained mechanical "
        "systems on spectral submanifolds",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--example", help="built-in example name")
        p.add_argument("--model", dest="model_file", help="model file path")
        p.add_argument("--constraint", help="oscillator constraint variant")
        p.add_argument("--out", dest="out_dir", default=".")
        p.add_argument("--pairs", default="1",
                       help="master pair labels, e.g. 1,2")
        p.add_argument("--order", type=int, default=3)
        p.add_argument("--eps", dest="epsilon", type=float, default=0.0)
        p.add_argument("--omega", default=None,
                       help="frequency or range lo:hi")
        p.add_argument("--dofs", default="", help="dof names or indices")
        p.add_argument("--rho", default="", help="amplitudes, e.g. 0.1,0.3")
        p.add_argument("--theta", type=float, default=0.0)
        p.add_argument("--t-end", dest="t_end", type=float, default=10.0)
        p.add_argument("--kind", default="full", choices=("full", "rom"))
        p.add_argument("--orders", default="", help="orders for inverr")
        p.add_argument("--tol-res", dest="tol_res", type=float, default=0.05)
        p.add_argument("--alpha", type=float, default=20.0)
        p.add_argument("--beta", type=float, default=20.0)
        p.add_argument("--rtol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--step", type=float, default=0.01)
        p.add_argument("--forcing", type=float, default=5.0,
                       help="synthetic resonant-mode forcing (divider)")

    for name in ("validate", "eig", "ssm", "backbone", "frc", "simulate",
                 "inverr", "residual", "compare"):
        common(sub.add_parser(name))
    pb = sub.add_parser("bench")
    pb.add_argument("action", nargs="?", default="run")
    pb.add_argument("--filter", default="")
    pb.add_argument("--out", dest="out_dir", default=".")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for key in vars(cfg):
        if hasattr(args, key) and getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    if getattr(args, "constraint", None):
        cfg.example = f"{cfg.example}:{args.constraint}"
    if getattr(args, "omega", None):
        text = args.omega
        if ":" in text:
            lo, hi = text.split(":")
            cfg.omega_lo, cfg.omega_hi = float(lo), float(hi)
            cfg.omega = 0.5 * (cfg.omega_lo + cfg.omega_hi)
        else:
            cfg.omega = float(text)
    for key in ("pairs", "orders"):
        if hasattr(args, key) and isinstance(getattr(args, key), str):
            setattr(
                cfg, key,
                tuple(int(x) for x in getattr(args, key).split(",") if x),
            )
    if hasattr(args, "rho") and isinstance(args.rho, str):
        cfg.rho = _parse_floats(args.rho)
    if hasattr(args, "dofs") and isinstance(args.dofs, str):
        cfg.dofs = tuple(x for x in args.dofs.split(",") if x)
    return cfg


def run(cfg: RunConfig) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    t0 = time.time()
    os.makedirs(cfg.out_dir, exist_ok=True)
    try:
        if cfg.command == "validate":
            return _cmd_validate(cfg)
        if cfg.command == "eig":
            return _cmd_eig(cfg, t0)
        if cfg.command == "ssm":
            return _cmd_ssm(cfg, t0)
        if cfg.command == "backbone":
            return _cmd_backbone(cfg, t0)
        if cfg.command == "frc":
            return _cmd_frc(cfg, t0)
        if cfg.command == "simulate":
            return _cmd_simulate(cfg, t0)
        if cfg.command == "inverr":
            return _cmd_inverr(cfg, t0)
        if cfg.command == "residual":
            return _cmd_residual(cfg, t0)
        if cfg.command == "compare":
            return _cmd_compare(cfg, t0)
        if cfg.command == "bench":
            return _cmd_bench(cfg, t0)
        print(f"unknown command {cfg.command!r}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, RecastError, ParseError, FileNotFoundError) as exc:
        print(f"[model] {exc}", file=sys.stderr)
        return EXIT_MODEL
    except Exception as exc:  # numerical failures from any module
        mod = type(exc).__module__.split(".")[-1]
        print(f"[{mod}] {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
