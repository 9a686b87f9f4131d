"""Command-line entry point: ``rabisim <subcommand> ...``.

Subcommands write CSV to ``--out`` (stdout when omitted) at 12 significant
digits.  ``evolve`` starts from |e0> unless ``--init g0`` is given.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .dynamics import SolverOptions, evolve, steady_state
from .errors import ConfigError, RabiSimError
from .hilbert import partial_trace
from .models import (EffectiveParams, PhysicalParams, build_effective, build_full,
                     design_physical, effective_params, rabi_spectrum)
from .observables import g2_zero, wigner
from .presets import PRESETS, Preset, get as get_preset
from .semiclassical import SemiParams, SemiState, semi_integrate

__all__ = ["main", "Preset", "PRESETS", "write_csv", "read_csv", "write_svg"]


def fmt(x) -> str:
    return f"{float(x):.12g}"


def write_csv(path, header, rows) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    finally:
        if path:
            fh.close()


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_svg(path, x, series: dict, xlabel: str = "t (us)", width=600, height=400) -> None:
    """One polyline per series on shared axes.  No styling guarantees."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    x = np.asarray(x, float)
    left, right, top, bottom = 60, 20, 20, 50
    ys = np.concatenate([np.asarray(v, float) for v in series.values()]) if series else np.zeros(1)
    x0, x1 = float(x.min()), float(x.max()) if len(x) > 1 else float(x.min()) + 1
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 == y0:
        y1 = y0 + 1
    if x1 == x0:
        x1 = x0 + 1

    def px(v):
        return left + (v - x0) / (x1 - x0) * (width - left - right)

    def py(v):
        return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
             f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
             f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
             f'text-anchor="middle">value</text>',
             f'<text x="{left}" y="{height - bottom + 15}" text-anchor="middle">{x0:.3g}</text>',
             f'<text x="{width - right}" y="{height - bottom + 15}" text-anchor="end">{x1:.3g}</text>',
             f'<text x="{left - 5}" y="{height - bottom}" text-anchor="end">{y0:.3g}</text>',
             f'<text x="{left - 5}" y="{top + 10}" text-anchor="end">{y1:.3g}</text>']
    for k, (name, y) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        c = colors[k % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{c}" points="{pts}"/>')
        parts.append(f'<text x="{width - right - 5}" y="{top + 15 * (k + 1)}" fill="{c}" '
                     f'text-anchor="end">{name}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


# --- parameter resolution --------------------------------------------------------------


def _eff_from_args(args) -> EffectiveParams:
    if getattr(args, "preset", None):
        pre = get_preset(args.preset)
        res = effective_params(pre.phys)
        if res.warning:
            print(f"warning: {res.warning}", file=sys.stderr)
        eff = replace(res.eff, negate_hamiltonian=pre.negate)
        if args.kappa is not None:
            eff = replace(eff, kappa=args.kappa)
        return eff
    missing = [n for n in ("geff", "omega") if getattr(args, n) is None]
    if missing:
        raise ConfigError("give --preset or explicit --geff and --omega")
    return EffectiveParams(omega0=args.omega0, omega=args.omega, g_eff=args.geff,
                           U=args.U, kappa=args.kappa or 0.0)


def _add_eff_args(p, u=True):
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    p.add_argument("--geff", type=float, help="effective coupling g_eff (MHz)")
    p.add_argument("--omega", type=float, help="oscillator frequency (MHz)")
    p.add_argument("--omega0", type=float, default=0.0, help="qubit splitting (MHz)")
    if u:
        p.add_argument("--U", "--u", dest="U", type=float, default=0.0, help="nonlinear coupling (MHz)")
    p.add_argument("--kappa", type=float, default=None, help="cavity decay (MHz)")


def _add_out(p, svg=True):
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    if svg:
        p.add_argument("--svg", help="also write a 600x400 SVG line plot here")


# --- subcommands ----------------------------------------------------------------------


def cmd_params(args) -> int:
    if args.preset:
        pre = get_preset(args.preset)
        res = effective_params(pre.phys, omega_tilde2=args.omega_tilde2)
        eff = res.eff
        print(f"preset {pre.name}: omega0={eff.omega0:.2f} omega={eff.omega:.2f} "
              f"g_eff={eff.g_eff:.2f} U={eff.U:.2f}")
        exp = pre.expected_eff
        print(f"  target:    omega0={exp.omega0:.2f} omega={exp.omega:.2f} "
              f"g_eff={exp.g_eff:.2f} U={exp.U:.2f}" + ("  (H -> -H)" if pre.negate else ""))
        print(f"  g1={res.g1:.6g} g2={res.g2:.6g} adiabatic margin={pre.phys.adiabatic_margin():.1f}")
        if res.warning:
            print(f"warning: {res.warning}", file=sys.stderr)
        return 0
    if args.geff is None or args.omega is None or args.delta2 is None:
        raise ConfigError("params needs --preset, or --geff --omega --omega0 --delta2 for a design")
    targets = EffectiveParams(args.omega0, args.omega, args.geff)
    phys = design_physical(targets, args.g_cav, args.delta2)
    print(f"g_cav={phys.g_cav:.6g} Omega1={phys.Omega1:.6g} Omega2={phys.Omega2:.6g} "
          f"Delta1={phys.Delta1:.6g} Delta2={phys.Delta2:.6g} delta={phys.delta:.6g} "
          f"delta_cav={phys.delta_cav:.6g}")
    eff = effective_params(phys).eff
    print(f"check: omega0={eff.omega0:.4f} omega={eff.omega:.4f} g_eff={eff.g_eff:.4f} U={eff.U:.4f}")
    return 0


def run_config(cfg: RunConfig) -> int:
    """Execute a parsed configuration (evolution of the chosen model)."""
    t = np.arange(0.0, cfg.t_max + 0.5 * cfg.sample_dt, cfg.sample_dt)
    if cfg.model == "semiclassical":
        eff = effective_params(cfg.phys).eff
        return _semi_out(SemiParams.from_effective(eff), _semi_start(cfg.init), t, cfg.out, cfg.svg)
    if cfg.model == "full":
        gen = build_full(cfg.phys, cfg.n_max)
    else:
        res = effective_params(cfg.phys)
        if res.warning:
            print(f"warning: {res.warning}", file=sys.stderr)
        gen = build_effective(replace(res.eff, negate_hamiltonian=cfg.negate), cfg.n_max)
    rho0 = gen.basis_state(cfg.init[0], 0)
    traj = evolve(gen, rho0, t, SolverOptions(), observables=cfg.observables)
    _traj_out(traj, cfg.out, cfg.svg)
    return 0


def _traj_out(traj, out, svg):
    names = list(traj.observables)
    rows = zip(traj.times, *(traj.observables[k] for k in names))
    write_csv(out, ["t_us"] + names, rows)
    if svg:
        write_svg(svg, traj.times, traj.observables)


def cmd_evolve(args) -> int:
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
        return run_config(cfg)
    obs = [s for s in args.observables.split(",") if s]
    t = np.arange(0.0, args.t_max + 0.5 * args.sample_dt, args.sample_dt)
    if args.model == "full":
        if not args.preset:
            raise ConfigError("the full model needs --preset")
        phys = replace(get_preset(args.preset).phys, kappa=args.kappa or 0.0)
        gen = build_full(phys, args.n_max or 8)
    else:
        gen = build_effective(_eff_from_args(args), args.n_max or 40)
    rho0 = gen.basis_state(args.init[0], 0)
    opts = SolverOptions(fock_guard=not args.no_fock_guard)
    traj = evolve(gen, rho0, t, opts, observables=obs)
    _traj_out(traj, args.out, args.svg)
    return 0


def cmd_steady(args) -> int:
    base = _eff_from_args(args)
    rows = []
    for U in np.linspace(args.u_from, args.u_to, args.u_steps):
        gen = build_effective(replace(base, U=float(U)), args.n_max)
        rho = steady_state(gen)
        n = rho.expect(gen.probes["n"])
        sz = rho.expect(gen.probes["sz"])
        g2 = g2_zero(rho) if n > 1e-9 else math.nan
        rows.append((U, sz, n, g2))
    write_csv(args.out, ["U", "sz", "n", "g2"], rows)
    if args.svg:
        arr = np.array(rows)
        write_svg(args.svg, arr[:, 0], {"sz": arr[:, 1], "n": arr[:, 2]}, xlabel="U (MHz)")
    return 0


def cmd_wigner(args) -> int:
    eff = _eff_from_args(args)
    gen = build_effective(eff, args.n_max)
    if args.t is None:
        rho = steady_state(gen)
    else:
        rho0 = gen.basis_state(args.init[0], 0)
        traj = evolve(gen, rho0, [0.0, args.t] if args.t > 0 else [0.0],
                      SolverOptions(snapshots=True), observables=("n",))
        rho = traj.snapshots[-1][1]
    axis = np.linspace(-args.extent, args.extent, args.points)
    W = wigner(partial_trace(rho, "cavity"), axis, axis)
    rows = ((x, y, W.values[i, j]) for i, y in enumerate(W.y_axis) for j, x in enumerate(W.x_axis))
    write_csv(args.out, ["x", "y", "W"], rows)
    return 0


def _semi_start(init: str, alpha=0.1, w0=None) -> SemiState:
    if w0 is None:
        w0 = 0.99 if init == "e0" else -0.99
    return SemiState(complex(alpha), complex(0.0, 0.5 * math.sqrt(max(0.0, 1 - w0 * w0))), w0)


def _semi_out(p, s0, t, out, svg) -> int:
    traj = semi_integrate(s0, p, t)
    rows = [(ti, s.alpha.real, s.alpha.imag, s.beta.real, s.beta.imag, s.w) for ti, s in zip(t, traj)]
    write_csv(out, ["t_us", "re_alpha", "im_alpha", "re_beta", "im_beta", "w"], rows)
    if svg:
        arr = np.array(rows)
        write_svg(svg, arr[:, 0], {"|alpha|": np.hypot(arr[:, 1], arr[:, 2]), "w": arr[:, 5]})
    return 0


def cmd_semi(args) -> int:
    eff = _eff_from_args(args)
    p = SemiParams.from_effective(eff)
    t = np.arange(0.0, args.t_max + 0.5 * args.sample_dt, args.sample_dt)
    return _semi_out(p, _semi_start(args.init, args.alpha0, args.w0), t, args.out, args.svg)


def cmd_spectrum(args) -> int:
    eff = _eff_from_args(args)
    ev = rabi_spectrum(eff, args.n_max, args.k)
    write_csv(args.out, ["index", "energy_MHz"], enumerate(ev))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabisim", description="Generalized quantum Rabi model simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="effective parameters of a preset, or a physical design")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--omega-tilde2", choices=("after", "before"), default="after")
    p.add_argument("--geff", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--omega0", type=float, default=0.0)
    p.add_argument("--g-cav", type=float, default=200.0)
    p.add_argument("--delta2", type=float)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("evolve", help="time evolution to CSV")
    _add_eff_args(p)
    p.add_argument("--config", help="key=value run file (overrides other flags)")
    p.add_argument("--model", choices=("effective", "full"), default="effective")
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--sample-dt", type=float, default=0.01)
    p.add_argument("--n-max", type=int)
    p.add_argument("--init", choices=("e0", "g0"), default="e0")
    p.add_argument("--observables", default="n,sz,P_e0")
    p.add_argument("--no-fock-guard", action="store_true")
    _add_out(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("steady", help="steady-state scan over U")
    _add_eff_args(p, u=False)
    p.add_argument("--u-from", type=float, default=-4.0)
    p.add_argument("--u-to", type=float, default=4.0)
    p.add_argument("--u-steps", type=int, default=81)
    p.add_argument("--n-max", type=int, default=60)
    p.set_defaults(U=0.0)
    _add_out(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("wigner", help="cavity Wigner function (steady state, or at --t)")
    _add_eff_args(p)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--t", type=float, help="evolve to this time instead of the steady state")
    p.add_argument("--init", choices=("e0", "g0"), default="e0")
    p.add_argument("--extent", type=float, default=6.0)
    p.add_argument("--points", type=int, default=121)
    _add_out(p, svg=False)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("semi", help="mean-field trajectory")
    _add_eff_args(p)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--sample-dt", type=float, default=0.01)
    p.add_argument("--init", choices=("e0", "g0"), default="g0")
    p.add_argument("--alpha0", type=float, default=0.1)
    p.add_argument("--w0", type=float, help="initial inversion (default +-0.99 by --init)")
    _add_out(p)
    p.set_defaults(func=cmd_semi)

    p = sub.add_parser("spectrum", help="lowest eigenvalues of H/(2 pi)")
    _add_eff_args(p)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--k", type=int, default=10)
    _add_out(p, svg=False)
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rabisim: config error: {exc}", file=sys.stderr)
        return 2
    except RabiSimError as exc:
        print(f"rabisim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
