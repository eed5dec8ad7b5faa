"""Command-line interface.

Commands: build, spectrum, decay, conjugate, semigroup, kato, verify, report.
Exit code 0 iff every selected check passed.
"""
import argparse
import json
import sys

import numpy as np

from . import decay as dk
from . import relativistic as rel
from .errors import MagpsidoError
from .harness import (SUITE_NAMES, ScenarioConfig, ScenarioReport, merge_reports,
                      run_scenario, scenario_context, verify_suite, write_atomic,
                      write_kato_csv, write_spectrum_csv, write_sweep_csv)
from .mpdo import file_hash, load_operator, save_operator
from .quantize import Grid, GridFunction, hermitize, op_weyl
from .spectral import SpectralWindow, discrete_spectrum_select, eig_hermitian


def _add_grid_args(p):
    p.add_argument("--d", type=int, default=1, choices=(1, 2))
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--L", type=float, default=20.0)


def _grid_from_args(args):
    return Grid(args.d, args.L, args.n)


def cmd_build(args):
    cfg = ScenarioConfig.from_json(args.config)
    grid, sym, gauge = scenario_context(cfg)
    H = op_weyl(sym, gauge, grid)
    out = args.out or "operator.mpdo"
    save_operator(H, out)
    digest = file_hash(out)
    print(f"wrote {out} ({grid.size}x{grid.size}, defect {H.hermiticity_defect:.3e})")
    print(f"sha256 {digest}")
    if args.report:
        write_atomic(args.report, json.dumps(
            {"config": cfg.to_dict(), "config_hash": cfg.config_hash(),
             "operator_file": out, "operator_sha256": digest,
             "hermiticity_defect": H.hermiticity_defect}, sort_keys=True, indent=2))
    return 0


def cmd_spectrum(args):
    op = load_operator(args.op)
    if not op.symmetrized:
        op = hermitize(op)
    dec = eig_hermitian(op)
    win = SpectralWindow(args.threshold, args.margin)
    found = discrete_spectrum_select(dec, win)
    out = args.out or "spectrum.csv"
    write_spectrum_csv(dec, out)
    print(f"{len(found)} discrete eigenvalues below {args.threshold} - {args.margin}")
    for lam, _, gap in found:
        print(f"  lambda = {lam:.10f}  gap = {gap:.6f}")
    print(f"wrote {out}")
    return 0


def cmd_decay(args):
    cfg = ScenarioConfig.from_json(args.config)
    grid, sym, gauge = scenario_context(cfg)
    H = op_weyl(sym, gauge, grid)
    dec = eig_hermitian(H)
    win = SpectralWindow(cfg.essential_threshold, cfg.margin)
    found = discrete_spectrum_select(dec, win)
    if not found:
        print("no discrete spectrum below the threshold; nothing to fit")
        return 1
    lam0, u0, gap = found[0]
    u = GridFunction(u0, grid)
    window = tuple(cfg.window) if cfg.window else dk.default_window(grid)
    fits = {}
    for mode in ("exponential", "polynomial"):
        fit = dk.decay_fit(u, mode, window)
        fits[mode] = {"rate": fit.rate, "r_squared": fit.r_squared,
                      "window": fit.window, "samples": fit.sample_count}
        label = "beta-hat" if mode == "exponential" else "p-hat"
        print(f"{mode}: {label} = {fit.rate:.4f}, R2 = {fit.r_squared:.5f}")
    payload = {"eigenvalue": lam0, "gap": gap, "fits": fits,
               "config_hash": cfg.config_hash()}
    if args.out:
        write_atomic(args.out, json.dumps(payload, sort_keys=True, indent=2))
        print(f"wrote {args.out}")
    return 0


def cmd_conjugate(args):
    cfg = ScenarioConfig.from_json(args.config)
    if args.eps_list:
        eps_list = sorted(float(e) for e in args.eps_list.split(","))
    else:
        eps_list = cfg.eps_list
    grid, sym, gauge = scenario_context(cfg)
    H = op_weyl(sym, gauge, grid)
    w = cfg.make_weight()
    rows, eps0 = dk.uniform_bound_sweep(H, w, eps_list)
    out = args.out or "sweep.csv"
    write_sweep_csv(rows, out)
    for eps, rb, erb, flag in rows:
        print(f"eps={eps:<8g} rel_bound={rb:.6f} eps*rel_bound={erb:.6f} ok={flag}")
    print(f"empirical eps0 = {eps0}; wrote {out}")
    return 0


def cmd_semigroup(args):
    grid = _grid_from_args(args)
    res = rel.semigroup_checks(args.t, args.s if args.s else args.t, grid)
    for key, val in res.items():
        print(f"{key}: {val:.6e}")
    if args.out:
        write_atomic(args.out, json.dumps(res, sort_keys=True, indent=2))
    return 0


def cmd_kato(args):
    grid = _grid_from_args(args)
    from .potentials import potential_from_id

    v, meta = potential_from_id(args.potential)
    if not meta.get("nonneg", False):
        print(f"potential {args.potential} is not nonnegative; using |v|")
        W = np.abs(v(grid.nodes))
    else:
        W = v(grid.nodes)
    if args.t_scan:
        rows = rel.kato_scan(W, args.t0, grid, halvings=args.halvings)
    else:
        rows = [(args.t0, rel.kato_estimate(W, args.t0, grid))]
    out = args.out or "kato.csv"
    write_kato_csv(rows, out)
    for t, val in rows:
        print(f"t={t:<12g} sup={val:.8f}")
    print(f"wrote {out}")
    return 0


def cmd_verify(args):
    cfg = ScenarioConfig.from_json(args.config)
    checks = verify_suite(args.suite, cfg)
    n_pass = sum(c.passed for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {args.suite}/{c.name} margin={c.margin:.4g} {c.details}")
    print(f"{n_pass}/{len(checks)} checks passed")
    if args.out:
        report = ScenarioReport(cfg.to_dict(), cfg.config_hash(),
                                {args.suite: [c.__dict__ for c in checks]})
        write_atomic(args.out, report.to_json())
    return 0 if n_pass == len(checks) else 1


def cmd_run(args):
    cfg = ScenarioConfig.from_json(args.config)
    report = run_scenario(cfg, out_path=args.out)
    for suite, checks in report.suites.items():
        for c in checks:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"[{status}] {suite}/{c['name']} {c['details']}")
    print(f"all_passed: {report.all_passed}")
    return 0 if report.all_passed else 1


def cmd_report(args):
    out = merge_reports(args.in_dir, args.out)
    print(f"wrote {out}")
    with open(out) as fh:
        return 0 if json.load(fh)["all_passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="magpsido",
        description="Gauge-covariant phase-space operator toolkit: assembly, "
                    "spectra, eigenfunction decay, and semigroup diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="assemble an operator and persist it")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("spectrum", help="eigenvalues of a stored operator")
    p.add_argument("--op", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("decay", help="decay fits for the ground state")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("conjugate", help="weight-conjugation bound sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--eps-list", dest="eps_list")
    p.add_argument("--out")
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("semigroup", help="kernel diagnostics on a grid")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", type=float)
    _add_grid_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_semigroup)

    p = sub.add_parser("kato", help="smeared-potential estimates")
    p.add_argument("--potential", required=True)
    p.add_argument("--t-scan", dest="t_scan", action="store_true")
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--halvings", type=int, default=6)
    _add_grid_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kato)

    p = sub.add_parser("verify", help="run one verification suite")
    p.add_argument("suite", choices=SUITE_NAMES)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run all suites from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="merge per-run reports")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MagpsidoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
