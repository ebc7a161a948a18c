"""Command-line front end.

    hausdorff bound <config>
    hausdorff verify <config>
    hausdorff apply <config> --f <spec> --grid <spec>
    hausdorff scenario <name> [--p P]
    hausdorff list

Exit codes: 0 success, 1 runtime failure, 2 dominance violated, 3 bad config.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from typing import Optional


from . import __version__
from .bounds import exact_norm_compact_group, theoretical_bound
from .config import ScenarioConfig, function_from_spec, grid_from_spec, load_config, parse_config
from .errors import ConfigInvalid, HausdorffError
from .estimator import (OMEGA_QUAD, TARGET_QUAD, divergence_probe, empirical_norm_continuous,
                        empirical_norm_operator)
from .operator import apply_grid
from .report import BOUND_DIVERGENT, DOMINANCE_OK, DOMINANCE_VIOLATED, Report
from .scenarios import list_scenarios, scenario_text

__all__ = ["run_bound", "run_verify", "run_apply", "run_scenario", "run_divergence", "main"]

EXIT_OK, EXIT_FAILED, EXIT_VIOLATED, EXIT_CONFIG = 0, 1, 2, 3


def _echo(rep: Report, cfg: ScenarioConfig):
    rep.add("scenario", cfg.name)
    for sname, items in cfg.sections:
        if sname == "scenario":
            continue
        text = ScenarioConfig(((sname, items),)).to_text().splitlines()[1:]
        for line in text:
            if line:
                key, _, val = line.partition(" = ")
                rep.add(f"config.{sname}.{key}", val)


def _bound_fields(rep, bound):
    rep.add("bound.value", bound.value)
    rep.add("bound.regime", bound.regime)
    rep.add("bound.formula", bound.formula)
    rep.add("bound.error", bound.error)
    rep.add("bound.divergent", bound.divergent)
    if bound.note:
        rep.add("bound.note", bound.note)


def run_bound(cfg: ScenarioConfig, rel_tol: float = 1e-6) -> Report:
    t0 = time.perf_counter()
    rep = Report("bound")
    _echo(rep, cfg)
    op = cfg.operator()
    bound = theoretical_bound(op, cfg.quadrature(rel_tol=rel_tol))
    _bound_fields(rep, bound)
    rep.add("tolerance.rel", rel_tol)
    if bound.divergent:
        rep.add("verdict", BOUND_DIVERGENT)
    rep.wall_time = time.perf_counter() - t0
    return rep


def _estimate(cfg, op, seed, rel_tol):
    method = cfg.get("estimator", "method", "auto")
    restarts = cfg.get("estimator", "restarts", 16)
    if method == "matrix" or (method == "auto" and op.finite_discrete
                              and not cfg.get("estimator", "families")):
        return empirical_norm_operator(op, restarts=restarts, seed=seed)
    families = cfg.witness_families(op.source)
    if not families:
        raise cfg.invalid("no witness families listed", "estimator", "families")
    quad = cfg.quadrature("estimator.quadrature", rel_tol, TARGET_QUAD)
    oquad = cfg.quadrature("estimator.omega_quadrature", rel_tol, OMEGA_QUAD)
    return empirical_norm_continuous(op, families, budget=cfg.get("estimator", "budget", 64),
                                     seed=seed, quad=quad, omega_quad=oquad, restarts=restarts)


def run_verify(cfg: ScenarioConfig, seed: Optional[int] = None, rel_tol: float = 1e-6) -> Report:
    """Bound, empirical lower bound and the dominance verdict."""
    t0 = time.perf_counter()
    seed = cfg.get("estimator", "seed", 0) if seed is None else seed
    rep = Report("verify")
    _echo(rep, cfg)
    op = cfg.operator()
    bound = theoretical_bound(op, cfg.quadrature(rel_tol=rel_tol))
    _bound_fields(rep, bound)
    lb = _estimate(cfg, op, seed, rel_tol)
    rep.add("empirical.value", lb.value)
    rep.add("empirical.family", lb.family)
    rep.add("empirical.exact", lb.exact)
    rep.add("empirical.error", lb.error)
    if len(lb.witness) <= 16:
        rep.add("empirical.witness", tuple(float(w) for w in lb.witness))
    else:
        rep.add("empirical.witness_size", len(lb.witness))
        rep.add("empirical.witness_head", tuple(float(w) for w in lb.witness[:8]))
    try:
        rep.add("exact_norm", exact_norm_compact_group(op))
    except HausdorffError:
        pass
    tol = rel_tol * max(1.0, abs(bound.value) if math.isfinite(bound.value) else 1.0)
    combined = tol + bound.error + lb.error
    rep.add("slack", bound.value - lb.value)
    rep.add("tolerance.rel", rel_tol)
    rep.add("tolerance.combined", combined)
    rep.add("seed", seed)
    if bound.divergent:
        verdict = BOUND_DIVERGENT
    elif lb.value > bound.value + combined:
        verdict = DOMINANCE_VIOLATED
        rep.exit_code = EXIT_VIOLATED
    else:
        verdict = DOMINANCE_OK
    rep.add("verdict", verdict)
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_apply(cfg: ScenarioConfig, f_spec: str, grid_spec: str, rel_tol: float = 1e-6) -> Report:
    t0 = time.perf_counter()
    rep = Report("apply")
    _echo(rep, cfg)
    op = cfg.operator()
    f = function_from_spec(f_spec, op.source.dim)
    grid = grid_from_spec(grid_spec)
    vals, errs = apply_grid(op, f, grid, cfg.quadrature(rel_tol=rel_tol), full_output=True)
    rep.add("f", f_spec)
    rep.add("points", len(grid))
    rep.csv_header = ("x", "Hf", "error")
    for i, (x, v, e) in enumerate(zip(grid.tolist(), vals.tolist(), errs.tolist())):
        rep.add(f"x[{i}]", float(x))
        rep.add(f"Hf[{i}]", float(v))
        rep.add(f"error[{i}]", float(e))
        rep.csv_rows.append((float(x), float(v), float(e)))
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_divergence(cfg: ScenarioConfig, rel_tol: float = 1e-6) -> Report:
    t0 = time.perf_counter()
    rep = Report("divergence")
    _echo(rep, cfg)
    op = cfg.operator()
    pr = cfg.probe()
    if pr is None:
        raise cfg.invalid("missing [probe] section", "probe")
    quad = cfg.quadrature(rel_tol=rel_tol)
    res = divergence_probe(op, pr["f"], pr["x"], pr["eps"], quad)
    rep.add("probe.f", pr["f_text"])
    rep.add("probe.x", pr["x"])
    if pr["witness_p"] is not None:
        rep.add("probe.witness_p", pr["witness_p"])
    rep.csv_header = ("eps", "value")
    for i, (e, v) in enumerate(zip(res.eps, res.values)):
        rep.add(f"eps[{i}]", e)
        rep.add(f"value[{i}]", v)
        rep.csv_rows.append((e, v))
    for note in res.notes:
        rep.add("note", note)
    rep.add("monotone_growth", res.monotone_growth)
    bound = theoretical_bound(op, quad)
    _bound_fields(rep, bound)
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_scenario(name: str, seed: Optional[int] = None, rel_tol: float = 1e-6,
                 p=None) -> Report:
    cfg = parse_config(scenario_text(name, p))
    if cfg.probe() is not None:
        return run_divergence(cfg, rel_tol)
    return run_verify(cfg, seed, rel_tol)


# --------------------------------------------------------------------------
def _parser():
    ap = argparse.ArgumentParser(prog="hausdorff", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="estimator seed (default: config value, else 0)")
    common.add_argument("--rel-tol", type=float, default=1e-6, help="quadrature relative tolerance")
    common.add_argument("--out", help="also write the report to this file")
    common.add_argument("--csv", help="write samples (or the report fields) as CSV")
    common.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("bound", "theoretical upper bound"),
                        ("verify", "bound, empirical lower bound and verdict")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("config")
    sp = sub.add_parser("apply", parents=[common], help="sample (H f)(x) on a grid")
    sp.add_argument("config")
    sp.add_argument("--f", required=True, dest="f_spec",
                    help="expression in t, optionally 'EXPR on LO,HI'")
    sp.add_argument("--grid", required=True, help="LO:HI:N, log:LO:HI:N or a,b,c")
    sp = sub.add_parser("scenario", parents=[common], help="run a built-in scenario")
    sp.add_argument("name")
    sp.add_argument("--p", default=None, help="exponent for scenarios that take one")
    sub.add_parser("list", help="list built-in scenarios")
    return ap


def _emit(rep: Report, args):
    text = rep.text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(rep.csv_text())


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_scenarios():
            print(f"{name}\t{desc}")
        return EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "scenario":
            try:
                rep = run_scenario(args.name, args.seed, args.rel_tol, args.p)
            except (KeyError, ValueError) as exc:
                if isinstance(exc, HausdorffError):
                    raise
                raise ConfigInvalid(str(exc).strip("'\""), "scenario") from exc
        else:
            cfg = load_config(args.config)
            if args.command == "bound":
                rep = run_bound(cfg, args.rel_tol)
            elif args.command == "verify":
                rep = run_verify(cfg, args.seed, args.rel_tol)
            else:
                rep = run_apply(cfg, args.f_spec, args.grid, args.rel_tol)
    except ConfigInvalid as exc:
        sys.stderr.write(f"error: CONFIG_INVALID: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"error: CONFIG_INVALID: cannot read config: {exc}\n")
        return EXIT_CONFIG
    except HausdorffError as exc:
        rep = Report("error")
        rep.add("error.code", exc.code)
        rep.add("error.message", str(exc))
        rep.exit_code = EXIT_FAILED
    except ValueError as exc:
        rep = Report("error")
        rep.add("error.code", "INVALID_ARGUMENT")
        rep.add("error.message", str(exc))
        rep.exit_code = EXIT_FAILED
    _emit(rep, args)
    return rep.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
