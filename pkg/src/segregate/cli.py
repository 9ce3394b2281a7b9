"""Command-line experiment runner.

Each subcommand reads a flat key=value config, runs one experiment and
writes CSV, JSON and SVG files under the output directory.  Every JSON
record echoes the resolved configuration.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import plotting
from .config import RunConfig, load_config
from .energy import elastic_gap, energy_I0, random_deflection
from .errors import ConfigError, NoCoexistence, ParameterError, SegregateError
from .exponent import exponent_fit
from .gamma import continuation, optimize_jump_positions, periodic_gaps, select_convention
from .kernels import (ShortRangeKernel, build_balanced, build_short, constant_kernel,
                      neumann_green)
from .minimize import (MinimizeOptions, criterion_C_profile, gap_avoidance_check, multi_start)
from .output import write_csv, write_json
from .profile import ProfileProblem, compute_c0
from .thermo import (EosParams, critical_point, equal_area_residual, isotherm,
                     maxwell_construction)
from .wells import WellParams, envelope_of_G, flat_interval, well_minimum

log = logging.getLogger("segregate")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3


def _map(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _kernel(cfg: RunConfig) -> ShortRangeKernel:
    try:
        return ShortRangeKernel(cfg["kernel.family"], cfg["kernel.scale"], cfg["kernel.mass"])
    except ParameterError as exc:
        raise ConfigError(f"kernel.scale/kernel.mass: {exc}") from exc


def _options(cfg: RunConfig) -> MinimizeOptions:
    try:
        return MinimizeOptions(step=cfg["minimize.step"], backtrack=cfg["minimize.backtrack"],
                               tol=cfg["minimize.tol"], max_iter=cfg["minimize.max_iter"],
                               delta_box=cfg["minimize.delta_box"], seed=cfg.seed)
    except ParameterError as exc:
        raise ConfigError(f"minimize.*: {exc}") from exc


def _grid(cfg: RunConfig) -> int:
    n = cfg["grid.n"]
    _require(n >= 8, "grid.n", f"must be at least 8, got {n}")
    return n


# --- eos -------------------------------------------------------------------


def run_eos(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    try:
        p = EosParams(cfg["eos.a"], cfg["eos.b"], cfg["eos.R"])
    except ParameterError as exc:
        raise ConfigError(f"eos.a/eos.b/eos.R: {exc}") from exc
    temps = cfg["eos.T"]
    _require(len(temps) > 0 and all(T > 0 for T in temps), "eos.T", "temperatures must be positive")
    _require(cfg["eos.points"] >= 10, "eos.points", "need at least 10 points")
    _require(cfg["eos.v_max_factor"] > 3, "eos.v_max_factor", "must exceed 3")
    try:
        Vc, Tc, Pc = critical_point(p)
        crit = {"Vc": Vc, "Tc": Tc, "Pc": Pc}
    except NoCoexistence:
        crit = None
    lo = p.b * (1 + 1e-2) if p.b > 0 else 1e-2
    V = np.geomspace(lo, cfg["eos.v_max_factor"] * max(p.b, 1.0 / 3.0), cfg["eos.points"])
    iso_rows, curves, coex_rows, coex, records = [], [], [], [], []
    for T in temps:
        P = isotherm(T, p, V)
        curves.append((T, V, P))
        iso_rows.extend((T, v, pv) for v, pv in zip(V, P))
        try:
            r = maxwell_construction(T, p, v_max_factor=cfg["eos.v_max_factor"])
        except NoCoexistence:
            coex_rows.append((T, None, None, None, "supercritical"))
            records.append({"T": T, "phase": "supercritical"})
            continue
        coex.append((T, r.V1, r.V2, r.Pstar))
        coex_rows.append((T, r.V1, r.V2, r.Pstar, "coexistence"))
        records.append({"T": T, "phase": "coexistence", "V1": r.V1, "V2": r.V2, "Pstar": r.Pstar,
                        "equal_area_residual": equal_area_residual(r, p)})
    write_csv(out / "isotherms.csv", ["T", "V", "P"], iso_rows)
    write_csv(out / "coexistence.csv", ["T", "V1", "V2", "Pstar", "phase"], coex_rows)
    plotting.plot_isotherms(out / "isotherms.svg", curves, coex)
    summary = {"config": cfg.resolved("eos"), "critical_point": crit, "coexistence": records}
    write_json(out / "eos.json", summary)
    return summary


# --- envelope ----------------------------------------------------------------


def run_envelope(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    kTs = cfg["envelope.kT"]
    _require(len(kTs) > 0 and all(k > 0 for k in kTs), "envelope.kT", "values must be positive")
    n_u = cfg["envelope.n_u"]
    _require(n_u >= 3, "envelope.n_u", "need at least 3 points")
    delta = cfg["envelope.delta_box"]
    _require(0 < delta < 0.1, "envelope.delta_box", "must lie in (0, 0.1)")
    tables, rows, records = [], [], []
    for kT in kTs:
        t = envelope_of_G(kT, n_u, delta)
        tables.append((kT, t))
        rows.extend((kT,) + tuple(r) for r in t.to_rows())
        fl = flat_interval(t)
        records.append({"kT": kT, "flat_interval": None if fl is None else
                        {"u_lower": fl[0], "u_upper": fl[1], "v_star": fl[2]}})
    write_csv(out / "envelope.csv", ["kT", "u", "G", "Gstar", "gstar"], rows)
    plotting.plot_envelopes(out / "envelope.svg", tables)
    summary = {"config": cfg.resolved("envelope"), "tables": records}
    write_json(out / "envelope.json", summary)
    return summary


# --- minimize ----------------------------------------------------------------


def _long_kernel(kind: str, n: int):
    if kind == "green":
        return neumann_green(n)
    if kind == "constant":
        return constant_kernel(n, 1.0)
    return None


def _initial_field(cfg: RunConfig, n: int) -> np.ndarray:
    x = (np.arange(n) + 0.5) / n
    m, amp = cfg["field.m"], cfg["field.amplitude"]
    kind = cfg["field.init"]
    if kind == "constant":
        u = np.full(n, m)
    elif kind == "cosine":
        u = m + amp * np.cos(2 * np.pi * cfg["field.periods"] * x)
    else:
        u = m + amp * np.random.default_rng(cfg.seed).uniform(-1, 1, n)
    return u


def _minimize_point(args):
    cfg, eps, out = args
    n = _grid(cfg)
    k = _kernel(cfg)
    short = build_short(k, eps, n)
    long = _long_kernel(cfg["kernel.long"], n)
    J = short if long is None else build_balanced(short, long, eps)
    jmode = cfg["well.j"]
    p = WellParams(cfg["well.kT"], None if jmode == "row" else jmode)
    opts = _options(cfg)
    m = cfg["field.m"]
    best, runs = multi_start(_initial_field(cfg, n), J, p, m, opts, cfg["minimize.restarts"],
                             level=cfg["minimize.level"])
    u = best.field.values
    C = criterion_C_profile(J, p, u)
    t = envelope_of_G(p.kT)
    gap = gap_avoidance_check(u, t, best.census) if t.has_plateau else None
    x = best.field.x
    sub = out / f"eps_{eps:g}"
    write_csv(sub / "field.csv", ["x", "u"], zip(x, u))
    if cfg["minimize.plot"]:
        plotting.plot_field(sub / "field.svg", x, u, f"eps = {eps:g}, kT = {p.kT:g}")
    record = {"config": cfg.resolved("minimize"), "eps": eps, **best.to_dict(),
              "energies_all_starts": [r.energy for r in runs],
              "criterion_C": {"min": float(C.min()), "max": float(C.max()),
                              "positive_everywhere": bool(np.all(C > 0))},
              "gap_avoidance": gap}
    write_json(sub / "result.json", record)
    return record


def run_minimize(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    _grid(cfg)
    _kernel(cfg)
    _options(cfg)
    eps_list = cfg["kernel.eps"]
    _require(len(eps_list) > 0 and all(e > 0 for e in eps_list), "kernel.eps", "values must be positive")
    _require(abs(cfg["field.m"]) < 1 - cfg["minimize.delta_box"], "field.m", "mass must lie inside the box")
    _require(cfg["well.kT"] > 0, "well.kT", "must be positive")
    _require(0 < cfg["minimize.level"] < 1, "minimize.level", "must lie in (0, 1)")
    records = _map(_minimize_point, [(cfg, e, out) for e in eps_list], workers)
    summary = {"config": cfg.resolved("minimize"),
               "runs": [{"eps": r["eps"], "converged": r["converged"], "energy": r["energy"],
                         "census_count": r["census"]["count"]} for r in records]}
    write_json(out / "summary.json", summary)
    return summary


# --- gamma -------------------------------------------------------------------


def interface_costs(k: ShortRangeKernel, kT: float, half_width: float | None) -> dict:
    """c0 under both prefactor conventions, with the well mass set to the kernel's line mass."""
    out = {}
    for conv in ("quarter", "display"):
        r = compute_c0(ProfileProblem(k, WellParams(kT, k.mass), half_width=half_width, convention=conv))
        out[conv] = r.c0
    return out


def _continuation_point(args):
    cfg, c, eps, c0 = args
    n = _grid(cfg)
    return continuation(c, eps, _kernel(cfg), cfg["well.kT"], c0, n=n, opts=_options(cfg))


def run_gamma(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    k = _kernel(cfg)
    _require(k.integrable, "kernel.family", "the interface cost needs an integrable kernel")
    kT = cfg["well.kT"]
    _require(0 < kT < WellParams(kT, k.mass).kT_critical, "well.kT",
             "must lie below the critical temperature of the well")
    hw = cfg["profile.half_width"] or None
    c0 = interface_costs(k, kT, hw)
    amp = well_minimum(kT, k.mass)
    m = cfg["gamma.m"] * amp
    patterns = []
    for njump in cfg["gamma.k"]:
        try:
            c, _ = optimize_jump_positions(njump, 0.0, m=m, amplitude=amp, seed=cfg.seed)
        except ParameterError as exc:
            raise ConfigError(f"gamma.k/gamma.m: {exc}") from exc
        patterns.append({"k": njump, "jumps": list(c.jumps), "start_sign": c.start_sign,
                         "gaps": list(np.diff(c.breakpoints)), "periodic_gaps": list(periodic_gaps(c)),
                         "I0": {name: energy_I0(c, v) for name, v in c0.items()}})
    summary = {"config": cfg.resolved("gamma"), "c0": c0, "amplitude": amp, "patterns": patterns}
    if cfg["gamma.continuation"]:
        kc = cfg["gamma.continuation_k"]
        _grid(cfg)
        _options(cfg)
        eps_list = sorted(cfg["gamma.eps"], reverse=True)
        _require(len(eps_list) > 0 and all(e > 0 for e in eps_list), "gamma.eps", "values must be positive")
        c, _ = optimize_jump_positions(kc, 0.0, m=m, amplitude=amp, seed=cfg.seed)
        runs = _map(_continuation_point, [(cfg, c, e, c0) for e in eps_list], workers)
        choice, selection = select_convention(runs)
        n = _grid(cfg)
        x = (np.arange(n) + 0.5) / n
        for r in runs:
            write_csv(out / f"continuation_eps_{r.eps:g}.csv", ["x", "u"], zip(x, r.result.field.values))
        plotting.plot_continuation(out / "gamma.svg", x, c.cell_averages(n),
                                   [(r.eps, r.result.field.values) for r in runs])
        summary["continuation"] = {"k": kc, "jumps": list(c.jumps),
                                   "runs": [r.to_dict() for r in runs],
                                   "convention": choice, "selection": selection}
    write_json(out / "gamma.json", summary)
    return summary


# --- elastic check -----------------------------------------------------------


def run_elastic_check(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    ns = sorted(cfg["elastic.n"])
    _require(len(ns) >= 2 and ns[0] >= 4, "elastic.n", "need at least two grid sizes >= 4")
    _require(cfg["elastic.fields"] >= 1, "elastic.fields", "need at least one field")
    _require(0 < cfg["elastic.max_slope"] < 1, "elastic.max_slope", "must lie in (0, 1)")
    _require(cfg["well.kT"] > 0, "well.kT", "must be positive")
    p = WellParams(cfg["well.kT"], cfg["elastic.j"])
    rng = np.random.default_rng(cfg.seed)
    table, gaps, rows = [], [], []
    for i in range(cfg["elastic.fields"]):
        w = random_deflection(rng, cfg["elastic.modes"], cfg["elastic.max_slope"])
        recs = [elastic_gap(w, cfg["elastic.eps"], p, n, cfg["elastic.m"]) for n in ns]
        g = [r["relative_gap"] for r in recs]
        ratios = [a / b for a, b in zip(g[:-1], g[1:])]
        table.append({"field": i, "levels": recs, "ratios": ratios})
        gaps.append(g)
        rows.extend((i, r["n"], r["elastic"], r["nonlocal"], r["relative_gap"]) for r in recs)
    write_csv(out / "elastic.csv", ["field", "n", "elastic", "nonlocal", "relative_gap"], rows)
    plotting.plot_refinement(out / "elastic.svg", ns, np.array(gaps))
    all_ratios = [r for t in table for r in t["ratios"]]
    summary = {"config": cfg.resolved("elastic-check"), "fields": table,
               "max_relative_gap_finest": max(g[-1] for g in gaps),
               "ratio_range": [min(all_ratios), max(all_ratios)]}
    write_json(out / "elastic.json", summary)
    return summary


# --- exponent ------------------------------------------------------------------


def run_exponent(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    k = _kernel(cfg)
    lo, hi, npts = cfg["exponent.lo"], cfg["exponent.hi"], cfg["exponent.points"]
    _require(npts >= 3, "exponent.points", "need at least 3 points")
    _require(lo < hi, "exponent.lo/exponent.hi", "lo must be below hi")
    fr = np.linspace(lo, hi, npts)
    try:
        fit = exponent_fit(k, fr, j=cfg["exponent.j"], convention=cfg["exponent.convention"],
                           half_width=cfg["profile.half_width"] or None)
    except ParameterError as exc:
        raise ConfigError(f"exponent.*: {exc}") from exc
    write_csv(out / "exponent.csv", ["kT", "c0"], zip(fit.kT, fit.c0))
    plotting.plot_loglog(out / "loglog.svg", [fit])
    summary = {"config": cfg.resolved("exponent"), **fit.to_dict()}
    write_json(out / "exponent.json", summary)
    return summary


COMMANDS = {
    "eos": run_eos,
    "envelope": run_envelope,
    "minimize": run_minimize,
    "gamma": run_gamma,
    "elastic-check": run_elastic_check,
    "exponent": run_exponent,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="segregate", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--out", default="out", help="output directory (SEGREGATE_OUT overrides)")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(os.environ.get("SEGREGATE_OUT") or args.out)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config, args.set, args.seed)
        cfg.resolved(args.command)
        COMMANDS[args.command](cfg, out, args.workers)
    except (ConfigError, ParameterError) as exc:
        print(f"segregate: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SegregateError, ValueError, FloatingPointError) as exc:
        print(f"segregate: numerical error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
