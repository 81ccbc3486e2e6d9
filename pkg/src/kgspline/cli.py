"""Experiment driver: single runs, refinement ladders, tension sweeps.

Subcommands
    run         one kink propagation, full observation time series
    table1      error-norm refinement ladder (four (h, dt) pairs, t = 10)
    table2      conservation-drift ladder (same pairs, C_E and C_P at t = 10)
    rho-sweep   one full run per tension value plus a t = 10 summary
    limits      print stencil weights next to their zero-tension limits

Configuration merges three layers, later winning: built-in defaults (the
headline run: [-30, 30], 3000 elements, dt = 0.005, rho = 1, c = 0.5,
t_final = 30), an optional flat key = value config file, and command-line
flags.  All CSV output is written atomically (temp file then rename) with
17 significant digits so values round-trip bitwise.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from .basis import make_basis, nodal_stencils, polynomial_limit_stencils
from .diagnostics import RunRecord, closed_form_invariants, ExactKink
from .errors import InvalidParameterError, KgsplineError, OutputError
from .fitting import Grid
from .solver import ProblemSpec, RunResult, run

# The four (h, dt) refinement pairs of the ladder experiments.
LADDER = ((0.2, 0.05), (0.1, 0.02), (0.05, 0.01), (0.02, 0.005))

CSV_HEADER = "t,linf,E,P,C_E,C_P,growth_factor"

_DEFAULTS = {
    "a": -30.0,
    "b": 30.0,
    "nodes": None,   # resolved against h below; 3000 if neither given
    "h": None,
    "dt": 0.005,
    "rho": (1.0,),
    "speed": 0.5,
    "t_final": 30.0,
    "observe_every": 100,
    "out": "results",
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    a: float
    b: float
    n_elements: int
    dt: float
    rho: tuple[float, ...]
    wave_speed: float
    t_final: float
    observe_every: int
    out: str

    def grid(self) -> Grid:
        return Grid(self.a, self.b, self.n_elements)


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidParameterError(f"{key}: cannot parse {text!r} as a number") from None


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InvalidParameterError(f"{key}: cannot parse {text!r} as an integer") from None


def _read_config_file(path: str) -> dict:
    """Flat key = value lines; # starts a comment; keys match flag names."""
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config file {path}: {exc}") from exc
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(
                f"{path}:{lineno}: expected key = value, got {raw.strip()!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _DEFAULTS:
            raise InvalidParameterError(f"{path}:{lineno}: unknown config key {key!r}")
        if key == "out":
            entries[key] = value
        elif key == "rho":
            parts = value.replace(",", " ").split()
            if not parts:
                raise InvalidParameterError(f"{path}:{lineno}: rho: empty value")
            entries[key] = tuple(_parse_float("rho", p) for p in parts)
        elif key in ("nodes", "observe_every"):
            entries[key] = _parse_int(key, value)
        else:
            entries[key] = _parse_float(key, value)
    return entries


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float, help="left domain endpoint")
    common.add_argument("--b", type=float, help="right domain endpoint")
    common.add_argument("--nodes", type=int,
                        help="element count N (grid has N+1 collocation nodes)")
    common.add_argument("--h", type=float, help="mesh spacing, alternative to --nodes")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--rho", type=float, action="append",
                        help="tension parameter; repeat for sweeps")
    common.add_argument("--speed", type=float, help="kink speed c, |c| < 1")
    common.add_argument("--t-final", type=float, dest="t_final", help="end time")
    common.add_argument("--observe-every", type=int, dest="observe_every",
                        help="record diagnostics every this many steps")
    common.add_argument("--out", help="output directory for CSV files")
    common.add_argument("--config", help="flat key = value config file")
    parser = argparse.ArgumentParser(
        prog="kgspline",
        description="Tension-spline collocation experiments for the cubic "
                    "Klein-Gordon equation.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    sub.add_parser("run", parents=[common],
                   help="single kink run with full time series")
    sub.add_parser("table1", parents=[common],
                   help="error-norm refinement ladder at t = 10")
    sub.add_parser("table2", parents=[common],
                   help="conservation-drift refinement ladder at t = 10")
    sub.add_parser("rho-sweep", parents=[common],
                   help="one full run per tension value plus summary")
    sub.add_parser("limits", parents=[common],
                   help="print stencil weights and their zero-tension limits")
    return parser


def parse_config(argv=None) -> ExperimentConfig:
    """Merge defaults, config file, and flags into a validated config."""
    args = _build_parser().parse_args(argv)
    merged = dict(_DEFAULTS)
    if args.config is not None:
        merged.update(_read_config_file(args.config))
    for key in ("a", "b", "nodes", "h", "dt", "speed", "t_final",
                "observe_every", "out"):
        flag = getattr(args, key)
        if flag is not None:
            merged[key] = flag
    if args.rho is not None:
        merged["rho"] = tuple(args.rho)

    a, b = merged["a"], merged["b"]
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise InvalidParameterError(f"a, b: need finite a < b, got a={a}, b={b}")
    nodes, h = merged["nodes"], merged["h"]
    if h is not None:
        if not (math.isfinite(h) and h > 0.0):
            raise InvalidParameterError(f"h: must be positive, got {h}")
        ratio = (b - a) / h
        n_from_h = int(round(ratio))
        if n_from_h < 1 or abs(ratio - n_from_h) > 1e-9 * max(1.0, abs(ratio)):
            raise InvalidParameterError(
                f"h: spacing {h} does not divide the domain [{a}, {b}] evenly"
            )
        if nodes is not None and nodes != n_from_h:
            raise InvalidParameterError(
                f"nodes, h: inconsistent; {nodes} elements vs (b-a)/h = {n_from_h}"
            )
        nodes = n_from_h
    elif nodes is None:
        nodes = 3000
    if nodes < 4:
        raise InvalidParameterError(f"nodes: need at least 4 elements, got {nodes}")
    dt = merged["dt"]
    if not (math.isfinite(dt) and dt > 0.0):
        raise InvalidParameterError(f"dt: must be positive, got {dt}")
    rho = tuple(merged["rho"])
    if not rho:
        raise InvalidParameterError("rho: list must not be empty")
    for r in rho:
        if not (math.isfinite(r) and r > 0.0):
            raise InvalidParameterError(f"rho: must be positive, got {r}")
    speed = merged["speed"]
    if not (math.isfinite(speed) and abs(speed) < 1.0):
        raise InvalidParameterError(f"speed: need |c| < 1, got {speed}")
    t_final = merged["t_final"]
    if not (math.isfinite(t_final) and t_final >= 0.0):
        raise InvalidParameterError(f"t_final: must be >= 0, got {t_final}")
    observe_every = merged["observe_every"]
    if observe_every < 1:
        raise InvalidParameterError(
            f"observe_every: must be >= 1, got {observe_every}"
        )
    return ExperimentConfig(
        kind=args.kind, a=a, b=b, n_elements=nodes, dt=dt, rho=rho,
        wave_speed=speed, t_final=t_final, observe_every=observe_every,
        out=merged["out"],
    )


def _fmt(value) -> str:
    return "%.17g" % value


def _atomic_write(path: str, text: str) -> None:
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def emit_csv(records: list[RunRecord], path: str) -> None:
    """Observation rows to CSV, atomically, 17 significant digits."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join(_fmt(v) for v in (
            r.t, r.linf, r.energy, r.momentum, r.c_e, r.c_p, r.growth_factor
        )))
    _atomic_write(path, "\n".join(lines) + "\n")


def _csv_table(path: str, header: str, rows: list[list]) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else _fmt(cell) for cell in row
        ))
    _atomic_write(path, "\n".join(lines) + "\n")


def _single_rho(cfg: ExperimentConfig) -> float:
    if len(cfg.rho) != 1:
        raise InvalidParameterError(
            f"rho: this command takes exactly one value, got {len(cfg.rho)}"
        )
    return cfg.rho[0]


def run_single(cfg: ExperimentConfig) -> tuple[RunResult, str]:
    """Full observation series of one run, written to <out>/run.csv."""
    spec = ProblemSpec(
        grid=cfg.grid(), dt=cfg.dt, rho=_single_rho(cfg),
        t_final=cfg.t_final, wave_speed=cfg.wave_speed,
    )
    result = run(spec, observe_every=cfg.observe_every)
    path = os.path.join(cfg.out, "run.csv")
    emit_csv(result.records, path)
    return result, path


def _ladder_entries(cfg: ExperimentConfig, pairs) -> list[dict]:
    """Run every (h, dt) pair of the ladder, per configured tension."""
    entries = []
    for rho in cfg.rho:
        for h, dt in pairs:
            ratio = (cfg.b - cfg.a) / h
            n = int(round(ratio))
            if n < 4 or abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
                raise InvalidParameterError(
                    f"h: ladder spacing {h} does not fit the domain "
                    f"[{cfg.a}, {cfg.b}]"
                )
            grid = Grid(cfg.a, cfg.b, n)
            spec = ProblemSpec(
                grid=grid, dt=dt, rho=rho, t_final=10.0,
                wave_speed=cfg.wave_speed,
            )
            result = run(spec, observe_every=max(spec.n_steps, 1))
            entries.append({"rho": rho, "h": grid.h, "dt": dt, "result": result})
    return entries


def run_table1(cfg: ExperimentConfig, pairs=LADDER) -> list[dict]:
    """Error ladder: max-norm at t = 10 per (h, dt) pair, plus the observed
    convergence order between consecutive pairs.  Written to
    <out>/table1.csv, one row group per tension value."""
    rows = []
    prev = None
    for entry in _ladder_entries(cfg, pairs):
        result = entry["result"]
        linf = result.final.linf
        order = math.nan
        if (prev is not None and prev["rho"] == entry["rho"]
                and prev["failure"] == "" and result.failure is None
                and linf > 0.0 and prev["h"] != entry["h"]):
            order = math.log(prev["linf"] / linf) / math.log(prev["h"] / entry["h"])
        rows.append({
            "rho": entry["rho"], "h": entry["h"], "dt": entry["dt"],
            "linf": linf, "linf_x1000": 1e3 * linf, "order": order,
            "failure": result.failure or "",
        })
        prev = rows[-1]
    _csv_table(
        os.path.join(cfg.out, "table1.csv"),
        "rho,h,dt,linf,linf_x1000,order,failure",
        [[r["rho"], r["h"], r["dt"], r["linf"], r["linf_x1000"], r["order"],
          r["failure"]] for r in rows],
    )
    return rows


def run_table2(cfg: ExperimentConfig, pairs=LADDER) -> list[dict]:
    """Drift ladder: relative energy and momentum changes at t = 10 per
    (h, dt) pair.  Written to <out>/table2.csv."""
    rows = []
    for entry in _ladder_entries(cfg, pairs):
        result = entry["result"]
        rows.append({
            "rho": entry["rho"], "h": entry["h"], "dt": entry["dt"],
            "c_e": result.final.c_e, "c_p": result.final.c_p,
            "failure": result.failure or "",
        })
    _csv_table(
        os.path.join(cfg.out, "table2.csv"),
        "rho,h,dt,C_E,C_P,failure",
        [[r["rho"], r["h"], r["dt"], r["c_e"], r["c_p"], r["failure"]]
         for r in rows],
    )
    return rows


def rho_sweep(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    """One full run per tension value.  Each run's series goes to
    <out>/sweep_rho_<rho>.csv; the summary row nearest t = 10 per run goes
    to <out>/sweep_summary.csv."""
    results = {}
    summary = []
    for rho in cfg.rho:
        spec = ProblemSpec(
            grid=cfg.grid(), dt=cfg.dt, rho=rho,
            t_final=cfg.t_final, wave_speed=cfg.wave_speed,
        )
        result = run(spec, observe_every=cfg.observe_every)
        path = os.path.join(cfg.out, f"sweep_rho_{rho:.6g}.csv")
        emit_csv(result.records, path)
        results[rho] = (result, path)
        rec = min(result.records, key=lambda r: abs(r.t - 10.0))
        summary.append({
            "rho": rho, "t": rec.t, "linf": rec.linf,
            "c_e": rec.c_e, "c_p": rec.c_p, "failure": result.failure or "",
        })
    _csv_table(
        os.path.join(cfg.out, "sweep_summary.csv"),
        "rho,t,linf,C_E,C_P,failure",
        [[r["rho"], r["t"], r["linf"], r["c_e"], r["c_p"], r["failure"]]
         for r in summary],
    )
    return results, summary


def limits_report(cfg: ExperimentConfig) -> list[dict]:
    """Stencil weights per configured tension, with the zero-tension row."""
    h = cfg.grid().h
    rows = []
    for rho in cfg.rho:
        basis = make_basis(rho, h)
        st = nodal_stencils(basis)
        rows.append({
            "rho": rho, "path": basis.eval_path, "alpha1": st.alpha1,
            "beta1": st.beta1, "gamma1": st.gamma1, "gamma2": st.gamma2,
        })
    lim = polynomial_limit_stencils(h)
    rows.append({
        "rho": 0.0, "path": "limit", "alpha1": lim.alpha1,
        "beta1": lim.beta1, "gamma1": lim.gamma1, "gamma2": lim.gamma2,
    })
    return rows


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        if cfg.kind == "run":
            result, path = run_single(cfg)
            kink = ExactKink(cfg.wave_speed)
            e_ref, p_ref = closed_form_invariants(kink, cfg.a, cfg.b)
            first, last = result.records[0], result.final
            print(f"E(0) = {first.energy:.10g}  (closed form {e_ref:.10g})")
            print(f"P(0) = {first.momentum:.10g}  (closed form {p_ref:.10g}, "
                  f"doubled convention {2 * first.momentum:.10g})")
            print(f"t = {last.t:g}: linf = {last.linf:.6e}, "
                  f"C_E = {last.c_e:.4e}, C_P = {last.c_p:.4e}, "
                  f"growth = {last.growth_factor:.3g}")
            print(f"series written to {path}")
            if result.failure:
                print(f"run failed: {result.failure}", file=sys.stderr)
                return 1
        elif cfg.kind == "table1":
            rows = run_table1(cfg)
            for r in rows:
                order = "" if math.isnan(r["order"]) else f"  order = {r['order']:.3f}"
                print(f"rho = {r['rho']:<10g} h = {r['h']:<6g} dt = {r['dt']:<7g} "
                      f"linf*1e3 = {r['linf_x1000']:.4f}{order}")
            if any(r["failure"] for r in rows):
                for r in rows:
                    if r["failure"]:
                        print(f"row (h={r['h']}, dt={r['dt']}) failed: "
                              f"{r['failure']}", file=sys.stderr)
                return 1
        elif cfg.kind == "table2":
            rows = run_table2(cfg)
            for r in rows:
                print(f"rho = {r['rho']:<10g} h = {r['h']:<6g} dt = {r['dt']:<7g} "
                      f"C_E = {r['c_e']:.4e}  C_P = {r['c_p']:.4e}")
            if any(r["failure"] for r in rows):
                for r in rows:
                    if r["failure"]:
                        print(f"row (h={r['h']}, dt={r['dt']}) failed: "
                              f"{r['failure']}", file=sys.stderr)
                return 1
        elif cfg.kind == "rho-sweep":
            results, summary = rho_sweep(cfg)
            for r in summary:
                print(f"rho = {r['rho']:<12g} linf(t={r['t']:g}) = {r['linf']:.6e}  "
                      f"C_E = {r['c_e']:.4e}  C_P = {r['c_p']:.4e}")
            if any(r["failure"] for r in summary):
                for r in summary:
                    if r["failure"]:
                        print(f"rho = {r['rho']} failed: {r['failure']}",
                              file=sys.stderr)
                return 1
        else:
            for r in limits_report(cfg):
                print(f"rho = {r['rho']:<12g} [{r['path']:>6s}] "
                      f"alpha1 = {r['alpha1']:.17g}  beta1 = {r['beta1']:.17g}  "
                      f"gamma1 = {r['gamma1']:.17g}  gamma2 = {r['gamma2']:.17g}")
        return 0
    except KgsplineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
