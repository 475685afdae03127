"""Command-line front end.

Every subcommand reads one or more scenario files (``--config``, repeatable;
the built-in default scenario when omitted), writes its artifacts to
``--out`` under names ``<subcommand>-<scenario hash>...`` and prints a short
report that is also saved as ``<subcommand>-<hash>.txt``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 invasion hypothesis not satisfied.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from . import config as cfg
from . import io
from .criterion import gamma, gamma_analysis, homogeneous_spec, patch_spec
from .errors import ConfigError, CriterionFailedError, NumericalError
from .model import (basic_reproduction_number, competition_threshold, equilibria,
                    equilibrium_stability)
from .profiles import (assemble_heterogeneous, default_grid, default_shifts,
                       half_space_stationary, sub_solution_profile)
from .simulator import reduction_experiment, simulate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CRITERION = 0, 2, 3, 4


@dataclass
class Outcome:
    lines: List[str] = field(default_factory=list)
    files: List[Path] = field(default_factory=list)
    code: int = EXIT_OK

    def add(self, text: str = ""):
        self.lines.append(text)


def _fmt(v: float) -> str:
    return f"{v:.10g}"


# ---------------------------------------------------------------- subcommands

def cmd_equilibria(sc: cfg.Scenario, args, out: Outcome, stem: str):
    rho = sc.shared.rho
    n = [basic_reproduction_number(sp, rho) for sp in (sc.species1, sc.species2)]
    viable = [v > 1 for v in n]
    for i in (1, 2):
        tag = "" if viable[i - 1] else "  not viable (N <= 1)"
        out.add(f"species {i}: N = {_fmt(n[i - 1])}{tag}")
    h = sc.habitat
    patches = [("", h.K1, h.K2)] if h.kind == "constant" else [("forest", h.K1F, h.K2F), ("urban", h.K1U, h.K2U)]
    for name, K1, K2 in patches:
        out.add()
        out.add(f"[{name or 'habitat'}] K1 = {_fmt(K1)}, K2 = {_fmt(K2)}, c = {_fmt(sc.shared.c)}")
        if all(viable):
            out.add(f"competition threshold = {_fmt(competition_threshold(sc.species1, sc.species2, sc.shared, K1, K2))}")
        eq = equilibria(sc.species1, sc.species2, sc.shared, K1, K2)
        rep = equilibrium_stability(eq, sc.species1, sc.species2, sc.shared, K1, K2)
        for label, state in eq.items():
            values = ", ".join(f"{k} = {_fmt(v)}" for k, v in zip(("E1", "F1", "E2", "F2"), state))
            out.add(f"{label}: {values}  [{rep.labels[label]}, leading Re = {rep.leading_real_part[label]:.4g}]")
        if all(viable) and eq.coexistence is None:
            out.add("coexistence: none (a component is not positive)")


def _criterion_spec(sc: cfg.Scenario, direction: Optional[int], patch: str):
    h = sc.habitat
    if patch == "homogeneous":
        if h.kind != "constant":
            raise ConfigError("--patch homogeneous needs a constant habitat; use F or U")
        return homogeneous_spec(sc.species1, sc.species2, sc.shared, h.K1, h.K2, direction or 1)
    if h.kind != "two_patch":
        raise ConfigError(f"--patch {patch} needs a two_patch habitat")
    return patch_spec(sc.species1, sc.species2, sc.shared, h, patch, direction)


def cmd_criterion(sc: cfg.Scenario, args, out: Outcome, stem: str):
    spec = _criterion_spec(sc, args.direction, args.patch)
    res = gamma_analysis(spec)
    out.add(f"invader = species {spec.invader_index}, patch = {args.patch}")
    out.add(f"F_inv* = {_fmt(spec.F_inv_star)}, F_res* = {_fmt(spec.F_res_star)}")
    out.add(f"L_tilde = {_fmt(spec.L_tilde)}")
    out.add(f"zeta = {_fmt(spec.zeta)}")
    out.add(f"chi0 = {_fmt(res.chi0)}")
    out.add(f"argmax = {_fmt(res.argmax)}")
    out.add(f"Gamma(argmax) = {_fmt(res.max_value)}")
    out.add(f"Gamma(F*) = {_fmt(res.value_at_Fstar)}")
    out.add(f"invasion = {str(res.invasion).lower()}")
    chi = np.linspace(0.0, spec.F_inv_star, 401)
    curve = [gamma(spec, c, res.chi0) for c in chi]
    out.files.append(io.write_profile(args.out / f"{stem}-gamma.csv", chi, curve))


def _check_monotone(out: Outcome, name: str, values, increasing: bool):
    v = np.asarray(values)
    d = np.diff(v) if increasing else -np.diff(v)
    ok = bool(np.all(d >= -1e-10 * max(1.0, float(np.max(np.abs(v))))))
    out.add(f"{name}: {'non-decreasing' if increasing else 'non-increasing'} = {str(ok).lower()}")


def cmd_profile(sc: cfg.Scenario, args, out: Outcome, stem: str):
    if sc.habitat.kind == "two_patch":
        prof = assemble_heterogeneous(sc.species1, sc.species2, sc.shared, sc.habitat, dx=args.dx)
        x0F, x0U = default_shifts(prof)
        out.add(f"alpha_U = {_fmt(prof.alpha_U)}, alpha_F = {_fmt(prof.alpha_F)}")
        out.add(f"shifts x0F = {_fmt(x0F)}, x0U = {_fmt(x0U)}")
        for key, val in prof.limits.items():
            out.add(f"limit {key} = {_fmt(val)}")
        for name, inc in (("F1_F", False), ("F1_U", False), ("F2_U", True), ("F2_F", True)):
            values = getattr(prof, name)
            _check_monotone(out, name, values, inc)
            out.files.append(io.write_profile(args.out / f"{stem}-{name}.csv", prof.x, values))
        return
    h = sc.habitat
    spec = homogeneous_spec(sc.species1, sc.species2, sc.shared, h.K1, h.K2, args.direction or 1)
    analysis = gamma_analysis(spec)
    if not analysis.invasion:
        raise CriterionFailedError(f"Gamma(F*) = {analysis.value_at_Fstar:.6g} <= 0; "
                                   "no stationary front is constructed")
    grid = default_grid(spec, args.dx)
    hs = half_space_stationary(spec, grid)
    sub = sub_solution_profile(spec, grid, analysis)
    out.add(f"invader = species {spec.invader_index}, X_max = {_fmt(grid[-1])}, dx = {_fmt(grid[1] - grid[0])}")
    out.add(f"sweeps = {hs.sweeps}, residual = {hs.residual_norm:.3e}")
    out.add(f"invader(X_max) = {_fmt(hs.f1.values[-1])}, resident(0) = {_fmt(hs.f2.values[0])}")
    _check_monotone(out, "invader", hs.f1.values, True)
    _check_monotone(out, "resident", hs.f2.values, False)
    for name, p in (("invader", hs.f1), ("resident", hs.f2), ("sub", sub)):
        out.files.append(io.write_profile(args.out / f"{stem}-{name}.csv", p.grid, p.values))


def cmd_simulate(sc: cfg.Scenario, args, out: Outcome, stem: str):
    initial = cfg.initial_state(sc, args.model)
    res = simulate(sc.sim, initial, sc.species1, sc.species2, sc.shared, sc.habitat, args.model)
    traj, d = res.trajectory, res.diagnostics
    out.add(f"model = {args.model}, steps = {sc.sim.n_steps}, snapshots = {len(traj.times)}")
    out.add(f"final sup F1 = {_fmt(d.sup['F1'][-1])}, sup F2 = {_fmt(d.sup['F2'][-1])}")
    out.add(f"final front = {_fmt(d.front[-1])}")
    out.add(f"max segregation integral = {_fmt(max(d.segregation))}")
    out.add(f"invariant violation = {d.invariant_violation:.3e}, min value = {d.min_value:.3e}")
    out.files.append(io.write_snapshots(args.out / f"{stem}-snapshots.csv", traj))
    out.files.append(io.write_diagnostics(args.out / f"{stem}-diagnostics.csv", d))
    for name in traj.data:
        out.files.append(io.write_pgm(args.out / f"{stem}-{name}.pgm", traj[name]))


def cmd_reduce_check(sc: cfg.Scenario, args, out: Outcome, stem: str):
    initial = cfg.initial_state(sc, "full")
    rows = reduction_experiment(sc.sim, initial, sc.species1, sc.species2, sc.shared,
                                sc.habitat, args.c_values)
    out.add("c, distance, max segregation")
    for r in rows:
        out.add(f"{_fmt(r.c)}, {_fmt(r.distance)}, {_fmt(r.max_segregation)}")
    dist = [r.distance for r in rows]
    seg = [r.max_segregation for r in rows]
    out.add(f"distance strictly decreasing = {str(all(np.diff(dist) < 0)).lower()}")
    out.add(f"segregation decreasing = {str(all(np.diff(seg) < 0)).lower()}")
    table = np.array([[r.c, r.distance, r.max_segregation] for r in rows])
    path = args.out / f"{stem}-table.csv"
    np.savetxt(path, table, delimiter=",", header="c,distance,max_segregation", comments="", fmt="%.17g")
    out.files.append(path)


COMMANDS = {
    "equilibria": cmd_equilibria,
    "criterion": cmd_criterion,
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "reduce-check": cmd_reduce_check,
}


# ---------------------------------------------------------------- driver

def _c_values(text: str) -> List[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if len(vals) < 2 or any(b <= a for a, b in zip(vals, vals[1:])) or vals[0] <= 0:
        raise argparse.ArgumentTypeError("need at least two positive, strictly ascending values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", type=Path, metavar="PATH",
                        help="scenario file (repeat for several; default scenario if omitted)")
    common.add_argument("--out", type=Path, default=Path("."), metavar="DIR", help="output directory")
    common.add_argument("--sweep", type=int, default=1, metavar="N",
                        help="worker threads used when several scenarios are given")
    parser = argparse.ArgumentParser(prog="aedes-competition", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("equilibria", parents=[common], help="equilibria and their stability")
    p = sub.add_parser("criterion", parents=[common], help="invasion integral and verdict")
    p.add_argument("--direction", type=int, choices=(1, 2), default=None,
                   help="invading species (default 1, or the patch's natural invader)")
    p.add_argument("--patch", choices=("homogeneous", "F", "U"), default="homogeneous")
    p = sub.add_parser("profile", parents=[common], help="stationary front profiles")
    p.add_argument("--direction", type=int, choices=(1, 2), default=None)
    p.add_argument("--dx", type=float, default=0.005, help="profile grid step (km)")
    p = sub.add_parser("simulate", parents=[common], help="run the PDE")
    p.add_argument("--model", choices=("full", "reduced"), default="full")
    p = sub.add_parser("reduce-check", parents=[common], help="full vs reduced model as c grows")
    p.add_argument("--c-values", type=_c_values, default=[40.0, 160.0, 640.0], metavar="LIST")
    return parser


def _run_one(command: Callable, path: Optional[Path], args) -> Outcome:
    out = Outcome()
    try:
        sc = cfg.default_scenario() if path is None else cfg.load(path)
        stem = f"{args.command}-{sc.digest()}"
        if getattr(args, "model", None):
            stem += f"-{args.model}"
        out.add(f"# {args.command} scenario {sc.digest()} ({path or 'built-in default'})")
        command(sc, args, out, stem)
    except ConfigError as exc:
        out.add(f"config error: {exc}")
        out.code = EXIT_CONFIG
        return out
    except ValueError as exc:
        out.add(f"invalid input: {exc}")
        out.code = EXIT_CONFIG
        return out
    except CriterionFailedError as exc:
        out.add(f"criterion failed: {exc}")
        out.code = EXIT_CRITERION
        return out
    except NumericalError as exc:
        out.add(f"numerical failure: {exc}")
        out.code = EXIT_NUMERICAL
        return out
    report = args.out / f"{stem}.txt"
    report.write_text("\n".join(out.lines) + "\n")
    out.files.insert(0, report)
    return out


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.sweep < 1:
        print("--sweep must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    args.out.mkdir(parents=True, exist_ok=True)
    command = COMMANDS[args.command]
    paths = args.config or [None]
    with ThreadPoolExecutor(max_workers=args.sweep) as pool:
        outcomes = list(pool.map(lambda p: _run_one(command, p, args), paths))
    for o in outcomes:
        stream = sys.stdout if o.code == EXIT_OK else sys.stderr
        print("\n".join(o.lines), file=stream)
        for f in o.files:
            print(f"wrote {f}", file=stream)
    return max(o.code for o in outcomes)


if __name__ == "__main__":
    sys.exit(main())
