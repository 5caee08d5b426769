"""Command-line surface for the stability toolkit.

Subcommands:
  classify        shoot a boundary-value problem and print its verdict
  oracle          conjugate-point count plus finite-difference cross-check
  rod enumerate   census of the curved-rod equilibria at (M, v)
  rod curves      family length curves over a pseudo-energy grid (CSV)

Exit codes: 0 stable, 1 unstable, 2 inconclusive or degenerate, 3 usage
error, 4 numerical failure. JSON output is deterministic: insertion-ordered
keys and floats at 12 significant digits; CSV floats carry 15.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np
from scipy.interpolate import CubicSpline

from . import conjugate, rod
from .classify import classify_dirichlet, classify_neumann
from .errors import NoBracket, VarstabError
from .phase import Dirichlet, Neumann, ProblemSpec, shoot_dirichlet, shoot_neumann
from .potential import make_builtin

EXIT_STABLE = 0
EXIT_UNSTABLE = 1
EXIT_OPEN = 2          # inconclusive or degenerate
EXIT_USAGE = 3
EXIT_NUMERIC = 4

_VERDICT_EXIT = {"stable": EXIT_STABLE, "unstable": EXIT_UNSTABLE,
                 "inconclusive": EXIT_OPEN, "degenerate": EXIT_OPEN}

DEFAULT_INTEGRATOR_TOL = 1e-10
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_BAND = 1e-6
SCAN_NODES = 256


def render_json(obj) -> str:
    """Deterministic JSON: dict order preserved, floats at 12 sig digits."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return f"{x:.12g}" if math.isfinite(x) else "null"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(render_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {render_json(v)}"
                          for k, v in obj.items())
        return "{" + items + "}"
    raise TypeError(f"cannot render {type(obj).__name__} as JSON")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    pass


def _parse_kv(text: str, expected: tuple) -> dict:
    out = {}
    for tok in text.split(","):
        key, eq, val = tok.partition("=")
        key = key.strip()
        if not eq or key not in expected:
            raise _UsageError(f"expected {'/'.join(expected)}=value, got {tok!r}")
        out[key] = float(val)
    missing = [k for k in expected if k not in out]
    if missing:
        raise _UsageError(f"missing {missing[0]}= in {text!r}")
    return out


def _parse_pair(text: str, what: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise _UsageError(f"{what} must look like lo:hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise _UsageError(f"{what} must be numeric lo:hi, got {text!r}") from None
    return lo, hi


def _parse_value(raw: str):
    if ";" in raw:
        return [float(x) for x in raw.split(";") if x != ""]
    return float(raw)


def _parse_potential(args):
    if getattr(args, "potential_json", None):
        with open(args.potential_json) as fh:
            blob = json.load(fh)
        return make_builtin(blob["family"], blob.get("params", {}))
    if not args.potential:
        raise _UsageError("choose a potential with --potential or --potential-json")
    family, _, rest = args.potential.partition(":")
    params = {}
    if rest:
        for tok in rest.split(","):
            key, eq, val = tok.partition("=")
            if not eq:
                raise _UsageError(f"potential params must be key=value, got {tok!r}")
            try:
                params[key.strip()] = _parse_value(val)
            except ValueError:
                raise _UsageError(f"bad numeric value in {tok!r}") from None
    return make_builtin(family, params)


def _grid_bracket(res, lo: float, hi: float, n: int = SCAN_NODES):
    """First sign-change cell of the shooting residual on a uniform grid."""
    xs = np.linspace(lo, hi, n)
    prev_x, prev_r = xs[0], res(xs[0])
    if prev_r == 0.0:
        return prev_x, prev_x
    for x in xs[1:]:
        r = res(x)
        if r == 0.0:
            return x, x
        if r * prev_r < 0:
            return prev_x, x
        prev_x, prev_r = x, r
    raise NoBracket(f"no residual sign change on the {n}-point scan of "
                    f"[{lo:g}, {hi:g}]; pass --guess or --bracket")


def _shoot_problem(args, pot):
    a, b = _parse_pair(args.interval, "--interval")
    itol, rtol = args.integrator_tol, args.root_tol
    if args.dirichlet is not None and args.neumann is not None:
        raise _UsageError("--dirichlet and --neumann are mutually exclusive")
    if args.dirichlet is not None:
        kv = _parse_kv(args.dirichlet, ("Ta", "Tb"))
        spec = ProblemSpec(pot, a, b, Dirichlet(kv["Ta"], kv["Tb"]))
        guess = _choose_guess(args, spec, dirichlet=True)
        return shoot_dirichlet(spec, guess, integrator_tol=itol,
                               tol_root=rtol), "dirichlet"
    if args.neumann is not None:
        kv = _parse_kv(args.neumann, ("A",))
        spec = ProblemSpec(pot, a, b, Neumann(kv["A"]))
        guess = _choose_guess(args, spec, dirichlet=False)
        return shoot_neumann(spec, guess, integrator_tol=itol,
                             tol_root=rtol), "neumann"
    raise _UsageError("choose a boundary condition: --dirichlet or --neumann")


def _choose_guess(args, spec, dirichlet: bool):
    if args.bracket is not None:
        return _parse_pair(args.bracket, "--bracket")
    if args.guess is not None:
        return args.guess
    # no guidance: scan a default window for the first residual sign change
    from .phase import _endpoint_state
    pot = spec.potential

    if dirichlet:
        bc = spec.bc
        th = np.linspace(min(bc.T_a, bc.T_b) - 2 * np.pi,
                         max(bc.T_a, bc.T_b) + 2 * np.pi, 512)
        vrange = float(np.ptp(np.asarray(pot.v(th), dtype=float)))
        p_max = np.sqrt(2.0 * vrange) + 4.0 * abs(bc.T_b - bc.T_a) / (spec.b - spec.a) + 1.0

        def res(p0):
            th_end, _ = _endpoint_state(pot, bc.T_a, p0, spec.a, spec.b, 1e-8)
            return th_end - bc.T_b

        return _grid_bracket(res, -p_max, p_max)

    A = spec.bc.A

    def res(theta0):
        _, p_end = _endpoint_state(pot, theta0, A, spec.a, spec.b, 1e-8)
        return p_end - A

    return _grid_bracket(res, -2.0 * np.pi, 2.0 * np.pi)


def _emit(text: str, path: str | None) -> None:
    print(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_classify(args) -> int:
    pot = _parse_potential(args)
    traj, kind = _shoot_problem(args, pot)
    if kind == "dirichlet":
        verdict = classify_dirichlet(traj, pot, band=args.band)
    else:
        verdict = classify_neumann(traj, pot, band=args.band)
    if args.profile_csv:
        traj.export_csv(args.profile_csv)
    _emit(render_json(verdict.to_json_dict()), args.json_out)
    return _VERDICT_EXIT[verdict.verdict]


def _parse_f(arg: str):
    kind, _, rest = arg.partition(":")
    if kind == "const":
        try:
            c = float(rest)
        except ValueError:
            raise _UsageError(f"--f const needs a number, got {rest!r}") from None
        return lambda s: c
    if kind == "table":
        rows = []
        with open(rest) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                try:
                    rows.append((float(parts[0]), float(parts[1])))
                except (ValueError, IndexError):
                    if not rows:
                        continue            # header line
                    raise _UsageError(f"bad table row {line!r}") from None
        if len(rows) < 4:
            raise _UsageError("--f table needs at least 4 s,f rows")
        s, f = map(np.asarray, zip(*rows))
        return CubicSpline(s, f)
    raise _UsageError(f"--f must be const:VALUE or table:PATH, got {arg!r}")


def cmd_oracle(args) -> int:
    a, b = _parse_pair(args.interval, "--interval")
    if args.f is not None:
        problem = conjugate.SLProblem(_parse_f(args.f), a, b, args.bc)
    else:
        pot = _parse_potential(args)
        traj, kind = _shoot_problem(args, pot)
        problem = conjugate.from_trajectory(traj, kind, pot)
    verdict, rep = conjugate.oracle_verdict(problem)
    fd = conjugate.fd_negative_count(problem)
    out = {"bc": problem.bc, "a": problem.a, "b": problem.b,
           "points": list(rep.points), "signs": list(rep.signs_at_points),
           "index": rep.index, "b_is_conjugate": rep.b_is_conjugate,
           "fd_negatives": fd, "verdict": verdict}
    _emit(render_json(out), args.json_out)
    return _VERDICT_EXIT[verdict]


def _worker_count(args) -> int | None:
    cap = os.environ.get("VARSTAB_THREADS")
    workers = args.workers
    if cap is not None:
        try:
            cap_n = max(1, int(cap))
        except ValueError:
            raise _UsageError(f"VARSTAB_THREADS must be an integer, got {cap!r}") from None
        workers = cap_n if workers is None else min(workers, cap_n)
    return workers


def cmd_rod_enumerate(args) -> int:
    params = rod.RodParams(args.M, args.v)
    eqs = rod.enumerate_equilibria(params, workers=_worker_count(args))
    rows = [q.to_json_dict() for q in eqs]
    n_stable = sum(1 for q in eqs if q.verdict.verdict == "stable")
    out = {"M": params.M, "v": params.v, "count": len(eqs),
           "stable": n_stable, "unstable": len(eqs) - n_stable,
           "equilibria": rows}
    _emit(render_json(out), args.json_out)
    return 0


def cmd_rod_curves(args) -> int:
    if args.grid is not None:
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise _UsageError(f"--grid must be lo:hi:n, got {args.grid!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise _UsageError(f"bad --grid {args.grid!r}") from None
        e_grid = np.linspace(lo, hi, n)
    elif args.emax_grid is not None:
        e_grid = rod._default_e_grid(args.v, args.emax_grid)
    else:
        e_grid = None
    table = rod.fig8_curves(args.v, e_grid, k_max=args.k_max)
    if args.out:
        table.to_csv(args.out)
    else:
        table.to_csv(sys.stdout)
    return 0


def _add_problem_flags(p):
    p.add_argument("--potential", help="family:key=val,... e.g. pendulum:M=81")
    p.add_argument("--potential-json", help="JSON file {family, params}")
    p.add_argument("--interval", default="0:1", help="a:b (default 0:1)")
    p.add_argument("--dirichlet", metavar="Ta=..,Tb=..",
                   help="fixed-end values theta(a), theta(b)")
    p.add_argument("--neumann", metavar="A=..",
                   help="natural-end slope theta'(a)=theta'(b)=A")
    p.add_argument("--guess-theta0", "--guess-p0", dest="guess", type=float,
                   help="starting point for the shooting parameter")
    p.add_argument("--bracket", help="lo:hi bracket for the shooting parameter")
    p.add_argument("--integrator-tol", type=float, default=DEFAULT_INTEGRATOR_TOL)
    p.add_argument("--root-tol", type=float, default=DEFAULT_ROOT_TOL)
    p.add_argument("--json-out", help="also write the JSON report here")


def build_parser() -> _Parser:
    top = _Parser(prog="varstab",
                  description="Stability of stationary curves via phase-plane "
                              "indices, with a Sturm-Liouville cross-check.")
    sub = top.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("classify", help="classify a BVP solution")
    _add_problem_flags(pc)
    pc.add_argument("--band", type=float, default=DEFAULT_BAND,
                    help="marginal half-width for alpha/beta (default 1e-6)")
    pc.add_argument("--profile-csv", help="write the s,theta,p profile here")
    pc.set_defaults(func=cmd_classify)

    po = sub.add_parser("oracle", help="conjugate-point count and FD check")
    _add_problem_flags(po)
    po.add_argument("--f", help="coefficient: const:VALUE or table:PATH")
    po.add_argument("--bc", choices=("dirichlet", "neumann"),
                    default="dirichlet", help="end condition for --f runs")
    po.set_defaults(func=cmd_oracle)

    pr = sub.add_parser("rod", help="curved-rod application")
    rsub = pr.add_subparsers(dest="rod_command", required=True)

    pe = rsub.add_parser("enumerate", help="census of equilibria")
    pe.add_argument("--M", type=float, required=True)
    pe.add_argument("--v", type=float, required=True)
    pe.add_argument("--workers", type=int, default=None,
                    help="thread count (capped by VARSTAB_THREADS)")
    pe.add_argument("--json-out")
    pe.set_defaults(func=cmd_rod_enumerate)

    pv = rsub.add_parser("curves", help="length-curve table as CSV")
    pv.add_argument("--v", type=float, required=True)
    pv.add_argument("--emax-grid", type=int, default=None,
                    help="node count of the default pseudo-energy grid")
    pv.add_argument("--grid", help="explicit lo:hi:n pseudo-energy grid")
    pv.add_argument("--k-max", type=int, default=3)
    pv.add_argument("--out", help="CSV path (default stdout)")
    pv.set_defaults(func=cmd_rod_curves)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"varstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VarstabError as exc:
        print(f"varstab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # downstream closed the pipe (e.g. | head); not our error
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_STABLE


if __name__ == "__main__":
    sys.exit(main())
