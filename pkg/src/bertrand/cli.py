"""Command-line entry point.

Subcommands: classify, info, orbit, period, closure, check, unfold.
Every subcommand accepts ``--config FILE`` (JSON keyed by flag names);
flags given on the command line win over the file.  Exit codes: 0 ok,
1 usage error, 2 domain or constraint error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import os
import sys

import numpy as np

from . import cone_atlas, dynamics, param_plane, surfaces
from .checker import RhoFamily, biquadratic_roots, classify_rho, closing_psi
from .errors import DomainError, NumericalFailure
from .potentials import Potential, circular_momentum
from .surfaces import FirstTypeSpec, SurfaceSpec


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- JSON with 17 significant digits ---


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "null"
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "to_json"):
        return _encode(obj.to_json())
    if hasattr(obj, "value"):
        return _encode(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj)


def _emit(obj, args) -> None:
    text = dumps(obj) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


# --- user expressions ---

_SAFE = {name: getattr(np, name) for name in (
    "sin", "cos", "tan", "sinh", "cosh", "tanh", "arcsin", "arccos", "arctan", "arcsinh", "arccosh",
    "arctanh", "exp", "log", "log10", "sqrt", "abs", "sign", "pi", "e")}


def compile_expression(text: str, var: str):
    """Compile an arithmetic expression in one variable over a whitelisted numpy namespace."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse expression {text!r}") from exc
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id not in _SAFE and node.id != var:
            raise UsageError(f"unknown name {node.id!r} in expression")
        if isinstance(node, (ast.Attribute, ast.Lambda, ast.Subscript, ast.ListComp, ast.DictComp,
                             ast.SetComp, ast.GeneratorExp, ast.Starred)):
            raise UsageError("expression uses a disallowed construct")
    code = compile(tree, "<expr>", "eval")

    def fn(x):
        return float(eval(code, {"__builtins__": {}}, {**_SAFE, var: x}))

    return fn


# --- builders ---


def _load_json(path: str) -> dict:
    if not os.path.exists(path):
        raise UsageError(f"file not found: {path}")
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def surface_from_json(obj: dict):
    if "mu" in obj:
        return SurfaceSpec.from_json(obj)
    if "xi" in obj:
        return FirstTypeSpec.from_json(obj)
    raise UsageError("surface JSON needs either 'mu' (second type) or 'xi' (first type)")


def build_surface(args):
    if getattr(args, "surface", None):
        return surface_from_json(_load_json(args.surface))
    if getattr(args, "xi", None) is not None:
        xi, _ = _ratio(args.xi)
        return FirstTypeSpec(xi, args.c if args.c is not None else 0.0)
    if args.mu is None or args.c is None or args.d is None:
        raise UsageError("give --surface FILE, --xi, or all of --mu --c --d")
    mu, _ = _ratio(args.mu)
    return SurfaceSpec(mu, args.c, args.d, k=args.k, r0=args.r0, eta=args.eta)


def _ratio(text):
    from .numerics import parse_ratio
    try:
        return parse_ratio(text)
    except DomainError as exc:
        raise UsageError(f"bad number {text!r}") from exc


def build_potential(args, s):
    spec = getattr(args, "potential", None)
    if spec is None or spec == "none":
        return None
    if spec in ("grav", "osc", "1", "2"):
        p = Potential.from_json({"kind": spec, "A": args.A, "B": args.B})
    elif spec.startswith("r:"):
        return dynamics.CentralField(V_r=compile_expression(spec[2:], "r"))
    elif spec.startswith("theta:"):
        return dynamics.CentralField.from_theta(s, compile_expression(spec[6:], "theta"))
    else:
        obj = _load_json(spec)
        if args.A is not None:
            obj["A"] = args.A
        if args.B != 0.0:
            obj["B"] = args.B
        p = Potential.from_json(obj)
    return p


def _field(s, V):
    return dynamics.as_field(s, V)


# --- subcommands ---


def cmd_classify(args):
    p = param_plane.ParamPoint(args.c, args.d)
    region = param_plane.classify(p)
    sys.stdout.write(region.value + "\n")
    out = {"region": region.value, "c": p.c, "d": p.d, "delta": p.delta,
           "branches": [{"k": b.k, "theta": [b.theta_min, b.theta_max], "r_image": list(b.r_image)}
                        for b in param_plane.branch_intervals(p)]}
    if region is not param_plane.RegionTag.ORIGIN:
        aux = param_plane.aux_roots(p)
        out["aux"] = {"x": aux.x, "y": aux.y, "family": aux.family}
    _emit(out, args)


def cmd_info(args):
    s = build_surface(args)
    lo, hi = surfaces.curvature_range(s)
    out = {"surface": s.to_json(), "chart": list(s.chart), "curvature_range": [lo, hi],
           "realizable": surfaces.realizable_in_R3(s), "pole_is_upper": s.pole_is_upper()}
    if isinstance(s, SurfaceSpec):
        out["region"] = s.region.value
        out["branch"] = {"k": s.branch.k, "theta": [s.branch.theta_min, s.branch.theta_max]}
    frac = getattr(s, "mu_fraction", None)
    out["mu_fraction"] = None if frac is None else str(frac)
    _emit(out, args)


def cmd_orbit(args):
    s = build_surface(args)
    V = build_potential(args, s)
    field_ = _field(s, V)
    K = args.K
    if K is None:
        if args.potential in (None, "none") or args.theta_chart:
            raise UsageError("--K is required")
        K = circular_momentum(s, V, args.r)[0]
    pr = args.pr
    if pr is None:
        if args.E is None:
            pr = 0.0
        elif args.theta_chart:
            th = args.r
            q = s.q(th)
            gap = args.E - 0.5 * K * K * s.mu**2 * q - field_.V_theta(th)
            if gap < 0:
                raise DomainError("E is below the effective potential at the start")
            pr = q * math.sqrt(2 * gap)
        else:
            U = field_.V(args.r) + 0.5 * K * K / s.f(args.r) ** 2
            if args.E < U:
                raise DomainError("E is below the effective potential at the start")
            pr = math.sqrt(2 * (args.E - U))
    init = dynamics.OrbitState(0.0, args.r, pr, args.phi)
    run = dynamics.integrate_theta_chart if args.theta_chart else dynamics.integrate
    traj = run(s, field_, init, K, args.t_max, args.tol)
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            traj.to_csv(fh)
    _emit({"status": traj.status, "chart": traj.chart, "steps": int(len(traj.t)), "K": K,
           "E0": float(traj.E[0]), "energy_drift": traj.energy_drift(),
           "minima_phi": list(traj.minima_phi), "advances": list(dynamics.pericenter_advance(traj))}, args)


def cmd_period(args):
    s = build_surface(args)
    V = build_potential(args, s)
    if args.E is None or args.K is None:
        raise UsageError("--E and --K are required")
    rep = dynamics.apsidal_angle(s, _field(s, V), args.E, args.K, r_guess=args.r_guess)
    _emit(rep.to_json(), args)


def cmd_closure(args):
    s = build_surface(args)
    V = build_potential(args, s)
    field_ = _field(s, V)
    sweep = None
    if args.sweep:
        sweep = [tuple(item) for item in _load_json(args.sweep)]
    v = dynamics.closure_test(s, field_, sweep=sweep, tol=args.closure_tol, n_E=args.n_E, n_K=args.n_K)
    out = v.to_json()
    if not args.samples:
        out.pop("samples")
        out["n_samples"] = len(v.samples)
    _emit(out, args)


def cmd_check(args):
    if args.rho:
        if args.a is None or args.b is None:
            raise UsageError("--rho needs --a and --b")
        fam = RhoFamily(compile_expression(args.rho, "z"), args.a, args.b)
        s = None
    else:
        s = build_surface(args)
        fam = RhoFamily.from_surface(s)
    v = classify_rho(fam)
    out = v.to_json()
    out["closing_psi"] = [{"i": f.index, "form": f.label} for f in closing_psi(v)]
    if s is not None and args.biquadratic:
        lo, hi = s.chart
        if not math.isfinite(lo):
            lo = hi - 2.0
        if not math.isfinite(hi):
            hi = lo + 2.0
        rs = np.linspace(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo), 9)
        rep = biquadratic_roots(s.f, rs)
        out["biquadratic"] = {"constant_beta": rep.constant_roots(), "spreads": list(rep.spreads())}
    _emit(out, args)


def cmd_unfold(args):
    if args.xi is None:
        raise UsageError("--xi is required")
    val, frac = _ratio(args.xi)
    cone = cone_atlas.ConeSpec(val, frac)
    kind = {"grav": 1, "osc": 2, "1": 1, "2": 2}.get(args.potential or "grav")
    if kind is None:
        raise UsageError("unfold takes --potential grav or osc")
    s = cone.surface()
    K = args.K
    if K is None:
        K = circular_momentum(s, Potential(kind), 1.0)[0]
    E = args.E
    if E is None:
        from .potentials import effective_potential
        E0 = effective_potential(s, Potential(kind), K, 1.0)
        E = E0 + 0.2 * abs(E0)
    demo = cone_atlas.closure_demo(cone, kind, E, K)
    if args.svg:
        with open(args.svg, "w", newline="\n") as fh:
            fh.write(cone_atlas.to_svg(demo.points, cone))
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            cone_atlas.to_csv(demo.points, fh)
    _emit({"cone": cone.to_json(), "covering": cone_atlas.covering_order(cone).to_json(), "E": E, "K": K,
           "Phi": demo.Phi, "phi_span": demo.phi_span, "gap": demo.gap, "closed": demo.closed,
           "verdict": demo.verdict, "points": len(demo.points)}, args)


# --- parser ---


def _surface_flags(p):
    p.add_argument("--surface", help="surface JSON file")
    p.add_argument("--mu", help="second-type parameter (accepts p/q)")
    p.add_argument("--c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--r0", type=float, default=0.0)
    p.add_argument("--eta", type=int, default=1, choices=[1, -1])
    p.add_argument("--xi", help="first-type parameter (accepts p/q)")


def _potential_flags(p):
    p.add_argument("--potential", help="grav | osc | none | JSON file | r:EXPR | theta:EXPR")
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float, default=0.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="bertrand", description="Closed orbits on surfaces of revolution")
    sub = parser.add_subparsers(dest="cmd", parser_class=_Parser)
    subs = {}

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--out", help="also write the JSON report here")
        p.set_defaults(fn=fn)
        subs[name] = p
        return p

    p = add("classify", cmd_classify, "region of (c, d)")
    p.add_argument("--c", type=float, required=False)
    p.add_argument("--d", type=float, required=False)

    p = add("info", cmd_info, "surface summary")
    _surface_flags(p)

    p = add("orbit", cmd_orbit, "integrate one orbit")
    _surface_flags(p)
    _potential_flags(p)
    p.add_argument("--r", type=float, required=False, help="start r (theta with --theta-chart)")
    p.add_argument("--pr", type=float, help="start radial velocity")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--K", type=float)
    p.add_argument("--E", type=float)
    p.add_argument("--t-max", dest="t_max", type=float, default=50.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--theta-chart", dest="theta_chart", action="store_true")
    p.add_argument("--csv")

    p = add("period", cmd_period, "apsidal angle by quadrature")
    _surface_flags(p)
    _potential_flags(p)
    p.add_argument("--E", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--r-guess", dest="r_guess", type=float)

    p = add("closure", cmd_closure, "closure verdict over an (E, K) sweep")
    _surface_flags(p)
    _potential_flags(p)
    p.add_argument("--sweep", help="JSON list of [E, K] pairs")
    p.add_argument("--closure-tol", dest="closure_tol", type=float, default=1e-6)
    p.add_argument("--n-E", dest="n_E", type=int, default=20)
    p.add_argument("--n-K", dest="n_K", type=int, default=5)
    p.add_argument("--samples", action="store_true")

    p = add("check", cmd_check, "closure case of rho")
    _surface_flags(p)
    p.add_argument("--rho", help="expression in z")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--biquadratic", action="store_true")

    p = add("unfold", cmd_unfold, "develop a cone orbit onto the plane")
    p.add_argument("--xi")
    p.add_argument("--potential", default="grav")
    p.add_argument("--E", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--svg")
    p.add_argument("--csv")

    parser._subs = subs
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.cmd is None:
        raise UsageError("a subcommand is required")
    if args.config:
        cfg = _load_json(args.config)
        sp = parser._subs[args.cmd]
        known = {a.dest for a in sp._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _check_tolerances(args):
    for name in ("tol", "closure_tol"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        _check_tolerances(args)
        if args.cmd == "classify" and (args.c is None or args.d is None):
            raise UsageError("classify needs --c and --d")
        if args.cmd == "orbit" and args.r is None:
            raise UsageError("orbit needs --r")
        args.fn(args)
        return 0
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
