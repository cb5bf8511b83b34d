"""Command-line interface: simulate, verify, backlund, elastica, quadric.

Curves are read from curve JSON files or from bundled fixtures named
``fixture:<stem>`` (octagon_plane, octagon_lift, random8, toda6,
elastica_chain).  Reports go to stdout as JSON; files go to ``--output``.
"""

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import backlund, euclidean, fixtures, toda
from .catalog import curve_kind, parse_flow
from .curve_core import CurveC2, PlaneCurve, det2
from .curve_io import load_fixture, load_parameters, read_curve, write_curve, write_svg
from .errors import CurveError, PeriodicityObstruction
from .flows import integrate, observable_names, write_trajectory_csv
from .verify import ELASTICA_WINDOW, SUITES, run_suite, seeded_quadric


def parse_complex(text):
    """Parse ``re`` or ``re,im``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"expected re or re,im, got {text!r}")


def parse_point(text):
    """Parse ``x,y`` (real) or ``re_x,im_x,re_y,im_y``."""
    vals = [float(p) for p in text.split(",")]
    if len(vals) == 2:
        return np.array(vals, dtype=complex)
    if len(vals) == 4:
        return np.array([vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]])
    raise argparse.ArgumentTypeError(f"expected x,y or re_x,im_x,re_y,im_y, got {text!r}")


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def load_curve(source):
    """Curve and meta from a path or ``fixture:<stem>``."""
    if source.startswith("fixture:"):
        return load_fixture(source.split(":", 1)[1])
    return read_curve(source)


def _out_dir(args):
    if args.output is None:
        return None
    path = Path(args.output)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _num(x):
    """JSON-friendly number: real floats stay floats, complex become [re, im]."""
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return float(x)


def _emit(report):
    print(json.dumps(report, indent=1, sort_keys=True))


def _max(x):
    x = np.abs(np.asarray(x))
    x = x[np.isfinite(x)]
    return float(x.max()) if x.size else 0.0


# simulate


def _default_curve(flow, seed):
    if flow == "mkdv":
        if seed is None:
            return load_fixture("elastica_chain")
        return fixtures.random_closed_arclength_polygon(12, seed=seed), {}
    if flow.startswith("toda"):
        if seed is None:
            return load_fixture("toda6")
        return fixtures.random_curve(6, seed=seed, scale=2.0), {}
    if seed is None:
        return load_fixture("random8")
    return fixtures.random_arclength_curve(8, seed=seed), {}


def _snapshots(traj, count):
    idx = np.unique(np.linspace(0, len(traj.states) - 1, max(count, 1)).round().astype(int))
    return [traj.states[i] for i in idx]


def run_simulate(args):
    if args.input:
        curve, meta = load_curve(args.input)
    else:
        curve, meta = _default_curve(args.flow, args.seed)
    kind = curve_kind(curve)
    field = parse_flow(args.flow, kind, args.lam)
    observables = args.observables.split(",") if args.observables else None
    if observables:
        unknown = [o for o in observables if o not in observable_names(curve)]
        if unknown:
            raise ValueError(f"unknown observables {unknown}; choose from {observable_names(curve)}")
    traj = integrate(curve, field, args.dt, args.steps)
    final = traj.states[-1]
    report = {
        "command": "simulate",
        "flow": args.flow,
        "kind": kind,
        "N": len(curve),
        "periodic": curve.periodic,
        "dt": args.dt,
        "steps": args.steps,
        "t_final": float(traj.times[-1]),
    }
    if kind == "c2":
        if not args.flow.startswith("toda"):
            report["max_abs_g_minus_1"] = max(_max(s.g - 1) for s in traj.states)
        else:
            n = int(args.flow.split(":")[1])
            check = toda.toda_consistency(n, curve, args.lam, args.dt, args.steps)
            worst = max(v for k, v in check.items() if k != "flow")
            report["lambda"] = _num(args.lam)
            report["verification"] = {**check, "bound": 1e-4, "pass": bool(worst <= 1e-4)}
    else:
        if curve.periodic:
            report["max_edge_deviation"] = max(_max(np.abs(s.edges) - 1) for s in traj.states)
        else:
            # clamped ends stretch their edges; see euclidean.OPEN_MARGIN
            m = euclidean.OPEN_MARGIN
            report["max_edge_deviation_interior"] = max(
                _max(np.abs(s.edges[m : len(s) - 1 - m]) - 1) for s in traj.states
            )
        if args.flow == "mkdv" and "a" in meta:
            w = ELASTICA_WINDOW if not curve.periodic else 0
            kappa = euclidean.curvature_values(final)
            kappa = kappa[w : len(kappa) - w] if w else kappa
            a_c = euclidean.invariance_constant(meta["a"])
            report["elastica_constraint_residual"] = euclidean.kappa_constraint_residual(
                kappa, a_c, curve.periodic
            )
    out = _out_dir(args)
    if out is not None:
        write_trajectory_csv(traj, out / "trajectory.csv", observables)
        write_curve(final, out / "final.json", meta or None)
        report["files"] = ["trajectory.csv", "final.json"]
        if kind == "plane":
            write_svg(_snapshots(traj, args.snapshots), out / "snapshots.svg")
            report["files"].append("snapshots.svg")
    _emit(report)
    return 0


# verify


def run_verify(args):
    curve = load_curve(args.input)[0] if args.input else None
    report = run_suite(
        args.suite,
        curve=curve,
        flow=args.flow,
        mu=args.mu,
        lam=args.lam,
        dt=args.dt,
        steps=args.steps,
    ).as_dict()
    report["command"] = "verify"
    out = _out_dir(args)
    if out is not None:
        (out / "verify.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    _emit(report)
    return 0 if report["passed"] else 1


# backlund


def _generation_report(curve, transformed, mu):
    entry = {"periodic": transformed.periodic, "N": len(transformed)}
    if curve.periodic and transformed.periodic:
        s = backlund.s_sequence(curve, transformed)
        q1, q2 = backlund.qevol_residuals(curve.Q, transformed.Q, s, mu)
        d1, d2 = backlund.discrete_volterra_check(curve.Q, transformed.Q, s, mu)
        entry.update(qevol_residuals=[q1, q2], ddvolterra_residuals=[d1, d2])
    entry["quad_cross_ratio_residual"] = _max(backlund.quad_cross_ratios(curve, transformed) - mu)
    return entry


def run_backlund(args):
    curve, _ = load_curve(args.input) if args.input else load_fixture("random8")
    if not isinstance(curve, CurveC2):
        raise ValueError("backlund needs a lifted (c2) curve")
    gens = [curve]
    report = {"command": "backlund", "mu": _num(args.mu), "initial": args.initial, "generations": []}
    for _ in range(args.steps):
        prev = gens[-1]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", PeriodicityObstruction)
            if args.initial.startswith("fixpoint:"):
                which = int(args.initial.split(":")[1])
                if which not in (0, 1):
                    raise ValueError("--initial fixpoint index must be 0 or 1")
                if not prev.periodic:
                    raise ValueError("fixed-point seeds need a closed curve")
                nxt = backlund.periodic_transform(prev, args.mu, which)
            else:
                params = backlund.BacklundParams(args.mu, parse_point(args.initial))
                nxt = backlund.backlund_transform(prev, params)
        entry = _generation_report(prev, nxt, args.mu)
        if caught:
            entry["warning"] = str(caught[0].message)
        report["generations"].append(entry)
        gens.append(nxt)
    out = _out_dir(args)
    if out is not None:
        for i, g in enumerate(gens):
            write_curve(g, out / f"gen_{i:03d}.json")
        write_svg(gens, out / "backlund.svg")
        report["files"] = [f"gen_{i:03d}.json" for i in range(len(gens))] + ["backlund.svg"]
    _emit(report)
    return 0


# elastica


def run_elastica(args):
    params = dict(load_parameters("elastica_sets")[args.set])
    for key in ("a", "b", "c0", "kappa0", "kappa1", "n"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    kappa, curve = euclidean.elastica_generate(
        params["kappa0"], params["kappa1"], params["a"], params["b"], params["c0"], int(params["n"])
    )
    report = {
        "command": "elastica",
        "parameters": params,
        "recursion_residual": euclidean.elastica_recursion_residual(
            kappa, params["a"], params["b"], params["c0"]
        ),
        "max_abs_kappa": _max(kappa),
        "max_edge_deviation": _max(np.abs(curve.edges) - 1),
    }
    if params["b"] == 0 and params["c0"] == 0:
        report["constraint_residual"] = euclidean.elastica_invariance_residual(kappa, params["a"])
    out = _out_dir(args)
    if out is not None:
        write_curve(curve, out / "elastica.json", params)
        write_svg([curve], out / "elastica.svg")
        report["files"] = ["elastica.json", "elastica.svg"]
    _emit(report)
    return 0


# quadric


def run_quadric(args):
    if args.u is None and args.g is None and args.gamma0 is None and args.gamma1 is None:
        curve, quad = seeded_quadric()
        if args.n is not None:
            p = curve.points
            curve = toda.quadric_curve(p[0], p[1], quad.u, quad.g, args.n)
    else:
        seed = load_parameters("quadric_seed")
        g0 = args.gamma0 if args.gamma0 is not None else parse_point(",".join(map(str, seed["gamma0"])))
        g1 = args.gamma1 if args.gamma1 is not None else parse_point(",".join(map(str, seed["gamma1"])))
        g = complex(det2(g0, g1))
        if args.g is not None and abs(args.g - g) > 1e-12 * max(1.0, abs(g)):
            g1 = g1 * (args.g / g)
            g = args.g
        u = args.u if args.u is not None else complex(*seed["u"])
        n = args.n if args.n is not None else seed["n"]
        curve = toda.quadric_curve(g0, g1, u, g, n)
        quad = toda.quadric_matrix(g0, g1, u)
    r1, r2 = toda.quadric_identity_residuals(curve, quad)
    report = {
        "command": "quadric",
        "N": len(curve),
        "u": _num(quad.u),
        "g": _num(quad.g),
        "M": [[_num(x) for x in row] for row in quad.M],
        "det_M": _num(quad.det()),
        "identity_residuals": [r1, r2],
        "tangency_residual": toda.quadric_tangency_residual(curve, quad, 1.0),
    }
    out = _out_dir(args)
    if out is not None:
        write_curve(curve, out / "quadric.json")
        # a real lift lies on the conic <M gamma, gamma> = 1 itself
        p = curve.points
        write_svg([PlaneCurve(p[:, 0] + 1j * p[:, 1], periodic=False)], out / "quadric.svg")
        report["files"] = ["quadric.json", "quadric.svg"]
    _emit(report)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="todacurves", description="Integrable flows on discrete curves."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", help="curve JSON path or fixture:<name>")
        p.add_argument("--output", help="directory for written files")
        p.add_argument("--dt", type=_positive_float, default=1e-3)
        p.add_argument("--lambda", dest="lam", type=parse_complex, default=0j, help="re,im")

    p = sub.add_parser("simulate", help="integrate a named flow")
    common(p)
    p.add_argument("--flow", default="tangential", help="tangential, volterra2, hierarchy:<n>, toda:1|2|3, mkdv")
    p.add_argument("--steps", type=_positive_int, default=100)
    p.add_argument("--observables", help="comma-separated CSV observables")
    p.add_argument("--seed", type=int, help="random test curve instead of the bundled fixture")
    p.add_argument("--snapshots", type=_positive_int, default=5, help="SVG snapshots of plane curves")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("verify", help="run the residual battery")
    common(p)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--flow", help="restrict the compat suite to one flow")
    p.add_argument("--mu", type=parse_complex, default=1.2 + 0j, help="re,im")
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("backlund", help="iterate Backlund transforms")
    p.add_argument("--input", help="curve JSON path or fixture:<name>")
    p.add_argument("--output", help="directory for written files")
    p.add_argument("--mu", type=parse_complex, default=1.2 + 0j, help="re,im")
    p.add_argument("--initial", default="fixpoint:0", help='"fixpoint:0", "fixpoint:1" or a point x,y')
    p.add_argument("--steps", type=_positive_int, default=1, help="number of generations")
    p.set_defaults(func=run_backlund)

    p = sub.add_parser("elastica", help="generate a discrete elastica")
    p.add_argument("--output", help="directory for written files")
    p.add_argument("--set", default="elastic", help="bundled parameter set")
    for name in ("a", "b", "c0", "kappa0", "kappa1"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--n", type=_positive_int)
    p.set_defaults(func=run_elastica)

    p = sub.add_parser("quadric", help="generate a discrete quadric")
    p.add_argument("--output", help="directory for written files")
    p.add_argument("--u", type=parse_complex)
    p.add_argument("--g", type=parse_complex)
    p.add_argument("--gamma0", type=parse_point)
    p.add_argument("--gamma1", type=parse_point)
    p.add_argument("--n", type=_positive_int)
    p.set_defaults(func=run_quadric)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CurveError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"todacurves {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
