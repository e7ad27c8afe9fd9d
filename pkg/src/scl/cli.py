"""The ``scl`` command line."""

import os
import sys

# thread caps must be in place before numpy is first imported
if os.environ.get("SCL_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["SCL_THREADS"])

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import io, rotalg  # noqa: E402
from .errors import (  # noqa: E402
    NonConvergence,
    NonRegular,
    RefinementExceeded,
    ResidualTooLarge,
    SclError,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
SAMPLE_DEFAULTS = {"lift": 1024, "render": 1024}
NUMERIC_ERRORS = (NonConvergence, RefinementExceeded, ResidualTooLarge, NonRegular)


def _curve(arg):
    """A curve from a JSON file path or an inline JSON object."""
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    return io.parse_curve(text), json.loads(text)


def _emit(report, out):
    if out:
        io.write_json(report, out)
        print(f"wrote {out}")
    else:
        print(json.dumps(io.to_plain(report), sort_keys=True, indent=2))


def cmd_classify(args):
    from .classify import basepoint_visits, classify_component, is_flower, is_star, is_trefoil
    from .geomscan import scan

    curve, raw = _curve(args.curve)
    cls = classify_component(curve, args.samples)
    diag = scan(curve, args.samples)
    star = is_star(curve, diag)
    tref = is_trefoil(curve, diag)
    k = len(basepoint_visits(curve)) // 2
    try:
        flower = is_flower(curve, cls.endpoint_z * (-1) ** k, k)
        flower_json = {"accepted": flower[0], "witness": flower[1].to_json()}
    except SclError as exc:
        flower_json = {"accepted": False, "reason": str(exc)}
    results = {
        "endpoint": rotalg.to_json(cls.endpoint_z),
        "convex": cls.convex,
        "label": cls.label,
        "detectors": {
            "star": {"accepted": star[0], "k": star[1]},
            "trefoil": {"accepted": tref[0], "ts": list(tref[1:]) if tref[0] else None},
            "flower": flower_json,
        },
    }
    return io.make_report("classify", {"samples": args.samples}, results, raw)


def cmd_scan(args):
    from .geomscan import scan

    curve, raw = _curve(args.curve)
    diag = scan(curve, args.samples)
    return io.make_report("scan", {"samples": args.samples}, diag.to_json(), raw)


def cmd_lift(args):
    from .framelift import lift_curve, snap_endpoint

    curve, raw = _curve(args.curve)
    res = lift_curve(curve, args.samples)
    out = res.to_json()
    out["endpoint_snapped"] = rotalg.to_json(snap_endpoint(res.endpoint, res.frames[-1], args.tol))
    return io.make_report("lift", {"samples": args.samples, "tol": args.tol}, out, raw)


def cmd_graft(args):
    from .surgery import GraftPlan, graft, graft_bound

    curve, raw = _curve(args.curve)
    plan = graft_bound(curve, args.theta)
    if args.n != "auto":
        plan = GraftPlan(plan.theta, int(args.n), plan.C, plan.eps)
    g = graft(curve, plan)
    if args.curve_out:
        io.save_curve(g, args.curve_out)
    results = {"plan": plan.to_json(), "curve": g.to_json() if not args.curve_out else args.curve_out}
    return io.make_report("graft", {"theta": args.theta, "n": args.n}, results, raw)


def cmd_homotopy(args):
    from .render import render_frames
    from .surgery import graft_bound, push_loops_to_start, transfer_loops

    curve, raw = _curve(args.curve)
    plan = graft_bound(curve, args.theta)
    if args.mode == "push":
        path = push_loops_to_start(curve, plan, steps=args.steps, raise_on_failure=args.validate)
    else:
        n1 = args.n1 if args.n1 is not None else plan.n // 2
        path = transfer_loops(curve, plan, n1, plan.n - n1, form=args.form, steps=args.steps, raise_on_failure=args.validate)
    if args.frames:
        render_frames(path.curves, args.frames, stem=f"{args.mode}")
    params = {"mode": args.mode, "theta": args.theta, "steps": args.steps, "form": args.form}
    return io.make_report("homotopy", params, path.to_json(), raw)


def cmd_degree(args):
    from .degree import degree_f1_lift, degree_g1_f1

    if args.family == "f1-lift":
        rep = degree_f1_lift(grid=args.grid, count=not args.no_preimages)
        params = {"family": args.family, "grid": args.grid}
    else:
        rep, _ = degree_g1_f1(grid=args.grid, rho_bar=args.rho_bar, method=args.method)
        params = {"family": args.family, "grid": args.grid, "rho_bar": args.rho_bar, "method": args.method}
    if rep.residual > args.tol:
        raise ResidualTooLarge(f"residual {rep.residual:.3f} above {args.tol}")
    return io.make_report("degree", params, rep.to_json())


def cmd_render(args):
    from .geomscan import scan
    from .render import render_svg

    curve, _ = _curve(args.curve)
    diag = scan(curve, args.samples) if args.diagnostics else None
    svg = render_svg(curve, diag, projection=args.projection, axis=tuple(args.axis), n_samples=max(args.samples, 512))
    if args.out:
        Path(args.out).write_text(svg)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(svg)
    return None


def cmd_suite(args):
    from .suite import run_suite

    numbers = args.criteria or None
    results, derived = run_suite(numbers)
    passed = all(r.passed for r in results)
    report = io.make_report(
        "suite",
        {"criteria": [r.number for r in results], "seed": args.seed},
        {"passed": passed, "criteria": [r.to_json() for r in results]},
        derived=derived,
    )
    out = Path(args.out or "suite_out")
    io.write_json(report, out / "report.json")
    if derived:
        io.write_derived(derived, out / "derived.json")
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed; report in {out}")
    report["_exit"] = EXIT_OK if passed else EXIT_VALIDATION
    return report


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="sampling density (default depends on the command)")
    common.add_argument("--tol", type=float, default=None, help="snapping tolerance for lift, residual bound for degree")
    common.add_argument("--out", default=None, help="output file (or directory for suite)")
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="scl", description="Locally convex curves on the sphere", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="component, convexity and detectors")
    s.add_argument("--curve", required=True)
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("scan", parents=[common], help="curvature, double points, arcs, convexity")
    s.add_argument("--curve", required=True)
    s.set_defaults(fn=cmd_scan)

    s = sub.add_parser("lift", parents=[common], help="frame lift to the unit quaternions")
    s.add_argument("--curve", required=True)
    s.set_defaults(fn=cmd_lift)

    s = sub.add_parser("graft", parents=[common], help="graft loops with the computed plan")
    s.add_argument("--curve", required=True)
    s.add_argument("--theta", type=float, default=np.pi / 4)
    s.add_argument("--n", default="auto", help="number of loop pairs or 'auto'")
    s.add_argument("--curve-out", default=None, help="write the grafted curve JSON here")
    s.set_defaults(fn=cmd_graft)

    s = sub.add_parser("homotopy", parents=[common], help="loop pushing and loop transfer paths")
    s.add_argument("mode", choices=["push", "transfer"])
    s.add_argument("--curve", required=True)
    s.add_argument("--theta", type=float, default=np.pi / 4)
    s.add_argument("--steps", type=int, default=33)
    s.add_argument("--form", choices=["split", "shift"], default="split")
    s.add_argument("--n1", type=int, default=None)
    s.add_argument("--validate", action="store_true", help="fail (exit 2) on an invalid step")
    s.add_argument("--frames", default=None, help="directory for numbered SVG frames")
    s.set_defaults(fn=cmd_homotopy)

    s = sub.add_parser("degree", parents=[common], help="degrees of the two sphere families")
    s.add_argument("family", choices=["f1-lift", "g1-f1"])
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--rho-bar", type=float, default=0.05)
    s.add_argument("--method", choices=["simplicial", "quadrature"], default="simplicial")
    s.add_argument("--no-preimages", action="store_true")
    s.set_defaults(fn=cmd_degree)

    s = sub.add_parser("render", parents=[common], help="SVG drawing of a curve")
    s.add_argument("--curve", required=True)
    s.add_argument("--projection", choices=["orthographic", "stereographic"], default="orthographic")
    s.add_argument("--axis", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    s.add_argument("--diagnostics", action="store_true", help="mark double points")
    s.set_defaults(fn=cmd_render)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance criteria")
    s.add_argument("--criteria", type=int, nargs="*", default=None)
    s.set_defaults(fn=cmd_suite)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    if args.samples is None:
        args.samples = SAMPLE_DEFAULTS.get(args.command, 4096)
    if args.tol is None:
        args.tol = 0.1 if args.command == "degree" else 1e-6
    if args.command == "degree" and args.grid is None:
        args.grid = 64 if args.family == "f1-lift" else 256
    try:
        report = args.fn(args)
    except NUMERIC_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SclError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if report is None:
        return EXIT_OK
    code = report.pop("_exit", EXIT_OK)
    if args.command != "suite":
        _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
