"""Command-line front end.  Each command only parses, delegates and prints."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .classification import classify_covector, detect_cusps, detect_inflections
from .cut_time import SearchConfig, equioptimality_check, estimate_cut_time, shift_identity_check
from .flow import DEFAULT_STEP, Covector, integrate
from .group import AlgebraElement, GroupElement
from .isometry import OrbitSpec, classify_orbit_projection, homogeneity_sweep, homogeneity_test, orbit_point
from .svg import PlotSpec, projection_is_degenerate, render_svg

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

log = logging.getLogger("se2geodesics")


class CliIOError(Exception):
    pass


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliIOError(f"cannot write {path}: {exc}") from exc


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _covector(args) -> Covector:
    return Covector.natural(args.h1, args.h2, args.h3)


def _search_config(args) -> SearchConfig:
    base = dict(args.config_overrides)
    for f in fields(SearchConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            base[f.name] = v
    if getattr(args, "horizon", None) is not None:
        base["horizon"] = args.horizon
    return SearchConfig(**base)


def cmd_geodesic(args) -> int:
    p = _covector(args)
    T = 5.0 if args.horizon is None else args.horizon
    geo = integrate(p, None, T, args.step)
    cusps = detect_cusps(geo)
    infl = detect_inflections(geo)
    degenerate = projection_is_degenerate(geo)
    if args.out_csv:
        _write(args.out_csv, geo.to_csv())
    if args.out_svg:
        _write(args.out_svg, render_svg(geo, PlotSpec(), cusps.times))
    end = geo.endpoint
    payload = {
        "p": list(p),
        "class": classify_covector(p).value,
        "T": T,
        "step": geo.step,
        "endpoint": [end.x, end.y, end.theta],
        "cusps": cusps.times,
        "inflections": infl.times,
        "degenerate_projection": degenerate,
    }
    text = f"class {payload['class']}  endpoint {end.x!r} {end.y!r} {end.theta!r}  cusps {len(cusps)}"
    if degenerate:
        text += "  (projection is a single point)"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_classify(args) -> int:
    print(classify_covector(_covector(args)).value)
    return EXIT_OK


def cmd_orbit(args) -> int:
    spec = OrbitSpec(AlgebraElement(args.a, args.b, args.c), GroupElement(*args.base))
    kind = classify_orbit_projection(spec)
    payload = kind.to_json()
    if args.s is not None:
        g = orbit_point(spec, args.s)
        payload["point"] = [g.x, g.y, g.theta]
    _emit(args, payload, f"{kind.kind} {json.dumps(kind.parameters, sort_keys=True)}")
    return EXIT_OK


def cmd_homogeneity(args) -> int:
    horizon = 10.0 if args.horizon is None else args.horizon
    if args.covector is not None:
        p = Covector.natural(*args.covector)
        res = homogeneity_test(p, confirm=args.confirm > 0, horizon=horizon, step=args.step)
        payload = res.to_json()
        payload["verdict"] = "geodesic-orbital" if res.homogeneous else "not geodesic-orbital"
        _emit(args, payload, payload["verdict"])
        return EXIT_OK
    rep = homogeneity_sweep(
        args.n_alpha, args.n_h3, args.h3_max, args.confirm, args.seed, horizon, args.step
    )
    payload = rep.to_json()
    _emit(
        args,
        payload,
        f"{payload['n_homogeneous']} of {payload['n_covectors']} covectors homogeneous: {payload['verdict']}",
    )
    return EXIT_OK


def cmd_cut_time(args) -> int:
    est = estimate_cut_time(_covector(args), _search_config(args))
    payload = est.to_json()
    _emit(args, payload, f"t_cut estimate {payload['value']} in [{est.lower}, {est.upper}]")
    return EXIT_OK


def cmd_equioptimality(args) -> int:
    rep = equioptimality_check(_covector(args), args.taus, _search_config(args), args.step)
    payload = rep.to_json()
    verdict = "pass" if rep.passed else "fail"
    _emit(args, payload, f"max deviation {rep.max_deviation!r} (tolerance {rep.tolerance!r}): {verdict}")
    return EXIT_OK


def cmd_shift_check(args) -> int:
    T = 5.0 if args.horizon is None else args.horizon
    dev = shift_identity_check(_covector(args), args.tau, T, args.step)
    payload = {"p": [args.h1, args.h2, args.h3], "tau": args.tau, "T": T, "max_deviation": dev}
    _emit(args, payload, f"max deviation {dev!r}")
    return EXIT_OK


def _add_covector(sp):
    for name in ("h1", "h2", "h3"):
        sp.add_argument(name, type=float)


def _add_search(sp):
    g = sp.add_argument_group("search grid")
    for f in fields(SearchConfig):
        if f.name == "horizon":
            continue
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=type(f.default), default=None)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--step", type=float, default=DEFAULT_STEP, help="integration step")
    common.add_argument("--horizon", type=float, default=None, help="final time")
    common.add_argument("--out-csv", default=None)
    common.add_argument("--out-svg", default=None)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--config", default=None, help="JSON file overriding search defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="se2geodesics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("geodesic", parents=[common], help="integrate one geodesic")
    _add_covector(sp)
    sp.set_defaults(func=cmd_geodesic)

    sp = sub.add_parser("classify", parents=[common], help="print the geodesic class")
    _add_covector(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("orbit", parents=[common], help="projection of a one-parameter orbit")
    for name in ("a", "b", "c"):
        sp.add_argument(name, type=float)
    sp.add_argument("--base", type=float, nargs=3, default=(0.0, 0.0, 0.0), metavar=("X", "Y", "THETA"))
    sp.add_argument("--s", type=float, default=None, help="also print the orbit point at s")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("homogeneity", parents=[common], help="homogeneity sweep over C")
    sp.add_argument("--n-alpha", type=int, default=100)
    sp.add_argument("--n-h3", type=int, default=50)
    sp.add_argument("--h3-max", type=float, default=4.0)
    sp.add_argument("--confirm", type=int, default=0, help="geometric confirmation sample size")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--covector", type=float, nargs=3, default=None, metavar=("H1", "H2", "H3"))
    sp.set_defaults(func=cmd_homogeneity)

    sp = sub.add_parser("cut-time", parents=[common], help="Maxwell-point cut-time estimate")
    _add_covector(sp)
    _add_search(sp)
    sp.set_defaults(func=cmd_cut_time)

    sp = sub.add_parser("equioptimality", parents=[common], help="cut time along the vertical orbit")
    _add_covector(sp)
    sp.add_argument("--taus", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    _add_search(sp)
    sp.set_defaults(func=cmd_equioptimality)

    sp = sub.add_parser("shift-check", parents=[common], help="left-shift identity deviation")
    _add_covector(sp)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.set_defaults(func=cmd_shift_check)
    return parser


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    known = {f.name for f in fields(SearchConfig)}
    unknown = set(data) - known - {"step"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        overrides = _load_config(args.config)
        if "step" in overrides:
            args.step = overrides.pop("step")
        args.config_overrides = overrides
        return args.func(args)
    except CliIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
