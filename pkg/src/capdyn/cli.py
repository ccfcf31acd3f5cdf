"""Command-line entry point: ``capdyn {render,scan,ray,boundary,dim,suite}``.

Options may also come from a flat ``key = value`` config file (--config);
explicit flags win over the file, which wins over built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import dimension as D
from . import rays as R
from . import scan as S
from .errors import CapdynError
from .render import RenderSpec, render, resolve_polynomial, superattracting_cycles, worker_count
from .suites import SUITES, _jsonable, run_suite

DEFAULTS = {
    "family": "Quadratic",
    "param": "-1",
    "window": "-2,2,-2,2",
    "res": "512",
    "budget": "500",
    "tol": "1e-8",
    "coloring": "EscapeTime",
    "target": "julia",
    "angle": "1/3",
    "rays": "256",
    "depth": "14",
    "method": "poincare",
    "r_max": "2.0",
}


def read_config(path: str | None) -> dict:
    """Flat UTF-8 ``key = value`` lines; '#' starts a comment."""
    if not path:
        return {}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def parse_complex(s: str) -> complex:
    return complex(s.strip().replace(" ", "").replace("i", "j"))


def parse_params(s: str) -> tuple:
    return tuple(parse_complex(p) for p in s.split(",") if p.strip())


def parse_window(s: str) -> tuple:
    w = tuple(float(v) for v in s.split(","))
    if len(w) != 4:
        raise ValueError("window needs x0,x1,y0,y1")
    return w


def parse_res(s: str) -> tuple:
    s = s.lower()
    if "x" in s:
        nx, ny = s.split("x")
        return int(nx), int(ny)
    return int(s), int(s)


def _opt(args, cfg, key):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in cfg:
        return cfg[key]
    return DEFAULTS.get(key)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1)


# -- commands ---------------------------------------------------------------


def cmd_render(args, cfg) -> int:
    fixed = _opt(args, cfg, "fixed")
    spec = RenderSpec(
        target=_opt(args, cfg, "target"),
        family=_opt(args, cfg, "family"),
        window=parse_window(_opt(args, cfg, "window")),
        resolution=parse_res(_opt(args, cfg, "res")),
        coloring=_opt(args, cfg, "coloring"),
        param=parse_params(_opt(args, cfg, "param")),
        fixed=parse_complex(fixed) if fixed else None,
        budget=int(_opt(args, cfg, "budget")),
    )
    out = _opt(args, cfg, "out") or "render.ppm"
    render(spec, out, worker_count(args.workers))
    sys.stderr.write(f"wrote {out}\n")
    return 0


def cmd_scan(args, cfg) -> int:
    fam = _opt(args, cfg, "family")
    window = parse_window(_opt(args, cfg, "window"))
    nx, ny = parse_res(_opt(args, cfg, "res"))
    budget = int(_opt(args, cfg, "budget"))
    workers = worker_count(args.workers)
    rows = list(range(ny))
    if workers > 1:
        from .suites import pmap

        parts = pmap(lambda r: S.scan(fam, window, (nx, ny), budget, rows=[r]), rows, workers)
        raster = parts[0]
        for r, part in zip(rows, parts):
            raster.codes[r] = part.codes[r]
            raster.entry[r] = part.entry[r]
    else:
        raster = S.scan(fam, window, (nx, ny), budget)
    _emit(raster.to_json(), _opt(args, cfg, "out"))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("code,name,count\n")
            for code, name in S.CODE_NAMES.items():
                fh.write(f"{code},{name},{int(np.sum(raster.codes == code))}\n")
    return 0


def cmd_ray(args, cfg) -> int:
    f = resolve_polynomial(_opt(args, cfg, "family"), parse_params(_opt(args, cfg, "param")))
    theta = Fraction(_opt(args, cfg, "angle"))
    tr = R.trace_external_ray(f, theta)
    rep = {
        "schema": 1,
        "family": _opt(args, cfg, "family"),
        "param": parse_params(_opt(args, cfg, "param")),
        "angle": str(theta),
        "status": tr.status.value,
        "landing": tr.landing,
        "trace": [[float(s), z.real, z.imag] for s, z in zip(tr.potentials, tr.points)],
    }
    _emit(_dump(rep), _opt(args, cfg, "out"))
    return 0 if tr.status is R.RayStatus.LANDED else 1


def cmd_boundary(args, cfg) -> int:
    fam = _opt(args, cfg, "family")
    (center,) = parse_params(_opt(args, cfg, "param"))[:1]
    cb = S.component_boundary(
        fam, center, int(_opt(args, cfg, "rays")), tol=float(_opt(args, cfg, "tol")),
        r_max=float(_opt(args, cfg, "r_max")), budget=int(_opt(args, cfg, "budget")),
    )
    if args.chord:
        cb = S.densify_boundary(cb, args.chord, int(_opt(args, cfg, "budget")))
    _emit(cb.to_json(), _opt(args, cfg, "out"))
    return 0


def fatou_boundary(family: str, param, depth: int, crit_index: int = 0) -> R.BoundarySamples:
    """∂U for the superattracting cycle through the chosen critical point,
    as a boundary of a fixed component of the first return map."""
    f = resolve_polynomial(family, param)
    cycles = superattracting_cycles(f)
    c = f.crit[crit_index]
    for cyc in cycles:
        if np.min(np.abs(cyc - c)) < 1e-7:
            p = len(cyc)
            F = f.compose_power(p) if p > 1 else f
            v = complex(cyc[int(np.argmin(np.abs(cyc - c)))])
            return R.boundary_parametrization(F, v, R.local_degree(F, v), depth)
    raise CapdynError(f"critical point {crit_index} is not periodic")


def cmd_dim(args, cfg) -> int:
    fam = _opt(args, cfg, "family")
    depth = int(_opt(args, cfg, "depth"))
    b = fatou_boundary(fam, parse_params(_opt(args, cfg, "param")), depth, args.crit)
    method = _opt(args, cfg, "method")
    if method == "poincare":
        est = D.poincare_exponent(b, tol=float(_opt(args, cfg, "tol")))
    elif method == "box":
        est = D.box_counting(b.points)
    else:
        raise ValueError(f"unknown method {method!r}")
    rep = {"schema": 1, "family": fam, "depth": depth, "method": est.method, "value": est.value,
           "uncertainty": est.uncertainty, "diagnostics": est.diagnostics}
    _emit(_dump(rep), _opt(args, cfg, "out"))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(est.to_csv())
    return 0


def cmd_suite(args, cfg) -> int:
    overrides = dict(cfg)
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.tol is not None:
        overrides["tol"] = args.tol
    for kv in args.set or []:
        k, v = kv.split("=", 1)
        overrides[k.strip()] = v.strip()
    ids = sorted(SUITES) if args.suite_id == "all" else [args.suite_id]
    reports = [run_suite(s, overrides, args.workers) for s in ids]
    text = reports[0].to_json() if len(reports) == 1 else json.dumps(
        {"schema": 1, "passed": all(r.passed for r in reports), "reports": [r.to_dict() for r in reports]},
        sort_keys=True, indent=1)
    _emit(text, args.out or cfg.get("out"))
    for r in reports:
        sys.stderr.write(f"{r.suite}: {'PASS' if r.passed else 'FAIL'}\n")
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capdyn", description="Capture-component dynamics toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *extra):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output file (default: stdout for JSON)")
        p.add_argument("--workers", type=int, default=None, help="worker threads (capped by CAPDYN_THREADS)")
        for name in extra:
            p.add_argument(f"--{name}")
        return p

    p = common(sub.add_parser("render", help="render a Julia set or parameter plane to PPM"),
               "family", "param", "window", "res", "budget", "coloring", "target", "fixed")
    p.set_defaults(fn=cmd_render)
    p = common(sub.add_parser("scan", help="classification raster as JSON"), "family", "window", "res", "budget")
    p.add_argument("--csv", help="write per-class counts")
    p.set_defaults(fn=cmd_scan)
    p = common(sub.add_parser("ray", help="trace one external ray"), "family", "param", "angle")
    p.set_defaults(fn=cmd_ray)
    p = common(sub.add_parser("boundary", help="capture component boundary by radial bisection"),
               "family", "param", "rays", "tol", "budget", "r_max")
    p.add_argument("--chord", type=float, default=None, help="densify to this sample spacing")
    p.set_defaults(fn=cmd_boundary)
    p = common(sub.add_parser("dim", help="dimension of a superattracting basin boundary"),
               "family", "param", "depth", "method", "tol")
    p.add_argument("--crit", type=int, default=0, help="index of the periodic critical point")
    p.add_argument("--csv", help="write per-level diagnostics")
    p.set_defaults(fn=cmd_dim)
    p = sub.add_parser("suite", help="run a verification suite")
    p.add_argument("suite_id", choices=sorted(SUITES) + ["all"])
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--budget", default=None)
    p.add_argument("--tol", default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.set_defaults(fn=cmd_suite)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = read_config(getattr(args, "config", None))
        return args.fn(args, cfg)
    except (CapdynError, ValueError, OSError) as err:
        sys.stderr.write(f"capdyn: error: {type(err).__name__}: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
