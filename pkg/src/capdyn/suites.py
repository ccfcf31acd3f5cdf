"""Verification suites producing structured JSON reports.

Every suite is a pure function of its configuration: random inputs come
from seeded generators, cases are evaluated in a worker pool but collected in
index order, and no timings are recorded, so reports are byte-identical
across runs and worker counts.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable

import numpy as np

from . import dimension as D
from . import poly as P
from . import rays as R
from . import scan as S
from . import scheme as M
from .render import worker_count

SCHEMA = 1

SCHEME_CHAIN = M.parse_scheme("p p 2\nu p 3\nw u 3\nq w 2\n")


# -- report helpers ---------------------------------------------------------


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, Fraction):
        return str(x)
    return x


class Report:
    def __init__(self, suite: str, config: dict):
        self.suite = suite
        self.config = config
        self.checks: list[dict] = []
        self.data: dict = {}

    def check(self, name: str, value, passed: bool, **detail) -> bool:
        self.checks.append({"name": name, "value": _jsonable(value), "passed": bool(passed), **_jsonable(detail)})
        return bool(passed)

    def close(self, name, value, expected, tol, rel=False) -> bool:
        err = abs(value - expected)
        if rel:
            err /= max(abs(expected), 1e-300)
        return self.check(name, value, err <= tol, expected=expected, error=err, tol=tol, relative=rel)

    def upper(self, name, value, bound) -> bool:
        return self.check(name, value, value <= bound, bound=bound, comparison="<=")

    def lower(self, name, value, bound) -> bool:
        return self.check(name, value, value >= bound, bound=bound, comparison=">=")

    def inside(self, name, value, lo, hi) -> bool:
        return self.check(name, value, lo < value < hi, interval=[lo, hi], comparison="open interval")

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "passed": self.passed,
            "config": _jsonable(self.config),
            "checks": self.checks,
            "data": _jsonable(self.data),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=True)


def pmap(fn: Callable, items, workers: int) -> list:
    """Ordered map over a thread pool (sequential for one worker)."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -- suites -----------------------------------------------------------------


def suite_jacobian(cfg: dict, workers: int) -> Report:
    rep = Report("jacobian", cfg)
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n_points"]
    pts = {name: [M.random_point(s, rng, cfg["scale"]) for _ in range(n)]
           for name, s in (("W1", M.SCHEME_W1), ("W2", M.SCHEME_W2), ("2plus", M.SCHEME_2PLUS), ("chain", SCHEME_CHAIN))}
    h = cfg["h"]

    def fd(x):
        return M.jacobian_fd(x, h)

    d1 = np.array(pmap(fd, pts["W1"], workers))
    ref1 = np.array([-12 * x.crit("v1", 1) ** 2 for x in pts["W1"]])
    e1 = np.abs(d1 - ref1) / np.abs(ref1)
    rep.upper("W1: max rel err of det vs -12 c1^2", float(e1.max()), cfg["tol"])
    rep.data["W1_samples"] = [[x.coords(), d] for x, d in zip(pts["W1"][:5], d1[:5])]

    d2 = np.array(pmap(fd, pts["W2"], workers))
    ref2 = np.array([2 * x.constant["2"] for x in pts["W2"]])
    e2 = np.abs(d2 - ref2) / np.abs(ref2)
    rep.upper("W2: max rel err of det vs 2 a2", float(e2.max()), cfg["tol"])
    rep.data["W2_samples"] = [[x.coords(), d] for x, d in zip(pts["W2"][:5], d2[:5])]

    for name in ("2plus", "chain"):
        xs = pts[name]
        d = np.array(pmap(fd, xs, workers))
        pr = np.array([M.jacobian_closed_form(x) for x in xs])
        ratio = d / pr
        med = complex(np.median(ratio.real), np.median(ratio.imag))
        spread = float(np.max(np.abs(ratio - med)) / abs(med))
        rep.upper(f"{name}: relative spread of fd det / closed-form product", spread, cfg["ratio_tol"])
        rep.data[f"{name}_constant"] = med

    # zero set of the product = free critical relations
    x = M.from_coords(M.SCHEME_W1, [0, 0.7])
    rel, wit = M.has_free_critical_relation(x)
    rep.check("W1: marking collision is a free relation with zero product", [rel, abs(M.jacobian_closed_form(x))],
              rel and M.jacobian_closed_form(x) == 0, witnesses=wit)
    x = M.from_coords(M.SCHEME_W2, [0.4, 0])
    rel, wit = M.has_free_critical_relation(x)
    rep.check("W2: a2 = 0 is a free relation with zero product", [rel, abs(M.jacobian_closed_form(x))],
              rel and M.jacobian_closed_form(x) == 0, witnesses=wit)
    gen = [M.has_free_critical_relation(x)[0] for x in pts["chain"]]
    rep.check("chain: generic points carry no free relation", sum(gen), not any(gen))
    return rep


def suite_phi(cfg: dict, workers: int) -> Report:
    rep = Report("phi", cfg)
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n_points"]
    tol = cfg["tol"]
    schemes = {"W1": M.SCHEME_W1, "W2": M.SCHEME_W2, "2plus": M.SCHEME_2PLUS, "chain": SCHEME_CHAIN}
    for name, s in schemes.items():
        z = M.zero_point(s)
        rep.check(f"{name}: phi(0) = 0 and phi_inverse(0) = 0",
                  [M.norm(M.phi(z)), M.norm(M.phi_inverse(z))], M.norm(M.phi(z)) == 0 and M.norm(M.phi_inverse(z)) == 0)
        cases = []
        for _ in range(n):
            x = M.random_point(s, rng, cfg["scale"])
            t = float(rng.uniform(0, cfg["t_max"]))
            cases.append((x, t))

        def one(case):
            x, t = case
            mx = M.big_m(x)
            y = M.scale_lambda(t, x)
            e_m = abs(M.big_m(y) - t * mx) / max(t * mx, 1e-300)
            e_w = float(np.max(np.abs(M.w_map(y) - t * M.w_map(x)))) / max(t * mx, 1e-300)
            px = M.phi(x)
            e_rt = float(np.max(np.abs(M.phi_inverse(px).coords() - x.coords())))
            e_phi = abs(M.big_m(px) - M.norm(x))
            return e_m, e_w, e_rt, e_phi

        errs = np.array(pmap(one, cases, workers))
        rep.upper(f"{name}: max rel err M(Lambda(t,x)) - t M(x)", float(errs[:, 0].max()), tol)
        rep.upper(f"{name}: max rel err W(Lambda(t,x)) - t W(x)", float(errs[:, 1].max()), tol)
        rep.upper(f"{name}: max round-trip error of phi_inverse(phi(x))", float(errs[:, 2].max()), tol)
        rep.upper(f"{name}: max |M(phi(x)) - ||x|||", float(errs[:, 3].max()), tol)
    x = M.from_coords(M.SCHEME_W2, [1, 0])
    rep.close("W2: phi(x) = x at x = (1, 0)", float(np.max(np.abs(M.phi(x).coords() - x.coords()))), 0.0, tol)
    return rep


def suite_rays(cfg: dict, workers: int) -> Report:
    rep = Report("rays", cfg)
    f = P.quadratic(-1)
    alpha = (1 - math.sqrt(5)) / 2
    angles = [Fraction(1, 3), Fraction(2, 3)]
    traces = pmap(lambda th: R.trace_external_ray(f, th, steps_per_halving=cfg["steps"]), angles, workers)
    for th, tr in zip(angles, traces):
        rep.check(f"ray {th} landed", tr.status.value, tr.status is R.RayStatus.LANDED)
        rep.close(f"ray {th} landing vs (1-sqrt5)/2", abs(tr.landing - alpha), 0.0, cfg["landing_tol"])
        rep.upper(f"ray {th}: |x^2 - x - 1| at landing", abs(tr.landing**2 - tr.landing - 1), cfg["equation_tol"])
        rep.data[f"landing_{th}"] = tr.landing
    rep.upper("rays 1/3, 2/3 land together", abs(traces[0].landing - traces[1].landing), cfg["landing_tol"])
    ex = R.expansion_along_ray(f, Fraction(1, 3), cfg["expansion_n"], traces[0])
    rep.lower(f"min |(g^{cfg['expansion_n']})'| over the sampled closed ray", ex.min_derivative, 2.0)
    rep.close("landing multiplier vs sqrt5 - 1", ex.landing_multiplier, math.sqrt(5) - 1, cfg["multiplier_tol"])
    rep.data["expansion"] = {"samples": ex.samples_used, "landing_derivative": ex.landing_derivative}
    return rep


def basilica_boundary(depth: int) -> R.BoundarySamples:
    return R.boundary_parametrization(P.quadratic(-1).compose_power(2), 0j, 2, depth)


def suite_dims(cfg: dict, workers: int) -> Report:
    rep = Report("dims", cfg)

    def mono(d):
        depth = {2: 7, 3: 5, 4: 5}.get(d, 4)
        b = R.boundary_parametrization(P.monomial(d), 0j, d, depth)
        return D.poincare_exponent(b).value

    for d, v in zip((2, 3, 4), pmap(mono, (2, 3, 4), workers)):
        rep.close(f"z^{d}: Poincare exponent of the unit circle", v, 1.0, cfg["exact_tol"])
    b = basilica_boundary(cfg["basilica_depth"])
    rep.upper("basilica: boundary functional residual", b.functional_residual(), 1e-9)
    pe = D.poincare_exponent(b)
    bc = D.box_counting(b.angle_points(cfg["box_depth"]))
    rep.inside("basilica: Poincare exponent", pe.value, 1.0, 1.3)
    rep.inside("basilica: box-counting dimension", bc.value, 1.0, 1.3)
    rep.upper("basilica: |Poincare - box counting|", abs(pe.value - bc.value), cfg["agree_tol"])
    rep.data["poincare"] = {"value": pe.value, "uncertainty": pe.uncertainty, "t_n": pe.diagnostics["t_n"]}
    rep.data["box"] = {"value": bc.value, "uncertainty": bc.uncertainty, "decades": bc.diagnostics.get("decades")}
    return rep


def suite_transfer(cfg: dict, workers: int) -> Report:
    rep = Report("transfer", cfg)
    target = math.log(2) / math.log(3)
    res = D.transfer_demo(cantor_depth=cfg["cantor_depth"], deltas=(cfg["delta"],), motion="linear")[0]
    rep.close("box dim of the transferred set near 0 vs log2/log3", res.estimate.value, target, cfg["tol"])
    rigid = D.transfer_demo(cantor_depth=cfg["cantor_depth"], deltas=(cfg["delta"],), motion="rigid")[0]
    rep.close("rigid-motion control vs log2/log3", rigid.estimate.value, target, cfg["tol"])
    single = D.transfer_demo(cantor_depth=cfg["cantor_depth"], deltas=(cfg["delta"],), base_set="singleton")[0]
    rep.close("singleton base set gives dimension 0", single.estimate.value, 0.0, 1e-12)
    rep.data["points"] = res.n_points
    rep.data["uncertainty"] = res.estimate.uncertainty
    return rep


def suite_mori(cfg: dict, workers: int) -> Report:
    rep = Report("mori", cfg)
    K = cfg["K"]
    m = D.mori_check(K, sample_count=cfg["pairs"], seed=cfg["seed"])
    rep.check("forward map: violations of the fitted Holder bounds", len(m.violations), not m.violations)
    rep.check("inverse map: violations of the fitted Holder bounds", len(m.inverse_violations), not m.inverse_violations)
    rep.check("forward map: violations with the constant 16", len(m.universal_violations), not m.universal_violations)
    rep.close("radial exponent of the inverse map vs K", m.radial_exponent, K, cfg["exponent_tol"])
    rep.data["constants"] = {"C1": m.C1, "C2": m.C2, "inverse_C1": m.inverse_C1, "inverse_C2": m.inverse_C2}
    return rep


def f2_component_samples(n: int, budget: int = 2000) -> list[complex]:
    """n parameters in the closure of the F2 capture component of b = 1:
    half on the traced boundary, half at 0.6 of the way out."""
    cb = S.component_boundary("F2Quartic", 1.0, 64, tol=1e-8, r_max=2.0, budget=budget)
    k = n // 2
    idx = (np.arange(k) * 64) // k
    bd = [complex(z) for z in cb.inner[idx]]
    inner = [1 + 0.6 * (z - 1) for z in bd]
    return (bd + inner + [1.0 + 0j])[:n]


def suite_turning(cfg: dict, workers: int) -> Report:
    rep = Report("turning", cfg)
    params = f2_component_samples(cfg["samples"])
    depth = cfg["depth"]

    def one(prm):
        return S.uniform_turning_survey("F2Quartic", [prm], depth)[0], S.uniform_turning_survey("F2Quartic", [prm], depth + 1)[0]

    vals = np.array(pmap(one, params, workers))
    c1, c2 = float(vals[:, 0].max()), float(vals[:, 1].max())
    rep.check("all turning values finite", bool(np.all(np.isfinite(vals))), bool(np.all(np.isfinite(vals))))
    rep.upper("relative change of the ceiling under doubled sampling", abs(c2 - c1) / c1, cfg["stability"])
    rep.upper("turning ceiling", c2, cfg["ceiling"])
    rep.data["params"] = params
    rep.data["turning"] = vals
    return rep


def suite_dimformula(cfg: dict, workers: int) -> Report:
    rep = Report("dimformula", cfg)
    r = S.dim_formula_check(
        "S1Cubic", n_rays=cfg["n_rays"], n_boundary_samples=cfg["samples"], tol=cfg["bisect_tol"],
        depth=cfg["depth"], chord=cfg["chord"], budget=cfg["budget"],
    )
    rep.inside("box-count dimension of the component boundary", r.lhs.value, 1.0, 2.0)
    rep.inside("max Poincare exponent over boundary samples", r.rhs, 1.0, 2.0)
    rep.check("number of boundary samples", len(r.rhs_estimates), len(r.rhs_estimates) >= cfg["samples"])
    rep.upper("|lhs - rhs|", r.gap, cfg["gap_tol"])
    rep.data["lhs"] = {"value": r.lhs.value, "uncertainty": r.lhs.uncertainty, "decades": r.lhs.diagnostics.get("decades")}
    rep.data["rhs_values"] = [e.value for e in r.rhs_estimates]
    rep.data["boundary_samples"] = len(r.boundary.samples)
    return rep


def s1_boundary_samples(n: int, budget: int = 2000) -> list[complex]:
    cb = S.component_boundary("S1Cubic", P.s1_capture_center(), n, tol=1e-10, r_max=0.05, budget=budget)
    return [complex(z) for z in cb.inner]


def suite_behavior(cfg: dict, workers: int) -> Report:
    rep = Report("behavior", cfg)
    params = s1_boundary_samples(cfg["samples"])

    def one(prm):
        f = P.chart("S1Cubic", prm).realization
        r = S.behavior_check(f, [1], [0], tol=cfg["tol"], depth=cfg["depth"], p_max=cfg["p_max"])
        return max(r.distances), len(r.multipliers_near_one)

    res = pmap(one, params, workers)
    dist = [r[0] for r in res]
    rep.upper("max distance of free critical tails to the basin closure", max(dist), cfg["tol"])
    rep.check("periodic points with |multiplier| in [0.999, 1.001]", sum(r[1] for r in res), all(r[1] == 0 for r in res))
    rep.data["params"] = params
    rep.data["distances"] = dist

    # the two printed F2 parameters
    c1 = S.classify_family("F2Quartic", 1.0)
    rep.check("F2 b = 1 classifies Capture", c1.kind, c1.kind == "Capture", entry=c1.entry_time)
    b2 = P.f2_boundary_parameter()
    c2 = S.classify_family("F2Quartic", b2)
    rep.check("F2 b2 classifies not Capture", c2.kind, c2.kind != "Capture")
    f = P.chart("F2Quartic", b2).realization
    y = f.eval(f.crit[2])
    rep.upper("F2 b2: |f(f(c3)) - f(c3)|", abs(f.eval(y) - y), 1e-8)
    rep.lower("F2 b2: |f'(f(c3))|", abs(f.deriv(y)), 1.0 + 1e-8)
    rep.data["f2_fixed_point"] = y
    return rep


def suite_airplane(cfg: dict, workers: int) -> Report:
    rep = Report("airplane", cfg)
    J = S.jacobian_G_fd(h=cfg["h"])
    for (i, j), v in np.ndenumerate(J):
        rep.close(f"J[{i},{j}] vs -16", complex(v), -16, cfg["entry_tol"])
    rep.close("det J vs 0", complex(np.linalg.det(J)), 0, cfg["det_tol"])
    rep.data["matrix"] = J
    return rep


SUITES = {
    "jacobian": (suite_jacobian, {"seed": 20240611, "n_points": 100, "scale": 2.0, "h": 1e-5, "tol": 1e-6, "ratio_tol": 1e-5}),
    "phi": (suite_phi, {"seed": 7, "n_points": 100, "scale": 3.0, "t_max": 3.0, "tol": 1e-10}),
    "rays": (suite_rays, {"steps": 8, "landing_tol": 1e-6, "equation_tol": 1e-10, "expansion_n": 4, "multiplier_tol": 1e-8}),
    "dims": (suite_dims, {"basilica_depth": 18, "box_depth": 16, "exact_tol": 1e-6, "agree_tol": 0.02}),
    "transfer": (suite_transfer, {"cantor_depth": 14, "delta": 0.1, "tol": 0.03}),
    "mori": (suite_mori, {"K": 2.0, "pairs": 1000, "seed": 0, "exponent_tol": 0.05}),
    "turning": (suite_turning, {"samples": 20, "depth": 10, "stability": 0.05, "ceiling": 100.0}),
    "dimformula": (suite_dimformula, {"n_rays": 2048, "samples": 50, "bisect_tol": 1e-10, "depth": 14, "chord": 2e-6,
                                      "budget": 2000, "gap_tol": 0.05}),
    "behavior": (suite_behavior, {"samples": 20, "tol": 1e-3, "depth": 12, "p_max": 6}),
    "airplane": (suite_airplane, {"h": 1e-5, "entry_tol": 1e-4, "det_tol": 1e-3}),
}


def coerce_config(defaults: dict, overrides: dict) -> dict:
    """Merge string or typed overrides into defaults, keeping the default types."""
    out = dict(defaults)
    for k, v in overrides.items():
        if k not in defaults:
            continue
        typ = type(defaults[k])
        if isinstance(v, str):
            v = typ(float(v)) if typ is int else typ(v)
        out[k] = typ(v)
    return out


def run_suite(suite_id: str, config: dict | None = None, workers: int | None = None) -> Report:
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; choose from {sorted(SUITES)}")
    fn, defaults = SUITES[suite_id]
    cfg = coerce_config(defaults, config or {})
    return fn(cfg, worker_count(workers))
