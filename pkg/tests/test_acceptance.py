"""The fourteen acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (also collected in the terminal summary).
Suite reports are computed once with one worker and reused; criterion 14
reruns every suite and render and compares bytes.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from capdyn import dimension as D
from capdyn import poly as P
from capdyn import rays as R
from capdyn import render as RD
from capdyn import scan as S
from capdyn.suites import SUITES, run_suite

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}
_CACHE: dict[str, tuple] = {}


def suite(name):
    if name not in _CACHE:
        t = time.perf_counter()
        rep = run_suite(name, workers=1)
        _CACHE[name] = (rep, time.perf_counter() - t)
    return _CACHE[name]


def checks(rep, prefix=""):
    return {c["name"]: c for c in rep.checks if c["name"].startswith(prefix)}


def record(capsys, n, title, ok, detail):
    line = f"CRITERION {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS[n] = line
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_01_jacobian_identity(capsys):
    rep, dt = suite("jacobian")
    c = checks(rep)
    e1 = c["W1: max rel err of det vs -12 c1^2"]["value"]
    e2 = c["W2: max rel err of det vs 2 a2"]["value"]
    sp = c["2plus: relative spread of fd det / closed-form product"]["value"]
    ok = e1 <= 1e-6 and e2 <= 1e-6 and sp <= 1e-5 and dt < 10 and rep.config["n_points"] >= 100
    record(capsys, 1, "Jacobian identity", ok, f"W1 {e1:.2e}, W2 {e2:.2e}, 2plus spread {sp:.2e}, {dt:.1f}s")


def test_02_airplane_degeneracy(capsys):
    rep, dt = suite("airplane")
    J = np.asarray(rep.data["matrix"])
    ent = float(np.max(np.abs(J + 16)))
    det = abs(np.linalg.det(J))
    ok = ent <= 1e-4 and det <= 1e-3 and dt < 1
    record(capsys, 2, "Airplane degeneracy", ok, f"max |J+16| {ent:.2e}, |det| {det:.2e}, {dt:.2f}s")


def test_03_model_space_maps(capsys):
    rep, dt = suite("phi")
    vals = [c["value"] for c in rep.checks if c["name"].startswith(("W1", "W2", "2plus", "chain")) and "max" in c["name"]]
    worst = max(vals)
    ok = rep.passed and worst <= 1e-10 and dt < 5
    record(capsys, 3, "Model-space maps", ok, f"worst error {worst:.2e} over scaling, round trip, M(phi(x)), {dt:.1f}s")


def test_04_poincare_exactness(capsys):
    t = time.perf_counter()
    vals = {}
    for d, depth in ((2, 7), (3, 5), (4, 5)):
        b = R.boundary_parametrization(P.monomial(d), 0j, d, depth)
        vals[d] = D.poincare_exponent(b).value
    dt = time.perf_counter() - t
    err = max(abs(v - 1) for v in vals.values())
    ok = err <= 1e-6 and dt < 5
    record(capsys, 4, "Poincare exponent exactness", ok, f"max |delta - 1| {err:.1e} for d=2,3,4, {dt:.2f}s")


def test_05_cross_estimator(capsys):
    rep, dt = suite("dims")
    pe = rep.data["poincare"]["value"]
    bc = rep.data["box"]["value"]
    ok = abs(pe - bc) <= 0.02 and 1 < pe < 1.3 and 1 < bc < 1.3 and dt < 120
    record(capsys, 5, "Cross-estimator agreement (basilica)", ok,
           f"Poincare {pe:.5f}, box {bc:.5f}, gap {abs(pe - bc):.4f}, {dt:.1f}s")


def test_06_ray_landing(capsys):
    t = time.perf_counter()
    f = P.quadratic(-1)
    alpha = (1 - math.sqrt(5)) / 2
    a = R.trace_external_ray(f, Fraction(1, 3))
    b = R.trace_external_ray(f, Fraction(2, 3))
    dt = time.perf_counter() - t
    eq = abs(a.landing**2 - a.landing - 1)
    ok = (abs(a.landing - alpha) <= 1e-6 and abs(b.landing - alpha) <= 1e-6 and abs(a.landing - b.landing) <= 1e-6
          and eq <= 1e-10 and dt < 1)
    record(capsys, 6, "Ray landing", ok, f"|x - alpha| {abs(a.landing - alpha):.1e}, |x^2-x-1| {eq:.1e}, {dt:.2f}s")


def test_07_uniform_expansion(capsys):
    rep, _ = suite("rays")
    c = checks(rep)
    mn = c["min |(g^4)'| over the sampled closed ray"]["value"]
    lam = c["landing multiplier vs sqrt5 - 1"]["value"]
    ok = mn >= 2 and abs(lam - (math.sqrt(5) - 1)) <= 1e-8
    record(capsys, 7, "Uniform ray expansion", ok, f"min |(g^4)'| {mn:.4f}, multiplier error {abs(lam - math.sqrt(5) + 1):.1e}")


def test_08_dimension_formula(capsys):
    rep, dt = suite("dimformula")
    lhs = rep.data["lhs"]["value"]
    vals = rep.data["rhs_values"]
    rhs = max(vals)
    ok = (abs(lhs - rhs) <= 0.05 and 1 < lhs < 2 and 1 < rhs < 2 and len(vals) >= 50
          and rep.config["n_rays"] >= 2048 and dt <= 900)
    record(capsys, 8, "Dimension formula desk check (S1Cubic)", ok,
           f"box {lhs:.5f}, max Poincare {rhs:.5f} over {len(vals)} samples, gap {abs(lhs - rhs):.4f}, {dt:.0f}s")


def test_09_transfer(capsys):
    rep, dt = suite("transfer")
    c = checks(rep, "box dim")
    v = next(iter(c.values()))["value"]
    target = math.log(2) / math.log(3)
    ok = abs(v - target) <= 0.03 and dt < 60 and rep.config["cantor_depth"] == 14
    record(capsys, 9, "Transfer demo", ok, f"dim {v:.4f} vs {target:.4f}, {dt:.1f}s")


def test_10_mori(capsys):
    rep, _ = suite("mori")
    c = checks(rep)
    nf = c["forward map: violations of the fitted Holder bounds"]["value"]
    ni = c["inverse map: violations of the fitted Holder bounds"]["value"]
    ex = c["radial exponent of the inverse map vs K"]["value"]
    ok = nf == 0 and ni == 0 and abs(ex - 2.0) <= 0.05 and rep.config["pairs"] >= 1000
    record(capsys, 10, "Mori bounds (K=2)", ok, f"violations {nf}+{ni}, radial exponent {ex:.4f}")


def test_11_behavior(capsys):
    rep, _ = suite("behavior")
    c = checks(rep)
    dist = c["max distance of free critical tails to the basin closure"]["value"]
    near = c["periodic points with |multiplier| in [0.999, 1.001]"]["value"]
    ok = dist <= 1e-3 and near == 0 and len(rep.data["params"]) >= 20
    record(capsys, 11, "Behavior of critical orbits", ok,
           f"{len(rep.data['params'])} samples, max tail distance {dist:.1e}, near-indifferent cycles {near}")


def test_12_uniform_quasicircles(capsys):
    rep, _ = suite("turning")
    vals = np.asarray(rep.data["turning"], dtype=float)
    c1, c2 = vals[:, 0].max(), vals[:, 1].max()
    rel = abs(c2 - c1) / c1
    ok = np.all(np.isfinite(vals)) and rel <= 0.05 and len(vals) >= 20
    record(capsys, 12, "Uniform quasicircles (F2Quartic)", ok, f"ceiling {c1:.4f} -> {c2:.4f}, change {rel:.2e}")


def test_13_f2_points(capsys):
    c1 = S.classify_family("F2Quartic", 1.0)
    b2 = P.f2_boundary_parameter()
    c2 = S.classify_family("F2Quartic", b2)
    f = P.chart("F2Quartic", b2).realization
    y = f.eval(f.crit[2])
    res = abs(f.eval(y) - y)
    lam = abs(f.deriv(y))
    ok = c1.kind == "Capture" and c2.kind != "Capture" and res <= 1e-8 and lam > 1 + 1e-8
    record(capsys, 13, "F2 example points", ok,
           f"b1 {c1.kind}, b2 {c2.kind}, |f(y)-y| {res:.1e}, |f'(y)| {lam:.6f}")


def test_14_determinism(capsys):
    bad = []
    for name in SUITES:
        first = suite(name)[0].to_json()
        again = run_suite(name, workers=1).to_json()
        wide = run_suite(name, workers=8).to_json()
        if not (first == again == wide):
            bad.append(name)
    specs = [
        RD.RenderSpec("julia", "Quadratic", (-2, 2, -1.5, 1.5), (96, 72), "BasinByTarget", param=(-1,), budget=300),
        RD.RenderSpec("julia", "S1Cubic", (-2, 2, -2, 2), (64, 64), "EscapeTime", param=(P.s1_capture_center(),)),
        RD.RenderSpec("param", "S1Cubic", (-1.5, 1.5, -1.5, 1.5), (64, 64), "Classification", budget=300),
    ]
    for sp in specs:
        imgs = [RD.ppm_bytes(RD.render_array(sp, w)) for w in (1, 1, 8)]
        if not (imgs[0] == imgs[1] == imgs[2]):
            bad.append(f"render {sp.target}/{sp.family}")
    ok = not bad
    record(capsys, 14, "Determinism", ok,
           f"{len(SUITES)} suites and {len(specs)} renders bit-identical over 2 runs and workers 1/8"
           if ok else f"differences in {bad}")
