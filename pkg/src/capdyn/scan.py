"""Parameter-space classification of the hard-coded families, capture
component boundaries, critical-orbit behavior and the desk-scale check of
the boundary dimension formula."""
from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import poly as P
from . import rays as R
from .dimension import DimensionEstimate, box_counting, poincare_exponent, turning_max
from .errors import RayNeverExits, StepTooLarge

BUDGET = 10_000

# cell codes
ESCAPE = 0
CAPTURE = 1
OTHER_BOUNDED = 2
UNRESOLVED = 3
CODE_NAMES = {ESCAPE: "Escape", CAPTURE: "Capture", OTHER_BOUNDED: "OtherBounded", UNRESOLVED: "Unresolved"}


@dataclass
class Classification:
    kind: str
    target: int | None = None  # index of the target marked critical point
    entry_time: int | None = None
    budget: int = BUDGET
    detail: dict = field(default_factory=dict)

    @property
    def is_capture(self) -> bool:
        return self.kind == "Capture"


# -- vectorized family realization ------------------------------------------


def _esym(crit: np.ndarray) -> np.ndarray:
    """Elementary symmetric functions of the rows of crit, shape (P, m+1)."""
    Pn, m = crit.shape
    e = np.zeros((Pn, m + 1), dtype=complex)
    e[:, 0] = 1
    for j in range(m):
        c = crit[:, j]
        for k in range(m, 0, -1):
            e[:, k] = e[:, k] + e[:, k - 1] * c
    return e


def coeffs_from_marking(crit: np.ndarray, a: np.ndarray) -> np.ndarray:
    crit = np.atleast_2d(np.asarray(crit, dtype=complex))
    Pn, m = crit.shape
    d = m + 1
    e = _esym(crit)
    co = np.zeros((Pn, d + 1), dtype=complex)
    for k in range(d):
        p = d - k
        co[:, p] = d * ((-1) ** k) * e[:, k] / p
    co[:, 0] = a
    co[:, d] = 1
    co[:, d - 1] = 0
    return co


def family_arrays(family_id: str, params) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized chart: (coeffs (P, d+1), crit (P, d-1)) for many parameters.

    ``params`` is shape (P,) for one-parameter families and (P, 2) otherwise.
    """
    p = np.asarray(params, dtype=complex)
    if family_id == "S1Cubic":
        c = p.ravel()
        crit = np.stack([c, -c], axis=1)
        a = c + 2 * c**3
    elif family_id == "F1Quartic":
        c = p.ravel()
        crit = np.stack([-c / 2, -c / 2, c], axis=1)
        a = -(8 * c + 3 * c**4) / 16
    elif family_id == "F2Quartic":
        b = p.ravel()
        with np.errstate(divide="ignore", invalid="ignore"):
            crit = np.stack([(-1 - b**3) / (2 * b), (1 - b**3) / (2 * b), b**2], axis=1)
            a = (1 + 3 * b**6) * (1 - b**6) / (16 * b**4)
    elif family_id in ("AirplaneQuartic", "Peanut2Plus"):
        p2 = p.reshape(-1, 2)
        c1, c2 = p2[:, 0], p2[:, 1]
        crit = np.stack([c1, c2, -c1 - c2], axis=1)
        a = P.airplane_constant(c1, c2)
    else:
        raise P.UnknownFamily(family_id)
    return coeffs_from_marking(crit, a), crit


def family_targets(family_id: str) -> list[int]:
    """Marked critical points that are superattracting fixed points."""
    return {
        "S1Cubic": [0],
        "F1Quartic": [0],
        "F2Quartic": [0, 1],
        "Peanut2Plus": [0],
        "AirplaneQuartic": [0],
    }[family_id]


def _horner(co, z):
    w = np.broadcast_to(co[..., -1], z.shape).astype(complex)
    for k in range(co.shape[-1] - 2, -1, -1):
        w = w * z + co[..., k]
    return w


def taylor_rows(co: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Taylor coefficients of each row polynomial about v (ascending)."""
    Pn, n1 = co.shape
    out = np.zeros((Pn, n1), dtype=complex)
    work = co[:, ::-1].copy()
    for k in range(n1):
        acc = work[:, 0].copy()
        nxt = [acc]
        for j in range(1, work.shape[1]):
            acc = acc * v + work[:, j]
            nxt.append(acc)
        out[:, k] = nxt[-1]
        work = np.stack(nxt[:-1], axis=1) if len(nxt) > 1 else work[:, :0]
    return out


def trap_radius(co: np.ndarray, v: np.ndarray, factor: float = 0.5) -> np.ndarray:
    """Radius r with |F(z) - v| <= factor |z - v| on the closed disk D(v, r).

    Certified by the Taylor tail bound Σ_{k>=2} |T_k| r^(k-1) <= factor,
    which dominates the contraction ratio on every circle |z - v| = ρ <= r.
    """
    T = np.abs(taylor_rows(co, v))
    r = np.ones(len(v))
    for _ in range(80):
        bound = sum(T[:, k] * r ** (k - 1) for k in range(2, T.shape[1]))
        bad = bound > factor
        if not bad.any():
            break
        r = np.where(bad, r / 2, r)
    return r


def escape_radii(co: np.ndarray) -> np.ndarray:
    return 2.0 * (1.0 + np.sum(np.abs(co[:, :-1]), axis=1))


def classify_array(
    family_id: str,
    params,
    budget: int = BUDGET,
    targets: Sequence[int] | None = None,
    free: Sequence[int] | None = None,
) -> dict:
    """Classify many parameters of a family at once.

    Returns arrays ``code`` (cell codes), ``target`` (index of the target
    marked critical point capturing the last free orbit, -1 if none) and
    ``entry`` (largest trap entry time over the free critical points).
    """
    co, crit = family_arrays(family_id, params)
    Pn = len(co)
    targets = family_targets(family_id) if targets is None else list(targets)
    free = P.family_free_critical_indices(family_id) if free is None else list(free)
    tv = crit[:, targets]  # (P, T)
    tr = np.stack([trap_radius(co, tv[:, i]) for i in range(len(targets))], axis=1)
    Resc = escape_radii(co)
    z = crit[:, free].copy()  # (P, F)
    nf = z.shape[1]
    code = np.full(Pn, UNRESOLVED, dtype=np.int8)
    captured = np.zeros((Pn, nf), dtype=bool)
    entry = np.full((Pn, nf), -1, dtype=np.int64)
    tgt = np.full((Pn, nf), -1, dtype=np.int64)
    bad = ~np.all(np.isfinite(co), axis=1)
    code[bad] = OTHER_BOUNDED
    active = ~bad
    prev = z.copy()
    prev2 = z.copy()
    for n in range(budget + 1):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        zz = z[idx]
        dist = np.abs(zz[:, :, None] - tv[idx][:, None, :])  # (A, F, T)
        inside = dist <= tr[idx][:, None, :]
        hit = inside.any(axis=2) & ~captured[idx]
        if hit.any():
            which = np.argmax(inside, axis=2)
            cap = captured[idx]
            ent = entry[idx]
            tg = tgt[idx]
            cap |= hit
            ent = np.where(hit, n, ent)
            tg = np.where(hit, np.take(np.asarray(targets), which), tg)
            captured[idx] = cap
            entry[idx] = ent
            tgt[idx] = tg
        esc = np.any(np.abs(zz) > Resc[idx][:, None], axis=1)
        code[idx[esc]] = ESCAPE
        # exact landing on a repelling fixed point or 2-cycle (in the Julia set)
        if n >= 2:
            stuck = ~captured[idx] & (
                (np.abs(zz - prev[idx]) < 1e-13 * np.maximum(1, np.abs(zz)))
                | (np.abs(zz - prev2[idx]) < 1e-13 * np.maximum(1, np.abs(zz)))
            )
            stuck_row = stuck.any(axis=1) & ~esc
            code[idx[stuck_row]] = OTHER_BOUNDED
        else:
            stuck_row = np.zeros(len(idx), dtype=bool)
        done = captured[idx].all(axis=1) & ~esc & ~stuck_row
        code[idx[done]] = CAPTURE
        fin = esc | done | stuck_row
        active[idx[fin]] = False
        if n == budget:
            break
        keep = idx[~fin]
        prev2[keep] = prev[keep]
        prev[keep] = z[keep]
        z[keep] = _horner(co[keep][:, None, :], z[keep])
    ent = np.where(captured.all(axis=1), entry.max(axis=1), -1)
    tg = np.where(captured.all(axis=1), tgt[:, -1], -1)
    return {"code": code, "entry": ent, "target": tg, "budget": budget}


# -- scalar classification --------------------------------------------------


def _trap_scalar(f: P.MarkedPolynomial, v: complex, factor=0.5, n_check=64) -> float:
    co = np.array([f.coeffs], dtype=complex)
    r = float(trap_radius(co, np.array([v]), factor)[0])
    # sample check of the contraction on the trap circle
    ang = np.exp(2j * np.pi * np.arange(n_check) / n_check)
    zs = v + r * ang
    assert np.all(np.abs(f.eval_array(zs) - v) <= factor * r * (1 + 1e-12))
    return r


def classify(
    f: P.MarkedPolynomial,
    free_crits: Sequence[int],
    targets: Sequence[int],
    budget: int = BUDGET,
    cycle_window: int = 8,
) -> Classification:
    """Classify one polynomial by the fate of its free critical orbits.

    ``targets`` are indices of marked critical points that are superattracting
    fixed points.  An orbit that settles (to rounding) on a cycle of period
    at most ``cycle_window`` outside the traps is reported OtherBounded with
    the cycle multiplier.
    """
    tv = [f.crit[i] for i in targets]
    tr = [_trap_scalar(f, v) for v in tv]
    Resc = R.escape_radius(f)
    entries, tgts = [], []
    for i in free_crits:
        z = f.crit[i]
        hist: list[complex] = []
        res = None
        for n in range(budget + 1):
            for t, (v, r) in enumerate(zip(tv, tr)):
                if abs(z - v) <= r:
                    res = ("cap", n, targets[t])
                    break
            if res:
                break
            if abs(z) > Resc:
                return Classification("Escape", budget=budget, detail={"critical": i, "n": n})
            for k, w in enumerate(reversed(hist[-cycle_window:]), start=1):
                if abs(z - w) < 1e-13 * max(1.0, abs(z)):
                    try:
                        x = R.polish_periodic(f, z, k)
                        lam = abs(R.multiplier(f, x, k))
                    except Exception:
                        lam = float("nan")
                    # a cycle outside every trap: bounded but not captured
                    return Classification(
                        "OtherBounded",
                        budget=budget,
                        detail={"critical": i, "cycle_point": x, "period": k, "multiplier": lam},
                    )
            hist.append(z)
            if n < budget:
                z = f.eval(z)
        if res is None:
            return Classification("Unresolved", budget=budget, detail={"critical": i})
        entries.append(res[1])
        tgts.append(res[2])
    return Classification(
        "Capture",
        target=tgts[-1] if tgts else None,
        entry_time=max(entries) if entries else 0,
        budget=budget,
        detail={"entries": entries, "targets": tgts},
    )


def classify_family(family_id: str, param, budget: int = BUDGET) -> Classification:
    f = P.chart(family_id, param).realization
    return classify(f, P.family_free_critical_indices(family_id), family_targets(family_id), budget)


# -- raster -----------------------------------------------------------------


@dataclass
class ScanRaster:
    family_id: str
    window: tuple  # (re_min, re_max, im_min, im_max)
    resolution: tuple  # (nx, ny)
    codes: np.ndarray  # (ny, nx) int8
    entry: np.ndarray
    budget: int
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        header = {
            "schema": 1,
            "family": self.family_id,
            "window": list(self.window),
            "resolution": list(self.resolution),
            "budget": self.budget,
            "provenance": self.provenance,
            "codes": base64.b64encode(self.codes.astype(np.int8).tobytes()).decode("ascii"),
            "entry": base64.b64encode(self.entry.astype(np.int32).tobytes()).decode("ascii"),
        }
        return json.dumps(header, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScanRaster":
        h = json.loads(text)
        nx, ny = h["resolution"]
        codes = np.frombuffer(base64.b64decode(h["codes"]), dtype=np.int8).reshape(ny, nx)
        entry = np.frombuffer(base64.b64decode(h["entry"]), dtype=np.int32).reshape(ny, nx)
        return cls(h["family"], tuple(h["window"]), (nx, ny), codes.copy(), entry.copy(), h["budget"], h["provenance"])


def pixel_grid(window, resolution) -> np.ndarray:
    """Pixel-center complex grid (ny, nx), row 0 at the top."""
    x0, x1, y0, y1 = window
    nx, ny = resolution
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate window")
    xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
    ys = y1 - (np.arange(ny) + 0.5) * (y1 - y0) / ny
    return xs[None, :] + 1j * ys[:, None]


def scan(family_id: str, window, resolution, budget: int = 1000, rows: Sequence[int] | None = None) -> ScanRaster:
    """Classification raster of a one-parameter family over a window."""
    grid = pixel_grid(window, resolution)
    nx, ny = resolution
    rows = range(ny) if rows is None else rows
    codes = np.zeros((ny, nx), dtype=np.int8)
    entry = np.full((ny, nx), -1, dtype=np.int32)
    for r in rows:
        res = classify_array(family_id, grid[r], budget)
        codes[r] = res["code"]
        entry[r] = res["entry"]
    return ScanRaster(
        family_id, tuple(window), tuple(resolution), codes, entry, budget, {"trap_factor": 0.5, "escape": "2(1+sum|a_k|)"}
    )


# -- component boundary -----------------------------------------------------


@dataclass
class ComponentBoundary:
    family_id: str
    center: complex
    angles: np.ndarray  # ray angles in turns
    inner: np.ndarray  # last parameter classified Capture
    outer: np.ndarray  # first parameter classified otherwise
    tol: float
    target: int
    warnings: list = field(default_factory=list)

    @property
    def samples(self) -> np.ndarray:
        return 0.5 * (self.inner + self.outer)

    @property
    def widths(self) -> np.ndarray:
        return np.abs(self.outer - self.inner)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": 1,
                "family": self.family_id,
                "center": [self.center.real, self.center.imag],
                "tol": self.tol,
                "rays": [
                    [float(a), z.real, z.imag, float(w)] for a, z, w in zip(self.angles, self.samples, self.widths)
                ],
            }
        )


def _capture_pred(family_id, params, target, budget):
    res = classify_array(family_id, params, budget)
    return (res["code"] == CAPTURE) & (res["target"] == target)


def _bisect_rays(family_id, center, dirs, lo, hi, tol, target, budget):
    lo = lo.copy()
    hi = hi.copy()
    while True:
        open_ = (hi - lo) > tol
        if not open_.any():
            break
        idx = np.nonzero(open_)[0]
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = _capture_pred(family_id, center + mid * dirs[idx], target, budget)
        lo[idx] = np.where(ok, mid, lo[idx])
        hi[idx] = np.where(ok, hi[idx], mid)
    return lo, hi


def _first_exit(family_id, center, dirs, r0, step, r_max, target, budget):
    """March each ray outward from radius r0 until the capture predicate fails.

    Returns (last captured radius, first failing radius) per ray.
    """
    n = len(dirs)
    r0 = np.broadcast_to(np.asarray(r0, dtype=float), (n,)).copy()
    lo = r0.copy()
    hi = np.full(n, np.nan)
    k = 0
    while np.isnan(hi).any():
        k += 1
        idx = np.nonzero(np.isnan(hi))[0]
        r = r0[idx] + k * step
        if r.min() > r_max:
            raise RayNeverExits(f"{len(idx)} rays still captured at radius {r_max}")
        ok = _capture_pred(family_id, center + r * dirs[idx], target, budget)
        lo[idx[ok]] = r[ok]
        hi[idx[~ok]] = r[~ok]
    return lo, hi


def free_relation_flags(family_id: str, params, eps: float = 1e-6, n_iter: int = 64) -> np.ndarray:
    """True where a free critical orbit passes within ``eps`` of a non-target
    critical point within ``n_iter`` steps (a free critical relation)."""
    co, crit = family_arrays(family_id, params)
    targets = family_targets(family_id)
    others = [k for k in range(crit.shape[1]) if k not in targets]
    free = P.family_free_critical_indices(family_id)
    flags = np.zeros(len(co), dtype=bool)
    z = crit[:, free].copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_iter):
            z = _horner(co[:, None, :], z)
            d = np.abs(z[:, :, None] - crit[:, None, others])
            flags |= np.any(d < eps, axis=(1, 2))
    return flags


def component_boundary(
    family_id: str,
    center: complex,
    n_rays: int = 256,
    tol: float = 1e-6,
    r_max: float = 2.0,
    march_step: float | None = None,
    budget: int = 2000,
) -> ComponentBoundary:
    """Radial bisection of the capture component containing ``center``.

    A coarse march (step r_max/400) locates the component scale; each ray is
    then marched outward from 0.9x the smallest coarse exit radius with the
    fine step (default 1e-4 of that radius) up to the first parameter not
    captured by the center's target, and the last bracket is bisected to
    ``tol``.  The fine march keeps the bisection from jumping into the small
    capture components that accumulate on the boundary.
    """
    c0 = classify_array(family_id, np.array([center]), budget)
    if c0["code"][0] != CAPTURE:
        raise ValueError("center does not classify Capture")
    target = int(c0["target"][0])
    angles = np.arange(n_rays) / n_rays
    dirs = np.exp(2j * np.pi * angles)
    _, coarse_hi = _first_exit(family_id, center, dirs, 0.0, r_max / 400, r_max, target, budget)
    r_in = 0.9 * (coarse_hi.min() - r_max / 400)
    if march_step is None:
        march_step = 1e-4 * coarse_hi.min()
    lo, hi = _first_exit(family_id, center, dirs, r_in, march_step, r_max, target, budget)
    lo, hi = _bisect_rays(family_id, center, dirs, lo, hi, tol, target, budget)
    warn = []
    near = np.nonzero(free_relation_flags(family_id, center + lo * dirs))[0]
    for i in near:
        warn.append(f"ray {i}: sample near a free critical relation; bisection may over-approximate the boundary")
    if family_id in ("Peanut2Plus", "AirplaneQuartic"):
        warn.append("two-parameter family: rays are taken in the first coordinate only")
    cb = ComponentBoundary(family_id, complex(center), angles, center + lo * dirs, center + hi * dirs, tol, target, warn)
    cb.march_step = march_step
    return cb


def densify_boundary(
    cb: ComponentBoundary, chord: float, budget: int = 2000, max_rounds: int = 12, march_step: float | None = None
) -> ComponentBoundary:
    """Insert midpoint-angle rays until consecutive samples are closer than ``chord``.

    A new ray marches outward from 0.98x the smaller radius of its two
    neighbours with the fine step, then bisects, as in component_boundary.
    """
    step = march_step or getattr(cb, "march_step", None) or chord / 4
    ang = cb.angles.copy()
    inner, outer = cb.inner.copy(), cb.outer.copy()
    for _ in range(max_rounds):
        s = 0.5 * (inner + outer)
        gaps = np.abs(np.roll(s, -1) - s)
        need = np.nonzero(gaps > chord)[0]
        if len(need) == 0:
            break
        nb = (need + 1) % len(ang)
        a_next = np.where(need + 1 < len(ang), ang[nb], ang[0] + 1.0)
        new_ang = (0.5 * (ang[need] + a_next)) % 1.0
        dirs = np.exp(2j * np.pi * new_ang)
        r0 = 0.98 * np.minimum(np.abs(inner[need] - cb.center), np.abs(inner[nb] - cb.center))
        lo, hi = _first_exit(cb.family_id, cb.center, dirs, r0, step, 10 * np.abs(outer - cb.center).max(), cb.target, budget)
        lo, hi = _bisect_rays(cb.family_id, cb.center, dirs, lo, hi, cb.tol, cb.target, budget)
        ang = np.concatenate([ang, new_ang])
        inner = np.concatenate([inner, cb.center + lo * dirs])
        outer = np.concatenate([outer, cb.center + hi * dirs])
        order = np.argsort(ang, kind="stable")
        ang, inner, outer = ang[order], inner[order], outer[order]
    out = ComponentBoundary(cb.family_id, cb.center, ang, inner, outer, cb.tol, cb.target, list(cb.warnings))
    out.march_step = step
    return out


# -- behavior of critical orbits --------------------------------------------


def _point_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = pts.real[:, None], pts.imag[:, None]
    xa, ya = poly.real[None, :], poly.imag[None, :]
    xb, yb = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    cond = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    cross = cond & (x < xint)
    return (np.sum(cross, axis=1) % 2) == 1


def _newton_ratio_periodic(co: np.ndarray, z: np.ndarray, p: int, big: float = 1e30) -> np.ndarray:
    """(f^p(z) - z) / ((f^p)'(z) - 1), evaluated by iteration.

    Once an orbit exceeds ``big`` the tail is replaced by its monomial
    asymptotics, w_p / D_p ~ w_k / (D_k d^(p-k)), so no overflow occurs.
    """
    d = len(co) - 1
    dco = co[1:] * np.arange(1, d + 1)
    w = z.copy()
    D = np.ones_like(z)
    out = np.empty_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(p):
        fw = np.polynomial.polynomial.polyval(w, co)
        dw = np.polynomial.polynomial.polyval(w, dco)
        D = D * dw
        w = fw
        large = ~done & (np.abs(w) > big)
        if large.any():
            out[large] = w[large] / (D[large] * float(d) ** (p - k - 1))
            done |= large
            w = np.where(done, 0, w)
            D = np.where(done, 1, D)
    rest = ~done
    out[rest] = (w[rest] - z[rest]) / (D[rest] - 1)
    return out


def periodic_points(f: P.MarkedPolynomial, p: int, maxit: int = 500, tol: float = 1e-14) -> np.ndarray:
    """All d^p solutions of f^p(z) = z (periods dividing p).

    Simultaneous Aberth-Ehrlich iteration on g(z) = f^p(z) - z, with g and g'
    evaluated along the orbit rather than from the expanded coefficients of
    f^p, which are too ill-conditioned beyond small p.  Each root is finally
    polished by Newton on f^p(z) = z.
    """
    co = np.array(f.coeffs, dtype=complex)
    n = f.degree**p
    radius = 1.0 + float(np.max(np.abs(co[:-1])))  # |f(z)| > |z| outside
    k = np.arange(n)
    z = radius * 1.05 * np.exp(2j * np.pi * (k + 0.25) / n + 0.4j)
    for _ in range(maxit):
        N = _newton_ratio_periodic(co, z, p)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        S_ = np.sum(1.0 / diff, axis=1) - 1.0
        step = N / (1.0 - N * S_)
        step = np.where(np.isfinite(step), step, 0)
        z = z - step
        if np.max(np.abs(step) / np.maximum(1.0, np.abs(z))) < tol:
            break
    out = []
    for x in z:
        try:
            out.append(R.polish_periodic(f, complex(x), p))
        except Exception:
            out.append(complex(x))
    return np.array(out)


@dataclass
class BehaviorReport:
    distances: list
    multipliers_near_one: list
    violations: list
    tol: float


def behavior_check(
    f: P.MarkedPolynomial,
    free_crits: Sequence[int],
    targets: Sequence[int],
    n_iter: int = 400,
    tail: int = 20,
    tol: float = 1e-3,
    depth: int = 12,
    p_max: int = 6,
) -> BehaviorReport:
    """Distance of free critical orbit tails to the closure of the target basins.

    Each target basin is represented by its boundary samples (a closed
    polygon); points inside the polygon have distance 0.  Periodic points of
    period <= p_max are polished and their multipliers compared with 1.
    """
    basins = []
    for i in targets:
        v = f.crit[i]
        delta = R.local_degree(f, v)
        b = R.boundary_parametrization(f, v, delta, depth)
        basins.append(b.points)
    dists = []
    viol = []
    for i in free_crits:
        try:
            orb = np.array(f.orbit(f.crit[i], n_iter))
        except P.OrbitOverflow:
            viol.append(("escape", i))
            dists.append(float("inf"))
            continue
        pts = orb[-tail:]
        best = np.full(len(pts), np.inf)
        for bp in basins:
            inside = _point_in_polygon(pts, bp)
            dd = np.min(np.abs(pts[:, None] - bp[None, :]), axis=1)
            best = np.minimum(best, np.where(inside, 0.0, dd))
        dmax = float(best.max())
        dists.append(dmax)
        if dmax > tol:
            viol.append(("distance", i, dmax))
    near_one = []
    for p in range(1, p_max + 1):
        for z in periodic_points(f, p):
            lam = abs(R.multiplier(f, z, p))
            if 1 - tol <= lam <= 1 + tol:
                near_one.append((p, complex(z), lam))
    viol.extend(("indifferent", *t) for t in near_one)
    return BehaviorReport(dists, near_one, viol, tol)


# -- transversality in the airplane family ---------------------------------


def airplane_G(c1: complex, c2: complex) -> np.ndarray:
    """(G₂, G₃) = (g(c₂) - c₁, g²(c₃) - c₁) on the airplane quartic family."""
    g = P.chart("AirplaneQuartic", (c1, c2)).realization
    c3 = -c1 - c2
    return np.array([g.eval(c2) - c1, g.iterate(c3, 2) - c1])


def jacobian_G_fd(point=None, h: float = 1e-5, family: str = "AirplaneQuartic") -> np.ndarray:
    """Central-difference complex Jacobian of (G₂, G₃) in (c₁, c₂).

    A Richardson comparison against step h/2 guards against a step that is
    too large for the local curvature.
    """
    if family != "AirplaneQuartic":
        raise ValueError("only the airplane quartic family carries the G-map")
    if point is None:
        point = (-P.cbrt(2.0), P.cbrt(2.0))
    c1, c2 = complex(point[0]), complex(point[1])

    def jac(step):
        J = np.zeros((2, 2), dtype=complex)
        J[:, 0] = (airplane_G(c1 + step, c2) - airplane_G(c1 - step, c2)) / (2 * step)
        J[:, 1] = (airplane_G(c1, c2 + step) - airplane_G(c1, c2 - step)) / (2 * step)
        return J

    J1, J2 = jac(h), jac(h / 2)
    scale = max(1.0, float(np.max(np.abs(J2))))
    if np.max(np.abs(J1 - J2)) > 1e-4 * scale:
        raise StepTooLarge(f"Richardson mismatch {np.max(np.abs(J1 - J2)):.3e}")
    return (4 * J2 - J1) / 3


# -- dimension formula ------------------------------------------------------


@dataclass
class DimFormulaReport:
    lhs: DimensionEstimate
    rhs: float
    rhs_estimates: list
    gap: float
    boundary: ComponentBoundary | None = None
    rhs_params: list = field(default_factory=list)


def fatou_boundary_dimension(
    family_id: str, param, depth: int = 14, target: int | None = None, base=None
) -> DimensionEstimate:
    """Poincaré exponent of ∂U for the target fixed Fatou component of a family member."""
    f = P.chart(family_id, param).realization
    t = family_targets(family_id)[0] if target is None else target
    v = f.crit[t]
    delta = R.local_degree(f, v)
    b = R.boundary_parametrization(f, v, delta, depth)
    return poincare_exponent(b, base=base)


def dim_formula_check(
    family_id: str = "S1Cubic",
    center: complex | None = None,
    n_rays: int = 2048,
    n_boundary_samples: int = 50,
    tol: float = 1e-10,
    depth: int = 14,
    chord: float | None = 2e-6,
    budget: int = 2000,
    box_kw: dict | None = None,
    r_max: float = 0.05,
) -> DimFormulaReport:
    """Box-counting dimension of ∂H against max δ_Poin(∂U_f) over f ∈ ∂H.

    ∂H is traced by ``n_rays`` radial bisections and then densified until
    consecutive samples are closer than ``chord``; the right side samples
    ``n_boundary_samples`` of the original rays, evenly in angle.
    """
    if family_id != "S1Cubic" and center is None:
        raise ValueError("give a capture center for this family")
    if center is None:
        center = P.s1_capture_center()
    cb = component_boundary(family_id, center, n_rays, tol=tol, budget=budget, r_max=r_max)
    step = max(1, n_rays // n_boundary_samples)
    picks = cb.inner[::step][:n_boundary_samples]
    if chord is not None:
        cb = densify_boundary(cb, chord, budget)
    lhs = box_counting(cb.samples, **(box_kw or {}))
    ests = []
    for prm in picks:
        ests.append(fatou_boundary_dimension(family_id, prm, depth))
    rhs = max(e.value for e in ests)
    return DimFormulaReport(lhs, rhs, ests, abs(lhs.value - rhs), cb, [complex(p) for p in picks])


def uniform_turning_survey(
    family_id: str, params: Sequence, depth: int = 10, target: int | None = None
) -> list[float]:
    """turning_max of the target Fatou boundary for each family member."""
    out = []
    for prm in params:
        f = P.chart(family_id, prm).realization
        t = family_targets(family_id)[0] if target is None else target
        v = f.crit[t]
        b = R.boundary_parametrization(f, v, R.local_degree(f, v), depth)
        out.append(turning_max(b.points))
    return out
