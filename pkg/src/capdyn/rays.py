"""Green functions, Böttcher coordinates, external/internal rays and the
boundary parametrization of invariant superattracting basins."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ArgumentJump,
    ContinuityViolation,
    NewtonFailed,
    NoConvergence,
    NotInBasin,
    NotSuperattracting,
    PathEntersFilledSet,
    RootSelectionAmbiguous,
    Unresolved,
)
from .poly import MarkedPolynomial

TWO_PI = 2 * math.pi
R_BIG = 1e20
ETA_CRIT = 1e-10
EPS_LAND = 1e-9
LAND_WINDOW = 5
NEWTON_MAXIT = 50


class RayStatus(str, Enum):
    LANDED = "Landed"
    TRUNCATED = "Truncated"
    BIFURCATED = "Bifurcated"
    NEWTON_FAILED = "NewtonFailed"


def escape_radius(f: MarkedPolynomial) -> float:
    """Radius beyond which every orbit escapes monotonically (|f(z)| >= 2|z|)."""
    return 2.0 * (1.0 + sum(abs(c) for c in f.coeffs[:-1]))


# -- angle arithmetic -------------------------------------------------------


def as_angle(theta) -> Fraction | float:
    if isinstance(theta, Fraction):
        return theta % 1
    if isinstance(theta, int):
        return Fraction(0)
    if isinstance(theta, str):
        return Fraction(theta) % 1
    return float(theta) % 1.0


def angle_orbit(theta: Fraction, d: int) -> tuple[list[Fraction], int, int]:
    """Forward orbit of a rational angle under t -> d t.

    Returns ``(angles, preperiod, period)`` where ``angles`` lists every
    distinct angle of the orbit in order.
    """
    seen: dict[Fraction, int] = {}
    out: list[Fraction] = []
    t = theta % 1
    while t not in seen:
        seen[t] = len(out)
        out.append(t)
        t = (t * d) % 1
    q = seen[t]
    return out, q, len(out) - q


# -- Green function ---------------------------------------------------------


def green(f: MarkedPolynomial, z: complex, n_max: int = 10000) -> float:
    """Escape-rate potential ``lim d^-n log+|f^n(z)|``.

    Returns 0.0 when the orbit stays inside the escape radius for ``n_max``
    iterations.
    """
    d = f.degree
    R = escape_radius(f)
    z = complex(z)
    scale = 1.0
    for _ in range(n_max):
        a = abs(z)
        if a > R_BIG:
            return math.log(a) * scale
        if a > R:
            # escaping for sure; keep iterating to R_BIG
            pass
        z = f.eval(z)
        scale /= d
    return 0.0 if abs(z) <= R else math.log(abs(z)) * scale


def _boettcher_product(f: MarkedPolynomial, z: complex, r_valid: float) -> complex | None:
    """Exterior Böttcher coordinate for z whose whole orbit stays beyond r_valid.

    Uses the infinite product with principal roots, which is the continuous
    branch once |f(w)/w^d - 1| < 1 on the orbit.  Returns None when the orbit
    leaves the region of validity.
    """
    d = f.degree
    if abs(z) < r_valid:
        return None
    logb = cmath.log(z)
    w = z
    scale = 1.0
    for _ in range(200):
        fw = f.eval(w)
        ratio = fw / w**d
        scale /= d
        logb += cmath.log(ratio) * scale
        if abs(ratio - 1) < 1e-17 or abs(fw) > 1e30:
            break
        w = fw
    return cmath.exp(logb)


def _valid_radius(f: MarkedPolynomial) -> float:
    # |f(w)/w^d - 1| <= sum |a_k| / |w|^(d-k) <= 1/2 beyond this radius
    s = sum(abs(c) for c in f.coeffs[:-1])
    return max(4.0, 2.0 * (2 * s + 1), escape_radius(f))


# -- Newton helpers ---------------------------------------------------------


def _newton_preimage(f: MarkedPolynomial, target: complex, seed: complex, maxit: int = NEWTON_MAXIT):
    """Solve f(z) = target by Newton from ``seed``."""
    return _newton_iterate(f, 1, target, seed, maxit)


def _newton_iterate(f: MarkedPolynomial, m: int, target: complex, seed: complex, maxit: int = NEWTON_MAXIT):
    """Solve f^m(z) = target.

    Stops on a negligible step, or once the residual is at rounding level
    and has stopped decreasing.
    """
    z = seed
    best = math.inf
    floor = 8 * 2.2e-16 * max(1.0, abs(target))
    for _ in range(maxit):
        w, dw = f.iterate_deriv(z, m)
        res = abs(w - target)
        if dw == 0 or not cmath.isfinite(w):
            raise NewtonFailed("degenerate Newton step")
        if res <= floor and res >= best:
            return z
        best = min(best, res)
        step = (w - target) / dw
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            return z
    if best <= 64 * floor:
        return z
    raise NewtonFailed(f"no convergence solving f^{m}(z) = {target!r}")


def polish_periodic(f: MarkedPolynomial, z: complex, p: int, maxit: int = 100) -> complex:
    """Newton on f^p(z) - z."""
    for _ in range(maxit):
        w, dw = f.iterate_deriv(z, p)
        g = dw - 1
        if g == 0:
            raise NewtonFailed("multiplier 1 in periodic polish")
        step = (w - z) / g
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            return z
    w = f.iterate(z, p)
    if abs(w - z) < 1e-11:
        return z
    raise NewtonFailed("periodic point polish did not converge")


def multiplier(f: MarkedPolynomial, z: complex, p: int) -> complex:
    return f.iterate_deriv(z, p)[1]


# -- ray tracing ------------------------------------------------------------


@dataclass
class RayTrace:
    kind: str
    angle: Fraction | float
    potentials: np.ndarray
    points: np.ndarray
    status: RayStatus
    landing: complex | None = None
    degree: int = 2
    steps_per_level: int = 8
    # rays of the forward angle orbit, traced alongside (angle -> samples)
    companions: dict = field(default_factory=dict, repr=False)

    def functional_residual(self, f: MarkedPolynomial) -> float:
        """max |f(z(s)) - z_{dθ}(d s)| over samples whose image is stored."""
        k = self.steps_per_level
        nxt = self.companions.get(_next_angle(self.angle, self.degree))
        if nxt is None:
            return float("nan")
        img = f.eval_array(self.points[k:])
        n = min(len(img), len(nxt) - 0)
        ref = nxt[: len(self.points) - k][:n]
        return float(np.max(np.abs(img[: len(ref)] - ref))) if len(ref) else 0.0


def _next_angle(theta, d):
    if isinstance(theta, Fraction):
        return (theta * d) % 1
    return (theta * d) % 1.0


def _far_seed(f: MarkedPolynomial, theta, s: float) -> complex:
    """Point of the ray with angle theta at (large) potential s."""
    d = f.degree
    r_valid = _valid_radius(f)
    m = 0
    while d**m * s < math.log(1e12) and m < 60:
        m += 1
    if isinstance(theta, Fraction):
        ang = float((theta * d**m) % 1)
    else:
        ang = (theta * d**m) % 1.0
    W = cmath.exp(d**m * s + 1j * TWO_PI * ang)
    seed = cmath.exp(s + 1j * TWO_PI * float(theta))
    if m == 0 or abs(seed) < r_valid:
        return seed if m == 0 else _newton_iterate(f, m, W, seed)
    return _newton_iterate(f, m, W, seed)


def trace_external_ray(
    f: MarkedPolynomial,
    theta,
    s_start: float | None = None,
    steps_per_halving: int = 8,
    eps_land: float = EPS_LAND,
    max_levels: int = 400,
    polish: bool = True,
) -> RayTrace:
    """Trace the external ray of angle ``theta`` down toward the Julia set.

    The potential schedule is ``s_j = s_start * d^(-j/steps)``; for rational
    angles every new sample solves ``f(w) = z_{dθ}(d s_j)`` by Newton, seeded
    by the previous sample of the same ray.  Real (float) angles use the
    direct equation ``f^m(w) = B^{-1}(e^{d^m(s + 2πiθ)})`` instead and end in
    ``Truncated`` status.
    """
    d = f.degree
    theta = as_angle(theta)
    if s_start is None:
        s_start = math.log(4 * _valid_radius(f))
    k = steps_per_halving
    if isinstance(theta, float):
        return _trace_real_angle(f, theta, s_start, k, max_levels)

    angles, q, p = angle_orbit(theta, d)
    n_ang = len(angles)
    nxt = [(i + 1) if i + 1 < n_ang else q for i in range(n_ang)]
    pots = [s_start * d ** (-j / k) for j in range(k)]
    rays = [[_far_seed(f, a, s) for s in pots] for a in angles]

    status = RayStatus.TRUNCATED
    landing_pts: list[complex] | None = None
    j = k
    while j < k * (max_levels + 1):
        s = s_start * d ** (-j / k)
        new = []
        try:
            for i in range(n_ang):
                target = rays[nxt[i]][j - k]
                z = _newton_preimage(f, target, rays[i][j - 1])
                if abs(f.deriv(z)) < ETA_CRIT:
                    status = RayStatus.BIFURCATED
                    break
                new.append(z)
        except NewtonFailed:
            status = RayStatus.NEWTON_FAILED
            break
        if status is RayStatus.BIFURCATED:
            break
        for i in range(n_ang):
            rays[i].append(new[i])
        pots.append(s)
        j += 1
        if polish and j % k == 0 and j >= 4 * k:
            landing_pts = _polish_landings(f, rays, q, p, nxt)
            if landing_pts is not None and _stabilized(rays[0], landing_pts[0], eps_land):
                status = RayStatus.LANDED
                break
    if status is RayStatus.TRUNCATED and polish:
        landing_pts = _polish_landings(f, rays, q, p, nxt)
        if landing_pts is not None and _stabilized(rays[0], landing_pts[0], eps_land):
            status = RayStatus.LANDED
    companions = {a: np.array(r) for a, r in zip(angles, rays)}
    return RayTrace(
        kind="external",
        angle=theta,
        potentials=np.array(pots),
        points=np.array(rays[0]),
        status=status,
        landing=landing_pts[0] if (status is RayStatus.LANDED and landing_pts) else None,
        degree=d,
        steps_per_level=k,
        companions=companions,
    )


def _stabilized(samples, x, eps):
    tail = samples[-LAND_WINDOW:]
    return len(samples) >= LAND_WINDOW and max(abs(z - x) for z in tail) < eps


def _polish_landings(f, rays, q, p, nxt):
    """Landing points of every ray in the angle orbit, or None on failure."""
    n_ang = len(rays)
    out: list[complex | None] = [None] * n_ang
    try:
        for i in range(q, n_ang):
            z = rays[i][-1]
            x = polish_periodic(f, z, p)
            # accept only a landing consistent with the ray tail
            if abs(x - z) > 0.5 * max(abs(rays[i][-1] - rays[i][-2]) * 50, 1e-3) + 10 * abs(z - rays[i][-9]):
                return None
            out[i] = x
        for i in range(q - 1, -1, -1):
            out[i] = _newton_preimage(f, out[nxt[i]], rays[i][-1])
    except NewtonFailed:
        return None
    return out


def _trace_real_angle(f, theta, s_start, k, max_levels, s_floor=1e-9):
    d = f.degree
    pots, pts = [], []
    z = None
    status = RayStatus.TRUNCATED
    for j in range(k * (max_levels + 1)):
        s = s_start * d ** (-j / k)
        if s < s_floor:
            break
        m = 0
        while d**m * s < math.log(1e12):
            m += 1
        W = cmath.exp(d**m * s + 1j * TWO_PI * ((theta * d**m) % 1.0))
        seed = z if z is not None else cmath.exp(s + 1j * TWO_PI * theta)
        try:
            z = _newton_iterate(f, m, W, seed) if m else W
        except NewtonFailed:
            status = RayStatus.NEWTON_FAILED
            break
        pots.append(s)
        pts.append(z)
    return RayTrace("external", theta, np.array(pots), np.array(pts), status, None, d, k)


def landing_relation(f: MarkedPolynomial, theta1, theta2, eps: float = 1e-6, **kw) -> bool:
    """True iff the rays of angles theta1 and theta2 land at the same point."""
    r1 = trace_external_ray(f, theta1, **kw)
    r2 = r1 if as_angle(theta2) == r1.angle else trace_external_ray(f, theta2, **kw)
    if r1.status is not RayStatus.LANDED or r2.status is not RayStatus.LANDED:
        raise Unresolved(f"ray traces ended with {r1.status.value}/{r2.status.value}")
    return abs(r1.landing - r2.landing) < eps


# -- superattracting cycles and interior coordinates -----------------------


def find_superattracting_point(
    f: MarkedPolynomial,
    seed_critical_index: int,
    p: int,
    n_max: int = 10000,
    tol: float = 1e-8,
) -> complex:
    """Cycle point of the superattracting p-cycle attracting a critical orbit.

    Returns the cycle point nearest to the seeding critical point.
    """
    c = f.crit[seed_critical_index]
    z = c
    R = escape_radius(f)
    for n in range(n_max):
        zp = f.iterate(z, p)
        if abs(zp) > R:
            raise NoConvergence("critical orbit escapes")
        if abs(zp - z) < 1e-12 * max(1.0, abs(z)):
            break
        z = zp
    else:
        raise NoConvergence(f"critical orbit not periodic after {n_max} iterations")
    z = polish_periodic(f, z, p)
    cycle = [z]
    for _ in range(p - 1):
        cycle.append(f.eval(cycle[-1]))
    z = min(cycle, key=lambda w: abs(w - c))
    lam = multiplier(f, z, p)
    if abs(lam) >= tol:
        raise NotSuperattracting(f"multiplier {abs(lam):.3e} is not zero", z, lam)
    return z


def local_normalization(F: MarkedPolynomial, v: complex, delta: int) -> complex:
    """Constant c with B(z) ~ c (z - v) near the superattracting fixed point v.

    ``c = A^(1/(delta-1))`` (principal branch) where A is the order-delta
    Taylor coefficient of F at v.
    """
    tay = F.taylor(v)
    A = tay[delta]
    if A == 0:
        raise ValueError("vanishing leading local coefficient")
    return complex(cmath.exp(cmath.log(A) / (delta - 1)))


def local_degree(F: MarkedPolynomial, v: complex, tol: float = 1e-8) -> int:
    tay = F.taylor(v)
    for k in range(1, len(tay)):
        if abs(tay[k]) > tol * max(1.0, max(abs(t) for t in tay)):
            return k
    return len(tay) - 1


def interior_boettcher_abs(
    F: MarkedPolynomial, v: complex, delta: int, z: complex, n_max: int = 10000, near: float = 1e-12
) -> float:
    """|B_{F,v}(z)| for z in the immediate basin of the superattracting fixed point v."""
    c = local_normalization(F, v, delta)
    w = complex(z)
    scale = 1.0
    for _ in range(n_max):
        r = abs(w - v)
        if r == 0:
            return 0.0
        if r < near:
            return math.exp(scale * math.log(abs(c) * r))
        w = F.eval(w)
        scale /= delta
        if not abs(w) < 1e150:
            break
    raise NotInBasin(f"orbit of {z!r} does not converge to {v!r}")


# -- internal rays and boundary parametrization -----------------------------


def _internal_seed(F, v, c, delta, t, u):
    """Point of the internal ray of angle t at internal potential u (>0)."""
    m = 0
    while delta**m * u < 9.0 and m < 60:
        m += 1
    ang = (t * delta**m) % 1 if isinstance(t, Fraction) else (t * delta**m) % 1.0
    W = v + cmath.exp(-(delta**m) * u + 1j * TWO_PI * float(ang)) / c
    seed = v + cmath.exp(-u + 1j * TWO_PI * float(t)) / c
    return _newton_iterate(F, m, W, seed) if m else seed


def trace_internal_rays(
    F: MarkedPolynomial,
    v: complex,
    delta: int,
    angles: Sequence[Fraction],
    u_start: float = 8.0,
    steps: int = 8,
    levels: int = 40,
) -> dict:
    """Trace a forward-invariant set of rational internal angles together.

    ``angles`` must be closed under t -> delta t.  Returns angle -> samples
    (from deep inside toward the boundary).
    """
    c = local_normalization(F, v, delta)
    angles = [Fraction(a) % 1 for a in angles]
    index = {a: i for i, a in enumerate(angles)}
    nxt = []
    for a in angles:
        b = (a * delta) % 1
        if b not in index:
            raise ValueError("angle set is not forward invariant")
        nxt.append(index[b])
    rays = [[_internal_seed(F, v, c, delta, a, u_start * delta ** (-j / steps)) for j in range(steps)] for a in angles]
    for j in range(steps, steps * (levels + 1)):
        new = [_newton_preimage(F, rays[nxt[i]][j - steps], rays[i][j - 1]) for i in range(len(angles))]
        for i, z in enumerate(new):
            rays[i].append(z)
    return {a: np.array(r) for a, r in zip(angles, rays)}


@dataclass
class BoundarySamples:
    poly: MarkedPolynomial
    center: complex
    local_degree: int
    depth: int
    points: np.ndarray
    base_angle_offset: float = 0.0
    levels: list = field(default_factory=list, repr=False)

    def angle_points(self, level: int) -> np.ndarray:
        """Samples x(j/δ^level), j < δ^level (a stride view of the table)."""
        if level > self.depth:
            raise ValueError("level exceeds depth")
        return self.points[:: self.local_degree ** (self.depth - level)]

    def functional_residual(self) -> float:
        n = len(self.points)
        img = self.poly.eval_array(self.points)
        idx = (np.arange(n) * self.local_degree) % n
        return float(np.max(np.abs(img - self.points[idx])))


def _catmull_rom(p0, p1, p2, p3, r):
    r2 = r * r
    r3 = r2 * r
    return 0.5 * ((2 * p1) + (-p0 + p2) * r + (2 * p0 - 5 * p1 + 4 * p2 - p3) * r2 + (-p0 + 3 * p1 - 3 * p2 + p3) * r3)


def _batched_roots(F: MarkedPolynomial, targets: np.ndarray) -> np.ndarray:
    """All roots of F(y) = target for every target (shape (N, D))."""
    coeffs = np.array(F.coeffs, dtype=complex)
    D = len(coeffs) - 1
    N = len(targets)
    comp = np.zeros((N, D, D), dtype=complex)
    if D > 1:
        comp[:, 1:, :-1] = np.eye(D - 1)
    low = np.broadcast_to(coeffs[:-1], (N, D)).copy()
    low[:, 0] -= targets
    comp[:, :, -1] = -low
    return np.linalg.eigvals(comp)


def _newton_polish_array(F, y, targets, iters=3):
    for _ in range(iters):
        w, dw = F.eval_deriv_array(y)
        ok = dw != 0
        y = np.where(ok, y - (w - targets) / np.where(ok, dw, 1), y)
    return y


def _bootstrap_level(F, v, delta, n0, ray_levels):
    """Landing points of the internal rays of angles j/δ^n0."""
    N0 = delta**n0
    angles = [Fraction(j, N0) for j in range(N0)]
    rays = trace_internal_rays(F, v, delta, angles, levels=ray_levels)
    x = np.zeros(N0, dtype=complex)
    # landing points in order of generation: 0 first, then preimages
    x[0] = polish_periodic(F, rays[angles[0]][-1], 1)
    done = {0}
    gen = {0}
    while len(done) < N0:
        nxt_gen = []
        for j in range(N0):
            if j not in done and (j * delta) % N0 in gen:
                x[j] = _newton_preimage(F, x[(j * delta) % N0], rays[angles[j]][-1])
                nxt_gen.append(j)
        if not nxt_gen:
            raise NoConvergence("internal-ray bootstrap failed to close the angle tree")
        done.update(nxt_gen)
        gen = set(nxt_gen)
    return x


def _refine_level(F, prev, delta, level, kappa, ambiguity):
    """Fill level+1 from level by nearest-to-predictor preimage selection."""
    n_prev = len(prev)
    n_new = n_prev * delta
    new = np.empty(n_new, dtype=complex)
    new[::delta] = prev
    j = np.arange(n_new)
    mask = (j % delta) != 0
    jj = j[mask]
    i = jj // delta
    r = (jj % delta) / delta
    pred = _catmull_rom(prev[(i - 1) % n_prev], prev[i], prev[(i + 1) % n_prev], prev[(i + 2) % n_prev], r)
    targets = prev[jj % n_prev]
    roots = _batched_roots(F, targets)
    dist = np.abs(roots - pred[:, None])
    order = np.argsort(dist, axis=1)
    rows = np.arange(len(jj))
    d1 = dist[rows, order[:, 0]]
    d2 = dist[rows, order[:, 1]] if roots.shape[1] > 1 else np.full(len(jj), np.inf)
    spacing = np.abs(prev[(i + 1) % n_prev] - prev[i])
    bad = (d2 - d1) < ambiguity * spacing
    if np.any(bad):
        raise RootSelectionAmbiguous(f"{int(bad.sum())} ambiguous preimage selections at level {level + 1}", level + 1)
    chosen = roots[rows, order[:, 0]]
    new[mask] = _newton_polish_array(F, chosen, targets)
    gaps = np.abs(np.roll(new, -1) - new)
    if gaps.max() > kappa * np.abs(np.roll(prev, -1) - prev).max():
        raise ContinuityViolation(f"adjacent samples jump at level {level + 1}", level + 1)
    return new


def boundary_parametrization(
    F: MarkedPolynomial,
    v: complex,
    delta: int,
    depth: int,
    t0: float = 0.0,
    kappa: float = 8.0,
    bootstrap_depth: int | None = None,
    ambiguity: float = 0.25,
    ray_levels: int = 40,
    max_bootstrap: int = 1024,
) -> BoundarySamples:
    """Sample ∂U_v at the angles j/δ^depth of the conjugacy F|∂U ~ m_δ.

    v must be a superattracting fixed point of F with local degree delta.
    Levels up to ``bootstrap_depth`` (default: δ^n <= 64) are landing points
    of internal rays; deeper levels pick, for each target, the preimage
    nearest to a Catmull-Rom predictor interpolated from the coarser level.
    When a selection is ambiguous at some level, the internal-ray bootstrap
    is redone down to that level (as long as it has at most ``max_bootstrap``
    angles) before giving up.
    """
    if bootstrap_depth is None:
        bootstrap_depth = 1
        while delta ** (bootstrap_depth + 1) <= 64:
            bootstrap_depth += 1
    n0 = min(depth, bootstrap_depth)
    while True:
        levels = [_bootstrap_level(F, v, delta, n0, ray_levels)]
        try:
            for level in range(n0, depth):
                levels.append(_refine_level(F, levels[-1], delta, level, kappa, ambiguity))
            break
        except (RootSelectionAmbiguous, ContinuityViolation) as err:
            if delta**err.depth > max_bootstrap or err.depth <= n0:
                raise
            n0 = err.depth
    return BoundarySamples(F, v, delta, depth, levels[-1], float(t0), levels)


# -- exterior angles along paths --------------------------------------------


def external_angle(f: MarkedPolynomial, z: complex, steps: int = 8) -> float:
    """Exterior Böttcher argument (in turns) of a point outside K(f).

    The external ray through z is followed outward by Newton continuation on
    ``f^m(w) = f^m(z) e^{d^m (σ - s)}`` until it reaches the region where the
    product formula for B is single valued.
    """
    d = f.degree
    s = green(f, z)
    if s <= 0:
        raise PathEntersFilledSet(f"{z!r} is in the filled Julia set")
    r_valid = _valid_radius(f)
    m = 0
    w = complex(z)
    while True:
        zm = f.iterate(w, m)
        if abs(zm) >= 1e3 * r_valid:
            break
        m += 1
        if m > 200:
            raise Unresolved("orbit too slow to escape")
    base = f.iterate(complex(z), m)
    s_target = math.log(4 * r_valid) + 1.0
    w = complex(z)
    sigma = s
    b = _boettcher_product(f, w, r_valid)
    while b is None:
        sigma_next = min(sigma * d ** (1 / steps), sigma + 0.25) if sigma < s_target else sigma + 0.25
        target = base * cmath.exp(d**m * (sigma_next - s))
        w = _newton_iterate(f, m, target, w)
        sigma = sigma_next
        b = _boettcher_product(f, w, r_valid)
        if sigma > 50:
            raise Unresolved("outward continuation did not reach the product-formula region")
    return (cmath.phase(b) / TWO_PI) % 1.0


def _angle_candidates(f, z, r_valid):
    """(principal angle, ambiguity spacing) for arg B(z) modulo 1/d^n."""
    d = f.degree
    n = 0
    w = complex(z)
    while True:
        b = _boettcher_product(f, w, r_valid)
        if b is not None:
            break
        w = f.eval(w)
        n += 1
        if n > 200:
            raise PathEntersFilledSet(f"{z!r} does not escape")
    return (cmath.phase(b) / TWO_PI) % 1.0, n


def angle_of_path(f: MarkedPolynomial, path: Sequence[complex]) -> float:
    """External angle θ(K(f), γ) of a path landing on K(f).

    The argument of the exterior Böttcher coordinate is continued along the
    samples; the angle at the last sample is returned in [0, 1).
    """
    d = f.degree
    r_valid = _valid_radius(f)
    path = [complex(z) for z in path]
    for z in path:
        if green(f, z) <= 0:
            raise PathEntersFilledSet(f"path sample {z!r} is in the filled Julia set")
    theta = external_angle(f, path[0])
    for z in path[1:]:
        phi, n = _angle_candidates(f, z, r_valid)
        period = d**n
        # candidates (phi + k)/d^n, pick nearest to current theta (mod 1)
        k = round((theta * period - phi))
        cand = (phi + k) / period
        err = abs(cand - theta)
        if err > 0.25 / period:
            raise ArgumentJump(f"angle step {err:.3e} exceeds a quarter of 1/d^{n}")
        theta = cand
    return theta % 1.0


# -- expansion along rays ---------------------------------------------------


@dataclass
class RayExpansion:
    min_derivative: float
    landing_derivative: float
    landing_multiplier: float
    samples_used: int


def _log_abs_deriv_iterate(f, z, n, cap=1e100):
    """log|(f^n)'(z)|; truncated (a lower bound) once the orbit passes ``cap``."""
    acc = 0.0
    for _ in range(n):
        dz = f.deriv(z)
        if dz == 0:
            return -math.inf
        acc += math.log(abs(dz))
        z = f.eval(z)
        if abs(z) > cap:
            break
    return acc


def expansion_along_ray(f: MarkedPolynomial, theta, n: int, trace: RayTrace | None = None) -> RayExpansion:
    """Minimum of |(g^n)'| over the sampled closed ray, g = f^-q ∘ f^p ∘ f^q."""
    theta = as_angle(theta)
    if not isinstance(theta, Fraction):
        raise ValueError("expansion along a ray needs a rational angle")
    d = f.degree
    if trace is None:
        trace = trace_external_ray(f, theta)
    if trace.status is not RayStatus.LANDED:
        raise Unresolved(f"ray ended with {trace.status.value}")
    _, q, p = angle_orbit(theta, d)
    N = n * p
    k = trace.steps_per_level
    pts = trace.points
    x = trace.landing
    vals = []
    start = N * k if q > 0 else 0
    for j in range(start, len(pts)):
        z = pts[j]
        lg = _log_abs_deriv_iterate(f, z, N + q)
        if q > 0:
            lg -= _log_abs_deriv_iterate(f, pts[j - N * k], q)
        vals.append(lg)
    lg_land = _log_abs_deriv_iterate(f, x, N + q) - (_log_abs_deriv_iterate(f, x, q) if q else 0.0)
    vals.append(lg_land)
    # landing cycle multiplier of the eventual periodic point
    y = f.iterate(x, q)
    per = _period_of(f, y, p)
    lam = abs(multiplier(f, y, per))
    return RayExpansion(
        min_derivative=math.exp(min(vals)),
        landing_derivative=math.exp(lg_land),
        landing_multiplier=lam,
        samples_used=len(vals),
    )


def _period_of(f, y, p, tol=1e-9):
    for k in range(1, p + 1):
        if p % k == 0 and abs(f.iterate(y, k) - y) < tol:
            return k
    return p
