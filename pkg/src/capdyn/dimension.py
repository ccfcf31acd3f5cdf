"""Dimension estimators: Poincaré exponent on invariant Fatou boundaries, box
counting, turning of sampled curves, Mori bi-Hölder checks and a
one-parameter transfer demo on the middle-thirds Cantor set."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, special, stats

from .errors import (
    BracketFailure,
    DegenerateChord,
    DepthInsufficient,
    DerivativeUnderflow,
    ScaleRangeTooNarrow,
)
from .rays import BoundarySamples

EPS_DER = 1e-12
T_TOL = 1e-6


@dataclass
class DimensionEstimate:
    value: float
    method: str  # "PoincareExponent" | "BoxCounting"
    uncertainty: float
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """Per-level diagnostics as CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf)
        if self.method == "PoincareExponent":
            w.writerow(["n", "t_n", "log_P_n_at_t_n"])
            for row in zip(self.diagnostics["levels"], self.diagnostics["t_n"], self.diagnostics["log_P"]):
                w.writerow([row[0], repr(row[1]), repr(row[2])])
        else:
            w.writerow(["log_inv_eps", "log_count"])
            for row in zip(self.diagnostics["log_inv_eps"], self.diagnostics["log_count"]):
                w.writerow([repr(row[0]), repr(row[1])])
        return buf.getvalue()


# -- Poincaré sums ----------------------------------------------------------


def _base_index(b: BoundarySamples, base: tuple[int, int] | None) -> tuple[int, int]:
    """Base angle k/δ^m as (k, m); default 1/δ² (off the fixed point x(0))."""
    if base is None:
        base = (1, 2)
    k, m = base
    if m > b.depth:
        raise ValueError("base angle finer than the sampled depth")
    return k % b.local_degree**m, m


def log_derivative_sums(b: BoundarySamples, n: int, base: tuple[int, int] | None = None) -> np.ndarray:
    """log|(F^n)'(y)| for every y in F^-n(x(t0)) ∩ ∂U, t0 = k/δ^m.

    The preimages are the samples x((t0 + j)/δ^n) and their forward orbits
    stay on the stored grid, so the chain rule runs over table lookups.
    """
    k, m = _base_index(b, base)
    delta = b.local_degree
    N = len(b.points)
    if m + n > b.depth:
        raise ValueError(f"level n={n} needs depth {m + n}, samples have {b.depth}")
    dF = np.abs(b.poly.eval_deriv_array(b.points)[1])
    j = np.arange(delta**n, dtype=np.int64)
    idx = (k + j * delta**m) * delta ** (b.depth - m - n)
    acc = np.zeros(len(idx))
    for i in range(n):
        vals = dF[(idx * delta**i) % N]
        if vals.min() < EPS_DER:
            raise DerivativeUnderflow(f"|F'| = {vals.min():.3e} along a preimage orbit")
        acc += np.log(vals)
    return acc


def poincare_terms(b: BoundarySamples, t: float, n: int, base: tuple[int, int] | None = None) -> float:
    """P_n(x, t) = Σ |(F^n)'(y)|^-t over the δ^n boundary preimages y of x."""
    return float(np.exp(special.logsumexp(-t * log_derivative_sums(b, n, base))))


def _zero_of(fn, lo, hi, tol):
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise BracketFailure(f"no sign change on [{lo}, {hi}] ({flo:.3g}, {fhi:.3g})")
    return optimize.brentq(fn, lo, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps)


def poincare_exponent(
    b: BoundarySamples,
    n_levels: Sequence[int] | None = None,
    t_bracket: tuple[float, float] = (0.0, 2.0),
    tol: float = T_TOL,
    base: tuple[int, int] | None = None,
    estimator: str = "ratio",
) -> DimensionEstimate:
    """Zero of the Poincaré growth rate on ∂U.

    ``estimator="mean"`` solves C_n(t) = (1/n) log P_n(t) = 0.  Its bias is
    O(1/n) from the bounded-distortion constant.  ``estimator="ratio"``
    (default) solves log(P_n / P_{n-1}) = 0, whose growth rate is the same
    but whose bias decays geometrically.  The reported uncertainty is
    |t_n - t_{n-1}| (floored at ``tol``).
    """
    k, m = _base_index(b, base)
    if n_levels is None:
        n_levels = list(range(max(2, b.depth - m - 8), b.depth - m + 1))
    n_levels = sorted(n_levels)
    lo, hi = t_bracket
    logd = math.log(b.local_degree)
    sums = {}
    need = set(n_levels)
    if estimator == "ratio":
        need |= {n - 1 for n in n_levels}
    for n in sorted(need):
        sums[n] = log_derivative_sums(b, n, (k, m)) if n > 0 else np.zeros(1)

    def logP(n, t):
        return float(special.logsumexp(-t * sums[n]))

    ts, lps, curves = [], [], []
    for n in n_levels:
        if estimator == "ratio":
            fn = lambda t, n=n: logP(n, t) - logP(n - 1, t)
        elif estimator == "mean":
            fn = lambda t, n=n: logP(n, t) / n
        else:
            raise ValueError(f"unknown estimator {estimator!r}")
        tn = _zero_of(fn, lo, hi, tol)
        ts.append(tn)
        lps.append(logP(n, tn))
        grid = np.linspace(lo, hi, 9)
        curves.append([logP(n, t) / n for t in grid])
    unc = max(abs(ts[-1] - ts[-2]), tol) if len(ts) > 1 else max(1.0 / n_levels[-1], tol)
    lam_max = float(np.max(np.abs(b.poly.eval_deriv_array(b.points)[1])))
    return DimensionEstimate(
        value=float(ts[-1]),
        method="PoincareExponent",
        uncertainty=float(unc),
        diagnostics={
            "levels": list(n_levels),
            "t_n": [float(t) for t in ts],
            "log_P": [float(v) for v in lps],
            "bracket": [float(lo), float(hi)],
            "C_n_grid": np.linspace(lo, hi, 9).tolist(),
            "C_n_curve": curves,
            "log_delta": logd,
            "lambda_max": lam_max,
            "estimator": estimator,
            "base_angle": [k, m],
        },
    )


# -- box counting -----------------------------------------------------------

_OFFSETS = ((0.0, 0.0), (0.5, 0.5), (0.25, 0.75), (0.75, 0.25))


def box_counts(points, eps: float, offsets=_OFFSETS) -> float:
    """Mean over fixed grid offsets of the number of occupied eps-boxes."""
    pts = np.asarray(points, dtype=complex).ravel()
    x = pts.real
    y = pts.imag
    out = []
    for ox, oy in offsets:
        ix = np.floor(x / eps + ox).astype(np.int64)
        iy = np.floor(y / eps + oy).astype(np.int64)
        ix -= ix.min()
        iy -= iy.min()
        key = ix * (int(iy.max()) + 1) + iy
        out.append(len(np.unique(key)))
    return float(np.mean(out))


def box_counting(
    points,
    scale_range: tuple[float, float] | None = None,
    fit: str = "ols",
    n_scales: int | None = None,
    min_decades: float = 2.0,
    base: float = 2.0,
) -> DimensionEstimate:
    """Box-counting dimension by least squares of log N(ε) on log(1/ε).

    ``scale_range=(eps_max, eps_min)``; by default eps_max is a quarter of the
    set diameter and eps_min is the scale where the count reaches 1/16 of the
    number of points (beyond which a finite sample saturates).
    """
    pts = np.asarray(points, dtype=complex).ravel()
    if len(pts) < 1:
        raise ValueError("empty point set")
    span = max(np.ptp(pts.real), np.ptp(pts.imag))
    if span == 0:
        # a single point: N(ε) = 1 at every scale
        return DimensionEstimate(0.0, "BoxCounting", 1e-12, {"log_inv_eps": [], "log_count": [], "singleton": True})
    if scale_range is None:
        eps_max = span / 4
        eps = eps_max
        cap = max(len(pts) / 16, 8)
        while box_counts(pts, eps / base, offsets=_OFFSETS[:1]) < cap and eps > span * 1e-12:
            eps /= base
        eps_min = eps
    else:
        eps_max, eps_min = scale_range
    if eps_min >= eps_max:
        raise ScaleRangeTooNarrow("empty scale range")
    decades = math.log10(eps_max / eps_min)
    if decades < 1.0:
        raise ScaleRangeTooNarrow(f"scale range spans only {decades:.2f} decades")
    if n_scales is None:
        n_scales = int(round(math.log(eps_max / eps_min, base))) + 1
    scales = np.geomspace(eps_max, eps_min, n_scales)
    counts = np.array([box_counts(pts, e) for e in scales])
    lx = np.log(1 / scales)
    ly = np.log(counts)
    if fit != "ols":
        raise ValueError(f"unknown fit {fit!r}")
    reg = stats.linregress(lx, ly)
    unc = float(max(reg.stderr, 1e-12)) if n_scales > 2 else 1e-12
    # stability: drop finest scale
    drop = None
    if n_scales > 3:
        drop = float(stats.linregress(lx[:-1], ly[:-1]).slope)
    return DimensionEstimate(
        value=float(reg.slope),
        method="BoxCounting",
        uncertainty=unc,
        diagnostics={
            "log_inv_eps": lx.tolist(),
            "log_count": ly.tolist(),
            "residual": float(np.sqrt(np.mean((ly - (reg.intercept + reg.slope * lx)) ** 2))),
            "decades": decades,
            "narrow": decades < min_decades,
            "slope_without_finest": drop,
            "unstable": drop is not None and abs(drop - reg.slope) > max(unc, 0.02),
        },
    )


# -- turning ----------------------------------------------------------------


def turning_max(curve, return_pair: bool = False):
    """max over sample pairs of min(diam of the two arcs)/|z_i - z_j|.

    Arc diameters satisfy D(i, L) = max(D(i, L-1), D(i+1, L-1), |z_i - z_{i+L}|)
    which gives an O(N²) sweep over arc lengths.
    """
    z = np.asarray(curve, dtype=complex).ravel()
    N = len(z)
    if N < 16:
        raise ValueError("need at least 16 samples")
    if np.min(np.abs(np.roll(z, -1) - z)) == 0:
        raise DegenerateChord("coincident consecutive samples")
    diam = np.zeros((N, N), dtype=np.float64)  # diam[L, i] for arcs i..i+L
    cur = np.zeros(N)
    for L in range(1, N):
        chord = np.abs(z - np.roll(z, -L))
        cur = np.maximum(np.maximum(cur, np.roll(cur, -1)), chord)
        diam[L] = cur
    best = 0.0
    arg = (0, 0)
    i = np.arange(N)
    for L in range(1, N // 2 + 1):
        chord = np.abs(z - np.roll(z, -L))
        if chord.min() == 0:
            raise DegenerateChord("coincident samples")
        other = diam[N - L][(i + L) % N]
        r = np.minimum(diam[L], other) / chord
        j = int(np.argmax(r))
        if r[j] > best:
            best = float(r[j])
            arg = (j, (j + L) % N)
    return (best, arg) if return_pair else best


def turning_bruteforce(curve) -> float:
    """O(N³) reference evaluation of turning_max."""
    z = np.asarray(curve, dtype=complex).ravel()
    N = len(z)
    best = 0.0
    for a in range(N):
        for b in range(a + 1, N):
            arc1 = z[a : b + 1]
            arc2 = np.concatenate([z[b:], z[: a + 1]])
            d1 = np.max(np.abs(arc1[:, None] - arc1[None, :]))
            d2 = np.max(np.abs(arc2[:, None] - arc2[None, :]))
            best = max(best, min(d1, d2) / abs(z[a] - z[b]))
    return best


# -- Mori's theorem ---------------------------------------------------------


def mori_map(z, K: float):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, z * r ** (1.0 / K - 1.0), 0)
    return out


def mori_inverse(z, K: float):
    return mori_map(z, 1.0 / K)


@dataclass
class MoriReport:
    K: float
    C1: float
    C2: float
    violations: list
    inverse_C1: float
    inverse_C2: float
    inverse_violations: list
    radial_exponent: float
    universal_violations: list


def _disk_samples(rng, n, r):
    rad = r * np.sqrt(rng.random(n))
    ang = 2 * np.pi * rng.random(n)
    return rad * np.exp(1j * ang)


def _fit_holder(g, z1, z2, lo_exp, hi_exp):
    dz = np.abs(z1 - z2)
    dg = np.abs(g(z1) - g(z2))
    keep = dz > 0
    dz, dg = dz[keep], dg[keep]
    C1 = float(np.min(dg / dz**lo_exp))
    C2 = float(np.max(dg / dz**hi_exp))
    return C1, C2, dz, dg


def mori_check(K: float, sample_count: int = 1000, r: float = 1.0, seed: int = 0) -> MoriReport:
    """Bi-Hölder constants of z|z|^{1/K-1} and its inverse on the disk |z| <= r.

    Constants are fitted as the extremal ratios over a calibration set of
    pairs; violations are then collected on an independent validation set of
    ``sample_count`` pairs with the fitted constants relaxed by the Mori
    constant 16 (C1/16, 16 C2) as the allowed slack.  ``universal_violations``
    lists validation pairs breaking the Mori bounds with constant 16
    directly.
    """
    rng = np.random.default_rng(seed)
    fwd = lambda z: mori_map(z, K)
    inv = lambda z: mori_inverse(z, K)

    def pairs(n):
        z1 = _disk_samples(rng, n, r)
        # mix nearby and far pairs so that small increments are represented
        scale = 10.0 ** rng.uniform(-6, 0, n)
        z2 = z1 + scale * r * np.exp(2j * np.pi * rng.random(n))
        z2 = np.where(np.abs(z2) > r, z2 / np.abs(z2) * r, z2)
        return z1, z2

    c1, c2 = pairs(4 * sample_count)
    C1, C2, _, _ = _fit_holder(fwd, c1, c2, K, 1.0 / K)
    iC1, iC2, _, _ = _fit_holder(inv, c1, c2, K, 1.0 / K)
    v1, v2 = pairs(sample_count)

    def viol(g, A, B, slack):
        dz = np.abs(v1 - v2)
        dg = np.abs(g(v1) - g(v2))
        bad = []
        for i in np.nonzero(dz > 0)[0]:
            lo = A / slack * dz[i] ** K
            hi = B * slack * dz[i] ** (1.0 / K)
            if not (lo * (1 - 1e-12) <= dg[i] <= hi * (1 + 1e-12)):
                bad.append((complex(v1[i]), complex(v2[i])))
        return bad

    mori_c = 16.0 * r ** (1 - 1 / K)  # Mori constant scaled to radius r
    # radial exponent of the inverse map: |g(s) - g(0)| = C s^e
    s = np.geomspace(1e-6, r, 64) * np.exp(2j * np.pi * rng.random(64))
    slope = stats.linregress(np.log(np.abs(s)), np.log(np.abs(inv(s)))).slope
    return MoriReport(
        K=K,
        C1=C1,
        C2=C2,
        violations=viol(fwd, C1, C2, 16.0),
        inverse_C1=iC1,
        inverse_C2=iC2,
        inverse_violations=viol(inv, iC1, iC2, 16.0),
        radial_exponent=float(slope),
        universal_violations=viol(fwd, mori_c ** (-K), mori_c, 1.0),
    )


# -- transfer demo ----------------------------------------------------------


def cantor_member(y, depth: int) -> np.ndarray:
    """Membership of y in the depth-n stage of the middle-thirds Cantor set.

    Ternary digits are extracted one at a time; a point is kept while no digit
    equals 1 (the left endpoint 1/3 = 0.0222.. and 1 are kept).
    """
    y = np.asarray(y, dtype=float)
    ok = (y >= 0) & (y <= 1)
    w = np.clip(y, 0, 1)
    for _ in range(depth):
        w = 3 * w
        ok &= ~((w > 1) & (w < 2))
        w = np.where(w >= 2, w - 2, w)
    return ok


def cantor_intervals(depth: int) -> np.ndarray:
    """Left endpoints of the 2^depth stage intervals (length 3^-depth)."""
    left = np.zeros(1)
    for k in range(1, depth + 1):
        left = np.concatenate([left, left + 2.0 * 3.0**-k])
    return np.sort(left)


@dataclass
class TransferResult:
    delta: float
    estimate: DimensionEstimate
    n_points: int


def transfer_demo(
    cantor_depth: int = 14,
    deltas: Sequence[float] = (0.1,),
    x0: float = 0.25,
    motion: str = "linear",
    base_set: str = "cantor",
    oversample: int = 4,
) -> list[TransferResult]:
    """Dimension of the parameter set {λ : v(λ) ∈ h(λ, X)} near λ = 0.

    X is the middle-thirds Cantor set (or {x0}); the motion is h(λ, x) =
    (1+λ)x ("linear") or h(λ, x) = x ("rigid"), and v(λ) = x0 + λ.  Real
    parameters in (-δ, δ) are tested on a grid fine enough to resolve every
    depth-n stage interval, by ternary brute force.
    """
    out = []
    cell = 3.0**-cantor_depth
    for delta in deltas:
        if base_set == "singleton":
            # λ with h(λ, x0) = x0 + λ
            lam = np.array([0.0]) if motion == "linear" else np.array([0.0])
            est = box_counting(lam)
            out.append(TransferResult(delta, est, 1))
            continue
        if base_set != "cantor":
            raise ValueError(f"unknown base set {base_set!r}")
        # grid spacing below the shortest image of a stage interval
        h = cell / oversample / (1 + delta)
        n = int(math.ceil(2 * delta / h))
        chunks = []
        step = 1 << 22
        for s0 in range(0, n, step):
            lam = -delta + h * np.arange(s0, min(n, s0 + step) + 1)
            if motion == "linear":
                y = (x0 + lam) / (1 + lam)
            elif motion == "rigid":
                y = x0 + lam
            else:
                raise ValueError(f"unknown motion {motion!r}")
            chunks.append(lam[cantor_member(y, cantor_depth)])
        lam = np.concatenate(chunks)
        if len(lam) < 2:
            raise DepthInsufficient("no member found at this resolution")
        eps_min = 8 * cell
        eps_max = delta / 2
        if eps_max / eps_min < 10:
            raise DepthInsufficient("Cantor depth too small for the requested window")
        est = box_counting(lam.astype(complex), scale_range=(eps_max, eps_min), base=3.0 ** 0.25)
        out.append(TransferResult(delta, est, len(lam)))
    return out
