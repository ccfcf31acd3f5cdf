"""Deterministic raster rendering of filled Julia sets and parameter planes.

Rows are computed independently and assembled in row order, so the output
does not depend on how many workers were used.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import poly as P
from . import scan as S
from .errors import ResolutionExceeded, UnknownFamily

MAX_PIXELS = 4096 * 4096

COLORINGS = ("EscapeTime", "BasinByTarget", "Classification")

# palettes (uint8 RGB)
_BOUNDED = (0, 0, 0)
_UNRESOLVED = (200, 30, 30)
_BASIN = np.array([(40, 160, 60), (60, 110, 200), (220, 170, 40), (150, 70, 180), (40, 180, 180)], dtype=np.uint8)


def worker_count(requested: int | None = None) -> int:
    """Requested workers (default: CAPDYN_THREADS or 1), capped by CAPDYN_THREADS."""
    env = os.environ.get("CAPDYN_THREADS")
    cap = max(1, int(env)) if env else None
    n = requested or cap or 1
    return max(1, min(n, cap) if cap else n)


@dataclass(frozen=True)
class RenderSpec:
    """What to draw.

    ``target`` is "julia" (dynamical plane of one polynomial) or "param"
    (classification of a family over the window).  For the two-parameter
    families the parameter window is the c2-plane with c1 = ``fixed``.
    """

    target: str
    family: str
    window: tuple
    resolution: tuple
    coloring: str = "EscapeTime"
    param: tuple = ()
    fixed: complex | None = None
    budget: int = 500
    max_pixels: int = MAX_PIXELS
    extra: dict = field(default_factory=dict)

    def validate(self):
        nx, ny = self.resolution
        if nx < 1 or ny < 1:
            raise ValueError("resolution must be positive")
        if nx * ny > self.max_pixels:
            raise ResolutionExceeded(f"{nx}x{ny} exceeds {self.max_pixels} pixels")
        x0, x1, y0, y1 = self.window
        if not (x1 > x0 and y1 > y0):
            raise ValueError("degenerate window")
        if self.target not in ("julia", "param"):
            raise ValueError(f"unknown render target {self.target!r}")
        if self.coloring not in COLORINGS:
            raise ValueError(f"unknown coloring {self.coloring!r}")

    def provenance(self) -> dict:
        return {
            "target": self.target,
            "family": self.family,
            "window": [float(v) for v in self.window],
            "resolution": [int(v) for v in self.resolution],
            "coloring": self.coloring,
            "param": [[complex(p).real, complex(p).imag] for p in self.param],
            "budget": self.budget,
        }


def resolve_polynomial(family: str, param) -> P.MarkedPolynomial:
    """``Quadratic`` means z^2 + c; otherwise one of the named families."""
    if family == "Quadratic":
        (c,) = param
        return P.quadratic(c)
    if family == "Monomial":
        (d,) = param
        return P.monomial(int(round(complex(d).real)))
    if family not in P.FAMILIES:
        raise UnknownFamily(family)
    return P.chart(family, param).realization


def superattracting_cycles(f: P.MarkedPolynomial, p_max: int = 16, tol: float = 1e-9) -> list[np.ndarray]:
    """Cycles of f through a critical point, one array of cycle points each."""
    cycles: list[np.ndarray] = []
    for c in f.crit:
        z = c
        for p in range(1, p_max + 1):
            z = f.eval(z)
            if not abs(z) < 1e150:
                break
            if abs(z - c) < tol * max(1.0, abs(c)):
                pts = np.array(f.orbit(c, p - 1), dtype=complex)
                if not any(np.min(np.abs(cyc - c)) < 1e-7 for cyc in cycles):
                    cycles.append(pts)
                break
    return cycles


def _band_colors(n: np.ndarray, green: np.ndarray) -> np.ndarray:
    # Green-value bands: band k holds potentials in (2^-(k+1), 2^-k]
    with np.errstate(divide="ignore"):
        band = np.floor(-np.log2(np.maximum(green, 1e-300))).astype(np.int64)
    band = np.clip(band, 0, 63)
    shade = (255 - (band * 37) % 200).astype(np.uint8)
    out = np.empty(n.shape + (3,), dtype=np.uint8)
    out[..., 0] = shade
    out[..., 1] = shade
    out[..., 2] = np.minimum(255, shade.astype(int) + 20).astype(np.uint8)
    return out


def julia_row(f: P.MarkedPolynomial, z: np.ndarray, budget: int, coloring: str, cycles) -> np.ndarray:
    """RGB row for the dynamical plane."""
    d = f.degree
    R = 2.0 * (1.0 + sum(abs(c) for c in f.coeffs[:-1]))
    z = z.astype(complex).copy()
    n_esc = np.full(z.shape, -1, dtype=np.int64)
    green = np.zeros(z.shape)
    basin = np.full(z.shape, -1, dtype=np.int64)
    cyc_pts = [np.asarray(c) for c in cycles]
    active = np.ones(z.shape, dtype=bool)
    for n in range(budget):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            break
        zz = z[idx]
        esc = np.abs(zz) > R
        if esc.any():
            e = idx[esc]
            n_esc[e] = n
            green[e] = np.log(np.abs(zz[esc])) / float(d) ** n
            active[e] = False
        if coloring == "BasinByTarget" and cyc_pts:
            for k, pts in enumerate(cyc_pts):
                near = np.min(np.abs(zz[:, None] - pts[None, :]), axis=1) < 1e-6
                hit = idx[near & ~esc & (basin[idx] < 0)]
                basin[hit] = k
                active[hit] = False
        keep = np.nonzero(active)[0]
        z[keep] = f.eval_array(z[keep])
    out = _band_colors(n_esc, green)
    bounded = n_esc < 0
    out[bounded] = _BOUNDED
    if coloring == "BasinByTarget":
        inb = basin >= 0
        out[inb] = _BASIN[basin[inb] % len(_BASIN)]
    return out


def param_row(spec: RenderSpec, c: np.ndarray) -> np.ndarray:
    fam = spec.family
    if fam in ("AirplaneQuartic", "Peanut2Plus"):
        c1 = complex(spec.fixed if spec.fixed is not None else 0)
        params = np.stack([np.full(c.shape, c1), c], axis=1)
    else:
        params = c
    res = S.classify_array(fam, params, spec.budget)
    code = res["code"]
    entry = res["entry"]
    target = res["target"]
    out = np.full(c.shape + (3,), 255, dtype=np.uint8)
    out[code == S.OTHER_BOUNDED] = _BOUNDED
    out[code == S.UNRESOLVED] = _UNRESOLVED
    cap = code == S.CAPTURE
    if cap.any():
        base = _BASIN[np.maximum(target[cap], 0) % len(_BASIN)].astype(int)
        # darker for later entry
        fade = np.clip(1.0 - 0.08 * np.maximum(entry[cap], 0), 0.35, 1.0)
        out[cap] = (base * fade[:, None]).astype(np.uint8)
    return out


def render_array(spec: RenderSpec, workers: int | None = None) -> np.ndarray:
    """Render to an (ny, nx, 3) uint8 array."""
    spec.validate()
    grid = S.pixel_grid(spec.window, spec.resolution)
    ny = grid.shape[0]
    if spec.target == "julia":
        f = resolve_polynomial(spec.family, spec.param)
        cycles = superattracting_cycles(f) if spec.coloring == "BasinByTarget" else []
        coloring = "EscapeTime" if spec.coloring == "Classification" else spec.coloring

        def row(i):
            return julia_row(f, grid[i], spec.budget, coloring, cycles)

    else:

        def row(i):
            return param_row(spec, grid[i])

    workers = worker_count(workers)
    if workers <= 1:
        rows = [row(i) for i in range(ny)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(row, range(ny)))  # map preserves index order
    return np.stack(rows, axis=0)


def ppm_bytes(img: np.ndarray) -> bytes:
    ny, nx, _ = img.shape
    return f"P6\n{nx} {ny}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    nx, ny = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(ny, nx, 3)


def render(spec: RenderSpec, path: str, workers: int | None = None) -> np.ndarray:
    img = render_array(spec, workers)
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(img))
    return img
