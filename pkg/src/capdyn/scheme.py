"""Mapping schemes and the space of generalized polynomials over them.

A mapping scheme is a finite set of vertices with a self-map sigma and a
degree map delta.  A model point attaches to every nonperiodic vertex v a
monic centered polynomial of degree delta(v), given by its critical marking
and constant term; periodic vertices carry z^delta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BisectionRangeExhausted, IndexOutOfScheme, InvalidScheme, StepTooLarge
from .poly import build_from_marking


@dataclass(frozen=True)
class MappingScheme:
    vertices: tuple
    sigma: dict
    delta: dict

    def __post_init__(self):
        for v in self.vertices:
            if v not in self.sigma or self.sigma[v] not in self.delta:
                raise InvalidScheme(f"sigma({v!r}) is not a vertex")
            if int(self.delta[v]) < 1:
                raise InvalidScheme(f"delta({v!r}) must be a positive integer")
        for cyc in self.cycles():
            if math.prod(self.delta[v] for v in cyc) < 2:
                raise InvalidScheme(f"cycle {cyc} has total degree 1")

    # -- combinatorics ----------------------------------------------------
    def cycles(self) -> list[tuple]:
        seen, out = set(), []
        for v in self.vertices:
            path, w = [], v
            while w not in path and w not in seen:
                path.append(w)
                w = self.sigma[w]
            if w in path:
                cyc = tuple(path[path.index(w):])
                if not any(set(cyc) == set(c) for c in out):
                    out.append(cyc)
            seen.update(path)
        return out

    @property
    def periodic(self) -> frozenset:
        return frozenset(v for c in self.cycles() for v in c)

    @property
    def nonperiodic(self) -> tuple:
        per = self.periodic
        return tuple(v for v in self.vertices if v not in per)

    def entry_time(self, v) -> int:
        """r_v: first j with sigma^j(v) periodic."""
        per = self.periodic
        j = 0
        while v not in per:
            v = self.sigma[v]
            j += 1
        return j

    def orbit(self, v, n: int) -> list:
        out = [v]
        for _ in range(n):
            v = self.sigma[v]
            out.append(v)
        return out

    def weight(self, v) -> float:
        """λ(v) = prod_{j<r_v} 1/δ(σ^j v), and 1 on periodic vertices."""
        return 1.0 / math.prod(self.delta[w] for w in self.orbit(v, self.entry_time(v))[:-1])

    def index_set(self) -> list[tuple]:
        """I = {(v, k) : v nonperiodic, 1 <= k < δ(v)} in vertex order."""
        return [(v, k) for v in self.nonperiodic for k in range(1, self.delta[v])]

    @property
    def dimension(self) -> int:
        return len(self.index_set())

    def coordinate_vertices(self) -> list:
        """Nonperiodic vertices that carry coordinates (δ >= 2)."""
        return [v for v in self.nonperiodic if self.delta[v] >= 2]


def parse_scheme(text: str) -> MappingScheme:
    """One vertex per line: ``name sigma(name) delta``; '#' starts a comment."""
    verts, sigma, delta = [], {}, {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidScheme(f"bad scheme line: {raw!r}")
        name, img, d = parts
        if name in sigma:
            raise InvalidScheme(f"duplicate vertex {name!r}")
        verts.append(name)
        sigma[name] = img
        delta[name] = int(d)
    return MappingScheme(tuple(verts), sigma, delta)


def format_scheme(s: MappingScheme) -> str:
    return "".join(f"{v} {s.sigma[v]} {s.delta[v]}\n" for v in s.vertices)


# stock schemes
SCHEME_W1 = MappingScheme(("v0", "v1"), {"v0": "v0", "v1": "v0"}, {"v0": 2, "v1": 3})
SCHEME_W2 = MappingScheme(("0", "1", "2"), {"0": "0", "1": "0", "2": "1"}, {"0": 2, "1": 2, "2": 2})
# critical c1 fixed; c2, c3 map through degree-one vertices onto c1
SCHEME_2PLUS = MappingScheme(
    ("c1", "c2", "c3", "fc2", "fc3"),
    {"c1": "c1", "c2": "fc2", "c3": "fc3", "fc2": "c1", "fc3": "c1"},
    {"c1": 2, "c2": 2, "c3": 2, "fc2": 1, "fc3": 1},
)


# -- model points ---------------------------------------------------------


@dataclass(frozen=True)
class ModelPoint:
    scheme: MappingScheme
    marking: dict  # v -> tuple of δ(v)-1 critical points
    constant: dict  # v -> a_v

    def __post_init__(self):
        for v in self.scheme.coordinate_vertices():
            c = self.marking[v]
            if len(c) != self.scheme.delta[v] - 1:
                raise InvalidScheme(f"vertex {v!r} needs {self.scheme.delta[v] - 1} critical points")
            if abs(sum(c)) > 1e-12 * max(1.0, max(abs(z) for z in c)):
                raise InvalidScheme(f"marking at {v!r} is not centered")

    def poly(self, v):
        """The polynomial attached to a nonperiodic vertex (identity if δ = 1)."""
        d = self.scheme.delta[v]
        if d == 1:
            return None
        return build_from_marking(self.marking[v], self.constant[v])

    def apply(self, v, z: complex) -> complex:
        d = self.scheme.delta[v]
        if v in self.scheme.periodic:
            return z**d
        if d == 1:
            return z
        return self._polys()[v].eval(z)

    def _polys(self):
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = {v: self.poly(v) for v in self.scheme.coordinate_vertices()}
            object.__setattr__(self, "_cache", cache)
        return cache

    def crit(self, v, k: int) -> complex:
        """c_{v,k} (1-based k)."""
        return self.marking[v][k - 1]

    def coords(self) -> np.ndarray:
        """(c_{v,1..δ-2}, a_v) per coordinate vertex, concatenated."""
        out = []
        for v in self.scheme.coordinate_vertices():
            out.extend(self.marking[v][:-1])
            out.append(self.constant[v])
        return np.array(out, dtype=complex)


def from_coords(scheme: MappingScheme, vec: Sequence[complex]) -> ModelPoint:
    """Inverse of ModelPoint.coords; the last critical point is dependent."""
    vec = list(np.asarray(vec, dtype=complex))
    marking, const = {}, {}
    i = 0
    for v in scheme.coordinate_vertices():
        d = scheme.delta[v]
        free = vec[i : i + d - 2]
        i += d - 2
        marking[v] = tuple(free) + (-sum(free, 0j),)
        const[v] = vec[i]
        i += 1
    if i != len(vec):
        raise InvalidScheme(f"expected {i} coordinates, got {len(vec)}")
    return ModelPoint(scheme, marking, const)


def zero_point(scheme: MappingScheme) -> ModelPoint:
    return from_coords(scheme, np.zeros(scheme.dimension, dtype=complex))


def random_point(scheme: MappingScheme, rng: np.random.Generator, scale: float = 1.0) -> ModelPoint:
    n = scheme.dimension
    vec = scale * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
    return from_coords(scheme, vec)


# -- the maps w, M, Λ, norm, Φ ---------------------------------------------


def w_chain(x: ModelPoint, v, k: int, j: int) -> complex:
    """w^j_{v,k} = f_{σ^{j-1} v} ∘ ... ∘ f_v (c_{v,k})."""
    s = x.scheme
    if v not in s.nonperiodic or not (1 <= k < s.delta[v]):
        raise IndexOutOfScheme((v, k))
    r = s.entry_time(v)
    if not 0 <= j <= r:
        raise IndexOutOfScheme((v, k, j))
    z = x.crit(v, k)
    w = v
    for _ in range(j):
        z = x.apply(w, z)
        w = s.sigma[w]
    return z


def w_map(x: ModelPoint) -> np.ndarray:
    """W(x) = (w^{r_v}_{v,k})_{(v,k) in I}."""
    s = x.scheme
    return np.array([w_chain(x, v, k, s.entry_time(v)) for v, k in s.index_set()], dtype=complex)


def big_m(x: ModelPoint) -> float:
    w = w_map(x)
    return float(np.max(np.abs(w))) if len(w) else 0.0


def scale_lambda(t: float, x: ModelPoint) -> ModelPoint:
    """Λ(t, x): c_v -> t^λ(v) c_v, a_v -> t^(δ(v)λ(v)) a_v."""
    if t < 0:
        raise ValueError("t must be non-negative")
    s = x.scheme
    marking, const = {}, {}
    for v in s.coordinate_vertices():
        lam = s.weight(v)
        tc = t**lam
        ta = t ** (s.delta[v] * lam)
        marking[v] = tuple(tc * c for c in x.marking[v])
        const[v] = ta * x.constant[v]
    return ModelPoint(s, marking, const)


def scale(x: ModelPoint, r: float) -> ModelPoint:
    """Plain scalar multiple r·x in the vector space of coordinates."""
    return from_coords(x.scheme, r * x.coords())


def norm(x: ModelPoint) -> float:
    """max over vertices of |a_v| (δ = 2) or max(|c_{v,k}|_{k<=δ-2}, |a_v|) (δ >= 3)."""
    best = 0.0
    for v in x.scheme.coordinate_vertices():
        vals = [abs(c) for c in x.marking[v][:-1]] + [abs(x.constant[v])]
        best = max(best, max(vals))
    return best


def _norm_terms(x: ModelPoint):
    """(magnitude, Λ-exponent) pairs whose maximum of m t^e is ||Λ(t, x)||."""
    s = x.scheme
    out = []
    for v in s.coordinate_vertices():
        lam = s.weight(v)
        out.extend((abs(c), lam) for c in x.marking[v][:-1])
        out.append((abs(x.constant[v]), s.delta[v] * lam))
    return out


def phi(x: ModelPoint) -> ModelPoint:
    """Φ(x) = Λ(||x|| / M(x̂), x̂) with x̂ = x/||x||; Φ(0) = 0."""
    n = norm(x)
    if n == 0:
        return zero_point(x.scheme)
    xh = scale(x, 1.0 / n)
    return scale_lambda(n / big_m(xh), xh)


def solve_unit_norm(y: ModelPoint, lo: float = 1e-300, hi: float = 1e300) -> float:
    """The unique t > 0 with ||Λ(t, y)|| = 1.

    The norm of Λ(t, y) is a maximum of increasing power laws m t^e, so the
    root is min over terms of m^(-1/e); the bracket [lo, hi] is checked.
    """
    terms = [(m, e) for m, e in _norm_terms(y) if m > 0]
    if not terms:
        raise BisectionRangeExhausted("y = 0 has no unit rescaling")
    t = min(math.exp(-math.log(m) / e) for m, e in terms)
    if not (lo <= t <= hi) or not math.isfinite(t):
        raise BisectionRangeExhausted(f"root t = {t:g} outside [{lo:g}, {hi:g}]")
    return t


def phi_inverse(y: ModelPoint) -> ModelPoint:
    """Φ^{-1}(y) = M(y) · Λ(t, y) where ||Λ(t, y)|| = 1."""
    if norm(y) == 0:
        return zero_point(y.scheme)
    t = solve_unit_norm(y)
    return scale(scale_lambda(t, y), big_m(y))


def in_connectedness_locus(x: ModelPoint) -> bool:
    return big_m(x) <= 1.0


def boundary_faces(x: ModelPoint, eps: float = 1e-9) -> list[tuple]:
    """Indices (v, k) with | |w_{v,k}(x)| - 1 | < eps."""
    w = w_map(x)
    return [idx for idx, val in zip(x.scheme.index_set(), w) if abs(abs(val) - 1) < eps]


# -- Jacobian of W ----------------------------------------------------------


def jacobian_closed_form(x: ModelPoint) -> complex:
    """Product of squared marking differences and free-relation factors.

    Equals det J_W up to a nonzero constant depending only on the scheme.
    """
    s = x.scheme
    prod = 1 + 0j
    for v in s.coordinate_vertices():
        c = x.marking[v]
        for k1 in range(len(c)):
            for k2 in range(k1 + 1, len(c)):
                prod *= (c[k1] - c[k2]) ** 2
    for v in s.coordinate_vertices():
        r = s.entry_time(v)
        for k in range(1, s.delta[v]):
            for j in range(1, r):
                u = s.orbit(v, j)[-1]
                if s.delta[u] < 2:
                    continue
                wj = w_chain(x, v, k, j)
                for kp in range(1, s.delta[u]):
                    prod *= x.crit(u, kp) - wj
    return prod


def jacobian_matrix_fd(x: ModelPoint, h: float = 1e-5) -> np.ndarray:
    s = x.scheme
    base = x.coords()
    n = len(base)
    J = np.zeros((n, n), dtype=complex)
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = h
        J[:, i] = (w_map(from_coords(s, base + e)) - w_map(from_coords(s, base - e))) / (2 * h)
    return J


def jacobian_fd(x: ModelPoint, h: float = 1e-5, check: float = 1e-6) -> complex:
    """det J_W by central differences, Richardson-combined with step h/2.

    Raises StepTooLarge when the h and h/2 determinants disagree by more than
    ``check`` relative to the larger entry scale.
    """
    d1 = np.linalg.det(jacobian_matrix_fd(x, h))
    d2 = np.linalg.det(jacobian_matrix_fd(x, h / 2))
    scale_ = max(1.0, float(np.max(np.abs(jacobian_matrix_fd(x, h / 2))))) ** x.scheme.dimension
    if abs(d1 - d2) > check * max(abs(d2), scale_):
        raise StepTooLarge(f"Richardson mismatch {abs(d1 - d2):.3e}")
    return complex((4 * d2 - d1) / 3)


def jacobian_constant(scheme: MappingScheme, rng: np.random.Generator | None = None, trials: int = 3) -> complex:
    """Empirical constant det J_W / closed-form product at generic points."""
    rng = rng or np.random.default_rng(12345)
    vals = []
    for _ in range(trials):
        x = random_point(scheme, rng)
        p = jacobian_closed_form(x)
        if abs(p) > 1e-6:
            vals.append(jacobian_fd(x) / p)
    if not vals:
        raise ValueError("no generic point found")
    return complex(np.median(np.real(vals)) + 1j * np.median(np.imag(vals)))


def has_free_critical_relation(x: ModelPoint, eps: float = 1e-9) -> tuple[bool, list]:
    """Coincidences c_{v',k'} = w^j_{v,k} with v' = σ^j(v), 0 <= j < r_v, (v',k') != (v,k)."""
    s = x.scheme
    wit = []
    for v, k in s.index_set():
        r = s.entry_time(v)
        for j in range(r):
            u = s.orbit(v, j)[-1]
            if s.delta[u] < 2:
                continue
            wj = w_chain(x, v, k, j)
            for kp in range(1, s.delta[u]):
                if (u, kp) == (v, k):
                    continue
                if abs(x.crit(u, kp) - wj) < eps:
                    wit.append((v, k, u, kp, j))
    return bool(wit), wit
