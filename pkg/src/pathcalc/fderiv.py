"""F-derivatives: verification over a path family, estimation on the carrier,
the bisection search and the separation witness."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    IllConditionedChordError,
    NoPathsError,
    PathCalcError,
    ResolutionError,
    ZeroChordError,
)
from .functions import SampledFn, as_fn
from .geometry import Path, subpath
from .integrate import path_integral
from .validation import as_point, check_positive


def _sup_on_path(g, p, n=64):
    s = np.concatenate([p.cum_len, np.linspace(0, p.length, n + 1)])
    return float(np.max(np.abs(g(p.at(s)))))


@dataclass
class FDerivReport:
    max_defect: float
    worst_path: Path
    worst_index: tuple
    paths_checked: int
    normalized: float
    tol: float
    seed: int
    defects: list = field(repr=False, default_factory=list)

    @property
    def verdict(self):
        """True when ``g`` passes as an F-derivative at ``tol``."""
        return self.normalized < self.tol

    def to_dict(self):
        return {
            "max_defect": self.max_defect,
            "normalized": self.normalized,
            "paths_checked": self.paths_checked,
            "worst_index": list(self.worst_index),
            "worst_path": self.worst_path.to_dict(),
            "tol": self.tol,
            "seed": self.seed,
            "verdict": "yes" if self.verdict else "no",
        }


def _probe_paths(F, probes_per_path, rng):
    """Generators, random subpaths of each, then joins when piecewise."""
    for k, gen in enumerate(F.generators):
        yield (k, -1), gen
        for j in range(probes_per_path):
            s = np.sort(rng.uniform(0.0, gen.length, size=2))
            if s[1] - s[0] <= 1e-9 * gen.length:
                continue
            yield (k, j), subpath(gen, s[0], s[1])
    for m, (i, j) in enumerate(F.joins()):
        yield (len(F.generators) + m, -1), F.joined(i, j)


def verify_fderivative(f, g, F, probes_per_path=4, tol=1e-8, seed=0, quad_tol=1e-12):
    """Check ``int_gamma g dz = f(end) - f(start)`` across the family.

    Each generator contributes itself plus ``probes_per_path`` random
    subpaths drawn from a generator seeded with ``seed``. The defect on a
    path is normalized by ``1 + |gamma| sup|g|``; the worst one decides.
    """
    if probes_per_path < 1:
        raise ValueError("probes_per_path must be >= 1")
    if len(F.generators) == 0:
        raise NoPathsError("family has no generators")
    f, g = as_fn(f), as_fn(g)
    rng = np.random.default_rng(seed)
    best = None
    defects = []
    count = 0
    for idx, p in _probe_paths(F, probes_per_path, rng):
        r = path_integral(g, p, quad_tol)
        d = abs(r.value - (f(p.end) - f(p.start)))
        nd = d / (1.0 + p.length * _sup_on_path(g, p))
        defects.append((idx, d, nd))
        count += 1
        # strict comparison keeps the lowest index on ties
        if best is None or nd > best[2]:
            best = (idx, d, nd, p)
    return FDerivReport(
        max_defect=max(d for _, d, _ in defects),
        worst_path=best[3],
        worst_index=best[0],
        paths_checked=count,
        normalized=best[2],
        tol=float(tol),
        seed=int(seed),
        defects=defects,
    )


class CarrierFunction(SampledFn):
    """Values on sample points of the family carrier.

    Calling it off the carrier returns the nearest carrier value; that
    extension is a convenience, not a canonical choice (``canonical`` is
    False).
    """

    canonical = False

    def __init__(self, points, values, family=None, spread=None, generator=None, arclen=None, h=None):
        super().__init__(points, values)
        self.family = family
        n = self.points.size
        self.spread = np.zeros(n) if spread is None else np.asarray(spread, dtype=float)
        self.generator = generator
        self.arclen = arclen
        self.h = h

    @classmethod
    def from_fn(cls, fn, family, spacing=None):
        pts, gid, s = family.carrier_points(spacing)
        return cls(pts, as_fn(fn)(pts), family, generator=gid, arclen=s, h=spacing or family.resolution)

    def sup(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def _combine(self, other, op):
        other_vals = other.values if isinstance(other, SampledFn) and other.points.shape == self.points.shape and np.array_equal(other.points, self.points) else as_fn(other)(self.points)
        return CarrierFunction(self.points, op(self.values, other_vals), self.family, self.spread, self.generator, self.arclen, self.h)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self._combine(0.0, lambda a, b: -a)

    def to_dict(self):
        return {
            "points": [[z.real, z.imag] for z in self.points],
            "values": [[v.real, v.imag] for v in self.values],
            "spread": self.spread.tolist(),
            "canonical_extension": False,
        }


def estimate_fderivative(f, F, h, on_ill_conditioned="raise"):
    """Chord difference quotients of ``f`` along each generator.

    At arc length ``s`` the value is ``[f(gamma(s+h)) - f(gamma(s-h))] /
    [gamma(s+h) - gamma(s-h)]``, one-sided at the ends. Carrier points of
    different generators closer than ``h/2`` are averaged; the spread of
    the averaged values is kept in ``spread``.
    """
    h = check_positive(h, "h")
    if on_ill_conditioned not in ("raise", "skip"):
        raise ValueError("on_ill_conditioned must be 'raise' or 'skip'")
    if len(F.generators) == 0:
        raise NoPathsError("family has no generators")
    f = as_fn(f)
    pts, vals, gids, ss = [], [], [], []
    for k, gen in enumerate(F.generators):
        L = gen.length
        if h >= L:
            raise ValueError(f"h={h} is not smaller than generator {k} (length {L})")
        s, z = gen.sample(h)
        lo = np.clip(s - h, 0.0, L)
        hi = np.clip(s + h, 0.0, L)
        lo = np.where(s - h < 0, s, lo)
        hi = np.where(s + h > L, s, hi)
        za, zb = gen.at(lo), gen.at(hi)
        chord = zb - za
        bad = np.abs(chord) < 1e-3 * h
        if bad.any():
            if on_ill_conditioned == "raise":
                i = int(np.flatnonzero(bad)[0])
                raise IllConditionedChordError(k, float(s[i]), float(abs(chord[i])))
            keep = ~bad
            s, z, za, zb, chord = s[keep], z[keep], za[keep], zb[keep], chord[keep]
        pts.append(z)
        vals.append((f(zb) - f(za)) / chord)
        gids.append(np.full(s.size, k))
        ss.append(s)
    pts, vals = np.concatenate(pts), np.concatenate(vals)
    gids, ss = np.concatenate(gids), np.concatenate(ss)

    spread = np.zeros(pts.size)
    if len(F.generators) > 1:
        tree = cKDTree(np.column_stack([pts.real, pts.imag]))
        nbrs = tree.query_ball_point(np.column_stack([pts.real, pts.imag]), h / 2 * (1 - 1e-9))
        avg = vals.copy()
        for i, nb in enumerate(nbrs):
            if len(nb) > 1 and np.unique(gids[nb]).size > 1:
                v = vals[nb]
                avg[i] = v.mean()
                spread[i] = float(np.max(np.abs(v - avg[i])))
        vals = avg
    return CarrierFunction(pts, vals, F, spread, gids, ss, h)


class BisectionResult(NamedTuple):
    k: float
    paths: list

    @property
    def limit(self):
        """Midpoint of the last (shortest) nested path."""
        last = self.paths[-1]
        return last.at(last.length / 2)


def bisect_subpaths(p, n_levels):
    """Nested halving keeping ``|gamma_i| < k |chord(gamma_i)|`` at every level."""
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    c = abs(p.chord)
    if c <= 1e-12 * p.length:
        raise ZeroChordError("path endpoints coincide; no finite k exists")
    k = (1 + 1e-9) * p.length / c
    paths = [p]
    q = p
    for _ in range(n_levels - 1):
        half = q.length / 2
        a, b = subpath(q, 0.0, half), subpath(q, half, q.length)
        if a.length < k * abs(a.chord):
            q = a
        elif b.length < k * abs(b.chord):
            q = b
        else:
            # |a| + |b| >= k(|ca| + |cb|) >= k|cq| would contradict the bound on q
            raise PathCalcError("neither half satisfies the chord bound; the predecessor could not have")
        paths.append(q)
    return BisectionResult(k, paths)


@dataclass
class Witness:
    path: Path
    defect: float
    chord: float
    generator: int
    point: complex


def separation_witness(g, h, F, delta, spacing=None, n_levels=30):
    """A subpath on which ``int (g - h) dz`` is visibly nonzero, or None.

    Mirrors the uniqueness argument: start where ``|g - h|`` is largest on
    the carrier, shrink to a subarc on which ``g - h`` barely varies, and
    bisect until a subpath with ``|int| > (delta/4) |chord|`` turns up.
    """
    delta = check_positive(delta, "delta")
    g, h = as_fn(g), as_fn(h)
    if len(F.generators) == 0:
        return None
    if spacing is None:
        spacing = F.resolution or min(gen.length for gen in F.generators) / 64
    pts, gid, ss = F.carrier_points(spacing)
    diff = np.abs(g(pts) - h(pts))
    i = int(np.argmax(diff))
    if diff[i] < delta:
        return None
    k_gen = int(gid[i])
    gen = F.generators[k_gen]
    s0 = float(ss[i])
    c0 = complex(g(pts[i]) - h(pts[i]))
    eps = spacing
    for _ in range(60):
        a, b = max(0.0, s0 - eps), min(gen.length, s0 + eps)
        win = subpath(gen, a, b)
        wz = win.at(np.linspace(0.0, win.length, 65))
        dv = g(wz) - h(wz)
        c = abs(win.chord)
        k = win.length / c if c > 0 else np.inf
        if np.min(np.abs(dv)) >= delta / 2 and np.max(np.abs(dv - c0)) <= delta / (4 * k):
            bis = bisect_subpaths(win, n_levels)
            for q in bis.paths:
                val = path_integral(lambda z: g(z) - h(z), q, 1e-12).value
                if abs(val) > delta / 4 * abs(q.chord):
                    return Witness(q, abs(val), abs(q.chord), k_gen, complex(pts[i]))
        eps /= 2
    raise PathCalcError("no witness found although the carrier gap exceeds delta")


def classical_limit_check(f, g, X, a, radii):
    """Sup of ``|(f(z)-f(a))/(z-a) - g(a)|`` over samples within each radius."""
    f, g = as_fn(f), as_fn(g)
    a = as_point(a)
    z = X.samples
    dz = z - a
    fa, ga = f(a), g(a)
    r = np.abs(dz)
    nz = r > 0
    q = np.full(z.shape, np.nan, dtype=complex)
    q[nz] = (f(z[nz]) - fa) / dz[nz] - ga
    out = []
    for rad in radii:
        sel = nz & (r <= rad)
        if not sel.any():
            raise ResolutionError(f"no samples within radius {rad} of {a}")
        out.append(float(np.max(np.abs(q[sel]))))
    return out
