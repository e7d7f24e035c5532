"""Polyline paths, path families and discretized compact plane sets."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import (
    DegenerateIntervalError,
    DescriptorError,
    EmptySetError,
    JoinError,
    ZeroLengthPathError,
)
from .validation import as_point, check_points, check_positive


# ---------------------------------------------------------------- paths


class Path:
    """Polyline parametrized by arc length.

    Instances are treated as immutable; ``vertices`` and ``cum_len`` are
    read-only arrays.
    """

    __slots__ = ("vertices", "cum_len")

    def __init__(self, vertices):
        v = check_points(vertices, "vertices")
        if v.size < 2:
            raise ZeroLengthPathError("a path needs at least two vertices")
        seg = np.abs(np.diff(v))
        if np.any(seg == 0):
            i = int(np.flatnonzero(seg == 0)[0])
            raise ZeroLengthPathError(f"vertices {i} and {i + 1} coincide")
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        v.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "cum_len", cum)

    def __setattr__(self, name, value):
        raise AttributeError("Path is immutable")

    @property
    def length(self):
        return float(self.cum_len[-1])

    @property
    def start(self):
        return complex(self.vertices[0])

    @property
    def end(self):
        return complex(self.vertices[-1])

    @property
    def chord(self):
        return self.end - self.start

    @property
    def n_segments(self):
        return self.vertices.size - 1

    def is_closed(self, tol=1e-12):
        return abs(self.chord) <= tol * max(1.0, self.length)

    def at(self, s):
        """Point at arc length ``s`` (scalar or array)."""
        s_arr = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        i = np.clip(np.searchsorted(self.cum_len, s_arr, side="right") - 1, 0, self.n_segments - 1)
        seg = self.cum_len[i + 1] - self.cum_len[i]
        t = (s_arr - self.cum_len[i]) / seg
        out = self.vertices[i] + t * (self.vertices[i + 1] - self.vertices[i])
        return complex(out) if np.ndim(s) == 0 else out

    def reversed(self):
        return Path(self.vertices[::-1])

    def sample(self, spacing):
        """Points at arc-length spacing at most ``spacing``, endpoints included."""
        n = max(1, int(np.ceil(self.length / spacing)))
        s = np.linspace(0.0, self.length, n + 1)
        return s, self.at(s)

    def to_dict(self):
        return {"vertices": [[z.real, z.imag] for z in self.vertices]}

    def __eq__(self, other):
        return isinstance(other, Path) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def __repr__(self):
        return f"Path({self.vertices.size} vertices, length={self.length:.6g})"


def path_length(p):
    return p.length


def subpath(p, s0, s1):
    """Restriction of ``p`` to arc lengths ``[s0, s1]``."""
    L = p.length
    s0, s1 = float(s0), float(s1)
    if not s0 < s1:
        raise DegenerateIntervalError(f"need s0 < s1, got [{s0}, {s1}]")
    if s0 < -1e-12 * L or s1 > L * (1 + 1e-12):
        raise DegenerateIntervalError(f"[{s0}, {s1}] is outside [0, {L}]")
    s0, s1 = max(s0, 0.0), min(s1, L)
    eps = 1e-13 * L
    inner = (p.cum_len > s0 + eps) & (p.cum_len < s1 - eps)
    verts = np.concatenate([[p.at(s0)], p.vertices[inner], [p.at(s1)]])
    return Path(verts)


def concat(parts, tol=0.0):
    """Join paths end to start. ``tol`` allows tiny float gaps, which are snapped."""
    parts = list(parts)
    if not parts:
        raise ZeroLengthPathError("nothing to concatenate")
    verts = [parts[0].vertices]
    for i in range(len(parts) - 1):
        gap = abs(parts[i].end - parts[i + 1].start)
        if gap > tol:
            raise JoinError(i, gap)
        verts.append(parts[i + 1].vertices[1:])
    return Path(np.concatenate(verts))


def _seg_point_dist(p, a, b):
    d = b - a
    dd = np.abs(d) ** 2
    t = np.clip(np.real((p - a) * np.conj(d)) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    return np.abs(p - (a + t * d))


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def segment_distance(a1, b1, a2, b2):
    """Vectorized distance between segments [a1,b1] and [a2,b2]."""
    d1, d2 = b1 - a1, b2 - a2
    o1 = _cross(d1, a2 - a1)
    o2 = _cross(d1, b2 - a1)
    o3 = _cross(d2, a1 - a2)
    o4 = _cross(d2, b1 - a2)
    crossing = (o1 * o2 < 0) & (o3 * o4 < 0)
    dist = np.minimum.reduce(
        [
            _seg_point_dist(a2, a1, b1),
            _seg_point_dist(b2, a1, b1),
            _seg_point_dist(a1, a2, b2),
            _seg_point_dist(b1, a2, b2),
        ]
    )
    return np.where(crossing, 0.0, dist)


def is_injective(p, tol):
    """Jordan-arc test: non-adjacent segments stay at least ``tol`` apart."""
    check_positive(tol, "tol")
    if p.is_closed(0.0):
        return False
    a, b = p.vertices[:-1], p.vertices[1:]
    n = a.size
    # adjacent segments may only meet at their shared vertex
    if n >= 2:
        d_prev, d_next = b[:-1] - a[:-1], b[1:] - a[1:]
        folded = (np.real(d_prev * np.conj(d_next)) < 0) & (
            np.abs(_cross(d_prev, d_next)) <= 1e-12 * np.abs(d_prev) * np.abs(d_next)
        )
        if np.any(folded):
            return False
    chunk = max(1, 2_000_000 // max(n, 1))
    for i0 in range(0, n, chunk):
        i = np.arange(i0, min(n, i0 + chunk))[:, None]
        j = np.arange(n)[None, :]
        mask = j >= i + 2
        if not mask.any():
            continue
        ii, jj = np.broadcast_to(i, mask.shape)[mask], np.broadcast_to(j, mask.shape)[mask]
        if np.any(segment_distance(a[ii], b[ii], a[jj], b[jj]) < tol):
            return False
    return True


def regular_polygon(n, radius=1.0, center=0.0, closed=True):
    """Vertices of the regular ``n``-gon inscribed in a circle, as a path."""
    t = 2 * np.pi * np.arange(n + (1 if closed else 0)) / n
    v = center + radius * np.exp(1j * t)
    if closed:
        v[-1] = v[0]
    return Path(v)


def parse_path(desc):
    if not isinstance(desc, dict) or "vertices" not in desc:
        raise DescriptorError("path descriptor must be an object with a 'vertices' list")
    return Path([as_point(v) for v in desc["vertices"]])


# ---------------------------------------------------------------- families


class PathFamily:
    """Finite generating set of Jordan arcs, closed under subpaths.

    With ``piecewise=True`` joins of generators whose endpoints coincide
    are admitted as well.
    """

    closed_under_subpaths = True

    def __init__(self, generators, piecewise=False, max_length=None, resolution=None, check_tol=None):
        gens = tuple(generators)
        for i, g in enumerate(gens):
            if not isinstance(g, Path):
                raise TypeError(f"generator {i} is not a Path")
            tol = check_tol if check_tol is not None else 1e-12 * max(g.length, 1e-300)
            if not is_injective(g, tol):
                raise ValueError(f"generator {i} is not a Jordan arc")
            if max_length is not None and g.length > max_length * (1 + 1e-12):
                raise ValueError(f"generator {i} is longer than max_length")
        self.generators = gens
        self.piecewise = bool(piecewise)
        self.max_length = None if max_length is None else float(max_length)
        self.resolution = resolution

    def __len__(self):
        return len(self.generators)

    @property
    def sup_length(self):
        """``L = sup |gamma|`` over the family (joins included when piecewise)."""
        if self.max_length is not None:
            return self.max_length
        lengths = [g.length for g in self.generators]
        for i, j in self.joins():
            lengths.append(self.generators[i].length + self.generators[j].length)
        return max(lengths) if lengths else 0.0

    def joins(self, tol=1e-12):
        """Pairs (i, j) with end(i) == start(j); only when piecewise."""
        if not self.piecewise or len(self.generators) < 2:
            return []
        starts = np.array([g.start for g in self.generators])
        ends = np.array([g.end for g in self.generators])
        tree = cKDTree(np.column_stack([starts.real, starts.imag]))
        out = []
        for i, e in enumerate(ends):
            for j in sorted(tree.query_ball_point([e.real, e.imag], tol)):
                if j != i:
                    out.append((i, j))
        return out

    def joined(self, i, j):
        return concat([self.generators[i], self.generators[j]], tol=1e-12)

    def carrier_points(self, spacing=None):
        """Sample the carrier. Returns (points, generator index, arc length)."""
        spacing = spacing or self.resolution
        if spacing is None:
            raise ValueError("carrier spacing not given and family has no resolution")
        pts, gid, ss = [], [], []
        for k, g in enumerate(self.generators):
            s, z = g.sample(spacing)
            pts.append(z)
            gid.append(np.full(s.size, k))
            ss.append(s)
        return np.concatenate(pts), np.concatenate(gid), np.concatenate(ss)

    def __repr__(self):
        return f"PathFamily({len(self.generators)} generators, piecewise={self.piecewise})"


# ---------------------------------------------------------------- shapes


def chords_on_curve(a, b, P, Q, tol, chunk=2_000_000):
    """Exact test: is each chord [a, b] covered by the segments [P_k, Q_k]?

    A chord lies in a union of segments exactly when the collinear ones
    cover its parameter interval [0, 1] without gaps.
    """
    a, b = np.broadcast_arrays(np.atleast_1d(a), np.atleast_1d(b))
    out = np.zeros(a.shape, dtype=bool)
    step = max(1, chunk // max(P.size, 1))
    for i0 in range(0, a.size, step):
        sl = slice(i0, i0 + step)
        out[sl] = _chords_on_curve(a[sl], b[sl], P, Q, tol)
    return out


def _chords_on_curve(a, b, P, Q, tol):
    d = (b - a)[:, None]
    n = np.abs(d)
    point = n[:, 0] <= tol
    n = np.where(n > 0, n, 1.0)
    rp, rq = P[None, :] - a[:, None], Q[None, :] - a[:, None]
    col = (np.abs(_cross(d, rp)) <= tol * n) & (np.abs(_cross(d, rq)) <= tol * n)
    tp = np.real(rp * np.conj(d)) / n**2
    tq = np.real(rq * np.conj(d)) / n**2
    lo = np.where(col, np.minimum(tp, tq), np.inf)
    hi = np.where(col, np.maximum(tp, tq), -np.inf)
    order = np.argsort(lo, axis=1, kind="stable")
    lo, hi = np.take_along_axis(lo, order, 1), np.take_along_axis(hi, order, 1)
    eps = tol / n
    # intervals starting at or beyond the chord's end cannot help cover it
    relevant = lo <= 1 - eps
    reach = np.maximum.accumulate(np.where(relevant, hi, -np.inf), axis=1)
    prev = np.concatenate([np.zeros((lo.shape[0], 1)), np.maximum(reach[:, :-1], 0.0)], axis=1)
    gap_free = np.all(~relevant | (lo <= prev + eps), axis=1)
    covered = gap_free & (reach[:, -1] >= 1 - eps[:, 0])
    if point.any():
        dist = np.min(_seg_point_dist(a[point][:, None], P[None, :], Q[None, :]), axis=1)
        covered[point] = dist <= tol
    return covered


def _tol_for(diam):
    return 1e-10 * max(diam, 1.0)


class Shape:
    kind = None
    is_curve = False
    convex = False

    def contains(self, z, tol=None):
        z = np.asarray(z, dtype=complex)
        return self._contains(z, self.tol if tol is None else tol)

    @property
    def tol(self):
        lo, hi = self.bbox()
        return _tol_for(abs(hi - lo))

    def anchor(self):
        return self.bbox()[0]

    def boundary_samples(self, h):
        return np.zeros(0, dtype=complex)

    def curve_samples(self, h):
        """(points, consecutive-pair edges) for one-dimensional pieces."""
        return np.zeros(0, dtype=complex), np.zeros((0, 2), dtype=int)


def _polyline_samples(vertices, h):
    pts = [vertices[:1]]
    for a, b in zip(vertices[:-1], vertices[1:]):
        m = max(4, int(np.ceil(abs(b - a) / h)))
        t = np.arange(1, m + 1) / m
        seg = a + t * (b - a)
        seg[-1] = b
        pts.append(seg)
    z = np.concatenate(pts)
    idx = np.arange(z.size)
    return z, np.column_stack([idx[:-1], idx[1:]])


def _dist_to_polyline(z, vertices):
    out = np.full(z.shape, np.inf)
    for a, b in zip(vertices[:-1], vertices[1:]):
        out = np.minimum(out, _seg_point_dist(z, a, b))
    return out


class Rect(Shape):
    kind = "rect"
    convex = True

    def __init__(self, lo, hi):
        self.lo, self.hi = as_point(lo), as_point(hi)
        if not (self.hi.real > self.lo.real and self.hi.imag > self.lo.imag):
            raise EmptySetError("rect needs hi > lo in both coordinates")

    def bbox(self):
        return self.lo, self.hi

    def _contains(self, z, tol):
        return (
            (z.real >= self.lo.real - tol)
            & (z.real <= self.hi.real + tol)
            & (z.imag >= self.lo.imag - tol)
            & (z.imag <= self.hi.imag + tol)
        )

    def boundary_samples(self, h):
        lo, hi = self.lo, self.hi
        corners = np.array([lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo])
        return _polyline_samples(corners, h)[0]

    def to_dict(self):
        return {"type": "rect", "lo": [self.lo.real, self.lo.imag], "hi": [self.hi.real, self.hi.imag]}


class Disk(Shape):
    kind = "disk"
    convex = True

    def __init__(self, center, radius):
        self.center = as_point(center)
        self.radius = check_positive(radius, "radius")

    def bbox(self):
        r = complex(self.radius, self.radius)
        return self.center - r, self.center + r

    def _contains(self, z, tol):
        return np.abs(z - self.center) <= self.radius + tol

    def boundary_samples(self, h):
        m = max(8, int(np.ceil(2 * np.pi * self.radius / h)))
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(m) / m)

    def to_dict(self):
        return {"type": "disk", "center": [self.center.real, self.center.imag], "radius": self.radius}


class Polygon(Shape):
    """Filled simple polygon (vertices in order, not repeated)."""

    kind = "polygon"

    def __init__(self, vertices):
        v = check_points(vertices, "vertices")
        if v.size < 3:
            raise EmptySetError("polygon needs at least three vertices")
        self.vertices = v
        self._ring = np.concatenate([v, v[:1]])

    def bbox(self):
        v = self.vertices
        return complex(v.real.min(), v.imag.min()), complex(v.real.max(), v.imag.max())

    def _contains(self, z, tol):
        inside = np.zeros(z.shape, dtype=bool)
        x, y = z.real, z.imag
        for a, b in zip(self._ring[:-1], self._ring[1:]):
            cond = (a.imag > y) != (b.imag > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= cond & (x < xint)
        return inside | (_dist_to_polyline(z, self._ring) <= tol)

    def boundary_samples(self, h):
        return _polyline_samples(self._ring, h)[0]

    def to_dict(self):
        return {"type": "polygon", "vertices": [[z.real, z.imag] for z in self.vertices]}


class Segment(Shape):
    kind = "segment"
    is_curve = True

    def __init__(self, a, b):
        self.a, self.b = as_point(a), as_point(b)
        if self.a == self.b:
            raise ZeroLengthPathError("segment endpoints coincide")

    def bbox(self):
        v = np.array([self.a, self.b])
        return complex(v.real.min(), v.imag.min()), complex(v.real.max(), v.imag.max())

    def _contains(self, z, tol):
        return _seg_point_dist(z, self.a, self.b) <= tol

    def curve_samples(self, h):
        return _polyline_samples(np.array([self.a, self.b]), h)

    def curve_segments(self):
        return np.array([self.a]), np.array([self.b])

    def to_dict(self):
        return {"type": "segment", "a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}


class Polyline(Shape):
    kind = "polyline"
    is_curve = True

    def __init__(self, vertices, closed=False):
        v = check_points(vertices, "vertices")
        if v.size < 2:
            raise EmptySetError("polyline needs at least two vertices")
        self.closed = bool(closed)
        self.vertices = np.concatenate([v, v[:1]]) if closed and v[0] != v[-1] else v

    def bbox(self):
        v = self.vertices
        return complex(v.real.min(), v.imag.min()), complex(v.real.max(), v.imag.max())

    def _contains(self, z, tol):
        return _dist_to_polyline(z, self.vertices) <= tol

    def curve_samples(self, h):
        return _polyline_samples(self.vertices, h)

    def curve_segments(self):
        return self.vertices[:-1], self.vertices[1:]

    def to_dict(self):
        v = self.vertices[:-1] if self.closed else self.vertices
        return {"type": "polyline", "vertices": [[z.real, z.imag] for z in v], "closed": self.closed}


class Raster(Shape):
    """Union of closed pixel squares of side ``h`` centred at true mask cells.

    Pixel (i, j) is centred at ``origin + j*h + i*h*1j``.
    """

    kind = "raster"

    def __init__(self, origin, h, mask):
        self.origin = as_point(origin)
        self.h = check_positive(h, "h")
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.ndim != 2:
            raise DescriptorError("raster mask must be two-dimensional")
        if not self.mask.any():
            raise EmptySetError("raster mask is empty")

    def bbox(self):
        ny, nx = self.mask.shape
        half = complex(self.h, self.h) / 2
        return self.origin - half, self.origin + complex((nx - 1) * self.h, (ny - 1) * self.h) + half

    @property
    def tol(self):
        return 1e-9 * self.h

    def anchor(self):
        return self.origin

    def _contains(self, z, tol):
        ny, nx = self.mask.shape
        u = (z - self.origin) / self.h
        out = np.zeros(z.shape, dtype=bool)
        # a point on a shared pixel edge belongs to either neighbour
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                j = np.round(u.real).astype(int) + dj
                i = np.round(u.imag).astype(int) + di
                near = (np.abs(u.real - j) <= 0.5 + tol / self.h) & (np.abs(u.imag - i) <= 0.5 + tol / self.h)
                ok = near & (i >= 0) & (i < ny) & (j >= 0) & (j < nx)
                hit = np.zeros(z.shape, dtype=bool)
                hit[ok] = self.mask[i[ok], j[ok]]
                out |= hit
        return out

    def to_dict(self):
        return {
            "type": "raster",
            "origin": [self.origin.real, self.origin.imag],
            "h": self.h,
            "mask": self.mask.astype(int).tolist(),
        }


class Union(Shape):
    kind = "union"

    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise EmptySetError("union of no parts")

    @property
    def is_curve(self):
        return all(p.is_curve for p in self.parts)

    def bbox(self):
        los, his = zip(*(p.bbox() for p in self.parts))
        return (
            complex(min(z.real for z in los), min(z.imag for z in los)),
            complex(max(z.real for z in his), max(z.imag for z in his)),
        )

    @property
    def tol(self):
        return min(p.tol for p in self.parts)

    def _contains(self, z, tol):
        out = np.zeros(z.shape, dtype=bool)
        for p in self.parts:
            out |= p._contains(z, tol)
        return out

    def boundary_samples(self, h):
        got = [p.boundary_samples(h) for p in self.parts]
        return np.concatenate(got) if got else np.zeros(0, dtype=complex)

    def curve_samples(self, h):
        pts, edges, off = [], [], 0
        for p in self.parts:
            z, e = p.curve_samples(h)
            pts.append(z)
            edges.append(e + off)
            off += z.size
        return np.concatenate(pts), np.concatenate(edges)

    def curve_segments(self):
        got = [p.curve_segments() for p in self.parts if p.is_curve]
        return np.concatenate([g[0] for g in got]), np.concatenate([g[1] for g in got])

    def to_dict(self):
        return {"type": "union", "parts": [p.to_dict() for p in self.parts]}


def parse_shape(desc):
    if not isinstance(desc, dict) or "type" not in desc:
        raise DescriptorError("shape descriptor must be an object with a 'type' key")
    t = desc["type"]
    try:
        if t == "rect":
            return Rect(desc["lo"], desc["hi"])
        if t == "disk":
            return Disk(desc.get("center", [0, 0]), desc["radius"])
        if t == "segment":
            return Segment(desc["a"], desc["b"])
        if t == "polyline":
            return Polyline([as_point(v) for v in desc["vertices"]], desc.get("closed", False))
        if t == "polygon":
            return Polygon([as_point(v) for v in desc["vertices"]])
        if t == "raster":
            return Raster(desc["origin"], desc["h"], desc["mask"])
        if t == "union":
            return Union([parse_shape(p) for p in desc["parts"]])
    except KeyError as exc:
        raise DescriptorError(f"shape '{t}' is missing field {exc}") from None
    raise DescriptorError(f"unknown shape type {t!r}")


# ---------------------------------------------------------------- plane sets


@dataclass(frozen=True)
class Component:
    indices: np.ndarray
    lo: complex
    hi: complex


class PlaneSet:
    """A shape with its discretization: samples, adjacency graph, membership."""

    def __init__(self, shape, h, samples, graph):
        self.shape = shape
        self.h = float(h)
        self.samples = samples
        self.graph = graph
        self.samples.setflags(write=False)

    def __len__(self):
        return self.samples.size

    def contains(self, z, tol=None):
        return self.shape.contains(z, tol)

    @property
    def membership_tol(self):
        return self.shape.tol

    @cached_property
    def tree(self):
        return cKDTree(np.column_stack([self.samples.real, self.samples.imag]))

    def nearest(self, z):
        """(index, distance) of the nearest sample to each point."""
        z = np.asarray(z, dtype=complex)
        d, i = self.tree.query(np.column_stack([np.ravel(z.real), np.ravel(z.imag)]))
        if z.ndim == 0:
            return int(i[0]), float(d[0])
        return i, d

    @cached_property
    def labels(self):
        _, lab = connected_components(self.graph, directed=False)
        # relabel by first occurrence so labels follow sample order
        _, first = np.unique(lab, return_index=True)
        order = np.argsort(np.argsort(first))
        return order[lab]

    def segment_inside(self, a, b, spacing=None):
        """Vectorized: does each chord [a, b] lie in the set?

        Exact for curve shapes; sampled at ``spacing`` (default h/4) otherwise.
        """
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        b = np.atleast_1d(np.asarray(b, dtype=complex))
        a, b = np.broadcast_arrays(a, b)
        if self.shape.is_curve:
            return chords_on_curve(a, b, *self.shape.curve_segments(), self.shape.tol)
        # a chord with both ends in one convex part is inside, exactly
        out = np.zeros(a.shape, dtype=bool)
        for part in _convex_parts(self.shape):
            out |= part.contains(a) & part.contains(b)
        rest = np.flatnonzero(~out)
        if rest.size:
            out[rest] = self._sampled_inside(a[rest], b[rest], spacing or self.h / 4)
        return out

    def _sampled_inside(self, a, b, spacing):
        n = np.maximum(1, np.ceil(np.abs(b - a) / spacing).astype(int))
        out = np.ones(a.shape, dtype=bool)
        # one padded grid per chunk: probe k/n_i for k <= n_i (clamped past n_i)
        order = np.argsort(n, kind="stable")
        step = max(1, 4_000_000 // (int(n[order[-1]]) + 1))
        for i0 in range(0, order.size, step):
            sel = order[i0 : i0 + step]
            m = int(n[sel].max())
            k = np.minimum(np.arange(m + 1)[None, :], n[sel][:, None])
            t = k / n[sel][:, None]
            pts = a[sel][:, None] + t * (b[sel] - a[sel])[:, None]
            out[sel] = self.shape.contains(pts).all(axis=1)
        return out

    def to_dict(self):
        return {"shape": self.shape.to_dict(), "h": self.h}


def _convex_parts(shape):
    if isinstance(shape, Union):
        return [q for p in shape.parts for q in _convex_parts(p)]
    return [shape] if shape.convex else []


def _region_part(shape):
    """The union of the 2-d parts of ``shape``, or None for pure curves."""
    if isinstance(shape, Union):
        parts = [r for r in (_region_part(p) for p in shape.parts) if r is not None]
        return Union(parts) if parts else None
    return None if shape.is_curve else shape


def _dedupe(points, eps):
    order = np.lexsort((points.imag, points.real))
    pts = points[order]
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    pairs = tree.query_pairs(eps, output_type="ndarray")
    keep = np.ones(pts.size, dtype=bool)
    if pairs.size:
        keep[pairs.max(axis=1)] = False
    kept = pts[keep]
    _, idx = cKDTree(np.column_stack([kept.real, kept.imag])).query(np.column_stack([points.real, points.imag]))
    return kept, idx


def discretize(shape, h):
    """Sample ``shape`` on an h-grid (plus boundary and curve samples)."""
    h = check_positive(h, "h")
    lo, hi = shape.bbox()
    parts = []
    if not shape.is_curve:
        a = shape.anchor()
        i0 = int(np.floor((lo.real - a.real) / h + 1e-9))
        j0 = int(np.floor((lo.imag - a.imag) / h + 1e-9))
        i1 = int(np.floor((hi.real - a.real) / h + 1e-9))
        j1 = int(np.floor((hi.imag - a.imag) / h + 1e-9))
        xs = a.real + h * np.arange(i0, i1 + 1)
        ys = a.imag + h * np.arange(j0, j1 + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        grid = (X + 1j * Y).ravel()
        parts.append(grid[shape.contains(grid)])
        b = shape.boundary_samples(h)
        parts.append(b[shape.contains(b)])
    cz, cedges = shape.curve_samples(h)
    offset = sum(p.size for p in parts)
    parts.append(cz)
    raw = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    if raw.size == 0:
        raise EmptySetError("shape has no samples at this resolution")
    samples, remap = _dedupe(raw, 1e-9 * h)

    # proximity edges only through 2-d parts; curve pieces connect along
    # the curve, since probing a chord cannot tell a gap in a curve from
    # another piece of it
    region = _region_part(shape)
    pairs = np.zeros((0, 2), dtype=int)
    if region is not None:
        tree = cKDTree(np.column_stack([samples.real, samples.imag]))
        pairs = tree.query_pairs(np.sqrt(2) * h * (1 + 1e-6), output_type="ndarray")
    if pairs.size:
        za, zb = samples[pairs[:, 0]], samples[pairs[:, 1]]
        ok = np.ones(pairs.shape[0], dtype=bool)
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            ok &= region.contains(za + t * (zb - za), shape.tol)
        pairs = pairs[ok]
    if cedges.size:
        ce = remap[cedges + offset]
        ce = ce[ce[:, 0] != ce[:, 1]]
        pairs = np.concatenate([pairs.reshape(-1, 2), ce])
    pairs = np.unique(np.sort(pairs, axis=1), axis=0) if pairs.size else np.zeros((0, 2), dtype=int)
    w = np.abs(samples[pairs[:, 0]] - samples[pairs[:, 1]])
    n = samples.size
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    graph = coo_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n)).tocsr()
    return PlaneSet(shape, h, samples, graph)


def components(X):
    """Graph-connected components, ordered by their smallest sample index."""
    if len(X) == 0:
        raise EmptySetError("empty plane set")
    lab = X.labels
    out = []
    for c in range(lab.max() + 1):
        idx = np.flatnonzero(lab == c)
        z = X.samples[idx]
        out.append(Component(idx, complex(z.real.min(), z.imag.min()), complex(z.real.max(), z.imag.max())))
    return out
