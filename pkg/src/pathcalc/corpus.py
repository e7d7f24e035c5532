"""Built-in example sets with their path families and functions."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import UnknownCorpusError
from .functions import Const, Exp, Fn, Polynomial, RePart
from .geometry import (
    Disk,
    Path,
    PathFamily,
    Polygon,
    Polyline,
    Rect,
    Segment,
    Union,
    _seg_point_dist,
    concat,
    discretize,
)
from .regularity import geodesic


class _ArcLocator:
    """Nearest-segment lookup for a polyline, memoized for recently seen inputs."""

    def __init__(self, vertices):
        self.a = vertices[:-1]
        self.b = vertices[1:]
        self._cache = {}

    def __call__(self, z):
        key = hash(z.tobytes())
        hit = self._cache.get(key)
        if hit is not None and np.array_equal(hit[0], z):
            return hit[1], hit[2]
        best = np.full(z.shape, np.inf)
        idx = np.zeros(z.shape, dtype=int)
        for k in range(self.a.size):
            d = _seg_point_dist(z, self.a[k], self.b[k])
            better = d < best
            best = np.where(better, d, best)
            idx = np.where(better, k, idx)
        dd = self.b[idx] - self.a[idx]
        t = np.clip(np.real((z - self.a[idx]) * np.conj(dd)) / np.abs(dd) ** 2, 0.0, 1.0)
        if len(self._cache) >= 4:
            self._cache.pop(next(iter(self._cache)))
        self._cache[key] = (z.copy(), idx, t)
        return idx, t


class ArcFunction(Fn):
    """Function on a polyline given per segment as a polynomial in the local
    parameter ``t`` in [0, 1]; points are assigned to the nearest segment.

    Its F-derivative along the polyline is ``phi'(t) / (b - a)`` on each
    segment, which :meth:`derivative` returns as another ArcFunction.
    """

    def __init__(self, vertices, pieces, locator=None):
        self.vertices = np.asarray(vertices, dtype=complex)
        self.a = self.vertices[:-1]
        self.b = self.vertices[1:]
        self.pieces = [np.asarray(c, dtype=complex) for c in pieces]
        if len(self.pieces) != self.a.size:
            raise ValueError("one polynomial per segment")
        self.locator = locator or _ArcLocator(self.vertices)

    def with_pieces(self, pieces):
        return ArcFunction(self.vertices, pieces, self.locator)

    def _eval(self, z):
        idx, t = self.locator(z)
        out = np.empty(z.shape, dtype=complex)
        for k in np.unique(idx):
            sel = idx == k
            out[sel] = npoly.polyval(t[sel], self.pieces[k])
        return out

    def _derivative(self):
        d = self.b - self.a
        return self.with_pieces([npoly.polyder(c) / d[k] if c.size > 1 else np.zeros(1) for k, c in enumerate(self.pieces)])


@dataclass
class CorpusEntry:
    """A named example: shape, families, functions and expected phenomena."""

    name: str
    params: dict
    shape: object
    resolution: float
    family_builders: dict = field(repr=False, default_factory=dict)
    functions: dict = field(repr=False, default_factory=dict)
    derivatives: dict = field(repr=False, default_factory=dict)
    expected: list = field(default_factory=list)
    data: dict = field(repr=False, default_factory=dict)

    @cached_property
    def X(self):
        return discretize(self.shape, self.resolution)

    def family(self, name=None):
        name = name or next(iter(self.family_builders))
        if name not in self.family_builders:
            raise UnknownCorpusError(f"{self.name} has no family {name!r}; known: {sorted(self.family_builders)}")
        key = "_family_" + name
        if key not in self.data:
            self.data[key] = self.family_builders[name](self)
        return self.data[key]

    def function(self, name):
        if name not in self.functions:
            raise UnknownCorpusError(f"{self.name} has no function {name!r}; known: {sorted(self.functions)}")
        return self.functions[name]

    def describe(self):
        return {
            "name": self.name,
            "params": self.params,
            "resolution": self.resolution,
            "shape": self.shape.to_dict(),
            "families": sorted(self.family_builders),
            "functions": sorted(self.functions),
            "expected": self.expected,
        }


# ---------------------------------------------------------------- zigzag


def zigzag_points(n):
    """``z_n = 2^-2n``, ``w_n = z_n + 2^-n i`` and ``x*_n = 2^-(2n+1)``."""
    z = 2.0 ** (-2 * n)
    return z, z + 1j * 2.0**-n, 2.0 ** (-2 * n - 1)


def zigzag_generator(n):
    """``gamma_n``: up, left, down, left to ``z_{n+1}``."""
    z, w, xs = zigzag_points(n)
    return Path([z, w, xs + 1j * 2.0**-n, xs, 2.0 ** (-2 * n - 2)])


def _hermite_t(n):
    # f = z_n + (z_{n+1} - z_n)(3t^2 - 2t^3), t = y 2^n
    z, _, _ = zigzag_points(n)
    dz = 2.0 ** (-2 * n - 2) - z
    return [z, 0.0, 3 * dz, -2 * dz]


def _printed_t(n):
    # -3 2^(n-1) y^3 + 9y^2/4 + 2^-2n with y = t 2^-n
    s = 2.0 ** (-2 * n)
    return [s, 0.0, 2.25 * s, -1.5 * s]


def build_zigzag(N=8, resolution=1e-3, formula="hermite"):
    """The zigzag arc truncated after ``N`` generators, closed off by a segment to 0."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if formula not in ("hermite", "printed"):
        raise ValueError("formula is 'hermite' or 'printed'")
    gens = [zigzag_generator(n) for n in range(1, N + 1)]
    zN1 = 2.0 ** (-2 * N - 2)
    link = Path([zN1, 0.0])
    arc = concat(gens + [link])
    pieces = []
    for n in range(1, N + 1):
        c = _hermite_t(n) if formula == "hermite" else _printed_t(n)
        rest = npoly.polyval(1.0, c)
        pieces += [c, [rest], [rest], [rest]]
    # smoothstep to 0 along the link; t runs from z_{N+1} to 0
    pieces.append(npoly.polymul([zN1], npoly.polysub(npoly.polymul([3.0], npoly.polypow([1, -1], 2)), npoly.polymul([2.0], npoly.polypow([1, -1], 3)))))
    f = ArcFunction(arc.vertices, pieces)
    g = f.derivative()

    def truncation(n):
        # f on gamma_1..gamma_{n-1}, constant z_n from gamma_n on
        k = 4 * (n - 1)
        zn = 2.0 ** (-2 * n)
        return f.with_pieces(pieces[:k] + [[zn]] * (len(pieces) - k))

    functions = {"f": f, "g": g, "z": Polynomial([0, 1])}
    derivs = {"f": g, "z": Const(1.0)}
    for n in range(1, N + 1):
        fn = truncation(n)
        functions[f"f_{n}"] = fn
        functions[f"g_{n}"] = fn.derivative()
        derivs[f"f_{n}"] = functions[f"g_{n}"]

    def fam_arc(entry):
        return PathFamily([arc], resolution=entry.resolution)

    def fam_pieces(entry):
        return PathFamily(gens + [link], piecewise=True, resolution=entry.resolution, max_length=arc.length)

    def fam_all(entry):
        return PathFamily([arc] + gens + [link], resolution=entry.resolution)

    expected = [
        {"kind": "diff_quotient_limit", "point": [0.0, 0.0], "along": "z_n", "value": 1.0},
        {"kind": "derivative_limit", "point": [0.0, 0.0], "value": 0.0},
        {"kind": "sup_derivative_bound", "bound": "9/8 * 2^-n"},
        {"kind": "pointwise_regularity", "point": [0.0, 0.0], "regular": False},
    ]
    return CorpusEntry(
        name="zigzag",
        params={"N": N, "formula": formula},
        shape=Polyline(arc.vertices),
        resolution=resolution,
        family_builders={"arc": fam_arc, "pieces": fam_pieces, "all": fam_all},
        functions=functions,
        derivatives=derivs,
        expected=expected,
        data={"arc": arc, "generators": gens, "link": link, "z_n": [2.0 ** (-2 * n) for n in range(1, N + 1)]},
    )


# ---------------------------------------------------------------- many components


class _SegmentConstant(Fn):
    """Constant value per vertical segment, by nearest segment."""

    def __init__(self, xs, values):
        self.xs = np.asarray(xs, dtype=float)
        self.values = np.asarray(values, dtype=complex)

    def _eval(self, z):
        i = np.argmin(np.abs(z.real[:, None] - self.xs[None, :]), axis=1)
        return self.values[i]

    def _derivative(self):
        return Const(0.0)


def build_many_components(N=5, resolution=1e-2):
    """Vertical segments ``S_n`` at ``x = 2^-n`` of height ``2^-n`` plus ``S_0`` on the y-axis."""
    if N < 3:
        raise ValueError("N must be >= 3")
    segs = [Segment(0.0, 0.5j)] + [Segment(2.0**-n, 2.0**-n + 1j * 2.0**-n) for n in range(1, N + 1)]
    xs = [0.0] + [2.0**-n for n in range(1, N + 1)]
    zs = [0.0] + [2.0**-n for n in range(1, N + 1)]
    f = _SegmentConstant(xs, zs)
    functions = {"f": f, "g": Const(0.0)}
    derivs = {"f": Const(0.0)}
    for i in range(N + 1):
        vals = [0.0] + [zs[k] if k <= i else 0.0 for k in range(1, N + 1)]
        functions[f"f_{i}"] = _SegmentConstant(xs, vals)
        derivs[f"f_{i}"] = Const(0.0)

    def fam(entry):
        return PathFamily([Path([s.a, s.b]) for s in segs], resolution=entry.resolution)

    return CorpusEntry(
        name="many_components",
        params={"N": N},
        shape=Union(segs),
        resolution=resolution,
        family_builders={"segments": fam},
        functions=functions,
        derivatives=derivs,
        expected=[
            {"kind": "components", "value": N + 1},
            {"kind": "diff_quotient", "point": [0.0, 0.0], "along": "z_n", "value": 1.0},
            {"kind": "fderivative", "function": "f_i", "value": 0.0},
        ],
        data={"z_n": zs[1:], "z_0": 0.0, "xs": xs},
    )


# ---------------------------------------------------------------- unit square


def vertical_family(X, stride=1):
    """Maximal vertical segments of X at every ``stride``-th grid abscissa."""
    return _runs(X, vertical=True, stride=stride)


def _runs(X, vertical, stride=1):
    a = X.shape.anchor()
    h = X.h
    z = X.samples
    along = z.imag if vertical else z.real
    across = z.real if vertical else z.imag
    a_across = a.real if vertical else a.imag
    u = (across - a_across) / h
    on = np.abs(u - np.round(u)) < 1e-6
    lines = np.round(u[on]).astype(int)
    pts, coord = z[on], along[on]
    out = []
    for line in np.unique(lines)[::stride]:
        sel = np.flatnonzero(lines == line)
        sel = sel[np.argsort(coord[sel], kind="stable")]
        p = pts[sel]
        if p.size < 2:
            continue
        step_ok = (np.abs(np.diff(p)) <= h * (1 + 1e-6)) & X.segment_inside(p[:-1], p[1:])
        start = 0
        for k in range(step_ok.size + 1):
            if k == step_ok.size or not step_ok[k]:
                if k > start:
                    out.append(Path([p[start], p[k]]))
                start = k + 1
    return out


def grid_family(X, stride=1, n_geodesics=8, seed=0):
    """Horizontal and vertical maximal runs plus straightened geodesics between seeded random samples."""
    gens = _runs(X, vertical=False, stride=stride) + _runs(X, vertical=True, stride=stride)
    rng = np.random.default_rng(seed)
    tries = 0
    added = 0
    while added < n_geodesics and tries < 10 * max(n_geodesics, 1):
        tries += 1
        i, j = rng.integers(0, len(X), size=2)
        if i == j:
            continue
        gd = geodesic(X, X.samples[i], X.samples[j])
        if not np.isfinite(gd.raw) or gd.vertices.size < 2:
            continue
        try:
            gens.append(Path(gd.vertices))
        except ValueError:
            continue
        added += 1
    return PathFamily(gens, resolution=X.h, check_tol=1e-12)


def build_square_vertical(resolution=1e-2, stride=1):
    """Unit square with its vertical-segment family and ``f(x+iy) = x``."""
    shape = Rect(0, 1 + 1j)

    def fam_vertical(entry):
        return PathFamily(vertical_family(entry.X, stride), resolution=entry.resolution)

    def fam_grid(entry):
        return grid_family(entry.X, stride)

    return CorpusEntry(
        name="square_vertical",
        params={"stride": stride},
        shape=shape,
        resolution=resolution,
        family_builders={"vertical": fam_vertical, "grid": fam_grid},
        functions={"f": RePart(), "g": Const(0.0)},
        derivatives={"f": Const(0.0)},
        expected=[
            {"kind": "fderivative", "family": "vertical", "verdict": "yes"},
            {"kind": "fderivative", "family": "grid", "verdict": "no"},
            {"kind": "classical_derivative", "verdict": "no"},
            {"kind": "carrier_dense", "value": True},
        ],
    )


# ---------------------------------------------------------------- standard shapes


def star_shape(n_spikes=5, core=0.5, tip=1.0, base=0.45, half_angle=0.3):
    parts = [Disk(0, core)]
    for k in range(n_spikes):
        th = 2 * np.pi * k / n_spikes
        parts.append(Polygon([base * np.exp(1j * (th - half_angle)), tip * np.exp(1j * th), base * np.exp(1j * (th + half_angle))]))
    return Union(parts)


def square_annulus():
    """``[0,3]^2`` minus the open square ``(1,2)^2``, as four closed rectangles."""
    return Union([Rect(0, 3 + 1j), Rect(2j, 3 + 3j), Rect(0, 1 + 3j), Rect(2, 3 + 3j)])


STANDARD = {
    "disk": lambda: Disk(0, 1),
    "square": lambda: Rect(0, 1 + 1j),
    "segment": lambda: Segment(0, 1),
    "square_annulus": square_annulus,
    "star": star_shape,
}


def build_standard(name, resolution=None):
    if name not in STANDARD:
        raise UnknownCorpusError(f"unknown standard shape {name!r}; known: {sorted(STANDARD)}")
    shape = STANDARD[name]()
    resolution = resolution or (0.01 if name == "segment" else 0.05)
    expected = []
    if name in ("disk", "star"):
        expected.append({"kind": "radially_self_absorbing", "value": True})
    if name == "square_annulus":
        expected.append({"kind": "radially_self_absorbing", "value": False})
        expected.append({"kind": "geodesic", "z": [1.5, 0.5], "w": [1.5, 2.5], "value": float(1 + np.sqrt(2))})
    if name in ("disk", "square", "segment"):
        expected.append({"kind": "uniform_regularity", "value": 1.0})

    def fam(entry):
        if name == "segment":
            return PathFamily([Path([0, 1])], resolution=entry.resolution)
        return grid_family(entry.X)

    return CorpusEntry(
        name=name,
        params={},
        shape=shape,
        resolution=resolution,
        family_builders={"grid": fam},
        functions={"z": Polynomial([0, 1]), "z2": Polynomial([0, 0, 1]), "exp": Exp()},
        derivatives={"z": Const(1.0), "z2": Polynomial([0, 2]), "exp": Exp()},
        expected=expected,
    )


BUILDERS = {
    "zigzag": build_zigzag,
    "many_components": build_many_components,
    "square_vertical": build_square_vertical,
}


def get_entry(name, **params):
    """Corpus entry by name; standard shapes accept ``resolution`` only."""
    if name in BUILDERS:
        return BUILDERS[name](**params)
    if name in STANDARD:
        return build_standard(name, **params)
    raise UnknownCorpusError(f"unknown corpus entry {name!r}; known: {sorted(list(BUILDERS) + list(STANDARD))}")


def corpus_function(entry, name, **params):
    return get_entry(entry, **params).function(name)


def corpus_names():
    return sorted(list(BUILDERS) + list(STANDARD))
