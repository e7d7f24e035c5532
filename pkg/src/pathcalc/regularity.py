"""Geodesic distance inside a discretized set and regularity constants."""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import MembershipError, PerfectnessError
from .geometry import components, discretize
from .validation import as_point

# 8-connected grid paths overshoot straight lines by at most sec(pi/8) - 1
GRID_DISTORTION = 1 / np.cos(np.pi / 8) - 1


@dataclass(frozen=True)
class Geodesic:
    raw: float
    straightened: float
    vertices: np.ndarray
    source: int
    target: int


def _source_index(X, z):
    i, d = X.nearest(as_point(z))
    if d > X.h * (1 + 1e-9):
        raise MembershipError(f"point {z} is {d:.3g} from the nearest sample (h={X.h})")
    return i


def _chain(pred, src, dst):
    out = [dst]
    while out[-1] != src:
        out.append(pred[out[-1]])
    return out[::-1]


def straighten(X, verts):
    """Greedy shortcut: from each vertex jump to the farthest vertex visible inside X."""
    verts = np.asarray(verts, dtype=complex)
    if verts.size <= 2:
        return verts
    out = [verts[0]]
    i = 0
    n = verts.size
    while i < n - 1:
        ok = X.segment_inside(verts[i], verts[i + 1 :])
        j = i + 1 + int(np.flatnonzero(ok).max()) if ok.any() else i + 1
        out.append(verts[j])
        i = j
    return np.array(out)


def _length(verts):
    return float(np.sum(np.abs(np.diff(verts))))


def geodesic(X, z, w):
    """Shortest graph path between the samples nearest ``z`` and ``w``,
    with its raw and straightened lengths (inf when disconnected)."""
    s, t = _source_index(X, z), _source_index(X, w)
    # run from the lower index so d(z, w) == d(w, z) bit for bit
    a, b = min(s, t), max(s, t)
    dist, pred = dijkstra(X.graph, directed=False, indices=a, return_predecessors=True)
    if not np.isfinite(dist[b]):
        return Geodesic(np.inf, np.inf, np.zeros(0, dtype=complex), s, t)
    verts = X.samples[_chain(pred, a, b)]
    st = straighten(X, verts)
    length = _length(st)
    if s > t:
        st = st[::-1]
    return Geodesic(float(dist[b]), length, st, s, t)


def geodesic_distance(X, z, w, straightened=True):
    g = geodesic(X, z, w)
    return g.straightened if straightened else g.raw


def _source_max_ratio(X, s, dist, pred, targets, straighten_paths=True):
    """Largest d/|z-w| from sample ``s`` over ``targets`` (raw and straightened)."""
    zs = X.samples[s]
    targets = targets[targets != s]
    zt = X.samples[targets]
    e = np.abs(zt - zs)
    d = dist[targets]
    raw = d / e
    ir = int(np.argmax(raw))
    raw_max = float(raw[ir])
    if not straighten_paths:
        return raw_max, raw_max, int(targets[ir])
    best, best_t = -np.inf, -1
    vis = X.segment_inside(zs, zt)
    if vis.any():
        best, best_t = 1.0, int(targets[np.flatnonzero(vis)[0]])
    order = np.argsort(-raw, kind="stable")
    for j in order:
        if vis[j]:
            continue
        if raw[j] <= best:
            break
        verts = X.samples[_chain(pred, s, targets[j])]
        r = _length(straighten(X, verts)) / e[j]
        if r > best:
            best, best_t = r, int(targets[j])
    return raw_max, float(best), best_t


def pointwise_constant(X, z, straightened=True, return_detail=False):
    """``max_w d(z, w) / |z - w|`` over samples ``w`` of the component of ``z``."""
    s = _source_index(X, z)
    comp = np.flatnonzero(X.labels == X.labels[s])
    if comp.size < 2:
        raise PerfectnessError(f"sample nearest {z} is isolated")
    dist, pred = dijkstra(X.graph, directed=False, indices=s, return_predecessors=True)
    raw, st, t = _source_max_ratio(X, s, dist, pred, comp, straightened)
    if return_detail:
        return {"k": st, "k_raw": raw, "source": complex(X.samples[s]), "target": complex(X.samples[t])}
    return st


def farthest_point_subset(X, m, indices=None):
    """Greedy farthest-point sample seeded at the lexicographically least point."""
    idx = np.arange(len(X)) if indices is None else np.asarray(indices)
    z = X.samples[idx]
    m = min(m, idx.size)
    start = int(np.lexsort((z.imag, z.real))[0])
    chosen = [start]
    dmin = np.abs(z - z[start])
    for _ in range(m - 1):
        j = int(np.argmax(dmin))
        chosen.append(j)
        dmin = np.minimum(dmin, np.abs(z - z[j]))
    return idx[np.array(chosen)]


def _all_source_ratios(X, sources, targets, straightened=True, batch=16):
    out = []
    for b in range(0, sources.size, batch):
        src = sources[b : b + batch]
        dist, pred = dijkstra(X.graph, directed=False, indices=src, return_predecessors=True)
        for r, s in enumerate(src):
            out.append((int(s),) + _source_max_ratio(X, s, dist[r], pred[r], targets, straightened))
    return out


def uniform_constant(X, straightened=True, max_full=2000, n_sources=200, return_detail=False):
    """``max d(z, w) / |z - w|`` over sampled pairs.

    All pairs when the set has at most ``max_full`` samples; otherwise pairs
    within a farthest-point subset of ``n_sources`` samples. Disconnected
    sets give inf.
    """
    comps = components(X)
    if len(comps) > 1:
        res = {"k": np.inf, "k_raw": np.inf, "worst_pair": None, "n_components": len(comps)}
        return res if return_detail else np.inf
    if len(X) < 2:
        raise PerfectnessError("a single sample has no pairs")
    idx = np.arange(len(X)) if len(X) <= max_full else farthest_point_subset(X, n_sources)
    rows = _all_source_ratios(X, idx, idx, straightened)
    raw = max(r[1] for r in rows)
    # first maximum in source order
    best = max(rows, key=lambda r: (r[2], -r[0]))
    res = {
        "k": best[2],
        "k_raw": raw,
        "worst_pair": (complex(X.samples[best[0]]), complex(X.samples[best[3]])),
        "n_components": 1,
        "pairs": "all" if len(X) <= max_full else f"farthest-point subset of {idx.size}",
    }
    return res if return_detail else res["k"]


def lift_boundary_uniform(k_boundary):
    """Uniform constant for X when its boundary is uniformly regular with ``k``."""
    k = float(k_boundary)
    if not k >= 1:
        raise ValueError("regularity constants are >= 1")
    return k + 1


def lift_boundary_pointwise(k_w1):
    """Pointwise constant at an interior point from the boundary constant at ``w1``."""
    k = float(k_w1)
    if not k >= 1:
        raise ValueError("regularity constants are >= 1")
    return 2 + 3 * k


@dataclass
class RegularityReport:
    per_point_k: dict
    uniform_k: float
    worst_pair: tuple
    resolution: float
    divergent_points: list = field(default_factory=list)
    suspect: bool = False
    uniform_k_raw: float = np.nan
    fine_k: float = np.nan

    def to_dict(self):
        return {
            "uniform_k": self.uniform_k,
            "uniform_k_raw": self.uniform_k_raw,
            "fine_k": self.fine_k,
            "worst_pair": None if self.worst_pair is None else [[z.real, z.imag] for z in self.worst_pair],
            "resolution": self.resolution,
            "divergent_points": [[z.real, z.imag] for z in self.divergent_points],
            "suspect": self.suspect,
            "per_point_k": [[p.real, p.imag, k] for p, k in sorted(self.per_point_k.items(), key=lambda kv: (kv[0].real, kv[0].imag))],
        }


def _component_scan(X, comp_idx, straightened, max_full, n_sources):
    # same pair sampling as uniform_constant
    src = comp_idx if comp_idx.size <= max_full else farthest_point_subset(X, n_sources, comp_idx)
    rows = _all_source_ratios(X, src, src, straightened)
    per = {complex(X.samples[r[0]]): r[2] for r in rows}
    best = max(rows, key=lambda r: (r[2], -r[0]))
    return per, best


def componentwise_regularity(X, cutoff=1e3, straightened=True, max_full=2000, n_sources=200, fine=None):
    """Pointwise constants per component at ``h`` and at ``h/2``.

    A component is "suspect" when its largest constant exceeds ``cutoff``
    at either resolution or more than doubles under refinement; this is a
    heuristic diagnosis, not a proof.
    """
    if fine is None:
        fine = discretize(X.shape, X.h / 2)
    fine_lab = fine.labels
    out = {}
    for c, comp in enumerate(components(X)):
        if comp.indices.size < 2:
            out[c] = RegularityReport({}, np.inf, None, X.h, [complex(X.samples[comp.indices[0]])], True)
            continue
        per, best = _component_scan(X, comp.indices, straightened, max_full, n_sources)
        # matching fine component: the one holding the sample nearest this component's first sample
        j, _ = fine.nearest(X.samples[comp.indices[0]])
        fidx = np.flatnonzero(fine_lab == fine_lab[j])
        if fidx.size >= 2:
            _, fbest = _component_scan(fine, fidx, straightened, max_full, n_sources)
            kf = fbest[2]
        else:
            kf = np.inf
        k = best[2]
        divergent = [p for p, v in per.items() if v > cutoff]
        suspect = bool(k > cutoff or kf > cutoff or kf > 2 * k)
        out[c] = RegularityReport(
            per_point_k=per,
            uniform_k=k,
            worst_pair=(complex(X.samples[best[0]]), complex(X.samples[best[3]])),
            resolution=X.h,
            divergent_points=divergent,
            suspect=suspect,
            uniform_k_raw=best[1],
            fine_k=kf,
        )
    return out
