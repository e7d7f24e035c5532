"""Contour integrals along polyline paths."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProximityError, RefinementLimitError, UnderResolvedError
from .functions import as_fn
from .geometry import _seg_point_dist
from .validation import as_point, check_positive

GAUSS_ORDER = 8
MIN_PIECE = 2.0**-40
_X, _W = np.polynomial.legendre.leggauss(GAUSS_ORDER)
# map nodes to [0, 1]
_X = (_X + 1) / 2
_W = _W / 2


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    est_error: float
    segments_used: int


def _gauss(g, a, d, t0, t1):
    """Gauss rule on pieces ``a + t d``, t in [t0, t1]; all arrays of the same shape."""
    w = t1 - t0
    t = t0[:, None] + w[:, None] * _X[None, :]
    z = a[:, None] + t * d[:, None]
    vals = g(z)
    return (vals * _W[None, :]).sum(axis=1) * w * d, (np.abs(vals) * _W[None, :]).sum(axis=1) * w * np.abs(d)


def _fsum(v):
    return complex(math.fsum(np.real(v)), math.fsum(np.imag(v)))


def path_integral(g, p, tol=1e-10, max_depth=60, max_pieces=2_000_000):
    """``int_p g(z) dz`` by adaptive 8-point Gauss-Legendre per segment.

    A piece is accepted when its one-level and two-half estimates differ
    by less than its share (by length) of ``tol * (1 + |value|)``. The
    reported ``est_error`` is the sum of those differences, a heuristic.
    Pieces shorter than ``MIN_PIECE * |p|`` are accepted unconditionally so
    piecewise-constant integrands (sampled carrier functions) terminate.
    """
    tol = check_positive(tol, "tol")
    g = as_fn(g)
    a0 = p.vertices[:-1]
    d0 = np.diff(p.vertices)
    L = p.length
    seg = np.arange(a0.size)
    t0 = np.zeros(a0.size)
    t1 = np.ones(a0.size)
    whole, _ = _gauss(g, a0, d0, t0, t1)
    scale = 1.0 + abs(_fsum(whole))

    done_vals, done_err, done_key = [], [], []
    for _ in range(max_depth):
        mid = (t0 + t1) / 2
        a, d = a0[seg], d0[seg]
        left, ml = _gauss(g, a, d, t0, mid)
        right, mr = _gauss(g, a, d, mid, t1)
        halves = left + right
        diff = np.abs(halves - whole)
        share = tol * scale * np.abs(d) * (t1 - t0) / L
        # below this the two estimates differ only by rounding
        floor = 64 * np.finfo(float).eps * (ml + mr)
        # pieces this short are accepted as-is: jumps in g cost at most |jump| * piece length
        tiny = np.abs(d) * (t1 - t0) <= L * MIN_PIECE
        ok = (diff <= np.maximum(share, floor)) | tiny
        done_vals.append(halves[ok])
        done_err.append(diff[ok])
        done_key.append(np.column_stack([seg[ok], t0[ok]]))
        if ok.all():
            break
        bad = ~ok
        seg = np.repeat(seg[bad], 2)
        t0 = np.column_stack([t0[bad], mid[bad]]).ravel()
        t1 = np.column_stack([mid[bad], t1[bad]]).ravel()
        whole = np.column_stack([left[bad], right[bad]]).ravel()
        if seg.size > max_pieces:
            break

    vals = np.concatenate(done_vals)
    errs = np.concatenate(done_err)
    keys = np.concatenate(done_key)
    if not ok.all():
        best = _fsum(np.concatenate([vals, whole]))
        raise RefinementLimitError(f"quadrature did not converge on {seg.size} pieces", best)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    return IntegralResult(_fsum(vals[order]), float(math.fsum(errs[order])), int(vals.size))


def ftc_defect(f, g, p, tol=1e-10):
    """``|int_p g dz - (f(end) - f(start))|``."""
    f = as_fn(f)
    r = path_integral(g, p, tol)
    return abs(r.value - (f(p.end) - f(p.start)))


def winding_number(p, a, return_residual=False):
    """``(1/2 pi i) \\oint_p dz/(z-a)``, rounded to the nearest integer."""
    a = as_point(a)
    if abs(p.chord) > 1e-12 * max(1.0, p.length):
        raise ValueError("winding number needs a closed path")
    dist = _seg_point_dist(np.array([a]), p.vertices[:-1], p.vertices[1:]).min()
    if dist <= 1e-9:
        raise ProximityError(f"point is {dist:.3e} from the path")
    val = path_integral(lambda z: 1.0 / (z - a), p, tol=1e-12).value / (2j * np.pi)
    n = int(round(val.real))
    residual = abs(val - n)
    if residual >= 0.25:
        raise UnderResolvedError(f"winding integral {val} is {residual:.3f} from an integer")
    return (n, residual) if return_residual else n
