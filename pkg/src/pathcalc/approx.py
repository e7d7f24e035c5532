"""Polynomial and rational approximation on discretized sets.

Least squares in an Arnoldi-orthogonalized polynomial basis stands in for
Mergelyan's theorem; success is always judged by the measured error.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .errors import (
    DeltaTooCoarseError,
    NonAntidifferentiableError,
    NotRadiallySelfAbsorbingError,
    PolePlacementError,
    UnderdeterminedError,
)
from .functions import Dilated, Fn, Polynomial, RationalFn, SampledFn, as_fn
from .geometry import components
from .integrate import path_integral, winding_number
from .validation import as_point, check_points, check_positive, check_target

__all__ = [
    "Polynomial",
    "RationalFn",
    "FittedPolynomial",
    "PolynomialApproximator",
    "ResidueCorrectedRationalApproximator",
    "poly_fit",
    "antiderivative",
    "ClopenCover",
    "clopen_cover",
    "PiecewiseFn",
    "idempotent_correct",
    "approx_pipeline",
    "rational_fit_with_residue_correction",
    "rational_antiderivative",
    "radial_check",
    "dilation_approx",
]


# ---------------------------------------------------------------- Arnoldi basis


def _arnoldi(u, degree):
    """Orthonormal (w.r.t. the sample mean inner product) Krylov basis of u.

    Returns Q (m x degree+1) and the Hessenberg matrix H (degree+1 x degree).
    Each step is orthogonalized twice.
    """
    m = u.size
    Q = np.zeros((m, degree + 1), dtype=complex)
    H = np.zeros((degree + 1, degree), dtype=complex)
    Q[:, 0] = 1.0
    for k in range(1, degree + 1):
        q = u * Q[:, k - 1]
        for _ in range(2):
            c = Q[:, :k].conj().T @ q / m
            q = q - Q[:, :k] @ c
            H[:k, k - 1] += c
        H[k, k - 1] = np.linalg.norm(q) / np.sqrt(m)
        if H[k, k - 1] == 0:
            raise UnderdeterminedError(f"Krylov basis breaks down at degree {k}")
        Q[:, k] = q / H[k, k - 1]
    return Q, H


def _basis_eval(H, u, order=0):
    """Basis values (order 0) or their ``order``-th u-derivatives at u."""
    n = H.shape[1]
    W = np.zeros((u.size, n + 1), dtype=complex)
    W[:, 0] = 1.0
    for k in range(1, n + 1):
        W[:, k] = (u * W[:, k - 1] - W[:, :k] @ H[:k, k - 1]) / H[k, k - 1]
    for r in range(1, order + 1):
        D = np.zeros_like(W)
        for k in range(1, n + 1):
            D[:, k] = (r * W[:, k - 1] + u * D[:, k - 1] - D[:, :k] @ H[:k, k - 1]) / H[k, k - 1]
        W = D
    return W


class FittedPolynomial(Fn):
    """Polynomial stored in an Arnoldi basis of ``u = (z - center)/scale``.

    ``order`` > 0 gives the corresponding complex derivative of the same
    polynomial.
    """

    def __init__(self, H, coef, center, scale, order=0, points=None):
        self.H = H
        self.coef = np.asarray(coef, dtype=complex)
        self.center = complex(center)
        self.scale = float(scale)
        self.order = int(order)
        self.points = points

    @property
    def degree(self):
        return max(0, self.H.shape[1] - self.order)

    def _eval(self, z):
        u = (z - self.center) / self.scale
        out = np.empty(z.shape, dtype=complex)
        step = 65536
        for i in range(0, z.size, step):
            out[i : i + step] = _basis_eval(self.H, u[i : i + step], self.order) @ self.coef
        return out / self.scale**self.order

    def _derivative(self):
        return FittedPolynomial(self.H, self.coef, self.center, self.scale, self.order + 1, self.points)

    def to_polynomial(self):
        """Monomial coefficients in ``u`` (ill-conditioned for high degree)."""
        if self.order:
            return self.base().to_polynomial().derivative(self.order)
        n = self.H.shape[1]
        C = np.zeros((n + 1, n + 1), dtype=complex)
        C[0, 0] = 1.0
        for k in range(1, n + 1):
            shifted = np.concatenate([[0.0], C[:-1, k - 1]])
            C[:, k] = (shifted - C[:, :k] @ self.H[:k, k - 1]) / self.H[k, k - 1]
        return Polynomial(C @ self.coef, self.center, self.scale)

    def base(self):
        return FittedPolynomial(self.H, self.coef, self.center, self.scale, 0, self.points)

    @property
    def coeffs(self):
        return self.to_polynomial().coeffs

    def to_descriptor(self):
        return self.to_polynomial().to_descriptor()

    def __repr__(self):
        return f"FittedPolynomial(degree={self.degree}, order={self.order})"


def _center_scale(Z):
    c = complex((Z.real.min() + Z.real.max()) / 2, (Z.imag.min() + Z.imag.max()) / 2)
    s = float(np.max(np.abs(Z - c)))
    return c, (s if s > 0 else 1.0)


class PolynomialApproximator(RegressorMixin, BaseEstimator):
    """Least-squares polynomial fit of complex data on plane points.

    Parameters
    ----------
    degree : int
        Polynomial degree.
    center, scale : optional
        Affine normalization ``u = (z - center) / scale``; by default the
        bounding-box centre and the largest distance from it.
    """

    def __init__(self, degree=8, center=None, scale=None):
        self.degree = degree
        self.center = center
        self.scale = scale

    def fit(self, Z, y):
        Z = check_points(Z, "Z")
        y = check_target(y, Z.size)
        d = int(self.degree)
        if d < 0:
            raise ValueError("degree must be >= 0")
        if d >= Z.size:
            raise UnderdeterminedError(f"degree {d} needs more than {Z.size} samples")
        c, s = _center_scale(Z)
        c = c if self.center is None else as_point(self.center)
        s = s if self.scale is None else check_positive(self.scale, "scale")
        Q, H = _arnoldi((Z - c) / s, d)
        coef = Q.conj().T @ y / Z.size
        # one refinement step against the loss of orthogonality
        coef = coef + np.linalg.lstsq(Q, y - Q @ coef, rcond=None)[0]
        self.poly_ = FittedPolynomial(H, coef, c, s, 0, Z)
        resid = np.abs(self.poly_(Z) - y)
        self.sup_error_ = float(resid.max())
        self.n_samples_ = Z.size
        return self

    def predict(self, Z):
        check_is_fitted(self, "poly_")
        return self.poly_(check_points(Z, "Z"))

    def score(self, Z, y):
        """Negative sup error (higher is better)."""
        return -float(np.max(np.abs(self.predict(Z) - check_target(y, np.size(Z)))))


def _values_on(g, pts):
    if isinstance(g, SampledFn):
        return g(pts)
    return as_fn(g)(pts)


def poly_fit(g, X, degree):
    """Fit ``g`` on the samples of ``X``; returns (polynomial, sup sample error)."""
    Z = X.samples
    est = PolynomialApproximator(degree=degree).fit(Z, _values_on(g, Z))
    return est.poly_, est.sup_error_


def antiderivative(p, z0, v0):
    """Polynomial ``P`` with ``P' = p`` and ``P(z0) = v0``.

    Monomial polynomials are integrated exactly by shifting coefficients.
    Fitted polynomials get a degree+1 polynomial in a fresh Arnoldi basis
    on the same points, solved from ``P' = p`` at those points; the
    residual of that solve is kept on the result as ``derivative_residual``.
    """
    z0, v0 = as_point(z0), complex(v0)
    if isinstance(p, Polynomial):
        P = p.integral()
        a = P.coeffs.copy()
        a[0] += v0 - P(z0)
        return Polynomial(a, P.center, P.scale)
    if isinstance(p, FittedPolynomial) and p.order == 0:
        Z = p.points
        u = (Z - p.center) / p.scale
        _, H = _arnoldi(u, p.H.shape[1] + 1)
        dW = _basis_eval(H, u, 1) / p.scale
        target = p(Z)
        b = np.linalg.lstsq(dW[:, 1:], target, rcond=None)[0]
        coef = np.concatenate([[0.0], b])
        P = FittedPolynomial(H, coef, p.center, p.scale, 0, Z)
        coef[0] = v0 - P(z0)
        P = FittedPolynomial(H, coef, p.center, p.scale, 0, Z)
        P.derivative_residual = float(np.max(np.abs(dW @ coef - target)))
        return P
    raise TypeError(f"cannot antidifferentiate {type(p).__name__}")


# ---------------------------------------------------------------- idempotents


@dataclass
class ClopenCover:
    labels: np.ndarray
    anchors: list
    anchor_index: list
    delta: float
    components: list = field(repr=False, default_factory=list)

    @property
    def n_pieces(self):
        return len(self.anchors)


def clopen_cover(X, delta):
    """Partition the samples into disjoint clopen pieces around components.

    Each sample goes to the nearest component; components closer than
    ``delta`` to one another cannot be separated at this scale.
    """
    delta = check_positive(delta, "delta")
    if delta <= 2 * X.h:
        raise ValueError(f"delta={delta} must exceed 2h={2 * X.h}")
    comps = components(X)
    z = X.samples
    trees = [cKDTree(np.column_stack([z[c.indices].real, z[c.indices].imag])) for c in comps]
    pts = np.column_stack([z.real, z.imag])
    dist = np.column_stack([t.query(pts)[0] for t in trees])
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            gap = float(dist[comps[j].indices, i].min())
            if gap < delta:
                raise DeltaTooCoarseError(f"components {i} and {j} are {gap:.3g} apart, delta={delta}")
    labels = np.argmin(dist, axis=1)
    anchor_index = [int(c.indices[0]) for c in comps]
    for i, c in enumerate(comps):
        piece = labels == i
        if not np.all(dist[piece, i] < delta) or not piece[c.indices].all():
            raise DeltaTooCoarseError(f"piece {i} leaves the delta-neighbourhood of its component")
    return ClopenCover(labels, [complex(z[k]) for k in anchor_index], anchor_index, delta, comps)


class PiecewiseFn(Fn):
    """``base + offsets[label(z)]``, the label taken from the nearest sample."""

    def __init__(self, base, offsets, points, labels):
        self.base = base
        self.offsets = np.asarray(offsets, dtype=complex)
        self.points = points
        self.labels = labels
        self._tree = cKDTree(np.column_stack([points.real, points.imag]))

    def piece(self, z):
        _, i = self._tree.query(np.column_stack([z.real, z.imag]))
        return self.labels[i]

    def _eval(self, z):
        return self.base._eval(z) + self.offsets[self.piece(z)]

    def _derivative(self):
        # locally constant offsets have zero derivative
        return self.base._derivative()


def idempotent_correct(F_anti, f, cover, X):
    """``h = F - F(z_i) + f(z_i)`` on piece ``i``."""
    F_anti, f = as_fn(F_anti), as_fn(f)
    a = np.array(cover.anchors)
    offsets = f(a) - F_anti(a)
    return PiecewiseFn(F_anti, offsets, X.samples, cover.labels)


# ---------------------------------------------------------------- pipeline

DEGREE_LADDER = (0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)


@dataclass
class PipelineResult:
    h: Fn
    achieved: float
    success: bool
    degree: int
    target: float
    fit_error: float
    delta: float
    history: list
    L: float
    cover: ClopenCover = field(repr=False, default=None)
    p: Fn = field(repr=False, default=None)

    def __iter__(self):
        return iter((self.h, self.achieved))

    def to_dict(self):
        return {
            "achieved": self.achieved,
            "success": self.success,
            "degree": self.degree,
            "target_fit_error": self.target,
            "fit_error": self.fit_error,
            "delta": self.delta,
            "L": self.L,
            "pieces": None if self.cover is None else self.cover.n_pieces,
            "history": self.history,
        }


def _modulus(vals, tree, delta):
    pairs = tree.query_pairs(delta, output_type="ndarray")
    if pairs.size == 0:
        return 0.0
    return float(np.max(np.abs(vals[pairs[:, 0]] - vals[pairs[:, 1]])))


def approx_pipeline(f, g, X, F, eps, degree_cap=64, degrees=DEGREE_LADDER, carrier_spacing=None):
    """Approximate ``f`` in the F-derivative norm by polynomials plus idempotents.

    Fits ``p ~ g`` until ``sup|p - g| < min(eps/3, eps/(3L))``, integrates,
    picks ``delta`` from the sample modulus of continuity of ``P - f``,
    and corrects ``P`` by a constant on each clopen piece. ``achieved`` is
    ``sup_X |h - f| + sup_carrier |h' - g|``, recomputed from scratch.
    """
    eps = check_positive(eps, "eps")
    f = as_fn(f)
    L = F.sup_length
    target = min(eps / 3, eps / (3 * L)) if L > 0 else eps / 3
    Z = X.samples
    gz = _values_on(g, Z)
    history = []
    best = None
    for d in degrees:
        if d > degree_cap or d >= Z.size:
            break
        est = PolynomialApproximator(degree=d).fit(Z, gz)
        history.append({"degree": d, "sup_error": est.sup_error_})
        if best is None or est.sup_error_ < best[1]:
            best = (est.poly_, est.sup_error_, d)
        if est.sup_error_ < target:
            break
    p, fit_err, deg = best

    comps = components(X)
    z0 = complex(Z[comps[0].indices[0]])
    P = antiderivative(p, z0, f(z0))
    resid = P(Z) - f(Z)
    tree = cKDTree(np.column_stack([Z.real, Z.imag]))

    gaps = []
    pts = np.column_stack([Z.real, Z.imag])
    for i in range(len(comps)):
        ti = cKDTree(pts[comps[i].indices])
        for j in range(i + 1, len(comps)):
            gaps.append(float(ti.query(pts[comps[j].indices])[0].min()))
    lo, hi = 2.01 * X.h, 32 * X.h
    if gaps:
        hi = min(hi, 0.999 * min(gaps))
    if _modulus(resid, tree, lo) >= eps / 3 or hi <= lo:
        delta = lo
    elif _modulus(resid, tree, hi) < eps / 3:
        delta = hi
    else:
        for _ in range(40):
            mid = (lo + hi) / 2
            if _modulus(resid, tree, mid) < eps / 3:
                lo = mid
            else:
                hi = mid
        delta = lo
    cover = clopen_cover(X, delta)
    h = idempotent_correct(P, f, cover, X)

    cp = F.carrier_points(carrier_spacing or F.resolution or X.h)[0]
    achieved = float(np.max(np.abs(h(Z) - f(Z)))) + float(np.max(np.abs(h.derivative()(cp) - _values_on(g, cp))))
    return PipelineResult(h, achieved, achieved < eps, deg, target, fit_err, delta, history, L, cover, p)


# ---------------------------------------------------------------- rational


class ResidueCorrectedRationalApproximator(RegressorMixin, BaseEstimator):
    """Least squares in ``{u^k} u {(z - a_j)^-m}``; simple-pole residues can be zeroed.

    Parameters
    ----------
    degree : int
        Degree of the polynomial part.
    poles : sequence of complex
        Pole locations, all off the sample set.
    pole_order : int
        Highest pole order per pole.
    """

    def __init__(self, degree=8, poles=(), pole_order=6):
        self.degree = degree
        self.poles = poles
        self.pole_order = pole_order

    def _design(self, Z):
        u = (Z - self.center_) / self.scale_
        cols = [u**k for k in range(int(self.degree) + 1)]
        for a, rho in zip(self.poles_, self.rho_):
            w = rho / (Z - a)
            cols += [w**m for m in range(1, int(self.pole_order) + 1)]
        return np.column_stack(cols)

    def fit(self, Z, y):
        Z = check_points(Z, "Z")
        y = check_target(y, Z.size)
        self.poles_ = [as_point(a) for a in self.poles]
        self.rho_ = [float(np.min(np.abs(Z - a))) for a in self.poles_]
        if any(r == 0 for r in self.rho_):
            raise PolePlacementError("a pole coincides with a sample")
        self.center_, self.scale_ = _center_scale(Z)
        A = self._design(Z)
        if A.shape[1] > Z.size:
            raise UnderdeterminedError("more basis functions than samples")
        norms = np.linalg.norm(A, axis=0)
        sol = np.linalg.lstsq(A / norms, y, rcond=None)[0] / norms
        nd = int(self.degree) + 1
        poly = Polynomial(sol[:nd], self.center_, self.scale_)
        terms = []
        k = nd
        for a, rho in zip(self.poles_, self.rho_):
            for m in range(1, int(self.pole_order) + 1):
                terms.append((a, m, sol[k] * rho**m))
                k += 1
        self.rational_ = RationalFn(poly, terms)
        self.sup_error_ = float(np.max(np.abs(self.rational_(Z) - y)))
        return self

    def predict(self, Z):
        check_is_fitted(self, "rational_")
        return self.rational_(check_points(Z, "Z"))

    def residues(self):
        check_is_fitted(self, "rational_")
        return self.rational_.residues()

    def corrected(self):
        """The fit with every simple-pole coefficient replaced by 0."""
        check_is_fitted(self, "rational_")
        r = self.rational_
        terms = [(a, m, 0j if m == 1 else c) for a, m, c in r.pole_terms]
        return RationalFn(r.poly_part, terms)


@dataclass
class ResidueFit:
    rational: RationalFn
    uncorrected: RationalFn
    pre_error: float
    post_error: float
    residues: dict
    loop_integrals: list
    loop_bounds: list

    def to_dict(self):
        return {
            "pre_error": self.pre_error,
            "post_error": self.post_error,
            "residues": [{"pole": [a.real, a.imag], "abs": abs(c)} for a, c in self.residues.items()],
            "loop_integrals": [abs(v) for v in self.loop_integrals],
            "loop_bounds": self.loop_bounds,
            "rational": self.rational.to_descriptor(),
        }


def rational_fit_with_residue_correction(g, X, poles, loops, degree, pole_order=6):
    """Fit ``g`` by a rational function with the given poles and drop simple-pole residues."""
    poles = [as_point(a) for a in poles]
    if len(loops) != len(poles):
        raise ValueError("one loop per pole")
    for a in poles:
        dmin = float(np.min(np.abs(X.samples - a)))
        if dmin <= X.h or bool(X.contains(np.array([a]))[0]):
            raise PolePlacementError(f"pole {a} is in X or within h of it (distance {dmin:.3g})")
    for a, loop in zip(poles, loops):
        if winding_number(loop, a) == 0:
            raise ValueError(f"loop does not wind around pole {a}")
    Z = X.samples
    y = _values_on(g, Z)
    est = ResidueCorrectedRationalApproximator(degree, poles, pole_order).fit(Z, y)
    r = est.corrected()
    post = float(np.max(np.abs(r(Z) - y)))
    ints, bounds = [], []
    for loop in loops:
        ints.append(path_integral(r, loop, 1e-13).value)
        s = np.linspace(0, loop.length, 2049)
        bounds.append(1e-9 * (1 + float(np.max(np.abs(r(loop.at(s))))) * loop.length))
    return ResidueFit(r, est.rational_, est.sup_error_, post, est.residues(), ints, bounds)


def rational_antiderivative(r, z0, v0):
    """Termwise antiderivative of a residue-free rational, normalized at ``z0``."""
    z0, v0 = as_point(z0), complex(v0)
    for a, m, c in r.pole_terms:
        if m == 1 and c != 0:
            raise NonAntidifferentiableError(f"residue {c} at {a}: the antiderivative would need a logarithm")
    poly = r.poly_part.integral()
    terms = [(a, m - 1, c / (1 - m)) for a, m, c in r.pole_terms if m >= 2 and c != 0]
    R = RationalFn(poly, terms)
    a0 = poly.coeffs.copy()
    a0[0] += v0 - R(z0)
    return RationalFn(Polynomial(a0, poly.center, poly.scale), terms)


# ---------------------------------------------------------------- dilation


def radial_check(X, r, margin=None, n_angles=8):
    """Is every sample ``z`` interior to ``rX`` with room ``margin`` (default h)?

    Checks ``(z + margin e^{i theta}) / r`` in X at ``n_angles`` directions.
    Returns (ok, first failing sample or None). Near sharp corners the room
    inside ``rX`` is about ``(r - 1)|z|`` times the corner's sine, so small
    ``r - 1`` needs a fine h (the corpus star passes r = 17/16 at h = 0.01,
    not at h = 0.05).
    """
    margin = X.h if margin is None else margin
    theta = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    z = X.samples
    probe = (z[:, None] + margin * theta[None, :]) / r
    inside = X.contains(probe).all(axis=1)
    if inside.all():
        return True, None
    return False, complex(z[np.flatnonzero(~inside)[0]])


def dilation_approx(f, X, n):
    """``z -> f(n z / (n + 1))`` after checking X is inside the interior of ``((n+1)/n) X``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ok, bad = radial_check(X, (n + 1) / n)
    if not ok:
        raise NotRadiallySelfAbsorbingError(f"sample {bad} is not interior to {(n + 1) / n:.4g} X")
    return Dilated(as_fn(f), n / (n + 1))
