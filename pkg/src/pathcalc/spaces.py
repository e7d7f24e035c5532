"""Weight sequences and the norms of the smooth-function algebras."""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptySetError, NotDifferentiableError
from .functions import Const, Polynomial, SampledFn, as_fn
from .geometry import PathFamily, PlaneSet

# ---------------------------------------------------------------- M-sequences

_LN2 = math.log(2.0)

# exact value, log value, limit of (n!/M_n)^(1/n)
GENERATORS = {
    "factorial": (lambda n: math.factorial(n), lambda n: math.lgamma(n + 1), 1.0),
    "factorial^2": (lambda n: math.factorial(n) ** 2, lambda n: 2 * math.lgamma(n + 1), 0.0),
    "factorial*2^n": (lambda n: math.factorial(n) * 2**n, lambda n: math.lgamma(n + 1) + n * _LN2, 0.5),
    "(2n)!": (lambda n: math.factorial(2 * n), lambda n: math.lgamma(2 * n + 1), 0.0),
    "ones": (lambda n: 1, lambda n: 0.0, math.inf),
}


class MSequence:
    """Positive weights ``M_0, M_1, ...``: a named generator or an explicit prefix."""

    def __init__(self, values=None, generator=None):
        if (values is None) == (generator is None):
            raise ValueError("give exactly one of values or generator")
        if generator is not None and generator not in GENERATORS:
            raise ValueError(f"unknown generator {generator!r}; known: {sorted(GENERATORS)}")
        self.generator = generator
        if values is not None:
            vals = list(values)
            if not vals or any(not (v > 0) for v in vals):
                raise ValueError("M-sequence entries must be positive")
            self.values = vals
        else:
            self.values = None

    @classmethod
    def parse(cls, arg):
        if isinstance(arg, MSequence):
            return arg
        if isinstance(arg, str):
            s = arg.strip()
            if s.startswith("["):
                return cls(values=json.loads(s))
            return cls(generator=s)
        return cls(values=arg)

    @property
    def size(self):
        """Number of available entries (inf for generators)."""
        return math.inf if self.values is None else len(self.values)

    def exact(self, n):
        """Exact value (int for generators, Fraction for listed floats)."""
        if self.generator:
            return GENERATORS[self.generator][0](n)
        v = self.values[n]
        return v if isinstance(v, int) else Fraction(v)

    def __getitem__(self, n):
        if self.generator:
            return float(GENERATORS[self.generator][0](n)) if n < 170 else math.exp(self.log(n))
        return float(self.values[n])

    def log(self, n):
        if self.generator:
            return GENERATORS[self.generator][1](n)
        return math.log(self.values[n])

    @property
    def limit(self):
        """Closed-form limit of ``(n!/M_n)^(1/n)``, when known."""
        return GENERATORS[self.generator][2] if self.generator else None

    def to_dict(self):
        return {"generator": self.generator} if self.generator else {"values": list(map(float, self.values))}


@dataclass
class AlgebraCheck:
    ok: bool
    first_violation: tuple
    all_equal: bool
    checked: int

    def __bool__(self):
        return self.ok


def is_algebra_sequence(M, upto):
    """Check ``binom(m+n, n) M_m M_n <= M_{m+n}`` for all ``m + n <= upto``.

    Exact integer or rational arithmetic throughout. ``M_0 = 1`` is part
    of the condition and is reported as the violation ``(0, 0)``.
    """
    M = MSequence.parse(M)
    if upto > M.size - 1:
        raise ValueError(f"upto={upto} exceeds the prefix length {M.size}")
    vals = [M.exact(n) for n in range(upto + 1)]
    if vals[0] != 1:
        return AlgebraCheck(False, (0, 0), False, 0)
    equal = True
    checked = 0
    for s in range(upto + 1):
        for m in range(s + 1):
            n = s - m
            lhs = math.comb(s, n) * vals[m] * vals[n]
            checked += 1
            if lhs > vals[s]:
                return AlgebraCheck(False, (m, n), False, checked)
            equal = equal and lhs == vals[s]
    return AlgebraCheck(True, None, equal, checked)


@dataclass
class NonanalyticVerdict:
    verdict: str
    tail: list
    fitted_limit: float
    upto: int

    def to_dict(self):
        return {"verdict": self.verdict, "tail": self.tail, "fitted_limit": self.fitted_limit, "upto": self.upto}


def nonanalytic_terms(M, upto):
    """``a_n = (n!/M_n)^(1/n)`` for ``n = 1..upto``, in log space."""
    n = np.arange(1, upto + 1)
    return np.array([math.exp((math.lgamma(k + 1) - M.log(k)) / k) for k in n])


def is_nonanalytic(M, upto=None):
    """Three-way verdict on ``lim (n!/M_n)^(1/n) = 0``.

    yes: the terms decrease, end below 0.01 and the generator's closed form
    has limit 0. no: a fit ``c + b/n`` over the tail ``n in [upto/2, upto]``
    gives ``c > 0.01`` and the terms fall by less than a factor 0.75 across
    that window (a zero limit like ``1/n`` halves there). Otherwise
    inconclusive.
    """
    M = MSequence.parse(M)
    if upto is None:
        upto = 1000 if M.generator else M.size - 1
    if upto > M.size - 1 or upto < 2:
        raise ValueError(f"upto={upto} outside the available prefix")
    a = nonanalytic_terms(M, upto)
    tail_n = np.arange(upto // 2, upto + 1)
    tail = a[tail_n - 1]
    A = np.column_stack([np.ones(tail_n.size), 1.0 / tail_n])
    c = float(np.linalg.lstsq(A, tail, rcond=None)[0][0]) if np.all(np.isfinite(tail)) else math.inf
    decreasing = bool(np.all(np.diff(tail) <= 0))
    if decreasing and a[-1] < 0.01 and (M.limit == 0.0 if M.generator else False):
        v = "yes"
    elif c > 0.01 and tail[-1] > 0.75 * tail[0] and not (M.limit == 0.0):
        v = "no"
    else:
        v = "inconclusive"
    return NonanalyticVerdict(v, [float(x) for x in a[-5:]], c, upto)


# ---------------------------------------------------------------- derivative stacks


@dataclass
class DerivativeStack:
    derivs: list
    provenance: list
    exact_tail: bool = False

    def __post_init__(self):
        if not self.derivs:
            raise ValueError("a derivative stack needs at least one level")
        if len(self.provenance) != len(self.derivs):
            raise ValueError("one provenance tag per level")

    @property
    def depth(self):
        return len(self.derivs) - 1

    @classmethod
    def from_fn(cls, f, n):
        """Closed-form derivatives ``f, f', ..., f^(n)``."""
        f = as_fn(f)
        levels = [f]
        for _ in range(n):
            levels.append(levels[-1].derivative())
        try:
            nxt = levels[-1].derivative()
            tail = _is_zero_fn(nxt)
        except NotDifferentiableError:
            tail = False
        return cls(levels, ["closed-form"] * (n + 1), tail)

    @classmethod
    def from_levels(cls, levels, provenance=None):
        levels = list(levels)
        prov = provenance or ["closed-form" if not isinstance(v, SampledFn) else "estimated-on-carrier" for v in levels]
        return cls(levels, prov, False)


def _is_zero_fn(f):
    if isinstance(f, Polynomial):
        return f.is_zero
    if isinstance(f, Const):
        return f.value == 0
    return False


def carrier_samples(carrier, spacing=None):
    """Sample points of a PlaneSet, a PathFamily carrier, or an explicit array."""
    if isinstance(carrier, PlaneSet):
        pts = carrier.samples
    elif isinstance(carrier, PathFamily):
        pts = carrier.carrier_points(spacing)[0]
    else:
        pts = np.asarray(carrier, dtype=complex).ravel()
    if pts.size == 0:
        raise EmptySetError("empty carrier")
    return pts


def sup_norm(f, pts):
    if isinstance(f, SampledFn) and f.points.shape == pts.shape and np.array_equal(f.points, pts):
        v = f.values
    else:
        v = as_fn(f)(pts)
    return float(np.max(np.abs(v)))


def dn_norm(stack, carrier, n=None, spacing=None):
    """``sum_{k<=n} sup|f^(k)| / k!`` over carrier samples."""
    pts = carrier_samples(carrier, spacing)
    n = stack.depth if n is None else n
    if n > stack.depth:
        raise ValueError(f"stack has depth {stack.depth}, asked for {n}")
    return math.fsum(sup_norm(stack.derivs[k], pts) / math.factorial(k) for k in range(n + 1))


@dataclass
class SeriesNorm:
    partial: float
    terms: list
    converged: bool
    verdict: str
    tail_bound: float = math.nan
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "partial": self.partial,
            "terms": self.terms,
            "converged": self.converged,
            "verdict": self.verdict,
            "tail_bound": self.tail_bound,
        }


def dxm_norm(stack, M, carrier, spacing=None):
    """Partial sum of ``sum_n sup|f^(n)| / M_n`` with a convergence verdict.

    converged: an exactly vanishing tail, or the last three terms below
    ``1e-12 * partial`` with a geometric tail bound (when M has a closed
    form) below the same threshold. diverged: terms non-decreasing over the
    last five levels. Otherwise inconclusive.
    """
    M = MSequence.parse(M)
    if stack.depth + 1 > M.size:
        raise ValueError("M-sequence prefix is shorter than the stack")
    pts = carrier_samples(carrier, spacing)
    terms = [sup_norm(stack.derivs[k], pts) / M[k] for k in range(stack.depth + 1)]
    partial = math.fsum(terms)
    if stack.exact_tail:
        return SeriesNorm(partial, terms, True, "converged", 0.0, ["higher derivatives vanish identically"])
    t = np.array(terms)
    if t.size < 2:
        return SeriesNorm(partial, terms, False, "inconclusive")
    small = t.size >= 3 and bool(np.all(t[-3:] < 1e-12 * partial))
    tail_bound = math.nan
    if M.generator is not None and t.size >= 3 and t[-2] > 0:
        q = float(np.max(t[-3:][1:] / np.where(t[-3:][:-1] > 0, t[-3:][:-1], np.inf)))
        tail_bound = t[-1] * q / (1 - q) if q < 1 else math.inf
    certified = small and (M.generator is None or tail_bound < 1e-12 * max(partial, 1e-300))
    if certified:
        return SeriesNorm(partial, terms, True, "converged", tail_bound)
    if t.size >= 5 and np.all(t[-4:] >= t[-5:-1] * (1 - 1e-9)) and t[-1] > 0:
        return SeriesNorm(partial, terms, False, "diverged", math.inf, ["not in D(X,M) numerically"])
    return SeriesNorm(partial, terms, False, "inconclusive", tail_bound)


def fnorm(f, g, X, family=None, spacing=None):
    """``sup_X |f| + sup |g|`` over the family carrier.

    ``g`` may be a carrier function (its stored values are used) or any
    function, evaluated on ``family``'s carrier samples.
    """
    pts = carrier_samples(X)
    fx = sup_norm(f, pts)
    if isinstance(g, SampledFn) and family is None:
        return fx + (float(np.max(np.abs(g.values))) if g.values.size else 0.0)
    if family is None:
        raise ValueError("need a family (or a carrier function) to evaluate g on the carrier")
    cp = carrier_samples(family, spacing)
    return fx + sup_norm(g, cp)


def cauchy_trace(seq, X, family=None, spacing=None, limit=None, bad_point=None, radii=None):
    """Norm gaps along a sequence of (f_i, g_i) pairs, plus a limit report.

    ``limit`` is an optional (f, g) pair for the uniform limit; if absent
    the last sample values stand in for it. With ``bad_point`` and
    ``radii`` the classical difference quotient of the limit is checked.
    """
    if len(seq) < 3:
        raise ValueError("cauchy_trace needs at least three terms")
    pts = carrier_samples(X)
    cp = None
    if family is not None:
        cp = carrier_samples(family, spacing)

    def on_carrier(g):
        if isinstance(g, SampledFn) and cp is None:
            return g.values
        if cp is None:
            raise ValueError("need a family to evaluate g on the carrier")
        return as_fn(g)(cp)

    F = np.array([as_fn(f)(pts) for f, _ in seq])
    G = np.array([on_carrier(g) for _, g in seq])
    n = len(seq)
    table = np.zeros((n, n))
    for i in range(n):
        table[i] = np.max(np.abs(F - F[i]), axis=1) + np.max(np.abs(G - G[i]), axis=1)
    gaps = [float(table[i, i + 1]) for i in range(n - 1)]
    out = {"gaps": gaps, "table": table.tolist()}
    if limit is not None:
        f_lim = as_fn(limit[0])(pts)
        out["uniform_to_limit"] = [float(np.max(np.abs(F[i] - f_lim))) for i in range(n)]
    if limit is not None and bad_point is not None and radii is not None:
        from .fderiv import classical_limit_check

        vals = classical_limit_check(limit[0], limit[1], X, bad_point, radii)
        out["limit_check"] = vals
        out["limit_differentiable"] = bool(vals[-1] < 1e-2 and all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:])))
    return out
