"""Function descriptors evaluable at points of the plane.

Every function is a vectorized callable on complex arrays. Closed forms
also know their complex derivatives, which is what the norm and
approximation code consume through :meth:`Fn.derivative`.
"""

import numbers

import numpy as np
from scipy.spatial import cKDTree

from .errors import DescriptorError, NotDifferentiableError
from .validation import as_point, check_points


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _unpair(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise DescriptorError(f"expected [re, im] pair, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, numbers.Number):
        return complex(v)
    raise DescriptorError(f"cannot read a complex number from {v!r}")


class Fn:
    """Base class: a function on (a subset of) the plane."""

    name = "fn"

    def __call__(self, z):
        if np.isscalar(z):
            return complex(self._eval(np.array([z], dtype=complex))[0])
        z = np.asarray(z, dtype=complex)
        return self._eval(z.ravel()).reshape(z.shape)

    def _eval(self, z):
        raise NotImplementedError

    def _derivative(self):
        raise NotDifferentiableError(f"{self!r} has no closed-form complex derivative")

    def derivative(self, k=1):
        out = self
        for _ in range(int(k)):
            out = out._derivative()
        return out

    def has_derivative(self, k=1):
        try:
            self.derivative(k)
        except NotDifferentiableError:
            return False
        return True

    def to_descriptor(self):
        raise DescriptorError(f"{type(self).__name__} has no JSON descriptor")

    def __add__(self, other):
        return Sum(self, as_fn(other))

    def __radd__(self, other):
        return Sum(as_fn(other), self)

    def __sub__(self, other):
        return Sum(self, Scaled(-1.0, as_fn(other)))

    def __rsub__(self, other):
        return Sum(as_fn(other), Scaled(-1.0, self))

    def __neg__(self):
        return Scaled(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Scaled(other, self)
        return Product(self, as_fn(other))

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return Scaled(other, self)
        return Product(as_fn(other), self)


def as_fn(obj):
    """Wrap numbers and plain callables so they behave like :class:`Fn`."""
    if isinstance(obj, Fn):
        return obj
    if isinstance(obj, numbers.Number):
        return Const(obj)
    if callable(obj):
        return Callable(obj)
    raise TypeError(f"cannot interpret {obj!r} as a function")


class Const(Fn):
    def __init__(self, value):
        self.value = complex(value)

    def _eval(self, z):
        return np.full(z.shape, self.value, dtype=complex)

    def _derivative(self):
        return Const(0.0)

    def to_descriptor(self):
        return {"fn": "const", "value": _pair(self.value)}

    def __repr__(self):
        return f"Const({self.value})"


class Exp(Fn):
    def _eval(self, z):
        return np.exp(z)

    def _derivative(self):
        return self

    def to_descriptor(self):
        return {"fn": "exp"}

    def __repr__(self):
        return "Exp()"


class RePart(Fn):
    """``x + iy -> x``: continuous, nowhere complex-differentiable."""

    def _eval(self, z):
        return z.real.astype(complex)

    def to_descriptor(self):
        return {"fn": "re_part"}

    def __repr__(self):
        return "RePart()"


class Callable(Fn):
    def __init__(self, func, deriv=None):
        self.func = func
        self.deriv = deriv

    def _eval(self, z):
        return np.asarray(self.func(z), dtype=complex) * np.ones(z.shape)

    def _derivative(self):
        if self.deriv is None:
            return super()._derivative()
        return as_fn(self.deriv)


class Sum(Fn):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def _eval(self, z):
        return self.a._eval(z) + self.b._eval(z)

    def _derivative(self):
        return Sum(self.a._derivative(), self.b._derivative())

    def __repr__(self):
        return f"({self.a!r} + {self.b!r})"


class Scaled(Fn):
    def __init__(self, c, f):
        self.c, self.f = complex(c), f

    def _eval(self, z):
        return self.c * self.f._eval(z)

    def _derivative(self):
        return Scaled(self.c, self.f._derivative())

    def __repr__(self):
        return f"{self.c}*{self.f!r}"


class Product(Fn):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def _eval(self, z):
        return self.a._eval(z) * self.b._eval(z)

    def _derivative(self):
        return Sum(Product(self.a._derivative(), self.b), Product(self.a, self.b._derivative()))

    def __repr__(self):
        return f"({self.a!r} * {self.b!r})"


class Dilated(Fn):
    """``z -> f(c z)``; the k-th derivative is ``c**k f^(k)(c z)``."""

    def __init__(self, f, c):
        self.f, self.c = f, complex(c)

    def _eval(self, z):
        return self.f._eval(self.c * z)

    def _derivative(self):
        return Scaled(self.c, Dilated(self.f._derivative(), self.c))

    def __repr__(self):
        return f"{self.f!r}∘({self.c}z)"


class SampledFn(Fn):
    """Values known at sample points, extended to the plane by nearest sample."""

    def __init__(self, points, values):
        self.points = check_points(points)
        self.values = np.asarray(values, dtype=complex).ravel()
        if self.values.shape != self.points.shape:
            raise ValueError("points and values differ in length")
        self._tree = cKDTree(np.column_stack([self.points.real, self.points.imag]))

    def _eval(self, z):
        _, idx = self._tree.query(np.column_stack([z.real, z.imag]))
        return self.values[idx]


class Polynomial(Fn):
    """``sum_k coeffs[k] * ((z - center) / scale)**k``.

    ``center`` and ``scale`` default to 0 and 1 (plain monomials); the
    fitting code shifts and scales the variable to keep the basis tame.
    """

    def __init__(self, coeffs, center=0.0, scale=1.0):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        self.coeffs = c
        self.center = complex(center)
        self.scale = float(scale)
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def degree(self):
        return 0 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self):
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def _eval(self, z):
        u = (z - self.center) / self.scale
        out = np.full(z.shape, self.coeffs[-1], dtype=complex)
        for c in self.coeffs[-2::-1]:
            out = out * u + c
        return out

    def _derivative(self):
        k = np.arange(1, len(self.coeffs))
        if k.size == 0:
            return Polynomial([0.0], self.center, self.scale)
        return Polynomial(self.coeffs[1:] * k / self.scale, self.center, self.scale)

    def integral(self):
        """Antiderivative vanishing at ``center``."""
        k = np.arange(1, len(self.coeffs) + 1)
        return Polynomial(np.concatenate([[0.0], self.coeffs * self.scale / k]), self.center, self.scale)

    def __add__(self, other):
        if isinstance(other, Polynomial) and other.center == self.center and other.scale == self.scale:
            n = max(len(self.coeffs), len(other.coeffs))
            a = np.zeros(n, complex)
            a[: len(self.coeffs)] += self.coeffs
            a[: len(other.coeffs)] += other.coeffs
            return Polynomial(a, self.center, self.scale)
        if isinstance(other, numbers.Number):
            a = self.coeffs.copy()
            a[0] += other
            return Polynomial(a, self.center, self.scale)
        return super().__add__(other)

    def to_descriptor(self):
        d = {"fn": "poly", "coeffs": [_pair(c) for c in self.coeffs]}
        if self.center != 0 or self.scale != 1:
            d["center"] = _pair(self.center)
            d["scale"] = self.scale
        return d

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)}, center={self.center}, scale={self.scale})"


class RationalFn(Fn):
    """A polynomial part plus pole terms ``c * (z - a)**(-m)``."""

    def __init__(self, poly_part, pole_terms=()):
        self.poly_part = poly_part if isinstance(poly_part, Polynomial) else Polynomial(poly_part)
        merged = {}
        for a, m, c in pole_terms:
            m = int(m)
            if m < 1:
                raise ValueError("pole orders must be >= 1")
            key = (as_point(a), m)
            merged[key] = merged.get(key, 0j) + complex(c)
        self.pole_terms = tuple((a, m, c) for (a, m), c in sorted(merged.items(), key=lambda kv: (kv[0][0].real, kv[0][0].imag, kv[0][1])))

    @property
    def poles(self):
        seen = []
        for a, _, _ in self.pole_terms:
            if a not in seen:
                seen.append(a)
        return seen

    def residues(self):
        out = {a: 0j for a in self.poles}
        for a, m, c in self.pole_terms:
            if m == 1:
                out[a] += c
        return out

    def _eval(self, z):
        out = self.poly_part._eval(z)
        for a, m, c in self.pole_terms:
            out = out + c * (z - a) ** (-m)
        return out

    def _derivative(self):
        terms = [(a, m + 1, -m * c) for a, m, c in self.pole_terms]
        return RationalFn(self.poly_part._derivative(), terms)

    def to_descriptor(self):
        return {
            "fn": "rational",
            "poly": self.poly_part.to_descriptor(),
            "poles": [{"a": _pair(a), "order": m, "coeff": _pair(c)} for a, m, c in self.pole_terms],
        }

    def __repr__(self):
        return f"RationalFn({self.poly_part!r}, {list(self.pole_terms)})"


def inv_shift(a):
    """``1 / (z - a)``."""
    return RationalFn(Polynomial([0.0]), [(a, 1, 1.0)])


NAMED = {
    "zero": lambda: Const(0.0),
    "one": lambda: Const(1.0),
    "z": lambda: Polynomial([0, 1]),
    "z2": lambda: Polynomial([0, 0, 1]),
    "exp": Exp,
    "re_part": RePart,
    "inv_z": lambda: inv_shift(0.0),
}


def parse_fn(desc):
    """Build a function from a JSON descriptor (dict) or a registered name."""
    if isinstance(desc, str):
        try:
            return NAMED[desc]()
        except KeyError:
            raise DescriptorError(f"unknown function name {desc!r}; known: {sorted(NAMED)}") from None
    if not isinstance(desc, dict) or "fn" not in desc:
        raise DescriptorError(f"function descriptor must be an object with an 'fn' key, got {desc!r}")
    kind = desc["fn"]
    if kind == "poly":
        coeffs = [_unpair(c) for c in desc["coeffs"]]
        return Polynomial(coeffs, _unpair(desc.get("center", 0)), float(desc.get("scale", 1.0)))
    if kind == "exp":
        return Exp()
    if kind == "inv_shift":
        return inv_shift(_unpair(desc["a"]))
    if kind == "re_part":
        return RePart()
    if kind == "const":
        return Const(_unpair(desc["value"]))
    if kind == "rational":
        poly = parse_fn(desc["poly"]) if "poly" in desc else Polynomial([0.0])
        terms = [(_unpair(p["a"]), int(p["order"]), _unpair(p["coeff"])) for p in desc.get("poles", [])]
        return RationalFn(poly, terms)
    if kind == "corpus":
        from .corpus import corpus_function

        return corpus_function(desc["entry"], desc["name"], **desc.get("params", {}))
    if kind in NAMED:
        return NAMED[kind]()
    raise DescriptorError(f"unknown function kind {kind!r}")
