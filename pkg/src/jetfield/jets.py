"""Truncated multivariate Taylor arithmetic (jet propagation).

The derivative carrier for the whole library.  A :class:`JetValue` holds the
Taylor expansion of a smooth scalar about a base point, truncated at a chosen
order (at most 5).  Arithmetic between JetValues propagates every pure and
mixed partial derivative exactly, with no step-size error, so any quantity
assembled from JetValues carries all of its own derivatives up to the
remaining order.  Reading off a first derivative costs one index shuffle and
lowers the order by one, which is how adapted and covariant derivatives of
derived fields are taken without ever differencing a numeric grid.

Coefficients are stored densely over all monomials of total degree <= order,
in graded order.  Truncating to a lower order is then a prefix slice, and
multiplication is a single gather / segment-sum pass over a precomputed
index table shared by every jet of the same variable set.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError, OrderError

MAX_ORDER = 5

_SPACE_CACHE: dict[tuple, "JetSpace"] = {}


def _monomials_of_degree(nvars, degree):
    """All exponent tuples over `nvars` variables with total degree `degree`."""
    if degree == 0:
        return [(0,) * nvars]
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    out.sort()
    return out


class JetSpace:
    """Shared context for jets over a fixed variable set and maximum order.

    Holds the monomial enumeration, the multiplication index table and the
    per-variable differentiation tables.  Construction is cached; use
    :func:`jet_space`.
    """

    def __init__(self, names, order):
        if order < 0 or order > MAX_ORDER:
            raise OrderError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = tuple(names)
        self.order = order
        self.nvars = len(self.names)
        self.name_index = {nm: i for i, nm in enumerate(self.names)}

        monos = []
        offsets = [0]
        for d in range(order + 1):
            monos.extend(_monomials_of_degree(self.nvars, d))
            offsets.append(len(monos))
        self.monomials = monos
        # offsets[d] .. offsets[d+1] is the index range of degree-d monomials
        self.offsets = offsets
        self.size = len(monos)
        self.mono_index = {m: i for i, m in enumerate(monos)}
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in m) for m in monos], dtype=float
        )

        out_idx, a_idx, b_idx = [], [], []
        for ia, ma in enumerate(monos):
            da = sum(ma)
            for ib in range(offsets[order - da + 1]):
                mb = monos[ib]
                mo = tuple(ea + eb for ea, eb in zip(ma, mb))
                out_idx.append(self.mono_index[mo])
                a_idx.append(ia)
                b_idx.append(ib)
        order_by_out = np.argsort(np.asarray(out_idx), kind="stable")
        self._mul_out = np.asarray(out_idx, dtype=np.intp)[order_by_out]
        self._mul_a = np.asarray(a_idx, dtype=np.intp)[order_by_out]
        self._mul_b = np.asarray(b_idx, dtype=np.intp)[order_by_out]
        # first triple of each output monomial; triples of low-degree outputs
        # form a prefix, so truncated products use a slice of the same table
        self._mul_starts = np.searchsorted(self._mul_out, np.arange(self.size))
        self._mul_cut = [
            len(self._mul_out) if offsets[r + 1] >= self.size
            else int(self._mul_starts[offsets[r + 1]])
            for r in range(order + 1)
        ]

        self._diff = []
        for l in range(self.nvars):
            src, dst, fac = [], [], []
            for i, m in enumerate(monos):
                if m[l] > 0:
                    lowered = list(m)
                    lowered[l] -= 1
                    src.append(i)
                    dst.append(self.mono_index[tuple(lowered)])
                    fac.append(float(m[l]))
            self._diff.append(
                (
                    np.asarray(src, dtype=np.intp),
                    np.asarray(dst, dtype=np.intp),
                    np.asarray(fac, dtype=float),
                )
            )

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


def jet_space(names, order):
    """Cached JetSpace for a variable tuple and order."""
    key = (tuple(names), order)
    space = _SPACE_CACHE.get(key)
    if space is None:
        space = _SPACE_CACHE[key] = JetSpace(names, order)
    return space


class JetValue:
    """Truncated Taylor expansion of a scalar at a point.

    The coefficient for the zero multi-index is the plain value; the
    coefficient stored for monomial m is the partial derivative divided by
    m! (a Taylor coefficient).  Mixed-partial symmetry holds by construction
    because multi-indices are unordered exponent tuples.
    """

    __slots__ = ("space", "order", "c")

    def __init__(self, space, order, c):
        self.space = space
        self.order = order
        self.c = c

    @classmethod
    def constant(cls, space, value, order=None):
        order = space.order if order is None else order
        c = np.zeros(space.size)
        c[0] = float(value)
        return cls(space, order, c)

    @classmethod
    def coordinate(cls, space, name, value, order=None):
        """The coordinate function `name` expanded about `value`."""
        order = space.order if order is None else order
        c = np.zeros(space.size)
        c[0] = float(value)
        if order >= 1:
            unit = [0] * space.nvars
            unit[space.name_index[name]] = 1
            c[space.mono_index[tuple(unit)]] = 1.0
        return cls(space, order, c)

    @property
    def value(self):
        """Plain evaluation at the base point."""
        return float(self.c[0])

    def partial(self, *names):
        """Partial derivative value for the listed variables (with repetition).

        ``j.partial('x1', 'x1')`` is the second pure derivative in x1;
        ``j.partial()`` is the plain value.
        """
        e = [0] * self.space.nvars
        for nm in names:
            e[self.space.name_index[nm]] += 1
        if sum(e) > self.order:
            raise OrderError(
                f"partial of order {sum(e)} requested from an order-{self.order} jet"
            )
        i = self.space.mono_index[tuple(e)]
        return float(self.c[i] * self.space.factorials[i])

    def partials(self):
        """All stored partial derivatives: multi-index tuple -> value."""
        end = self.space.offsets[self.order + 1]
        out = {}
        for i in range(end):
            out[self.space.monomials[i]] = float(self.c[i] * self.space.factorials[i])
        return out

    def truncate(self, order):
        if order > self.order:
            raise OrderError(f"cannot extend an order-{self.order} jet to {order}")
        c = self.c.copy()
        c[self.space.offsets[order + 1]:] = 0.0
        return JetValue(self.space, order, c)

    def d(self, name):
        """Partial-derivative jet with respect to one variable (order drops by 1)."""
        if self.order == 0:
            raise OrderError("jet order exhausted: cannot differentiate an order-0 jet")
        src, dst, fac = self.space._diff[self.space.name_index[name]]
        c = np.zeros(self.space.size)
        c[dst] = self.c[src] * fac
        c[self.space.offsets[self.order]:] = 0.0
        return JetValue(self.space, self.order - 1, c)

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, JetValue):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return JetValue.constant(self.space, float(other), self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        r = min(self.order, o.order)
        c = self.c + o.c
        c[self.space.offsets[r + 1]:] = 0.0
        return JetValue(self.space, r, c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        r = min(self.order, o.order)
        c = self.c - o.c
        c[self.space.offsets[r + 1]:] = 0.0
        return JetValue(self.space, r, c)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__sub__(self)

    def __neg__(self):
        return JetValue(self.space, self.order, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return JetValue(self.space, self.order, self.c * float(other))
        if not isinstance(other, JetValue):
            return NotImplemented
        space = self.space
        r = min(self.order, other.order)
        cut = space._mul_cut[r]
        n_out = space.offsets[r + 1]
        prod = self.c[space._mul_a[:cut]] * other.c[space._mul_b[:cut]]
        c = np.zeros(space.size)
        c[:n_out] = np.add.reduceat(prod, space._mul_starts[:n_out])
        return JetValue(space, r, c)

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return JetValue(self.space, self.order, self.c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if float(other) == 0.0:
                raise DomainError("division by zero")
            return JetValue(self.space, self.order, self.c / float(other))
        if not isinstance(other, JetValue):
            return NotImplemented
        return self * _reciprocal(other)

    def __rtruediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return _reciprocal(self) * float(other)
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, JetValue):
            end = exponent.space.offsets[exponent.order + 1]
            if np.any(exponent.c[1:end] != 0.0):
                raise DomainError("exponent must be constant")
            exponent = exponent.value
        e = float(exponent)
        if e == int(e):
            return _int_power(self, int(e))
        return _real_power(self, e)

    def __repr__(self):
        return f"JetValue({self.value!r}, order={self.order})"


def _compose(u, ders):
    """Taylor composition f(u) from the derivative values ders[k] = f^(k)(u0).

    With w = u - u0 carrying no constant term, w^k only feeds degrees >= k,
    so the Horner sum over k = order..0 is exact at the truncation order.
    """
    r = u.order
    w = u - u.value
    acc = JetValue.constant(u.space, ders[r] / math.factorial(r), r)
    for k in range(r - 1, -1, -1):
        acc = acc * w + ders[k] / math.factorial(k)
    return acc


def _reciprocal(v):
    v0 = v.value
    if v0 == 0.0:
        raise DomainError("division by zero")
    ders = [((-1.0) ** k) * math.factorial(k) / v0 ** (k + 1) for k in range(v.order + 1)]
    return _compose(v, ders)


def _int_power(u, e):
    if e == 0:
        return JetValue.constant(u.space, 1.0, u.order)
    if e < 0:
        return _reciprocal(_int_power(u, -e))
    acc = None
    base = u
    k = e
    while k:
        if k & 1:
            acc = base if acc is None else acc * base
        k >>= 1
        if k:
            base = base * base
    return acc


def _real_power(u, e):
    u0 = u.value
    if u0 <= 0.0:
        raise DomainError(f"fractional power of non-positive base {u0!r}")
    ders = []
    coeff = 1.0
    for k in range(u.order + 1):
        ders.append(coeff * u0 ** (e - k))
        coeff *= e - k
    return _compose(u, ders)


def _as_float_or_jet(fn_float, fn_jet):
    def wrapped(x):
        if isinstance(x, JetValue):
            return fn_jet(x)
        return fn_float(float(x))

    return wrapped


def _sin_jet(u):
    u0 = u.value
    cycle = [math.sin(u0), math.cos(u0), -math.sin(u0), -math.cos(u0)]
    return _compose(u, [cycle[k % 4] for k in range(u.order + 1)])


def _cos_jet(u):
    u0 = u.value
    cycle = [math.cos(u0), -math.sin(u0), -math.cos(u0), math.sin(u0)]
    return _compose(u, [cycle[k % 4] for k in range(u.order + 1)])


def _exp_jet(u):
    e0 = math.exp(u.value)
    return _compose(u, [e0] * (u.order + 1))


def _log_jet(u):
    u0 = u.value
    if u0 <= 0.0:
        raise DomainError(f"log of non-positive value {u0!r}")
    ders = [math.log(u0)]
    for k in range(1, u.order + 1):
        ders.append(((-1.0) ** (k - 1)) * math.factorial(k - 1) / u0 ** k)
    return _compose(u, ders)


def _sqrt_jet(u):
    u0 = u.value
    if u0 < 0.0 or (u0 == 0.0 and u.order > 0):
        raise DomainError(f"sqrt of non-positive value {u0!r}")
    return _real_power(u, 0.5)


def _tan_jet(u):
    c = _cos_jet(u)
    if c.value == 0.0:
        raise DomainError("tan at a pole")
    return _sin_jet(u) * _reciprocal(c)


def _sinh_jet(u):
    u0 = u.value
    cycle = [math.sinh(u0), math.cosh(u0)]
    return _compose(u, [cycle[k % 2] for k in range(u.order + 1)])


def _cosh_jet(u):
    u0 = u.value
    cycle = [math.cosh(u0), math.sinh(u0)]
    return _compose(u, [cycle[k % 2] for k in range(u.order + 1)])


sin = _as_float_or_jet(math.sin, _sin_jet)
cos = _as_float_or_jet(math.cos, _cos_jet)
exp = _as_float_or_jet(math.exp, _exp_jet)
sqrt = _as_float_or_jet(math.sqrt, _sqrt_jet)
tan = _as_float_or_jet(math.tan, _tan_jet)
sinh = _as_float_or_jet(math.sinh, _sinh_jet)
cosh = _as_float_or_jet(math.cosh, _cosh_jet)


def log(x):
    if isinstance(x, JetValue):
        return _log_jet(x)
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"log of non-positive value {x!r}")
    return math.log(x)


# -- helpers for tables of jets ----------------------------------------------


def jet_table(shape):
    """Empty object array used to hold jets (or floats) per tensor slot."""
    return np.empty(shape, dtype=object)


def table_values(table):
    """Plain float values of a table of jets (floats pass through)."""
    out = np.empty(np.shape(table))
    flat_in = np.asarray(table, dtype=object).reshape(-1)
    flat_out = out.reshape(-1)
    for i, entry in enumerate(flat_in):
        flat_out[i] = entry.value if isinstance(entry, JetValue) else float(entry)
    return out
