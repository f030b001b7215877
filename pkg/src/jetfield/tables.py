"""Dense component storage with index signatures, and small-matrix inversion.

A ComponentTable is a dense array of components for one distinguished-tensor
family, tagged with its index signature: an ordered list of slots, each
temporal or spatial and upper or lower.  A velocity-pair index (spatial
upper together with temporal lower) is stored as two adjacent slots.  The
signature is what drives the generic covariant-derivative corrections, so
new families need no per-family derivative code.

Matrix inversion is pivoted Gauss-Jordan written over a generic ring: the
entries may be floats or jets, so metric inverses carry their own
derivatives.  Pivoting and the condition estimate use the plain values.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import SingularMatrixError
from .jets import JetValue, table_values

TEMPORAL = "t"
SPATIAL = "x"
UPPER = "up"
LOWER = "lo"


@dataclass(frozen=True, slots=True)
class Slot:
    kind: str  # TEMPORAL | SPATIAL
    variance: str  # UPPER | LOWER

    def extent(self, p, n):
        return p if self.kind == TEMPORAL else n


def t_up():
    return Slot(TEMPORAL, UPPER)


def t_lo():
    return Slot(TEMPORAL, LOWER)


def x_up():
    return Slot(SPATIAL, UPPER)


def x_lo():
    return Slot(SPATIAL, LOWER)


class ComponentTable:
    """Dense multi-index array of components with an index signature."""

    def __init__(self, name, slots, p, n, data=None):
        self.name = name
        self.slots = tuple(slots)
        self.p = p
        self.n = n
        self.extents = tuple(s.extent(p, n) for s in self.slots)
        if data is None:
            data = np.zeros(self.extents) if self.extents else np.zeros(())
        else:
            data = np.asarray(data)
            if data.shape != self.extents:
                raise ValueError(
                    f"{name}: data shape {data.shape} does not match extents {self.extents}"
                )
        self.data = data

    def _check(self, index):
        index = tuple(index)
        if len(index) != len(self.extents):
            raise IndexError(
                f"{self.name}: expected {len(self.extents)} indices, got {len(index)}"
            )
        for pos, (i, ext) in enumerate(zip(index, self.extents)):
            if not 0 <= i < ext:
                raise IndexError(
                    f"{self.name}: index {i} out of range 0..{ext - 1} in slot {pos}"
                )
        return index

    def get(self, *index):
        return self.data[self._check(index)]

    def set(self, *index_and_value):
        *index, value = index_and_value
        self.data[self._check(index)] = value

    def values(self):
        """Plain float array (jets collapse to their base values)."""
        if self.data.dtype == object:
            return table_values(self.data)
        return np.asarray(self.data, dtype=float)

    def max_asymmetry(self, axis_a, axis_b):
        """Largest |T[..a..b..] - T[..b..a..]| over the two given axes."""
        v = self.values()
        return float(np.max(np.abs(v - np.swapaxes(v, axis_a, axis_b)))) if v.size else 0.0

    def __repr__(self):
        shape = "x".join(str(e) for e in self.extents) or "scalar"
        return f"ComponentTable({self.name!r}, {shape})"


def ndrange(*extents):
    return product(*(range(e) for e in extents))


def invert_symmetric(m, family="matrix", point=None, cond_limit=1e12):
    """Inverse of a small symmetric matrix of floats or jets.

    Gauss-Jordan with partial pivoting on the base values; the result is
    symmetrized.  Raises SingularMatrixError when a pivot vanishes or the
    infinity-norm condition estimate exceeds `cond_limit`.
    """
    m = np.asarray(m)
    k = m.shape[0]
    if m.shape != (k, k):
        raise ValueError(f"{family}: expected a square matrix, got {m.shape}")

    def base(x):
        return x.value if isinstance(x, JetValue) else float(x)

    work = np.empty((k, 2 * k), dtype=object)
    for i in range(k):
        for j in range(k):
            work[i, j] = m[i, j]
            work[i, k + j] = 1.0 if i == j else 0.0

    scale = max((abs(base(m[i, j])) for i in range(k) for j in range(k)), default=0.0)
    if scale == 0.0:
        raise SingularMatrixError("singular matrix (all zero)", family, point)

    for col in range(k):
        pivot_row = max(range(col, k), key=lambda r: abs(base(work[r, col])))
        pivot = base(work[pivot_row, col])
        if abs(pivot) <= scale * 1e-14:
            raise SingularMatrixError(
                f"singular matrix (zero pivot in column {col + 1})", family, point
            )
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
        inv_pivot = 1.0 / work[col, col]
        for j in range(2 * k):
            work[col, j] = work[col, j] * inv_pivot
        for r in range(k):
            if r == col:
                continue
            factor = work[r, col]
            if base(factor) == 0.0 and not isinstance(factor, JetValue):
                continue
            for j in range(2 * k):
                work[r, j] = work[r, j] - factor * work[col, j]

    inv = np.empty((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            inv[i, j] = (work[i, k + j] + work[j, k + i]) * 0.5

    base_m = np.array([[base(m[i, j]) for j in range(k)] for i in range(k)])
    base_inv = np.array([[base(inv[i, j]) for j in range(k)] for i in range(k)])
    cond = np.linalg.norm(base_m, np.inf) * np.linalg.norm(base_inv, np.inf)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMatrixError(
            f"ill-conditioned matrix (condition estimate {cond:.3e})", family, point
        )

    if m.dtype != object:
        return base_inv
    return inv


def condition_estimate(m):
    """Infinity-norm condition estimate of a float matrix; inf when singular."""
    m = np.asarray(m, dtype=float)
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        return float("inf")
    return float(np.linalg.norm(m, np.inf) * np.linalg.norm(inv, np.inf))
