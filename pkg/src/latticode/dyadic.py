"""Exact arithmetic on dyadic rationals (integers over a power of two).

Every lattice basis handled by this package has entries that are integers or
halves, so a matrix is stored as an int64 numerator array plus one shared
exponent ``log2_den``.  Intermediate products are carried out on Python ints
and checked back into the signed 64-bit range; anything outside it raises
``OverflowError`` instead of wrapping silently.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

INT64_MAX = (1 << 63) - 1


def _check_int64(values: np.ndarray) -> np.ndarray:
    """Convert an object array of Python ints to int64, refusing overflow."""
    flat = values.ravel().tolist()
    for v in flat:
        if not -INT64_MAX - 1 <= v <= INT64_MAX:
            raise OverflowError(f"value {v} does not fit in int64")
    return np.array(flat, dtype=np.int64).reshape(values.shape)


def _two_adic_valuation(v: int) -> int:
    return (v & -v).bit_length() - 1


def _as_object(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return arr
    if not np.issubdtype(arr.dtype, np.integer):
        raise TypeError(f"expected integer numerators, got {arr.dtype}")
    return arr.astype(object)


class DyadicMatrix:
    """Array of values ``numerators / 2**log2_den`` kept in canonical form.

    Works for vectors (1-D) as well as matrices.  Canonical form means the
    exponent is as small as possible: it is zero unless some numerator is odd.
    """

    __slots__ = ("num", "log2_den")

    def __init__(self, numerators, log2_den: int = 0):
        if log2_den < 0:
            raise ValueError("log2_den must be non-negative")
        obj = _as_object(numerators)
        nonzero = [int(v) for v in obj.ravel().tolist() if v != 0]
        if nonzero:
            shift = min(log2_den, min(_two_adic_valuation(v) for v in nonzero))
        else:
            shift = log2_den
        if shift:
            obj = np.vectorize(lambda v: int(v) >> shift, otypes=[object])(obj)
        num = _check_int64(obj)
        num.setflags(write=False)
        self.num = num
        self.log2_den = log2_den - shift

    @classmethod
    def from_values(cls, values) -> "DyadicMatrix":
        """Build from ints, Fractions or floats that are exactly dyadic."""
        arr = np.asarray(values, dtype=object)
        fracs = [Fraction(v) for v in arr.ravel().tolist()]
        k = 0
        for f in fracs:
            d = f.denominator
            if d & (d - 1):
                raise ValueError(f"{f} is not a dyadic rational")
            k = max(k, d.bit_length() - 1)
        nums = [f.numerator * ((1 << k) // f.denominator) for f in fracs]
        return cls(np.array(nums, dtype=object).reshape(arr.shape), k)

    @classmethod
    def identity(cls, n: int) -> "DyadicMatrix":
        return cls(np.eye(n, dtype=np.int64))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num.shape

    @property
    def ndim(self) -> int:
        return self.num.ndim

    @property
    def is_integer(self) -> bool:
        return self.log2_den == 0

    def to_ints(self) -> np.ndarray:
        if self.log2_den:
            raise ValueError("matrix has non-integer entries")
        return self.num.copy()

    def to_fractions(self) -> list:
        den = 1 << self.log2_den
        out = np.array(
            [Fraction(int(v), den) for v in self.num.ravel().tolist()], dtype=object
        )
        return out.reshape(self.shape).tolist()

    def to_float(self) -> np.ndarray:
        return self.num.astype(np.float64) / float(1 << self.log2_den)

    def at_scale(self, log2_den: int) -> np.ndarray:
        """Numerators re-expressed over ``2**log2_den`` (must not lose bits)."""
        if log2_den < self.log2_den:
            raise ValueError("cannot express at a coarser scale without rounding")
        return _check_int64(_as_object(self.num) * (1 << (log2_den - self.log2_den)))

    @property
    def T(self) -> "DyadicMatrix":
        return DyadicMatrix(self.num.T, self.log2_den)

    def scaled(self, power_of_two: int) -> "DyadicMatrix":
        """Multiply every entry by ``2**power_of_two`` (may be negative)."""
        if power_of_two >= 0:
            return DyadicMatrix(_as_object(self.num) * (1 << power_of_two), self.log2_den)
        return DyadicMatrix(self.num, self.log2_den - power_of_two)

    def __matmul__(self, other: "DyadicMatrix") -> "DyadicMatrix":
        if not isinstance(other, DyadicMatrix):
            other = DyadicMatrix(np.asarray(other))
        prod = np.matmul(_as_object(self.num), _as_object(other.num))
        return DyadicMatrix(prod, self.log2_den + other.log2_den)

    def __neg__(self) -> "DyadicMatrix":
        return DyadicMatrix(-_as_object(self.num), self.log2_den)

    def _aligned(self, other: "DyadicMatrix"):
        k = max(self.log2_den, other.log2_den)
        a = _as_object(self.num) * (1 << (k - self.log2_den))
        b = _as_object(other.num) * (1 << (k - other.log2_den))
        return a, b, k

    def __add__(self, other: "DyadicMatrix") -> "DyadicMatrix":
        a, b, k = self._aligned(other)
        return DyadicMatrix(a + b, k)

    def __sub__(self, other: "DyadicMatrix") -> "DyadicMatrix":
        a, b, k = self._aligned(other)
        return DyadicMatrix(a - b, k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadicMatrix):
            try:
                other = DyadicMatrix.from_values(other)
            except (TypeError, ValueError):
                return NotImplemented
        return (
            self.shape == other.shape
            and self.log2_den == other.log2_den
            and bool(np.array_equal(self.num, other.num))
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.log2_den, self.num.tobytes()))

    def __repr__(self) -> str:
        return f"DyadicMatrix({self.num.tolist()}, log2_den={self.log2_den})"


def _require_square(m: DyadicMatrix) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def _bareiss_det(rows: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix."""
    a = [list(r) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def det_exact(m: DyadicMatrix) -> Fraction:
    n = _require_square(m)
    d = _bareiss_det(m.num.tolist())
    return Fraction(d, 1 << (m.log2_den * n))


def inverse_exact(m: DyadicMatrix) -> DyadicMatrix:
    """Exact inverse; raises if singular or if the inverse is not dyadic."""
    n = _require_square(m)
    den = 1 << m.log2_den
    a = [[Fraction(int(v), den) for v in row] for row in m.num.tolist()]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(n):
            f = a[r][col]
            if r != col and f != 0:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return DyadicMatrix.from_values(inv)


def is_unimodular(m: DyadicMatrix) -> bool:
    _require_square(m)
    return m.is_integer and abs(det_exact(m)) == 1


def matvec(m: DyadicMatrix, v) -> DyadicMatrix:
    if not isinstance(v, DyadicMatrix):
        v = DyadicMatrix(np.asarray(v, dtype=np.int64))
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape} x {v.shape}")
    return m @ v


def mod_per_coordinate(v, moduli: Sequence[int] | Iterable[int]) -> np.ndarray:
    """Reduce an integer-valued vector into ``[0, moduli_i)`` coordinatewise."""
    if isinstance(v, DyadicMatrix):
        if not v.is_integer:
            raise ValueError("vector has non-integer entries (point is not in the fine lattice)")
        ints = v.num
    else:
        ints = np.asarray(v, dtype=np.int64)
    mods = np.asarray(list(moduli), dtype=np.int64)
    if mods.shape != ints.shape[-1:]:
        raise ValueError("moduli length does not match vector length")
    if np.any(mods < 1):
        raise ValueError("moduli must be positive")
    return np.mod(ints, mods)
