"""Nearest-point quantizers for the structured lattices.

Queries are carried exactly as int64 numerators on a ``2**-frac`` grid
(``FRAC_BITS = 20`` by default); real-valued input is rounded onto that grid
once, after which every distance comparison is an exact integer comparison.
The hot loops live in ``_ckernels`` (Cython) with ``_kernels_py`` (numpy) as
the fallback; set ``LATTICODE_PURE_PYTHON=1`` to force the fallback.

Ties are broken by smaller distance, then smaller norm, then the
lexicographically smaller point.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels_py
from .codes import reed_muller
from .dyadic import DyadicMatrix
from .lattices import LatticeSpec

if os.environ.get("LATTICODE_PURE_PYTHON"):
    kernels = _kernels_py
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        kernels = _kernels_py

BACKEND: str = kernels.BACKEND
FRAC_BITS = 20
MAX_FRAC = 24
MAX_ABS = 1 << 30
MAX_SPACING_BITS = 26


def to_grid(t, frac: int = FRAC_BITS) -> np.ndarray:
    """Numerators of ``t`` over ``2**frac`` as a 2-D int64 array (rows = points)."""
    if isinstance(t, DyadicMatrix):
        num = t.at_scale(frac)
    else:
        arr = np.asarray(t)
        if arr.dtype == object:
            scale = 1 << frac
            num = np.vectorize(lambda v: math.floor(Fraction(v) * scale + Fraction(1, 2)), otypes=[object])(arr)
            num = num.astype(np.int64)
        elif np.issubdtype(arr.dtype, np.integer):
            num = arr.astype(np.int64) << frac
        else:
            num = np.rint(arr.astype(np.float64) * float(1 << frac)).astype(np.int64)
    return np.atleast_2d(num)


def from_grid(num: np.ndarray, frac: int, squeeze: bool = False) -> DyadicMatrix:
    if squeeze and num.shape[0] == 1:
        num = num[0]
    return DyadicMatrix(num, frac)


def _check(a: np.ndarray, frac: int) -> np.ndarray:
    if not 0 <= frac <= MAX_FRAC:
        raise ValueError(f"frac must be in [0, {MAX_FRAC}]")
    a = np.ascontiguousarray(a, dtype=np.int64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array of query numerators")
    if a.size and np.abs(a).max() > MAX_ABS:
        raise OverflowError("query coordinates too large for exact int64 kernels")
    return a


def _run_kernel(a, frac, reps, shift, dn):
    F = frac + shift
    if F > MAX_SPACING_BITS:
        raise OverflowError("lattice spacing too coarse for the grid resolution")
    if F < 0:
        raise ValueError("lattice spacing finer than the grid resolution")
    reps = np.ascontiguousarray(reps, dtype=np.int64)
    return kernels.coset_nearest(a, frac, reps, shift, dn)


class Quantizer:
    """Nearest-point map for one lattice, acting on grid numerators.

    ``grid_offset(a, frac, g)`` decodes to the shifted lattice ``g + L``;
    ties are judged on the returned points, so coset decoders built on top
    of it inherit the global tie rule.
    """

    name = "?"
    dim: int | None = None
    min_frac = 0

    def grid_offset(self, a: np.ndarray, frac: int, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grid(self, a: np.ndarray, frac: int) -> np.ndarray:
        a = _check(a, frac)
        if self.dim is not None and a.shape[1] != self.dim:
            raise ValueError(f"{self.name} expects dimension {self.dim}, got {a.shape[1]}")
        if frac < self.min_frac:
            lift = self.min_frac - frac
            out = self.grid_offset(a << lift, self.min_frac, np.zeros(a.shape[1], dtype=np.int64))
            if np.any(out & ((1 << lift) - 1)):
                raise ValueError("result not representable at the requested resolution")
            return out >> lift
        return self.grid_offset(a, frac, np.zeros(a.shape[1], dtype=np.int64))

    def __call__(self, t) -> DyadicMatrix:
        squeeze = np.ndim(t.num if isinstance(t, DyadicMatrix) else t) == 1
        frac = max(FRAC_BITS, self.min_frac)
        return from_grid(self.grid(to_grid(t, frac), frac), frac, squeeze)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class _ScaledIntegerLattice(Quantizer):
    """Union of cosets ``g + 2**shift * L`` with L = Z^n or D_n, via the kernels."""

    def __init__(self, name: str, dn: bool, reps=None, shift: int = 0, min_frac: int = 0, dim=None):
        self.name = name
        self.dn = dn
        self.shift = shift
        self.min_frac = min_frac
        # representatives are numerators over 2**min_frac
        self._reps = None if reps is None else np.asarray(reps, dtype=np.int64)
        self.dim = dim if reps is None else self._reps.shape[1]

    def grid_offset(self, a, frac, g):
        if self.dn and a.shape[1] < 2:
            raise ValueError("D_n needs n >= 2")
        if self._reps is None:
            reps = g[None, :]
        else:
            reps = (self._reps << (frac - self.min_frac)) + g
        return _run_kernel(a, frac, reps, self.shift, self.dn)


Z_N = _ScaledIntegerLattice("Z^n", dn=False)
D_N = _ScaledIntegerLattice("D_n", dn=True)
E8 = _ScaledIntegerLattice("E8", True, [[0] * 8, [1] * 8], 0, min_frac=1)


@lru_cache(maxsize=None)
def rm_codewords(r: int, m: int) -> np.ndarray:
    words = reed_muller(r, m).codewords().astype(np.int64)
    words.setflags(write=False)
    return words


BW16 = _ScaledIntegerLattice("BW16", True, rm_codewords(1, 4), 1)
BW8 = _ScaledIntegerLattice("BW8", False, rm_codewords(1, 3), 1)


def q_zn(t) -> DyadicMatrix:
    """Componentwise nearest integer; exact halves go toward zero."""
    return Z_N(t)


def q_dn(t) -> DyadicMatrix:
    return D_N(t)


def q_e8(t) -> DyadicMatrix:
    return E8(t)


def q_bw16(t) -> DyadicMatrix:
    return BW16(t)


_FUNCTION_QUANTIZERS = {q_zn: Z_N, q_dn: D_N, q_e8: E8, q_bw16: BW16}


class CosetQuantizer(Quantizer):
    """``argmin_g || t - (g + Q'(t - g)) ||`` over the coset representatives."""

    def __init__(self, sub: Quantizer, reps, name: str = "cosets"):
        reps_d = reps if isinstance(reps, DyadicMatrix) else DyadicMatrix.from_values(np.asarray(reps, dtype=object))
        if reps_d.ndim != 2 or reps_d.shape[0] == 0:
            raise ValueError("need a non-empty 2-D array of coset representatives")
        self.sub = sub
        self.reps = reps_d
        self.dim = reps_d.shape[1]
        self.min_frac = max(sub.min_frac, reps_d.log2_den)
        self.name = name

    def grid_offset(self, a, frac, g0):
        reps = self.reps.at_scale(frac)
        best = None
        for g in reps:
            cand = self.sub.grid_offset(a, frac, g0 + g)
            if best is None:
                best = cand
            else:
                upd = _kernels_py._better(cand, best, a)
                best[upd] = cand[upd]
        return best


def as_quantizer(q) -> Quantizer:
    """Accept either a Quantizer or one of the public ``q_*`` functions."""
    if isinstance(q, Quantizer):
        return q
    try:
        return _FUNCTION_QUANTIZERS[q]
    except (KeyError, TypeError):
        raise TypeError(f"not a quantizer: {q!r}") from None


def coset_decode(sub_quantizer: Quantizer, coset_reps, t) -> DyadicMatrix:
    return CosetQuantizer(as_quantizer(sub_quantizer), coset_reps)(t)


class ScaledQuantizer(Quantizer):
    """``c * Q(t / c)`` for ``c = 2**log2_scale``."""

    def __init__(self, base: Quantizer, log2_scale: int):
        self.base = base
        self.log2_scale = log2_scale
        self.dim = base.dim
        self.min_frac = max(0, base.min_frac - log2_scale)
        self.name = f"2^{log2_scale}*{base.name}"

    def grid_offset(self, a, frac, g):
        inner = frac + self.log2_scale
        if inner < self.base.min_frac:
            raise ValueError("scale too fine for the grid resolution")
        return self.base.grid_offset(a, inner, g)


def _log2_of(c) -> int:
    f = Fraction(c)
    if f <= 0:
        raise ValueError("scale must be positive")
    num, den = f.numerator, f.denominator
    if num & (num - 1) or den & (den - 1):
        raise ValueError(f"scale {c} is not a power of two")
    return num.bit_length() - den.bit_length()


def q_scaled(base_quantizer: Quantizer, c, t) -> DyadicMatrix:
    return ScaledQuantizer(as_quantizer(base_quantizer), _log2_of(c))(t)


class ProductQuantizer(Quantizer):
    """Blockwise application of a block quantizer (Cartesian power lattice)."""

    def __init__(self, block: Quantizer, blocks: int | None = None):
        if block.dim is None:
            raise ValueError("block quantizer must have a fixed dimension")
        self.block = block
        self.blocks = blocks
        self.dim = None if blocks is None else block.dim * blocks
        self.min_frac = block.min_frac
        self.name = f"{block.name}^{blocks or 'k'}"

    def grid_offset(self, a, frac, g):
        t = self.block.dim
        n = a.shape[1]
        if n % t:
            raise ValueError(f"dimension {n} not divisible by block size {t}")
        if self.blocks is not None and n != self.dim:
            raise ValueError(f"{self.name} expects dimension {self.dim}, got {n}")
        k = n // t
        out = np.empty_like(a)
        gb = g.reshape(k, t)
        if not gb.any():
            return self.block.grid_offset(a.reshape(-1, t), frac, gb[0]).reshape(a.shape)
        for b in range(k):
            sl = slice(b * t, (b + 1) * t)
            out[:, sl] = self.block.grid_offset(np.ascontiguousarray(a[:, sl]), frac, gb[b])
        return out


def q_product(block_quantizer: Quantizer, t) -> DyadicMatrix:
    return ProductQuantizer(as_quantizer(block_quantizer))(t)


def mod_lattice(t, quantizer) -> DyadicMatrix:
    """Quantization error ``t - Q(t)``."""
    quantizer = as_quantizer(quantizer)
    frac = max(FRAC_BITS, quantizer.min_frac)
    squeeze = np.ndim(t.num if isinstance(t, DyadicMatrix) else t) == 1
    a = to_grid(t, frac)
    return from_grid(a - quantizer.grid(a, frac), frac, squeeze)


class BruteForceQuantizer(Quantizer):
    """Exact CVP by sphere enumeration over a basis; the independent test oracle."""

    def __init__(self, basis: DyadicMatrix, name: str = "brute-force", max_nodes: int = 2_000_000):
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ValueError("basis must be square")
        if basis.shape[0] > 16:
            raise ValueError("brute force is limited to dimension <= 16")
        self.basis = basis
        self.dim = basis.shape[0]
        self.min_frac = basis.log2_den
        self.name = name
        self.max_nodes = max_nodes
        self._reduced = _lll(basis)

    def grid_offset(self, a, frac, g):
        return np.array([self._one(row, frac, None, g) for row in a], dtype=np.int64).reshape(a.shape)

    def nearest(self, t, radius_hint: float | None = None) -> DyadicMatrix:
        frac = max(FRAC_BITS, self.min_frac)
        a = to_grid(t, frac)[0]
        return from_grid(np.array([self._one(a, frac, radius_hint, np.zeros_like(a))]), frac, squeeze=True)

    def _one(self, target: np.ndarray, frac: int, radius_hint: float | None, offset) -> list[int]:
        red_num, red_den = self._reduced
        bnum = red_num.astype(object)
        scale = 1 << (frac - red_den)
        tgt = [int(v) for v in target.tolist()]
        off = [int(v) for v in np.asarray(offset).tolist()]
        tf = np.array([x - o for x, o in zip(tgt, off)], dtype=np.float64) / float(1 << frac)
        bf = red_num.astype(np.float64) / float(1 << red_den)
        qm, rm = np.linalg.qr(bf)
        y = qm.T @ tf
        n = self.dim

        def point(c):
            return [int(v) * scale + o for v, o in zip((bnum @ np.array(c, dtype=object)).tolist(), off)]

        def key(p):
            e = [x - q for x, q in zip(tgt, p)]
            return (sum(v * v for v in e), -sum(x * v for x, v in zip(tgt, e)), p)

        # Babai nearest plane gives a valid starting radius.
        c0 = [0] * n
        for i in range(n - 1, -1, -1):
            s = y[i] - sum(rm[i, j] * c0[j] for j in range(i + 1, n))
            c0[i] = int(round(s / rm[i, i]))
        best = point(c0)
        best_key = key(best)
        unit = float(1 << frac) ** 2
        r2 = best_key[0] / unit
        if radius_hint is not None:
            r2 = min(r2, radius_hint**2)
        nodes = 0
        c = [0] * n

        while True:
            found_any = False

            def rec(level: int, partial: float):
                nonlocal best, best_key, r2, nodes, found_any
                s = y[level] - sum(rm[level, j] * c[j] for j in range(level + 1, n))
                center = s / rm[level, level]
                bound = r2 * (1 + 1e-9) + 1e-12
                base = math.floor(center + 0.5)
                for step in _zigzag():
                    v = base + step
                    d = (rm[level, level] * (v - center)) ** 2
                    if partial + d > bound:
                        # zig-zag distances only grow once both sides exceed the bound
                        if abs(v - center) > 0.5 and _beyond(base, step, center, rm[level, level], partial, bound):
                            break
                        continue
                    nodes += 1
                    if nodes > self.max_nodes:
                        raise RuntimeError("enumeration budget exceeded")
                    c[level] = v
                    if level == 0:
                        found_any = True
                        p = point(c)
                        k = key(p)
                        if k < best_key:
                            best, best_key = p, k
                            r2 = min(r2, best_key[0] / unit)
                    else:
                        rec(level - 1, partial + d)
                c[level] = 0

            rec(n - 1, 0.0)
            if found_any or r2 >= best_key[0] / unit:
                return best
            r2 = best_key[0] / unit  # hint was too small: expand to the Babai radius


def _zigzag():
    yield 0
    k = 1
    while True:
        yield k
        yield -k
        k += 1


def _beyond(base, step, center, rll, partial, bound) -> bool:
    """True once both neighbours at offset |step| exceed the radius."""
    m = abs(step)
    lo = (rll * (base - m - center)) ** 2
    hi = (rll * (base + m - center)) ** 2
    return partial + min(lo, hi) > bound


def _lll(basis: DyadicMatrix, delta: Fraction = Fraction(3, 4)) -> tuple[np.ndarray, int]:
    """Exact LLL on the columns of an integer-numerator basis."""
    cols = [list(map(int, basis.num[:, j])) for j in range(basis.shape[1])]
    n = len(cols)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso(b):
        bstar, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bstar[j])) / dot(bstar[j], bstar[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
        return bstar, mu

    bstar, mu = gso(cols)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                cols[k] = [x - q * y for x, y in zip(cols[k], cols[j])]
                bstar, mu = gso(cols)
        if dot(bstar[k], bstar[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bstar[k - 1], bstar[k - 1]):
            k += 1
        else:
            cols[k], cols[k - 1] = cols[k - 1], cols[k]
            bstar, mu = gso(cols)
            k = max(k - 1, 1)
    return np.array(cols, dtype=np.int64).T, basis.log2_den


def brute_force_cvp(basis: DyadicMatrix, radius_hint: float | None, t) -> DyadicMatrix:
    return BruteForceQuantizer(basis).nearest(t, radius_hint)


def quantizer_for(spec: LatticeSpec) -> Quantizer:
    """Structured decoder for a catalog lattice (or a Cartesian power of one)."""
    block = _block_quantizer(spec.block_name, spec)
    return block if spec.blocks == 1 else ProductQuantizer(block, spec.blocks)


def _block_quantizer(name: str, spec: LatticeSpec) -> Quantizer:
    key = name.upper()
    if key == "Z":
        return _ScaledIntegerLattice("Z", False, dim=1)
    if key in ("D2", "D4"):
        return _ScaledIntegerLattice(name, True, dim=int(key[1:]))
    if key == "E8":
        return E8
    if key == "BW16":
        return BW16
    if key == "BW8":
        return BW8
    if key == "BW32":
        raise NotImplementedError("BW32 decoder not implemented (2^32 cosets)")
    if key in ("BW64", "LEECH24"):
        raise NotImplementedError(f"{name} decoder not implemented")
    if spec.basis is not None and spec.dim <= 16:
        return BruteForceQuantizer(spec.basis.matrix, name=name)
    raise NotImplementedError(f"no decoder for {name}")


def squared_distance(t, point) -> Fraction:
    """Exact squared distance between two dyadic/int vectors."""
    a = t if isinstance(t, DyadicMatrix) else DyadicMatrix.from_values(np.asarray(t, dtype=object))
    b = point if isinstance(point, DyadicMatrix) else DyadicMatrix.from_values(np.asarray(point, dtype=object))
    d = a - b
    return Fraction(sum(int(v) ** 2 for v in d.num.ravel().tolist()), 1 << (2 * d.log2_den))


def nearest_points(quantizer: Quantizer, t: Sequence) -> DyadicMatrix:
    return quantizer(t)


def short_vectors(basis: DyadicMatrix, max_norm_sq) -> list[tuple[Fraction, ...]]:
    """All nonzero lattice points of squared norm <= max_norm_sq (exact check)."""
    red_num, e = _lll(basis)
    bf = red_num.astype(np.float64) / float(1 << e)
    _, rm = np.linalg.qr(bf)
    n = bf.shape[1]
    bound = float(max_norm_sq) * (1 + 1e-9) + 1e-12
    limit = Fraction(max_norm_sq) * (1 << (2 * e))
    bnum = red_num.astype(object)
    out = []
    c = [0] * n

    def rec(level: int, partial: float):
        s = -sum(rm[level, j] * c[j] for j in range(level + 1, n))
        center = s / rm[level, level]
        half = math.sqrt(max(bound - partial, 0.0)) / abs(rm[level, level])
        for v in range(math.ceil(center - half), math.floor(center + half) + 1):
            d = (rm[level, level] * (v - center)) ** 2
            if partial + d > bound:
                continue
            c[level] = v
            if level == 0:
                if any(c):
                    p = (bnum @ np.array(c, dtype=object)).tolist()
                    if sum(x * x for x in p) <= limit:
                        out.append(tuple(Fraction(int(x), 1 << e) for x in p))
            else:
                rec(level - 1, partial + d)
        c[level] = 0

    rec(n - 1, 0.0)
    return out
