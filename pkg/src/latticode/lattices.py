"""Structured lattices in rectangular form and their catalog constants.

A rectangular basis is ``B = U @ diag(pi)`` with ``U`` unimodular and each
``pi_i`` a positive dyadic rational.  Everything here is exact: volumes are
integers, Hermite parameters are stored squared so that irrational values
such as ``2**0.5`` stay rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .codes import LinearCodeSpec, gf2_rank, reed_muller
from .dyadic import DyadicMatrix, det_exact, inverse_exact, is_unimodular


@dataclass(frozen=True)
class RectangularBasis:
    u: DyadicMatrix
    pi: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(Fraction(p) for p in self.pi))
        if self.u.ndim != 2 or self.u.shape[0] != self.u.shape[1]:
            raise ValueError("u must be square")
        if len(self.pi) != self.u.shape[0]:
            raise ValueError("pi length must match the dimension")

    @property
    def dim(self) -> int:
        return len(self.pi)

    @property
    def diag(self) -> DyadicMatrix:
        d = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for i, p in enumerate(self.pi):
            d[i][i] = p
        return DyadicMatrix.from_values(d)

    @property
    def matrix(self) -> DyadicMatrix:
        return _basis_matrix(self)

    @property
    def inverse(self) -> DyadicMatrix:
        return _basis_inverse(self)

    def radices(self, p: int) -> tuple[int, ...]:
        """Per-coordinate message radices ``p / pi_i`` for shaping modulus p."""
        out = []
        for pi in self.pi:
            r = Fraction(p) / pi
            if r.denominator != 1 or r < 1:
                raise ValueError(f"p={p} is not a multiple of pi={pi}")
            out.append(int(r))
        return tuple(out)

    @classmethod
    def from_basis(cls, basis: DyadicMatrix, pi: Sequence) -> "RectangularBasis":
        """Split a basis whose column j is ``pi_j`` times a unimodular column."""
        inv_diag = DyadicMatrix.from_values(
            [[(1 / Fraction(p) if i == j else 0) for j, p in enumerate(pi)] for i in range(len(pi))]
        )
        return cls(basis @ inv_diag, tuple(pi))


@lru_cache(maxsize=None)
def _basis_matrix(rb: RectangularBasis) -> DyadicMatrix:
    return rb.u @ rb.diag


@lru_cache(maxsize=None)
def _basis_inverse(rb: RectangularBasis) -> DyadicMatrix:
    return inverse_exact(_basis_matrix(rb))


def validate_rectangular(basis: RectangularBasis) -> bool:
    try:
        unimodular = is_unimodular(basis.u)
    except ValueError:
        return False
    if not unimodular:
        return False
    for p in basis.pi:
        if p <= 0 or p.denominator & (p.denominator - 1):
            return False
    return True


@dataclass(frozen=True)
class LatticeSpec:
    """A named lattice with its exact Table-1 style constants.

    ``gamma_sq`` is the squared Hermite parameter and ``lambda1_sq`` the
    squared minimum distance.  ``basis`` is ``None`` for constants-only
    entries.  ``base``/``blocks`` record a Cartesian power of a block lattice.
    """

    name: str
    dim: int
    basis: RectangularBasis | None
    gamma_sq: Fraction | None
    tau: int | None
    vol: int
    lambda1_sq: Fraction | None
    base: str | None = None
    blocks: int = 1

    def __post_init__(self):
        if self.basis is not None and self.basis.dim != self.dim:
            raise ValueError("basis dimension mismatch")
        if self.gamma_sq is not None and self.lambda1_sq is not None:
            n = self.dim
            lhs = Fraction(self.lambda1_sq) ** (2 * n)
            rhs = Fraction(self.gamma_sq) ** n * Fraction(self.vol) ** 4
            if lhs != rhs:
                raise ValueError(f"{self.name}: lambda1^2, gamma and vol are inconsistent")

    @property
    def block_name(self) -> str:
        return self.base or self.name

    @property
    def min_shaping_modulus(self) -> int:
        """Smallest integer p that is a common multiple of all pi_i."""
        if self.basis is None:
            raise ValueError(f"{self.name} has no basis")
        p = 1
        for pi in self.basis.pi:
            # lcm over rationals: pi = a / 2^k, so p must be a multiple of a.
            a = pi.numerator
            p = p * a // np.gcd(p, a)
        return int(p)

    @classmethod
    def custom(cls, name: str, basis: RectangularBasis) -> "LatticeSpec":
        vol = abs(det_exact(basis.matrix))
        if vol.denominator != 1:
            raise ValueError("custom lattices must have an integer volume")
        return cls(name, basis.dim, basis, None, None, int(vol), None)


def _diag_fracs(values) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def construction_a(code: LinearCodeSpec) -> RectangularBasis:
    """Lattice of all integer vectors congruent mod 2 to a codeword.

    The generator is brought to systematic form on some set of k pivot
    coordinates (coordinates may be permuted), giving ``U = [[I,0],[A,I]]``
    up to a row permutation and ``pi = (1^k, 2^(n-k))``.
    """
    n, k = code.n, code.k
    g = code.generator.astype(np.uint8).copy()
    pivots: list[int] = []
    col = 0
    for r in range(n):
        if col == k:
            break
        piv = next((c for c in range(col, k) if g[r, c]), None)
        if piv is None:
            continue
        g[:, [col, piv]] = g[:, [piv, col]]
        for c in range(k):
            if c != col and g[r, c]:
                g[:, c] ^= g[:, col]
        pivots.append(r)
        col += 1
    if len(pivots) != k:
        raise ValueError("generator is rank deficient")
    rest = [r for r in range(n) if r not in pivots]
    u = np.zeros((n, n), dtype=np.int64)
    u[:, :k] = g
    for j, r in enumerate(rest):
        u[r, k + j] = 1
    return RectangularBasis(DyadicMatrix(u), _diag_fracs([1] * k + [2] * (n - k)))


def _nested_columns(codes: Sequence[LinearCodeSpec]) -> tuple[np.ndarray, list[int]]:
    n = codes[0].n
    cols: list[np.ndarray] = []
    level_sizes: list[int] = []
    for code in codes:
        if code.n != n:
            raise ValueError("codes must share the same length")
        current = np.array(cols, dtype=np.uint8).T if cols else np.zeros((n, 0), np.uint8)
        if cols and gf2_rank(np.hstack([code.generator, current])) != code.k:
            raise ValueError(f"code {code} does not contain the previous level")
        added = 0
        for j in range(code.k):
            v = code.generator[:, j]
            if j < len(cols) and np.array_equal(v, cols[j]):
                continue
            trial = np.hstack([current, v.reshape(-1, 1)])
            if gf2_rank(trial) > current.shape[1]:
                cols.append(v.copy())
                current = trial
                added += 1
        if len(cols) != code.k:
            raise ValueError(f"could not extend generators to {code}")
        level_sizes.append(added)
    return np.array(cols, dtype=np.uint8).T, level_sizes


def _complete_with_units(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    cols = [g[:, j] for j in range(g.shape[1])]
    current = g.copy()
    for r in range(n):
        if len(cols) == n:
            break
        e = np.zeros(n, dtype=np.uint8)
        e[r] = 1
        trial = np.hstack([current, e.reshape(-1, 1)])
        if gf2_rank(trial) > current.shape[1]:
            cols.append(e)
            current = trial
    return np.array(cols, dtype=np.uint8).T


def construction_d(codes: Sequence[LinearCodeSpec]) -> RectangularBasis:
    """``C_0 + 2 C_1 + ... + 2^(a-1) C_(a-1) + 2^a Z^n`` as ``phi(G_a) diag(2^i)``.

    ``codes`` is coarsest first.  A trailing trivial ``(n, n, 1)`` code is
    optional; when absent it is appended by completing the generator with unit
    vectors.
    """
    if not codes:
        raise ValueError("need at least one code")
    codes = list(codes)
    n = codes[0].n
    if codes[-1].k == n:
        proper, explicit_top = codes[:-1], codes[-1]
    else:
        proper, explicit_top = codes, None
    if not proper:
        return RectangularBasis(DyadicMatrix.identity(n), _diag_fracs([1] * n))
    g, sizes = _nested_columns(proper + ([explicit_top] if explicit_top else []))
    if explicit_top is None:
        before = g.shape[1]
        g = _complete_with_units(g)
        sizes.append(g.shape[1] - before)
    a = len(proper)
    pi: list[int] = []
    for level, size in enumerate(sizes):
        pi += [1 << level] * size
    u = DyadicMatrix(g.astype(np.int64))
    if not is_unimodular(u):
        raise ValueError("phi(G_a) is not unimodular; reorder or reduce the generators")
    if len(pi) != n or pi[-1] != 1 << a:
        raise ValueError("inconsistent level sizes")
    return RectangularBasis(u, _diag_fracs(pi))


def construction_d_volume(codes: Sequence[LinearCodeSpec]) -> int:
    proper = [c for c in codes if c.k != c.n]
    n = codes[0].n
    return 1 << (len(proper) * n - sum(c.k for c in proper))


def bw_parameters(r: int) -> tuple[int, Fraction]:
    """Kissing number and squared Hermite parameter of BW in dimension 2**r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    tau = 1
    for i in range(1, r + 1):
        tau *= 2 + (1 << i)
    return tau, Fraction(1 << (r - 1))


def _block_diag(mats: Sequence[DyadicMatrix]) -> DyadicMatrix:
    k = max(m.log2_den for m in mats)
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=np.int64)
    at = 0
    for m in mats:
        d = m.shape[0]
        out[at : at + d, at : at + d] = m.at_scale(k)
        at += d
    return DyadicMatrix(out, k)


def cartesian_product(spec: LatticeSpec, k: int) -> LatticeSpec:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return spec
    basis = None
    if spec.basis is not None:
        basis = RectangularBasis(_block_diag([spec.basis.u] * k), spec.basis.pi * k)
    return LatticeSpec(
        name=f"{spec.name}^{k}",
        dim=spec.dim * k,
        basis=basis,
        gamma_sq=spec.gamma_sq,
        tau=None if spec.tau is None else spec.tau * k,
        vol=spec.vol**k,
        lambda1_sq=spec.lambda1_sq,
        base=spec.block_name,
        blocks=spec.blocks * k,
    )


# Explicit bases (columns are basis vectors).
_E8_BASIS = [
    [2, -1, 0, 0, 0, 0, 0, Fraction(1, 2)],
    [0, 1, -1, 0, 0, 0, 0, Fraction(1, 2)],
    [0, 0, 1, -1, 0, 0, 0, Fraction(1, 2)],
    [0, 0, 0, 1, -1, 0, 0, Fraction(1, 2)],
    [0, 0, 0, 0, 1, -1, 0, Fraction(1, 2)],
    [0, 0, 0, 0, 0, 1, -1, Fraction(1, 2)],
    [0, 0, 0, 0, 0, 0, 1, Fraction(1, 2)],
    [0, 0, 0, 0, 0, 0, 0, Fraction(1, 2)],
]
_E8_PI = (2, 1, 1, 1, 1, 1, 1, Fraction(1, 2))

_BW8_BASIS = [
    [1, 1, 1, 1, 2, 2, 2, 2],
    [1, 1, 1, 0, 2, 0, 0, 0],
    [1, 1, 0, 1, 0, 2, 0, 0],
    [1, 1, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 1, 0, 0, 2, 0],
    [1, 0, 1, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 0],
]
_BW8_PI = (1, 1, 1, 1, 2, 2, 2, 2)

_BW16_BASIS = [
    [1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 4],
    [1, 1, 1, 1, 0, 2, 2, 0, 2, 0, 0, 2, 0, 0, 0, 0],
    [1, 1, 1, 0, 1, 2, 0, 2, 0, 2, 0, 0, 2, 0, 0, 0],
    [1, 1, 1, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 1, 1, 0, 2, 2, 0, 0, 2, 0, 0, 2, 0, 0],
    [1, 1, 0, 1, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 1, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 1, 1, 0, 0, 0, 2, 2, 2, 0, 0, 0, 2, 0],
    [1, 0, 1, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
]
_BW16_PI = (1,) * 5 + (2,) * 10 + (4,)


def e8_basis() -> DyadicMatrix:
    return DyadicMatrix.from_values(_E8_BASIS)


def bw8_basis() -> DyadicMatrix:
    return DyadicMatrix.from_values(_BW8_BASIS)


def bw16_basis() -> DyadicMatrix:
    return DyadicMatrix.from_values(_BW16_BASIS)


def d4_basis() -> RectangularBasis:
    u = np.eye(4, dtype=np.int64)
    u[3, :] = 1
    return RectangularBasis(DyadicMatrix(u), _diag_fracs((1, 1, 1, 2)))


def dn_basis(n: int) -> RectangularBasis:
    """Rectangular basis of D_n: ``e_i + e_n`` for i < n, then ``2 e_n``."""
    if n < 2:
        raise ValueError("D_n needs n >= 2")
    u = np.eye(n, dtype=np.int64)
    u[n - 1, :] = 1
    return RectangularBasis(DyadicMatrix(u), _diag_fracs((1,) * (n - 1) + (2,)))


def _spec(name, basis, gamma_sq, tau, vol, lambda1_sq) -> LatticeSpec:
    return LatticeSpec(
        name=name,
        dim=basis.dim if basis is not None else _CONST_DIMS[name],
        basis=basis,
        gamma_sq=Fraction(gamma_sq),
        tau=tau,
        vol=vol,
        lambda1_sq=Fraction(lambda1_sq),
    )


_CONST_DIMS = {"Leech24": 24}


@lru_cache(maxsize=None)
def _build_catalog() -> dict[str, LatticeSpec]:
    specs = [
        _spec("Z", RectangularBasis(DyadicMatrix.identity(1), (Fraction(1),)), 1, 2, 1, 1),
        _spec("D2", dn_basis(2), 1, 4, 2, 2),
        _spec("D4", d4_basis(), 2, 24, 2, 2),
        _spec("E8", RectangularBasis.from_basis(e8_basis(), _E8_PI), 4, 240, 1, 2),
        _spec("BW8", RectangularBasis.from_basis(bw8_basis(), _BW8_PI), 4, 240, 16, 4),
        _spec("BW16", RectangularBasis.from_basis(bw16_basis(), _BW16_PI), 8, 4320, 1 << 12, 8),
        _spec("Leech24", None, 16, 196560, 1, 4),
        _spec(
            "BW32",
            construction_d([reed_muller(1, 5), reed_muller(3, 5)]),
            16, 146880, 1 << 32, 16,
        ),
        _spec(
            "BW64",
            construction_d([reed_muller(1, 6), reed_muller(3, 6), reed_muller(5, 6)]),
            32, 9694080, 1 << 80, 32,
        ),
    ]
    return {s.name.upper(): s for s in specs}


CATALOG_NAMES = ("Z", "D2", "D4", "E8", "BW8", "BW16", "Leech24", "BW32", "BW64")


def catalog_get(name: str) -> LatticeSpec:
    """Look up a lattice by name (case-insensitive); ``E8^8`` style powers allowed."""
    base, _, power = name.partition("^")
    try:
        spec = _build_catalog()[base.strip().upper()]
    except KeyError:
        raise KeyError(f"unknown lattice {name!r}; known: {', '.join(CATALOG_NAMES)}") from None
    return cartesian_product(spec, int(power)) if power else spec


def catalog() -> list[LatticeSpec]:
    return [catalog_get(n) for n in CATALOG_NAMES]


def same_lattice(b1: DyadicMatrix, b2: DyadicMatrix) -> bool:
    """True when two bases generate the same lattice (``b1^-1 b2`` unimodular)."""
    try:
        return is_unimodular(inverse_exact(b1) @ b2)
    except ValueError:
        return False


def _frac_str(f: Fraction | None) -> str | None:
    return None if f is None else str(f)


def catalog_json(indent: int | None = 2) -> str:
    rows = []
    for spec in catalog():
        entry = {
            "name": spec.name,
            "dim": spec.dim,
            "gamma_sq": _frac_str(spec.gamma_sq),
            "tau": spec.tau,
            "vol": spec.vol,
            "lambda1_sq": _frac_str(spec.lambda1_sq),
            "basis_numerators": None,
            "basis_log2_den": None,
            "pi": None,
        }
        if spec.basis is not None:
            b = spec.basis.matrix
            entry["basis_numerators"] = b.num.tolist()
            entry["basis_log2_den"] = b.log2_den
            entry["pi"] = [str(p) for p in spec.basis.pi]
        rows.append(entry)
    return json.dumps(rows, indent=indent)
