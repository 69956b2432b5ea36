"""Bits <-> message index <-> lattice codeword, under hypercube shaping.

A block lattice with rectangular basis ``B = U diag(pi)`` and shaping modulus
``p`` labels the message space ``prod_i [0, p/pi_i)`` bijectively by
``z -> (B z) mod p``.  At the encryption layer the fine lattice is scaled by
``2**delta`` so the coarse lattice becomes ``q Z^n`` with ``q = 2**delta * p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .cvp import ProductQuantizer, Quantizer, ScaledQuantizer, _check, quantizer_for
from .dyadic import DyadicMatrix
from .lattices import LatticeSpec

ENUMERATION_LIMIT = 1 << 20


@dataclass(frozen=True)
class CodeConfig:
    base: LatticeSpec
    p: int
    delta: int = 0
    blocks: int = 1
    block_radices: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.base.basis is None:
            raise ValueError(f"{self.base.name} has no basis; it cannot be used for encoding")
        if self.base.blocks != 1:
            raise ValueError("pass the block lattice and the number of blocks separately")
        if self.p < 1 or self.delta < 0 or self.blocks < 1:
            raise ValueError("need p >= 1, delta >= 0, blocks >= 1")
        object.__setattr__(self, "block_radices", self.base.basis.radices(self.p))

    @property
    def t(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return self.t * self.blocks

    @property
    def radices(self) -> tuple[int, ...]:
        return self.block_radices * self.blocks

    @property
    def q(self) -> int:
        return self.p << self.delta

    @property
    def rate(self) -> float:
        """Encoded bits per dimension, ``(1/t) log2(p**t / vol)``."""
        return math.log2(self.p) - math.log2(self.base.vol) / self.t

    @property
    def code_size(self) -> int:
        return math.prod(self.block_radices)

    @property
    def power_of_two(self) -> bool:
        return all(r & (r - 1) == 0 for r in self.block_radices)

    @property
    def bits_per_block(self) -> int:
        if not self.power_of_two:
            raise ValueError(f"radices {self.block_radices} are not all powers of two")
        return sum(r.bit_length() - 1 for r in self.block_radices)

    @property
    def total_bits(self) -> int:
        return self.bits_per_block * self.blocks

    @cached_property
    def quantizer(self) -> Quantizer:
        """Nearest-point map of the fine lattice ``2**delta * base^blocks``."""
        return ProductQuantizer(ScaledQuantizer(quantizer_for(self.base), self.delta), self.blocks)

    def describe(self) -> dict:
        return {
            "lattice": self.base.name,
            "blocks": self.blocks,
            "p": self.p,
            "delta": self.delta,
            "q": self.q,
            "radices": list(self.block_radices),
            "rate": self.rate,
        }


def _as_index(cfg: CodeConfig, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=np.int64))
    if z.shape[1] != cfg.n:
        raise ValueError(f"index has length {z.shape[1]}, expected {cfg.n}")
    r = np.asarray(cfg.radices, dtype=np.int64)
    if np.any(z < 0) or np.any(z >= r):
        raise ValueError("index out of range for the message space")
    return z


def _blocks(a: np.ndarray, t: int) -> np.ndarray:
    return a.reshape(a.shape[0], -1, t)


def label_grid(cfg: CodeConfig, z) -> tuple[np.ndarray, int]:
    """Codeword numerators in ``[0, p)`` over ``2**e``, e = basis denominator bits."""
    z = _as_index(cfg, z)
    bm = cfg.base.basis.matrix
    e = bm.log2_den
    x = _blocks(z, cfg.t) @ bm.num.T
    x = np.mod(x, cfg.p << e)
    return x.reshape(z.shape), e


def label(cfg: CodeConfig, z) -> DyadicMatrix:
    """``(B z) mod p`` per block; one row per index when z is 2-D."""
    squeeze = np.ndim(z) == 1
    x, e = label_grid(cfg, z)
    return DyadicMatrix(x[0] if squeeze else x, e)


def delabel_grid(cfg: CodeConfig, x: np.ndarray, log2_den: int) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    if x.shape[1] != cfg.n:
        raise ValueError(f"codeword has length {x.shape[1]}, expected {cfg.n}")
    inv = cfg.base.basis.inverse
    # Reduce mod p first so the products stay small; p*B^-1 maps Z^t into
    # the radix lattice, so this does not change the result.
    x = np.mod(x, cfg.p << log2_den)
    z = _blocks(x, cfg.t) @ inv.num.T
    den_bits = inv.log2_den + log2_den
    if np.any(z & ((1 << den_bits) - 1)):
        raise ValueError("point is not in the fine lattice")
    z = (z >> den_bits).reshape(x.shape)
    return np.mod(z, np.asarray(cfg.radices, dtype=np.int64))


def delabel(cfg: CodeConfig, x) -> np.ndarray:
    """``B^-1 x mod radices``; x may be ints, fractions or a DyadicMatrix."""
    if isinstance(x, DyadicMatrix):
        num, e = x.num, x.log2_den
    else:
        arr = np.asarray(x)
        if arr.dtype == object:
            d = DyadicMatrix.from_values(arr)
            num, e = d.num, d.log2_den
        else:
            if not np.issubdtype(arr.dtype, np.integer):
                raise TypeError("codewords must be integers, fractions or a DyadicMatrix")
            num, e = arr, 0
    squeeze = np.ndim(num) == 1
    z = delabel_grid(cfg, num, e)
    return z[0] if squeeze else z


def _parse_bits(bits) -> np.ndarray:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError("bit string may only contain 0 and 1")
        return np.frombuffer(bits.encode(), dtype=np.uint8)[None, :] - ord("0")
    arr = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bits must be 0 or 1")
    return arr.astype(np.uint8)


def _widths(cfg: CodeConfig) -> np.ndarray:
    if not cfg.power_of_two:
        raise ValueError(f"bit mapping needs power-of-two radices, got {cfg.block_radices}")
    return np.array([r.bit_length() - 1 for r in cfg.radices], dtype=np.int64)


def bits_to_index(cfg: CodeConfig, bits) -> np.ndarray:
    """Big-endian per coordinate, coordinates in basis-column order."""
    widths = _widths(cfg)
    squeeze = isinstance(bits, str) or np.ndim(bits) == 1
    b = _parse_bits(bits)
    if b.shape[1] != widths.sum():
        raise ValueError(f"expected {widths.sum()} bits, got {b.shape[1]}")
    z = np.zeros((b.shape[0], cfg.n), dtype=np.int64)
    at = 0
    for i, w in enumerate(widths):
        for j in range(w):
            z[:, i] = (z[:, i] << 1) | b[:, at + j]
        at += w
    return z[0] if squeeze else z


def index_to_bits(cfg: CodeConfig, z) -> np.ndarray:
    widths = _widths(cfg)
    squeeze = np.ndim(z) == 1
    z = _as_index(cfg, z)
    out = np.zeros((z.shape[0], int(widths.sum())), dtype=np.uint8)
    at = 0
    for i, w in enumerate(widths):
        for j in range(w):
            out[:, at + j] = (z[:, i] >> (w - 1 - j)) & 1
        at += w
    return out[0] if squeeze else out


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def hex_to_bits(text: str, nbits: int) -> np.ndarray:
    """MSB-first; the hex string must hold exactly ``ceil(nbits/8)`` bytes with zero padding."""
    text = text.strip().lower().removeprefix("0x")
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}") from None
    if len(raw) != (nbits + 7) // 8:
        raise ValueError(f"expected {(nbits + 7) // 8} bytes of hex for {nbits} bits, got {len(raw)}")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    if bits[nbits:].any():
        raise ValueError("padding bits after the message must be zero")
    return bits[:nbits]


def bits_to_hex(bits) -> str:
    return np.packbits(np.asarray(bits, dtype=np.uint8).ravel()).tobytes().hex()


def enumerate_code(cfg: CodeConfig) -> set[tuple]:
    """All codewords of one block as tuples (ints, or Fractions for half-integers)."""
    size = cfg.code_size
    if size > ENUMERATION_LIMIT:
        raise ValueError(f"code has {size} words; refusing to enumerate more than {ENUMERATION_LIMIT}")
    single = CodeConfig(cfg.base, cfg.p, cfg.delta, 1)
    z = np.array(list(itertools.product(*(range(r) for r in single.radices))), dtype=np.int64)
    x, e = label_grid(single, z)
    if e == 0:
        return {tuple(int(v) for v in row) for row in x}
    return {tuple(_scalar(int(v), e) for v in row) for row in x}


def _scalar(num: int, e: int):
    f = Fraction(num, 1 << e)
    return int(f) if f.denominator == 1 else f


def _require_integral(cfg: CodeConfig) -> int:
    e = cfg.base.basis.matrix.log2_den
    if cfg.delta < e:
        raise ValueError(f"delta={cfg.delta} too small: {cfg.base.name} needs delta >= {e} for integer codewords")
    return e


def encode_index(cfg: CodeConfig, z) -> np.ndarray:
    """``2**delta * label(z)`` reduced into ``[0, q)``, as int64."""
    e = _require_integral(cfg)
    x, _ = label_grid(cfg, z)
    out = np.mod(x << (cfg.delta - e), cfg.q)
    return out[0] if np.ndim(z) == 1 else out


def encode_block(cfg: CodeConfig, bits) -> np.ndarray:
    squeeze = isinstance(bits, str) or np.ndim(bits) == 1
    out = encode_index(cfg, np.atleast_2d(bits_to_index(cfg, bits)))
    return out[0] if squeeze else out


def centered(y: np.ndarray, q: int) -> np.ndarray:
    """Representative of ``y mod q`` in ``[-q/2, q/2)``."""
    return np.mod(np.asarray(y, dtype=np.int64) + q // 2, q) - q // 2


def decode_index(cfg: CodeConfig, y) -> np.ndarray:
    """Nearest fine-lattice point to the centred lift of y, then delabel."""
    _require_integral(cfg)
    squeeze = np.ndim(y) == 1
    yc = _check(np.atleast_2d(centered(y, cfg.q)), 0)
    x = cfg.quantizer.grid(yc, 0)
    z = delabel_grid(cfg, x, cfg.delta)
    return z[0] if squeeze else z


def decode_block(cfg: CodeConfig, y) -> np.ndarray:
    return index_to_bits(cfg, decode_index(cfg, y))


def decode_real(cfg: CodeConfig, y: np.ndarray, frac: int = 12) -> np.ndarray:
    """Decode real-valued received words (already centred) on a ``2**-frac`` grid."""
    _require_integral(cfg)
    a = np.rint(np.atleast_2d(y) * float(1 << frac)).astype(np.int64)
    x = cfg.quantizer.grid(_check(a, frac), frac)
    return delabel_grid(cfg, x, cfg.delta + frac)
