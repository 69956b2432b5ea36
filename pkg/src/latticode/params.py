"""Parameter sets: the three original Frodo levels and their lattice-coded variants.

Each variant replaces the per-entry ``B``-bit modulation with a lattice code
``2**delta * L^k`` over the 64 entries of the ``m_bar x n_bar`` message block.
Two families exist per level: one that keeps ``q`` and raises ``sigma``
("security") and one that lowers ``q`` to shrink ciphertexts ("size", ids
ending in ``-ct``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from .codec import CodeConfig
from .lattices import catalog_get


@dataclass(frozen=True)
class Security:
    classical: int
    quantum: int
    paranoid: int


@dataclass(frozen=True)
class ParamSet:
    id: str
    name: str
    family: str  # "original", "security" or "size"
    n_prime: int
    q: int
    sigma: float
    lattice: str
    delta: int
    dfr_log2: int | None = None
    ct_bytes_listed: int | None = None
    rate_listed: Fraction | None = None
    security: Security | None = None
    n_bar: int = 8
    m_bar: int = 8

    def __post_init__(self):
        if self.q & (self.q - 1):
            raise ValueError("q must be a power of two")
        if (self.q >> self.delta) << self.delta != self.q:
            raise ValueError("2**delta must divide q")

    @property
    def log2_q(self) -> int:
        return self.q.bit_length() - 1

    @property
    def p(self) -> int:
        return self.q >> self.delta

    @cached_property
    def code(self) -> CodeConfig:
        base = catalog_get(self.lattice)
        entries = self.m_bar * self.n_bar
        if entries % base.dim:
            raise ValueError(f"{entries} message entries do not tile into {base.name} blocks")
        return CodeConfig(base, self.p, self.delta, entries // base.dim)

    @property
    def rate_b(self) -> Fraction:
        """Bits per message entry, exact."""
        base = catalog_get(self.lattice)
        b = Fraction(self.p.bit_length() - 1) - Fraction(base.vol.bit_length() - 1, base.dim)
        return b

    @property
    def message_bits(self) -> int:
        return int(self.rate_b * self.m_bar * self.n_bar)

    @property
    def ct_bytes(self) -> int:
        bits = (self.m_bar * self.n_prime + self.m_bar * self.n_bar) * self.log2_q
        return bits // 8

    @property
    def naive(self) -> bool:
        return self.lattice == "Z"

    def summary(self) -> dict:
        out = {
            "id": self.id,
            "name": self.name,
            "family": self.family,
            "n_prime": self.n_prime,
            "n_bar": self.n_bar,
            "m_bar": self.m_bar,
            "q": self.q,
            "sigma": self.sigma,
            "lattice": f"2^{self.delta}*{self.lattice}^{self.code.blocks}",
            "coarse": f"2^{self.log2_q}*Z^{self.m_bar * self.n_bar}",
            "p": self.p,
            "B": str(self.rate_b),
            "message_bits": self.message_bits,
            "ct_bytes": self.ct_bytes,
            "dfr_log2": self.dfr_log2,
        }
        if self.security is not None:
            out["security"] = {
                "classical": self.security.classical,
                "quantum": self.security.quantum,
                "paranoid": self.security.paranoid,
            }
        return out


def _row(id_, name, family, n, log2q, sigma, b, lattice, delta, dfr, ct, sec):
    return ParamSet(id_, name, family, n, 1 << log2q, sigma, lattice, delta, dfr, ct, Fraction(b), Security(*sec))


# id, name, family, n', log2 q, sigma, B, lattice, delta, DFR exponent, |c| bytes, (C, Q, P) security
_ROWS = [
    _row("frodo-640", "Frodo-640", "original", 640, 15, 2.75, "2", "Z", 13, -164, 9720, (149, 136, 109)),
    _row("frodo-640-e8", "Frodo-640-E8", "security", 640, 15, 3.25, "2", "E8", 13, -164, 9720, (156, 142, 113)),
    _row("frodo-640-bw16", "Frodo-640-BW16", "security", 640, 15, 3.23, "2.25", "BW16", 12, -164, 9720, (155, 142, 113)),
    _row("frodo-640-bw32", "Frodo-640-BW32", "security", 640, 15, 3.83, "2", "BW32", 12, -164, 9720, (162, 148, 118)),
    _row("frodo-640-e8-ct", "Frodo-640-E8", "size", 640, 14, 2.30, "2", "E8", 12, -164, 9072, (156, 143, 114)),
    _row("frodo-640-bw16-ct", "Frodo-640-BW16", "size", 640, 14, 2.29, "2.25", "BW16", 11, -164, 9072, (156, 143, 114)),
    _row("frodo-640-bw32-ct", "Frodo-640-BW32", "size", 640, 14, 2.71, "2", "BW32", 11, -164, 9072, (163, 149, 118)),
    _row("frodo-976", "Frodo-976", "original", 976, 16, 2.3, "3", "Z", 13, -220, 15744, (216, 196, 156)),
    _row("frodo-976-e8", "Frodo-976-E8", "security", 976, 16, 2.72, "3", "E8", 13, -220, 15744, (224, 204, 162)),
    _row("frodo-976-bw16", "Frodo-976-BW16", "security", 976, 16, 2.71, "3.25", "BW16", 12, -220, 15744, (224, 204, 161)),
    _row("frodo-976-bw32", "Frodo-976-BW32", "security", 976, 16, 3.21, "3", "BW32", 12, -220, 15744, (232, 211, 167)),
    _row("frodo-976-e8-ct", "Frodo-976-E8", "size", 976, 15, 1.93, "3", "E8", 12, -220, 14760, (225, 205, 162)),
    _row("frodo-976-bw16-ct", "Frodo-976-BW16", "size", 976, 15, 1.92, "3.25", "BW16", 11, -220, 14760, (224, 204, 162)),
    _row("frodo-976-bw32-ct", "Frodo-976-BW32", "size", 976, 15, 2.27, "3", "BW32", 11, -220, 14760, (233, 212, 168)),
    _row("frodo-1344", "Frodo-1344", "original", 1344, 16, 1.4, "4", "Z", 12, -290, 21632, (282, 256, 203)),
    _row("frodo-1344-e8", "Frodo-1344-E8", "security", 1344, 16, 1.66, "4", "E8", 12, -290, 21632, (292, 265, 210)),
    _row("frodo-1344-bw16", "Frodo-1344-BW16", "security", 1344, 16, 1.66, "4.25", "BW16", 11, -290, 21632, (292, 265, 210)),
    _row("frodo-1344-bw32", "Frodo-1344-BW32", "security", 1344, 16, 1.97, "4", "BW32", 11, -290, 21632, (302, 275, 217)),
    _row("frodo-1344-e8-ct", "Frodo-1344-E8", "size", 1344, 15, 1.18, "4", "E8", 11, -290, 20280, (291, 265, 210)),
    _row("frodo-1344-bw16-ct", "Frodo-1344-BW16", "size", 1344, 15, 1.17, "4.25", "BW16", 10, -290, 20280, (291, 265, 209)),
    _row("frodo-1344-bw32-ct", "Frodo-1344-BW32", "size", 1344, 15, 1.39, "4", "BW32", 10, -290, 20280, (302, 275, 217)),
]


@lru_cache(maxsize=None)
def params_registry() -> tuple[ParamSet, ...]:
    return tuple(_ROWS)


def param_id_number(params: ParamSet) -> int:
    """Stable small integer for serialization headers; 0 for unregistered sets."""
    for i, row in enumerate(params_registry(), start=1):
        if row == params:
            return i
    return 0


def get_params(key: str | int) -> ParamSet:
    """Look up by id (``frodo-640-e8-ct``), case-insensitively, or by header number."""
    rows = params_registry()
    if isinstance(key, int):
        if 1 <= key <= len(rows):
            return rows[key - 1]
        raise KeyError(f"no parameter set number {key}")
    k = key.strip().lower()
    for row in rows:
        if row.id == k:
            return row
    raise KeyError(f"unknown parameter set {key!r}; try one of: {', '.join(r.id for r in rows)}")


def toy_d4_params(q: int = 16, sigma: float = 0.0) -> ParamSet:
    """Single D4 block (n' = 4, 2x2 message) used to replay the worked example."""
    return ParamSet("toy-d4", "Toy-D4", "toy", 4, q, sigma, "D4", (q // 4).bit_length() - 1, n_bar=2, m_bar=2)
