"""Binary linear codes over GF(2): Reed-Muller generators and small utilities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def gf2_rank(m: np.ndarray) -> int:
    a = (np.asarray(m, dtype=np.uint8) & 1).copy()
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if a[r, c]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True, eq=False)
class LinearCodeSpec:
    """An ``(n, k, d)`` binary code; the generator holds the k codewords as columns."""

    n: int
    k: int
    d: int
    generator: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=np.uint8) & 1
        if g.shape != (self.n, self.k):
            raise ValueError(f"generator shape {g.shape} != ({self.n}, {self.k})")
        if gf2_rank(g) != self.k:
            raise ValueError("generator columns are linearly dependent over GF(2)")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    def codewords(self) -> np.ndarray:
        """All 2**k codewords as rows (fine for k up to about 20)."""
        if self.k > 24:
            raise ValueError(f"refusing to enumerate 2^{self.k} codewords")
        msgs = np.array(list(itertools.product((0, 1), repeat=self.k)), dtype=np.uint8)
        if self.k == 0:
            return np.zeros((1, self.n), dtype=np.uint8)
        return (msgs.astype(np.int64) @ self.generator.T.astype(np.int64) % 2).astype(np.uint8)

    def min_distance(self) -> int:
        weights = self.codewords().sum(axis=1)
        nz = weights[weights > 0]
        return int(nz.min()) if nz.size else 0

    def contains(self, word) -> bool:
        w = np.asarray(word, dtype=np.uint8).reshape(-1, 1) & 1
        return gf2_rank(np.hstack([self.generator, w])) == self.k

    def __str__(self) -> str:
        return f"({self.n},{self.k},{self.d})"


@lru_cache(maxsize=None)
def kronecker_generator(m: int) -> np.ndarray:
    """Rows of ``[[1,0],[1,1]]^{(x)m}`` as columns, sorted by decreasing weight.

    Sorting is stable, so equal-weight rows keep their Kronecker order; for
    m=3 and m=4 this reproduces the column order of the usual explicit BW8
    and BW16 bases.
    """
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.ones((1, 1), dtype=np.uint8)
    for _ in range(m):
        g = np.kron(g, f)
    order = sorted(range(1 << m), key=lambda i: -int(g[i].sum()))
    out = g[order].T.copy()
    out.setflags(write=False)
    return out


def reed_muller(r: int, m: int) -> LinearCodeSpec:
    """RM(r, m) with generator taken from the sorted Kronecker rows."""
    if not 0 <= r <= m:
        raise ValueError("need 0 <= r <= m")
    g = kronecker_generator(m)
    weights = g.sum(axis=0)
    cols = g[:, weights >= (1 << (m - r))]
    return LinearCodeSpec(1 << m, cols.shape[1], 1 << (m - r), cols)


def trivial_code(n: int) -> LinearCodeSpec:
    return LinearCodeSpec(n, n, 1, np.eye(n, dtype=np.uint8))


def extended_hamming_8() -> LinearCodeSpec:
    return reed_muller(1, 3)
