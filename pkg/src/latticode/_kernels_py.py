"""Pure numpy nearest-point kernels (fallback for the compiled ``_ckernels``).

Every kernel works on ``a``: an int64 array of shape (N, n) holding query
numerators over ``2**frac``, and returns lattice points as numerators on the
same grid.  The single primitive is the nearest point of a union of cosets
``g + 2**(frac+shift) * L`` with ``L`` either Z^n or D_n, the rows ``g`` of
``reps`` being numerators over ``2**frac``.

Tie rule everywhere, measured on the returned point itself: smaller distance,
then smaller norm, then lexicographically smaller.  The caller keeps
``|a| <= 2**30`` and ``frac + shift <= 26`` so the sums below fit in int64.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _nearest_shifted(a: np.ndarray, g: np.ndarray, F: int, dn: bool) -> np.ndarray:
    step_size = np.int64(1) << F
    x = a - g
    klo = x >> F
    c = g + (klo << F)
    r = x - (klo << F)
    up = 2 * r > step_size
    tie = 2 * r == step_size
    # exact half: take whichever neighbour has the smaller norm, the lower one on equality
    up |= tie & (np.abs(c + step_size) < np.abs(c))
    c = c + np.where(up, step_size, 0)
    if not dn:
        return c
    k = (c - g) >> F
    odd = (k.sum(axis=1) & 1).astype(bool)
    if not odd.any():
        return c
    rows = np.nonzero(odd)[0]
    co, e = c[rows], a[rows] - c[rows]
    toward_zero = np.where(co > 0, -1, np.where(co < 0, 1, -1))
    step = np.where(e > 0, 1, np.where(e < 0, -1, toward_zero))
    # norm change of a flip, divided by 2**F
    nc = 2 * step * co + step_size
    ae = np.abs(e)
    cand = ae == ae.max(axis=1, keepdims=True)
    nc_masked = np.where(cand, nc, np.iinfo(np.int64).max)
    cand &= nc_masked == nc_masked.min(axis=1, keepdims=True)
    # lexicographic: a downward flip as early as possible, else an upward flip as late as possible
    down = cand & (step < 0)
    n = a.shape[1]
    first_down = np.argmax(down, axis=1)
    last_any = n - 1 - np.argmax(cand[:, ::-1], axis=1)
    j = np.where(down.any(axis=1), first_down, last_any)
    idx = np.arange(rows.size)
    c[rows, j] += step[idx, j] << F
    return c


def _better(cand: np.ndarray, best: np.ndarray, a: np.ndarray) -> np.ndarray:
    ec, eb = a - cand, a - best
    dc, db = (ec * ec).sum(axis=1), (eb * eb).sum(axis=1)
    # Equal distance: smaller norm <=> larger <t, t - c>.
    ic, ib = (a * ec).sum(axis=1), (a * eb).sum(axis=1)
    diff = cand - best
    nz = diff != 0
    first = np.argmax(nz, axis=1)
    lex_less = nz.any(axis=1) & (diff[np.arange(len(diff)), first] < 0)
    return (dc < db) | ((dc == db) & ((ic > ib) | ((ic == ib) & lex_less)))


def coset_nearest(a: np.ndarray, frac: int, reps: np.ndarray, shift: int, dn: bool) -> np.ndarray:
    best = None
    for g in reps:
        cand = _nearest_shifted(a, g, frac + shift, dn)
        if best is None:
            best = cand
        else:
            upd = _better(cand, best, a)
            best[upd] = cand[upd]
    return best
