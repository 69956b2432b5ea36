"""Decryption-failure bounds, rates and Monte Carlo checks.

The error term ``S'E + E'' - E'S`` of one message entry is modelled as an
i.i.d. Gaussian of width ``sigma_bar = sigma * sqrt(2 n' sigma**2 + 1)``.
With a fine lattice of Hermite parameter ``gamma`` and kissing number ``tau``
(of the whole 64-dimensional product) the union bound reads

    P_e <~ (tau / 2) * erfc( sqrt(gamma) * q / (2**(B + 3/2) * sigma_bar) ).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction

import numpy as np
from scipy import optimize, special, stats

from .codec import CodeConfig, decode_real, encode_index
from .lattices import LatticeSpec, catalog_get
from .params import ParamSet, params_registry

LN2 = math.log(2.0)
MC_CHUNK = 1 << 15


def effective_sigma(sigma: float, n_prime: int) -> float:
    if sigma <= 0 or n_prime < 0:
        raise ValueError("need sigma > 0 and n' >= 0")
    return sigma * math.sqrt(2.0 * n_prime * sigma * sigma + 1.0)


def log_erfc(x: float) -> float:
    """Natural log of erfc(x), finite far into the tail."""
    if x <= 0:
        return math.log(special.erfc(x))
    return math.log(special.erfcx(x)) - x * x


def _to_float(v) -> float:
    return float(Fraction(v)) if isinstance(v, (Fraction, str)) else float(v)


def erfc_argument(gamma_sq, q: int, b_rate, sigma_bar: float) -> float:
    gamma = _to_float(gamma_sq) ** 0.5
    return math.sqrt(gamma) * q / (2.0 ** (_to_float(b_rate) + 1.5) * sigma_bar)


def dfr_bound(gamma_sq, tau: int, q: int, b_rate, sigma_bar: float) -> float:
    """log2 of the union bound; ``tau`` is the kissing number of the product lattice."""
    for name, v in (("gamma_sq", gamma_sq), ("tau", tau), ("q", q), ("b_rate", b_rate), ("sigma_bar", sigma_bar)):
        if _to_float(v) <= 0:
            raise ValueError(f"{name} must be positive")
    x = erfc_argument(gamma_sq, q, b_rate, sigma_bar)
    return math.log2(tau / 2.0) + log_erfc(x) / LN2


def rate_for(p: int, lattice: LatticeSpec | str):
    """Bits per dimension ``log2(p) - log2(vol)/t``.

    Exact (a Fraction) when p is a power of two, which covers every parameter
    set; other moduli give an irrational rate, returned as a float.
    """
    spec = catalog_get(lattice) if isinstance(lattice, str) else lattice
    if spec.basis is not None:
        spec.basis.radices(p)  # raises unless p is a multiple of every pi_i
    log_vol = Fraction(spec.vol.bit_length() - 1) if spec.vol & (spec.vol - 1) == 0 else math.log2(spec.vol)
    if p & (p - 1) == 0 and isinstance(log_vol, Fraction):
        return Fraction(p.bit_length() - 1) - log_vol / spec.dim
    return math.log2(p) - float(log_vol) / spec.dim


def feasible_rates(lattice: LatticeSpec | str, max_bits: int = 320, entries: int = 64) -> list[int]:
    """Message sizes ``entries * B`` for ``p = p_min * 2**j``, from one bit per entry upward."""
    spec = catalog_get(lattice) if isinstance(lattice, str) else lattice
    if entries % spec.dim:
        raise ValueError(f"{entries} entries do not tile into {spec.name} blocks")
    p = spec.min_shaping_modulus
    out = []
    while True:
        bits = rate_for(p, spec) * entries
        if bits > max_bits:
            return out
        if bits >= entries:
            out.append(int(bits) if Fraction(bits).denominator == 1 else float(bits))
        p *= 2


def product_tau(params: ParamSet) -> int:
    base = catalog_get(params.lattice)
    return base.tau * params.code.blocks


@dataclass(frozen=True)
class DfrReport:
    lattice: str
    gamma_sq: Fraction
    tau: int
    q: int
    b_rate: Fraction
    sigma_bar: float
    bound_log2: float
    mc_failures: int | None = None
    mc_trials: int | None = None
    mc_interval: tuple[float, float] | None = None


def dfr_for_params(params: ParamSet, sigma: float | None = None) -> DfrReport:
    base = catalog_get(params.lattice)
    sb = effective_sigma(params.sigma if sigma is None else sigma, params.n_prime)
    tau = product_tau(params)
    return DfrReport(
        f"{base.name}^{params.code.blocks}",
        base.gamma_sq,
        tau,
        params.q,
        params.rate_b,
        sb,
        dfr_bound(base.gamma_sq, tau, params.q, params.rate_b, sb),
    )


def sigma_for_target(params: ParamSet, target_log2: float) -> float:
    """The sigma at which the bound equals ``2**target_log2`` (other parameters fixed)."""

    def f(s):
        return dfr_for_params(params, s).bound_log2 - target_log2

    return optimize.brentq(f, 1e-3, 50.0, xtol=1e-12)


TABLE_COLUMNS = (
    "name", "n_prime", "q", "sigma", "lattice", "B", "ct_bytes",
    "dfr_log2_claimed", "dfr_log2_computed", "match",
)


def table_rows(which: int) -> list[ParamSet]:
    if which == 2:
        families = ("original", "security")
    elif which == 3:
        families = ("original", "size")
    else:
        raise ValueError("which must be 2 (security) or 3 (ciphertext size)")
    return [p for p in params_registry() if p.family in families]


def reproduce_row(params: ParamSet, tolerance: float = 1.0) -> dict:
    rep = dfr_for_params(params)
    b_ok = params.rate_listed is None or params.rate_b == params.rate_listed
    ct_ok = params.ct_bytes_listed is None or params.ct_bytes == params.ct_bytes_listed
    dfr_ok = params.dfr_log2 is None or abs(rep.bound_log2 - params.dfr_log2) <= tolerance
    return {
        "name": params.name,
        "n_prime": params.n_prime,
        "q": params.q,
        "sigma": params.sigma,
        "lattice": f"2^{params.delta}*{params.lattice}^{params.code.blocks}",
        "B": str(params.rate_b),
        "ct_bytes": params.ct_bytes,
        "dfr_log2_claimed": params.dfr_log2,
        "dfr_log2_computed": round(rep.bound_log2, 2),
        "match": bool(b_ok and ct_ok and dfr_ok),
    }


def reproduce_table(which: int) -> list[dict]:
    return [reproduce_row(p) for p in table_rows(which)]


def table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def table_json(rows: list[dict], indent: int | None = 2) -> str:
    return json.dumps(rows, indent=indent)


# Monte Carlo -----------------------------------------------------------------


def wilson_interval(failures: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    ci = stats.binomtest(failures, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _mc_chunk(cfg: CodeConfig, sigma_bar: float, count: int, seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    z = rng.integers(0, np.asarray(cfg.radices), size=(count, cfg.n))
    x = encode_index(cfg, z).astype(np.float64)
    y = x + rng.normal(0.0, sigma_bar, size=x.shape)
    # centred lift of y mod q
    q = float(cfg.q)
    y = np.mod(y + q / 2, q) - q / 2
    zh = decode_real(cfg, y)
    return int(np.any(zh != z, axis=1).sum())


def mc_awgn_dfr(cfg: CodeConfig, sigma_bar: float, trials: int, seed: int, threads: int = 1) -> DfrReport:
    """Empirical rate of wrongly decoded codewords under i.i.d. N(0, sigma_bar**2) noise.

    Trials are split into fixed-size chunks, each with its own spawned seed,
    so the count does not depend on ``threads``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sigma_bar < 0:
        raise ValueError("sigma_bar must be non-negative")
    sizes = [MC_CHUNK] * (trials // MC_CHUNK)
    if trials % MC_CHUNK:
        sizes.append(trials % MC_CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seqs))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda j: _mc_chunk(cfg, sigma_bar, *j), jobs))
    else:
        counts = [_mc_chunk(cfg, sigma_bar, *j) for j in jobs]
    failures = sum(counts)
    base = cfg.base
    tau = base.tau * cfg.blocks
    bound = dfr_bound(base.gamma_sq, tau, cfg.q, cfg.rate, sigma_bar) if sigma_bar > 0 else -math.inf
    return DfrReport(
        f"{base.name}^{cfg.blocks}",
        base.gamma_sq,
        tau,
        cfg.q,
        Fraction(cfg.rate).limit_denominator(1 << 20),
        sigma_bar,
        bound,
        failures,
        trials,
        wilson_interval(failures, trials),
    )


def sigma_bar_for_bound(cfg: CodeConfig, target: float) -> float:
    """The sigma_bar at which the union bound for ``cfg`` equals ``target`` (a probability)."""
    base = cfg.base
    tau = base.tau * cfg.blocks
    lo, hi = 1e-6 * cfg.q, 10.0 * cfg.q
    return optimize.brentq(
        lambda s: dfr_bound(base.gamma_sq, tau, cfg.q, cfg.rate, s) - math.log2(target), lo, hi, xtol=1e-12
    )


def pke_noise_variance(params: ParamSet, n_prime: int, trials: int, seed: int) -> tuple[float, float]:
    """Empirical per-entry variance of ``S'E + E'' - E'S`` at a reduced n'.

    Returns (empirical, predicted) where predicted is ``sigma_bar**2`` for the
    rounded Gaussian actually sampled.
    """
    from .frodo import encrypt_trace, keygen_trace  # local: frodo pulls in the whole stack

    small = replace(params, n_prime=n_prime, ct_bytes_listed=None)
    seeds = np.random.SeedSequence(seed).generate_state(2 * trials, dtype=np.uint32)
    samples = []
    zeros = np.zeros(small.message_bits, dtype=np.int64)
    for i in range(trials):
        kg = keygen_trace(small, seeds[2 * i].tobytes() * 8)
        tr = encrypt_trace(small, kg.keypair, zeros, seeds[2 * i + 1].tobytes() * 8)
        noise = tr.s_prime @ kg.e_matrix + tr.e_double_prime - tr.e_prime @ kg.keypair.s_matrix
        samples.append(noise.ravel())
    emp = float(np.var(np.concatenate(samples)))
    return emp, effective_sigma(params.sigma, n_prime) ** 2


def report_dict(rep: DfrReport) -> dict:
    d = asdict(rep)
    d["gamma_sq"] = str(rep.gamma_sq)
    d["b_rate"] = str(rep.b_rate)
    return d
