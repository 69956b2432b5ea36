import csv
import io
import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticode import analysis
from latticode.analysis import (
    dfr_bound,
    dfr_for_params,
    effective_sigma,
    feasible_rates,
    log_erfc,
    mc_awgn_dfr,
    rate_for,
    reproduce_table,
    sigma_bar_for_bound,
    table_csv,
    table_json,
    wilson_interval,
)
from latticode.codec import CodeConfig
from latticode.lattices import catalog_get
from latticode.params import get_params, params_registry


def test_effective_sigma_closed_form():
    exact = mpmath.mpf("2.75") * mpmath.sqrt(2 * 640 * mpmath.mpf("2.75") ** 2 + 1)
    assert effective_sigma(2.75, 640) == pytest.approx(float(exact), rel=1e-14)
    exact = mpmath.mpf("1.4") * mpmath.sqrt(2 * 1344 * mpmath.mpf("1.4") ** 2 + 1)
    assert effective_sigma(1.4, 1344) == pytest.approx(float(exact), rel=1e-14)
    assert effective_sigma(0.3, 0) == 0.3
    assert effective_sigma(1e-4, 1) == pytest.approx(1e-4, rel=1e-7)
    with pytest.raises(ValueError):
        effective_sigma(0, 10)


@pytest.mark.parametrize("x", [-3.0, 0.0, 0.5, 3.0, 8.0, 12.0, 30.0, 60.0])
def test_log_erfc_matches_mpmath(x):
    ref = float(mpmath.log(mpmath.erfc(x)))
    assert log_erfc(x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_no_underflow_to_minus_2000():
    # x**2 / ln 2 of about 2000 bits
    x = math.sqrt(2000 * math.log(2))
    sb = math.sqrt(2) ** 0.5 * 2**15 / (2**3.5 * x)
    v = dfr_bound(2, 1920, 2**15, 2, sb)
    ref = math.log2(960) + float(mpmath.log(mpmath.erfc(x), 2))
    assert math.isfinite(v) and v < -1990
    assert v == pytest.approx(ref, abs=1e-6)


positive = st.floats(0.5, 50)


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from([1, 2, 4, 8]),
    st.integers(2, 20000),
    st.integers(10, 17),
    st.sampled_from(["1", "2", "9/4", "3", "4"]),
    st.floats(1, 500),
    st.floats(1.01, 2),
)
def test_bound_monotone(gamma_sq, tau, log2q, b, sb, k):
    q = 1 << log2q
    base = dfr_bound(gamma_sq, tau, q, b, sb)
    assert dfr_bound(gamma_sq, tau, 2 * q, b, sb) <= base
    assert dfr_bound(gamma_sq * k, tau, q, b, sb) <= base
    assert dfr_bound(gamma_sq, tau, q, b, sb * k) >= base
    assert dfr_bound(gamma_sq, tau * 2, q, b, sb) >= base
    assert dfr_bound(gamma_sq, tau, q, Fraction(b) + Fraction(1, 4), sb) >= base


def test_bound_rejects_nonpositive():
    with pytest.raises(ValueError, match="sigma_bar"):
        dfr_bound(1, 2, 16, 1, 0)
    with pytest.raises(ValueError, match="tau"):
        dfr_bound(1, 0, 16, 1, 1)


def test_rate_for():
    assert rate_for(4, "E8") == 2
    assert rate_for(8, "BW16") == Fraction(9, 4)
    for b in range(1, 6):
        assert rate_for(1 << b, "Z") == b
    assert rate_for(4, "D4") == Fraction(7, 4)
    assert isinstance(rate_for(6, "Z"), float)
    with pytest.raises(ValueError):
        rate_for(1, "D4")


def test_feasible_rates():
    assert feasible_rates("E8", 256) == [64, 128, 192, 256]
    assert feasible_rates("BW16", 272) == [80, 144, 208, 272]
    assert feasible_rates("D4", 304) == [112, 176, 240, 304]
    with pytest.raises(ValueError, match="tile"):
        feasible_rates("E8", 256, entries=12)


def test_table_b_and_sizes_exact():
    for which in (2, 3):
        rows = reproduce_table(which)
        assert len(rows) == 12
        for r, p in zip(rows, analysis.table_rows(which)):
            assert Fraction(r["B"]) == p.rate_listed
            assert r["ct_bytes"] == p.ct_bytes_listed
    assert {r["ct_bytes"] for r in reproduce_table(3)} == {9720, 9072, 15744, 14760, 21632, 20280}


@pytest.mark.parametrize("pid", [r.id for r in params_registry()])
def test_bound_matches_high_precision_formula(pid):
    p = get_params(pid)
    base = catalog_get(p.lattice)
    mpmath.mp.dps = 50
    sb = mpmath.mpf(p.sigma) * mpmath.sqrt(2 * p.n_prime * mpmath.mpf(p.sigma) ** 2 + 1)
    gamma = mpmath.sqrt(mpmath.mpf(base.gamma_sq.numerator) / base.gamma_sq.denominator)
    b = mpmath.mpf(p.rate_b.numerator) / p.rate_b.denominator
    x = mpmath.sqrt(gamma) * p.q / (mpmath.mpf(2) ** (b + mpmath.mpf(3) / 2) * sb)
    tau = base.tau * (64 // base.dim)
    ref = mpmath.log(mpmath.mpf(tau) / 2, 2) + mpmath.log(mpmath.erfc(x), 2)
    assert dfr_for_params(p).bound_log2 == pytest.approx(float(ref), abs=1e-9)


def test_small_original_rows_within_one_bit():
    for pid in ("frodo-640", "frodo-976"):
        p = get_params(pid)
        assert abs(dfr_for_params(p).bound_log2 - p.dfr_log2) <= 1


def test_product_kissing_number():
    assert dfr_for_params(get_params("frodo-640")).tau == 128
    assert dfr_for_params(get_params("frodo-640-e8")).tau == 1920
    assert dfr_for_params(get_params("frodo-640-bw16")).tau == 4 * 4320


def test_table_formats():
    rows = reproduce_table(2)
    parsed = list(csv.DictReader(io.StringIO(table_csv(rows))))
    assert list(parsed[0]) == list(analysis.TABLE_COLUMNS)
    assert len(parsed) == 12
    assert json.loads(table_json(rows))[0]["name"] == rows[0]["name"]
    with pytest.raises(ValueError):
        analysis.table_rows(4)


def test_sigma_for_target_inverts_bound():
    p = get_params("frodo-640-e8")
    s = analysis.sigma_for_target(p, -200)
    assert dfr_for_params(p, s).bound_log2 == pytest.approx(-200, abs=1e-6)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 1000)
    assert lo == 0 and 0 < hi < 0.01
    lo, hi = wilson_interval(50, 1000)
    assert lo < 0.05 < hi


def e8_cfg():
    return CodeConfig(catalog_get("E8"), 4, 8)


def test_mc_zero_noise_no_failures():
    rep = mc_awgn_dfr(e8_cfg(), 1e-9, 5000, seed=1)
    assert rep.mc_failures == 0
    rep = mc_awgn_dfr(e8_cfg(), 0.0, 100, seed=1)
    assert rep.mc_failures == 0 and rep.bound_log2 == -math.inf


def test_mc_independent_of_threads_and_deterministic():
    cfg = e8_cfg()
    sb = sigma_bar_for_bound(cfg, 1e-2)
    a = mc_awgn_dfr(cfg, sb, 70_000, seed=5, threads=1)
    b = mc_awgn_dfr(cfg, sb, 70_000, seed=5, threads=3)
    c = mc_awgn_dfr(cfg, sb, 70_000, seed=5)
    assert a.mc_failures == b.mc_failures == c.mc_failures > 0
    assert mc_awgn_dfr(cfg, sb, 70_000, seed=6).mc_failures != a.mc_failures


def test_mc_bound_holds_small():
    cfg = e8_cfg()
    sb = sigma_bar_for_bound(cfg, 1e-2)
    rep = mc_awgn_dfr(cfg, sb, 100_000, seed=2)
    assert rep.mc_interval[1] <= 2.0**rep.bound_log2
    with pytest.raises(ValueError):
        mc_awgn_dfr(cfg, sb, 0, seed=2)


def test_pke_noise_variance_small():
    emp, pred = analysis.pke_noise_variance(get_params("frodo-640-e8"), 16, 40, seed=0)
    assert pred == pytest.approx(effective_sigma(3.25, 16) ** 2)
    assert abs(emp - pred) / pred < 0.2


def test_report_dict_serializable():
    d = analysis.report_dict(dfr_for_params(get_params("frodo-640-bw16")))
    assert d["b_rate"] == "9/4"
    json.dumps(d)
