import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rnndcor import estat, tsgen
from rnndcor.errors import (
    GarchConstraintError,
    InvalidLength,
    NumericalInstabilityError,
    ParseError,
    StationarityError,
    UserInputError,
)
from rnndcor.tsgen import ArParams, GarchParams, MaParams, NoiseSpec

L = 4000
BAND = 3 / math.sqrt(L)


def ar(coeffs, seed=0, length=L, burn_in=500):
    return tsgen.gen_ar(ArParams(coeffs), NoiseSpec(seed=seed), length, burn_in)


# ---- AR

def test_zero_ar_is_white_noise():
    z = ar((0.0, 0.0, 0.0), seed=3).values
    np.testing.assert_array_equal(z, NoiseSpec(seed=3).draw(500 + L)[500:])
    rho = estat.acf(z, 20)
    assert np.all(np.abs(rho[1:]) < BAND)


def test_ar7_acf_peaks_at_7_and_14():
    rho = estat.acf(ar(tsgen.lag_coeffs(7, 0.8), seed=1).values, 16)
    for h in (7, 14):
        assert rho[h] > rho[h - 1] and rho[h] > rho[h + 1]


def test_ar1_acf_matches_geometric_decay():
    rhos = np.mean([estat.acf(ar((0.8,), seed=s).values, 5) for s in range(20)], axis=0)
    for h in range(1, 6):
        assert abs(rhos[h] - 0.8 ** h) < 0.05


def test_ar_recursion_against_loop():
    eps = NoiseSpec(seed=5).draw(30 + 10)
    c = (0.5, -0.2)
    z = [0.0] * 40
    for l in range(40):
        z[l] = eps[l] + sum(c[i] * z[l - i - 1] for i in range(2) if l - i - 1 >= 0)
    got = ar(c, seed=5, length=10, burn_in=30).values
    np.testing.assert_allclose(got, z[30:], rtol=0, atol=1e-12)


def test_stationarity_gate():
    with pytest.raises(StationarityError):
        ArParams((1.0,))
    with pytest.raises(StationarityError):
        ArParams((0.5, 0.6))
    ArParams((0.99,))
    ArParams(tsgen.lag_coeffs(20, 0.99))


def test_stationarity_error_is_user_error():
    assert issubclass(StationarityError, UserInputError)


@pytest.mark.parametrize("length", [0, 1, -3])
def test_invalid_length(length):
    with pytest.raises(InvalidLength):
        ar((0.5,), length=length)


def test_burn_in_removes_transient():
    first, last = [], []
    for s in range(20):
        z = ar((0.8,), seed=s).values
        first.append(z[:100].mean())
        last.append(z[-100:].mean())
    assert abs(np.mean(first) - np.mean(last)) < 0.2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), length=st.integers(2, 300), burn=st.integers(0, 50))
def test_ar_deterministic(seed, length, burn):
    a = ar((0.3, 0.2), seed=seed, length=length, burn_in=burn)
    b = ar((0.3, 0.2), seed=seed, length=length, burn_in=burn)
    assert len(a) == length
    np.testing.assert_array_equal(a.values, b.values)


# ---- MA

def test_forced_zero_ma_is_constant():
    z = tsgen.gen_ma(MaParams((), delta=5.0), NoiseSpec(seed=0), 100).values
    np.testing.assert_array_equal(z, np.full(100, 5.0))


@pytest.mark.parametrize("standard_form", [False, True])
def test_ma1_acf_cuts_off(standard_form):
    rho = np.mean([estat.acf(tsgen.gen_ma(MaParams((0.8,)), NoiseSpec(seed=s), L,
                                          standard_form=standard_form).values, 20)
                   for s in range(20)], axis=0)
    assert np.all(np.abs(rho[2:]) < BAND)
    # the printed form z_l = 0.8 eps_{l-1} is a shifted white noise
    expected = 0.8 / 1.64 if standard_form else 0.0
    assert abs(rho[1] - expected) < 0.05


def test_ma20_variance():
    theta = np.linspace(0.1, 0.9, 20)
    z = tsgen.gen_ma(MaParams(theta), NoiseSpec(seed=4), L).values
    expected = math.sqrt(np.sum(theta ** 2))
    assert abs(z.std() - expected) / expected < 0.10


def test_printed_ma_has_no_contemporaneous_shock():
    eps = NoiseSpec(seed=9).draw(20)
    z = tsgen.gen_ma(MaParams((0.8,)), NoiseSpec(seed=9), 10, burn_in=10).values
    np.testing.assert_allclose(z, 0.8 * eps[9:19], atol=1e-15)
    zs = tsgen.gen_ma(MaParams((0.8,)), NoiseSpec(seed=9), 10, burn_in=10, standard_form=True).values
    np.testing.assert_allclose(zs, eps[10:20] + 0.8 * eps[9:19], atol=1e-15)


# ---- ARMA

def test_arma_reductions():
    n = NoiseSpec(seed=11)
    a = tsgen.gen_arma(ArParams((0.5, 0.1)), MaParams((0.0, 0.0)), n, 500).values
    np.testing.assert_array_equal(a, tsgen.gen_ar(ArParams((0.5, 0.1)), n, 500).values)
    m = tsgen.gen_arma(ArParams((0.0,)), MaParams((0.4, 0.3)), n, 500).values
    np.testing.assert_array_equal(m, tsgen.gen_ma(MaParams((0.4, 0.3)), n, 500, standard_form=True).values)


def test_arma11_acf1():
    c = th = 0.5
    analytic = (1 + c * th) * (c + th) / (1 + th * th + 2 * c * th)
    assert abs(analytic - 1.25 / 1.75) < 1e-15
    rho1 = np.mean([estat.acf(tsgen.gen_arma(ArParams((c,)), MaParams((th,)), NoiseSpec(seed=s), L).values, 1)[1]
                    for s in range(20)])
    assert abs(rho1 - analytic) < 0.05


def test_arma_rejects_nonstationary():
    with pytest.raises(StationarityError):
        tsgen.gen_arma(ArParams((1.0,)), MaParams((0.5,)), NoiseSpec(), 100)


# ---- GARCH

def test_garch_constant_variance_is_white_noise():
    g = tsgen.gen_garch(GarchParams(1.0, (0.0,), (0.0,)), NoiseSpec(seed=6), 500)
    np.testing.assert_allclose(g.values, NoiseSpec(seed=6).draw(1000)[500:], atol=1e-15)
    np.testing.assert_array_equal(g.variance, np.ones(500))


def test_garch_recursion_against_loop():
    p = GarchParams(0.1, (0.2, 0.1), (0.15,))
    eps = NoiseSpec(seed=1).draw(60)
    z, h = [0.0, 0.0], [0.1]
    for l in range(60):
        hl = 0.1 + 0.2 * z[-1] ** 2 + 0.1 * z[-2] ** 2 + 0.15 * h[-1] ** 2
        h.append(hl)
        z.append(math.sqrt(hl) * eps[l])
    g = tsgen.gen_garch(p, NoiseSpec(seed=1), 20, burn_in=40)
    np.testing.assert_allclose(g.values, z[-20:], rtol=1e-13)
    np.testing.assert_allclose(g.variance, h[-20:], rtol=1e-13)


def test_garch_standard_form_uncorrelated_but_squares_correlated():
    # parameters with sum(beta) = 0.5 are only stable in the unsquared recursion
    p = GarchParams(0.1, (0.2, 0.1), (0.3, 0.2))
    acf_z, acf_z2 = [], []
    for s in range(20):
        z = tsgen.gen_garch(p, NoiseSpec(seed=s), L, standard_form=True).values
        acf_z.append(estat.acf(z, 10)[1:])
        acf_z2.append(estat.acf(z ** 2, 1)[1])
    assert np.all(np.abs(np.mean(acf_z, axis=0)) < BAND)
    assert np.mean(acf_z2) > BAND


def test_printed_garch_divergence_is_reported_with_step():
    p = GarchParams(0.1, (0.2, 0.1), (0.3, 0.2))
    failures = 0
    for s in range(40):
        try:
            tsgen.gen_garch(p, NoiseSpec(seed=s), L)
        except NumericalInstabilityError as exc:
            failures += 1
            assert "step" in str(exc)
    assert failures > 0


@settings(max_examples=30, deadline=None)
@given(a=st.lists(st.floats(0, 0.2), min_size=1, max_size=4),
       b=st.lists(st.floats(0, 0.05), min_size=0, max_size=3),
       seed=st.integers(0, 1000), standard=st.booleans())
def test_garch_variance_positive(a, b, seed, standard):
    assume(sum(a) + sum(b) < 1)
    try:
        g = tsgen.gen_garch(GarchParams(0.1, a, b), NoiseSpec(seed=seed), 300, 100, standard_form=standard)
    except NumericalInstabilityError:
        assume(False)
    assert np.all(g.variance > 0)


@pytest.mark.parametrize("kw", [
    dict(alpha0=0.0, alpha=(0.1,), beta=()),
    dict(alpha0=0.1, alpha=(-0.1,), beta=()),
    dict(alpha0=0.1, alpha=(0.6,), beta=(0.5,)),
])
def test_garch_constraints(kw):
    with pytest.raises(GarchConstraintError):
        GarchParams(**kw)


def test_garch_defaults_satisfy_constraints():
    for p, q in ((1, 1), (2, 2), (4, 4)):
        g = GarchParams.default(p, q)
        assert math.isclose(sum(g.alpha), 0.3) and math.isclose(sum(g.beta), 0.1)


# ---- noise and CSV

def test_noise_spec_validation():
    with pytest.raises(UserInputError):
        NoiseSpec(std=0.0)
    with pytest.raises(UserInputError):
        NoiseSpec(seed=-1)


def test_noise_mean_and_scale():
    d = NoiseSpec(mean=2.0, std=3.0, seed=0).draw(10)
    np.testing.assert_allclose(d, 2.0 + 3.0 * NoiseSpec(seed=0).draw(10))


def test_load_csv_simple(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("1.0\n2.0\n3.0")
    ts = tsgen.load_csv(f)
    np.testing.assert_array_equal(ts.values, [1.0, 2.0, 3.0])
    assert ts.origin is tsgen.Origin.CSV and ts.params["rows"] == 3


def test_load_csv_header_and_name(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("date,OT\n2020,1.5\n2021,2.5\n2022,3.5\n")
    np.testing.assert_array_equal(tsgen.load_csv(f, 1, skip_header=True).values, [1.5, 2.5, 3.5])
    np.testing.assert_array_equal(tsgen.load_csv(f, "OT").values, [1.5, 2.5, 3.5])
    np.testing.assert_array_equal(tsgen.load_csv(f, "OT", rows=(1, 3)).values, [2.5, 3.5])


def test_load_csv_delimiter(tmp_path):
    f = tmp_path / "s.tsv"
    f.write_text("a\t1\nb\t2\n")
    np.testing.assert_array_equal(tsgen.load_csv(f, 1, delimiter="\t").values, [1, 2])


def test_load_csv_parse_error_cites_row(tmp_path):
    f = tmp_path / "s.csv"
    lines = [f"{i}.0" for i in range(1, 31)]
    lines[16] = "abc"
    f.write_text("\n".join(lines))
    with pytest.raises(ParseError, match="row 17"):
        tsgen.load_csv(f)


def test_load_csv_errors(tmp_path):
    with pytest.raises(UserInputError):
        tsgen.load_csv(tmp_path / "missing.csv")
    f = tmp_path / "one.csv"
    f.write_text("1.0\n")
    with pytest.raises(InvalidLength):
        tsgen.load_csv(f)


def test_series_csv_round_trip(tmp_path):
    s = ar((0.8,), seed=2, length=50)
    f = tmp_path / "out.csv"
    tsgen.write_series_csv(f, s)
    assert f.read_bytes().startswith(b"value\r\n")
    np.testing.assert_array_equal(tsgen.load_csv(f, "value").values, s.values)
