"""Test martingales, discrete quadratic variation and the DDS time change."""

import math

import numpy as np
import pytest

from rwcalc import (
    BeyondTotalQV,
    MartingaleSpec,
    OutOfHorizon,
    PiecewisePath,
    QuadraticVariation,
    catalog,
    discrete_local_time,
    discrete_qv,
    eval_local_time,
    ito_sum_m,
    martingale_local_time,
    martingale_stopping,
    qv_report,
    realize_martingale,
    skorohod_embed,
    time_change_residual,
)
from rwcalc.martingale import parse_volatility


@pytest.fixture(scope="module")
def scaled4():
    spec = MartingaleSpec("scaled", c=4.0, fine_level=9, horizon=1.0)
    return spec, realize_martingale(spec, 17)


@pytest.fixture(scope="module")
def vol():
    breaks, values = parse_volatility("0:1,0.5:2")
    spec = MartingaleSpec("vol", breaks=breaks, values=values, fine_level=9, horizon=1.0)
    return spec, realize_martingale(spec, 23)


def test_parse_volatility():
    assert parse_volatility("0:1,0.5:2") == ((0.0, 0.5), (1.0, 2.0))


def test_spec_validation():
    with pytest.raises(ValueError):
        MartingaleSpec("other")
    with pytest.raises(ValueError):
        MartingaleSpec("scaled", c=0.0)
    with pytest.raises(ValueError):
        MartingaleSpec("vol", breaks=(0.1,), values=(1.0,))
    with pytest.raises(ValueError):
        MartingaleSpec("vol", breaks=(0.0, 0.5, 0.4), values=(1.0, 1.0, 1.0))


def test_unit_scale_is_the_brownian_path():
    spec = MartingaleSpec("scaled", c=1.0, fine_level=7)
    mart = realize_martingale(spec, 5)
    fine = mart.walks[-1]
    np.testing.assert_array_equal(mart.path.values, fine.values())
    assert mart.qv(0.3) == 0.3


def test_scaled_qv(scaled4):
    _, mart = scaled4
    assert mart.qv(1.0) == 4.0
    assert mart.qv.total == 4.0
    assert mart.qv.inverse(2.0) == 0.5


def test_zero_volatility():
    spec = MartingaleSpec("vol", breaks=(0.0,), values=(0.0,), fine_level=6)
    mart = realize_martingale(spec, 1)
    assert np.all(mart.path.values == mart.path.values[0])
    assert mart.qv(1.0) == 0.0
    walk = martingale_stopping(mart, 3)
    assert walk.stop_times.entries.tolist() == [0.0] and not walk.complete
    lt = martingale_local_time(mart, 3, 1.0)
    assert lt(1.0, 0.0) == 0.0 and lt(1.0, 0.0, "down") == 0.0


def test_qv_inverse_piecewise():
    qv = QuadraticVariation((0.0, 0.5, 0.7), (1.0, 0.0, 4.0), 1.0)
    assert qv.total == pytest.approx(0.5 + 0.0 + 4 * 0.3)
    s = np.array([0.0, 0.25, 0.5, 0.9, 1.7])
    T = qv.inverse(s)
    np.testing.assert_allclose(qv(T), s)
    assert qv.inverse(0.5) == 0.5
    assert np.all(np.diff(qv.inverse(np.linspace(0, 1.7, 50))) >= 0)
    with pytest.raises(BeyondTotalQV):
        qv.inverse(2.0)
    assert QuadraticVariation((0.0,), (1.0,), 1.0).inverse(0.3) == 0.3
    assert QuadraticVariation((0.0,), (4.0,), 1.0).inverse(2.0) == 0.5


def test_scaled_stopping_times(scaled4):
    _, mart = scaled4
    tau = mart.embedded(4)
    s = mart.dds_embedded(4)
    np.testing.assert_array_equal(tau.positions, s.positions)
    np.testing.assert_allclose(tau.stop_times.entries, s.stop_times.entries / 4)
    slow = skorohod_embed(mart.path, 4)
    k = tau.n_steps + 1
    np.testing.assert_array_equal(slow.positions[:k], tau.positions)
    np.testing.assert_allclose(slow.stop_times.entries[:k], tau.stop_times.entries, atol=1e-14)


def test_deterministic_linear_path():
    path = PiecewisePath([0.0, 1.0], [0.0, 1.0])
    for m in (2, 5, 8):
        assert discrete_qv(path, m, 1.0) == 2.0 ** (-2 * m) * math.floor(2 ** m)
        t = np.array([0.1, 0.37, 0.999])
        np.testing.assert_array_equal(discrete_qv(path, m, t), 4.0 ** -m * np.floor(t * 2 ** m))


def test_discrete_qv_steps(scaled4):
    _, mart = scaled4
    t = np.linspace(0, 1, 400)
    N = discrete_qv(mart, 5, t)
    steps = np.diff(N)
    assert np.all(steps >= 0)
    assert np.allclose(np.unique(discrete_qv(mart, 5, mart.embedded(5).stop_times.entries[:50]) * 4 ** 5),
                       np.arange(50))
    with pytest.raises(OutOfHorizon):
        discrete_qv(mart, 5, -1.0)


def test_scaled_qv_close_to_four(scaled4):
    _, mart = scaled4
    m = 6
    assert abs(discrete_qv(mart, m, 1.0) - 4.0) <= m * math.sqrt(m) * 2.0 ** -m * 4


def test_qv_report_is_exact_sup(vol):
    _, mart = vol
    report = qv_report(mart, 4, mart.qv, 1.0)
    t = np.linspace(0, 1, 20001)
    brute = np.max(np.abs(discrete_qv(mart, 4, t) - mart.qv(t)))
    assert brute <= report.sup_deviation + 1e-12
    assert report.sup_deviation - brute < 0.01


def test_dds_reconstruction(vol):
    _, mart = vol
    t = mart.path.times
    np.testing.assert_allclose(mart.dds_path(mart.qv(t)), mart.path(t), atol=2.0 ** (1 - 9))


def test_ito_sum_m_closed_forms(vol):
    _, mart = vol
    m = 4
    walk = martingale_stopping(mart, m)
    for t in (0.0, 0.3, 1.0):
        n = int(np.searchsorted(walk.stop_times.entries, t, side="right")) - 1
        end, start = walk.values()[n], walk.values()[0]
        assert ito_sum_m(catalog("const", 1.0), mart, m, t) == pytest.approx(end - start, abs=1e-14)
        expected = (end ** 2 - start ** 2 - discrete_qv(mart, m, t)) / 2
        assert ito_sum_m(catalog("identity"), mart, m, t) == pytest.approx(expected, abs=1e-14)


def test_time_change_unit_scale_is_zero():
    spec = MartingaleSpec("scaled", c=1.0, fine_level=8)
    for seed in range(3):
        assert time_change_residual(catalog("identity"), spec, 5, 1.0, seed) == 0.0


def test_time_change_constant_integrand(scaled4):
    spec, mart = scaled4
    for m in (3, 5):
        r = time_change_residual(catalog("const", 1.0), spec, m, 1.0, 17, mart)
        assert abs(r) <= 2 * 2.0 ** -m


def test_time_change_requires_fine_level(scaled4):
    spec, mart = scaled4
    with pytest.raises(ValueError):
        time_change_residual(catalog("identity"), spec, 8, 1.0, 17, mart)
    with pytest.raises(OutOfHorizon):
        time_change_residual(catalog("identity"), spec, 4, 2.0, 17, mart)


def test_martingale_local_time_unit_scale():
    spec = MartingaleSpec("scaled", c=1.0, fine_level=8)
    mart = realize_martingale(spec, 4)
    lt = martingale_local_time(mart, 4, 1.0)
    walk = skorohod_embed(mart.path, 4)
    field = discrete_local_time(walk, "up")
    t, x = np.meshgrid(np.linspace(0, 1, 9), np.arange(-8, 9) / 16)
    np.testing.assert_array_equal(lt(t, x), eval_local_time(field, t, x))
    with pytest.raises(ValueError):
        martingale_local_time(mart.path, 4, 1.0)
    with pytest.raises(OutOfHorizon):
        martingale_local_time(mart, 4, 3.0)
