"""Payoff integrands and Black-Scholes reference values, with an independent
high-precision oracle for the derivative engine."""

import math

import mpmath as mp
import numpy as np
import pytest

from qnumdiff.distribution import discretize_standard_normal, expectation
from qnumdiff.integrand import (
    BlackScholesModel,
    GevreyCalibration,
    Integrand,
    QuantizedIntegrand,
    analytic_greek,
    bs_price,
    bs_terminal_price,
    bs_value_derivatives,
    calibrate_gevrey,
    call_slope_bound,
    make_greek_integrand,
    make_sine_integrand,
    payoff_call,
    payoff_digital,
    sine_derivative,
)
from qnumdiff.schedule import GevreySpec
from qnumdiff.stencil import StencilKey, apply_stencil, compute_stencil

MODEL_CALL = BlackScholesModel(P0=100, sigma=0.2, r=0.05, T=1.0, K=100, payoff="call")
MODEL_DIGITAL = BlackScholesModel(P0=100, sigma=0.2, r=0.05, T=1.0, K=100, payoff="digital")


def mp_bs_price(payoff, P0, sigma, r, T, K):
    """Independent discounted-price oracle in 50-digit arithmetic."""
    sig = sigma * mp.sqrt(T)
    d1 = (mp.log(P0 / K) + (r + sigma**2 / 2) * T) / sig
    d2 = d1 - sig
    disc = mp.e ** (-r * T)
    if payoff == "call":
        return P0 * mp.ncdf(d1) - K * disc * mp.ncdf(d2)
    return disc * mp.ncdf(d2)


@pytest.fixture(scope="module", autouse=True)
def _high_precision():
    old = mp.mp.dps
    mp.mp.dps = 50
    yield
    mp.mp.dps = old


def test_terminal_price_values():
    got = bs_terminal_price(MODEL_CALL, 1.0)
    assert got == pytest.approx(100 * math.exp(0.23), rel=1e-14)
    flat = BlackScholesModel(P0=100, sigma=0.2, r=0.02, T=1.0, K=100)
    assert bs_terminal_price(flat, 0.0) == pytest.approx(100.0, rel=1e-14)
    tiny = BlackScholesModel(P0=100, sigma=1e-12, r=0.05, T=1.0, K=100)
    assert bs_terminal_price(tiny, 1.0) == pytest.approx(100 * math.exp(0.05), rel=1e-9)


def test_payoff_values():
    assert payoff_call(120.0, 100.0) == 20.0
    assert payoff_call(80.0, 100.0) == 0.0
    assert payoff_digital(120.0, 100.0) == 1.0
    assert payoff_digital(99.99, 100.0) == 0.0
    assert payoff_digital(100.0, 100.0) == 1.0
    assert np.array_equal(payoff_call([90.0, 110.0], 100.0), [0.0, 10.0])


def test_model_validation():
    with pytest.raises(ValueError):
        BlackScholesModel(P0=-1, sigma=0.2, r=0.05, T=1, K=100)
    with pytest.raises(ValueError):
        BlackScholesModel(P0=100, sigma=0.2, r=0.05, T=1, K=100, payoff="put")


def test_digital_bound_is_exactly_one():
    integrand = make_greek_integrand(MODEL_DIGITAL, "P0")
    assert integrand.bound == 1.0
    s = np.linspace(-6, 6, 101)
    vals = integrand.eval(s, 100.0)
    assert np.all(np.abs(vals) <= 1.0)


def test_digital_bound_rejects_negative_rate():
    neg = BlackScholesModel(P0=100, sigma=0.2, r=-0.01, T=1, K=100, payoff="digital")
    with pytest.raises(ValueError):
        make_greek_integrand(neg, "P0")
    with pytest.raises(ValueError):
        make_greek_integrand(MODEL_DIGITAL, "r", x_window=(-0.02, 0.1))


def test_call_bound_is_discounted_corner_maximum():
    integrand = make_greek_integrand(MODEL_CALL, "P0", x_window=(50.0, 150.0))
    top = bs_terminal_price(
        BlackScholesModel(P0=150, sigma=0.2, r=0.05, T=1, K=100), 6.0
    )
    expected = math.exp(-0.05) * (top - 100.0)
    assert integrand.bound == pytest.approx(expected, rel=1e-14)
    assert float(integrand.eval(np.array([6.0]), 150.0)[0]) == pytest.approx(
        integrand.bound, rel=1e-14
    )


def test_call_bound_requires_window():
    with pytest.raises(ValueError):
        make_greek_integrand(MODEL_CALL, "P0")
    with pytest.raises(ValueError):
        make_greek_integrand(MODEL_CALL, "K")


def test_call_out_of_money_window_keeps_positive_bound():
    integrand = make_greek_integrand(MODEL_CALL, "P0", x_window=(1e-8, 1e-7))
    assert integrand.bound > 0


def test_b_override_replaces_bound():
    integrand = make_greek_integrand(
        MODEL_CALL, "P0", x_window=(50.0, 150.0), b_override=500.0
    )
    assert integrand.bound == 500.0
    with pytest.raises(ValueError):
        make_greek_integrand(MODEL_CALL, "P0", x_window=(50.0, 150.0), b_override=-1.0)


def test_call_eval_monotone_in_spot():
    integrand = make_greek_integrand(MODEL_CALL, "P0", x_window=(50.0, 150.0))
    s = np.array([-1.0, 0.0, 2.0])
    prev = integrand.eval(s, 50.0)
    for x in np.linspace(55.0, 150.0, 20):
        cur = integrand.eval(s, x)
        assert np.all(cur >= prev)
        prev = cur


FROZEN_GREEKS = {
    ("call", "P0", 1): 0.6368306511756191,
    ("call", "P0", 2): 0.018762017345846895,
    ("call", "sigma", 1): 37.52403469169379,
    ("call", "r", 1): 53.232481545376345,
    ("digital", "P0", 1): 0.018762017345846895,
    ("digital", "P0", 2): -0.00032833530355232067,
    ("digital", "sigma", 1): -0.6566706071046414,
    ("digital", "r", 1): 1.343876919130926,
}


@pytest.mark.parametrize("payoff,parameter,m", sorted(FROZEN_GREEKS))
def test_analytic_greek_frozen_values(payoff, parameter, m):
    model = MODEL_CALL if payoff == "call" else MODEL_DIGITAL
    assert analytic_greek(model, parameter, m) == pytest.approx(
        FROZEN_GREEKS[(payoff, parameter, m)], rel=1e-12
    )


@pytest.mark.parametrize("payoff,parameter,m", sorted(FROZEN_GREEKS))
def test_analytic_greek_matches_mpmath(payoff, parameter, m):
    model = MODEL_CALL if payoff == "call" else MODEL_DIGITAL
    args = {"P0": mp.mpf(100), "sigma": mp.mpf("0.2"), "r": mp.mpf("0.05")}

    def price(v):
        a = dict(args)
        a[parameter] = v
        return mp_bs_price(payoff, a["P0"], a["sigma"], a["r"], 1, 100)

    ref = mp.diff(price, args[parameter], m)
    assert analytic_greek(model, parameter, m) == pytest.approx(
        float(ref), rel=1e-10
    )


def test_deep_in_the_money_delta_saturates():
    deep = BlackScholesModel(P0=1e6, sigma=0.2, r=0.05, T=1, K=100)
    assert analytic_greek(deep, "P0", 1) == pytest.approx(1.0, abs=1e-12)


def test_analytic_greek_rejects_unsupported_order():
    with pytest.raises(ValueError):
        analytic_greek(MODEL_CALL, "P0", 3)


def test_bs_price_matches_mpmath():
    for model in (MODEL_CALL, MODEL_DIGITAL):
        ref = mp_bs_price(model.payoff, mp.mpf(100), mp.mpf("0.2"), mp.mpf("0.05"), 1, 100)
        assert bs_price(model) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("payoff", ["call", "digital"])
def test_value_derivatives_match_mpmath(payoff):
    model = MODEL_CALL if payoff == "call" else MODEL_DIGITAL
    xs = np.array([70.0, 100.0, 130.0])
    table = bs_value_derivatives(model, xs, 4)
    for k in range(5):
        for i, x in enumerate(xs):
            ref = float(
                mp.diff(
                    lambda p: mp_bs_price(payoff, p, mp.mpf("0.2"), mp.mpf("0.05"), 1, 100),
                    mp.mpf(x),
                    k,
                )
            )
            assert table[k, i] == pytest.approx(ref, rel=1e-8, abs=1e-20)


def test_value_derivatives_reject_nonpositive_spot():
    with pytest.raises(ValueError):
        bs_value_derivatives(MODEL_CALL, np.array([-1.0, 100.0]), 2)


def test_quantized_eval_error_and_grid():
    integrand = make_greek_integrand(MODEL_CALL, "P0", x_window=(50.0, 150.0))
    eps_q = 1e-3
    quantized = QuantizedIntegrand(integrand, eps_q)
    rng = np.random.default_rng(20260817)
    s = rng.uniform(-6, 6, size=100000)
    x = rng.uniform(50, 150)
    exact = integrand.eval(s, x)
    rounded = quantized.eval(s, x)
    assert np.max(np.abs(rounded - exact)) <= eps_q / 2 + 1e-15
    multiples = rounded / eps_q
    assert np.max(np.abs(multiples - np.round(multiples))) < 1e-6
    with pytest.raises(ValueError):
        QuantizedIntegrand(integrand, 0.0)


@pytest.mark.parametrize(
    "payoff,m,n,h,tol",
    [("call", 1, 2, 1.0, 1e-3), ("call", 2, 2, 2.0, 1e-3)],
)
def test_stencil_of_expectation_matches_greek(payoff, m, n, h, tol):
    """Classical pipeline end to end: discretize, take expectations, apply
    the exact stencil, compare with the closed form."""
    model = MODEL_CALL if payoff == "call" else MODEL_DIGITAL
    integrand = make_greek_integrand(model, "P0", x_window=(50.0, 150.0))
    dist = discretize_standard_normal(levels=12)
    st = compute_stencil(StencilKey(m, n))
    samples = {
        j: expectation(dist, lambda s: float(integrand.eval(np.asarray([s]), 100.0 + j * h)[0]))
        for j in st.nonzero_offsets()
    }
    est = apply_stencil(st, samples, h)
    ref = analytic_greek(model, "P0", m)
    assert abs(est - ref) / abs(ref) < tol


def test_calibration_envelope_dominates_derivatives():
    cal = calibrate_gevrey(MODEL_DIGITAL, "P0", (70.0, 130.0), m=1, eps=1e-3)
    assert isinstance(cal, GevreyCalibration)
    assert cal.spec.sigma == 0.0
    assert cal.spec.A == pytest.approx(cal.headroom * cal.sup_value, rel=1e-12)
    xs = np.linspace(*cal.x_window, cal.scan_points)
    table = bs_value_derivatives(MODEL_DIGITAL, xs, cal.k_max)
    sups = np.max(np.abs(table), axis=1)
    for k in range(1, cal.k_max + 1):
        assert sups[k] <= cal.spec.A * cal.spec.c**k * (1 + 1e-9)


def test_calibration_deriv_floor():
    floor = call_slope_bound(MODEL_CALL)
    cal = calibrate_gevrey(
        MODEL_CALL, "P0", (50.0, 150.0), m=1, eps=1e-2, deriv_floor=floor
    )
    assert cal.spec.A * cal.spec.c >= floor * (1 - 1e-12)


def test_calibration_input_validation():
    with pytest.raises(NotImplementedError):
        calibrate_gevrey(MODEL_CALL, "sigma", (0.1, 0.3), m=1, eps=1e-2)
    with pytest.raises(ValueError):
        calibrate_gevrey(MODEL_CALL, "P0", (-5.0, 130.0), m=1, eps=1e-2)
    with pytest.raises(ValueError):
        calibrate_gevrey(MODEL_CALL, "P0", (130.0, 70.0), m=1, eps=1e-2)


def test_call_slope_bound_formula():
    expected = math.exp(-0.05) * math.exp(0.2 * 6.0 + 0.05 - 0.5 * 0.04)
    assert call_slope_bound(MODEL_CALL) == pytest.approx(expected, rel=1e-14)
    # Equals the discounted terminal price per unit spot at the corner.
    unit = BlackScholesModel(P0=1.0, sigma=0.2, r=0.05, T=1.0, K=100)
    assert call_slope_bound(MODEL_CALL) == pytest.approx(
        math.exp(-0.05) * bs_terminal_price(unit, 6.0), rel=1e-14
    )


def test_sine_integrand_constant_in_sample():
    integrand = make_sine_integrand(amplitude=2.0, frequency=3.0)
    s = np.linspace(-4, 4, 9)
    vals = integrand.eval(s, 0.7)
    assert np.all(vals == vals[0])
    assert vals[0] == pytest.approx(2.0 * math.sin(3.0 * 0.7), rel=1e-14)
    assert integrand.bound == 2.0
    assert integrand.f_gevrey == GevreySpec(A=2.0, c=3.0, sigma=0.0)
    assert integrand.v_gevrey == integrand.f_gevrey
    with pytest.raises(ValueError):
        make_sine_integrand(amplitude=0.0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_sine_derivative_matches_mpmath(m):
    ref = mp.diff(lambda x: 2 * mp.sin(3 * x), mp.mpf("0.7"), m)
    assert sine_derivative(2.0, 3.0, m, 0.7) == pytest.approx(float(ref), rel=1e-10)


def test_integrand_smoothness_attachment():
    base = make_greek_integrand(MODEL_DIGITAL, "P0")
    assert base.f_gevrey is None and base.v_gevrey is None
    g = GevreySpec(A=2.0, c=0.2, sigma=0.0)
    tagged = base.with_smoothness(v_gevrey=g)
    assert tagged.v_gevrey == g
    assert tagged.f_gevrey is None
    assert tagged.eval_fn is base.eval_fn
    with pytest.raises(ValueError):
        Integrand(eval_fn=lambda s, x: s, bound=-1.0, label="bad")
    with pytest.raises(ValueError):
        Integrand(eval_fn=lambda s, x: s, bound=1.0, label="bad", x_window=(2.0, 1.0))
