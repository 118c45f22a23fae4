"""Integrands F(s, x), their bounds, quantization, and financial oracles.

An Integrand couples the payoff-style function F with the bound B and the
derivative-growth envelopes the estimation methods need.  The
Black-Scholes single-asset model provides the worked example: the greek
integrand discounts the payoff of the lognormal terminal price, so the
expectation over the standard-normal grid is the textbook option price
and the closed-form greeks serve as validation oracles.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .schedule import GevreySpec, n_th

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Integrand:
    """F(s, x) with bound B and optional smoothness declarations.

    eval_fn is vectorized over s (ndarray in, ndarray out) for a scalar x.
    f_gevrey bounds the x-derivatives of F(s, .) uniformly in s (the
    smooth-method requirement); v_gevrey bounds the derivatives of the
    expectation V alone (enough for the nonsmooth and sum-in-QAE methods).
    Either may be absent.
    """

    eval_fn: object
    bound: float
    label: str
    f_gevrey: GevreySpec = None
    v_gevrey: GevreySpec = None
    x_window: tuple = None

    def __post_init__(self):
        if not (self.bound > 0):
            raise ValueError("bound B must be positive")
        if self.x_window is not None:
            lo, hi = self.x_window
            if not (lo < hi):
                raise ValueError("x_window must be an increasing (lo, hi) pair")

    def eval(self, s, x):
        return self.eval_fn(s, x)

    def with_smoothness(self, f_gevrey=None, v_gevrey=None):
        return replace(
            self,
            f_gevrey=f_gevrey if f_gevrey is not None else self.f_gevrey,
            v_gevrey=v_gevrey if v_gevrey is not None else self.v_gevrey,
        )


@dataclass(frozen=True)
class QuantizedIntegrand:
    """base rounded to the nearest multiple of eps_q; error <= eps_q / 2."""

    base: Integrand
    eps_q: float

    def __post_init__(self):
        if not (self.eps_q > 0):
            raise ValueError("quantization step must be positive")

    def eval(self, s, x):
        return np.round(self.base.eval(s, x) / self.eps_q) * self.eps_q


@dataclass(frozen=True)
class BlackScholesModel:
    """Single-asset lognormal model with a call or digital payoff."""

    P0: float
    sigma: float
    r: float
    T: float
    K: float
    payoff: str = "call"

    def __post_init__(self):
        for name in ("P0", "sigma", "T", "K"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")
        if self.payoff not in ("call", "digital"):
            raise ValueError(f"payoff must be 'call' or 'digital', got {self.payoff!r}")


def bs_terminal_price(model, s):
    """Terminal price P0 * exp(sigma*sqrt(T)*s + (r - sigma^2/2)*T)."""
    drift = (model.r - 0.5 * model.sigma**2) * model.T
    return model.P0 * np.exp(model.sigma * math.sqrt(model.T) * s + drift)


def payoff_call(P, K):
    """(P - K)^+."""
    return np.maximum(np.asarray(P, dtype=float) - K, 0.0)


def payoff_digital(P, K):
    """1 if P >= K else 0."""
    return np.where(np.asarray(P, dtype=float) >= K, 1.0, 0.0)


_PAYOFFS = {"call": payoff_call, "digital": payoff_digital}
GREEK_PARAMETERS = ("P0", "sigma", "r")


def _model_with(model, parameter, x):
    return replace(model, **{parameter: x})


def make_greek_integrand(model, parameter, x_window=None, s_bound=6.0,
                         b_override=None):
    """Integrand for d^m/dx^m of the discounted expected payoff.

    F(s, x) = exp(-r*T) * payoff(terminal price) with the chosen model
    parameter replaced by x (the discount rate follows x when
    parameter='r').  The bound B is the exact corner maximum over
    s = +-s_bound and the x-window endpoints for the call payoff, and
    exactly 1 for the digital payoff (which requires a nonnegative
    discount rate over the window).  b_override replaces the computed
    bound; the caller then owns the |F| <= B guarantee (runtime range
    checks still catch violations).

    Smoothness declarations are not attached here; see calibrate_gevrey.
    """
    if parameter not in GREEK_PARAMETERS:
        raise ValueError(f"parameter must be one of {GREEK_PARAMETERS}, got {parameter!r}")
    if b_override is not None and b_override <= 0:
        raise ValueError("b_override must be positive")
    payoff_fn = _PAYOFFS[model.payoff]

    def eval_fn(s, x):
        mod = _model_with(model, parameter, x)
        price = bs_terminal_price(mod, np.asarray(s, dtype=float))
        return math.exp(-mod.r * mod.T) * payoff_fn(price, mod.K)

    if model.payoff == "digital":
        rates = [model.r] if parameter != "r" else []
        if parameter == "r":
            if x_window is None:
                raise ValueError("parameter 'r' needs an x_window to pin the discount range")
            rates = list(x_window)
        if min(rates) < 0:
            raise ValueError(
                "digital bound B=1 requires a nonnegative discount rate over the window"
            )
        B = 1.0
    else:
        if x_window is None:
            raise ValueError(
                "call payoff needs an x_window; its supremum is unbounded otherwise"
            )
        lo, hi = float(x_window[0]), float(x_window[1])
        corners = [float(eval_fn(np.array([sc]), xc)[0])
                   for sc in (-s_bound, s_bound) for xc in (lo, hi)]
        B = max(corners)
        if B <= 0:
            # Payoff never in the money on the window corners; keep B valid.
            B = 1e-300
    if b_override is not None:
        B = float(b_override)
    return Integrand(
        eval_fn=eval_fn,
        bound=B,
        label=f"bs-{model.payoff}-{parameter}",
        x_window=None if x_window is None else (float(x_window[0]), float(x_window[1])),
    )


def _d1_d2(model):
    sig_sqrt = model.sigma * math.sqrt(model.T)
    d1 = (math.log(model.P0 / model.K) + (model.r + 0.5 * model.sigma**2) * model.T) / sig_sqrt
    return d1, d1 - sig_sqrt


def _phi(z):
    return math.exp(-0.5 * z * z) / SQRT_2PI


def analytic_greek(model, parameter, m):
    """Closed-form sensitivity of the discounted price, independent of the
    estimation pipeline.

    Supported (parameter, m): (P0, 1) delta, (P0, 2) gamma, (sigma, 1)
    vega, (r, 1) rho, for both payoffs.
    """
    d1, d2 = _d1_d2(model)
    disc = math.exp(-model.r * model.T)
    sqT = math.sqrt(model.T)
    pair = (parameter, m)
    if model.payoff == "call":
        if pair == ("P0", 1):
            return ndtr(d1)
        if pair == ("P0", 2):
            return _phi(d1) / (model.P0 * model.sigma * sqT)
        if pair == ("sigma", 1):
            return model.P0 * _phi(d1) * sqT
        if pair == ("r", 1):
            return model.K * model.T * disc * ndtr(d2)
    else:
        if pair == ("P0", 1):
            return disc * _phi(d2) / (model.P0 * model.sigma * sqT)
        if pair == ("P0", 2):
            return -disc * _phi(d2) * d1 / (model.P0**2 * model.sigma**2 * model.T)
        if pair == ("sigma", 1):
            return -disc * _phi(d2) * d1 / model.sigma
        if pair == ("r", 1):
            return -model.T * disc * ndtr(d2) + disc * _phi(d2) * sqT / model.sigma
    raise ValueError(f"unsupported (parameter, m) pair {pair!r}")


def bs_price(model):
    """Discounted value of the configured payoff (the V the greeks differentiate)."""
    d1, d2 = _d1_d2(model)
    disc = math.exp(-model.r * model.T)
    if model.payoff == "call":
        return model.P0 * ndtr(d1) - model.K * disc * ndtr(d2)
    return disc * ndtr(d2)


def _stirling_first_rows(k_max):
    """Signed Stirling numbers of the first kind, rows 0..k_max, exact ints."""
    rows = [[1]]
    for k in range(1, k_max + 1):
        prev = rows[-1]
        row = [0] * (k + 1)
        for j in range(1, k + 1):
            above = prev[j] if j < len(prev) else 0
            row[j] = prev[j - 1] - (k - 1) * above
        rows.append(row)
    return rows


def bs_value_derivatives(model, xs, k_max):
    """Exact derivatives d^k/dP0^k of the discounted price, k = 0..k_max.

    Uses the substitution u = ln P0: the chain rule turns d/dP0 into a
    Stirling-first-kind combination of d/du, and d/du acts on Phi(a*u + b)
    through Hermite-polynomial derivatives of the normal density.  Returns
    an array of shape (k_max + 1, len(xs)).
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("spot values must be positive")
    a = 1.0 / (model.sigma * math.sqrt(model.T))
    b2 = a * (math.log(1.0 / model.K) + (model.r - 0.5 * model.sigma**2) * model.T)
    b1 = b2 + model.sigma * math.sqrt(model.T)
    disc = math.exp(-model.r * model.T)
    u = np.log(xs)

    def phi_derivs(z, count):
        # out[i] = phi^(i)(z) = (-1)^i He_i(z) phi(z)
        phi = np.exp(-0.5 * z * z) / SQRT_2PI
        out = np.empty((count + 1, z.size))
        he_prev = np.ones_like(z)  # He_0
        he = z.copy()  # He_1
        out[0] = phi
        for i in range(1, count + 1):
            out[i] = he * phi if i % 2 == 0 else -he * phi
            he_prev, he = he, z * he - i * he_prev
        return out

    # G(u) = V(e^u); build G^(j) for j = 0..k_max.
    G = np.empty((k_max + 1, xs.size))
    if model.payoff == "digital":
        z2 = a * u + b2
        pd2 = phi_derivs(z2, max(k_max - 1, 0))
        G[0] = disc * ndtr(z2)
        for j in range(1, k_max + 1):
            G[j] = disc * a**j * pd2[j - 1]
    else:
        z1, z2 = a * u + b1, a * u + b2
        pd1 = phi_derivs(z1, max(k_max - 1, 0))
        pd2 = phi_derivs(z2, max(k_max - 1, 0))
        Phi1 = ndtr(z1)
        eu = np.exp(u)
        G[0] = eu * Phi1 - model.K * disc * ndtr(z2)
        for j in range(1, k_max + 1):
            acc = Phi1.copy()
            for i in range(1, j + 1):
                acc += math.comb(j, i) * a**i * pd1[i - 1]
            G[j] = eu * acc - model.K * disc * a**j * pd2[j - 1]

    stirling = _stirling_first_rows(k_max)
    out = np.empty_like(G)
    out[0] = G[0]
    for k in range(1, k_max + 1):
        acc = np.zeros(xs.size)
        for j in range(1, k + 1):
            sk = stirling[k][j]
            if sk:
                acc += float(sk) * G[j]
        out[k] = acc / xs**k
    return out


@dataclass(frozen=True)
class GevreyCalibration:
    """Fit result: the envelope plus everything needed to reproduce it."""

    spec: GevreySpec
    k_max: int
    headroom: float
    sup_value: float
    x_window: tuple
    scan_points: int


def calibrate_gevrey(model, parameter, x_window, m, eps,
                     headroom=2.0, scan_points=257, deriv_floor=0.0):
    """Fit a sigma=0 envelope A*c^k to the price derivatives on a window.

    A is headroom * sup|V|; c is the smallest rate with sup|V^(k)| <=
    A*c^k for all k up to k_max, where k_max is grown until it covers
    2*n_th + 1 for the schedule the fit itself induces (the truncation
    residual consumes exactly that order).  deriv_floor, when positive,
    additionally forces A*c^m >= deriv_floor; the smooth method needs the
    envelope to dominate the per-sample m-th derivative of F, not just
    V's (used for the call payoff, whose kink makes F's declaration a
    supremum of one-sided slopes).

    Only parameter='P0' has the exact derivative engine; supply a
    GevreySpec by hand for other parameters.
    """
    if parameter != "P0":
        raise NotImplementedError(
            "exact derivative scan only implemented for parameter 'P0'"
        )
    lo, hi = float(x_window[0]), float(x_window[1])
    if not (0 < lo < hi):
        raise ValueError("x_window must satisfy 0 < lo < hi")
    xs = np.linspace(lo, hi, scan_points)
    k_max = max(9, 2 * math.ceil(m / 2) + 3)
    for _ in range(12):
        table = bs_value_derivatives(model, xs, k_max)
        sups = np.max(np.abs(table), axis=1)
        A = headroom * float(sups[0])
        if A <= 0:
            raise ValueError("price vanishes on the window; nothing to calibrate")
        c = max(float((sups[k] / A) ** (1.0 / k)) for k in range(1, k_max + 1))
        if deriv_floor > 0:
            c = max(c, (deriv_floor / A) ** (1.0 / m))
        spec = GevreySpec(A=A, c=c, sigma=0.0)
        need = 2 * n_th(spec, m, eps) + 1
        if need <= k_max:
            return GevreyCalibration(
                spec=spec, k_max=k_max, headroom=headroom,
                sup_value=float(sups[0]), x_window=(lo, hi),
                scan_points=scan_points,
            )
        k_max = need + 2
    raise RuntimeError("calibration failed to stabilize; window or eps too extreme")


def call_slope_bound(model, s_bound=6.0):
    """sup over |s| <= s_bound and x of |d/dx F(s, x)| for the call greek
    integrand with parameter='P0' (the discounted terminal price per unit
    spot, maximal at s = +s_bound)."""
    drift = (model.r - 0.5 * model.sigma**2) * model.T
    growth = math.exp(model.sigma * math.sqrt(model.T) * s_bound + drift)
    return math.exp(-model.r * model.T) * growth


def make_sine_integrand(amplitude=1.0, frequency=1.0):
    """Test integrand F(s, x) = amplitude * sin(frequency * x), constant in s.

    A globally smooth model with the exact envelope A=amplitude,
    c=frequency, sigma=0, and derivative oracle sine_derivative.
    """
    if amplitude <= 0 or frequency <= 0:
        raise ValueError("amplitude and frequency must be positive")

    def eval_fn(s, x):
        return np.full_like(np.asarray(s, dtype=float),
                            amplitude * math.sin(frequency * x))

    g = GevreySpec(A=amplitude, c=frequency, sigma=0.0)
    return Integrand(
        eval_fn=eval_fn,
        bound=amplitude,
        label="sine",
        f_gevrey=g,
        v_gevrey=g,
    )


def sine_derivative(amplitude, frequency, m, x):
    """m-th derivative of amplitude * sin(frequency * x)."""
    return amplitude * frequency**m * math.sin(frequency * x + m * math.pi / 2.0)
