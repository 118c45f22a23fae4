"""Smoothness-driven parameter schedules for stencil differentiation.

Given a Gevrey-type derivative growth bound |f^(k)| <= A*c^k*(k!)^sigma,
these functions derive the stencil half-width and step that push the
truncation residual below a target accuracy, plus the precision budget
for a finite-precision integrand oracle.  Heavy factorial expressions are
evaluated in log-domain.
"""

import math
import sys
from dataclasses import dataclass

LN2 = math.log(2.0)

# check_h_condition tolerates this much relative slack in log-domain, so
# the minimal-step construction (which meets the bound with equality)
# passes under float rounding.
_H_CONDITION_RELTOL = 1e-9

# Largest float exponent we allow out of log-domain evaluation before
# declaring the quantity out of range.
_LOG_OVERFLOW = math.log(math.sqrt(sys.float_info.max))


class ScheduleRangeError(OverflowError):
    """A schedule quantity left the representable floating-point range."""


class SchedulePreconditionError(ValueError):
    """A schedule formula was asked for outside its validity region."""


@dataclass(frozen=True)
class GevreySpec:
    """Derivative growth envelope |f^(k)| <= A * c^k * (k!)^sigma."""

    A: float
    c: float
    sigma: float = 0.0

    def __post_init__(self):
        if not (self.A > 0):
            raise ValueError(f"scale A must be positive, got {self.A}")
        if not (self.c > 0):
            raise ValueError(f"rate c must be positive, got {self.c}")

    @property
    def sigma_plus(self):
        return max(self.sigma, 0.0)


def gevrey_deriv_bound(g, k):
    """A * c^k * (k!)^sigma, evaluated in log-domain.

    Raises ScheduleRangeError instead of silently returning inf when the
    value overflows float range.
    """
    if k < 0:
        raise ValueError("derivative order k must be nonnegative")
    logv = math.log(g.A) + k * math.log(g.c) + g.sigma * math.lgamma(k + 1)
    if logv > _LOG_OVERFLOW:
        raise ScheduleRangeError(
            f"derivative bound exceeds float range (log value {logv:.6g})"
        )
    return math.exp(logv)


def eps_prime(g, m, eps):
    """Normalized accuracy e * eps / (2 * (e*c*m)^m * A)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.e * eps / (2.0 * (math.e * g.c * m) ** m * g.A)


def eps_condition_bound(g, m):
    """Largest eps_prime the half-width formula supports.

    Two branches: 2^(t - (t/ln2)^2) for t = m*sigma_plus >= ln 2, else
    2^(t-1).
    """
    t = m * g.sigma_plus
    if t >= LN2:
        return 2.0 ** (t - (t / LN2) ** 2)
    return 2.0 ** (t - 1.0)


def check_eps_condition(g, m, eps_prime_value):
    """True iff the normalized accuracy is small enough for n_th's formula."""
    return eps_prime_value <= eps_condition_bound(g, m)


def n_th(g, m, eps):
    """Threshold half-width: smallest n the schedule certifies for eps.

    Clamped below by ceil(m/2) so the m <= 2n stencil precondition can
    never be violated for loose eps.
    """
    ep = eps_prime(g, m, eps)
    bound = eps_condition_bound(g, m)
    if ep > bound:
        raise SchedulePreconditionError(
            f"eps too loose for the half-width formula: normalized accuracy "
            f"{ep:.6g} exceeds the supported bound {bound:.6g}"
        )
    t = m * g.sigma_plus
    inner = t - math.log2(ep)
    if inner <= 0:
        raise SchedulePreconditionError(
            f"normalized accuracy {ep:.6g} must lie below 2^(m*sigma_plus) = {2.0**t:.6g}"
        )
    raw = 0.5 * (inner + math.log2(inner) - 0.5)
    return max(math.ceil(m / 2), math.ceil(raw))


def h_th(g, m, n):
    """Threshold step 1 / (e*c*m*(2n+1)^sigma_plus)."""
    if n < math.ceil(m / 2):
        raise ValueError(f"half-width n={n} below ceil(m/2)={math.ceil(m / 2)}")
    return 1.0 / (math.e * g.c * m * (2 * n + 1) ** g.sigma_plus)


def h_min(g, m, eps):
    """Largest step certified at the minimal half-width ceil(m/2).

    Odd m uses the square-root branch, even m the linear branch; both make
    the truncation bound hold with equality at n = ceil(m/2).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    ecm = math.e * g.c * m
    if m % 2 == 1:
        base = (
            eps
            / (g.A * g.c * math.factorial(m + 2) ** g.sigma * m)
            * (2.0 / ecm) ** (m + 1)
        )
        return math.sqrt(base)
    return (
        eps
        / (g.A * g.c * math.factorial(m + 1) ** g.sigma * m)
        * (2.0 / ecm) ** m
    )


def check_h_condition(g, m, n, h, eps):
    """True iff the truncation-residual bound clears eps at (n, h).

    The bound is A * c^(2n+1) * ((2n+1)!)^sigma * m * (e*m/2)^(2n)
    * h^(2n-m+1) <= eps, compared in log-domain with 1e-9 relative slack
    so equality-by-construction cases pass.
    """
    key_ok = 1 <= m <= 2 * n
    if not key_ok:
        raise ValueError(f"(m={m}, n={n}) is not a valid stencil key")
    if h <= 0 or eps <= 0:
        raise ValueError("h and eps must be positive")
    lhs = h_condition_lhs_log(g, m, n, h)
    return lhs <= math.log(eps) + _H_CONDITION_RELTOL


def h_condition_lhs_log(g, m, n, h):
    """Log of the truncation-residual bound at (n, h)."""
    return (
        math.log(g.A)
        + (2 * n + 1) * math.log(g.c)
        + g.sigma * math.lgamma(2 * n + 2)
        + math.log(m)
        + 2 * n * math.log(math.e * m / 2.0)
        + (2 * n - m + 1) * math.log(h)
    )


def eps_tilde(stencil, h, eps):
    """Oracle precision budget h^m * eps / D, D the absolute coefficient sum.

    Quantizing the integrand to this step keeps the induced derivative
    error within eps.
    """
    if h <= 0 or eps <= 0:
        raise ValueError("h and eps must be positive")
    return h**stencil.key.m * eps / float(stencil.abs_sum)


def x_tilde(a, eps):
    """Threshold x beyond which x^a / 2^x <= eps.

    Returns log2(2^a/eps) + a*log2(log2(2^a/eps)).  The accuracy must
    satisfy the same two-branch smallness condition as eps_prime, with a
    in place of m*sigma_plus.
    """
    if a < 0:
        raise ValueError("exponent a must be nonnegative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if a >= LN2:
        bound = 2.0 ** (a - (a / LN2) ** 2)
    else:
        bound = 2.0 ** (a - 1.0)
    if eps > bound:
        raise SchedulePreconditionError(
            f"eps {eps:.6g} exceeds the supported bound {bound:.6g} for a={a:.6g}"
        )
    inner = a - math.log2(eps)
    if a == 0:
        return inner
    return inner + a * math.log2(inner)


def qubit_estimate(eps_tilde_value, range_bound, a=1.0):
    """Register-size estimate ceil(log2(range/eps)^a) for the value oracle.

    A fixed-point register resolving range_bound down to steps of
    eps_tilde_value needs about log2(range/eps) bits; the exponent a
    models super-linear arithmetic overhead.  Constant factor fixed to 1;
    reported as an estimate, not a guarantee.
    """
    if eps_tilde_value <= 0:
        raise ValueError("eps_tilde must be positive")
    if range_bound <= 0:
        raise ValueError("range_bound must be positive")
    bits = math.log2(range_bound / eps_tilde_value)
    return max(1, math.ceil(bits**a))


@dataclass(frozen=True)
class Schedule:
    """Derived schedule for one (gevrey, m, eps) problem."""

    gevrey: GevreySpec
    m: int
    eps: float
    eps_prime: float
    n_th: int
    h_th: float
    h_min: float
    sigma_plus: float

    def eps_tilde(self, stencil, h):
        return eps_tilde(stencil, h, self.eps)


def make_schedule(g, m, eps):
    """Bundle all schedule quantities for (g, m, eps)."""
    n = n_th(g, m, eps)
    return Schedule(
        gevrey=g,
        m=m,
        eps=eps,
        eps_prime=eps_prime(g, m, eps),
        n_th=n,
        h_th=h_th(g, m, n),
        h_min=h_min(g, m, eps),
        sigma_plus=g.sigma_plus,
    )
