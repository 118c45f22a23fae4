"""Numeric audits of the error bounds on explicit grids.

Each audit sweeps a default (overridable) grid and reports violations;
an empty violation list means the bound held everywhere.  The audited
facts, keyed by the names used across this package:

- lemma1: stencil remainder on sin is within M*m*(e*m/2)^(2n)*h^(2n-m+1).
- lemma2: the absolute coefficient sum D is within 2m*(2*(1+ln n))^m.
- lemma3: schedule-derived (n, h) keep |f^(m) - stencil| <= eps on Gevrey
  test functions (sine, windowed exponential), and the closed-form h_min
  and (n_th, h_th) satisfy the residual condition symbolically claimed.
- lemma5: x >= a*ln(x) whenever x >= a^2.
- lemma6: x^a / 2^x <= eps for every x >= x_tilde(a, eps).
"""

import math
from dataclasses import dataclass

import numpy as np

from .schedule import (
    GevreySpec,
    SchedulePreconditionError,
    check_h_condition,
    h_min,
    h_th,
    n_th,
    x_tilde,
)
from .stencil import StencilKey, apply_stencil, compute_stencil, residual_bound, abs_sum_bound

SELECTORS = ("lemma1", "lemma2", "lemma3", "lemma5", "lemma6")

# Relative slack for bound comparisons evaluated in floating point.
_RELTOL = 1e-9


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one bound audit over a grid."""

    lemma: str
    grid_description: str
    violations: tuple
    worst_margin: float
    checks: int

    @property
    def passed(self):
        return not self.violations


def _report(lemma, desc, records):
    """records: iterable of (margin, detail); margin < 0 is a violation."""
    worst = math.inf
    violations = []
    count = 0
    for margin, detail in records:
        count += 1
        if margin < worst:
            worst = margin
        if margin < 0:
            violations.append(detail)
    if count == 0:
        raise ValueError(f"{lemma}: empty audit grid")
    return AuditReport(
        lemma=lemma,
        grid_description=desc,
        violations=tuple(violations),
        worst_margin=worst,
        checks=count,
    )


def _default_keys(max_2n):
    return [StencilKey(m, n) for n in range(1, max_2n // 2 + 1)
            for m in range(1, 2 * n + 1)]


def audit_lemma1(keys=None, xs=None, hs=None):
    """Remainder bound on f = sin (every derivative bounded by M = 1)."""
    keys = _default_keys(8) if keys is None else [StencilKey(m, n) for m, n in keys]
    xs = [-1.5, -0.5, 0.0, 0.7, 1.3] if xs is None else list(xs)
    hs = [2.0**-k for k in range(3, 7)] if hs is None else list(hs)

    def records():
        for key in keys:
            stc = compute_stencil(key)
            offsets = sorted(stc.coeffs)
            for x in xs:
                truth = math.sin(x + key.m * math.pi / 2.0)
                for h in hs:
                    samples = {j: math.sin(x + j * h) for j in offsets}
                    approx = apply_stencil(stc, samples, h)
                    err = abs(truth - approx)
                    cap = residual_bound(1.0, key) * h ** (2 * key.n - key.m + 1)
                    margin = cap * (1.0 + _RELTOL) - err + 1e-15
                    yield margin, {"key": (key.m, key.n), "x": x, "h": h,
                                   "error": err, "bound": cap}

    desc = f"keys={[(k.m, k.n) for k in keys]}, x={xs}, h={hs}, f=sin (M=1)"
    return _report("lemma1", desc, records())


def audit_lemma2(max_2n=12):
    """Coefficient mass D against 2m*(2*(1+ln n))^m."""
    if max_2n < 2:
        raise ValueError("max_2n must be >= 2")
    keys = _default_keys(max_2n)

    def records():
        for key in keys:
            stc = compute_stencil(key)
            D = float(stc.abs_sum)
            cap = abs_sum_bound(key)
            yield cap - D, {"key": (key.m, key.n), "D": D, "bound": cap}

    return _report("lemma2", f"all keys with 1 <= m <= 2n <= {max_2n}", records())


def _gevrey_sine(A, c):
    def deriv(m, x):
        return A * c**m * math.sin(c * x + m * math.pi / 2.0)
    return deriv


def audit_lemma3(specs=None, ms=(1, 2, 3), epses=(1e-3, 1e-5), xs=None,
                 schedule_specs=None):
    """Schedule correctness on Gevrey members plus the closed-form claims.

    For f(y) = A*sin(c*y) (class (A, c, 0) globally) and f(y) = exp(y)
    on a window (class (e^W, 1, 0) for |y| <= W), any n >= n_th and
    h <= h_th must push the stencil error below eps.  Also asserts that
    h_min at n = ceil(m/2) and the (n_th, h_th) pair satisfy the residual
    condition directly.
    """
    specs = [(1.0, 1.0), (2.0, 0.5)] if specs is None else list(specs)
    xs = [-1.0, -0.3, 0.0, 0.4, 1.0] if xs is None else list(xs)
    if schedule_specs is None:
        schedule_specs = [GevreySpec(A, c, s)
                          for A in (1.0, 3.0) for c in (0.5, 2.0)
                          for s in (-0.5, 0.0, 0.5, 1.0)]

    def records():
        for A, c in specs:
            g = GevreySpec(A, c, 0.0)
            sine_m = _gevrey_sine(A, c)
            for m in ms:
                for eps in epses:
                    n0 = n_th(g, m, eps)
                    h0 = h_th(g, m, n0)
                    for n in (n0, n0 + 1):
                        stc = compute_stencil(StencilKey(m, n))
                        offsets = sorted(stc.coeffs)
                        for h in (h0, h0 / 2.0):
                            for x in xs:
                                samples = {j: A * math.sin(c * (x + j * h))
                                           for j in offsets}
                                err = abs(sine_m(m, x) - apply_stencil(stc, samples, h))
                                margin = eps * (1.0 + _RELTOL) - err
                                yield margin, {"f": f"{A}*sin({c}y)", "m": m,
                                               "eps": eps, "n": n, "h": h,
                                               "x": x, "error": err}
        # Windowed exponential: derivatives of exp on |y| <= W are <= e^W.
        W = 8.0
        g = GevreySpec(math.exp(W), 1.0, 0.0)
        for m in ms:
            for eps in epses:
                n0 = n_th(g, m, eps)
                h0 = h_th(g, m, n0)
                if 1.0 + n0 * h0 > W:
                    raise ValueError("exp audit window too small for the schedule span")
                stc = compute_stencil(StencilKey(m, n0))
                offsets = sorted(stc.coeffs)
                for x in xs:
                    samples = {j: math.exp(x + j * h0) for j in offsets}
                    err = abs(math.exp(x) - apply_stencil(stc, samples, h0))
                    margin = eps * (1.0 + _RELTOL) - err
                    yield margin, {"f": "exp on |y|<=8", "m": m, "eps": eps,
                                   "n": n0, "h": h0, "x": x, "error": err}
        # Closed-form schedule claims.
        for g in schedule_specs:
            for m in ms:
                for eps in epses:
                    nm = (m + 1) // 2
                    ok_min = check_h_condition(g, m, nm, h_min(g, m, eps), eps)
                    yield (0.0 if ok_min else -1.0), {
                        "claim": "h_min", "spec": (g.A, g.c, g.sigma),
                        "m": m, "eps": eps}
                    try:
                        n0 = n_th(g, m, eps)
                    except SchedulePreconditionError:
                        continue  # accuracy condition excludes this pair
                    ok_th = check_h_condition(g, m, n0, h_th(g, m, n0), eps)
                    yield (0.0 if ok_th else -1.0), {
                        "claim": "(n_th, h_th)", "spec": (g.A, g.c, g.sigma),
                        "m": m, "eps": eps}

    desc = (f"sine specs {specs} and exp window 4.0, m in {tuple(ms)}, "
            f"eps in {tuple(epses)}; closed-form h_min/(n_th,h_th) checks "
            f"over {len(schedule_specs)} Gevrey specs")
    return _report("lemma3", desc, records())


def audit_lemma5(a_values=(0.5, 1.0, 2.0, math.e, 5.0), x_max=1e6, points=400):
    """x >= a*ln(x) on x in [a^2, x_max]."""
    if points < 2:
        raise ValueError("points must be >= 2")

    def records():
        for a in a_values:
            lo = max(a * a, 1e-12)
            if lo >= x_max:
                raise ValueError(f"x_max {x_max} below a^2 for a={a}")
            for x in np.geomspace(lo, x_max, points):
                margin = x - a * math.log(x) + 1e-12
                yield margin, {"a": a, "x": float(x), "a*ln(x)": a * math.log(x)}

    return _report("lemma5", f"a in {tuple(a_values)}, x geomgrid to {x_max}",
                   records())


def audit_lemma6(a_values=(0.0, 0.5, 1.0, 2.0, math.e), epses=(2.0**-4, 2.0**-8, 2.0**-16, 1e-6),
                 span=50.0, points=101):
    """x^a / 2^x <= eps for x from x_tilde(a, eps) upward (log2 domain)."""
    if points < 2:
        raise ValueError("points must be >= 2")

    def records():
        for a in a_values:
            for eps in epses:
                try:
                    x0 = x_tilde(a, eps)
                except ValueError:
                    continue  # precondition not met for this pair
                for x in np.linspace(x0, x0 + span, points):
                    lhs_log2 = a * math.log2(x) - x if x > 0 else -x
                    margin = math.log2(eps) - lhs_log2 + 1e-9
                    yield margin, {"a": a, "eps": eps, "x": float(x),
                                   "log2(x^a/2^x)": lhs_log2}

    return _report("lemma6", f"a in {tuple(a_values)}, eps in {tuple(epses)}, "
                             f"span {span} past x_tilde", records())


_AUDITS = {
    "lemma1": audit_lemma1,
    "lemma2": audit_lemma2,
    "lemma3": audit_lemma3,
    "lemma5": audit_lemma5,
    "lemma6": audit_lemma6,
}


def audit_bounds(selector, **grid):
    """Run one audit (or all) and return a list of AuditReports.

    Keyword arguments override the default grid of the selected audit;
    explicit empty grids raise.  selector 'all' accepts no overrides.
    """
    if selector == "all":
        if grid:
            raise ValueError("grid overrides need a single named lemma")
        return [fn() for fn in _AUDITS.values()]
    if selector not in _AUDITS:
        raise ValueError(f"unknown selector {selector!r}; choose from "
                         f"{SELECTORS + ('all',)}")
    for key, value in grid.items():
        if value is not None and hasattr(value, "__len__") and len(value) == 0:
            raise ValueError(f"{selector}: empty grid value for {key!r}")
    return [_AUDITS[selector](**grid)]
