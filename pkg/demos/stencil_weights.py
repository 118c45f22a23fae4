"""
Exact central-difference stencil weights
=========================================

Builds the coefficient tables for a few derivative orders, verifies the
moment conditions in exact rational arithmetic, and measures the
convergence order on f = exp.
"""

import math
from fractions import Fraction

import numpy as np

from qnumdiff import StencilKey, apply_stencil, compute_stencil, vandermonde_stencil

# Coefficients for the m-th derivative on 2n+1 points, exact rationals.
for m, n in ((1, 1), (1, 2), (2, 2), (4, 2)):
    stc = compute_stencil(StencilKey(m, n))
    row = ", ".join(f"d[{j}]={stc.coeffs[j]}" for j in sorted(stc.coeffs))
    print(f"m={m} n={n}: {row}")
    print(f"         coefficient mass D = {stc.abs_sum}")

# The generator and the Vandermonde solve agree exactly.
key = StencilKey(3, 4)
assert compute_stencil(key).coeffs == vandermonde_stencil(key).coeffs
print("\nrecurrence == vandermonde for (m, n) = (3, 4), exact rationals")

# Moment conditions: sum_j d_j j^k is m! at k = m and 0 otherwise.
stc = compute_stencil(StencilKey(2, 3))
for k in range(2 * 3 + 1):
    moment = sum(c * Fraction(j) ** k for j, c in stc.coeffs.items())
    expected = math.factorial(2) if k == 2 else 0
    assert moment == expected
print("moment conditions hold through degree 2n for (m, n) = (2, 3)")

# Convergence on exp: the error slope matches the stencil order.
print("\nerror on f = exp at x = 0.3 (first derivative, n = 2):")
stc = compute_stencil(StencilKey(1, 2))
hs = [2.0**-k for k in range(3, 8)]
errs = []
for h in hs:
    samples = {j: math.exp(0.3 + j * h) for j in stc.nonzero_offsets()}
    errs.append(abs(apply_stencil(stc, samples, h) - math.exp(0.3)))
    print(f"  h = {h:.5f}  error = {errs[-1]:.3e}")
slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
print(f"fitted slope {slope:.2f}, stencil order 2n - m + 1 = 4")
