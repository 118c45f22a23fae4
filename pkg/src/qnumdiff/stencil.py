"""Exact central-difference stencils of arbitrary derivative order.

A stencil approximates the m-th derivative of f at x from samples at the
2n+1 equally spaced points x + j*h, j = -n..n:

    f^(m)(x) ~= (1/h^m) * sum_j d[j] * f(x + j*h)

with truncation error O(h^(2n-m+1)).  Coefficients are exact rationals,
computed from elementary symmetric polynomials of the node multiset;
floating point enters only when a stencil is applied to samples.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

# Guard against accidental huge-n requests; factorial growth makes the
# coefficients cheap to compute but pointless to use far beyond this.
DEFAULT_MAX_HALF_WIDTH = 64


@dataclass(frozen=True)
class StencilKey:
    """Derivative order m and half-width n, with m >= 1, n >= 1, m <= 2n."""

    m: int
    n: int

    def __post_init__(self):
        if not isinstance(self.m, int) or not isinstance(self.n, int):
            raise TypeError("stencil key fields must be integers")
        if self.m < 1 or self.n < 1:
            raise ValueError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if self.m > 2 * self.n:
            raise ValueError(
                f"derivative order m={self.m} exceeds 2n={2 * self.n}; "
                f"a width-(2n+1) central stencil supports m <= 2n"
            )


@dataclass(frozen=True)
class Stencil:
    """Exact coefficients for one (m, n).

    coeffs maps j in [-n, n] to the exact rational weight d[j]; abs_sum is
    sum_j |d[j]| (the normalization constant of the probability encodings);
    signs maps j to 1 if d[j] >= 0 else 0.
    """

    key: StencilKey
    coeffs: dict
    abs_sum: Fraction
    signs: dict

    @property
    def m(self):
        return self.key.m

    @property
    def n(self):
        return self.key.n

    def nonzero_offsets(self):
        """Offsets j with d[j] != 0, ascending."""
        return [j for j in sorted(self.coeffs) if self.coeffs[j] != 0]


def _elementary_symmetric(nodes, k):
    """e_k of an integer multiset via the product recurrence, exact.

    e is updated in place as each node is absorbed:
    e_i <- e_i + node * e_{i-1}, i descending.
    """
    e = [0] * (k + 1)
    e[0] = 1
    for idx, x in enumerate(nodes):
        top = min(idx + 1, k)
        for i in range(top, 0, -1):
            e[i] += x * e[i - 1]
    return e[k]


def _finish(key, coeffs):
    abs_sum = sum((abs(c) for c in coeffs.values()), Fraction(0))
    signs = {j: (1 if coeffs[j] >= 0 else 0) for j in coeffs}
    return Stencil(key=key, coeffs=coeffs, abs_sum=abs_sum, signs=signs)


def compute_stencil(key, max_n=DEFAULT_MAX_HALF_WIDTH):
    """Exact stencil coefficients for the m-th derivative, half-width n.

    For j != 0 the weight is

        d[j] = (-1)^(n-m+j) * m! * e_{2n-m}(S_j) / ((n+j)! * (n-j)!)

    where S_j is the multiset [-n..n] \\ {0, j}, and e_k is the k-th
    elementary symmetric polynomial (evaluated by recurrence, never by
    enumerating combinations).  d[0] closes the k=0 moment condition and
    vanishes for odd m.

    Parameters
    ----------
    key : StencilKey
    max_n : int, optional
        Reject half-widths beyond this limit.

    Returns
    -------
    Stencil
    """
    m, n = key.m, key.n
    if n > max_n:
        raise ValueError(f"half-width n={n} exceeds the supported limit {max_n}")
    mfact = math.factorial(m)
    coeffs = {}
    for j in range(-n, n + 1):
        if j == 0:
            continue
        nodes = [i for i in range(-n, n + 1) if i != 0 and i != j]
        a = _elementary_symmetric(nodes, 2 * n - m)
        num = mfact * a
        den = math.factorial(n + j) * math.factorial(n - j)
        d = Fraction(num, den)
        if (n - m + j) % 2:
            d = -d
        coeffs[j] = d
    coeffs[0] = -sum(coeffs.values()) if m % 2 == 0 else Fraction(0)
    if m % 2 == 1:
        # The off-center weights of an odd-order stencil are antisymmetric,
        # so the closing weight is zero; assert rather than trust.
        check = -sum(coeffs[j] for j in coeffs if j != 0)
        if check != 0:
            raise AssertionError(f"odd-m center weight must vanish, got {check}")
    return _finish(key, dict(sorted(coeffs.items())))


def vandermonde_stencil(key, max_n=DEFAULT_MAX_HALF_WIDTH):
    """Independent stencil construction from the moment conditions.

    Solves the (2n+1) x (2n+1) exact linear system

        sum_j w[j] * j^k = m! * [k == m],   k = 0..2n

    by fraction-free-ordered Gaussian elimination over Fractions.  Exists
    purely as a cross-check oracle for compute_stencil.
    """
    m, n = key.m, key.n
    if n > max_n:
        raise ValueError(f"half-width n={n} exceeds the supported limit {max_n}")
    size = 2 * n + 1
    offsets = list(range(-n, n + 1))
    rows = []
    for k in range(size):
        row = [Fraction(j) ** k for j in offsets]
        row.append(Fraction(math.factorial(m)) if k == m else Fraction(0))
        rows.append(row)
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular moment system; distinct nodes cannot do this")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    coeffs = {offsets[i]: rows[i][size] for i in range(size)}
    return _finish(key, coeffs)


def apply_stencil(st, samples, h):
    """Evaluate (1/h^m) * sum_j d[j] * samples[j] in floating point.

    Parameters
    ----------
    st : Stencil
    samples : mapping int -> float
        Function values f(x + j*h); required for every j with d[j] != 0.
    h : float
        Positive step.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    terms = []
    for j in st.nonzero_offsets():
        if j not in samples:
            raise ValueError(f"missing sample at offset {j} (coefficient is nonzero)")
        terms.append(float(st.coeffs[j]) * float(samples[j]))
    return math.fsum(terms) / h**st.key.m


def residual_bound(M, key):
    """Uniform truncation-residual bound M*m*(e*m/2)^(2n).

    M bounds |f^(2n+1)| on the relevant interval; the stencil error is then
    at most residual_bound(M, key) * h^(2n-m+1).
    """
    if M < 0:
        raise ValueError("derivative bound M must be nonnegative")
    m, n = key.m, key.n
    return M * m * (math.e * m / 2.0) ** (2 * n)


def abs_sum_bound(key):
    """Closed-form bound 2m*[2(1+ln n)]^m on the absolute coefficient sum."""
    m, n = key.m, key.n
    return 2.0 * m * (2.0 * (1.0 + math.log(n))) ** m
