"""
From a smoothness declaration to stencil parameters
====================================================

Walks the schedule quantities for a Gevrey envelope |f^(k)| <= A*c^k*(k!)^sigma:
the derived precision split, the threshold stencil half-width and step, the
minimal-width alternative, and what each choice costs in oracle precision
and qubits.
"""

from qnumdiff import (
    GevreySpec,
    StencilKey,
    compute_stencil,
    eps_prime,
    eps_tilde,
    h_min,
    h_th,
    n_th,
    qubit_estimate,
)

# A mildly growing envelope and a one-percent absolute target.
spec = GevreySpec(A=2.0, c=0.8, sigma=0.5)
m, eps = 1, 1e-3
print(f"envelope: A={spec.A}, c={spec.c}, sigma={spec.sigma}; "
      f"target eps={eps} on derivative order m={m}")

# eps' is the portion of the budget given to series truncation.
ep = eps_prime(spec, m, eps)
print(f"eps' = {ep:.6e}")

# Threshold schedule: half-width from eps', step from the residual bound.
n = n_th(spec, m, eps)
h = h_th(spec, m, n)
print(f"threshold schedule: n = {n} (stencil on {2 * n + 1} points), h = {h:.6f}")

# Minimal schedule: fewest points, much smaller step.
n_min = (m + 1) // 2
h_small = h_min(spec, m, eps)
print(f"minimal schedule:   n = {n_min}, h = {h_small:.6e}")

# The oracle precision eps~ = h^m * eps / D and its qubit price.
for label, nn, hh in (("threshold", n, h), ("minimal", n_min, h_small)):
    stc = compute_stencil(StencilKey(m, nn))
    step = eps_tilde(stc, hh, eps)
    qubits = qubit_estimate(step, spec.A + 1.0)
    print(f"{label:>9}: D = {float(stc.abs_sum):.3f}, eps~ = {step:.3e}, "
          f"qubit estimate = {qubits}")

# The tradeoff: wider stencils keep h large, so the integrand oracle can
# be coarser; minimal stencils need a finer oracle, hence more qubits.
