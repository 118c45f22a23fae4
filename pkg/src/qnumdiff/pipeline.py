"""End-to-end derivative estimation through an amplitude-encoded stencil sum.

Two estimation routes share the same skeleton: evaluate the quantized
integrand at the stencil abscissas, fold the weighted double sum
(stencil coefficients x outcome probabilities) into a success probability
P in [0, 1], estimate P by simulated amplitude estimation, and map the
estimate back to the derivative scale.

The smooth route normalizes by 2*h^m*(A*c^m*(m!)^sigma + 2*eps), valid
when the integrand itself carries a Gevrey declaration in x.  The
nonsmooth route normalizes by 2*D*(B+eps_tilde) where D is the stencil's
absolute coefficient sum, and only needs the expectation V to be smooth.
The sum-in-QAE route realizes the identical probability through a
coefficient-loading distribution over stencil offsets plus a sign-aware
flag, so its per-invocation query pattern differs while P is unchanged.

The success probability itself is computed exactly (up to float rounding)
by classical summation; only the measurement statistics fed to the
amplitude estimator are stochastic.  That splits the error budget into
the three audited pieces reported on every estimate: stencil residual,
quantization transfer, and estimation error.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import DiscreteDistribution
from .integrand import Integrand, QuantizedIntegrand
from .qae_sim import (
    AmplitudeProblem,
    classical_mc_estimate,
    mlae_estimate,
    mlae_estimate_batch,
)
from .schedule import (
    check_h_condition,
    eps_tilde,
    h_condition_lhs_log,
    h_min,
    h_th,
    n_th,
    qubit_estimate,
)
from .stencil import StencilKey, compute_stencil

METHODS = ("naive_smooth", "naive_nonsmooth", "sum_in_qae")

P_EQUIV_TOL = 1e-12
P_RANGE_SLACK = 1e-12
# Amplitude targets below this would need a theta grid beyond float
# resolution (and astronomically deep simulated circuits); refuse loudly.
MIN_AMP_EPS = 2.0**-48

_CHUNK = 1 << 20


class PrecisionInfeasibleError(RuntimeError):
    """The normalizer demands an amplitude accuracy the simulator cannot hit."""


class EncodingError(RuntimeError):
    """Encoded probability left [0, 1]: normalization bug or a smoothness
    declaration the integrand does not actually satisfy."""


@dataclass(frozen=True)
class QAEConfig:
    """Estimator knobs carried by a job; seed makes runs reproducible."""

    variant: str = "mlae"
    delta: float = 0.01
    shots_per_depth: int = None
    seed: int = None
    repeats: int = 1

    def __post_init__(self):
        if self.variant not in ("mlae", "classical"):
            raise ValueError(f"variant must be 'mlae' or 'classical', got {self.variant!r}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.shots_per_depth is not None and self.shots_per_depth < 1:
            raise ValueError("shots_per_depth must be >= 1")
        if self.repeats < 1 or self.repeats % 2 == 0:
            raise ValueError("repeats must be a positive odd integer")


@dataclass(frozen=True)
class DiffJob:
    """One derivative-estimation task with explicit stencil parameters.

    The smoothness declaration relevant to the method must be present on
    the integrand (f_gevrey for naive_smooth, v_gevrey otherwise), and
    (m, n, h, eps) must satisfy the residual condition
    A*c^(2n+1)*((2n+1)!)^sigma * m * (e*m/2)^(2n) * h^(2n-m+1) <= eps
    so the stencil error alone stays within budget.
    """

    x: float
    m: int
    eps: float
    method: str
    n: int
    h: float
    dist: DiscreteDistribution
    integrand: Integrand
    qae: QAEConfig = field(default_factory=QAEConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        StencilKey(self.m, self.n)
        if not (self.h > 0):
            raise ValueError("h must be positive")
        if not (self.eps > 0):
            raise ValueError("eps must be positive")
        spec = self.smoothness_spec
        if spec is None:
            slot = "f_gevrey" if self.method == "naive_smooth" else "v_gevrey"
            raise ValueError(
                f"method {self.method!r} needs a {slot} declaration on the integrand"
            )
        if not check_h_condition(spec, self.m, self.n, self.h, self.eps):
            raise ValueError(
                "stencil residual condition fails: "
                f"A*c^(2n+1)*((2n+1)!)^sigma*m*(e*m/2)^(2n)*h^(2n-m+1) > eps "
                f"at m={self.m}, n={self.n}, h={self.h}, eps={self.eps}"
            )
        window = self.integrand.x_window
        if window is not None:
            lo, hi = window
            if self.x - self.n * self.h < lo or self.x + self.n * self.h > hi:
                raise ValueError(
                    f"stencil span [{self.x - self.n * self.h}, "
                    f"{self.x + self.n * self.h}] leaves the integrand window "
                    f"({lo}, {hi})"
                )

    @property
    def smoothness_spec(self):
        if self.method == "naive_smooth":
            return self.integrand.f_gevrey
        return self.integrand.v_gevrey


@dataclass(frozen=True)
class DiffEstimate:
    """Derivative estimate plus the audit trail the proofs decompose."""

    y_tilde: float
    p_tilde: float
    p_true: float
    oracle_calls: dict
    oracle_calls_per_invocation: dict
    qubit_report: int
    error_budget: dict
    normalizer: float
    eps_amp: float
    grover_calls: int
    method: str
    notes: tuple = ()


def smooth_normalizer(spec, m, eps):
    """A*c^m*(m!)^sigma + 2*eps, the smooth-route output scale."""
    return spec.A * spec.c**m * float(math.factorial(m)) ** spec.sigma + 2.0 * eps


def _weighted_mean(probs, values):
    """Deterministic chunked reduction of sum(p_i * v_i).

    Chunk partials are numpy pairwise sums combined by math.fsum; the
    fixed chunk size makes the float result independent of context.
    """
    parts = []
    for a in range(0, probs.size, _CHUNK):
        parts.append(float(np.sum(probs[a:a + _CHUNK] * values[a:a + _CHUNK])))
    return math.fsum(parts)


def _stencil_terms(job):
    """Offsets, float coefficients, and T_j = E[F_eps(S, x + j*h)].

    Returns (offsets, coeffs, terms, quantized, stencil).  Evaluation is
    chunked over the outcome grid; all reductions are deterministic.
    """
    stc = compute_stencil(StencilKey(job.m, job.n))
    step = eps_tilde(stc, job.h, job.eps)
    quant = QuantizedIntegrand(job.integrand, step)
    offsets = stc.nonzero_offsets()
    coeffs = [float(stc.coeffs[j]) for j in offsets]
    pts = job.dist.points
    probs = job.dist.probs
    terms = []
    for j in offsets:
        parts = []
        for a in range(0, pts.size, _CHUNK):
            vals = quant.eval(pts[a:a + _CHUNK], job.x + j * job.h)
            parts.append(float(np.sum(probs[a:a + _CHUNK] * vals)))
        terms.append(math.fsum(parts))
    return offsets, coeffs, terms, quant, stc


def _check_unit_interval(p, context):
    if not (-P_RANGE_SLACK <= p <= 1.0 + P_RANGE_SLACK):
        raise EncodingError(
            f"{context}: encoded probability {p!r} outside [0, 1]; the "
            "declared smoothness bound is likely violated by the integrand"
        )
    return min(max(p, 0.0), 1.0)


def encoded_probability_smooth(job):
    """P = 1/2 + sum_j d_j * T_j / (2*h^m*(A*c^m*(m!)^sigma + 2*eps))."""
    spec = job.integrand.f_gevrey
    if spec is None:
        raise ValueError("smooth encoding needs an f_gevrey declaration on the integrand")
    _, coeffs, terms, _, _ = _stencil_terms(job)
    weighted = math.fsum(d * t for d, t in zip(coeffs, terms))
    norm = smooth_normalizer(spec, job.m, job.eps)
    p = 0.5 + weighted / (2.0 * job.h**job.m * norm)
    return _check_unit_interval(p, "smooth encoding")


def encoded_probability_nonsmooth(job):
    """P = 1/2 + sum_j d_j * T_j / (2*D*(B+eps_tilde))."""
    if job.integrand.v_gevrey is None:
        raise ValueError("nonsmooth encoding needs a v_gevrey declaration on the integrand")
    _, coeffs, terms, quant, stc = _stencil_terms(job)
    weighted = math.fsum(d * t for d, t in zip(coeffs, terms))
    D = float(stc.abs_sum)
    p = 0.5 + weighted / (2.0 * D * (job.integrand.bound + quant.eps_q))
    return _check_unit_interval(p, "nonsmooth encoding")


def _sum_in_qae_probability(job):
    """P induced by the coefficient-loading construction.

    Outcome (j, s) carries weight (|d_j|/D)*p_s and flips the flag with
    probability 1/2 + sign(d_j)*F_eps(s, x+j*h)/(2*(B+eps_tilde)); the
    total flag probability collapses to the nonsmooth encoding, but the
    summation order here follows the construction (expectation of the
    flag probability per offset), exercising an independent code path.
    """
    stc = compute_stencil(StencilKey(job.m, job.n))
    step = eps_tilde(stc, job.h, job.eps)
    quant = QuantizedIntegrand(job.integrand, step)
    D = float(stc.abs_sum)
    scale = 2.0 * (job.integrand.bound + step)
    pts = job.dist.points
    probs = job.dist.probs
    contributions = []
    for j in stc.nonzero_offsets():
        weight = float(abs(stc.coeffs[j])) / D
        sign = 1.0 if stc.signs[j] else -1.0
        parts = []
        for a in range(0, pts.size, _CHUNK):
            vals = quant.eval(pts[a:a + _CHUNK], job.x + j * job.h)
            flag = 0.5 + sign * vals / scale
            if flag.min() < 0.0 or flag.max() > 1.0:
                raise EncodingError(
                    f"flag probability outside [0, 1] at offset {j}; "
                    f"integrand exceeds its declared bound {job.integrand.bound}"
                )
            parts.append(float(np.sum(probs[a:a + _CHUNK] * flag)))
        contributions.append(weight * math.fsum(parts))
    return math.fsum(contributions)


def encoded_probability_sum_in_qae(job):
    """P of the coefficient-loading construction, range-checked.

    Must agree with encoded_probability_nonsmooth to working precision;
    the run functions enforce that equivalence before estimating.
    """
    return _check_unit_interval(_sum_in_qae_probability(job),
                                "sum-in-QAE encoding")


def _per_invocation_calls(job, stc):
    if job.method == "sum_in_qae":
        return {"O_F": 1, "O_S": 1, "O_coef": 1, "O_sign": 1}
    return {"O_F": len(stc.nonzero_offsets()), "O_S": 1, "O_coef": 0, "O_sign": 0}


def amplitude_accuracy(job):
    """Amplitude target eps/(2*normalizer'): makes |Y - Ytilde| <= eps.

    For the smooth route the output map is Ytilde = N*(2*Ptilde - 1) with
    N = A*c^m*(m!)^sigma + 2*eps; for the others it is
    Ytilde = D*(B+eps_tilde)*(2*Ptilde - 1)/h^m.
    """
    stc = compute_stencil(StencilKey(job.m, job.n))
    step = eps_tilde(stc, job.h, job.eps)
    if job.method == "naive_smooth":
        norm = smooth_normalizer(job.integrand.f_gevrey, job.m, job.eps)
        return job.eps / (2.0 * norm), norm, step, stc
    D = float(stc.abs_sum)
    map_factor = D * (job.integrand.bound + step) / job.h**job.m
    return step / (2.0 * (job.integrand.bound + step)), map_factor, step, stc


def _estimate_probability(job, p_true, eps_amp, rng):
    prob = AmplitudeProblem(p_true)
    if job.qae.variant == "classical":
        return classical_mc_estimate(prob, eps_amp, job.qae.delta, rng)
    return mlae_estimate(prob, eps_amp, job.qae.delta, rng,
                         repeats=job.qae.repeats,
                         shots_per_depth=job.qae.shots_per_depth)


def _rng_for(job, rng):
    if rng is not None:
        return rng
    if job.qae.seed is None:
        raise ValueError("no randomness source: set qae.seed or pass rng explicitly")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(job.qae.seed)))


def _finish(job, p_true, qae_result, map_factor, step, stc, notes=()):
    eps_amp = qae_result.target_eps
    p_tilde = qae_result.estimate
    # map_factor already carries the smooth normalizer or D*(B+eps~)/h^m.
    y_tilde = map_factor * (2.0 * p_tilde - 1.0)
    per_call = _per_invocation_calls(job, stc)
    totals = {k: v * qae_result.grover_calls for k, v in per_call.items()}
    D = float(stc.abs_sum)
    budget = {
        "stencil_residual": math.exp(
            h_condition_lhs_log(job.smoothness_spec, job.m, job.n, job.h)
        ),
        "quantization": D * (step / 2.0) / job.h**job.m,
        "qae": 2.0 * map_factor * eps_amp,
    }
    tol = job.eps * (1.0 + 1e-9)
    for name, value in budget.items():
        if value > tol:
            raise EncodingError(f"error budget component {name}={value} exceeds eps={job.eps}")
    return DiffEstimate(
        y_tilde=y_tilde,
        p_tilde=p_tilde,
        p_true=p_true,
        oracle_calls=totals,
        oracle_calls_per_invocation=per_call,
        qubit_report=qubit_estimate(step, job.integrand.bound + 1.0),
        error_budget=budget,
        normalizer=map_factor,
        eps_amp=eps_amp,
        grover_calls=qae_result.grover_calls,
        method=job.method,
        notes=tuple(notes),
    )


def _require_feasible(job, eps_amp, map_factor):
    if eps_amp < MIN_AMP_EPS:
        raise PrecisionInfeasibleError(
            f"required amplitude accuracy {eps_amp:.3e} (normalizer "
            f"{map_factor:.3e}, eps {job.eps:.3e}) is below the simulator "
            f"floor {MIN_AMP_EPS:.3e}; the theta grid cannot resolve it"
        )


def run_naive(job, rng=None):
    """Naive iteration: encode the stencil sum, one amplitude estimation.

    Per simulated base-oracle invocation the outcome register is prepared
    once (O_S) and the integrand oracle runs once per nonzero stencil
    offset (O_F); coefficient and sign oracles are not used.
    """
    if job.method not in ("naive_smooth", "naive_nonsmooth"):
        raise ValueError(f"run_naive needs a naive_* method, got {job.method!r}")
    eps_amp, map_factor, step, stc = amplitude_accuracy(job)
    _require_feasible(job, eps_amp, map_factor)
    notes = []
    if job.method == "naive_smooth":
        p_true = encoded_probability_smooth(job)
        notes.extend(_audit_smooth_declaration(job, stc, step))
    else:
        p_true = encoded_probability_nonsmooth(job)
    qae_result = _estimate_probability(job, p_true, eps_amp, _rng_for(job, rng))
    return _finish(job, p_true, qae_result, map_factor, step, stc, notes)


def run_sum_in_qae(job, rng=None):
    """Sum-in-QAE: stencil coefficients live in the estimation superposition.

    The induced success probability must equal the nonsmooth encoding
    exactly; both are computed (by different summation orders) and cross-
    checked to 1e-12 before estimation.  All four oracles are charged once
    per invocation.
    """
    if job.method != "sum_in_qae":
        raise ValueError(f"run_sum_in_qae needs method 'sum_in_qae', got {job.method!r}")
    eps_amp, map_factor, step, stc = amplitude_accuracy(job)
    _require_feasible(job, eps_amp, map_factor)
    p_construct = _sum_in_qae_probability(job)
    p_reference = encoded_probability_nonsmooth(job)
    if abs(p_construct - p_reference) > P_EQUIV_TOL:
        raise EncodingError(
            f"sum-in-QAE probability {p_construct!r} disagrees with the "
            f"direct encoding {p_reference!r} beyond {P_EQUIV_TOL}"
        )
    p_true = _check_unit_interval(p_construct, "sum-in-QAE encoding")
    qae_result = _estimate_probability(job, p_true, eps_amp, _rng_for(job, rng))
    return _finish(job, p_true, qae_result, map_factor, step, stc)


def run_job(job, rng=None):
    if job.method == "sum_in_qae":
        return run_sum_in_qae(job, rng)
    return run_naive(job, rng)


def run_trials(job, trials, seed):
    """Repeated seeded estimations of one job, sharing the exact P.

    The encoded probability is computed once; each trial redraws only the
    estimator's samples with an independent child seed (trial t is
    byte-identical to a single run seeded with child t).  Returns
    (y_tilde array, probability estimates array, template DiffEstimate
    from trial 0).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps_amp, map_factor, step, stc = amplitude_accuracy(job)
    _require_feasible(job, eps_amp, map_factor)
    notes = []
    if job.method == "naive_smooth":
        p_true = encoded_probability_smooth(job)
        notes.extend(_audit_smooth_declaration(job, stc, step))
    elif job.method == "naive_nonsmooth":
        p_true = encoded_probability_nonsmooth(job)
    else:
        p_construct = _sum_in_qae_probability(job)
        p_reference = encoded_probability_nonsmooth(job)
        if abs(p_construct - p_reference) > P_EQUIV_TOL:
            raise EncodingError(
                f"sum-in-QAE probability {p_construct!r} disagrees with the "
                f"direct encoding {p_reference!r} beyond {P_EQUIV_TOL}"
            )
        p_true = _check_unit_interval(p_construct, "sum-in-QAE encoding")
    prob = AmplitudeProblem(p_true)
    if job.qae.variant == "classical" or job.qae.repeats != 1:
        estimates = np.empty(trials)
        template_result = None
        for t, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
            rng = np.random.Generator(np.random.PCG64(child))
            if job.qae.variant == "classical":
                res = classical_mc_estimate(prob, eps_amp, job.qae.delta, rng)
            else:
                res = mlae_estimate(prob, eps_amp, job.qae.delta, rng,
                                    repeats=job.qae.repeats,
                                    shots_per_depth=job.qae.shots_per_depth)
            estimates[t] = res.estimate
            if template_result is None:
                template_result = res
    else:
        estimates, template_result = mlae_estimate_batch(
            prob, eps_amp, job.qae.delta, seed, trials,
            shots_per_depth=job.qae.shots_per_depth)
    template = _finish(job, p_true, template_result, map_factor, step, stc, notes)
    estimates = np.asarray(estimates, dtype=float)
    y = map_factor * (2.0 * estimates - 1.0)
    return y, estimates, template


def _audit_smooth_declaration(job, stc, step):
    """Sample check of the declared f-smoothness: per outcome s the
    stencil sum of F_eps must stay within h^m * normalizer, else P could
    leave [0,1].  Violations are reported, not fatal (the encoding is
    still clamped and checked globally)."""
    spec = job.integrand.f_gevrey
    norm = smooth_normalizer(spec, job.m, job.eps)
    cap = job.h**job.m * norm
    quant = QuantizedIntegrand(job.integrand, step)
    pts = job.dist.points
    worst = 0.0
    violations = 0
    for a in range(0, pts.size, _CHUNK):
        chunk = pts[a:a + _CHUNK]
        acc = np.zeros(chunk.size)
        for j in stc.nonzero_offsets():
            acc += float(stc.coeffs[j]) * quant.eval(chunk, job.x + j * job.h)
        mags = np.abs(acc)
        worst = max(worst, float(mags.max()))
        violations += int(np.count_nonzero(mags > cap * (1.0 + 1e-12)))
    if violations:
        return [
            f"smoothness declaration violated at {violations} outcome(s): "
            f"max |stencil sum| {worst:.6e} exceeds h^m*normalizer {cap:.6e}"
        ]
    return []


def threshold_parameters(job_spec, m, eps):
    """(n_th, h_th) derived from a Gevrey declaration."""
    n = n_th(job_spec, m, eps)
    return n, h_th(job_spec, m, n)


def minimal_parameters(job_spec, m, eps):
    """(ceil(m/2), h_min): fewest stencil points, smallest step."""
    return (m + 1) // 2, h_min(job_spec, m, eps)


def make_job(integrand, dist, x, m, eps, method, mode="threshold",
             n=None, h=None, qae=None):
    """Build a DiffJob with schedule-derived or explicit (n, h).

    mode 'threshold' uses (n_th, h_th) from the method's smoothness
    declaration; mode 'minimal' uses (ceil(m/2), h_min) and is reserved
    for the smooth route (its residual condition needs the integrand's
    own Gevrey bound).  Explicit n and h override the mode.
    """
    spec = integrand.f_gevrey if method == "naive_smooth" else integrand.v_gevrey
    if spec is None:
        raise ValueError(f"integrand lacks the smoothness declaration for {method!r}")
    if n is None or h is None:
        if mode == "threshold":
            n_auto, h_auto = threshold_parameters(spec, m, eps)
        elif mode == "minimal":
            n_auto, h_auto = minimal_parameters(spec, m, eps)
        else:
            raise ValueError(f"mode must be 'threshold' or 'minimal', got {mode!r}")
        n = n_auto if n is None else n
        h = h_auto if h is None else h
    return DiffJob(x=x, m=m, eps=eps, method=method, n=n, h=h,
                   dist=dist, integrand=integrand,
                   qae=qae if qae is not None else QAEConfig())


def select_method(smooth_f, qubit_budget, m, sigma):
    """Rank (method, mode) choices for the given regime.

    Nonsmooth integrands admit only the nonsmooth encodings, where the
    folded-sum route needs fewer integrand calls per invocation.  Smooth
    integrands with a large qubit budget take the naive route at the
    minimal stencil.  With a small budget the naive route wins outright
    when m*max(sigma, 0) >= 1; otherwise the query exponents tie up to
    log factors and both threshold-mode routes are returned as a ranked
    pair, folded-sum first.
    """
    if qubit_budget not in ("large", "small"):
        raise ValueError(f"qubit_budget must be 'large' or 'small', got {qubit_budget!r}")
    if not smooth_f:
        return (("sum_in_qae", "threshold"),)
    if qubit_budget == "large":
        return (("naive_smooth", "minimal"),)
    if m * max(sigma, 0.0) >= 1.0:
        return (("naive_smooth", "threshold"),)
    return (("sum_in_qae", "threshold"), ("naive_smooth", "threshold"))
