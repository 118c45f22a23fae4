"""Config-driven experiments: single estimates, sweeps, and method tables.

A TOML file declares the model (Black-Scholes greek or a sine test
function), the derivative job, the outcome grid, and the estimator
settings.  Runs are seed-keyed and write deterministic JSON or CSV; the
same config and seed always produce the same bytes.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .distribution import (
    DiscreteDistribution,
    discretize_standard_normal,
    discretize_uniform,
    distribution_from_csv,
)
from .integrand import (
    BlackScholesModel,
    analytic_greek,
    calibrate_gevrey,
    call_slope_bound,
    make_greek_integrand,
    make_sine_integrand,
    sine_derivative,
)
from .pipeline import (
    METHODS,
    QAEConfig,
    make_job,
    run_trials,
    select_method,
)

ESTIMATE_SCHEMA = "qnumdiff.estimate/1"
AUDIT_SCHEMA = "qnumdiff.audit/1"

PASS_FRACTION = 0.95


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated contents of an experiment TOML file."""

    model: dict
    job: dict
    distribution: dict
    calibration: dict
    qae: QAEConfig
    trials: int
    seed: int
    output: str
    format: str


_MODEL_KINDS = ("black_scholes", "sine")
_MODES = ("threshold", "minimal")


def _section(data, name, default=None):
    value = data.get(name, {} if default is None else default)
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(value)


def load_config(path):
    """Parse and validate an experiment TOML file."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def _merge_alias(target, target_table, target_key, value, source):
    """Fold an alias config key into its canonical table, rejecting conflicts."""
    if value is None:
        return
    if target_key in target and target[target_key] != value:
        raise ConfigError(
            f"{source} conflicts with {target_table}.{target_key} "
            f"({value!r} vs {target[target_key]!r})"
        )
    target[target_key] = value


def config_from_dict(data):
    model = _section(data, "model")
    job = _section(data, "job")
    dist = _section(data, "distribution")
    calib = _section(data, "calibration")
    qae_table = _section(data, "qae")
    run = _section(data, "run")
    greek = _section(data, "greek")
    integrand_table = _section(data, "integrand")

    # [greek] and [integrand] are accepted aliases for the canonical
    # [model]/[job] placements.
    _merge_alias(model, "model", "parameter", greek.get("parameter"), "greek.parameter")
    _merge_alias(job, "job", "m", greek.get("order"), "greek.order")
    _merge_alias(model, "model", "x_window",
                 integrand_table.get("x_window"), "integrand.x_window")
    _merge_alias(model, "model", "B_override",
                 integrand_table.get("B_override"), "integrand.B_override")

    kind = model.get("kind")
    if kind not in _MODEL_KINDS:
        raise ConfigError(f"model.kind must be one of {_MODEL_KINDS}, got {kind!r}")
    method = job.get("method")
    if method not in METHODS:
        raise ConfigError(f"job.method must be one of {METHODS}, got {method!r}")
    mode = job.get("mode", "threshold")
    if mode not in _MODES:
        raise ConfigError(f"job.mode must be one of {_MODES}, got {mode!r}")
    m = job.get("m")
    if not isinstance(m, int) or m < 1:
        raise ConfigError("job.m must be a positive integer")
    n = job.get("n")
    if n is not None and (not isinstance(n, int) or n < 1):
        raise ConfigError("job.n must be a positive integer when given")
    if n is not None and m > 2 * n:
        raise ConfigError(
            f"derivative order m={m} needs m <= 2n, got n={n} "
            "(the stencil accuracy theorem requires it)"
        )
    if ("eps" in job) == ("eps_rel" in job):
        raise ConfigError("set exactly one of job.eps (absolute) or job.eps_rel "
                          "(relative to the analytic value)")
    trials = run.get("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("run.trials must be an integer >= 1")
    seed = run.get("seed", qae_table.get("seed"))
    if seed is None:
        raise ConfigError("run.seed (or qae.seed) is required for reproducibility")
    fmt = run.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"run.format must be 'json' or 'csv', got {fmt!r}")
    dist_kind = dist.get("kind", "normal")
    if dist_kind not in ("normal", "uniform", "file"):
        raise ConfigError(
            f"distribution.kind must be 'normal', 'uniform', or 'file', got {dist_kind!r}"
        )
    if dist_kind == "file" and not dist.get("path"):
        raise ConfigError("distribution.kind = 'file' needs distribution.path")
    levels = dist.get("levels", 12)
    if not isinstance(levels, int) or levels < 1:
        raise ConfigError("distribution.levels must be an integer >= 1")

    try:
        qae = QAEConfig(
            variant=qae_table.get("variant", "mlae"),
            delta=qae_table.get("delta", 0.01),
            shots_per_depth=qae_table.get("shots_per_depth"),
            seed=int(seed),
            repeats=qae_table.get("repeats", 1),
        )
    except ValueError as exc:
        raise ConfigError(f"[qae]: {exc}") from exc
    return ExperimentConfig(
        model=model,
        job=job,
        distribution=dist,
        calibration=calib,
        qae=qae,
        trials=trials,
        seed=int(seed),
        output=run.get("output"),
        format=fmt,
    )


@dataclass(frozen=True)
class Problem:
    """Resolved model: integrand with declarations, grid, and the oracle."""

    integrand: object
    dist: DiscreteDistribution
    x: float
    m: int
    eps: float
    analytic: float
    label: str
    smooth_f: bool
    sigma: float


def _build_distribution(config, default_levels):
    dist_cfg = config.distribution
    kind = dist_cfg.get("kind", "normal")
    levels = int(dist_cfg.get("levels", default_levels))
    truncation = float(dist_cfg.get("truncation", 6.0))
    if kind == "normal":
        return discretize_standard_normal(levels, truncation=truncation)
    if kind == "uniform":
        return discretize_uniform(levels, truncation=truncation)
    return distribution_from_csv(dist_cfg["path"])


def _build_black_scholes(config, m, eps_request):
    model_cfg = config.model
    try:
        model = BlackScholesModel(
            P0=float(model_cfg.get("P0", 100.0)),
            sigma=float(model_cfg.get("sigma", 0.2)),
            r=float(model_cfg.get("r", 0.05)),
            T=float(model_cfg.get("T", 1.0)),
            K=float(model_cfg.get("K", 100.0)),
            payoff=model_cfg.get("payoff", "call"),
        )
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc
    parameter = model_cfg.get("parameter", "P0")
    window = model_cfg.get("x_window")
    if window is not None:
        window = (float(window[0]), float(window[1]))
    s_bound = float(config.distribution.get("truncation", 6.0))
    try:
        analytic = analytic_greek(model, parameter, m)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    eps = eps_request if isinstance(eps_request, float) else None
    if eps is None:
        eps = config.job["eps_rel"] * abs(analytic)
        if eps == 0:
            raise ConfigError("eps_rel scaling needs a nonzero analytic value")
    calib = config.calibration
    b_override = model_cfg.get("B_override")
    try:
        integrand = make_greek_integrand(model, parameter, x_window=window,
                                         s_bound=s_bound,
                                         b_override=b_override)
        floor_cfg = calib.get("deriv_floor", "auto")
        if floor_cfg == "auto":
            floor = call_slope_bound(model, s_bound) if model.payoff == "call" else 0.0
        else:
            floor = float(floor_cfg)
        fitted = calibrate_gevrey(
            model, parameter,
            window if window is not None else (0.5 * model.P0, 1.5 * model.P0),
            m, eps,
            headroom=float(calib.get("headroom", 2.0)),
            scan_points=int(calib.get("scan_points", 257)),
            deriv_floor=floor,
        )
    except (ValueError, NotImplementedError) as exc:
        raise ConfigError(str(exc)) from exc
    if model.payoff == "call":
        integrand = integrand.with_smoothness(f_gevrey=fitted.spec,
                                              v_gevrey=fitted.spec)
    else:
        # A digital payoff is a step in s; no x-smoothness is declared, so
        # the smooth route refuses it while V's declaration stands.
        integrand = integrand.with_smoothness(v_gevrey=fitted.spec)
    x = float(config.job.get("x", getattr(model, parameter)))
    return Problem(
        integrand=integrand,
        dist=_build_distribution(config, 12),
        x=x,
        m=m,
        eps=eps,
        analytic=analytic,
        label=integrand.label,
        smooth_f=model.payoff == "call",
        sigma=fitted.spec.sigma,
    )


def _build_sine(config, m, eps_request):
    model_cfg = config.model
    amplitude = float(model_cfg.get("amplitude", 1.0))
    frequency = float(model_cfg.get("frequency", 1.0))
    try:
        integrand = make_sine_integrand(amplitude, frequency)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if "x" not in config.job:
        raise ConfigError("job.x is required for the sine model")
    x = float(config.job["x"])
    analytic = sine_derivative(amplitude, frequency, m, x)
    eps = eps_request if isinstance(eps_request, float) else None
    if eps is None:
        eps = config.job["eps_rel"] * abs(analytic)
        if eps == 0:
            raise ConfigError("eps_rel scaling needs a nonzero analytic value")
    return Problem(
        integrand=integrand,
        dist=_build_distribution(config, 4),
        x=x,
        m=m,
        eps=eps,
        analytic=analytic,
        label=integrand.label,
        smooth_f=True,
        sigma=integrand.f_gevrey.sigma,
    )


def build_problem(config, m=None, eps=None):
    """Resolve the configured model into an estimation-ready Problem.

    m and eps override the config (used by sweeps); eps must then be
    absolute.
    """
    m = config.job["m"] if m is None else m
    eps_request = float(eps) if eps is not None else (
        float(config.job["eps"]) if "eps" in config.job else None)
    if config.model["kind"] == "black_scholes":
        return _build_black_scholes(config, m, eps_request)
    return _build_sine(config, m, eps_request)


def job_for(config, problem, method=None, mode=None):
    try:
        return make_job(
            problem.integrand, problem.dist, problem.x, problem.m,
            problem.eps,
            method if method is not None else config.job["method"],
            mode=mode if mode is not None else config.job.get("mode", "threshold"),
            n=config.job.get("n") if method is None else None,
            h=config.job.get("h") if method is None else None,
            qae=config.qae,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _json_bytes(payload):
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()


def _estimate_payload(config, problem, job, y, p_estimates, template):
    errors = np.abs(y - problem.analytic)
    within = errors <= 3.0 * problem.eps
    pass3eps = int(within.sum())
    passed = pass3eps >= math.ceil(PASS_FRACTION * config.trials)
    return {
        "schema": ESTIMATE_SCHEMA,
        "label": problem.label,
        "method": job.method,
        "m": job.m,
        "x": job.x,
        "eps": job.eps,
        "n": job.n,
        "h": job.h,
        "trials": config.trials,
        "seed": config.seed,
        "yTilde": [float(v) for v in y],
        "pTilde": [float(v) for v in p_estimates],
        "pTrue": template.p_true,
        "oracleCalls": {k: int(v) for k, v in template.oracle_calls.items()},
        "oracleCallsPerInvocation": {
            k: int(v) for k, v in template.oracle_calls_per_invocation.items()},
        "groverCalls": int(template.grover_calls),
        "qubitReport": int(template.qubit_report),
        "errorBudget": {
            "stencilResidual": template.error_budget["stencil_residual"],
            "quantization": template.error_budget["quantization"],
            "qae": template.error_budget["qae"],
            "eps": job.eps,
        },
        "epsAmp": template.eps_amp,
        "normalizer": template.normalizer,
        "analytic": problem.analytic,
        "absErrors": [float(v) for v in errors],
        "pass3eps": pass3eps,
        "passed": bool(passed),
        "notes": list(template.notes),
    }


def _estimate_csv(payload):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "yTilde", "pTilde", "absError", "within3eps"])
    for t, (yv, pv, ev) in enumerate(zip(payload["yTilde"], payload["pTilde"],
                                         payload["absErrors"])):
        writer.writerow([t, repr(yv), repr(pv), repr(ev),
                         int(ev <= 3.0 * payload["eps"])])
    return buf.getvalue().encode()


def run_experiment(config):
    """Execute the configured job; returns (exit_code, output_bytes).

    Exit codes: 0 on success, 2 when fewer than 95% of trials land within
    3*eps of the analytic value.  Config problems raise ConfigError (the
    command line maps them to exit 1).
    """
    problem = build_problem(config)
    job = job_for(config, problem)
    y, p_estimates, template = run_trials(job, config.trials, config.seed)
    payload = _estimate_payload(config, problem, job, y, p_estimates, template)
    blob = _estimate_csv(payload) if config.format == "csv" else _json_bytes(payload)
    if config.output:
        with open(config.output, "wb") as fh:
            fh.write(blob)
    return (0 if payload["passed"] else 2), blob


def _applicable_cells(problem):
    if problem.smooth_f:
        return (("naive_smooth", "minimal"),
                ("naive_smooth", "threshold"),
                ("sum_in_qae", "threshold"))
    return (("naive_nonsmooth", "threshold"),
            ("sum_in_qae", "threshold"))


SWEEP_COLUMNS = [
    "method", "mode", "eps", "trial", "yTilde", "absError", "within3eps",
    "pTrue", "epsAmp", "groverCalls", "O_F", "O_S", "O_coef", "O_sign",
    "qubitReport", "n", "h",
]


def run_sweep(config, eps_list, methods=None, trials=None):
    """Rows of per-trial results over (method, eps); returns (rows, csv bytes).

    eps values are absolute.  Cell seeds derive from the run seed and the
    cell index, so adding cells never perturbs earlier ones.
    """
    if not eps_list:
        raise ConfigError("sweep needs a nonempty eps list")
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ConfigError("sweep eps values must be positive")
    trials = config.trials if trials is None else trials
    rows = []
    base_problem = build_problem(config, eps=eps_list[0])
    cells = methods if methods is not None else _applicable_cells(base_problem)
    for cell_index, (method, mode) in enumerate(cells):
        for eps_index, eps in enumerate(eps_list):
            problem = build_problem(config, eps=eps)
            job = job_for(config, problem, method=method, mode=mode)
            seed = [config.seed, cell_index, eps_index]
            y, _, template = run_trials(job, trials, seed)
            errors = np.abs(y - problem.analytic)
            for t in range(trials):
                rows.append({
                    "method": method,
                    "mode": mode,
                    "eps": eps,
                    "trial": t,
                    "yTilde": float(y[t]),
                    "absError": float(errors[t]),
                    "within3eps": int(errors[t] <= 3.0 * eps),
                    "pTrue": template.p_true,
                    "epsAmp": template.eps_amp,
                    "groverCalls": template.grover_calls,
                    "O_F": template.oracle_calls["O_F"],
                    "O_S": template.oracle_calls["O_S"],
                    "O_coef": template.oracle_calls["O_coef"],
                    "O_sign": template.oracle_calls["O_sign"],
                    "qubitReport": template.qubit_report,
                    "n": job.n,
                    "h": job.h,
                })
    return rows, _rows_to_csv(SWEEP_COLUMNS, rows)


def _rows_to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for col in columns:
            value = row.get(col, "")
            out.append(repr(value) if isinstance(value, float) else value)
        writer.writerow(out)
    return buf.getvalue().encode()


TABLE1_COLUMNS = [
    "row", "method", "mode", "eps", "n", "h", "OF_total",
    "OF_per_invocation", "groverCalls", "qubitReport", "pTrue", "yTilde",
    "absError", "slope", "recommended", "agreement",
]


def table1_report(config, eps_list, qubit_budget="small"):
    """Method-comparison table over an eps ladder.

    One data row per (cell, eps) with measured integrand-oracle counts;
    one summary row per cell with the fitted log-log slope of O_F against
    1/eps; one recommendation row stating the selector's ranked choice
    and whether the measured winner (lowest O_F at every eps) agrees.
    Returns (rows, csv bytes).
    """
    eps_list = sorted(float(e) for e in eps_list)
    if len(eps_list) < 4:
        raise ConfigError("table1 needs at least 4 eps points for slope fits")
    if any(e <= 0 for e in eps_list):
        raise ConfigError("table1 eps values must be positive")
    if qubit_budget not in ("large", "small"):
        raise ConfigError("qubit_budget must be 'large' or 'small'")
    base_problem = build_problem(config, eps=eps_list[0])
    cells = _applicable_cells(base_problem)
    rows = []
    of_totals = {}
    for cell_index, (method, mode) in enumerate(cells):
        logs = []
        for eps_index, eps in enumerate(eps_list):
            problem = build_problem(config, eps=eps)
            job = job_for(config, problem, method=method, mode=mode)
            seed = [config.seed, cell_index, eps_index]
            y, _, template = run_trials(job, 1, seed)
            of_total = template.oracle_calls["O_F"]
            of_totals[(method, mode, eps)] = of_total
            logs.append((math.log(1.0 / eps), math.log(of_total)))
            rows.append({
                "row": "data",
                "method": method,
                "mode": mode,
                "eps": eps,
                "n": job.n,
                "h": job.h,
                "OF_total": of_total,
                "OF_per_invocation": template.oracle_calls_per_invocation["O_F"],
                "groverCalls": template.grover_calls,
                "qubitReport": template.qubit_report,
                "pTrue": template.p_true,
                "yTilde": float(y[0]),
                "absError": float(abs(y[0] - problem.analytic)),
            })
        xs, ys = zip(*logs)
        slope = float(np.polyfit(xs, ys, 1)[0])
        rows.append({"row": "cell", "method": method, "mode": mode,
                     "slope": slope})
    ranking = select_method(base_problem.smooth_f, qubit_budget,
                            config.job["m"], base_problem.sigma)
    recommended = ranking[0]
    # The winner comparison only ranks cells the budget admits: minimal
    # mode needs strictly more qubits than threshold mode, so it is out
    # of scope for a small budget.  Agreement holds when the measured
    # lowest-O_F eligible cell is among the ranked candidates at every
    # eps (a ranked pair means either winning is consistent).
    eligible = [cell for cell in cells
                if qubit_budget == "large" or cell[1] != "minimal"]
    agreement = all(
        min(eligible, key=lambda cell: of_totals[(cell[0], cell[1], eps)])
        in ranking
        for eps in eps_list
    )
    rows.append({
        "row": "recommendation",
        "method": recommended[0],
        "mode": recommended[1],
        "recommended": "|".join(f"{mth}:{md}" for mth, md in ranking),
        "agreement": int(agreement),
    })
    return rows, _rows_to_csv(TABLE1_COLUMNS, rows)


def audit_payload(reports):
    """JSON-ready structure for a list of AuditReports."""
    return {
        "schema": AUDIT_SCHEMA,
        "reports": [
            {
                "lemma": rep.lemma,
                "grid": rep.grid_description,
                "checks": rep.checks,
                "violations": [
                    {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in violation.items()}
                    for violation in rep.violations
                ],
                "worstMargin": rep.worst_margin,
                "passed": rep.passed,
            }
            for rep in reports
        ],
        "passed": all(rep.passed for rep in reports),
    }
