"""Maximum-likelihood fitting, standard errors and goodness-of-fit measures.

The optimizer is a full Newton ascent on the (beta, delta) parametrization.
When the negative Hessian is not positive definite a ridge is added and
escalated by x10 until it factors; each proposed step is halved (up to 30
times) until the log-likelihood improves, and if the ridged Newton direction
stalls the outer-product-of-gradients (BHHH) matrix is tried instead. The
accepted iterate sequence is therefore monotone in the log-likelihood and the
whole fit is deterministic.

Standard errors come from the observed information (inverse negative Hessian)
at the optimum, mapped to the (coefficients, interior cut-points) scale by
the delta method so cut-point rows can be reported the way applied tables
print them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from . import likelihood as lk
from .data import Dataset
from .distributions import norm_cdf
from .likelihood import ModelSpec, ParamVector


class EstimationError(Exception):
    """The model cannot be estimated on this data."""


class SeparationError(EstimationError):
    """A covariate separates the response; the MLE does not exist."""


@dataclass
class FitOptions:
    max_iter: int = 100
    grad_tol: float = 1e-8
    step_tol: float = 1e-10
    ridge_init: float = 1e-6
    ridge_factor: float = 10.0
    max_halvings: int = 30
    verbose: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if min(self.grad_tol, self.step_tol, self.ridge_init) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class FitResult:
    spec: ModelSpec
    params: ParamVector
    se: np.ndarray
    vcov: np.ndarray
    loglik_fit: float
    loglik_0: float
    lr_stat: float | None
    lr_df: int | None
    lr_pvalue: float | None
    mcfadden_r2: float
    hit_rate: float
    iterations: int
    converged: bool
    clamp_count: int
    n_obs: int
    history: list[float] = field(default_factory=list)

    @property
    def cutpoints(self) -> np.ndarray:
        return self.params.cutpoints()


def _neg_hessian_cholesky(H: np.ndarray):
    try:
        return linalg.cho_factor(-H, lower=True)
    except linalg.LinAlgError:
        return None


def _ridged_direction(H: np.ndarray, grad: np.ndarray, opts: FitOptions) -> np.ndarray | None:
    """Solve (-H + tau I) s = grad with the smallest ridge tau that factors."""
    m = grad.size
    eye = np.eye(m)
    tau = 0.0
    for _ in range(40):
        try:
            factor = linalg.cho_factor(-H + tau * eye, lower=True)
            step = linalg.cho_solve(factor, grad)
            if np.all(np.isfinite(step)):
                return step
        except linalg.LinAlgError:
            pass
        tau = opts.ridge_init if tau == 0.0 else tau * opts.ridge_factor
    return None


def _bhhh_direction(scores: np.ndarray, grad: np.ndarray) -> np.ndarray | None:
    opg = scores.T @ scores + 1e-10 * np.eye(grad.size)
    try:
        step = linalg.cho_solve(linalg.cho_factor(opg, lower=True), grad)
    except linalg.LinAlgError:
        return None
    return step if np.all(np.isfinite(step)) else None


def _validate_fit_inputs(spec: ModelSpec, data: Dataset) -> None:
    counts = np.bincount(data.y, minlength=spec.J + 1)[1:spec.J + 1]
    for j, c in enumerate(counts, start=1):
        if c == 0:
            raise EstimationError(f"response category {j} never occurs in the data")
    if data.n <= spec.n_params:
        raise EstimationError(
            f"need more observations than parameters: n = {data.n}, parameters = {spec.n_params}"
        )
    if spec.intercept and not np.all(data.X[:, 0] == 1.0):
        raise EstimationError("spec declares an intercept but the first design column is not all ones")


def _maximize(spec: ModelSpec, data: Dataset, opts: FitOptions):
    theta = lk.initial_params(spec, data).flat
    k = spec.k

    def evaluate(t):
        p = ParamVector.from_flat(t, k)
        ll, clamps = lk._loglik_clamped(spec, p, data)
        scores = lk.score_matrix(spec, p, data)
        grad = scores.sum(axis=0)
        H = lk.hess_loglik(spec, p, data)
        return ll, grad, H, scores, clamps

    ll, grad, H, scores, clamps = evaluate(theta)
    history = [ll]
    iterations = 0
    converged = False

    for it in range(1, opts.max_iter + 1):
        if np.max(np.abs(grad)) < opts.grad_tol:
            converged = True
            break

        accepted = None
        step_norm = 0.0
        newton = _ridged_direction(H, grad, opts)
        for direction in (newton, "bhhh"):
            if direction is None:
                continue
            if isinstance(direction, str):
                direction = _bhhh_direction(scores, grad)
                if direction is None:
                    continue
            alpha = 1.0
            for halving in range(opts.max_halvings + 1):
                cand = theta + alpha * direction
                cand_ll, _ = lk._loglik_clamped(spec, ParamVector.from_flat(cand, k), data)
                # near the optimum a full Newton step may move the
                # log-likelihood by less than float resolution; accept it
                # within the 1e-12 monotonicity slack so the gradient can
                # still collapse to the tolerance
                acceptable = cand_ll > ll or (halving == 0 and cand_ll >= ll - 1e-12)
                if math.isfinite(cand_ll) and acceptable:
                    accepted = cand
                    step_norm = float(np.max(np.abs(alpha * direction)))
                    break
                alpha *= 0.5
            if accepted is not None:
                break
        if accepted is None:
            break

        theta = accepted
        iterations = it
        ll, grad, H, scores, clamps = evaluate(theta)
        history.append(ll)
        if opts.verbose:
            print(f"iter {it:3d}  loglik {ll:.8f}  |grad| {np.max(np.abs(grad)):.3e}")

        beta_max = float(np.max(np.abs(theta[:k])))
        if beta_max > 30.0:
            worst = int(np.argmax(np.abs(theta[:k])))
            name = data.column_names[worst] if worst < len(data.column_names) else f"beta[{worst}]"
            raise SeparationError(
                f"coefficient for {name!r} diverged past |30| while the log-likelihood is still "
                "improving; the data appear to be perfectly separated"
            )
        if step_norm < opts.step_tol:
            break

    if not converged:
        converged = bool(np.max(np.abs(grad)) < opts.grad_tol)
    if converged and _neg_hessian_cholesky(H) is None:
        converged = False
    return theta, ll, grad, H, clamps, iterations, bool(converged), history


def _report_space_vcov(spec: ModelSpec, params: ParamVector, H: np.ndarray) -> np.ndarray:
    """Inverse observed information, mapped to (beta, cut-point) coordinates."""
    factor = _neg_hessian_cholesky(H)
    if factor is not None:
        vcov_flat = linalg.cho_solve(factor, np.eye(H.shape[0]))
    else:
        vcov_flat = np.linalg.pinv(-H)
    m_free = spec.J - 2
    if m_free == 0:
        return vcov_flat
    jac = np.eye(spec.k + m_free)
    jac[spec.k:, spec.k:] = lk._spacing_jacobian(params.delta)
    return jac @ vcov_flat @ jac.T


def fit_ml(spec: ModelSpec, data: Dataset, opts: FitOptions | None = None,
           _with_baseline: bool = True) -> FitResult:
    """Fit a binary/ordinal model by Newton ascent on the log-likelihood.

    Raises :class:`EstimationError` when a response category is absent or the
    sample is smaller than the parameter count, and :class:`SeparationError`
    when a coefficient diverges. Non-convergence is not an exception: the
    result comes back with ``converged=False`` and diagnostics intact.
    """
    opts = opts or FitOptions()
    _validate_fit_inputs(spec, data)

    theta, ll, grad, H, clamps, iterations, converged, history = _maximize(spec, data, opts)
    params = ParamVector.from_flat(theta, spec.k)
    vcov = _report_space_vcov(spec, params, H)
    se = np.sqrt(np.clip(np.diag(vcov), 0.0, None))

    intercept_only = spec.intercept and spec.k == 1
    if intercept_only or not _with_baseline:
        ll0 = ll if intercept_only else math.nan
    else:
        ll0 = fit_intercept_only(spec, data, opts).loglik_fit

    lr_df = (spec.k - 1) if spec.intercept else spec.k
    # a non-converged fit can sit below the baseline; no LR test then
    if lr_df > 0 and math.isfinite(ll0) and ll >= ll0 - 1e-8:
        lr_stat, lr_pvalue = lr_test(ll0, ll, lr_df)
    else:
        lr_stat = lr_pvalue = lr_df = None

    r2 = mcfadden_r2(ll0, ll) if math.isfinite(ll0) and ll0 < 0 else 0.0
    hr = hit_rate(spec, params, data)

    return FitResult(
        spec=spec, params=params, se=se, vcov=vcov,
        loglik_fit=ll, loglik_0=ll0,
        lr_stat=lr_stat, lr_df=lr_df, lr_pvalue=lr_pvalue,
        mcfadden_r2=r2, hit_rate=hr,
        iterations=iterations, converged=converged,
        clamp_count=clamps, n_obs=data.n, history=history,
    )


def fit_intercept_only(spec: ModelSpec, data: Dataset, opts: FitOptions | None = None) -> FitResult:
    """Fit the same family/link with the design reduced to an intercept."""
    reduced = Dataset(
        y=data.y, X=np.ones((data.n, 1)), column_names=["intercept"], J=data.J
    )
    reduced_spec = ModelSpec(family=spec.family, link=spec.link, J=spec.J, k=1, intercept=True)
    return fit_ml(reduced_spec, reduced, opts)


def lr_test(loglik_0: float, loglik_fit: float, df: int) -> tuple[float, float]:
    """Likelihood-ratio statistic -2(lnL0 - lnLfit) and its chi-square p-value."""
    if df < 1:
        raise ValueError("the likelihood-ratio test needs at least one restriction")
    if loglik_fit < loglik_0 - 1e-8:
        raise ValueError(
            f"fitted log-likelihood {loglik_fit} is below the intercept-only value {loglik_0}"
        )
    stat = max(0.0, -2.0 * (loglik_0 - loglik_fit))
    pvalue = float(stats.chi2.sf(stat, df))
    return stat, pvalue


def mcfadden_r2(loglik_0: float, loglik_fit: float) -> float:
    """McFadden's pseudo R-square, 1 - lnLfit/lnL0."""
    if loglik_0 == 0.0:
        raise ValueError("intercept-only log-likelihood must be negative")
    return max(0.0, 1.0 - loglik_fit / loglik_0)


def predict_prob(spec: ModelSpec, params: ParamVector, X_new: np.ndarray) -> np.ndarray:
    """n x J matrix of cell probabilities; each row sums to one exactly.

    Computed as first differences of the link cdf over the cut-points, so
    the row sum telescopes to F(inf) - F(-inf) = 1.
    """
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != spec.k:
        raise ValueError(f"design has {X_new.shape[1]} columns, spec declares k = {spec.k}")
    gamma = params.cutpoints()
    xb = X_new @ params.beta
    cdf_at_cuts = spec.link.cdf(gamma[None, :] - xb[:, None])
    return np.diff(cdf_at_cuts, axis=1)


def hit_rate(spec: ModelSpec, params: ParamVector, data: Dataset) -> float:
    """Percentage of observations whose observed category has the highest
    predicted probability; ties go to the lowest category index."""
    probs = predict_prob(spec, params, data.X)
    predicted = np.argmax(probs, axis=1) + 1
    return float(np.mean(predicted == data.y) * 100.0)


def _stars(p: float) -> str:
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def coefficient_rows(fit: FitResult, names: list[str]) -> list[dict]:
    """One dict per coefficient/cut-point: estimate, se, z, p, stars."""
    spec = fit.spec
    if len(names) != spec.k:
        raise ValueError(f"got {len(names)} names for {spec.k} coefficients")
    labels = list(names) + [f"cut-point {j}" for j in range(2, spec.J)]
    estimates = np.concatenate([fit.params.beta, fit.cutpoints[2:spec.J]])
    rows = []
    for label, est, se in zip(labels, estimates, fit.se):
        if se > 0:
            z = est / se
            p = 2.0 * float(norm_cdf(-abs(z)))
        else:
            z = math.inf if est != 0 else 0.0
            p = 0.0 if est != 0 else 1.0
        rows.append({
            "name": label,
            "estimate": float(est),
            "se": float(se),
            "z": float(z),
            "p": float(p),
            "stars": _stars(p),
        })
    return rows


def fit_report_dict(fit: FitResult, names: list[str]) -> dict:
    """Machine-readable report mirroring the FitResult fields."""
    return {
        "model": {
            "family": fit.spec.family,
            "link": fit.spec.link.value,
            "J": fit.spec.J,
            "k": fit.spec.k,
            "intercept": fit.spec.intercept,
        },
        "coefficients": coefficient_rows(fit, names),
        "loglik_fit": fit.loglik_fit,
        "loglik_0": fit.loglik_0,
        "lr_stat": fit.lr_stat,
        "lr_df": fit.lr_df,
        "lr_pvalue": fit.lr_pvalue,
        "mcfadden_r2": fit.mcfadden_r2,
        "hit_rate": fit.hit_rate,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "clamp_count": fit.clamp_count,
        "n_obs": fit.n_obs,
    }


def summary_table(fit: FitResult, names: list[str]) -> str:
    """Aligned plain-text estimation report (4-decimal rounding).

    Significance stars: ** for p < 0.05, * for p < 0.10 (two-sided normal).
    """
    rows = coefficient_rows(fit, names)
    name_width = max(12, max(len(r["name"]) for r in rows))
    header = (
        f"{'':{name_width}}  {'estimate':>10}  {'se':>10}  {'z':>10}  {'p':>8}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r['name']:{name_width}}  {r['estimate']:>10.4f}  {r['se']:>10.4f}  "
            f"{r['z']:>10.4f}  {r['p']:>8.4f}  {r['stars']}"
        )
    lines.append("-" * len(header))
    if fit.lr_stat is not None:
        lines.append(
            f"LR chi2({fit.lr_df}) = {fit.lr_stat:.4f}   p = {fit.lr_pvalue:.4f}"
        )
    else:
        lines.append("LR chi2: not defined (no slope restrictions)")
    lines.append(f"McFadden R2 = {fit.mcfadden_r2:.4f}")
    lines.append(f"hit rate = {fit.hit_rate:.4f}%")
    lines.append(
        f"n = {fit.n_obs}   loglik = {fit.loglik_fit:.4f}   "
        f"intercept-only loglik = {fit.loglik_0:.4f}"
    )
    lines.append(
        f"iterations = {fit.iterations}   converged = {str(fit.converged).lower()}   "
        f"clamped cells = {fit.clamp_count}"
    )
    lines.append("** p < 0.05, * p < 0.10")
    return "\n".join(lines) + "\n"
