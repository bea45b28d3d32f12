"""Log-likelihood, analytic gradient and Hessian for binary/ordinal models.

Model: a latent utility z = x'beta + eps falls in category j when
gamma_{j-1} < z <= gamma_j, with gamma_0 = -inf, gamma_1 = 0 and
gamma_J = +inf. The interior cut-points are parametrized through their log
spacings, delta_j = log(gamma_j - gamma_{j-1}) for j = 2..J-1, so any real
delta vector yields a strictly increasing cut-point sequence and the
optimizer can run unconstrained.

Cell probabilities F(gamma_j - x'b) - F(gamma_{j-1} - x'b) are evaluated as a
log-difference in whichever tail of the link distribution has the smaller
magnitude; the textbook subtraction of two cdf values loses all precision
once both arguments are beyond ~6. Cells whose log-probability falls below
-745 (the smallest representable log) are clamped there and counted, so a
line search can survive extreme parameter values instead of dying on -inf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .distributions import Link

FAMILY_BINARY = "binary"
FAMILY_ORDINAL = "ordinal"

_LOG_FLOOR = -745.0


@dataclass
class ModelSpec:
    """Family, link and dimensions of a model.

    ``binary`` requires J = 2. ``ordinal`` is intended for J >= 3 but J = 2
    is accepted (the cut-point vector is then empty and the model coincides
    with the binary one).
    """

    family: str
    link: Link
    J: int
    k: int
    intercept: bool = True

    def __post_init__(self):
        if self.family not in (FAMILY_BINARY, FAMILY_ORDINAL):
            raise ValueError(f"unknown family {self.family!r}")
        self.link = Link(self.link)
        self.intercept = bool(self.intercept)
        if self.family == FAMILY_BINARY and self.J != 2:
            raise ValueError(f"binary family requires J = 2, got J = {self.J}")
        if self.J < 2:
            raise ValueError(f"need at least two response categories, got J = {self.J}")
        if self.k < 1:
            raise ValueError("need at least one design column")

    @property
    def n_params(self) -> int:
        return self.k + self.J - 2

    @classmethod
    def for_dataset(cls, family: str, link, data: Dataset, intercept: bool = True) -> "ModelSpec":
        return cls(family=family, link=Link(link), J=data.J, k=data.X.shape[1], intercept=intercept)


@dataclass
class ParamVector:
    """Coefficients plus log spacings of the interior cut-points."""

    beta: np.ndarray
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        self.delta = np.atleast_1d(np.asarray(self.delta, dtype=float)) if np.size(self.delta) else np.zeros(0)

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.beta, self.delta])

    @classmethod
    def from_flat(cls, theta: np.ndarray, k: int) -> "ParamVector":
        theta = np.asarray(theta, dtype=float)
        return cls(beta=theta[:k], delta=theta[k:])

    def cutpoints(self) -> np.ndarray:
        return cutpoints_from_delta(self.delta)


def cutpoints_from_delta(delta) -> np.ndarray:
    """Expand log spacings into the full cut-point vector.

    Returns (-inf, 0, gamma_2, ..., gamma_{J-1}, +inf) of length J + 1 where
    gamma_j = gamma_{j-1} + exp(delta_j); strictly increasing by construction.
    """
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if delta.size and not np.all(np.isfinite(delta)):
        raise ValueError("delta must be finite")
    interior = np.cumsum(np.exp(delta)) if delta.size else np.zeros(0)
    return np.concatenate([[-np.inf, 0.0], interior, [np.inf]])


def _interval_logprob(link: Link, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """log(F(b) - F(a)) elementwise for a < b, tail-stable.

    Evaluates in the left tail when the interval midpoint is negative and in
    the right (survival) tail otherwise, so the difference is never formed
    from two cdf values saturating at the same end. Returns the clamped
    log-probabilities and the number of clamped cells.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        use_left = b <= -a
        lfa = link.log_cdf(a)
        lfb = link.log_cdf(b)
        left = lfb + np.log1p(-np.exp(lfa - lfb))
        lsa = link.log_cdf(-a)
        lsb = link.log_cdf(-b)
        right = lsa + np.log1p(-np.exp(lsb - lsa))
        out = np.where(use_left, left, right)
    n_clamped = int(np.sum(out < _LOG_FLOOR))
    if n_clamped:
        out = np.maximum(out, _LOG_FLOOR)
    return out, n_clamped


def _check_dimensions(spec: ModelSpec, params: ParamVector, data: Dataset) -> None:
    if data.J != spec.J:
        raise ValueError(f"data has J = {data.J} categories but spec declares J = {spec.J}")
    if data.X.shape[1] != spec.k:
        raise ValueError(f"design has {data.X.shape[1]} columns but spec declares k = {spec.k}")
    if params.beta.shape != (spec.k,):
        raise ValueError(f"beta has shape {params.beta.shape}, expected ({spec.k},)")
    if params.delta.shape != (spec.J - 2,):
        raise ValueError(f"delta has length {params.delta.size}, expected J - 2 = {spec.J - 2}")


def _bounds(params: ParamVector, data: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-observation (a, b) = (gamma_{y-1} - x'b, gamma_y - x'b) and xb."""
    gamma = cutpoints_from_delta(params.delta)
    xb = data.X @ params.beta
    a = gamma[data.y - 1] - xb
    b = gamma[data.y] - xb
    return a, b, xb


def cell_logprob(spec: ModelSpec, xb: float, j: int, gamma: np.ndarray) -> float:
    """log P(y = j) for linear index xb under cut-point vector gamma.

    ``gamma`` is the full extended vector (-inf, gamma_1, ..., +inf); it is
    taken as given so shifted/unidentified configurations can be evaluated
    directly.
    """
    gamma = np.asarray(gamma, dtype=float)
    if not 1 <= j <= gamma.size - 1:
        raise ValueError(f"category {j} outside 1..{gamma.size - 1}")
    val, _ = _interval_logprob(spec.link, gamma[j - 1] - xb, gamma[j] - xb)
    return float(val)


def _loglik_clamped(spec: ModelSpec, params: ParamVector, data: Dataset) -> tuple[float, int]:
    a, b, _ = _bounds(params, data)
    logp, n_clamped = _interval_logprob(spec.link, a, b)
    return float(np.sum(logp)), n_clamped


def loglik(spec: ModelSpec, params: ParamVector, data: Dataset) -> float:
    """Sum of per-observation cell log-probabilities."""
    _check_dimensions(spec, params, data)
    return _loglik_clamped(spec, params, data)[0]


def _spacing_jacobian(delta: np.ndarray) -> np.ndarray:
    """d gamma_j / d delta_m = exp(delta_m) for m <= j; lower triangular."""
    m = delta.size
    if m == 0:
        return np.zeros((0, 0))
    return np.tril(np.tile(np.exp(delta), (m, 1)))


def _pdf_ratios(spec: ModelSpec, a, b, logp) -> tuple[np.ndarray, np.ndarray]:
    """f(a)/p and f(b)/p computed in log space; zero at infinite bounds."""
    link = spec.link
    with np.errstate(invalid="ignore", over="ignore"):
        r_a = np.exp(link.log_pdf(a) - logp)
        r_b = np.exp(link.log_pdf(b) - logp)
    return r_a, r_b


def score_matrix(spec: ModelSpec, params: ParamVector, data: Dataset) -> np.ndarray:
    """Per-observation score contributions, shape (n, k + J - 2).

    Row sums reproduce ``grad_loglik``; the outer-product of this matrix is
    the BHHH information approximation used as an optimizer fallback.
    """
    _check_dimensions(spec, params, data)
    a, b, _ = _bounds(params, data)
    logp, _ = _interval_logprob(spec.link, a, b)
    r_a, r_b = _pdf_ratios(spec, a, b, logp)

    scores_beta = -data.X * (r_b - r_a)[:, None]
    m_free = spec.J - 2
    if m_free == 0:
        return scores_beta

    y = data.y
    scores_gamma = np.zeros((data.n, m_free))
    upper_free = (y >= 2) & (y <= spec.J - 1)  # gamma_y is a free cut-point
    lower_free = y >= 3                        # gamma_{y-1} is a free cut-point
    scores_gamma[upper_free, y[upper_free] - 2] = r_b[upper_free]
    scores_gamma[lower_free, y[lower_free] - 3] -= r_a[lower_free]
    scores_delta = scores_gamma @ _spacing_jacobian(params.delta)
    return np.hstack([scores_beta, scores_delta])


def grad_loglik(spec: ModelSpec, params: ParamVector, data: Dataset) -> np.ndarray:
    """Analytic gradient of ``loglik`` in (beta, delta) coordinates."""
    return score_matrix(spec, params, data).sum(axis=0)


def _curvature_terms(spec: ModelSpec, a, b, r_a, r_b):
    """Second derivatives of log p w.r.t. the interval bounds (a, b)."""
    if spec.link is Link.PROBIT:
        # d/dw phi(w) = -w phi(w); the infinite bounds contribute nothing
        with np.errstate(invalid="ignore"):
            da = np.where(np.isfinite(a), a * r_a, 0.0)
            db = np.where(np.isfinite(b), -b * r_b, 0.0)
    else:
        lam_a = spec.link.cdf(a)
        lam_b = spec.link.cdf(b)
        da = -r_a * (1.0 - 2.0 * lam_a)
        db = r_b * (1.0 - 2.0 * lam_b)
    d2aa = da - r_a * r_a
    d2bb = db - r_b * r_b
    d2ab = r_a * r_b
    return d2aa, d2bb, d2ab


def hess_loglik(spec: ModelSpec, params: ParamVector, data: Dataset) -> np.ndarray:
    """Analytic Hessian of ``loglik`` in (beta, delta) coordinates.

    Assembled from the curvature with respect to the interval bounds, mapped
    through the (linear) bound Jacobian and then the exp-spacing chain rule;
    symmetrized before returning.
    """
    _check_dimensions(spec, params, data)
    X, y, J, k = data.X, data.y, spec.J, spec.k
    a, b, _ = _bounds(params, data)
    logp, _ = _interval_logprob(spec.link, a, b)
    r_a, r_b = _pdf_ratios(spec, a, b, logp)
    d2aa, d2bb, d2ab = _curvature_terms(spec, a, b, r_a, r_b)

    w_beta = d2aa + d2bb + 2.0 * d2ab
    H_bb = X.T @ (X * w_beta[:, None])

    m_free = J - 2
    if m_free == 0:
        return 0.5 * (H_bb + H_bb.T)

    counts = np.arange(J + 2)  # bincount target length
    bb_by_cat = np.bincount(y, weights=d2bb, minlength=counts.size)
    aa_by_cat = np.bincount(y, weights=d2aa, minlength=counts.size)
    ab_by_cat = np.bincount(y, weights=d2ab, minlength=counts.size)

    H_gg = np.zeros((m_free, m_free))
    np.fill_diagonal(H_gg, bb_by_cat[2:J] + aa_by_cat[3:J + 1])
    for m in range(m_free - 1):
        H_gg[m, m + 1] = H_gg[m + 1, m] = ab_by_cat[m + 3]

    H_bg = np.zeros((k, m_free))
    t_upper = d2bb + d2ab
    t_lower = d2aa + d2ab
    for cat in range(2, J):
        mask = y == cat
        H_bg[:, cat - 2] -= X[mask].T @ t_upper[mask]
        mask = y == cat + 1
        H_bg[:, cat - 2] -= X[mask].T @ t_lower[mask]

    A = _spacing_jacobian(params.delta)
    grad_gamma = np.array([
        r_b[y == cat].sum() - r_a[y == cat + 1].sum() for cat in range(2, J)
    ])
    grad_delta = A.T @ grad_gamma
    H_dd = A.T @ H_gg @ A + np.diag(grad_delta)
    H_bd = H_bg @ A

    H = np.block([[H_bb, H_bd], [H_bd.T, H_dd]])
    return 0.5 * (H + H.T)


def initial_params(spec: ModelSpec, data: Dataset) -> ParamVector:
    """Starting values from the empirical cumulative category shares.

    The intercept is set to the link quantile of the observed P(y > 1) and
    the cut-point spacings to differences of share quantiles, so the start
    is always interior and an intercept-only fit starts at its optimum.
    """
    counts = np.bincount(data.y, minlength=spec.J + 1)[1:]
    cum_shares = np.cumsum(counts)[:-1] / data.n
    if np.any(cum_shares <= 0.0) or np.any(cum_shares >= 1.0):
        raise ValueError("every response category must appear at least once")
    q = spec.link.quantile(cum_shares)
    beta = np.zeros(spec.k)
    if spec.intercept:
        beta[0] = -q[0]
    delta = np.log(np.diff(q)) if spec.J > 2 else np.zeros(0)
    return ParamVector(beta=beta, delta=delta)
