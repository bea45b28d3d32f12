"""Gibbs sampling for binary and ordinal probit via data augmentation.

Each sweep draws the latent utilities z element-wise from normals truncated
to the interval their observed category dictates, then draws the coefficient
block from its conjugate multivariate normal full conditional
N((B0^-1 + X'X)^-1 (B0^-1 b0 + X'z), (B0^-1 + X'X)^-1). For the ordinal model
the transformed cut-points (log spacings, so order is preserved by
construction) move first in each sweep through a random-walk
Metropolis-Hastings step whose acceptance ratio uses the ordinal likelihood
with z integrated out, together with the cut-point prior.

Default priors are weakly informative: beta ~ N(0, 100 I) and each log
spacing ~ N(0, 25). With no data the samplers reproduce the prior.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import likelihood as lk
from .data import Dataset
from .distributions import Link, trunc_norm_draws
from .likelihood import FAMILY_ORDINAL, ModelSpec, ParamVector


@dataclass
class PriorSpec:
    """Normal prior on the coefficients and the transformed cut-points."""

    b0: np.ndarray | None = None
    B0: np.ndarray | None = None
    delta_var: float = 25.0

    def resolved(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        b0 = np.zeros(k) if self.b0 is None else np.atleast_1d(np.asarray(self.b0, dtype=float))
        B0 = 100.0 * np.eye(k) if self.B0 is None else np.asarray(self.B0, dtype=float)
        if b0.shape != (k,):
            raise ValueError(f"prior mean has shape {b0.shape}, expected ({k},)")
        if B0.shape != (k, k) or not np.allclose(B0, B0.T):
            raise ValueError("prior covariance must be a symmetric k x k matrix")
        try:
            linalg.cho_factor(B0)
        except linalg.LinAlgError:
            raise ValueError("prior covariance must be positive definite") from None
        if self.delta_var <= 0:
            raise ValueError("delta prior variance must be positive")
        return b0, B0


@dataclass
class ChainDraws:
    """Stored MCMC draws plus sampler metadata (burn-in rows included)."""

    beta: np.ndarray                  # (S, k)
    delta: np.ndarray                 # (S, J-2)
    param_names: list[str]
    burn: int
    accept_rate: float | None = None
    seed: int | None = None
    latent_z: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.beta.shape[0]

    def draws(self, include_burn: bool = False) -> np.ndarray:
        all_draws = np.hstack([self.beta, self.delta]) if self.delta.size else self.beta
        return all_draws if include_burn else all_draws[self.burn:]

    def save_csv(self, path) -> None:
        """Flat CSV, one row per draw (burn-in rows included), full precision."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.param_names)
            for row in self.draws(include_burn=True):
                writer.writerow([repr(float(v)) for v in row])


def _resolve_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    return rng, None


def _coef_sampler(X: np.ndarray, b0: np.ndarray, B0: np.ndarray):
    """Precompute the conjugate-normal pieces for the beta full conditional."""
    P0 = linalg.cho_solve(linalg.cho_factor(B0), np.eye(B0.shape[0]))
    precision = P0 + X.T @ X
    try:
        L = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        raise ValueError("posterior precision for beta is singular") from None
    P0b0 = P0 @ b0

    def draw(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        rhs = P0b0 + X.T @ z
        mean = linalg.cho_solve((L, True), rhs)
        noise = linalg.solve_triangular(L.T, rng.standard_normal(b0.size), lower=False)
        return mean + noise

    return draw


def _delta_names(J: int) -> list[str]:
    return [f"delta{j}" for j in range(2, J)]


def gibbs_binary_probit(data: Dataset, prior: PriorSpec | None = None,
                        S: int = 11000, burn: int = 1000, rng=0,
                        debug: bool = False) -> ChainDraws:
    """Data-augmentation Gibbs sampler for the binary probit model.

    ``rng`` may be a seed (recorded in the output) or a Generator. All S
    draws are stored; summaries discard the first ``burn``.
    """
    if data.J != 2:
        raise ValueError("gibbs_binary_probit needs binary (J = 2) data")
    if not S > burn >= 0:
        raise ValueError(f"need S > burn >= 0, got S = {S}, burn = {burn}")
    prior = prior or PriorSpec()
    rng, seed = _resolve_rng(rng)
    k = data.X.shape[1]
    b0, B0 = prior.resolved(k)
    draw_beta = _coef_sampler(data.X, b0, B0)

    success = data.y == 2
    lower = np.where(success, 0.0, -np.inf)
    upper = np.where(success, np.inf, 0.0)

    beta = np.zeros(k)
    beta_draws = np.empty((S, k))
    z = None
    for s in range(S):
        if data.n:
            z = trunc_norm_draws(data.X @ beta, lower, upper, rng)
            if debug:
                assert np.all(z[success] > 0.0) and np.all(z[~success] <= 0.0)
        else:
            z = np.zeros(0)
        beta = draw_beta(z, rng)
        beta_draws[s] = beta

    return ChainDraws(
        beta=beta_draws, delta=np.zeros((S, 0)),
        param_names=list(data.column_names), burn=burn,
        accept_rate=None, seed=seed,
        latent_z=None if z is None or not z.size else z,
    )


def gibbs_ordinal_probit(data: Dataset, prior: PriorSpec | None = None,
                         S: int = 11000, burn: int = 1000, mh_step: float = 0.1,
                         rng=0, debug: bool = False) -> ChainDraws:
    """Gibbs sampler for the ordinal probit with an MH block on the cut-points.

    The log spacings delta move jointly by a random walk with scale
    ``mh_step``; the acceptance ratio combines the z-marginalized ordinal
    likelihood at the current beta with the N(0, delta_var) prior.
    """
    if data.J == 2:
        raise ValueError("J = 2 data is binary; use gibbs_binary_probit")
    if data.J < 3:
        raise ValueError("ordinal sampler needs J >= 3 categories")
    if mh_step <= 0:
        raise ValueError(f"mh_step must be positive, got {mh_step}")
    if not S > burn >= 0:
        raise ValueError(f"need S > burn >= 0, got S = {S}, burn = {burn}")
    prior = prior or PriorSpec()
    rng, seed = _resolve_rng(rng)
    k = data.X.shape[1]
    b0, B0 = prior.resolved(k)
    draw_beta = _coef_sampler(data.X, b0, B0)
    spec = ModelSpec(family=FAMILY_ORDINAL, link=Link.PROBIT, J=data.J, k=k,
                     intercept=bool(data.n) and np.all(data.X[:, 0] == 1.0))

    try:
        start = lk.initial_params(spec, data)
        beta, delta = start.beta, start.delta
    except ValueError:
        beta, delta = np.zeros(k), np.zeros(data.J - 2)

    m_free = data.J - 2
    beta_draws = np.empty((S, k))
    delta_draws = np.empty((S, m_free))
    accepted = 0
    half_prec = 0.5 / prior.delta_var
    cur_ll = lk.loglik(spec, ParamVector(beta, delta), data)
    cur_prior = -half_prec * float(delta @ delta)
    z = np.zeros(0)

    for s in range(S):
        # cut-point block: random-walk MH on the log spacings
        proposal = delta + mh_step * rng.standard_normal(m_free)
        prop_ll = lk.loglik(spec, ParamVector(beta, proposal), data)
        prop_prior = -half_prec * float(proposal @ proposal)
        log_ratio = (prop_ll + prop_prior) - (cur_ll + cur_prior)
        if rng.uniform() < math.exp(min(0.0, log_ratio)):
            delta = proposal
            cur_ll, cur_prior = prop_ll, prop_prior
            accepted += 1
        gamma = lk.cutpoints_from_delta(delta)
        if debug:
            assert np.all(np.diff(gamma) > 0.0)

        # latent utilities, then the coefficient block
        if data.n:
            z = trunc_norm_draws(data.X @ beta, gamma[data.y - 1], gamma[data.y], rng)
            if debug:
                assert np.all(gamma[data.y - 1] < z) and np.all(z <= gamma[data.y])
        beta = draw_beta(z, rng)
        cur_ll = lk.loglik(spec, ParamVector(beta, delta), data)
        beta_draws[s] = beta
        delta_draws[s] = delta

    return ChainDraws(
        beta=beta_draws, delta=delta_draws,
        param_names=list(data.column_names) + _delta_names(data.J),
        burn=burn, accept_rate=accepted / S, seed=seed,
        latent_z=z if z.size else None,
    )


def posterior_summary(chain: ChainDraws) -> list[dict]:
    """Mean, sd and (2.5, 50, 97.5)% quantiles per parameter, post burn-in.

    Quantiles use linear interpolation of the order statistics.
    """
    draws = chain.draws()
    if draws.shape[0] < 100:
        raise ValueError(
            f"need at least 100 post-burn-in draws, have {draws.shape[0]}"
        )
    qs = np.quantile(draws, [0.025, 0.5, 0.975], axis=0, method="linear")
    out = []
    for i, name in enumerate(chain.param_names):
        col = draws[:, i]
        out.append({
            "name": name,
            "mean": float(col.mean()),
            "sd": float(col.std(ddof=1)),
            "q2.5": float(qs[0, i]),
            "q50": float(qs[1, i]),
            "q97.5": float(qs[2, i]),
        })
    return out


def summary_text(chain: ChainDraws) -> str:
    rows = posterior_summary(chain)
    name_width = max(12, max(len(r["name"]) for r in rows))
    header = (
        f"{'':{name_width}}  {'mean':>10}  {'sd':>10}  {'2.5%':>10}  {'50%':>10}  {'97.5%':>10}"
    )
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r['name']:{name_width}}  {r['mean']:>10.4f}  {r['sd']:>10.4f}  "
            f"{r['q2.5']:>10.4f}  {r['q50']:>10.4f}  {r['q97.5']:>10.4f}"
        )
    if chain.accept_rate is not None:
        lines.append(f"cut-point MH acceptance rate = {chain.accept_rate:.4f}")
    lines.append(f"draws = {chain.n_draws}   burn-in = {chain.burn}   seed = {chain.seed}")
    return "\n".join(lines) + "\n"
