"""Covariate effects on category probabilities, plus odds helpers.

For a continuous covariate the effect on P(y = j) is the analytic derivative
-b_l [f(gamma_j - x'b) - f(gamma_{j-1} - x'b)]; for a 0/1 indicator it is the
difference of the full probability vectors with the column forced to 1 versus
0. Reported effects are averages over the sample (not effects at the mean).
Within every observation the effects across categories sum to zero because
the probabilities sum to one before and after the perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .estimation import predict_prob
from .likelihood import FAMILY_BINARY, FAMILY_ORDINAL, ModelSpec, ParamVector
from .distributions import Link


class ColumnKindError(ValueError):
    """The requested column does not have the kind the effect assumes."""


class UnsupportedLinkError(ValueError):
    """The quantity is only defined for a specific link."""


KIND_CONTINUOUS = "continuous"
KIND_INDICATOR = "indicator"


@dataclass
class CovariateEffect:
    """Per-observation and sample-average effects of one covariate."""

    name: str
    kind: str
    per_obs: np.ndarray        # (n, J)
    average: np.ndarray        # (J,)
    scale: float = 1.0

    @property
    def scaled_average(self) -> np.ndarray:
        return self.scale * self.average


@dataclass
class EffectsTable:
    rows: list[CovariateEffect] = field(default_factory=list)
    J: int = 2


def _is_indicator(column: np.ndarray) -> bool:
    return bool(np.all((column == 0.0) | (column == 1.0)))


def _intercept_index(spec: ModelSpec) -> int | None:
    return 0 if spec.intercept else None


def ce_continuous(spec: ModelSpec, params: ParamVector, data: Dataset, l: int) -> CovariateEffect:
    """Marginal effect of continuous column ``l`` on every category probability."""
    if l == _intercept_index(spec):
        raise ColumnKindError("the intercept has no covariate effect")
    if not 0 <= l < spec.k:
        raise ValueError(f"column index {l} out of range")
    if _is_indicator(data.X[:, l]):
        raise ColumnKindError(
            f"column {data.column_names[l]!r} is a 0/1 indicator; use ce_indicator"
        )
    gamma = params.cutpoints()
    xb = data.X @ params.beta
    dens = spec.link.pdf(gamma[None, :] - xb[:, None])  # pdf 0 at the infinite ends
    per_obs = -params.beta[l] * np.diff(dens, axis=1)
    return CovariateEffect(
        name=data.column_names[l], kind=KIND_CONTINUOUS,
        per_obs=per_obs, average=per_obs.mean(axis=0),
    )


def ce_indicator(spec: ModelSpec, params: ParamVector, data: Dataset, m: int) -> CovariateEffect:
    """Effect of switching indicator column ``m`` from 0 to 1, everything else fixed."""
    if m == _intercept_index(spec):
        raise ColumnKindError("the intercept has no covariate effect")
    if not 0 <= m < spec.k:
        raise ValueError(f"column index {m} out of range")
    if not _is_indicator(data.X[:, m]):
        raise ColumnKindError(
            f"column {data.column_names[m]!r} takes values outside {{0, 1}}"
        )
    X_on = data.X.copy()
    X_on[:, m] = 1.0
    X_off = data.X.copy()
    X_off[:, m] = 0.0
    per_obs = predict_prob(spec, params, X_on) - predict_prob(spec, params, X_off)
    return CovariateEffect(
        name=data.column_names[m], kind=KIND_INDICATOR,
        per_obs=per_obs, average=per_obs.mean(axis=0),
    )


def covariate_effect(spec: ModelSpec, params: ParamVector, data: Dataset, idx: int) -> CovariateEffect:
    """Dispatch on the column's observed kind (0/1 values -> indicator)."""
    if _is_indicator(data.X[:, idx]) and idx != _intercept_index(spec):
        return ce_indicator(spec, params, data, idx)
    return ce_continuous(spec, params, data, idx)


def effects_table(spec: ModelSpec, params: ParamVector, data: Dataset,
                  columns: list[int] | None = None,
                  scales: dict[str, float] | None = None) -> EffectsTable:
    """Average effects for the requested columns (default: all but intercept)."""
    scales = scales or {}
    if columns is None:
        columns = [i for i in range(spec.k) if i != _intercept_index(spec)]
    rows = []
    for idx in columns:
        eff = covariate_effect(spec, params, data, idx)
        scale = float(scales.get(eff.name, 1.0))
        if scale != 1.0 and eff.kind != KIND_CONTINUOUS:
            raise ColumnKindError(
                f"scale multipliers apply to continuous covariates only, not {eff.name!r}"
            )
        eff.scale = scale
        rows.append(eff)
    return EffectsTable(rows=rows, J=spec.J)


def odds_ratio_logit(spec: ModelSpec, params: ParamVector, m: int) -> float:
    """exp(beta_m): the odds ratio of success for indicator m under binary logit."""
    if spec.link is not Link.LOGIT:
        raise UnsupportedLinkError("odds ratios are a logit-link construct")
    if spec.family != FAMILY_BINARY:
        raise UnsupportedLinkError("odds_ratio_logit applies to the binary model")
    if not 0 <= m < spec.k:
        raise ValueError(f"column index {m} out of range")
    return float(np.exp(params.beta[m]))


def cumulative_odds(spec: ModelSpec, params: ParamVector, x: np.ndarray, j: int) -> float:
    """Odds of y <= j at covariate vector x: exp(gamma_j - x'beta), logit only.

    The ratio of these odds between two covariate vectors does not depend on
    j, which is what makes the ordinal logit a proportional-odds model.
    """
    if spec.link is not Link.LOGIT:
        raise UnsupportedLinkError("cumulative odds are a logit-link construct")
    if spec.family != FAMILY_ORDINAL:
        raise UnsupportedLinkError("cumulative_odds applies to the ordinal model")
    if not 1 <= j <= spec.J - 1:
        raise ValueError(f"category {j} must lie in 1..J-1 = {spec.J - 1} (odds at J are not defined)")
    x = np.asarray(x, dtype=float)
    gamma = params.cutpoints()
    return float(np.exp(gamma[j] - x @ params.beta))


def effects_text(table: EffectsTable, category_labels: list[str] | None = None) -> str:
    """Aligned plain-text effects table (4-decimal rounding)."""
    labels = category_labels or [f"P(y={j})" for j in range(1, table.J + 1)]
    def row_label(eff: CovariateEffect) -> str:
        return eff.name if eff.scale == 1.0 else f"{eff.name} (x{eff.scale:g})"
    name_width = max(12, max((len(row_label(r)) for r in table.rows), default=12))
    header = f"{'':{name_width}}  " + "  ".join(f"{f'dP({lab})':>14}" for lab in labels)
    lines = [header, "-" * len(header)]
    for eff in table.rows:
        vals = "  ".join(f"{v:>14.4f}" for v in eff.scaled_average)
        lines.append(f"{row_label(eff):{name_width}}  {vals}")
    return "\n".join(lines) + "\n"


def effects_report_dict(table: EffectsTable, category_labels: list[str] | None = None) -> dict:
    labels = category_labels or [f"P(y={j})" for j in range(1, table.J + 1)]
    return {
        "categories": labels,
        "effects": [
            {
                "name": eff.name,
                "kind": eff.kind,
                "scale": eff.scale,
                "average": [float(v) for v in eff.average],
                "scaled_average": [float(v) for v in eff.scaled_average],
            }
            for eff in table.rows
        ],
    }
