"""Command-line front end: fit, effects, simulate and bayes subcommands.

Every run is reproducible: the seed defaults to a fixed constant, numeric
reductions are sequential, and numbers in text reports are rounded to four
decimals while the JSON reports carry full precision.

Exit codes: 0 on success, 1 on input errors (bad paths, malformed files,
inestimable models), 2 when the optimizer does not converge (the report is
still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bayes, data as data_mod, effects as effects_mod, estimation, likelihood
from .data import EncodingError, ParseError, SchemaError
from .estimation import EstimationError, FitOptions

DEFAULT_SEED = 12345

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class InputError(Exception):
    """User-facing configuration problem; maps to exit code 1."""


@dataclass
class RunConfig:
    subcommand: str
    data_path: Path | None = None
    schema_path: Path | None = None
    family: str = "binary"
    link: str = "probit"
    out: Path | None = None
    seed: int = DEFAULT_SEED
    max_iter: int = 100
    tol: float = 1e-8
    scales: dict[str, float] = field(default_factory=dict)
    pfilter: float | None = None
    columns: list[str] | None = None
    draws: int = 11000
    burn: int = 1000
    mh_step: float = 0.1
    beta: list[float] = field(default_factory=list)
    cutpoints: list[float] = field(default_factory=list)
    n: int = 1000
    schema_out: Path | None = None


def _parse_float_list(text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise InputError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _parse_scales(pairs: list[str]) -> dict[str, float]:
    scales = {}
    for pair in pairs:
        if "=" not in pair:
            raise InputError(f"--scale expects <column>=<multiplier>, got {pair!r}")
        name, mult = pair.split("=", 1)
        try:
            scales[name.strip()] = float(mult)
        except ValueError:
            raise InputError(f"--scale multiplier must be numeric, got {pair!r}") from None
    return scales


def _require_path(path: Path | None, what: str) -> Path:
    if path is None:
        raise InputError(f"{what} path is required")
    if not path.exists():
        raise InputError(f"{what} file not found: {path}")
    return path


def _load_dataset(config: RunConfig):
    raw = data_mod.parse_csv(_require_path(config.data_path, "data").read_bytes())
    schema = data_mod.SchemaConfig.from_file(_require_path(config.schema_path, "schema"))
    dataset, report = data_mod.build_dataset(raw, schema)
    return dataset, schema, report


def _model_spec(config: RunConfig, dataset) -> likelihood.ModelSpec:
    if config.family == "binary" and dataset.J != 2:
        raise InputError(
            f"binary family needs exactly 2 response labels, schema declares {dataset.J}"
        )
    return likelihood.ModelSpec.for_dataset(
        family=config.family, link=config.link, data=dataset,
        intercept="intercept" in dataset.column_names,
    )


def _fit(config: RunConfig):
    dataset, schema, report = _load_dataset(config)
    spec = _model_spec(config, dataset)
    opts = FitOptions(max_iter=config.max_iter, grad_tol=config.tol)
    fit = estimation.fit_ml(spec, dataset, opts)
    return dataset, schema, report, fit


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_fit(config: RunConfig) -> int:
    dataset, schema, report, fit = _fit(config)
    out = config.out or Path("fit_report")
    text = estimation.summary_table(fit, dataset.column_names)
    text += (
        f"rows: {report.n_raw} read, {report.n_dropped} dropped for missing values, "
        f"{report.n} used\n"
    )
    Path(f"{out}.txt").write_text(text, encoding="utf-8")
    payload = estimation.fit_report_dict(fit, dataset.column_names)
    payload["encoding"] = {
        "n_raw": report.n_raw,
        "n_dropped": report.n_dropped,
        "n": report.n,
        "warnings": report.warnings,
    }
    _write_json(Path(f"{out}.json"), payload)
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_effects(config: RunConfig) -> int:
    dataset, schema, report, fit = _fit(config)
    column_indices = None
    if config.columns:
        column_indices = []
        for name in config.columns:
            if name not in dataset.column_names:
                raise InputError(f"unknown covariate {name!r}")
            if name == "intercept":
                raise InputError("the intercept has no covariate effect")
            column_indices.append(dataset.column_names.index(name))
    try:
        table = effects_mod.effects_table(
            fit.spec, fit.params, dataset, columns=column_indices, scales=config.scales,
        )
    except effects_mod.ColumnKindError as exc:
        raise InputError(str(exc)) from None
    unknown_scales = set(config.scales) - {eff.name for eff in table.rows}
    if unknown_scales:
        raise InputError(f"--scale names unknown covariates: {sorted(unknown_scales)}")

    if config.pfilter is not None:
        pvals = {
            row["name"]: row["p"]
            for row in estimation.coefficient_rows(fit, dataset.column_names)
        }
        table.rows = [eff for eff in table.rows if pvals[eff.name] < config.pfilter]

    out = config.out or Path("effects_report")
    Path(f"{out}.txt").write_text(
        effects_mod.effects_text(table, schema.labels), encoding="utf-8"
    )
    payload = effects_mod.effects_report_dict(table, schema.labels)
    payload["pfilter"] = config.pfilter
    _write_json(Path(f"{out}.json"), payload)
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_simulate(config: RunConfig) -> int:
    if not config.beta:
        raise InputError("--beta is required for simulate")
    J = len(config.cutpoints) + 2
    family = "binary" if J == 2 else "ordinal"
    if config.family and config.family != family:
        if config.family == "ordinal" and J == 2:
            raise InputError("ordinal simulation needs at least one --cutpoints value")
        if config.family == "binary" and J != 2:
            raise InputError("binary simulation takes no --cutpoints")
    spec = likelihood.ModelSpec(
        family=family, link=config.link, J=J, k=len(config.beta), intercept=True,
    )
    rng = np.random.default_rng(config.seed)
    try:
        dataset = data_mod.simulate_dataset(spec, config.beta, config.cutpoints, config.n, rng)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = config.out or Path("simulated.csv")
    data_mod.dataset_to_csv(out, dataset)
    schema_out = config.schema_out or Path(str(out).removesuffix(".csv") + ".schema")
    schema_out.write_text(
        data_mod.schema_to_text(data_mod.identity_schema(dataset)), encoding="utf-8"
    )
    return EXIT_OK


def cmd_bayes(config: RunConfig) -> int:
    dataset, schema, report, = _load_dataset(config)
    out = config.out or Path("chain")
    if config.family == "binary":
        if dataset.J != 2:
            raise InputError("binary family needs exactly 2 response labels")
        chain = bayes.gibbs_binary_probit(
            dataset, S=config.draws, burn=config.burn, rng=config.seed,
        )
    else:
        try:
            chain = bayes.gibbs_ordinal_probit(
                dataset, S=config.draws, burn=config.burn,
                mh_step=config.mh_step, rng=config.seed,
            )
        except ValueError as exc:
            raise InputError(str(exc)) from None
    chain.save_csv(Path(f"{out}.csv"))
    summary = bayes.posterior_summary(chain)
    Path(f"{out}.txt").write_text(bayes.summary_text(chain), encoding="utf-8")
    _write_json(Path(f"{out}.json"), {
        "summary": summary,
        "accept_rate": chain.accept_rate,
        "draws": chain.n_draws,
        "burn": chain.burn,
        "seed": chain.seed,
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discretefit",
        description="Binary and ordinal probit/logit regression",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_model=True):
        p.add_argument("--data", type=Path, help="CSV data file")
        p.add_argument("--schema", type=Path, help="schema config file")
        if with_model:
            p.add_argument("--family", choices=["binary", "ordinal"], default="binary")
            p.add_argument("--link", choices=["probit", "logit"], default="probit")
        p.add_argument("--out", type=Path, help="output path (prefix for report files)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p_fit = sub.add_parser("fit", help="maximum-likelihood fit with a summary report")
    add_common(p_fit)
    p_fit.add_argument("--max-iter", type=int, default=100)
    p_fit.add_argument("--tol", type=float, default=1e-8)

    p_eff = sub.add_parser("effects", help="average covariate effects from a fresh fit")
    add_common(p_eff)
    p_eff.add_argument("--max-iter", type=int, default=100)
    p_eff.add_argument("--tol", type=float, default=1e-8)
    p_eff.add_argument("--scale", action="append", default=[], metavar="COL=MULT",
                       help="report a continuous effect per MULT units")
    p_eff.add_argument("--pfilter", type=float, default=None,
                       help="only report covariates with p below this level")
    p_eff.add_argument("--columns", type=str, default=None,
                       help="comma-separated covariates to report (default: all)")

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset and matching schema")
    add_common(p_sim)
    p_sim.add_argument("--beta", type=str, required=True,
                       help="comma-separated true coefficients (first is the intercept)")
    p_sim.add_argument("--cutpoints", type=str, default="",
                       help="comma-separated free interior cut-points (empty for binary)")
    p_sim.add_argument("--n", type=int, default=1000)
    p_sim.add_argument("--schema-out", type=Path, default=None)

    p_bayes = sub.add_parser("bayes", help="Gibbs sampler for the probit models")
    add_common(p_bayes)
    p_bayes.add_argument("--draws", type=int, default=11000)
    p_bayes.add_argument("--burn", type=int, default=1000)
    p_bayes.add_argument("--mh-step", type=float, default=0.1)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(subcommand=args.subcommand)
    config.data_path = getattr(args, "data", None)
    config.schema_path = getattr(args, "schema", None)
    config.family = getattr(args, "family", "binary")
    config.link = getattr(args, "link", "probit")
    config.out = getattr(args, "out", None)
    config.seed = getattr(args, "seed", DEFAULT_SEED)
    config.max_iter = getattr(args, "max_iter", 100)
    config.tol = getattr(args, "tol", 1e-8)
    config.scales = _parse_scales(getattr(args, "scale", []) or [])
    config.pfilter = getattr(args, "pfilter", None)
    columns = getattr(args, "columns", None)
    config.columns = [c.strip() for c in columns.split(",")] if columns else None
    config.draws = getattr(args, "draws", 11000)
    config.burn = getattr(args, "burn", 1000)
    config.mh_step = getattr(args, "mh_step", 0.1)
    config.beta = _parse_float_list(getattr(args, "beta", "") or "")
    config.cutpoints = _parse_float_list(getattr(args, "cutpoints", "") or "")
    config.n = getattr(args, "n", 1000)
    config.schema_out = getattr(args, "schema_out", None)
    return config


_COMMANDS = {
    "fit": cmd_fit,
    "effects": cmd_effects,
    "simulate": cmd_simulate,
    "bayes": cmd_bayes,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        return _COMMANDS[args.subcommand](config)
    except (InputError, ParseError, SchemaError, EncodingError, EstimationError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
