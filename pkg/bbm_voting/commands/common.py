"""Helpers shared by the subcommands: console banners, shared flags, model resolution."""

import argparse
import json
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rich.console import Console

from bbm_voting.catalog import catalog, resolve_name
from bbm_voting.config import ExperimentConfig, load_config
from bbm_voting.datums import InitialDatum
from bbm_voting.documents import load_model
from bbm_voting.errors import UnknownModelError, ValidationError
from bbm_voting.estimate import (
    Estimate,
    estimate_mckean_product,
    estimate_recursive,
    estimate_threshold,
    estimate_voting,
)
from bbm_voting.bbm import GenealogyParams
from bbm_voting.models import (
    McKeanDecomposition,
    RandomThresholdModel,
    RecursiveModel,
    VotingModel,
    compile_outcome,
    compile_recursive,
    compile_threshold,
    forward_nonlinearity,
    mckean_decompose,
    threshold_from_outcome,
)
from bbm_voting.poly import Polynomial, parse_polynomial

logger = logging.getLogger(__name__)

console = Console(highlight=False, soft_wrap=True)


def banner(title: str) -> None:
    console.print(f"\n{'=' * 60}")
    console.print(title, markup=False)
    console.print(f"{'=' * 60}\n")


def add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--f', metavar='POLY|NAME',
                        help='Nonlinearity: "[c0, c1, ...]", "u - u^2", or a catalog name')
    parser.add_argument('--model', metavar='PATH', help='Model document (JSON) to use instead of --f')
    parser.add_argument('--param', action='append', metavar='KEY=VALUE', default=None,
                        help='Catalog parameter, repeatable (e.g. --param n=2 --param offspring=2:0.5,3:0.5)')
    parser.add_argument('--rate', type=float, help='Branch rate override')
    parser.add_argument('--arity', type=int, help='Arity for compiled models')


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar='PATH', help='JSON experiment config; flags override it')
    parser.add_argument('--output', metavar='CSV', help='Write results as CSV')
    parser.add_argument('--summary', metavar='JSON', help='Write a JSON summary')


def add_estimate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--representation', choices=['outcome', 'threshold', 'recursive', 'mckean_product'],
                        help='Which representation to simulate (default outcome)')
    parser.add_argument('--datum', help='Initial datum: step[:at], interval:a:b, bump[:c[:w[:h]]], '
                                        'constant:v, table:path.csv; prefix "1-" for the complement')
    parser.add_argument('--t', type=float, help='Evaluation time')
    parser.add_argument('--x', help='Evaluation points: min:max:count, a number, or a comma list')
    parser.add_argument('--n', type=int, help='Replicates per point')
    parser.add_argument('--seed', type=int, help='Master seed')
    parser.add_argument('--mode', choices=['conditional', 'sampled', 'direct', 'via_outcome'],
                        help='Estimator mode')
    parser.add_argument('--ci', choices=['normal', 'wilson'], help='Confidence interval kind')
    parser.add_argument('--workers', type=int, help='Worker processes (outputs do not depend on it)')


def parse_value(text: str) -> Any:
    """Number, JSON, or an offspring map written "k:p,k:p"."""
    text = text.strip()
    if ':' in text and not text.startswith('{'):
        pairs = {}
        for item in text.split(','):
            k, _, p = item.partition(':')
            pairs[int(k)] = float(p)
        return pairs
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        return text
    if isinstance(value, dict):
        return {int(k): v for k, v in value.items()}
    return value


def parse_params(items: Optional[Sequence[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in items or []:
        key, sep, value = item.partition('=')
        if not sep or not key:
            raise ValidationError(f"parameter {item!r} must look like key=value")
        try:
            params[key.strip()] = parse_value(value)
        except ValueError as e:
            raise ValidationError(f"bad value in parameter {item!r}: {e}") from e
    return params


def config_from_args(args: argparse.Namespace, fields: Sequence[str],
                     sections: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """Build the resolved config from --config plus whichever flags were given."""
    overrides: Dict[str, Any] = {name: getattr(args, name, None) for name in fields}
    if getattr(args, 'param', None):
        overrides['params'] = parse_params(args.param)
    for flag, dotted in (sections or {}).items():
        overrides[dotted] = getattr(args, flag, None)
    return load_config(getattr(args, 'config', None), overrides)


def catalog_name(text: Optional[str]) -> Optional[str]:
    if not text:
        return None
    try:
        return resolve_name(text.strip())
    except UnknownModelError:
        return None


def nonlinearity_of(cfg: ExperimentConfig) -> Tuple[Polynomial, str]:
    """The reaction polynomial and an id for it, from --model, a catalog name, or --f."""
    if cfg.model:
        model = load_model(cfg.model)
        return forward_nonlinearity(model), f"document:{model.name}"
    name = catalog_name(cfg.f)
    if name:
        return forward_nonlinearity(catalog(name, **cfg.params)), name
    if not cfg.f:
        raise ValidationError("give a nonlinearity with --f or a model document with --model")
    return parse_polynomial(cfg.f), f"f={cfg.f.strip()}"


@dataclass
class Representation:
    """What a simulate/compare run estimates."""

    kind: str
    model_id: str
    f: Polynomial
    model: Optional[VotingModel] = None
    decomposition: Optional[McKeanDecomposition] = None


def resolve_representation(cfg: ExperimentConfig) -> Representation:
    if cfg.model:
        model = load_model(cfg.model)
        base_id = f"document:{model.name}"
    else:
        name = catalog_name(cfg.f)
        if name:
            model = catalog(name, **cfg.params)
            base_id = name
        else:
            model = None
            base_id = f"f={(cfg.f or '').strip()}"

    if model is not None:
        f = forward_nonlinearity(model)
    else:
        f, base_id = nonlinearity_of(cfg)

    kind = cfg.representation
    if kind == 'mckean_product':
        result = mckean_decompose(f)
        if not isinstance(result, McKeanDecomposition):
            raise ValidationError(str(result))
        return Representation(kind, base_id, f, decomposition=result)
    if kind == 'recursive':
        if not isinstance(model, RecursiveModel):
            model = compile_recursive(f, cfg.arity)
        return Representation(kind, base_id, f, model)
    if kind == 'threshold':
        if model is None:
            model = compile_threshold(f, cfg.rate, cfg.arity)
        elif not isinstance(model, RandomThresholdModel):
            model = threshold_from_outcome(model)
        return Representation(kind, base_id, f, model)
    if model is None:
        model = compile_outcome(f, cfg.rate, cfg.arity)
    elif isinstance(model, RandomThresholdModel):
        kind = 'threshold'
    elif isinstance(model, RecursiveModel):
        kind = 'recursive'
    return Representation(kind, base_id, f, model)


def complement_estimate(e: Estimate) -> Estimate:
    """u = 1 - v for an estimate of v."""
    return replace(e, mean=1.0 - e.mean, ci_low=1.0 - e.ci_high, ci_high=1.0 - e.ci_low)


def run_estimates(rep: Representation, cfg: ExperimentConfig, datum: InitialDatum,
                  xs: Sequence[float]) -> List[Estimate]:
    """One estimate per x; every point uses the same master seed."""
    estimates = []
    for x in xs:
        logger.info("estimating u(%g, %g) with %d replicates", cfg.t, x, cfg.n)
        if rep.kind == 'mckean_product':
            d = rep.decomposition
            params = GenealogyParams(d.rate, d.offspring)
            v = estimate_mckean_product(params, datum.flipped(), cfg.t, x, cfg.n, cfg.seed, cfg.workers, cfg.ci)
            estimates.append(complement_estimate(v))
        elif rep.kind == 'recursive':
            estimates.append(estimate_recursive(rep.model, datum, cfg.t, x, cfg.n, cfg.seed, cfg.workers, cfg.ci))
        elif rep.kind == 'threshold':
            estimates.append(estimate_threshold(rep.model, datum, cfg.t, x, cfg.n, cfg.seed,
                                                cfg.mode or 'direct', cfg.workers, cfg.ci))
        else:
            estimates.append(estimate_voting(rep.model, datum, cfg.t, x, cfg.n, cfg.seed,
                                             cfg.mode or 'conditional', cfg.workers, cfg.ci))
    return estimates
