"""
Named voting models.

Each entry builds a fully populated model from a few parameters and rejects
parameter values that would put a voting probability outside [0, 1], naming
the violated inequality.
"""

import math
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from bbm_voting.errors import ParameterRangeError, UnknownModelError
from bbm_voting.models import (
    CompositeLabelModel,
    LabelRule,
    OffspringDistribution,
    PROB_TOL,
    RandomOutcomeModel,
    VotingModel,
    require_valid,
    unbiased_table,
)
from bbm_voting.poly import binomial


def _offspring(value: Any, default: Optional[Mapping[int, float]] = None) -> OffspringDistribution:
    if isinstance(value, OffspringDistribution):
        return value
    if value is None:
        if default is None:
            raise ParameterRangeError("an offspring law is required", "sum_k p_k = 1")
        value = default
    return OffspringDistribution({int(k): float(p) for k, p in dict(value).items()})


def _positive_rate(rate: Any) -> float:
    rate = float(rate)
    if rate <= 0:
        raise ParameterRangeError(f"rate {rate} must be positive", "beta > 0")
    return rate


def uniform_bias_table(n: int, gamma: float) -> Tuple[float, ...]:
    """alpha_kn = (1 + gamma) k / n for k < n, alpha_nn = 1."""
    return tuple((1.0 + gamma) * k / n for k in range(n)) + (1.0,)


def group_table(n: int, m: int, gamma: float) -> Tuple[float, ...]:
    """Unbiased below m votes, plus gamma C(k,m)/C(n,m) for m <= k <= n-1."""
    row = []
    for k in range(n + 1):
        if k == n:
            row.append(1.0)
        elif k < m:
            row.append(k / n)
        else:
            row.append(k / n + gamma * binomial(k, m) / binomial(n, m))
    return tuple(row)


def uniform_bias_limit(n: int) -> float:
    """Largest gamma with (1 + gamma)(n-1)/n <= 1."""
    return 1.0 / (n - 1)


def group_bias_limit(n: int, m: int) -> float:
    """Largest gamma with k/n + gamma C(k,m)/C(n,m) <= 1 for all m <= k <= n-1."""
    return min((1.0 - k / n) * binomial(n, m) / binomial(k, m) for k in range(m, n))


def heat(offspring: Any = None, rate: float = 1.0) -> RandomOutcomeModel:
    """Unbiased voting alpha_kn = k/n; the root probability solves the heat equation."""
    law = _offspring(offspring, {2: 1.0})
    tables = {n: unbiased_table(n) for n in law.arities}
    return RandomOutcomeModel(_positive_rate(rate), law, tables, name="heat")


def efp_allen_cahn() -> RandomOutcomeModel:
    """Ternary majority vote at rate 1; forward map u(1-u)(2u-1)."""
    return RandomOutcomeModel(1.0, OffspringDistribution.pure(3), {3: (0.0, 0.0, 1.0, 1.0)}, name="efp_allen_cahn")


def mckean(offspring: Any = None, rate: float = 1.0) -> RandomOutcomeModel:
    """Parent votes 1 iff at least one child voted 1."""
    law = _offspring(offspring, {2: 1.0})
    tables = {n: (0.0,) + (1.0,) * n for n in law.arities}
    return RandomOutcomeModel(_positive_rate(rate), law, tables, name="mckean")


def uniform_bias(offspring: Any = None, gamma: float = 0.0, rate: float = 1.0) -> RandomOutcomeModel:
    """Uniformly biased voting; forward map beta gamma sum_n p_n (u - u^n)."""
    law = _offspring(offspring, {2: 1.0})
    gamma = float(gamma)
    # the bound is strictest for the largest arity
    limit = uniform_bias_limit(law.max_children)
    if gamma < 0 or gamma > limit + PROB_TOL:
        raise ParameterRangeError(
            f"gamma = {gamma:g} is out of range for arity {law.max_children}",
            f"0 <= gamma <= 1/(N-1) = {limit:.6g}",
        )
    tables = {n: uniform_bias_table(n, gamma) for n in law.arities}
    return require_valid(RandomOutcomeModel(_positive_rate(rate), law, tables, name="uniform_bias"))


def fkpp_uniform(offspring: Any = None) -> RandomOutcomeModel:
    """Uniform bias with gamma = 1/beta: forward map u - A(u), A(u) = sum_k p_k u^k."""
    law = _offspring(offspring, {2: 1.0})
    rate = max(1.0, float(law.max_children - 1))
    model = uniform_bias(law, 1.0 / rate, rate)
    return RandomOutcomeModel(model.rate, model.offspring, model.alpha, name="fkpp_uniform")


def group(m: int, offspring: Any = None, gamma: float = 0.0, rate: float = 1.0) -> RandomOutcomeModel:
    """Group-biased voting; forward map beta gamma sum_n p_n (u^m - u^n)."""
    m = int(m)
    if m < 2:
        raise ParameterRangeError(f"group size m = {m} is too small", "m > 1")
    law = _offspring(offspring)
    gamma = float(gamma)
    if gamma < 0:
        raise ParameterRangeError(f"gamma = {gamma:g} is negative", "gamma >= 0")
    for n in law.arities:
        if n <= m:
            raise ParameterRangeError(f"p_{n} > 0 with group size m = {m}", "p_k = 0 for k <= m")
        limit = group_bias_limit(n, m)
        if gamma > limit + PROB_TOL:
            raise ParameterRangeError(
                f"gamma = {gamma:g} is too large for arity {n}",
                f"k/n + gamma C(k,m)/C(n,m) <= 1 for m <= k <= n-1, i.e. gamma <= {limit:.6g}",
            )
    tables = {n: group_table(n, m, gamma) for n in law.arities}
    return require_valid(RandomOutcomeModel(_positive_rate(rate), law, tables, name="group"))


def evs_bias_limit(n: int) -> float:
    """Largest per-table bias legal for both the I and the G label at arity 2n-1."""
    arity = 2 * n - 1
    return min(uniform_bias_limit(arity), group_bias_limit(arity, n))


def evs(n: int, chi: float, gamma: Optional[float] = None) -> CompositeLabelModel:
    """Labelled mixture whose forward map is a positive multiple of (u - u^n)(1 + chi n u^(n-1)).

    Label I (probability 1/(n chi)) votes with a uniform bias, label G with the
    group rule for u^n - u^(2n-1). A gamma above the per-table limit is absorbed
    into the rate so the forward map is gamma (p_I (u - u^(2n-1)) + p_G (u^n - u^(2n-1))).
    """
    n = int(n)
    chi = float(chi)
    if n < 2:
        raise ParameterRangeError(f"n = {n} is too small", "n >= 2")
    odds = n * chi - 1.0
    if odds < -PROB_TOL:
        raise ParameterRangeError(
            f"chi = {chi:g} is not representable by this composite", "n chi - 1 >= 0"
        )
    odds = max(odds, 0.0)
    limit = evs_bias_limit(n)
    gamma = limit if gamma is None else float(gamma)
    if gamma <= 0:
        raise ParameterRangeError(f"gamma = {gamma:g} must be positive", "gamma > 0")
    rate = max(1.0, gamma / limit)
    bias = gamma / rate
    arity = 2 * n - 1
    p_i = 1.0 / (1.0 + odds)
    p_g = odds / (1.0 + odds)
    labels = (
        LabelRule("I", p_i, uniform_bias_table(arity, bias)),
        LabelRule("G", p_g, group_table(arity, n, bias)),
    )
    return require_valid(CompositeLabelModel(rate, arity, labels, name="evs"))


def pushed_speed_theory(chi: float) -> float:
    """Asymptotic front speed of the Ebert-van Saarloos family with f'(0) = 1."""
    if chi <= 1.0:
        return 2.0
    return math.sqrt(chi) + 1.0 / math.sqrt(chi)


CATALOG: Dict[str, Callable[..., VotingModel]] = {
    'heat': heat,
    'efp_allen_cahn': efp_allen_cahn,
    'mckean': mckean,
    'uniform_bias': uniform_bias,
    'fkpp_uniform': fkpp_uniform,
    'group': group,
    'evs': evs,
}

PARAMETERS: Dict[str, str] = {
    'heat': "offspring={k: p_k} (default {2: 1}), rate > 0",
    'efp_allen_cahn': "no parameters (ternary majority, rate 1)",
    'mckean': "offspring={k: p_k} (default {2: 1}), rate > 0",
    'uniform_bias': "offspring, 0 <= gamma <= 1/(N-1), rate > 0",
    'fkpp_uniform': "offspring (gamma = 1/rate, rate = max(1, N-1))",
    'group': "m > 1, offspring with p_k = 0 for k <= m, gamma with k/n + gamma C(k,m)/C(n,m) <= 1, rate > 0",
    'evs': "n >= 2, chi >= 1/n, gamma > 0 (default: largest per-table bias)",
}

ALIASES = {
    'allen-cahn': 'efp_allen_cahn',
    'allen_cahn': 'efp_allen_cahn',
    'efp': 'efp_allen_cahn',
    'uniform-bias': 'uniform_bias',
    'fkpp-uniform': 'fkpp_uniform',
}


def resolve_name(name: str) -> str:
    key = ALIASES.get(name, name)
    if key not in CATALOG:
        raise UnknownModelError(
            f"unknown model {name!r}; choose one of {', '.join(sorted(CATALOG))}"
        )
    return key


def catalog(name: str, **params: Any) -> VotingModel:
    """Instantiate a named model, e.g. ``catalog('evs', n=2, chi=1.0, gamma=1.0)``."""
    builder = CATALOG[resolve_name(name)]
    try:
        return builder(**params)
    except TypeError as e:
        raise ParameterRangeError(f"bad parameters for {name!r}: {e}") from e


def list_models() -> List[Tuple[str, str]]:
    return [(name, PARAMETERS[name]) for name in CATALOG]
