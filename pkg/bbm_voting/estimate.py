"""
Monte Carlo estimators of u(t, x).

Every estimator folds one genealogy per replicate with a node rule (what a
leaf reports, how a parent combines its children) and summarises the root
values. Conditional ("Rao-Blackwellized") voting propagates the probability
that each vertex votes 1 instead of a sampled vote; it estimates the same
u(t, x) with smaller variance. Tree randomness is drawn before any vote
randomness at every node, so sampled and conditional runs with the same seed
see the same trees.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from bbm_voting.bbm import (
    BranchRecord,
    GenealogyParams,
    LeafRecord,
    SeedScheme,
    fold_tree,
    max_children_hint,
    start_point,
)
from bbm_voting.datums import InitialDatum
from bbm_voting.errors import NonFiniteValueError, ValidationError
from bbm_voting.models import (
    CompositeLabelModel,
    RandomOutcomeModel,
    RandomThresholdModel,
    RecursiveModel,
    PROB_TOL,
    clamp_probability,
    outcome_from_threshold,
    require_valid,
)
from bbm_voting.parallel import map_replicates

logger = logging.getLogger(__name__)

KURTOSIS_WARNING = 10.0


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error and a confidence interval."""

    mean: float
    std_error: float
    n_replicates: int
    ci_low: float
    ci_high: float
    mode: str = ""
    std_dev: float = 0.0
    heavy_tailed: bool = False

    def z_score(self, reference: float) -> float:
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error

    def agrees_with(self, reference: float, n_se: float = 3.0, allowance: float = 0.0) -> bool:
        return abs(self.mean - reference) <= n_se * self.std_error + allowance


@dataclass(frozen=True)
class CountDistribution:
    """P(exactly k of n independent Bernoulli(q_i) are 1), k = 0..n."""

    probs: Tuple[float, ...]


def poisson_binomial(q: Sequence[float]) -> CountDistribution:
    """Exact O(n^2) convolution of the per-trial generating functions.

    Probabilities within PROB_TOL of [0, 1] are snapped into the interval.
    """
    probs = np.array([1.0])
    for p in q:
        if not (-PROB_TOL <= p <= 1.0 + PROB_TOL):
            raise ValidationError(f"Bernoulli probability {p} is outside [0, 1]")
        p = clamp_probability(p)
        probs = np.convolve(probs, (1.0 - p, p))
    return CountDistribution(tuple(float(v) for v in probs))


def summarize(values: np.ndarray, mode: str = "", ci: str = "normal",
              confidence: float = 0.95) -> Estimate:
    """Mean, standard error and interval; exact summation keeps it order-free."""
    n = int(values.size)
    if n == 0:
        raise ValidationError("no replicates to summarise")
    mean = math.fsum(values) / n
    if n > 1:
        variance = math.fsum((values - mean) ** 2) / (n - 1)
    else:
        variance = 0.0
    std_dev = math.sqrt(variance)
    se = std_dev / math.sqrt(n)
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    if ci == "wilson":
        low, high = wilson_interval(mean, n, z)
    elif ci == "normal":
        low, high = mean - z * se, mean + z * se
    else:
        raise ValidationError(f"unknown interval {ci!r}; use 'normal' or 'wilson'")
    return Estimate(mean, se, n, low, high, mode, std_dev)


def wilson_interval(p_hat: float, n: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    """Wilson score interval for a proportion."""
    p_hat = min(1.0, max(0.0, p_hat))
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2 * n)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# Node rules. Each is a small picklable object with leaf() and combine().

@dataclass(frozen=True)
class ConditionalVoting:
    """Propagate P(vote = 1): q_parent = sum_k P(k ones) alpha_kn."""

    datum: InitialDatum
    tables: Dict[int, Tuple[float, ...]]

    def leaf(self, record: LeafRecord) -> float:
        return self.datum(record.position)

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        counts = poisson_binomial(values).probs
        return clamp_probability(math.fsum(c * a for c, a in zip(counts, self.tables[branch.arity])))


@dataclass(frozen=True)
class SampledVoting:
    """Sample votes: leaves vote Bernoulli(g), parents vote 1 with probability alpha_kn."""

    datum: InitialDatum
    tables: Dict[int, Tuple[float, ...]]

    def leaf(self, record: LeafRecord) -> float:
        return 1.0 if record.rng.random() < self.datum(record.position) else 0.0

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        k = int(sum(values))
        return 1.0 if branch.rng.random() < self.tables[branch.arity][k] else 0.0


@dataclass(frozen=True)
class SampledLabelVoting:
    """Draw a label per parent, then vote with that label's table."""

    datum: InitialDatum
    label_probs: Tuple[float, ...]
    label_tables: Tuple[Tuple[float, ...], ...]

    def leaf(self, record: LeafRecord) -> float:
        return 1.0 if record.rng.random() < self.datum(record.position) else 0.0

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        label = _draw_index(self.label_probs, branch.rng.random())
        k = int(sum(values))
        return 1.0 if branch.rng.random() < self.label_tables[label][k] else 0.0


@dataclass(frozen=True)
class SampledThreshold:
    """Each parent draws L ~ zeta and votes 1 iff at least L children did."""

    datum: InitialDatum
    zeta: Tuple[float, ...]

    def leaf(self, record: LeafRecord) -> float:
        return 1.0 if record.rng.random() < self.datum(record.position) else 0.0

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        threshold = _draw_index(self.zeta, branch.rng.random())
        return 1.0 if sum(values) >= threshold else 0.0


@dataclass(frozen=True)
class RecursivePropagation:
    datum: InitialDatum
    model: RecursiveModel

    def leaf(self, record: LeafRecord) -> float:
        return self.datum(record.position)

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        return self.model.combine(values)


@dataclass(frozen=True)
class ProductFunctional:
    """McKean functional: product of g over the leaves."""

    datum: InitialDatum

    def leaf(self, record: LeafRecord) -> float:
        return self.datum(record.position)

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        return math.prod(values)


@dataclass(frozen=True)
class MaximumPosition:
    def leaf(self, record: LeafRecord) -> float:
        return float(record.position[0])

    def combine(self, branch: BranchRecord, values: List[float]) -> float:
        return max(values)


def _draw_index(weights: Sequence[float], u: float) -> int:
    cumulative = 0.0
    for i, w in enumerate(weights):
        cumulative += w
        if u < cumulative:
            return i
    # rounding left u above the last partial sum
    return max(i for i, w in enumerate(weights) if w > 0)


def _replicate_value(replicate: int, params: GenealogyParams, seed: SeedScheme, t: float,
                     x0: np.ndarray, rule) -> float:
    return fold_tree(params, t, x0, seed, replicate, rule.leaf, rule.combine)


def run_replicates(params: GenealogyParams, rule, t: float, x0: np.ndarray, n_replicates: int,
                   seed: int, workers: int = 1) -> np.ndarray:
    """Root values of ``n_replicates`` independent genealogies, in replicate order."""
    if n_replicates < 1:
        raise ValidationError(f"replicate count must be >= 1, got {n_replicates}")
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    hint = max_children_hint(params, t)
    if hint:
        logger.warning(hint)
    fn = partial(_replicate_value, params=params, seed=SeedScheme(seed), t=t, x0=x0, rule=rule)
    return map_replicates(fn, n_replicates, workers)


def _params_for(model, dimension: int, population_cap: Optional[int]) -> GenealogyParams:
    if population_cap is None:
        return GenealogyParams(model.rate, model.offspring, dimension)
    return GenealogyParams(model.rate, model.offspring, dimension, population_cap)


def _exact(datum: InitialDatum, x0: np.ndarray, n_replicates: int, mode: str) -> Estimate:
    value = datum(x0)
    return Estimate(value, 0.0, n_replicates, value, value, mode)


def estimate_voting(model: Union[RandomOutcomeModel, CompositeLabelModel], g: InitialDatum,
                    t: float, x, n_replicates: int, seed: int, mode: str = "conditional",
                    workers: int = 1, ci: str = "normal", dimension: int = 1,
                    population_cap: Optional[int] = None) -> Estimate:
    """P_x(root votes 1) for a random outcome or labelled composite model."""
    require_valid(model)
    g.require_probability()
    x0 = start_point(x, dimension)
    if t == 0:
        return _exact(g, x0, n_replicates, mode)
    if isinstance(model, CompositeLabelModel):
        if mode == "conditional":
            rule = ConditionalVoting(g, {model.arity: model.mixed_alpha()})
        elif mode == "sampled":
            rule = SampledLabelVoting(
                g,
                tuple(r.probability for r in model.labels),
                tuple(r.alpha for r in model.labels),
            )
        else:
            raise ValidationError(f"unknown voting mode {mode!r}; use 'conditional' or 'sampled'")
    elif isinstance(model, RandomOutcomeModel):
        if mode == "conditional":
            rule = ConditionalVoting(g, dict(model.alpha))
        elif mode == "sampled":
            rule = SampledVoting(g, dict(model.alpha))
        else:
            raise ValidationError(f"unknown voting mode {mode!r}; use 'conditional' or 'sampled'")
    else:
        raise ValidationError(f"estimate_voting takes outcome or composite models, got {model.kind}")
    params = _params_for(model, x0.size, population_cap)
    values = run_replicates(params, rule, t, x0, n_replicates, seed, workers)
    return summarize(values, mode, ci)


def estimate_threshold(model: RandomThresholdModel, g: InitialDatum, t: float, x, n_replicates: int,
                       seed: int, mode: str = "direct", workers: int = 1, ci: str = "normal",
                       dimension: int = 1, population_cap: Optional[int] = None) -> Estimate:
    """Threshold voting, sampled directly or through the equivalent outcome table."""
    require_valid(model)
    g.require_probability()
    if mode == "via_outcome":
        estimate = estimate_voting(outcome_from_threshold(model), g, t, x, n_replicates, seed,
                                   "conditional", workers, ci, dimension, population_cap)
        return replace(estimate, mode=mode)
    if mode != "direct":
        raise ValidationError(f"unknown threshold mode {mode!r}; use 'direct' or 'via_outcome'")
    x0 = start_point(x, dimension)
    if t == 0:
        return _exact(g, x0, n_replicates, mode)
    params = _params_for(model, x0.size, population_cap)
    values = run_replicates(params, SampledThreshold(g, model.zeta), t, x0, n_replicates, seed, workers)
    return summarize(values, mode, ci)


def estimate_recursive(model: RecursiveModel, g: InitialDatum, t: float, x, n_replicates: int,
                       seed: int, workers: int = 1, ci: str = "normal", dimension: int = 1,
                       population_cap: Optional[int] = None) -> Estimate:
    """E_x[u_root] under recursive propagation; values are unbounded in general."""
    x0 = start_point(x, dimension)
    params = _params_for(model, x0.size, population_cap)
    values = run_replicates(params, RecursivePropagation(g, model), t, x0, n_replicates, seed, workers)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValueError(int(bad[0]), float(values[bad[0]]))
    estimate = summarize(values, "recursive", ci)
    if estimate.std_dev > 0:
        kurtosis = float(stats.kurtosis(values, fisher=False))
        if kurtosis > KURTOSIS_WARNING:
            logger.warning(
                "recursive estimate at x=%s has kurtosis %.3g; its standard error may be unreliable",
                x0.tolist(), kurtosis,
            )
            estimate = replace(estimate, heavy_tailed=True)
    return estimate


def estimate_mckean_product(params: GenealogyParams, g: InitialDatum, t: float, x, n_replicates: int,
                            seed: int, workers: int = 1, ci: str = "normal") -> Estimate:
    """E_x[prod_leaves g(X_m(t))], the solution of v_t = Δv + beta (sum_k p_k v^k - v)."""
    x0 = start_point(x, params.dimension)
    values = run_replicates(params, ProductFunctional(g), t, x0, n_replicates, seed, workers)
    return summarize(values, "mckean_product", ci)


def sample_maxima(params: GenealogyParams, t: float, n_replicates: int, seed: int,
                  workers: int = 1) -> np.ndarray:
    """Per-replicate maximum leaf position of a BBM started at 0."""
    if params.dimension != 1:
        raise ValidationError("the maximum of BBM is defined here for d = 1 only")
    return run_replicates(params, MaximumPosition(), t, np.zeros(1), n_replicates, seed, workers)


def estimate_max_cdf(params: GenealogyParams, t: float, x_list: Sequence[float], n_replicates: int,
                     seed: int, workers: int = 1, ci: str = "normal") -> List[Estimate]:
    """P(M(t) > x) for each x, where M(t) is the largest particle position at time t."""
    maxima = sample_maxima(params, t, n_replicates, seed, workers)
    return [summarize((maxima > x).astype(float), "max_cdf", ci) for x in x_list]


@dataclass
class PairedComparison:
    """Conditional vs sampled voting on identical trees."""

    conditional: Estimate
    sampled: Estimate
    mean_difference: float
    difference_se: float
    variance_ratio: float
    variance_p_value: float = field(default=1.0)


def paired_voting(model: Union[RandomOutcomeModel, CompositeLabelModel], g: InitialDatum, t: float,
                  x, n_replicates: int, seed: int, workers: int = 1) -> PairedComparison:
    """Run both voting modes with one seed so replicate i uses the same genealogy in each.

    The one-sided p-value tests var(sampled) > var(conditional) via the paired
    differences: cov(sampled - conditional, conditional) = 0 under
    conditioning, so var(sampled) - var(conditional) = var(difference) > 0.
    """
    require_valid(model)
    g.require_probability()
    x0 = start_point(x)
    if isinstance(model, CompositeLabelModel):
        cond_rule = ConditionalVoting(g, {model.arity: model.mixed_alpha()})
        samp_rule = SampledLabelVoting(g, tuple(r.probability for r in model.labels),
                                       tuple(r.alpha for r in model.labels))
    else:
        cond_rule = ConditionalVoting(g, dict(model.alpha))
        samp_rule = SampledVoting(g, dict(model.alpha))
    params = _params_for(model, x0.size, None)
    cond = run_replicates(params, cond_rule, t, x0, n_replicates, seed, workers)
    samp = run_replicates(params, samp_rule, t, x0, n_replicates, seed, workers)
    diff = samp - cond
    diff_summary = summarize(diff, "difference")
    cond_est = summarize(cond, "conditional")
    samp_est = summarize(samp, "sampled")
    ratio = (cond_est.std_dev ** 2 / samp_est.std_dev ** 2) if samp_est.std_dev > 0 else 1.0
    # one-sided t-test of E[(s - c)^2] > 0
    squared = diff ** 2
    if np.all(squared == squared[0]):
        p_value = 0.0 if squared[0] > 0 else 1.0
    else:
        p_value = float(stats.ttest_1samp(squared, 0.0, alternative='greater').pvalue)
    return PairedComparison(cond_est, samp_est, diff_summary.mean, diff_summary.std_error, ratio, p_value)
