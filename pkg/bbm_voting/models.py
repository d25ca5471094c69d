"""
Voting-model types, the polynomial-to-model compilers and the forward map.

A model describes how a parent combines its children's votes (or values) on
the genealogical tree of a branching Brownian motion. ``forward_nonlinearity``
returns the reaction term f(u) the model's root probability solves
u_t = Δu + f(u) with; the compilers go the other way.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from bbm_voting.errors import (
    BoundaryConditionError,
    DegreeMismatchError,
    MonotonicityError,
    ParameterRangeError,
    RateTooSmallError,
    ValidationError,
)
from bbm_voting.poly import Polynomial, bernstein_mixture, binomial, to_bernstein

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12
BOUNDARY_TOL = 1e-12
MCKEAN_TOL = 1e-9


def clamp_probability(value: float) -> float:
    """Snap values within PROB_TOL of [0, 1] back into the interval."""
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class OffspringDistribution:
    """Law of the number of children at a branching event (k >= 2)."""

    probs: Mapping[int, float]

    def __post_init__(self):
        cleaned: Dict[int, float] = {}
        for k, p in sorted(self.probs.items()):
            k = int(k)
            p = float(p)
            if k < 2:
                raise ParameterRangeError(f"offspring count {k} is not allowed", "k >= 2")
            if not (-PROB_TOL <= p <= 1.0 + PROB_TOL) or not math.isfinite(p):
                raise ParameterRangeError(f"p_{k} = {p} is not a probability", "0 <= p_k <= 1")
            p = clamp_probability(p)
            if p > 0.0:
                cleaned[k] = p
        total = math.fsum(cleaned.values())
        if abs(total - 1.0) > PROB_TOL:
            raise ParameterRangeError(
                f"offspring probabilities sum to {total:.15g}", "sum_k p_k = 1"
            )
        if not cleaned:
            raise ParameterRangeError("offspring law has no mass", "sum_k p_k = 1")
        object.__setattr__(self, 'probs', dict(cleaned))

    @classmethod
    def pure(cls, n: int) -> "OffspringDistribution":
        return cls({n: 1.0})

    @property
    def max_children(self) -> int:
        return max(self.probs)

    @property
    def arities(self) -> List[int]:
        return sorted(self.probs)

    def mean(self) -> float:
        """m_1 = sum_k k p_k."""
        return math.fsum(k * p for k, p in self.probs.items())

    def is_pure(self) -> bool:
        return len(self.probs) == 1

    def generating_function(self) -> Polynomial:
        """A(u) = sum_k p_k u^k."""
        coeffs = [0.0] * (self.max_children + 1)
        for k, p in self.probs.items():
            coeffs[k] = p
        return Polynomial(tuple(coeffs))


@dataclass(frozen=True)
class RandomOutcomeModel:
    """A parent with n children, k of which voted 1, votes 1 with probability alpha[n][k]."""

    rate: float
    offspring: OffspringDistribution
    alpha: Mapping[int, Tuple[float, ...]]
    name: str = "outcome"

    def __post_init__(self):
        tables = {int(n): tuple(float(a) for a in row) for n, row in self.alpha.items()}
        for n in self.offspring.arities:
            if n not in tables:
                raise ValidationError(f"alpha table missing for arity {n}")
            if len(tables[n]) != n + 1:
                raise ValidationError(f"alpha table for arity {n} needs {n + 1} entries, got {len(tables[n])}")
        object.__setattr__(self, 'alpha', tables)

    @property
    def kind(self) -> str:
        return "outcome"


@dataclass(frozen=True)
class RandomThresholdModel:
    """Pure N-ary model: each vertex draws L ~ zeta and votes 1 iff at least L children did."""

    rate: float
    arity: int
    zeta: Tuple[float, ...]
    name: str = "threshold"

    def __post_init__(self):
        values = tuple(float(z) for z in self.zeta)
        if len(values) != self.arity + 1:
            raise ValidationError(f"zeta needs {self.arity + 1} entries, got {len(values)}")
        object.__setattr__(self, 'zeta', values)

    @property
    def kind(self) -> str:
        return "threshold"

    @property
    def offspring(self) -> OffspringDistribution:
        return OffspringDistribution.pure(self.arity)

    def cumulative(self) -> Tuple[float, ...]:
        """alpha_k = sum_{j<=k} zeta_j, the equivalent outcome table."""
        out = []
        running = []
        for z in self.zeta:
            running.append(z)
            out.append(math.fsum(running))
        return tuple(out)


@dataclass(frozen=True)
class RecursiveModel:
    """Deterministic up-the-tree propagation: u_parent = S_N(children) + mean(children)."""

    arity: int
    f: Polynomial
    symmetric_coeffs: Tuple[float, ...]
    name: str = "recursive"

    @property
    def kind(self) -> str:
        return "recursive"

    @property
    def rate(self) -> float:
        return 1.0

    @property
    def offspring(self) -> OffspringDistribution:
        return OffspringDistribution.pure(self.arity)

    def combine(self, values: List[float]) -> float:
        """S_N(u_1..u_N) + (u_1 + ... + u_N)/N via elementary symmetric sums."""
        elementary = elementary_symmetric(values)
        try:
            s = math.fsum(c * e for c, e in zip(self.symmetric_coeffs, elementary))
            mean = math.fsum(values) / len(values)
        except (OverflowError, ValueError):
            # inf - inf or an overflowing partial sum; the estimator flags NaN roots
            return math.nan
        return s + mean


@dataclass(frozen=True)
class LabelRule:
    name: str
    probability: float
    alpha: Tuple[float, ...]


@dataclass(frozen=True)
class CompositeLabelModel:
    """Each parent draws a label, then votes with that label's alpha table."""

    rate: float
    arity: int
    labels: Tuple[LabelRule, ...]
    name: str = "composite"

    def __post_init__(self):
        for rule in self.labels:
            if len(rule.alpha) != self.arity + 1:
                raise ValidationError(
                    f"label {rule.name!r} alpha table needs {self.arity + 1} entries, got {len(rule.alpha)}"
                )

    @property
    def kind(self) -> str:
        return "composite"

    @property
    def offspring(self) -> OffspringDistribution:
        return OffspringDistribution.pure(self.arity)

    def mixed_alpha(self) -> Tuple[float, ...]:
        """Label tables averaged by label probability."""
        return tuple(
            math.fsum(rule.probability * rule.alpha[k] for rule in self.labels)
            for k in range(self.arity + 1)
        )


@dataclass(frozen=True)
class McKeanDecomposition:
    rate: float
    offspring: OffspringDistribution
    lam: float

    @property
    def mean_offspring(self) -> float:
        return self.offspring.mean()


@dataclass(frozen=True)
class NotMcKean:
    """Why a nonlinearity has no McKean representation."""

    condition: str
    detail: str

    def __str__(self) -> str:
        return f"not of McKean type: {self.condition} fails ({self.detail})"


@dataclass
class ModelDiagnostics:
    kind: str
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    monotone: Optional[bool] = None
    threshold_convertible: bool = False
    probability_sums: Dict[str, float] = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return not self.errors


VotingModel = Union[RandomOutcomeModel, RandomThresholdModel, RecursiveModel, CompositeLabelModel]


def elementary_symmetric(values: List[float]) -> List[float]:
    """e_0..e_n of the given values (e_0 = 1)."""
    e = [1.0] + [0.0] * len(values)
    for i, v in enumerate(values, start=1):
        for j in range(i, 0, -1):
            e[j] += v * e[j - 1]
    return e


def unbiased_table(n: int) -> Tuple[float, ...]:
    return tuple(k / n for k in range(n + 1))


def _check_boundary(f: Polynomial) -> None:
    at0 = float(f(0.0))
    at1 = float(f(1.0))
    if abs(at0) > BOUNDARY_TOL or abs(at1) > BOUNDARY_TOL:
        raise BoundaryConditionError(at0, at1)


def _compiler_order(f: Polynomial, arity: Optional[int]) -> int:
    order = arity if arity is not None else max(f.degree, 2)
    if order < 2:
        raise DegreeMismatchError(f"voting models branch into at least 2 children, got arity {order}")
    if order < f.degree:
        raise DegreeMismatchError(f"arity {order} is below the degree {f.degree} of f")
    return order


def _outcome_alpha(b: Tuple[float, ...], order: int, rate: float) -> Tuple[float, ...]:
    # alpha_k = k/N + mu_k with mu_k = b_k / beta
    alpha = [0.0] * (order + 1)
    alpha[order] = 1.0
    for k in range(1, order):
        value = k / order + b[k] / rate
        if value < -PROB_TOL or value > 1.0 + PROB_TOL:
            raise RateTooSmallError(k, value, rate)
        alpha[k] = clamp_probability(value)
    return tuple(alpha)


def compile_outcome(f: Polynomial, rate_override: Optional[float] = None,
                    arity: Optional[int] = None) -> RandomOutcomeModel:
    """Random outcome model on a pure N-ary tree whose forward map is ``f``.

    The default rate is max(N * max_k |b_k[f]|, 1): the smallest rate that keeps
    every alpha_k in [0, 1], floored at 1 so the heat case is well-posed.
    """
    _check_boundary(f)
    order = _compiler_order(f, arity)
    vector = to_bernstein(f, order)
    if rate_override is not None:
        if rate_override <= 0:
            raise ParameterRangeError(f"rate {rate_override} must be positive", "beta > 0")
        rate = float(rate_override)
    else:
        rate = max(order * vector.max_abs(), 1.0)
    alpha = _outcome_alpha(vector.b, order, rate)
    logger.debug("compiled outcome model: N=%d beta=%g alpha=%s", order, rate, alpha)
    return RandomOutcomeModel(rate, OffspringDistribution.pure(order), {order: alpha}, name="compiled-outcome")


def compile_threshold(f: Polynomial, rate_override: Optional[float] = None,
                      arity: Optional[int] = None) -> RandomThresholdModel:
    """Random threshold model whose forward map is ``f``.

    The default rate max(2N * max_k |b_k[f]|, 1) makes alpha nondecreasing in k,
    so the differences zeta_k = alpha_k - alpha_{k-1} are probabilities.
    """
    _check_boundary(f)
    order = _compiler_order(f, arity)
    vector = to_bernstein(f, order)
    if rate_override is not None:
        if rate_override <= 0:
            raise ParameterRangeError(f"rate {rate_override} must be positive", "beta > 0")
        rate = float(rate_override)
    else:
        rate = max(2 * order * vector.max_abs(), 1.0)
    alpha = _outcome_alpha(vector.b, order, rate)
    zeta = _differences(alpha, rate)
    return RandomThresholdModel(rate, order, zeta, name="compiled-threshold")


def _differences(alpha: Tuple[float, ...], rate: Optional[float] = None) -> Tuple[float, ...]:
    zeta = [alpha[0]]
    for k in range(1, len(alpha)):
        step = alpha[k] - alpha[k - 1]
        if step < -PROB_TOL:
            raise MonotonicityError(k, step, rate)
        zeta.append(clamp_probability(step))
    return tuple(zeta)


def compile_recursive(f: Polynomial, arity: Optional[int] = None) -> RecursiveModel:
    """Recursive propagation model: s_j = f_j / C(N, j)."""
    if arity is None and f.degree < 1:
        raise ValidationError(
            "cannot derive an arity from a constant nonlinearity; pass arity=N (N >= 2) explicitly"
        )
    # a branching event has at least two children
    order = arity if arity is not None else max(f.degree, 2)
    if order < 2:
        raise ValidationError(f"recursive models need arity >= 2, got {order}")
    if order < f.degree:
        raise DegreeMismatchError(f"arity {order} is below the degree {f.degree} of f")
    coeffs = f.padded(order + 1)
    symmetric = tuple(coeffs[j] / binomial(order, j) for j in range(order + 1))
    return RecursiveModel(order, f, symmetric)


def threshold_from_outcome(model: RandomOutcomeModel) -> RandomThresholdModel:
    """zeta_k = alpha_k - alpha_{k-1}; needs a pure arity and monotone alpha."""
    if not model.offspring.is_pure():
        raise ValidationError("threshold models need a pure N-ary offspring law")
    n = model.offspring.max_children
    zeta = _differences(model.alpha[n])
    return RandomThresholdModel(model.rate, n, zeta, name=f"{model.name}-threshold")


def outcome_from_threshold(model: RandomThresholdModel) -> RandomOutcomeModel:
    """alpha_k = sum_{j<=k} zeta_j."""
    alpha = tuple(clamp_probability(a) for a in model.cumulative())
    return RandomOutcomeModel(model.rate, model.offspring, {model.arity: alpha}, name=f"{model.name}-outcome")


def _table_nonlinearity(alpha: Tuple[float, ...]) -> Polynomial:
    # sum_k C(n,k) alpha_k u^k (1-u)^(n-k) - u
    return bernstein_mixture(alpha) - Polynomial.of(0.0, 1.0)


def forward_nonlinearity(model: VotingModel) -> Polynomial:
    """Reaction term f(u) of the PDE solved by the model's root probability/expectation."""
    if isinstance(model, RecursiveModel):
        return model.f
    if isinstance(model, RandomOutcomeModel):
        total = Polynomial.zero()
        for n, p in model.offspring.probs.items():
            total = total + _table_nonlinearity(model.alpha[n]).scale(p)
        return total.scale(model.rate).trimmed()
    if isinstance(model, RandomThresholdModel):
        # G(u) = beta * (sum_k B_{k,N}(u) sum_{j<=k} zeta_j - u)
        return _table_nonlinearity(model.cumulative()).scale(model.rate).trimmed()
    if isinstance(model, CompositeLabelModel):
        total = Polynomial.zero()
        for rule in model.labels:
            total = total + _table_nonlinearity(rule.alpha).scale(rule.probability)
        return total.scale(model.rate).trimmed()
    raise ValidationError(f"unsupported model type {type(model).__name__}")


def mckean_decompose(f: Polynomial) -> Union[McKeanDecomposition, NotMcKean]:
    """Write f(u) = beta (1 - u - sum_k p_k (1-u)^k) if possible.

    In powers of v = 1 - u, f = sum_j c_j v^j is McKean iff c_1 > 0, c_j <= 0
    for j >= 2 and -sum_{j>=2} c_j = c_1.
    """
    _check_boundary(f)
    c = list(f.reflect().coeffs) + [0.0, 0.0]
    c1 = c[1]
    if c1 <= MCKEAN_TOL:
        return NotMcKean("c_1 > 0", f"coefficient of v = 1-u is {c1:.6g}")
    for j in range(2, len(c)):
        if c[j] > MCKEAN_TOL:
            return NotMcKean("c_j <= 0 for j >= 2", f"c_{j} = {c[j]:.6g}")
    deficit = -math.fsum(c[2:]) - c1
    if abs(deficit) > MCKEAN_TOL:
        return NotMcKean("-sum_{j>=2} c_j = c_1", f"mismatch {deficit:.3g}")
    rate = c1
    probs = {j: -c[j] / rate for j in range(2, len(c)) if -c[j] / rate > PROB_TOL}
    total = math.fsum(probs.values())
    probs = {k: p / total for k, p in probs.items()}
    offspring = OffspringDistribution(probs)
    lam = rate * (offspring.mean() - 1.0)
    return McKeanDecomposition(rate, offspring, lam)


def mckean_nonlinearity(rate: float, offspring: OffspringDistribution) -> Polynomial:
    """beta (1 - u - sum_k p_k (1-u)^k) in the power basis."""
    v = Polynomial.of(1.0, -1.0)
    total = v
    for k, p in offspring.probs.items():
        power = Polynomial.of(1.0)
        for _ in range(k):
            power = power * v
        total = total - power.scale(p)
    return total.scale(rate).trimmed()


def _check_table(label: str, n: int, alpha: Tuple[float, ...], diagnostics: ModelDiagnostics) -> bool:
    """Append range/boundary problems for one alpha table; return monotonicity."""
    if abs(alpha[0]) > PROB_TOL:
        diagnostics.errors.append(f"{label}: alpha_0{n} = {alpha[0]:.6g}, must be 0")
    if abs(alpha[n] - 1.0) > PROB_TOL:
        diagnostics.errors.append(f"{label}: alpha_{n}{n} = {alpha[n]:.6g}, must be 1")
    for k, a in enumerate(alpha):
        if a < -PROB_TOL or a > 1.0 + PROB_TOL:
            diagnostics.errors.append(f"{label}: alpha_{k}{n} = {a:.6g} is outside [0, 1]")
    monotone = all(alpha[k] >= alpha[k - 1] - PROB_TOL for k in range(1, n + 1))
    if not monotone:
        diagnostics.warnings.append(f"{label}: alpha is not monotone in k")
    return monotone


def validate(model: VotingModel) -> ModelDiagnostics:
    """Diagnose probability constraints without raising."""
    diagnostics = ModelDiagnostics(kind=model.kind)
    if model.rate <= 0:
        diagnostics.errors.append(f"rate {model.rate} must be positive")

    if isinstance(model, RandomOutcomeModel):
        diagnostics.probability_sums['offspring'] = math.fsum(model.offspring.probs.values())
        monotone = True
        for n in model.offspring.arities:
            monotone = _check_table(f"arity {n}", n, model.alpha[n], diagnostics) and monotone
        diagnostics.monotone = monotone
        diagnostics.threshold_convertible = monotone and model.offspring.is_pure() and diagnostics.valid

    elif isinstance(model, RandomThresholdModel):
        total = math.fsum(model.zeta)
        diagnostics.probability_sums['zeta'] = total
        if abs(total - 1.0) > PROB_TOL:
            diagnostics.errors.append(f"zeta sums to {total:.15g} (deficit {1.0 - total:.3g})")
        for k, z in enumerate(model.zeta):
            if z < -PROB_TOL or z > 1.0 + PROB_TOL:
                diagnostics.errors.append(f"zeta_{k} = {z:.6g} is outside [0, 1]")
        if abs(model.zeta[0]) > PROB_TOL:
            diagnostics.errors.append(f"zeta_0 = {model.zeta[0]:.6g}, must be 0 (alpha_0N = 0)")
        diagnostics.monotone = True
        diagnostics.threshold_convertible = diagnostics.valid

    elif isinstance(model, CompositeLabelModel):
        total = math.fsum(rule.probability for rule in model.labels)
        diagnostics.probability_sums['labels'] = total
        if abs(total - 1.0) > PROB_TOL:
            diagnostics.errors.append(f"label probabilities sum to {total:.15g}")
        monotone = True
        for rule in model.labels:
            if rule.probability < -PROB_TOL or rule.probability > 1.0 + PROB_TOL:
                diagnostics.errors.append(f"label {rule.name!r}: probability {rule.probability:.6g} outside [0, 1]")
            monotone = _check_table(f"label {rule.name!r}", model.arity, rule.alpha, diagnostics) and monotone
        diagnostics.monotone = monotone
        diagnostics.threshold_convertible = False

    elif isinstance(model, RecursiveModel):
        rebuilt = Polynomial(tuple(
            s * binomial(model.arity, j) for j, s in enumerate(model.symmetric_coeffs)
        ))
        if not rebuilt.allclose(model.f, MCKEAN_TOL):
            diagnostics.errors.append("symmetric coefficients do not reconstruct f")
        diagnostics.threshold_convertible = False

    return diagnostics


def require_valid(model: VotingModel) -> VotingModel:
    """Raise ValidationError listing every problem ``validate`` finds."""
    diagnostics = validate(model)
    if not diagnostics.valid:
        raise ValidationError(f"invalid {model.kind} model: " + "; ".join(diagnostics.errors))
    return model
