"""
Polynomial algebra in the power and Bernstein bases.

Nonlinearities f(u) = f_0 + f_1 u + ... + f_N u^N are immutable ``Polynomial``
values. The Bernstein conversion uses the closed-form lower-triangular map
with exact integer binomials instead of an interpolation solve.
"""

import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from bbm_voting.errors import DegreeMismatchError, ValidationError

MAX_DEGREE = 64

ArrayLike = Union[float, np.ndarray]


def binomial(n: int, k: int) -> int:
    """Exact C(n, k) for 0 <= k <= n <= 64."""
    if not (0 <= k <= n <= MAX_DEGREE):
        raise ValidationError(
            f"binomial({n}, {k}) is outside 0 <= k <= n <= {MAX_DEGREE}"
        )
    return math.comb(n, k)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in the power basis, stored in canonical form.

    ``coeffs[k]`` is the coefficient of u^k. Trailing exact zeros are dropped;
    the zero polynomial is ``(0.0,)`` with degree 0.
    """

    coeffs: Tuple[float, ...]

    def __post_init__(self):
        values = [float(c) for c in self.coeffs] or [0.0]
        if not all(math.isfinite(c) for c in values):
            raise ValidationError(f"polynomial coefficients must be finite: {values}")
        while len(values) > 1 and values[-1] == 0.0:
            values.pop()
        if len(values) - 1 > MAX_DEGREE:
            raise ValidationError(f"degree {len(values) - 1} exceeds the cap of {MAX_DEGREE}")
        object.__setattr__(self, 'coeffs', tuple(values))

    @classmethod
    def of(cls, *coeffs: float) -> "Polynomial":
        return cls(tuple(coeffs))

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls((0.0,))

    @classmethod
    def monomial(cls, k: int, scale: float = 1.0) -> "Polynomial":
        return cls(tuple([0.0] * k + [scale]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, u: ArrayLike) -> ArrayLike:
        return evaluate(self, u)

    def coefficient(self, k: int) -> float:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0.0

    def padded(self, length: int) -> List[float]:
        return [self.coefficient(k) for k in range(length)]

    def trimmed(self, tol: float = 1e-12) -> "Polynomial":
        """Zero out coefficients below ``tol`` in absolute value (float noise)."""
        return Polynomial(tuple(0.0 if abs(c) <= tol else c for c in self.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(tuple(a + b for a, b in zip(self.padded(n), other.padded(n))))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial.zero()
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def reflect(self) -> "Polynomial":
        """Coefficients of the same function written in powers of v = 1 - u."""
        n = self.degree
        out = [0.0] * (n + 1)
        for j, c in enumerate(self.coeffs):
            # u^j = (1 - v)^j
            for i in range(j + 1):
                out[i] += c * math.comb(j, i) * (-1) ** i
        return Polynomial(tuple(out))

    def allclose(self, other: "Polynomial", tol: float = 1e-9) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        return all(abs(a - b) <= tol for a, b in zip(self.padded(n), other.padded(n)))

    def __str__(self) -> str:
        return format_polynomial(self)


@dataclass(frozen=True)
class BernsteinVector:
    """Coefficients b_0..b_N of a polynomial in the order-N Bernstein basis."""

    order: int
    b: Tuple[float, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValidationError(f"Bernstein order must be >= 1, got {self.order}")
        values = tuple(float(x) for x in self.b)
        if len(values) != self.order + 1:
            raise ValidationError(
                f"Bernstein vector of order {self.order} needs {self.order + 1} entries, got {len(values)}"
            )
        if not all(math.isfinite(x) for x in values):
            raise ValidationError(f"Bernstein coefficients must be finite: {values}")
        object.__setattr__(self, 'b', values)

    def max_abs(self) -> float:
        return max(abs(x) for x in self.b)


def evaluate(p: Polynomial, u: ArrayLike) -> ArrayLike:
    """Horner evaluation; ``u`` may be a float or a numpy array."""
    result = 0.0 * u
    for c in reversed(p.coeffs):
        result = result * u + c
    return result


def bernstein_basis(k: int, n: int, u: ArrayLike) -> ArrayLike:
    """B_{k,n}(u) = C(n,k) u^k (1-u)^(n-k)."""
    return binomial(n, k) * u ** k * (1.0 - u) ** (n - k)


def to_bernstein(p: Polynomial, order: int) -> BernsteinVector:
    """Bernstein coefficients of ``p`` at the given order.

    b_k = sum_{j<=k} C(k,j)/C(order,j) f_j; the endpoints are pinned to p(0)
    and p(1) so that b_0 = f(0) and b_N = f(1) hold exactly.
    """
    if order < 1:
        raise DegreeMismatchError(f"Bernstein order must be >= 1, got {order}")
    if order < p.degree:
        raise DegreeMismatchError(
            f"cannot represent a degree-{p.degree} polynomial in the order-{order} Bernstein basis"
        )
    f = p.padded(order + 1)
    b = []
    for k in range(order + 1):
        b.append(math.fsum(binomial(k, j) / binomial(order, j) * f[j] for j in range(k + 1)))
    b[0] = float(evaluate(p, 0.0))
    b[order] = float(evaluate(p, 1.0))
    return BernsteinVector(order, tuple(b))


def from_bernstein(vector: BernsteinVector) -> Polynomial:
    """Expand sum_k b_k B_{k,N}(u) into the power basis."""
    n = vector.order
    out = []
    for j in range(n + 1):
        terms = (
            vector.b[k] * binomial(n, k) * binomial(n - k, j - k) * (-1) ** (j - k)
            for k in range(j + 1)
        )
        out.append(math.fsum(terms))
    return Polynomial(tuple(out))


def bernstein_mixture(weights: Sequence[float]) -> Polynomial:
    """Power-basis form of sum_k w_k B_{k,n}(u) for n = len(weights) - 1."""
    if len(weights) == 1:
        return Polynomial((float(weights[0]),))
    return from_bernstein(BernsteinVector(len(weights) - 1, tuple(weights)))


# Text forms: "[c0, c1, ...]" or "c0 + c1*u + c2*u^2" (the '*' is optional).
_NUMBER = r'(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?'
_TERM = re.compile(
    r'\s*(?P<sign>[+-])?\s*(?:(?P<coef>' + _NUMBER + r')\s*\*?\s*)?'
    r'(?P<var>u(?:\s*(?:\^|\*\*)\s*(?P<power>\d+))?)?\s*'
)


def parse_polynomial(text: str) -> Polynomial:
    """Parse a coefficient list or a sum of terms in ``u``."""
    source = text.strip()
    if not source:
        raise ValidationError("empty polynomial text")
    if source.startswith('['):
        try:
            values = json.loads(source)
        except json.JSONDecodeError as e:
            raise ValidationError(f"bad coefficient list {text!r}: {e}") from e
        if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
            raise ValidationError(f"coefficient list must contain numbers only: {text!r}")
        return Polynomial(tuple(values))

    coeffs: dict = {}
    pos = 0
    first = True
    while pos < len(source):
        match = _TERM.match(source, pos)
        if not match or match.end() == pos or not (match.group('coef') or match.group('var')):
            raise ValidationError(f"cannot parse polynomial {text!r} near position {pos}")
        if not first and not match.group('sign'):
            raise ValidationError(f"missing '+' or '-' between terms in {text!r}")
        sign = -1.0 if match.group('sign') == '-' else 1.0
        coef = float(match.group('coef')) if match.group('coef') else 1.0
        if match.group('var'):
            power = int(match.group('power')) if match.group('power') else 1
        else:
            power = 0
        coeffs[power] = coeffs.get(power, 0.0) + sign * coef
        pos = match.end()
        first = False
    degree = max(coeffs)
    return Polynomial(tuple(coeffs.get(k, 0.0) for k in range(degree + 1)))


def _format_number(value: float) -> str:
    return f"{value:.17g}" if value != int(value) or abs(value) >= 1e16 else str(int(value))


def format_polynomial(p: Polynomial) -> str:
    """Render as "c0 + c1*u + c2*u^2 + ...", skipping zero terms and unit factors."""
    parts: List[str] = []
    for k, c in enumerate(p.coeffs):
        if c == 0.0:
            continue
        magnitude = abs(c)
        if k == 0:
            body = _format_number(magnitude)
        else:
            var = 'u' if k == 1 else f'u^{k}'
            body = var if magnitude == 1.0 else f"{_format_number(magnitude)}*{var}"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f"- {body}" if c < 0 else f"+ {body}")
    return ' '.join(parts) if parts else '0'


def from_roots(roots: Iterable[float], scale: float = 1.0) -> Polynomial:
    """scale * prod (u - r); handy for building test nonlinearities."""
    result = Polynomial.of(scale)
    for r in roots:
        result = result * Polynomial.of(-r, 1.0)
    return result
