"""
Initial data g(x) shared by the Monte Carlo estimators and the PDE solver.

Only the first coordinate of a position is used by the step and interval
kinds, so the same datum works in any dimension.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import pandas as pd

from bbm_voting.errors import DatumRangeError, ValidationError

KINDS = ('step', 'interval', 'bump', 'constant', 'table')


@dataclass(frozen=True)
class InitialDatum:
    """g(x) for one of the supported kinds.

    ``complement`` turns g into 1 - g, which is how the McKean product and the
    max-of-BBM estimators read the same step data.
    """

    kind: str
    at: float = 0.0
    low: float = -1.0
    high: float = 1.0
    center: float = 0.0
    width: float = 1.0
    height: float = 1.0
    value: float = 1.0
    table_x: Tuple[float, ...] = field(default_factory=tuple)
    table_values: Tuple[float, ...] = field(default_factory=tuple)
    complement: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown datum kind {self.kind!r}; choose one of {', '.join(KINDS)}")
        if self.kind == 'interval' and not self.low < self.high:
            raise ValidationError(f"interval datum needs low < high, got [{self.low}, {self.high}]")
        if self.kind == 'bump' and self.width <= 0:
            raise ValidationError(f"bump width must be positive, got {self.width}")
        if self.kind == 'table':
            if len(self.table_x) < 2 or len(self.table_x) != len(self.table_values):
                raise ValidationError("tabulated datum needs matching x and value columns with >= 2 rows")
            if any(b <= a for a, b in zip(self.table_x, self.table_x[1:])):
                raise ValidationError("tabulated datum x column must be strictly increasing")

    @classmethod
    def step(cls, at: float = 0.0) -> "InitialDatum":
        """Indicator of x_1 < at."""
        return cls('step', at=at)

    @classmethod
    def interval(cls, low: float, high: float) -> "InitialDatum":
        return cls('interval', low=low, high=high)

    @classmethod
    def bump(cls, center: float = 0.0, width: float = 1.0, height: float = 1.0) -> "InitialDatum":
        return cls('bump', center=center, width=width, height=height)

    @classmethod
    def constant(cls, value: float) -> "InitialDatum":
        return cls('constant', value=value)

    @classmethod
    def from_table(cls, xs, values) -> "InitialDatum":
        return cls('table', table_x=tuple(float(x) for x in xs), table_values=tuple(float(v) for v in values))

    @classmethod
    def from_csv(cls, path: str) -> "InitialDatum":
        """Read a two-column (x, g) CSV; '#' lines are comments."""
        frame = pd.read_csv(path, comment='#')
        if frame.shape[1] < 2:
            raise ValidationError(f"{path}: expected two columns (x, g)")
        return cls.from_table(frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1].to_numpy())

    def flipped(self) -> "InitialDatum":
        """The datum 1 - g."""
        return InitialDatum(**{**self.__dict__, 'complement': not self.complement})

    def _raw(self, x1: np.ndarray, rest_sq: np.ndarray) -> np.ndarray:
        if self.kind == 'step':
            return (x1 < self.at).astype(float)
        if self.kind == 'interval':
            return ((x1 >= self.low) & (x1 <= self.high)).astype(float)
        if self.kind == 'bump':
            r2 = (x1 - self.center) ** 2 + rest_sq
            return np.clip(self.height * np.exp(-r2 / (2.0 * self.width ** 2)), 0.0, 1.0)
        if self.kind == 'constant':
            return np.full_like(x1, self.value, dtype=float)
        return np.interp(x1, self.table_x, self.table_values)

    def __call__(self, position) -> float:
        """g at a single d-dimensional position (or scalar)."""
        point = np.atleast_1d(np.asarray(position, dtype=float))
        rest_sq = np.array([float(np.sum(point[1:] ** 2))])
        value = float(self._raw(point[:1], rest_sq)[0])
        return 1.0 - value if self.complement else value

    def on_line(self, xs: np.ndarray) -> np.ndarray:
        """Point values along the first axis."""
        xs = np.asarray(xs, dtype=float)
        values = self._raw(xs, np.zeros_like(xs))
        return 1.0 - values if self.complement else values

    def far_field(self) -> Tuple[float, float]:
        """Limits of g as x_1 -> -inf and x_1 -> +inf."""
        left, right = self.on_line(np.array([-np.inf, np.inf]))
        return float(left), float(right)

    def cell_average(self, xs: np.ndarray, dx: float) -> np.ndarray:
        """Average of g over [x - dx/2, x + dx/2]; exact for steps and intervals.

        Jumps sitting on a grid point get the value 1/2 there, which keeps the
        discrete heat solution second-order accurate.
        """
        xs = np.asarray(xs, dtype=float)
        left = xs - dx / 2.0
        right = xs + dx / 2.0
        if self.kind == 'step':
            values = np.clip((self.at - left) / dx, 0.0, 1.0)
        elif self.kind == 'interval':
            overlap = np.minimum(right, self.high) - np.maximum(left, self.low)
            values = np.clip(overlap / dx, 0.0, 1.0)
        else:
            values = self._raw(xs, np.zeros_like(xs))
        return 1.0 - values if self.complement else values

    def value_range(self) -> Tuple[float, float]:
        if self.kind in ('step', 'interval'):
            lo, hi = 0.0, 1.0
        elif self.kind == 'bump':
            lo, hi = 0.0, min(1.0, max(0.0, self.height))
        elif self.kind == 'constant':
            lo = hi = self.value
        else:
            lo, hi = min(self.table_values), max(self.table_values)
        return (1.0 - hi, 1.0 - lo) if self.complement else (lo, hi)

    def require_probability(self) -> "InitialDatum":
        lo, hi = self.value_range()
        if lo < 0.0 or hi > 1.0:
            raise DatumRangeError(f"voting estimators need 0 <= g <= 1, datum {self.describe()} spans [{lo:g}, {hi:g}]")
        return self

    def describe(self) -> str:
        prefix = '1-' if self.complement else ''
        if self.kind == 'step':
            body = f"step:{self.at:g}"
        elif self.kind == 'interval':
            body = f"interval:{self.low:g}:{self.high:g}"
        elif self.kind == 'bump':
            body = f"bump:{self.center:g}:{self.width:g}:{self.height:g}"
        elif self.kind == 'constant':
            body = f"constant:{self.value:g}"
        else:
            body = f"table[{len(self.table_x)}]"
        return prefix + body


def parse_datum(text: str) -> InitialDatum:
    """Parse "step[:at]", "interval:a:b", "bump[:c[:w[:h]]]", "constant:v" or
    "table:path.csv"; a leading "1-" takes the complement."""
    source = text.strip()
    complement = False
    if source.startswith('1-'):
        complement = True
        source = source[2:]
    head, _, tail = source.partition(':')
    args = [a for a in tail.split(':')] if tail else []
    try:
        if head == 'step':
            datum = InitialDatum.step(float(args[0]) if args else 0.0)
        elif head == 'interval':
            if len(args) != 2:
                raise ValidationError(f"interval datum needs 'interval:low:high', got {text!r}")
            datum = InitialDatum.interval(float(args[0]), float(args[1]))
        elif head == 'bump':
            values = [float(a) for a in args] + [0.0, 1.0, 1.0][len(args):]
            datum = InitialDatum.bump(*values[:3])
        elif head == 'constant':
            datum = InitialDatum.constant(float(args[0]) if args else 1.0)
        elif head == 'table':
            if not tail:
                raise ValidationError("table datum needs 'table:path.csv'")
            datum = InitialDatum.from_csv(tail)
        else:
            raise ValidationError(f"unknown datum {text!r}; choose one of {', '.join(KINDS)}")
    except ValueError as e:
        raise ValidationError(f"bad datum {text!r}: {e}") from e
    return datum.flipped() if complement else datum

