"""
Finite-difference oracle for u_t = u_xx + f(u) in one dimension.

Time stepping is Strang splitting: an RK4 half-step of the reaction ODE, a
Crank-Nicolson step of the diffusion, and another reaction half-step. The
Laplacian uses ghost-point Neumann rows, which conserve the trapezoid
integral of u exactly. With dt <= dx^2 both sub-steps keep u inside [0, 1]
for f(0) = f(1) = 0, so no clamping is applied.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import solve_banded
from scipy.special import erfc

from bbm_voting.datums import InitialDatum
from bbm_voting.errors import FitError, InstabilityError, NoCrossingError, ValidationError
from bbm_voting.poly import Polynomial, evaluate

logger = logging.getLogger(__name__)

MIN_POINTS = 16
MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValidationError(f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n_points < MIN_POINTS:
            raise ValidationError(f"grid needs at least {MIN_POINTS} points, got {self.n_points}")

    @classmethod
    def with_spacing(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        """Grid on [x_min, x_max] whose spacing is as close to ``dx`` as the length allows."""
        if dx <= 0:
            raise ValidationError(f"dx must be positive, got {dx}")
        return cls(x_min, x_max, int(round((x_max - x_min) / dx)) + 1)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def shifted(self, cells: int) -> "Grid1D":
        offset = cells * self.dx
        return Grid1D(self.x_min + offset, self.x_max + offset, self.n_points)


@dataclass
class Field:
    """u(t, .) on a grid, plus any snapshots taken on the way."""

    grid: Grid1D
    t: float
    values: np.ndarray
    snapshots: List[Tuple[float, np.ndarray]] = field(default_factory=list)

    def at(self, x: float) -> float:
        """Linear interpolation of the field at x."""
        return float(np.interp(x, self.grid.xs, self.values))

    def integral(self) -> float:
        return float(trapezoid(self.values, dx=self.grid.dx))


@dataclass(frozen=True)
class SolverConfig:
    """``dt`` defaults to ``cfl * dx**2``; ``snapshot_every`` <= 0 disables snapshots."""

    dt: Optional[float] = None
    cfl: float = 0.25
    snapshot_every: float = 0.0

    def time_step(self, dx: float) -> float:
        dt = self.dt if self.dt is not None else self.cfl * dx * dx
        if not dt > 0:
            raise ValidationError(f"time step must be positive, got {dt}")
        return dt


class SplitStepper:
    """One Strang step of reaction / diffusion / reaction on a fixed grid."""

    def __init__(self, f: Polynomial, n_points: int, dx: float, dt: float):
        self.f = f
        self.dt = dt
        self.r = dt / (2.0 * dx * dx)
        r = self.r
        # Crank-Nicolson left-hand matrix I - (dt/2) L in banded storage
        ab = np.zeros((3, n_points))
        ab[0, 1:] = -r
        ab[1, :] = 1.0 + 2.0 * r
        ab[2, :-1] = -r
        ab[0, 1] = -2.0 * r
        ab[2, -2] = -2.0 * r
        self.banded = ab

    def _second_difference(self, u: np.ndarray) -> np.ndarray:
        d = np.empty_like(u)
        d[1:-1] = u[:-2] - 2.0 * u[1:-1] + u[2:]
        d[0] = 2.0 * (u[1] - u[0])
        d[-1] = 2.0 * (u[-2] - u[-1])
        return d

    def react(self, u: np.ndarray, h: float) -> np.ndarray:
        if self.f.is_zero():
            return u
        k1 = evaluate(self.f, u)
        k2 = evaluate(self.f, u + 0.5 * h * k1)
        k3 = evaluate(self.f, u + 0.5 * h * k2)
        k4 = evaluate(self.f, u + h * k3)
        return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _diffuse(self, u: np.ndarray) -> np.ndarray:
        rhs = u + self.r * self._second_difference(u)
        return solve_banded((1, 1), self.banded, rhs, check_finite=False)

    def step(self, u: np.ndarray) -> np.ndarray:
        half = 0.5 * self.dt
        return self.react(self._diffuse(self.react(u, half)), half)


def _advance(stepper: SplitStepper, u: np.ndarray, t0: float, n_steps: int) -> np.ndarray:
    for i in range(n_steps):
        u = stepper.step(u)
        if not np.all(np.isfinite(u)):
            raise InstabilityError(t0 + (i + 1) * stepper.dt, stepper.dt / 4.0)
    return u


def solve(f: Polynomial, g: InitialDatum, grid: Grid1D, t_end: float,
          cfg: Optional[SolverConfig] = None) -> Field:
    """Solve u_t = u_xx + f(u), u(0) = g, with zero-flux boundaries up to ``t_end``.

    Args:
        f: Reaction polynomial.
        g: Initial datum, sampled by cell averages so a jump on a grid point reads 1/2.
        grid: Spatial grid.
        t_end: Final time (>= 0).
        cfg: Step size and snapshot cadence.

    Returns:
        Field at ``t_end``; ``snapshots`` holds (t, values) pairs when requested.
    """
    cfg = cfg or SolverConfig()
    if t_end < 0:
        raise ValidationError(f"t_end must be >= 0, got {t_end}")
    u = g.cell_average(grid.xs, grid.dx)
    snapshots: List[Tuple[float, np.ndarray]] = []
    if cfg.snapshot_every > 0:
        snapshots.append((0.0, u.copy()))
    if t_end == 0:
        return Field(grid, 0.0, u, snapshots)

    n_steps = max(1, math.ceil(t_end / cfg.time_step(grid.dx) - 1e-9))
    dt = t_end / n_steps
    stepper = SplitStepper(f, grid.n_points, grid.dx, dt)
    logger.debug("solve: %d points, dx=%.4g, dt=%.4g, %d steps", grid.n_points, grid.dx, dt, n_steps)

    if cfg.snapshot_every > 0:
        every = max(1, int(round(cfg.snapshot_every / dt)))
        done = 0
        while done < n_steps:
            chunk = min(every, n_steps - done)
            u = _advance(stepper, u, done * dt, chunk)
            done += chunk
            snapshots.append((done * dt, u.copy()))
    else:
        u = _advance(stepper, u, 0.0, n_steps)
    return Field(grid, t_end, u, snapshots)


def heat_exact(t, x, at: float = 0.0):
    """½·erfc((x - at)/(2√t)): the heat solution from the step datum 1(x < at)."""
    if np.any(np.asarray(t) <= 0):
        raise ValidationError("heat_exact needs t > 0")
    value = 0.5 * erfc((np.asarray(x, dtype=float) - at) / (2.0 * np.sqrt(t)))
    return float(value) if np.ndim(value) == 0 else value


def crossing(xs: np.ndarray, values: np.ndarray, level: float = 0.5) -> float:
    """Rightmost x where the profile drops through ``level``, linearly interpolated."""
    v = np.asarray(values, dtype=float)
    hits = np.flatnonzero((v[:-1] >= level) & (v[1:] < level))
    if hits.size == 0:
        raise NoCrossingError(
            f"profile never drops through level {level:g} (range [{v.min():.4g}, {v.max():.4g}])"
        )
    i = int(hits[-1])
    fraction = (v[i] - level) / (v[i] - v[i + 1])
    return float(xs[i] + fraction * (xs[i + 1] - xs[i]))


def front_location(field: Field, level: float = 0.5) -> float:
    return crossing(field.grid.xs, field.values, level)


@dataclass(frozen=True)
class FrontConfig:
    """Comoving-window settings for long front runs."""

    dx: float = 0.1
    half_width: float = 40.0
    regrid_every: float = 1.0
    level: float = 0.5
    cfl: float = 0.25
    dt: Optional[float] = None


@dataclass
class FrontSeries:
    times: np.ndarray
    positions: np.ndarray
    final: Field

    def in_window(self, window: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
        t0, t1 = window
        mask = (self.times >= t0 - 1e-9) & (self.times <= t1 + 1e-9) & (self.times > 0)
        return self.times[mask], self.positions[mask]


def front_series(f: Polynomial, g: InitialDatum, t_end: float,
                 cfg: Optional[FrontConfig] = None) -> FrontSeries:
    """Track X(t) in a window [X - half_width, X + half_width] that follows the front.

    Every ``regrid_every`` time units the front is located and the window is
    moved by a whole number of cells. Cells entering on either side take the
    datum's limiting state on that side, carried forward in time by the
    reaction ODE u' = f(u).
    """
    cfg = cfg or FrontConfig()
    if t_end <= 0:
        raise ValidationError(f"front runs need t_end > 0, got {t_end}")
    cells = int(round(cfg.half_width / cfg.dx))
    # the window starts at the jump of a step datum, at the origin otherwise
    start = g.at if g.kind == 'step' else 0.0
    x_min = round(start / cfg.dx) * cfg.dx - cells * cfg.dx
    grid = Grid1D(x_min, x_min + 2 * cells * cfg.dx, 2 * cells + 1)
    u = g.cell_average(grid.xs, grid.dx)

    per_chunk = max(1, math.ceil(cfg.regrid_every / SolverConfig(cfg.dt, cfg.cfl).time_step(cfg.dx) - 1e-9))
    dt = cfg.regrid_every / per_chunk
    stepper = SplitStepper(f, grid.n_points, grid.dx, dt)
    n_chunks = max(1, int(round(t_end / cfg.regrid_every)))

    # (left, right) far-field states; a flat profile only feels the reaction
    ends = np.array(g.far_field())

    times = [0.0]
    positions = [crossing(grid.xs, u, cfg.level)]
    for chunk in range(1, n_chunks + 1):
        u = _advance(stepper, u, (chunk - 1) * cfg.regrid_every, per_chunk)
        for _ in range(per_chunk):
            ends = stepper.react(stepper.react(ends, 0.5 * dt), 0.5 * dt)
        t = chunk * cfg.regrid_every
        x_front = crossing(grid.xs, u, cfg.level)
        times.append(t)
        positions.append(x_front)
        shift = int(round((x_front - (grid.x_min + cells * grid.dx)) / grid.dx))
        if shift > 0:
            u = np.concatenate([u[shift:], np.full(shift, ends[1])])
        elif shift < 0:
            u = np.concatenate([np.full(-shift, ends[0]), u[:shift]])
        if shift:
            grid = grid.shifted(shift)
        if chunk % 50 == 0:
            logger.info("front: t=%g X=%.6g", t, x_front)
    final = Field(grid, n_chunks * cfg.regrid_every, u)
    return FrontSeries(np.array(times), np.array(positions), final)


@dataclass(frozen=True)
class FrontFit:
    """Fitted front statistics over ``fit_window``.

    ``speed`` is the linear speed used or estimated by the fit; ``mean_speed``
    is X(t_end)/t_end at the last sample in the window. ``correction`` is the
    c/√t coefficient when that column was fitted, NaN otherwise.
    """

    speed: float
    log_slope: float
    intercept: float
    fit_window: Tuple[float, float]
    residual: float
    mean_speed: float
    target_log_slope: float
    n_samples: int
    correction: float = math.nan


def _window_samples(series: FrontSeries, window: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    if window[0] > window[1]:
        raise FitError(f"fit window must be ordered, got {window}")
    t, x = series.in_window(window)
    if t.size < MIN_FIT_SAMPLES:
        raise FitError(f"fit window {window} holds {t.size} samples; need at least {MIN_FIT_SAMPLES}")
    return t, x


def bramson_fit(series: FrontSeries, f_prime_0: float, window: Tuple[float, float] = (20.0, 200.0),
                free_speed: bool = False, finite_time_correction: bool = False) -> FrontFit:
    """Least-squares fit of X(t) - 2√(f'(0)) t = a log t + b over the window.

    ``a`` is reported as ``log_slope`` and ``b`` as ``intercept``. With
    ``finite_time_correction`` a c/√t column is fitted alongside, which takes
    up the slow approach to the logarithmic delay at moderate t. With
    ``free_speed`` the speed is fitted as well, X(t) = v t + a log t + b,
    which is the form to use for pushed fronts.
    """
    if f_prime_0 <= 0 and not free_speed:
        raise FitError(f"pulled-front fit needs f'(0) > 0, got {f_prime_0}")
    t, x = _window_samples(series, window)
    columns = [np.log(t), np.ones_like(t)]
    if free_speed:
        columns.insert(0, t)
        target = x
    else:
        target = x - 2.0 * math.sqrt(f_prime_0) * t
    if finite_time_correction:
        columns.append(1.0 / np.sqrt(t))
    design = np.column_stack(columns)
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    if free_speed:
        speed, rest = coef[0], coef[1:]
    else:
        speed, rest = 2.0 * math.sqrt(f_prime_0), coef
    residual = float(np.sqrt(np.mean((design @ coef - target) ** 2)))
    return FrontFit(
        speed=float(speed),
        log_slope=float(rest[0]),
        intercept=float(rest[1]),
        fit_window=(float(t[0]), float(t[-1])),
        residual=residual,
        mean_speed=float(x[-1] / t[-1]),
        target_log_slope=-3.0 / (2.0 * math.sqrt(f_prime_0)) if f_prime_0 > 0 else math.nan,
        n_samples=int(t.size),
        correction=float(rest[2]) if finite_time_correction else math.nan,
    )


def pushed_speed(series: FrontSeries, window: Tuple[float, float] = (20.0, 100.0)) -> float:
    """Least-squares slope of X(t) over the window."""
    t, x = _window_samples(series, window)
    slope, _ = np.polyfit(t, x, 1)
    return float(slope)
