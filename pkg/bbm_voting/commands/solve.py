"""solve and front subcommands."""

import argparse
from typing import Any, Dict

from bbm_voting.commands.common import (
    add_model_flags,
    add_run_flags,
    banner,
    config_from_args,
    console,
    nonlinearity_of,
)
from bbm_voting.errors import NoCrossingError
from bbm_voting.output import field_frame, format_rows, series_frame, write_csv, write_summary
from bbm_voting.pde import bramson_fit, front_location, front_series, pushed_speed, solve
from bbm_voting.poly import format_polynomial

SOLVER_FLAGS = {'dx': 'solver.dx', 'x_min': 'solver.x_min', 'x_max': 'solver.x_max', 'dt': 'solver.dt',
                'snapshot_every': 'solver.snapshot_every'}

FRONT_FLAGS = {'t_end': 'front.t_end', 'dx': 'front.dx', 'half_width': 'front.half_width',
               'window': 'front.window', 'level': 'front.level', 'fit': 'front.fit',
               'correction': 'front.correction'}


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = config_from_args(args, ('f', 'model', 'rate', 'arity', 'datum', 't', 'x', 'output', 'summary'),
                           SOLVER_FLAGS)
    f, model_id = nonlinearity_of(cfg)
    grid = cfg.solver.grid()

    banner("PDE SOLVE: u_t = u_xx + f(u)")
    console.print(f"f(u) = {format_polynomial(f)}", markup=False)
    console.print(f"grid [{grid.x_min:g}, {grid.x_max:g}], dx = {grid.dx:.4g}, t = {cfg.t:g}\n", markup=False)
    field = solve(f, cfg.initial_datum(), grid, cfg.t, cfg.solver.solver_config())

    xs = cfg.x_values()
    points = [{'x': float(x), 'u': field.at(x)} for x in xs]
    for p in points:
        console.print(f"u({cfg.t:g}, {p['x']:g}) = {p['u']:.10g}", markup=False)
    try:
        console.print(f"\nfront location (u = 1/2): {front_location(field):.6g}", markup=False)
    except NoCrossingError:
        console.print("\nno front: the profile never drops through 1/2", markup=False)

    items = {**cfg.header_items(), 'model_id': model_id}
    if cfg.output:
        write_csv(field_frame(field), cfg.output, 'solve', items)
        console.print(f"\n✓ Field written to {cfg.output}", markup=False)
    if cfg.summary:
        write_summary(cfg.summary, 'solve', items, points)
    return 0


def cmd_front(args: argparse.Namespace) -> int:
    cfg = config_from_args(args, ('f', 'model', 'datum', 'output', 'summary'), FRONT_FLAGS)
    f, model_id = nonlinearity_of(cfg)
    front = cfg.front

    banner("FRONT TRACKING")
    console.print(f"f(u) = {format_polynomial(f)}", markup=False)
    console.print(f"t_end = {front.t_end:g}, dx = {front.dx:g}, window {front.window}\n", markup=False)
    series = front_series(f, cfg.initial_datum(), front.t_end, front.front_config())

    report: Dict[str, Any] = {'final_position': float(series.positions[-1]),
                              'mean_speed': float(series.positions[-1] / series.times[-1])}
    f_prime_0 = f.derivative()(0.0)
    if front.fit in ('pulled', 'both'):
        fit = bramson_fit(series, f_prime_0, front.window, finite_time_correction=front.correction)
        report['pulled'] = fit.__dict__
        form = "a log t + b + c/√t" if front.correction else "a log t + b"
        console.print(f"Pulled-front fit  X(t) - 2√f'(0) t = {form}", markup=False)
        console.print(f"  speed 2√f'(0):   {fit.speed:.6g}", markup=False)
        console.print(f"  log slope a:     {fit.log_slope:.6g} (Bramson {fit.target_log_slope:.6g})", markup=False)
        console.print(f"  intercept b:     {fit.intercept:.6g}", markup=False)
        if front.correction:
            console.print(f"  correction c:    {fit.correction:.6g}", markup=False)
        console.print(f"  X(t)/t at end:   {fit.mean_speed:.6g}", markup=False)
        console.print(f"  rms residual:    {fit.residual:.3g}\n", markup=False)
    if front.fit in ('pushed', 'both'):
        speed = pushed_speed(series, front.window)
        free = bramson_fit(series, f_prime_0, front.window, free_speed=True)
        report['pushed'] = {'speed': speed, 'free_fit': free.__dict__}
        console.print("Pushed-front fit  X(t) = c t + x0", markup=False)
        console.print(f"  speed c:         {speed:.6g}", markup=False)
        console.print(f"  log slope (free-speed fit): {free.log_slope:.4g}\n", markup=False)

    items = {**cfg.header_items(), 'model_id': model_id}
    frame = series_frame(series)
    for line in format_rows(frame.iloc[:: max(1, len(frame) // 10)], ['t', 'X']):
        console.print(line, markup=False)
    if cfg.output:
        write_csv(frame, cfg.output, 'front', items)
        console.print(f"\n✓ Front series written to {cfg.output}", markup=False)
    if cfg.summary:
        write_summary(cfg.summary, 'front', items, report)
    return 0


def register(subparsers) -> None:
    p = subparsers.add_parser(
        'solve',
        help='Finite-difference solution of u_t = u_xx + f(u)',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Allen-Cahn from step data, field at t = 1 written as (t, x, u)
    python -m bbm_voting.cli solve --f allen-cahn --t 1 --output field.csv

    # Snapshots every 0.25 time units
    python -m bbm_voting.cli solve --f "u - u^2" --t 2 --snapshot-every 0.25 --output traj.csv
        """,
    )
    add_model_flags(p)
    p.add_argument('--datum', help='Initial datum (default step)')
    p.add_argument('--t', type=float, help='Final time')
    p.add_argument('--x', help='Points to report: min:max:count, a number, or a comma list')
    p.add_argument('--dx', type=float, help='Grid spacing (default 0.02)')
    p.add_argument('--x-min', type=float, dest='x_min', help='Domain left end (default -12)')
    p.add_argument('--x-max', type=float, dest='x_max', help='Domain right end (default 12)')
    p.add_argument('--dt', type=float, help='Time step (default 0.25 dx^2)')
    p.add_argument('--snapshot-every', type=float, dest='snapshot_every', help='Snapshot cadence')
    add_run_flags(p)
    p.set_defaults(handler=cmd_solve)

    p = subparsers.add_parser(
        'front',
        help='Front location series with pulled/pushed fits',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Fisher-KPP: Bramson correction over t in [20, 200]
    python -m bbm_voting.cli front --f "u - u^2" --t-end 200 --fit pulled

    # Same, with the c/sqrt(t) finite-time term fitted too
    python -m bbm_voting.cli front --f "u - u^2" --t-end 200 --fit pulled --correction

    # Pushed front of (u - u^2)(1 + 4u)
    python -m bbm_voting.cli front --f "u + 3u^2 - 4u^3" --t-end 100 --window 20:100 --fit pushed
        """,
    )
    add_model_flags(p)
    p.add_argument('--datum', help='Initial datum (default step)')
    p.add_argument('--t-end', type=float, dest='t_end', help='Final time (default 200)')
    p.add_argument('--dx', type=float, help='Grid spacing (default 0.1)')
    p.add_argument('--half-width', type=float, dest='half_width', help='Half width of the moving window (default 40)')
    p.add_argument('--window', help='Fit window start:end (default 20:200)')
    p.add_argument('--level', type=float, help='Level set tracked (default 1/2)')
    p.add_argument('--fit', choices=['pulled', 'pushed', 'both'])
    p.add_argument('--correction', action='store_true', default=None,
                   help='Fit a c/sqrt(t) term alongside the log delay')
    add_run_flags(p)
    p.set_defaults(handler=cmd_front)

