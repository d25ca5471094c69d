"""compile, nonlinearity, decompose and catalog subcommands."""

import argparse
from typing import Sequence

from bbm_voting.catalog import catalog, list_models
from bbm_voting.commands.common import banner, console, parse_params
from bbm_voting.documents import dump_model, load_model, save_model
from bbm_voting.errors import ValidationError
from bbm_voting.models import (
    CompositeLabelModel,
    McKeanDecomposition,
    RandomOutcomeModel,
    RandomThresholdModel,
    RecursiveModel,
    VotingModel,
    compile_outcome,
    compile_recursive,
    compile_threshold,
    forward_nonlinearity,
    mckean_decompose,
    outcome_from_threshold,
    validate,
)
from bbm_voting.poly import format_polynomial, parse_polynomial


def _row(values: Sequence[float]) -> str:
    return '(' + ', '.join(f"{v:.12g}" for v in values) + ')'


def print_model(model: VotingModel) -> None:
    console.print(f"kind:  {model.kind}", markup=False)
    console.print(f"name:  {model.name}", markup=False)
    console.print(f"rate:  {model.rate:.12g}", markup=False)
    if isinstance(model, RandomOutcomeModel):
        console.print(f"offspring: {dict(model.offspring.probs)}", markup=False)
        for n, row in sorted(model.alpha.items()):
            console.print(f"alpha[{n}] = {_row(row)}", markup=False)
    elif isinstance(model, RandomThresholdModel):
        console.print(f"arity: {model.arity}", markup=False)
        console.print(f"zeta  = {_row(model.zeta)}", markup=False)
        console.print(f"alpha = {_row(model.cumulative())}", markup=False)
    elif isinstance(model, RecursiveModel):
        console.print(f"arity: {model.arity}", markup=False)
        console.print(f"symmetric coefficients = {_row(model.symmetric_coeffs)}", markup=False)
    elif isinstance(model, CompositeLabelModel):
        console.print(f"arity: {model.arity}", markup=False)
        for rule in model.labels:
            console.print(f"label {rule.name}: p = {rule.probability:.12g}, alpha = {_row(rule.alpha)}",
                          markup=False)


def print_diagnostics(model: VotingModel) -> bool:
    diagnostics = validate(model)
    console.print(f"\nvalid: {'yes' if diagnostics.valid else 'no'}", markup=False)
    if diagnostics.monotone is not None:
        console.print(f"monotone: {'yes' if diagnostics.monotone else 'no'}", markup=False)
    console.print(f"threshold-convertible: {'yes' if diagnostics.threshold_convertible else 'no'}", markup=False)
    for message in diagnostics.errors:
        console.print(f"❌ {message}", markup=False)
    for message in diagnostics.warnings:
        console.print(f"⚠ {message}", markup=False)
    return diagnostics.valid


def _emit_document(model: VotingModel, output: str) -> None:
    if output:
        save_model(model, output)
        console.print(f"\n✓ Model document written to {output}", markup=False)
    else:
        console.print("\n" + dump_model(model), markup=False, end='')


def cmd_compile(args: argparse.Namespace) -> int:
    f = parse_polynomial(args.f)
    if args.representation == 'recursive':
        model = compile_recursive(f, args.arity)
    elif args.monotone or args.representation == 'threshold':
        threshold = compile_threshold(f, args.rate, args.arity)
        model = threshold if args.representation == 'threshold' else outcome_from_threshold(threshold)
    else:
        model = compile_outcome(f, args.rate, args.arity)

    banner("COMPILE")
    console.print(f"f(u) = {format_polynomial(f)}\n", markup=False)
    print_model(model)
    print_diagnostics(model)
    _emit_document(model, args.output)
    return 0


def cmd_nonlinearity(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    banner("FORWARD NONLINEARITY")
    print_model(model)
    valid = print_diagnostics(model)
    if not valid:
        return ValidationError.exit_code
    console.print(f"\nf(u) = {format_polynomial(forward_nonlinearity(model))}", markup=False)
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    f = parse_polynomial(args.f)
    result = mckean_decompose(f)
    banner("McKEAN DECOMPOSITION")
    console.print(f"f(u) = {format_polynomial(f)}\n", markup=False)
    if isinstance(result, McKeanDecomposition):
        console.print("✓ McKean type", markup=False)
        console.print(f"rate (beta):       {result.rate:.12g}", markup=False)
        console.print(f"offspring:         {dict(result.offspring.probs)}", markup=False)
        console.print(f"lambda = f'(0):    {result.lam:.12g}", markup=False)
        console.print(f"mean offspring m1: {result.mean_offspring:.12g}", markup=False)
    else:
        console.print(f"❌ {result}", markup=False)
    return 0


def cmd_catalog_list(args: argparse.Namespace) -> int:
    banner("MODEL CATALOG")
    for name, ranges in list_models():
        console.print(f"{name:16} {ranges}", markup=False)
    return 0


def cmd_catalog_show(args: argparse.Namespace) -> int:
    model = catalog(args.name, **parse_params(args.param))
    banner(f"CATALOG: {args.name}")
    print_model(model)
    print_diagnostics(model)
    console.print(f"\nf(u) = {format_polynomial(forward_nonlinearity(model))}", markup=False)
    _emit_document(model, args.output)
    return 0


def register(subparsers) -> None:
    p = subparsers.add_parser(
        'compile',
        help='Compile a polynomial into a voting model document',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Random outcome model at the default rate
    python -m bbm_voting.cli compile --f "[0,1,-1]"

    # Monotone table (threshold-compatible rate), saved to a file
    python -m bbm_voting.cli compile --f "u - u^2" --monotone --output fkpp.json
        """,
    )
    p.add_argument('--f', required=True, metavar='POLY', help='Polynomial, e.g. "[0,1,-1]" or "u - u^2"')
    p.add_argument('--representation', choices=['outcome', 'threshold', 'recursive'], default='outcome')
    p.add_argument('--monotone', action='store_true',
                   help='Use the threshold rate bound so the outcome table is nondecreasing')
    p.add_argument('--rate', type=float, help='Rate override (must keep every probability in [0, 1])')
    p.add_argument('--arity', type=int, help='Tree arity N (default: degree of f, at least 2)')
    p.add_argument('--output', metavar='PATH', help='Write the model document here instead of stdout')
    p.set_defaults(handler=cmd_compile)

    p = subparsers.add_parser('nonlinearity', help='Print the nonlinearity a model document represents')
    p.add_argument('--model', required=True, metavar='PATH', help='Model document (JSON)')
    p.set_defaults(handler=cmd_nonlinearity)

    p = subparsers.add_parser('decompose', help='Test whether f is a McKean nonlinearity')
    p.add_argument('--f', required=True, metavar='POLY')
    p.set_defaults(handler=cmd_decompose)

    p = subparsers.add_parser('catalog', help='List or instantiate named models')
    actions = p.add_subparsers(dest='catalog_action', required=True)
    lister = actions.add_parser('list', help='List named models and their parameter ranges')
    lister.set_defaults(handler=cmd_catalog_list)
    show = actions.add_parser('show', help='Instantiate a named model')
    show.add_argument('name')
    show.add_argument('--param', action='append', metavar='KEY=VALUE',
                      help='Parameter, repeatable (e.g. --param n=2 --param chi=1)')
    show.add_argument('--output', metavar='PATH', help='Write the model document here instead of stdout')
    show.set_defaults(handler=cmd_catalog_show)
