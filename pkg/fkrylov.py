#!/usr/bin/env python3
"""
fkrylov - Fréchet derivative actions of matrix functions by Krylov methods

Command line entry point for convergence studies, centrality sensitivities,
heat equation parameter fitting, self-checks and plotting.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

# Add repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src.cli.commands import (
    Method, RunConfig, cmd_check, cmd_convergence, cmd_heat_fit, cmd_sensitivity,
)
from src.cli.plotting import emit_plot
from src.core.centrality_sensitivity import DATASET_INDICES, SensitivityMeasure
from src.core.heat_fitting import HeatFitConfig
from src.core.linalg import DEFAULT_SEED
from src.core.matfunc import FunctionSpec
from src.services.progress_reporting_service import create_progress_reporter
from src.utils.error_handling import (
    EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, ConsoleErrorReporter, FrechetError, config_error,
)


class CLIArgumentParser(argparse.ArgumentParser):
    """Argument parser exiting with the usage-error code on bad arguments."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging(verbose: bool = False, quiet: bool = False) -> logging.Logger:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    for name in ('fkrylov', 'src'):
        logger = logging.getLogger(name)
        logger.setLevel(level)
        logger.handlers = [handler]
        logger.propagate = False
    return logging.getLogger('fkrylov')


def _parse_range(text: str) -> Tuple[float, float]:
    lo, sep, hi = text.partition(':')
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got '{text}'")


def _parse_function(text: str) -> FunctionSpec:
    try:
        return FunctionSpec.parse(text)
    except FrechetError as e:
        raise argparse.ArgumentTypeError(e.message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', action='store_true', help='Debug output')
    common.add_argument('--quiet', action='store_true', help='Warnings only, no progress bars')

    parser = CLIArgumentParser(
        prog='fkrylov',
        description='Krylov approximation of Fréchet derivative actions L_f(A,E)b',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  fkrylov convergence --diag 1:500 --f sqrt --kmax 80 --plot conv.svg
  fkrylov sensitivity graph.mtx --measure tn --i 0 --j 4
  fkrylov heat-fit --grid 20
  fkrylov check --seed 7
  fkrylov plot convergence.csv convergence.svg
        ''')
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    conv = subparsers.add_parser('convergence', parents=[common],
                                 help='Error vs. iterations for all methods')
    source = conv.add_mutually_exclusive_group()
    source.add_argument('--diag', type=_parse_range, metavar='LO:HI', help='A = diag(LO, LO+1, ..., HI)')
    source.add_argument('--random', type=int, metavar='N', dest='random_n',
                        help='Random dense N x N problem')
    source.add_argument('--matrix-a', type=Path, help='Matrix Market file for A')
    conv.add_argument('--matrix-e', type=Path, help='Matrix Market file for E (default: random)')
    conv.add_argument('--zero-e', action='store_true', help='Use E = 0')
    conv.add_argument('--f', type=_parse_function, default=FunctionSpec.sqrt(), dest='function',
                      help='exp, exp:T, sqrt or poly:c0,c1,... (default: sqrt)')
    conv.add_argument('--kmax', type=int, default=80, help='Largest Krylov dimension')
    conv.add_argument('--methods', default=','.join(m.value for m in Method),
                      help='Comma list of modified, block, fd, cs, fab')
    conv.add_argument('--fd-eps', type=float, default=1e-8, help='Finite difference step')
    conv.add_argument('--cs-eps', type=float, default=1e-20, help='Complex step size')
    conv.add_argument('--seed', type=int, default=DEFAULT_SEED)
    conv.add_argument('--output', type=Path, default=Path('convergence.csv'))
    conv.add_argument('--plot', type=Path, help='Also render an SVG plot')

    sens = subparsers.add_parser('sensitivity', parents=[common],
                                 help='Sensitivity of a centrality measure to one edge')
    sens.add_argument('graph', type=Path, help='Graph file')
    sens.add_argument('--format', choices=['mtx', 'edges'], default='mtx', dest='graph_format')
    sens.add_argument('--n-nodes', type=int, help='Node count (edge lists)')
    sens.add_argument('--undirected', action='store_true', help='Insert both edge directions')
    sens.add_argument('--base', type=int, choices=[0, 1], help='Index base of the file')
    sens.add_argument('--measure', choices=[m.value for m in SensitivityMeasure], default='tn')
    sens.add_argument('--i', type=int, help='Row index of the perturbed entry')
    sens.add_argument('--j', type=int, help='Column index of the perturbed entry')
    sens.add_argument('--node', type=int, help='Node l for subgraph centrality')
    sens.add_argument('--full-rank', action='store_true', help='Perturb every edge at once')
    sens.add_argument('--dataset', choices=sorted(DATASET_INDICES), help='Use the registered index pair')
    sens.add_argument('--kmax', type=int, default=50)
    sens.add_argument('--stop-tol', type=float, default=1e-10)
    sens.add_argument('--check-every', type=int, default=1)
    sens.add_argument('--output', type=Path, default=Path('sensitivity.csv'))
    sens.add_argument('--plot', type=Path, help='Also render an SVG plot')

    heat = subparsers.add_parser('heat-fit', parents=[common],
                                 help='Fit the diffusion coefficient of the heat equation')
    defaults = HeatFitConfig()
    heat.add_argument('--grid', type=int, default=defaults.grid_points_per_dim,
                      help='Interior grid points per dimension')
    heat.add_argument('--sigma0', type=float, default=defaults.sigma0)
    heat.add_argument('--sigma-ref', type=float, default=defaults.sigma_ref)
    heat.add_argument('--step0', type=float, default=defaults.step0)
    heat.add_argument('--tol', type=float, default=defaults.abs_tol, help='Absolute tolerance on f')
    heat.add_argument('--max-iters', type=int, default=defaults.max_iters)
    heat.add_argument('--krylov-k', type=int, default=defaults.krylov_k)
    heat.add_argument('--final-time', type=float, default=defaults.final_time)
    heat.add_argument('--output', type=Path, default=Path('heat_fit.csv'))
    heat.add_argument('--plot', type=Path, help='Also render an SVG plot')

    check = subparsers.add_parser('check', parents=[common], help='Run the self-check suite')
    check.add_argument('--seed', type=int, default=DEFAULT_SEED)
    check.add_argument('--inject-r-update-bug', action='store_true', help=argparse.SUPPRESS)

    plot = subparsers.add_parser('plot', parents=[common], help='Render a result CSV as SVG')
    plot.add_argument('csv', type=Path)
    plot.add_argument('svg', type=Path)

    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed arguments."""
    base = dict(command=args.command, show_progress=not args.quiet, verbose=args.verbose)
    if args.command == 'convergence':
        return RunConfig(
            **base, output=args.output, plot=args.plot, seed=args.seed, k_max=args.kmax,
            methods=Method.parse_list(args.methods), function=args.function, diag=args.diag,
            random_n=args.random_n, matrix_a=args.matrix_a, matrix_e=args.matrix_e,
            zero_e=args.zero_e, fd_eps=args.fd_eps, cs_eps=args.cs_eps,
        )
    if args.command == 'sensitivity':
        return RunConfig(
            **base, output=args.output, plot=args.plot, k_max=args.kmax, stop_tol=args.stop_tol,
            graph=args.graph, graph_format=args.graph_format, n_nodes=args.n_nodes,
            undirected=args.undirected, base=args.base,
            measure=SensitivityMeasure(args.measure), i=args.i, j=args.j, node=args.node,
            full_rank=args.full_rank, dataset=args.dataset, check_every=args.check_every,
        )
    if args.command == 'heat-fit':
        heat = HeatFitConfig(
            grid_points_per_dim=args.grid, final_time=args.final_time, sigma0=args.sigma0,
            sigma_ref=args.sigma_ref, step0=args.step0, abs_tol=args.tol,
            max_iters=args.max_iters, krylov_k=args.krylov_k,
        )
        return RunConfig(**base, output=args.output, plot=args.plot, heat=heat)
    if args.command == 'check':
        return RunConfig(**base, seed=args.seed, inject_r_update_bug=args.inject_r_update_bug)
    raise config_error(f"unknown command '{args.command}'")


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    logger = _setup_logging(args.verbose, args.quiet)
    error_reporter = ConsoleErrorReporter()

    try:
        if args.command == 'plot':
            emit_plot(args.csv, args.svg)
            logger.info(f"Wrote plot to {args.svg}")
            return EXIT_OK

        config = build_config(args)
        reporter = create_progress_reporter(config.show_progress, config.verbose)
        try:
            if args.command == 'convergence':
                path = cmd_convergence(config, reporter)
            elif args.command == 'sensitivity':
                path = cmd_sensitivity(config)
            elif args.command == 'heat-fit':
                path = cmd_heat_fit(config, reporter)
            else:
                outcomes = cmd_check(config)
                failed = [o for o in outcomes if not o.passed]
                if failed:
                    print(f"❌ {len(failed)} of {len(outcomes)} checks failed")
                    return EXIT_CHECK_FAILED
                print(f"🎉 All {len(outcomes)} checks passed")
                return EXIT_OK
        finally:
            reporter.close()

        if config.show_progress:
            print(f"✅ Results written to {path}")
        return EXIT_OK

    except FrechetError as e:
        error_reporter.report_error(e)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
