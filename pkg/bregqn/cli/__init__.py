"""
bregqn Command Line Interface

Exit codes: 0 success, 1 usage or input error, 2 numerical failure (failed
potential validation, line-search failure, breakdown of an update).
"""
import functools
import logging
import math
import sys
from typing import Optional

import click
import numpy as np

from bregqn import __version__
from bregqn.core.linesearch import LineSearchMode, LineSearchParams
from bregqn.core.potential import log_grid, parse_potential, validate
from bregqn.core.problems import make_problem
from bregqn.core.solver import NoiseAdvance, Outcome, SolverConfig, minimize
from bregqn.core.update import parse_family
from bregqn.experiments.output import to_json, write_table2, write_table3, write_text
from bregqn.experiments.table2 import Setup, Table2Config, run_table2
from bregqn.experiments.table3 import METHODS, Table3Config, run_table3
from bregqn.robustness.probe import probe_influence
from bregqn.robustness.sequences import SequenceKind
from bregqn.utils import constants
from bregqn.utils.errors import NumericalError, ValidationError
from bregqn.utils.logging_config import get_logger, log_error_with_context, setup_logging
from bregqn.utils.settings import default_map_for, dump_flat_config, load_flat_config, load_settings
from bregqn.utils.validation import parse_float_list, parse_int_list

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

SETTINGS = load_settings()


class InputError(click.ClickException):
    exit_code = EXIT_USAGE


class NumericalFailure(click.ClickException):
    exit_code = EXIT_NUMERICAL


def reporting_errors(func):
    """Turn package errors into click errors carrying the right exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            raise InputError(str(e))
        except NumericalError as e:
            log_error_with_context(logger, e, func.__name__)
            raise NumericalFailure(f"{type(e).__name__}: {e}")
    return wrapper


def run_header(ctx: click.Context) -> str:
    """Invocation line written at the top of every CSV."""
    parts = [ctx.command_path]
    for key in sorted(ctx.params):
        value = ctx.params[key]
        if value is None or value is False or key in ('out', 'save_config'):
            continue
        flag = '--' + key.replace('_', '-')
        parts.append(flag if value is True else f"{flag} {value}")
    return ' '.join(parts) + f" (bregqn {__version__})"


def save_options(ctx: click.Context, path: Optional[str]) -> None:
    if not path:
        return
    values = {
        key.replace('_', '-'): value
        for key, value in ctx.params.items()
        if value is not None and key != 'save_config'
    }
    write_text(path, dump_flat_config(values))
    click.echo(f"Saved options to {path}")


@click.group()
@click.version_option(version=__version__, prog_name='qn')
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
              help='Flat key=value file of option defaults (flags win)')
@click.option('--verbose', '-v', count=True, help='Log INFO (-v) or DEBUG (-vv) to stderr')
@click.option('--log-file', type=click.Path(dir_okay=False), help='Also write a detailed log to this file')
@click.pass_context
def cli(ctx, config_file, verbose, log_file):
    """V-Bregman quasi-Newton updates, influence probes and experiments."""
    if verbose or log_file:
        level = 'DEBUG' if verbose >= 2 else 'INFO' if verbose == 1 else 'WARNING'
        package_logger = logging.getLogger('bregqn')
        setup_logging('bregqn', level=level, log_file=log_file, propagate=package_logger.propagate)
    if config_file:
        try:
            flat = load_flat_config(config_file)
        except ValidationError as e:
            raise InputError(str(e))
        ctx.default_map = default_map_for(ctx.command, flat)
        logger.info(f"Loaded option defaults from {config_file}")


@cli.command('validate')
@click.option('--potential', '-p', default='neglog', show_default=True,
              help='neglog, power:gamma=<g> or bounded:a=<a>,b=<b>')
@click.option('--n', '-n', 'n', required=True, type=click.IntRange(min=1), help='Working dimension')
@click.option('--grid-min', default=SETTINGS.grid_min, type=float, show_default=True)
@click.option('--grid-max', default=SETTINGS.grid_max, type=float, show_default=True)
@click.option('--grid-points', default=SETTINGS.grid_points, type=int, show_default=True)
@click.pass_context
@reporting_errors
def validate_cmd(ctx, potential, n, grid_min, grid_max, grid_points):
    """Check the potential conditions on a log-spaced grid."""
    # the beta < 1/n condition is reported, not rejected at parse time
    pot = parse_potential(potential)
    report = validate(pot, n, log_grid(grid_min, grid_max, grid_points))
    click.echo(report.summary())
    if not report.passed:
        ctx.exit(EXIT_NUMERICAL)


@cli.command()
@click.option('--problem', default='p1', show_default=True, type=click.Choice(['p1', 'p2'], case_sensitive=False))
@click.option('--n', '-n', 'n', default=10, show_default=True, type=click.IntRange(min=2))
@click.option('--family', '-f', default='vbfgs-b', show_default=True,
              help='vbfgs-b, vdfp-b, vbfgs-h, vdfp-h or broyden:theta=<t>,v1=<pot>,v2=<pot>')
@click.option('--potential', '-p', default='neglog', show_default=True)
@click.option('--ls', 'ls_mode', default='wolfe', show_default=True,
              type=click.Choice([m.value for m in LineSearchMode]))
@click.option('--noise', '--h', '-h', 'noise', default=0.0, show_default=True, type=float,
              help='Line-search noise level h, eps ~ U[-h, h]')
@click.option('--noise-advance', default=SETTINGS.noise_advance, show_default=True,
              type=click.Choice([m.value for m in NoiseAdvance]))
@click.option('--x0', default=None, help='Comma-separated start point (default: zeros)')
@click.option('--random-start', is_flag=True, help='Draw x0 ~ N(0, 10 I) from the seed')
@click.option('--seed', default=SETTINGS.seed, show_default=True, type=int)
@click.option('--max-iter', default=SETTINGS.max_iter, show_default=True, type=click.IntRange(min=0))
@click.option('--grad-tol', default=None, type=float, help='Stopping tolerance (default: n * 1e-5)')
@click.option('--c1', default=None, type=float, help=f'Armijo constant (default: {SETTINGS.c1})')
@click.option('--c2', default=None, type=float, help=f'Curvature constant (default: {SETTINGS.c2})')
@click.option('--tolx', 'tol_x', default=None, type=float, help=f'Line-search bracket tolerance (default: {SETTINGS.tol_x})')
@click.option('--trace', '--json', 'json_path', default=None, type=click.Path(dir_okay=False),
              help='Write the trace as JSON')
@click.option('--save-config', default=None, type=click.Path(dir_okay=False), help='Save these options as a config file')
@click.pass_context
@reporting_errors
def solve(ctx, problem, n, family, potential, ls_mode, noise, noise_advance, x0, random_start, seed,
          max_iter, grad_tol, c1, c2, tol_x, json_path, save_config):
    """
    Minimize a benchmark problem with one update family.

    Examples:
        qn solve --problem p1 --n 2 --family vbfgs-b --potential neglog --ls exact
        qn solve --problem p2 --n 100 --family vdfp-b --noise 0.3 --random-start
        qn solve --problem p1 --n 10 --h 0.1 --seed 42 --trace out.json
    """
    save_options(ctx, save_config)
    target = make_problem(problem, n)
    update_family = parse_family(family, parse_potential(potential, n_max=n))
    if x0 is not None:
        start = np.array(parse_float_list(x0, 'x0'))
    elif random_start:
        rng = np.random.Generator(np.random.Philox(seed))
        start = math.sqrt(constants.STEP_VARIANCE) * rng.standard_normal(n)
    else:
        start = np.zeros(n)

    config = SolverConfig(
        family=update_family,
        line_search=LineSearchParams.from_settings(SETTINGS, mode=ls_mode, c1=c1, c2=c2, tol_x=tol_x),
        grad_tol=grad_tol,
        max_iter=max_iter,
        noise=noise,
        noise_advance=noise_advance,
        seed=seed,
    )
    trace = minimize(target, start, config)
    click.echo(f"problem: {target.name} (n={n})")
    click.echo(f"family: {update_family.label}, potential: {update_family.potential.label}")
    click.echo(f"outcome: {trace.outcome.value}")
    click.echo(f"iterations: {trace.iterations}")
    click.echo(f"f: {trace.f:.12g}")
    click.echo(f"grad norm: {trace.grad_norm:.6e}")
    if json_path:
        to_json(trace.to_dict(), json_path)
        click.echo(f"Trace written to {json_path}")
    if trace.outcome == Outcome.LINE_SEARCH_FAILURE:
        click.echo("Error: line search made no progress", err=True)
        ctx.exit(EXIT_NUMERICAL)
    if trace.outcome == Outcome.MAX_ITER:
        click.echo(f"Warning: stopped at max_iter={max_iter}", err=True)


@cli.command()
@click.option('--family', '-f', default='vbfgs-b', show_default=True)
@click.option('--potential', '-p', default='neglog', show_default=True)
@click.option('--n', '-n', 'n', default=5, show_default=True, type=click.IntRange(min=2))
@click.option('--probe', default=SequenceKind.FIXED_DET.value, show_default=True,
              type=click.Choice([k.value for k in SequenceKind]))
@click.option('--d', 'd', default=1.0, show_default=True, type=float, help='Determinant of the fixed-det sequence')
@click.option('--values', '--a', '--c', '--i', 'values', default='1,10,100,1000', show_default=True,
              help='Sequence parameters (a for fixed-det, i for spike, c for scaling)')
@click.option('--eps', default=str(SETTINGS.probe_eps), show_default=True, help='Finite-difference steps')
@click.option('--seed', default=SETTINGS.seed, show_default=True, type=int)
@click.option('--out', '-o', default=None, type=click.Path(dir_okay=False), help='CSV output path')
@click.pass_context
@reporting_errors
def influence(ctx, family, potential, n, probe, d, values, eps, seed, out):
    """
    Probe influence norms along an adversarial matrix sequence.

    Example:
        qn influence --family vbfgs-b --potential power:gamma=-1 --n 10 --probe fixed-det --a 1,10,100,1000
    """
    update_family = parse_family(family, parse_potential(potential, n_max=n))
    report = probe_influence(
        update_family,
        n,
        probe,
        parse_float_list(values, 'values'),
        d=d,
        seed=seed,
        eps=parse_float_list(eps, 'eps'),
        growth_factor=SETTINGS.growth_factor,
    )
    click.echo(report.summary())
    if out:
        write_text(out, report.to_csv(run_header(ctx)))
        click.echo(f"Probe written to {out}")


@cli.group()
def repro():
    """Reproduce the influence table (table2) and the iteration table (table3)."""


@repro.command()
@click.option('--dims', default=None, help='Comma-separated dimensions (default 10,100)')
@click.option('--full', is_flag=True, help='Use n = 10,100,500,1000')
@click.option('--setups', default=','.join(s.value for s in Setup), show_default=True)
@click.option('--gammas', default=','.join(f"{g:g}" for g in constants.DEFAULT_GAMMAS), show_default=True)
@click.option('--trials', default=SETTINGS.trials, show_default=True, type=click.IntRange(min=1))
@click.option('--seed', default=SETTINGS.seed, show_default=True, type=int)
@click.option('--min-cosine', default=SETTINGS.min_cosine, show_default=True, type=click.FloatRange(0.0, 1.0, max_open=True),
              help='Redraw (s, y) while cos(s, y) is below this; 0 keeps every draw')
@click.option('--quadratic-perturbation', is_flag=True, help='Debug: use y_bar = y (every influence is 0)')
@click.option('--out', '-o', default='table2.csv', show_default=True, type=click.Path(dir_okay=False))
@click.option('--gnuplot', is_flag=True, help='Also write a gnuplot script for the means')
@click.option('--save-config', default=None, type=click.Path(dir_okay=False))
@click.pass_context
@reporting_errors
def table2(ctx, dims, full, setups, gammas, trials, seed, min_cosine, quadratic_perturbation, out, gnuplot, save_config):
    """Approximate influence of one perturbed update (mean over trials)."""
    save_options(ctx, save_config)
    if dims:
        dimensions = parse_int_list(dims, 'dims')
    else:
        dimensions = constants.FULL_TABLE2_DIMS if full else constants.DEFAULT_TABLE2_DIMS
    config = Table2Config(
        dims=tuple(dimensions),
        setups=tuple(part.strip() for part in setups.split(',') if part.strip()),
        gammas=tuple(parse_float_list(gammas, 'gammas')),
        trials=trials,
        seed=seed,
        eps_range=SETTINGS.eps_range,
        resample_cap=SETTINGS.resample_cap,
        min_cosine=min_cosine,
        quadratic_perturbation=quadratic_perturbation,
    )
    result = run_table2(config)
    for path in write_table2(result, out, header=run_header(ctx), gnuplot=gnuplot):
        click.echo(f"Wrote {path}")
    if result.failures:
        click.echo(f"Warning: {result.failures} trial record(s) failed; see the error column", err=True)


@repro.command()
@click.option('--problems', default='p1,p2', show_default=True)
@click.option('--dims', default=None, help='Comma-separated dimensions (default 100)')
@click.option('--full', is_flag=True, help='Use n = 100,500,1000')
@click.option('--noise-levels', '--h', 'noise_levels', default=','.join(f"{h:g}" for h in constants.DEFAULT_NOISE_LEVELS),
              show_default=True)
@click.option('--methods', default='bfgs,dfp', show_default=True, help=f"Any of {', '.join(METHODS)}")
@click.option('--runs', default=SETTINGS.runs, show_default=True, type=click.IntRange(min=1))
@click.option('--seed', default=SETTINGS.seed, show_default=True, type=int)
@click.option('--max-iter', default=SETTINGS.max_iter, show_default=True, type=click.IntRange(min=1))
@click.option('--out', '-o', default='table3.csv', show_default=True, type=click.Path(dir_okay=False))
@click.option('--gnuplot', is_flag=True, help='Also write a gnuplot script for the means')
@click.option('--save-config', default=None, type=click.Path(dir_okay=False))
@click.pass_context
@reporting_errors
def table3(ctx, problems, dims, full, noise_levels, methods, runs, seed, max_iter, out, gnuplot, save_config):
    """Iteration counts of BFGS and DFP under a noisy near-exact line search."""
    save_options(ctx, save_config)
    if dims:
        dimensions = parse_int_list(dims, 'dims')
    else:
        dimensions = constants.FULL_TABLE3_DIMS if full else constants.DEFAULT_TABLE3_DIMS
    config = Table3Config(
        problems=tuple(part.strip() for part in problems.split(',') if part.strip()),
        dims=tuple(dimensions),
        noise_levels=tuple(parse_float_list(noise_levels, 'noise levels')),
        methods=tuple(part.strip() for part in methods.split(',') if part.strip()),
        runs=runs,
        seed=seed,
        max_iter=max_iter,
        tol_x=SETTINGS.tol_x,
        noise_advance=SETTINGS.noise_advance,
    )
    result = run_table3(config)
    for path in write_table3(result, out, header=run_header(ctx), gnuplot=gnuplot):
        click.echo(f"Wrote {path}")
    flagged = result.unconverged
    if flagged:
        click.echo(f"Warning: {len(flagged)} run(s) did not converge", err=True)


def main(argv=None) -> int:
    """Run the CLI and return its exit code."""
    try:
        result = cli.main(args=argv, prog_name='qn', standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo('Aborted!', err=True)
        return EXIT_USAGE
    except ValidationError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    except NumericalError as e:
        log_error_with_context(logger, e, 'qn')
        click.echo(f"Error: {type(e).__name__}: {e}", err=True)
        return EXIT_NUMERICAL
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    """Console entry point."""
    sys.exit(main())


__all__ = ['cli', 'main', 'run', 'EXIT_OK', 'EXIT_USAGE', 'EXIT_NUMERICAL']
