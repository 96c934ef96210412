from faltingsheight.exceptions import ContractError, IntegrityError, NumericError
from faltingsheight.load import Load
from faltingsheight.pipeline import Pipeline
from faltingsheight.region import NORMALIZATIONS
from faltingsheight.settings import OUTPUT_FORMATS, Settings
from functools import wraps
import click
import sys

DEFAULT_CONFIG = "config/config.yaml"


def common_options(command):
    """Options shared by every subcommand"""
    options = [
        click.option("--config", help="configuration file", default=DEFAULT_CONFIG),
        click.option("--precision", help="working precision in bits", type=int, default=None),
        click.option("--threads", help="worker threads for the census", type=int, default=None),
        click.option("--format", "fmt", help="output format", type=click.Choice(OUTPUT_FORMATS), default=None),
        click.option("--out", help="write the result to this file", default=None),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def exit_on_error(command):
    """Report typed failures on stderr and exit with their code"""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ContractError, NumericError, IntegrityError) as error:
            click.echo(f"{type(error).__name__}: {error}", err=True)
            witness = getattr(error, "witness", None)
            if witness is not None:
                click.echo(f"witness: {witness}", err=True)
            sys.exit(error.exit_code)

    return wrapper


def build_pipeline(config: str, precision: int, threads: int) -> Pipeline:
    try:
        settings = Settings(config)
    except ValueError as error:
        raise click.BadParameter(str(error), param_hint="--config")
    if precision is not None:
        settings.set_setting("precision_bits", precision)
    if threads is not None:
        settings.set_setting("threads", threads)
    return Pipeline(settings=settings)


def emit(pipe: Pipeline, result, out: str, fmt: str):
    Load(settings=pipe.settings).write(result, out=out, format=fmt)


@click.group(context_settings={"auto_envvar_prefix": "FALTINGS"})
def cli():
    """Faltings heights of elliptic curves over Q and the census of S_X"""


@cli.command()
@click.option("-A", "a", help="coefficient A of y^2 = x^3 + A x + B", type=int, required=True)
@click.option("-B", "b", help="coefficient B of y^2 = x^3 + A x + B", type=int, required=True)
@common_options
@exit_on_error
def height(a, b, config, precision, threads, fmt, out):
    """Faltings height, lambda, minimal discriminant and reduced tau"""
    pipe = build_pipeline(config, precision, threads)
    emit(pipe, pipe.run_height(a, b), out, fmt)


@cli.command()
@click.option("--x", "x", help="height bound X", type=float, required=True)
@click.option("--naive", help="add the naive-height count", default=False, is_flag=True)
@click.option("--window-scale", help="scale the enumeration window", type=float, default=None)
@common_options
@exit_on_error
def count(x, naive, window_scale, config, precision, threads, fmt, out):
    """Count S_X by enumeration and by the Moebius sieve"""
    pipe = build_pipeline(config, precision, threads)
    emit(pipe, pipe.run_count(x, naive=naive, window_scale=window_scale), out, fmt)


@cli.command()
@click.option("--tol", help="relative tolerance of the quadrature", type=float, default=None)
@click.option("--mc-samples", help="also estimate the area by Monte Carlo", type=int, default=0)
@common_options
@exit_on_error
def sigma(tol, mc_samples, config, precision, threads, fmt, out):
    """Area sigma of R_1 and the leading constant 12 sigma / zeta(10)"""
    pipe = build_pipeline(config, precision, threads)
    emit(pipe, pipe.run_sigma(tol=tol, mc_samples=mc_samples), out, fmt)


@cli.command()
@common_options
@exit_on_error
def constants(config, precision, threads, fmt, out):
    """Constants C, c, epsilon0 and the enumeration window"""
    pipe = build_pipeline(config, precision, threads)
    emit(pipe, pipe.run_constants(), out, fmt)


@cli.command()
@click.option("--lifts", help="random lifts checked per residue class", type=int, default=None)
@click.option("--seed", help="seed of the lifts", type=int, default=None)
@common_options
@exit_on_error
def classes(lifts, seed, config, precision, threads, fmt, out):
    """Sizes of the lambda classes of pairs mod 6^6"""
    pipe = build_pipeline(config, precision, threads)
    emit(pipe, pipe.run_classes(lifts=lifts, seed=seed), out, fmt)


@cli.command()
@click.option("--x", "x", help="height bound X", type=float, default=1.0)
@click.option("--n", "n", help="number of boundary points", type=int, default=100)
@click.option("--b-min", help="lowest B of the sweep", type=float, default=None)
@click.option("--b-max", help="highest B of the sweep", type=float, default=None)
@click.option("--normalization", type=click.Choice(NORMALIZATIONS), default="analytic")
@click.option("--log-spaced", help="space the lines B = const geometrically", default=False, is_flag=True)
@common_options
@exit_on_error
def boundary(x, n, b_min, b_max, normalization, log_spaced, config, precision, threads, fmt, out):
    """Points on the boundary of R_X, as csv unless --format says otherwise"""
    pipe = build_pipeline(config, precision, threads)
    trace = pipe.run_boundary(
        X=x,
        n=n,
        b_min=b_min,
        b_max=b_max,
        normalization=normalization,
        log_spaced=log_spaced,
    )
    emit(pipe, trace, out, fmt or "csv")


if __name__ == "__main__":
    cli()
