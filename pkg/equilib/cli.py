"""CLI commands for equilib using Typer."""

import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import typer
from rich.console import Console

from . import __version__
from .engine.charges import ChargeSet, PairConfig
from .engine.oracle import Grid, default_grid
from .engine.pair_phases import classify, minima_threshold
from .engine.pair_solver import equilibrium_density
from .engine.render import CsvRenderer, render_verification_table
from .engine.signed_equilibrium import (
    compact_support_criterion,
    pair_signed_density,
    signed_density_eval,
    tail_coefficient,
)
from .engine.sweeps import gamma_grid, phase_region, support_evolution
from .engine.verify import VerificationReport, verify_charges, verify_pair
from .errors import DomainError, EquilibError, VerificationError
from .runtime import EquilibConfig, configure_logging, create_default_config, load_config

app = typer.Typer(help="equilib - equilibrium measures in external fields of point charges", no_args_is_help=True)
console = Console(stderr=True)

EXIT_FAILURE = 1
EXIT_USAGE = 2

# Shared options ----

BETA1 = typer.Option(None, "--beta1", help="Imaginary part of the attractor")
BETA2 = typer.Option(None, "--beta2", help="Imaginary part of the repellent")
GAMMA = typer.Option(None, "--gamma", help="Repellent charge γ in [0, 1]")
SYMMETRIC = typer.Option(False, "--symmetric", help="Both charges on the imaginary axis")
CHARGES = typer.Option(None, "--charges", help="Charge file: `re im strength` per line")
OUT = typer.Option(None, "--out", "-o", help="Write CSV here instead of stdout")
CONFIG = typer.Option(None, "--config", help="Configuration file")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Enable debug logging on stderr")
JOBS = typer.Option(None, "--jobs", "-j", min=1, help="Worker processes for sweeps")
GRID_LO = typer.Option(None, "--grid-lo", help="Oracle grid lower bound")
GRID_HI = typer.Option(None, "--grid-hi", help="Oracle grid upper bound")
GRID_N = typer.Option(None, "--grid-n", min=3, help="Oracle grid nodes")
X_LO = typer.Option(-10.0, "--x-lo", help="First sample")
X_HI = typer.Option(10.0, "--x-hi", help="Last sample")
SAMPLES = typer.Option(201, "--samples", min=2, help="Number of samples")


def read_charge_set(path: Path) -> ChargeSet:
    """Parse a charge file; `#` starts a comment, blank lines are skipped."""
    if not path.exists():
        raise DomainError(f"file {path} not found", parameter="charges")
    triples: List[Tuple[float, float, float]] = []
    with open(path, "r") as f:
        for number, line in enumerate(f, 1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            fields = content.replace(",", " ").split()
            if len(fields) != 3:
                raise DomainError(f"line {number}: expected `re im strength`", parameter="charges")
            try:
                re, im, strength = (float(v) for v in fields)
            except ValueError as e:
                raise DomainError(f"line {number}: {e}", parameter="charges") from e
            triples.append((re, im, strength))
    if not triples:
        raise DomainError(f"no charges in {path}", parameter="charges")
    return ChargeSet.from_triples(triples)


def _setup(config_path: Optional[Path], verbose: bool) -> EquilibConfig:
    config = load_config(config_path)
    configure_logging(verbose or config.verbose)
    return config


def _pair(
    beta1: Optional[float], beta2: Optional[float], gamma: Optional[float], symmetric: bool
) -> PairConfig:
    if beta1 is None or beta2 is None or gamma is None:
        given = (("--beta1", beta1), ("--beta2", beta2), ("--gamma", gamma))
        missing = [name for name, v in given if v is None]
        raise DomainError(f"missing {', '.join(missing)}", parameter="pair")
    return PairConfig.create(beta1, beta2, gamma, symmetric)


def _grid(
    source: Any, config: EquilibConfig, lo: Optional[float], hi: Optional[float], n: Optional[int]
) -> Grid:
    fallback = default_grid(source, nodes=n or config.grid.nodes)
    lower = lo if lo is not None else config.grid.lower
    upper = hi if hi is not None else config.grid.upper
    return Grid.create(
        lower if lower is not None else fallback.lower,
        upper if upper is not None else fallback.upper,
        n or config.grid.nodes,
    )


def _metadata(command: str, **parameters: Any) -> Dict[str, Any]:
    entries: Dict[str, Any] = {"command": command}
    entries.update({k: v for k, v in parameters.items() if v is not None})
    entries["version"] = __version__
    return entries


@contextmanager
def _output(out: Optional[Path], config: EquilibConfig) -> Iterator[CsvRenderer]:
    if out is None:
        yield CsvRenderer(sys.stdout, config.output.precision)
        return
    with open(out, "w") as f:
        yield CsvRenderer(f, config.output.precision)


@contextmanager
def _errors(verbose: bool) -> Iterator[None]:
    """Map errors onto exit codes: 2 for bad input, 1 for everything else."""
    try:
        yield
    except typer.Exit:
        raise
    except DomainError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_USAGE)
    except EquilibError as e:
        console.print(f"[red]Error:[/red] {e}")
        if verbose:
            console.print_exception()
        raise typer.Exit(EXIT_FAILURE)
    except OSError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)


def _samples(x_lo: float, x_hi: float, samples: int) -> np.ndarray:
    if not x_lo < x_hi:
        raise DomainError("need --x-lo < --x-hi", parameter="x_lo")
    return np.linspace(x_lo, x_hi, samples)


# Commands ----


@app.command()
def phase(
    beta1: Optional[float] = BETA1,
    beta2: Optional[float] = BETA2,
    gamma: Optional[float] = GAMMA,
    symmetric: bool = SYMMETRIC,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Phase report of the attractor/repellent pair as key,value rows."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        tol = config.tolerances
        pair = _pair(beta1, beta2, gamma, symmetric)
        classification = classify(pair, tol)
        geo = classification.geometry
        df = equilibrium_density(pair, tol)

        report: List[Tuple[str, Any]] = [
            ("phase", classification.phase),
            ("gamma0", minima_threshold(pair, tol)),
            ("gamma1", classification.gamma1),
            ("gamma2", classification.gamma2),
            ("x0", geo.x0),
            ("x1", geo.x1),
            ("x2", geo.x2),
            ("radius", geo.radius),
            ("a1", df.a1),
            ("a2", df.a2),
            ("b_re", df.b.re if df.b is not None else math.nan),
            ("b_im", df.b.im if df.b is not None else math.nan),
            ("d", df.d),
        ]
        with _output(out, config) as csv:
            csv.metadata(_metadata("phase", beta1=beta1, beta2=beta2, gamma=gamma, symmetric=symmetric))
            csv.header(["key", "value"])
            csv.rows(report)


@app.command()
def density(
    beta1: Optional[float] = BETA1,
    beta2: Optional[float] = BETA2,
    gamma: Optional[float] = GAMMA,
    symmetric: bool = SYMMETRIC,
    x_lo: float = X_LO,
    x_hi: float = X_HI,
    samples: int = SAMPLES,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Equilibrium density μ' and signed density η' of the pair on a sample grid."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        pair = _pair(beta1, beta2, gamma, symmetric)
        xs = _samples(x_lo, x_hi, samples)
        df = equilibrium_density(pair, config.tolerances)
        mu = np.asarray(df(xs))
        if pair.beta2 == 0 and pair.gamma > 0:
            eta = np.full_like(xs, math.nan)
        else:
            eta = np.asarray(pair_signed_density(pair, xs))

        with _output(out, config) as csv:
            csv.metadata(
                _metadata("density", beta1=beta1, beta2=beta2, gamma=gamma, symmetric=symmetric, phase=df.phase)
            )
            csv.header(["x", "mu", "eta"])
            csv.rows(zip(xs, mu, eta))


@app.command("signed-density")
def signed_density(
    charges: Optional[Path] = CHARGES,
    beta1: Optional[float] = BETA1,
    beta2: Optional[float] = BETA2,
    gamma: Optional[float] = GAMMA,
    symmetric: bool = SYMMETRIC,
    x_lo: float = X_LO,
    x_hi: float = X_HI,
    samples: int = SAMPLES,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Signed equilibrium density η' of a charge file or of the pair."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        if charges is not None:
            charge_set = read_charge_set(charges)
        else:
            charge_set = _pair(beta1, beta2, gamma, symmetric).charge_set()
        xs = _samples(x_lo, x_hi, samples)
        eta = np.asarray(signed_density_eval(charge_set, xs))

        with _output(out, config) as csv:
            csv.metadata(
                _metadata(
                    "signed-density",
                    charges=str(charges) if charges else None,
                    beta1=beta1,
                    beta2=beta2,
                    gamma=gamma,
                    total_mass=charge_set.total_mass,
                    tail_coefficient=tail_coefficient(charge_set),
                    compact=compact_support_criterion(charge_set),
                )
            )
            csv.header(["x", "eta"])
            csv.rows(zip(xs, eta))


@app.command("support-evolution")
def support_evolution_cmd(
    beta1: Optional[float] = BETA1,
    beta2: Optional[float] = BETA2,
    symmetric: bool = SYMMETRIC,
    gamma_lo: float = typer.Option(0.01, "--gamma-lo", help="First γ"),
    gamma_hi: float = typer.Option(0.99, "--gamma-hi", help="Last γ"),
    gamma_steps: int = typer.Option(99, "--gamma-steps", min=1, help="Number of γ values"),
    jobs: Optional[int] = JOBS,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Endpoints of S_T and of supp η⁺ along a γ sweep."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        if not 0 <= gamma_lo <= gamma_hi <= 1:
            raise DomainError("need 0 <= --gamma-lo <= --gamma-hi <= 1", parameter="gamma")
        base = _pair(beta1, beta2, gamma_lo, symmetric)
        rows = support_evolution(
            base, gamma_grid(gamma_lo, gamma_hi, gamma_steps), jobs or config.sweep.jobs, verbose
        )
        with _output(out, config) as csv:
            csv.metadata(_metadata("support-evolution", beta1=beta1, beta2=beta2, symmetric=symmetric))
            csv.header(["gamma", "phase", "a1", "a2", "a1_plus", "a2_plus"])
            csv.rows(row.values() for row in rows)


@app.command("phase-region")
def phase_region_cmd(
    gamma: Optional[float] = GAMMA,
    symmetric: bool = SYMMETRIC,
    beta1_lo: float = typer.Option(0.1, "--beta1-lo"),
    beta1_hi: float = typer.Option(5.0, "--beta1-hi"),
    beta1_steps: int = typer.Option(50, "--beta1-steps", min=1),
    beta2_lo: float = typer.Option(0.0, "--beta2-lo"),
    beta2_hi: float = typer.Option(5.0, "--beta2-hi"),
    beta2_steps: int = typer.Option(51, "--beta2-steps", min=1),
    jobs: Optional[int] = JOBS,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Phase label at fixed γ over a (β₁, β₂) lattice."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        if gamma is None or not 0 < gamma < 1:
            raise DomainError("--gamma must lie in (0, 1)", parameter="gamma")
        rows = phase_region(
            gamma,
            np.linspace(beta1_lo, beta1_hi, beta1_steps).tolist(),
            np.linspace(beta2_lo, beta2_hi, beta2_steps).tolist(),
            symmetric,
            jobs or config.sweep.jobs,
            verbose,
        )
        with _output(out, config) as csv:
            csv.metadata(_metadata("phase-region", gamma=gamma, symmetric=symmetric))
            csv.header(["beta1", "beta2", "phase"])
            csv.rows(row.values() for row in rows)


@app.command()
def verify(
    charges: Optional[Path] = CHARGES,
    beta1: Optional[float] = BETA1,
    beta2: Optional[float] = BETA2,
    gamma: Optional[float] = GAMMA,
    symmetric: bool = SYMMETRIC,
    mass: Optional[float] = typer.Option(None, "--mass", help="Mass t of the oracle measure (default T)"),
    strict: bool = typer.Option(False, "--strict", help="Fail when the minimizer hits its iteration cap"),
    grid_lo: Optional[float] = GRID_LO,
    grid_hi: Optional[float] = GRID_HI,
    grid_n: Optional[int] = GRID_N,
    out: Optional[Path] = OUT,
    config_path: Optional[Path] = CONFIG,
    verbose: bool = VERBOSE,
) -> None:
    """Run the grid oracle and compare it with the closed forms."""
    with _errors(verbose):
        config = _setup(config_path, verbose)
        report: VerificationReport
        if charges is not None:
            charge_set = read_charge_set(charges)
            grid = _grid(charge_set, config, grid_lo, grid_hi, grid_n)
            report = verify_charges(charge_set, grid, config, mass, strict)
        else:
            pair = _pair(beta1, beta2, gamma, symmetric)
            grid = _grid(pair, config, grid_lo, grid_hi, grid_n)
            report = verify_pair(pair, grid, config, mass, strict)

        with _output(out, config) as csv:
            csv.metadata(
                _metadata(
                    "verify",
                    charges=str(charges) if charges else None,
                    beta1=beta1,
                    beta2=beta2,
                    gamma=gamma,
                    symmetric=symmetric,
                    mass=mass,
                    grid_lo=grid.lower,
                    grid_hi=grid.upper,
                    grid_n=grid.nodes,
                    iterations=report.iterations,
                    converged=report.converged,
                )
            )
            csv.header(["check", "value", "tolerance", "status"])
            csv.rows((c.check, c.value, c.tolerance, c.status) for c in report.checks)

        render_verification_table([c.model_dump() for c in report.checks], console)
        if not report.passed:
            failed = ", ".join(c.check for c in report.checks if c.status == "fail")
            raise VerificationError(f"failed checks: {failed}")


@app.command()
def init(
    local: bool = typer.Option(False, "--local", help="Write ./equilib.toml instead of ~/.equilib/config.toml"),
) -> None:
    """Write a default configuration file."""
    try:
        path = create_default_config(Path("./equilib.toml") if local else None)
        console.print(f"[green]Success:[/green] configuration at {path}")
    except OSError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)


@app.command()
def version() -> None:
    """Show equilib version information."""
    typer.echo(f"equilib v{__version__}")


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
