from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import structlog
import typer
from numpy.typing import NDArray
from rich.console import Console

from .analysis import first_blowup, frequency_at_zero, nxt_membership, profile, scan, second_blowup
from .analysis.singular_set import ThinObstacle
from .artifacts import Manifest, read_field, write_field, write_json
from .config import RunConfig, load_config
from .logs import configure_logging
from .poly.extension import ext_a
from .poly.multipoly import MultiPoly
from .settings import LabSettings, get_settings
from .solver import ConvergenceError, FieldLike, build_grid, kkt_report, solve
from .util.fs import ensure_dir
from .very_thin import (
    KernelSpec,
    LineFunction,
    barrier,
    equivalence_chain,
    flux_check,
    kernel_check,
    symbol_check,
)

app = typer.Typer(add_completion=False, no_args_is_help=True)
console = Console()
logger = structlog.get_logger(__name__)

EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4


@dataclass(slots=True)
class RunContext:
    command: str
    config: RunConfig
    settings: LabSettings
    out: Path
    threads: int
    seed: int
    manifest: Manifest

    def finish(self, paths: list[Path]) -> Path:
        for path in paths:
            self.manifest.add(path, self.out)
        manifest_path = self.manifest.write(self.out)
        logger.info(
            f"cli.{self.command}.complete",
            out=str(self.out),
            config_hash=self.manifest.config_hash,
            artifacts=[item["path"] for item in self.manifest.artifacts],
            timings=self.manifest.timings,
        )
        console.print(f"[green]{self.command} complete[/green] -> {self.out}")
        return manifest_path


def _context(
    command: str, config_path: Path | None, out: Path | None, seed: int | None, threads: int | None
) -> RunContext:
    settings = get_settings()
    config = load_config(config_path)
    if seed is None:
        seed = config.seed if config.seed is not None else settings.seed
    config.seed = seed
    if out is not None:
        directory = out
    elif config.output.directory:
        directory = Path(config.output.directory)
    else:
        directory = settings.out_root / command
    return RunContext(
        command=command,
        config=config,
        settings=settings,
        out=ensure_dir(directory.expanduser()),
        threads=threads or settings.threads,
        seed=seed,
        manifest=Manifest(command=command, config_hash=config.config_hash()),
    )


@contextmanager
def _guard(command: str) -> Iterator[None]:
    """Map validation and convergence failures to exit codes 3 and 4."""
    try:
        yield
    except ConvergenceError as exc:
        console.print(f"[red]{command}: {exc}[/red]")
        logger.error(f"cli.{command}.not_converged", error=str(exc), sweeps=exc.sweeps)
        raise typer.Exit(EXIT_CONVERGENCE) from exc
    except ValueError as exc:
        console.print(f"[red]{command}: invalid input:[/red] {exc}")
        logger.error(f"cli.{command}.invalid", error=str(exc))
        raise typer.Exit(EXIT_VALIDATION) from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from exc


def _source(
    ctx: RunContext, field_path: Path | None, poly: str | None, n: int | None, a: float | None
) -> tuple[FieldLike | MultiPoly, float, int]:
    """A solved field dump, an explicit polynomial, or the config's extended boundary polynomial."""
    problem = ctx.config.problem
    if field_path is not None:
        loaded = read_field(field_path)
        return loaded, loaded.grid.a, loaded.n
    dim = n or problem.n
    weight = problem.a if a is None else a
    if poly is not None:
        return MultiPoly.from_text(poly, dim), weight, dim
    base = MultiPoly.from_text(problem.boundary, dim)
    return (ext_a(base.restrict_thin(), weight) if problem.extend else base), weight, dim


def _centers(raw: list[str] | None, fallback: list[list[float]], n: int) -> list[list[float]]:
    centers = [_floats(item) for item in raw] if raw else [list(c) for c in fallback]
    return centers or [[0.0] * n]


def _suffixed(base: str, index: int, total: int, ext: str) -> str:
    return f"{base}.{ext}" if total == 1 else f"{base}_{index:02d}.{ext}"


def _thin_obstacle(poly: MultiPoly) -> ThinObstacle | None:
    if poly.is_zero():
        return None

    def obstacle(points: NDArray[np.float64]) -> NDArray[np.float64]:
        return poly.values(np.hstack([points, np.zeros((points.shape[0], 1))]))

    return obstacle


ConfigOpt = typer.Option(None, "--config", exists=True, dir_okay=False, resolve_path=True, help="Run config (YAML).")
OutOpt = typer.Option(None, "--out", file_okay=False, help="Output directory.")
SeedOpt = typer.Option(None, "--seed", help="Seed for sampled checks.")
ThreadsOpt = typer.Option(None, "--threads", min=1, help="Worker threads.")
FieldOpt = typer.Option(None, "--field", exists=True, dir_okay=False, help="field.bin written by `solve`.")
PolyOpt = typer.Option(None, "--poly", help="Analytic polynomial field in canonical text form.")
CenterOpt = typer.Option(None, "--center", help="Thin-space center, e.g. 0.3,0 (repeatable).")


@app.callback()
def main(
    log_level: int | None = typer.Option(None, "--log-level", help="Log level (10=DEBUG, 20=INFO)."),  # noqa: B008
) -> None:  # pragma: no cover
    configure_logging(log_level if log_level is not None else get_settings().log_level)


@app.command("solve")
def solve_cmd(
    config: Path = typer.Option(  # noqa: B008
        ..., "--config", exists=True, dir_okay=False, resolve_path=True, help="Run config (YAML)."
    ),
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
) -> None:
    """Solve the obstacle problem of the config; writes field.bin, field.json and kkt.json."""
    with _guard("solve"):
        ctx = _context("solve", config, out, seed, threads)
        problem, solver = ctx.config.problem, ctx.config.solver
        grid = build_grid(problem.grid_spec())
        spec = problem.obstacle_spec()
        try:
            with ctx.manifest.phase("solve"):
                field = solve(
                    grid, spec, solver.tol, solver.max_sweeps, omega=solver.omega, log_every=solver.log_every
                )
        except ConvergenceError as exc:
            write_json(ctx.out / "kkt.json", "kkt", exc.report.to_payload())
            raise
        with ctx.manifest.phase("kkt"):
            report = kkt_report(field, spec)
        kkt_path = write_json(ctx.out / "kkt.json", "kkt", report.to_payload())
        bin_path, sidecar_path = write_field(ctx.out, field, spec=spec, residuals=report.to_event())
        console.print(
            f"[cyan]sweeps={field.stats.sweeps if field.stats else 0}[/cyan] "
            f"violation={report.max_obstacle_violation:.2e} complementarity={report.max_complementarity:.2e}"
        )
        ctx.finish([bin_path, sidecar_path, kkt_path])


@app.command("diagnose")
def diagnose_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    field: Path | None = FieldOpt,
    poly: str | None = PolyOpt,
    center: list[str] | None = CenterOpt,
    lambdas: str | None = typer.Option(None, "--lambdas", help="Comma-separated lambda list."),  # noqa: B008
    n: int | None = typer.Option(None, "--n", help="Thin dimension for --poly."),  # noqa: B008
    a: float | None = typer.Option(None, "--a", help="Weight exponent for --poly."),  # noqa: B008
) -> None:
    """Frequency profiles: profile.csv, profile.dat and profile.json per center."""
    with _guard("diagnose"):
        ctx = _context("diagnose", config, out, seed, threads)
        source, weight, dim = _source(ctx, field, poly, n, a)
        diag = ctx.config.diagnostics
        lams = _floats(lambdas) if lambdas else diag.lambdas
        centers = _centers(center, diag.centers, dim)
        paths: list[Path] = []
        profiles: list[dict[str, Any]] = []
        with ctx.manifest.phase("profile"):
            for i, c in enumerate(centers):
                result = profile(source, weight, c, diag.radii or None, lams, order=diag.order)
                estimate = frequency_at_zero(result)
                paths.append(result.to_csv(ctx.out / _suffixed("profile", i, len(centers), "csv")))
                paths.append(result.to_gnuplot(ctx.out / _suffixed("profile", i, len(centers), "dat")))
                profiles.append({**result.to_payload(), "frequency_at_zero": estimate.to_event()})
                console.print(f"[cyan]center={c}[/cyan] N(0+)={estimate.value:.4f} monotone={result.monotone}")
        paths.append(write_json(ctx.out / "profile.json", "profile", {"a": weight, "profiles": profiles}))
        ctx.finish(paths)


@app.command("blowup")
def blowup_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    field: Path | None = FieldOpt,
    poly: str | None = PolyOpt,
    center: list[str] | None = CenterOpt,
    n: int | None = typer.Option(None, "--n", help="Thin dimension for --poly."),  # noqa: B008
    a: float | None = typer.Option(None, "--a", help="Weight exponent for --poly."),  # noqa: B008
) -> None:
    """First and second blow-ups with classification and next-order flags; writes blowup.json."""
    with _guard("blowup"):
        ctx = _context("blowup", config, out, seed, threads)
        source, weight, dim = _source(ctx, field, poly, n, a)
        results: list[dict[str, Any]] = []
        with ctx.manifest.phase("blowup"):
            for c in _centers(center, ctx.config.blowup.centers, dim):
                first = first_blowup(source, weight, c, rho=ctx.config.blowup.rho, seed=ctx.seed)
                entry: dict[str, Any] = {"first": first.to_payload(), "second": None}
                if first.ok:
                    report = second_blowup(source, weight, first, rho=ctx.config.blowup.rho)
                    nxt_membership(report)
                    entry["second"] = report.to_payload()
                    console.print(
                        f"[cyan]center={c}[/cyan] kappa={first.kappa} lambda*={report.lambda_star} "
                        f"case={report.case} stratum={report.stratum}"
                    )
                else:
                    console.print(f"[yellow]center={c}[/yellow] {first.notice}")
                results.append(entry)
        path = write_json(ctx.out / "blowup.json", "blowup", {"a": weight, "results": results})
        ctx.finish([path])


@app.command("scan")
def scan_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    field: Path | None = FieldOpt,
    poly: str | None = PolyOpt,
    spacing: float | None = typer.Option(None, "--spacing", help="Sample spacing on the thin space."),  # noqa: B008
    n: int | None = typer.Option(None, "--n", help="Thin dimension for --poly."),  # noqa: B008
    a: float | None = typer.Option(None, "--a", help="Weight exponent for --poly."),  # noqa: B008
) -> None:
    """Singular-set scan; writes scan.csv and scan.json sorted by point."""
    with _guard("scan"):
        ctx = _context("scan", config, out, seed, threads)
        source, weight, _ = _source(ctx, field, poly, n, a)
        settings = ctx.config.scan
        obstacle = _thin_obstacle(ctx.config.problem.obstacle_poly()) if field is not None else None
        with ctx.manifest.phase("scan"):
            table = scan(
                source,
                spacing or settings.spacing,
                weight,
                obstacle=obstacle,
                extent=settings.extent,
                tol=settings.tol,
                threads=ctx.threads,
                seed=ctx.seed,
            )
        csv_path = table.to_csv(ctx.out / "scan.csv")
        json_path = write_json(ctx.out / "scan.json", "scan", table.to_payload())
        console.print(f"[cyan]entries={len(table)}[/cyan] strata={table.counts()}")
        ctx.finish([csv_path, json_path])


@app.command("kernel")
def kernel_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    check: str | None = typer.Option(None, "--check", help="symbol, homogeneity or flux."),  # noqa: B008
    a: float | None = typer.Option(None, "--a", help="Weight exponent in (-1, 0)."),  # noqa: B008
    n: int | None = typer.Option(None, "--n", help="Dimension n of the kernel."),  # noqa: B008
) -> None:
    """Kernel spot checks; writes kernel.json."""
    with _guard("kernel"):
        ctx = _context("kernel", config, out, seed, threads)
        settings = ctx.config.very_thin
        kind = check or settings.check
        weight = settings.a if a is None else a
        dim = n or settings.n
        with ctx.manifest.phase(kind):
            if kind == "homogeneity":
                payload = kernel_check(KernelSpec.build(dim, weight), seed=ctx.seed).to_payload()
            elif kind == "symbol":
                lines = [LineFunction.bump(0.0, width) for width in settings.bump_widths]
                payload = symbol_check(KernelSpec.build(dim, weight), lines).to_payload()
            elif kind == "flux":
                payload = flux_check(weight).to_payload()
            else:
                raise ValueError(f"unknown kernel check {kind!r}; expected symbol, homogeneity or flux")
        path = write_json(ctx.out / "kernel.json", "kernel", payload)
        verdict = payload.get("passed", payload.get("consistent"))
        colour = "green" if verdict else "yellow"
        console.print(f"[{colour}]{kind} check: {'pass' if verdict else 'fail'}[/{colour}]")
        ctx.finish([path])


@app.command("barrier")
def barrier_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    beta: list[float] | None = typer.Option(None, "--beta", help="Barrier exponent (repeatable)."),  # noqa: B008
    a: float | None = typer.Option(None, "--a", help="Weight exponent in (-1, 0)."),  # noqa: B008
) -> None:
    """Hoelder barriers; writes barrier.json with trace, positivity and exponent checks."""
    with _guard("barrier"):
        ctx = _context("barrier", config, out, seed, threads)
        weight = ctx.config.very_thin.a if a is None else a
        spec = KernelSpec.build(2, weight)
        reports = []
        with ctx.manifest.phase("barrier"):
            for value in beta or ctx.config.very_thin.betas:
                report = barrier(spec, value).report
                reports.append(report.to_payload())
                console.print(
                    f"[cyan]beta={value:g}[/cyan] exponent={report.holder_exponent:.3f} "
                    f"expected={report.expected_exponent:.3f}"
                )
        path = write_json(ctx.out / "barrier.json", "barrier", {"a": weight, "reports": reports})
        ctx.finish([path])


@app.command("equivalence")
def equivalence_cmd(
    config: Path | None = ConfigOpt,
    out: Path | None = OutOpt,
    seed: int | None = SeedOpt,
    threads: int | None = ThreadsOpt,
    a: float | None = typer.Option(None, "--a", help="Weight exponent in (-1, 0)."),  # noqa: B008
    res: int | None = typer.Option(None, "--res", help="Box resolution."),  # noqa: B008
) -> None:
    """Box solve against the fractional line solve for a bump obstacle; writes equivalence.json."""
    with _guard("equivalence"):
        ctx = _context("equivalence", config, out, seed, threads)
        settings = ctx.config.very_thin
        weight = settings.a if a is None else a
        psi = LineFunction.bump(0.0, settings.obstacle_width, settings.obstacle_height)
        with ctx.manifest.phase("equivalence"):
            report = equivalence_chain(psi, weight, res=res or settings.res, nodes=settings.nodes)
        path = write_json(ctx.out / "equivalence.json", "equivalence", report.to_payload())
        console.print(
            f"[cyan]line discrepancy={report.line_discrepancy:.3%}[/cyan] overlap={report.overlap:.2f} "
            f"sweeps={report.sweeps}"
        )
        ctx.finish([path])


if __name__ == "__main__":
    app()
