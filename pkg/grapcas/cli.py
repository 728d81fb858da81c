"""
Command-line interface of grapcas.

Every subcommand reads the packaged configuration (or `--config`), overlays an
optional scenario file and writes a table headed by a run manifest to stdout or
to a file. Errors are reported as JSON on stderr with a non-zero exit code.
"""

import functools
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import click

from grapcas import __version__
from grapcas.constants import CONSTANTS, GrapheneSheet, to_dimensionless, WavePoint
from grapcas.errors import ConfigurationError, GrapcasError
from grapcas.figures import (
    FIGURE_IDS,
    CurveSpec,
    Quantity,
    ScanSpec,
    evaluate_quantity,
    figure_scan,
    figure_spec,
    linear_grid,
    log_grid,
    point_diagnostics,
)
from grapcas.fresnel import reflect_matsubara, reflect_real_axis
from grapcas.graphene import classify, pi_local, pi_matsubara, pi_real_axis
from grapcas.materials import get_model_table, resolve_substrate
from grapcas.pressure import PressureSettings, p_neq
from grapcas.utils.config import (
    load_config,
    load_scenario_file,
    scenario_from_config,
    tensor_policy_from_config,
    validate_config,
)
from grapcas.utils.logger import setup_logger_from_config
from grapcas.utils.recorders import CSVRecorder, JSONRecorder, RunManifest
from grapcas.utils.units import FrequencyUnit, UnitConverter

logger = logging.getLogger("grapcas.cli")


_SCAN_PATTERN = re.compile(
    r"^a=(?P<lo>[^:]+):(?P<hi>[^:]+):(?P<step>[0-9.eE+-]+?)(?P<unit>um|nm|m)?$"
)


@dataclass
class _Run:
    """Everything a subcommand needs from the configuration layer."""

    config: Dict[str, Any]
    section: Dict[str, Any]
    settings: PressureSettings
    tensor_policy: Any
    out: str

    def manifest(
        self, ctx: click.Context, diagnostics: Optional[List[Dict[str, Any]]] = None
    ) -> RunManifest:
        params = {k: v for k, v in sorted(ctx.params.items()) if v is not None}
        command = f"{ctx.command_path} {json.dumps(params, sort_keys=True)}"
        return RunManifest.create(
            command=command,
            config={"scenario": self.section},
            tolerances=dict(self.config.get("quadrature", {})),
            diagnostics=diagnostics,
        )

    def recorder(
        self,
        ctx: click.Context,
        location: Optional[Path] = None,
        diagnostics: Optional[List[Dict[str, Any]]] = None,
    ):
        manifest = self.manifest(ctx, diagnostics)
        if self.out == "json":
            return JSONRecorder(manifest, location)
        return CSVRecorder(manifest, location)


def _reports_errors(func):
    """Turn grapcas errors into a JSON body on stderr and the error's exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GrapcasError as e:
            error = e
        except (FileNotFoundError, ValueError) as e:
            error = ConfigurationError(str(e))
        logger.error(f"{type(error).__name__}: {error}")
        click.echo(json.dumps(error.to_dict(), default=str), err=True)
        sys.exit(error.exit_code)

    return wrapper


def _run_options(func):
    func = click.option(
        "--out",
        type=click.Choice(["csv", "json"]),
        default="csv",
        show_default=True,
        help="Output format.",
    )(func)
    func = click.option(
        "--tol", type=float, default=None, help="Relative quadrature tolerance."
    )(func)
    func = click.option(
        "--verbose", is_flag=True, help="Forward log records to stdout/stderr."
    )(func)
    func = click.option(
        "--scenario",
        "scenario_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="Scenario file (key = value lines or JSON).",
    )(func)
    func = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="Configuration file; defaults to the packaged config.json.",
    )(func)
    return func


def _prepare(config_path, scenario_path, verbose, tol, out) -> _Run:
    config = validate_config(load_config(config_path))
    setup_logger_from_config(config.get("logger", {}), verbose=verbose)

    section = dict(config.get("scenario", {}))
    if scenario_path is not None:
        section.update(load_scenario_file(scenario_path))
    quadrature = dict(config.get("quadrature", {}))
    if tol is not None:
        quadrature["rel_tol"] = tol
        config["quadrature"] = quadrature
    return _Run(
        config=config,
        section=section,
        settings=PressureSettings.from_config(quadrature),
        tensor_policy=tensor_policy_from_config(quadrature),
        out=out,
    )


def _emit(
    run: _Run,
    ctx: click.Context,
    columns: Dict[str, List[Any]],
    output,
    diagnostics: Optional[List[Dict[str, Any]]] = None,
):
    recorder = run.recorder(ctx, diagnostics=diagnostics)
    if output is None:
        click.echo(recorder.render(columns), nl=False)
        return
    path = Path(output)
    recorder.location = path.parent
    recorder.write(columns, name=path.stem)
    logger.info(f"Results written to {recorder.path_for(path.stem)}")


def _frequency_options(func):
    func = click.option(
        "--omega-unit",
        type=click.Choice([unit.value for unit in FrequencyUnit]),
        default=FrequencyUnit.ELECTRONVOLTS.value,
        show_default=True,
        help="Unit of --omega; eV and K mean ħω and ħω/k_B.",
    )(func)
    func = click.option(
        "--omega",
        "--omega-ev",
        "omega",
        type=float,
        multiple=True,
        required=True,
        help="Frequencies ω, or ξ with --matsubara.",
    )(func)
    return func


def _output_option(func):
    return click.option(
        "--output",
        type=click.Path(dir_okay=False),
        default=None,
        help="Write to this file instead of stdout.",
    )(func)


def _sheet(section: Dict[str, Any], temperature: float) -> GrapheneSheet:
    return GrapheneSheet.from_lab_units(
        delta_ev=float(section["delta_eV"]),
        mu_ev=float(section["mu_eV"]),
        temperature=temperature,
        vf_over_c=float(section["vf_over_c"]),
    )


def parse_scan(text: str):
    """
    Separations in µm of a scan `a=LO:HI:STEP[um|nm|m]`; µm when no unit.

    Raises:
        ConfigurationError: If the text is not a scan.
    """
    match = _SCAN_PATTERN.match(text.strip())
    if match is None:
        raise ConfigurationError(f"Invalid scan {text!r}; expected a=LO:HI:STEP[um]")
    unit = match.group("unit") or "um"
    try:
        lo, hi, step = (
            UnitConverter.convert_length(float(match.group(key)), unit, "um")
            for key in ("lo", "hi", "step")
        )
    except ValueError as e:
        raise ConfigurationError(f"Invalid scan {text!r}: {e}")
    return linear_grid(lo, hi, step)


@click.group()
@click.version_option(__version__, prog_name="grapcas")
def main():
    """Graphene polarization tensor and nonequilibrium Casimir pressure."""


@main.command("tensor-eval")
@_run_options
@_output_option
@_frequency_options
@click.option("--k-invm", type=float, multiple=True, required=True)
@click.option("--temperature", type=float, default=None, help="Defaults to T1.")
@click.option("--matsubara", is_flag=True, help="Treat --omega as ξ.")
@click.option("--local", is_flag=True, help="Spatially local tensor.")
@click.pass_context
@_reports_errors
def tensor_eval(
    ctx,
    config_path,
    scenario_path,
    verbose,
    tol,
    out,
    output,
    omega,
    omega_unit,
    k_invm,
    temperature,
    matsubara,
    local,
):
    """Π₀₀ and Π of the coating at the given (ω, k) points."""
    run = _prepare(config_path, scenario_path, verbose, tol, out)
    sheet = _sheet(run.section, temperature or float(run.section["t1_K"]))
    columns: Dict[str, List[Any]] = {
        key: []
        for key in (
            "omega_rad_s",
            "k_invm",
            "region",
            "re_pi00",
            "im_pi00",
            "re_pi",
            "im_pi",
        )
    }
    for frequency in omega:
        w = UnitConverter.convert_frequency(
            frequency, omega_unit, FrequencyUnit.RAD_PER_S.value
        )
        for k in k_invm:
            if local:
                value = pi_local(
                    w, sheet, imaginary=matsubara, policy=run.tensor_policy
                ).at(k)
                region = "local"
            elif matsubara:
                value = pi_matsubara(w, k, sheet, run.tensor_policy)
                region = "matsubara"
            else:
                value = pi_real_axis(w, k, sheet, run.tensor_policy)
                region = classify(w, k, sheet).value
            columns["omega_rad_s"].append(w)
            columns["k_invm"].append(k)
            columns["region"].append(region)
            columns["re_pi00"].append(value.pi00.real)
            columns["im_pi00"].append(value.pi00.imag)
            columns["re_pi"].append(value.pi.real)
            columns["im_pi"].append(value.pi.imag)
    _emit(run, ctx, columns, output)


@main.command()
@_run_options
@_output_option
@click.option("--substrate", default=None, help="Overrides the scenario substrate.")
@click.option("--xi-scan", is_flag=True, help="Scan the imaginary axis.")
@click.option(
    "--range",
    "span",
    type=(float, float),
    default=(1e12, 1e17),
    show_default=True,
    help="Frequency range in --range-unit.",
)
@click.option(
    "--range-unit",
    type=click.Choice([unit.value for unit in FrequencyUnit]),
    default=FrequencyUnit.RAD_PER_S.value,
    show_default=True,
)
@click.option("--points-per-decade", type=int, default=4, show_default=True)
@click.pass_context
@_reports_errors
def permittivity(
    ctx,
    config_path,
    scenario_path,
    verbose,
    tol,
    out,
    output,
    substrate,
    xi_scan,
    span,
    range_unit,
    points_per_decade,
):
    """ε(iξ) or ε(ω) of the substrate."""
    run = _prepare(config_path, scenario_path, verbose, tol, out)
    model = resolve_substrate(substrate or run.section["substrate"])
    lo, hi = (
        UnitConverter.convert_frequency(w, range_unit, FrequencyUnit.RAD_PER_S.value)
        for w in span
    )
    grid = log_grid(lo, hi, points_per_decade)
    if xi_scan:
        xi = (0.0,) + grid
        columns = {
            "xi_rad_s": list(xi),
            "eps": [model.eps_imaginary_axis(x) for x in xi],
        }
    else:
        values = [complex(model.eps_real_axis(w)) for w in grid]
        columns = {
            "omega_rad_s": list(grid),
            "re_eps": [v.real for v in values],
            "im_eps": [v.imag for v in values],
        }
    _emit(run, ctx, columns, output)


@main.command()
@_run_options
@_output_option
@_frequency_options
@click.option("--k-invm", type=float, multiple=True, required=True)
@click.option("--plate", type=click.Choice(["1", "2"]), default="1", show_default=True)
@click.option("--matsubara", is_flag=True, help="Treat --omega as ξ.")
@click.pass_context
@_reports_errors
def reflect(
    ctx,
    config_path,
    scenario_path,
    verbose,
    tol,
    out,
    output,
    omega,
    omega_unit,
    k_invm,
    plate,
    matsubara,
):
    """TM and TE reflection coefficients of one plate of the scenario."""
    run = _prepare(config_path, scenario_path, verbose, tol, out)
    s = scenario_from_config(run.section, tensor_policy=run.tensor_policy)
    target = s.plates[int(plate) - 1]
    a = s.separation
    columns: Dict[str, List[Any]] = {
        key: []
        for key in (
            "omega_rad_s",
            "k_invm",
            "u",
            "t",
            "re_r_tm",
            "im_r_tm",
            "re_r_te",
            "im_r_te",
        )
    }
    for frequency in omega:
        w = UnitConverter.convert_frequency(
            frequency, omega_unit, FrequencyUnit.RAD_PER_S.value
        )
        for k in k_invm:
            if matsubara:
                pair = reflect_matsubara(target, w, k)
                u, t = 2.0 * a * w / CONSTANTS.c, math.nan
            else:
                u, t = to_dimensionless(WavePoint(w, k), a)
                pair = reflect_real_axis(target, u, t, a)
            columns["omega_rad_s"].append(w)
            columns["k_invm"].append(k)
            columns["u"].append(u)
            columns["t"].append(t)
            for name, r in (("tm", complex(pair.r_tm)), ("te", complex(pair.r_te))):
                columns[f"re_r_{name}"].append(r.real)
                columns[f"im_r_{name}"].append(r.imag)
    _emit(run, ctx, columns, output)


@main.command()
@_run_options
@_output_option
@click.option(
    "--quantity",
    type=click.Choice([q.value for q in Quantity]),
    default=Quantity.P_NEQ.value,
    show_default=True,
)
@click.option("--scan", default=None, help="Separation scan, e.g. a=0.2:2:0.1um.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.pass_context
@_reports_errors
def pressure(
    ctx,
    config_path,
    scenario_path,
    verbose,
    tol,
    out,
    output,
    quantity,
    scan,
    jobs,
):
    """Casimir pressure (Pa) or a derived ratio for the scenario."""
    run = _prepare(config_path, scenario_path, verbose, tol, out)
    quantity = Quantity.parse(quantity)
    model = resolve_substrate(run.section["substrate"])

    if scan is None:
        s = scenario_from_config(run.section, model, run.tensor_policy)
        separation_um = UnitConverter.convert_length(s.separation, "m", "um")
        if quantity is Quantity.P_NEQ:
            breakdown = p_neq(s, run.settings).to_dict()
            columns = {"separation_um": [separation_um]}
            columns.update({key: [value] for key, value in breakdown.items()})
        else:
            value = evaluate_quantity(quantity, s, run.settings)
            columns = {"separation_um": [separation_um], quantity.column: [value]}
        _emit(run, ctx, columns, output)
        return

    spec = ScanSpec(
        figure_id="",
        quantity=quantity,
        curves=(CurveSpec.from_section(run.section),),
        separations_um=parse_scan(scan),
    )
    table = figure_scan(
        spec,
        run.section,
        settings=run.settings,
        substrate=model,
        tensor_policy=run.tensor_policy,
        jobs=jobs,
    )
    columns = {
        "separation_um": table["separation_um"].tolist(),
        quantity.column: table["value"].tolist(),
        "note": table["note"].tolist(),
    }
    _emit(run, ctx, columns, output, point_diagnostics(table))


@main.command()
@_run_options
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--inset", is_flag=True, help="Inset range of figure 1a.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False),
    default="figures",
    show_default=True,
)
@click.option("--points-per-decade", type=int, default=None)
@click.option("--gnuplot/--no-gnuplot", default=True, show_default=True)
@click.pass_context
@_reports_errors
def figures(
    ctx,
    config_path,
    scenario_path,
    verbose,
    tol,
    out,
    figure_id,
    inset,
    jobs,
    out_dir,
    points_per_decade,
    gnuplot,
):
    """Data files of one figure panel, one file per curve."""
    run = _prepare(config_path, scenario_path, verbose, tol, out)
    if points_per_decade is None:
        points_per_decade = int(
            run.config.get("figures", {}).get("points_per_decade", 40)
        )
    spec = figure_spec(figure_id, points_per_decade, inset=inset)
    # fails before any computation when the substrate is missing
    model = resolve_substrate(run.section["substrate"])
    table = figure_scan(
        spec,
        run.section,
        settings=run.settings,
        substrate=model,
        tensor_policy=run.tensor_policy,
        jobs=jobs,
    )

    suffix = "_inset" if inset else ""
    for curve in spec.curves:
        rows = table[table["curve"] == curve.label]
        column = (curve.quantity or spec.quantity).column
        columns = {
            "separation_um": rows["separation_um"].tolist(),
            column: rows["value"].tolist(),
            "note": rows["note"].tolist(),
        }
        name = f"fig{figure_id}{suffix}_{curve.label}"
        recorder = run.recorder(ctx, Path(out_dir), point_diagnostics(rows))
        if isinstance(recorder, CSVRecorder):
            path = recorder.write(
                columns, name=name, gnuplot=gnuplot, title=f"{figure_id} {curve.label}"
            )
        else:
            path = recorder.write(columns, name=name)
        click.echo(path)


@main.command()
def models():
    """Registered permittivity models and built-in substrates."""
    click.echo(get_model_table())


if __name__ == "__main__":
    main()
