"""
Командная строка: fit, test, autocov, diagnose, simulate.

Коды выхода: 0: успех, 2: некорректный ввод или конфигурация,
3: вырожденный план, 4: непригодная оценка C_n.

Пример:
    python -m app.cli fit --input data.csv --response y --add-intercept
"""

import json
import logging
from contextlib import contextmanager
from typing import List, Optional, Tuple

import click
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.core.config import KNOWN_KERNELS, settings
from app.core.exceptions import EstimationError
from app.core.logging import configure_logging
from app.api.v1.schemas import Command, RunConfig
from app.api.v1.services.diagnostics_service import DiagnosticsService
from app.api.v1.services.regression_service import RegressionService
from app.api.v1.services.simulation_service import SimulationService
from app.utils.io_utils import (
    atomic_write_text, autocov_csv, build_regression, covariance_csv, monte_carlo_csv,
    monte_carlo_frame, read_csv_table, regression_csv, resolve_response, rho_stability_csv
)
from app.models.models import DesignMatrix, ResponseVector


logger = logging.getLogger(__name__)


@contextmanager
def handle_errors():
    """Переводит ошибки конфигурации и оценивания в коды выхода"""
    try:
        yield
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        click.echo(f"Ошибка конфигурации: {messages}", err=True)
        raise SystemExit(2)
    except EstimationError as e:
        logger.debug("Команда прервана", exc_info=True)
        click.echo(f"{type(e).__name__}: {e}", err=True)
        raise SystemExit(e.exit_code)


def emit(text: str, output: Optional[str]) -> None:
    """Пишет в файл атомарно или на стандартный вывод"""
    if output:
        atomic_write_text(output, text)
    else:
        click.echo(text, nl=False)


def dump_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def parse_int_list(ctx, param, value: Optional[str]) -> List[int]:
    if not value:
        return []
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter("ожидаются целые числа через запятую")


def parse_rho(ctx, param, value: Optional[str]) -> Optional[Tuple[int, int, int]]:
    if value is None:
        return None
    parts = parse_int_list(ctx, param, value)
    if len(parts) != 3:
        raise click.BadParameter("ожидается j,l,k")
    return tuple(parts)


def load_regression(config: RunConfig) -> Tuple[DesignMatrix, ResponseVector]:
    frame = read_csv_table(config.input)
    return build_regression(frame, config.response, config.add_intercept)


input_option = click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False), help="CSV с заголовком")
response_option = click.option("--response", help="Имя или номер столбца отклика")
intercept_option = click.option("--add-intercept", is_flag=True, help="Добавить столбец единиц первым")
kernel_option = click.option("--kernel", type=click.Choice(KNOWN_KERNELS), default=settings.default_kernel, show_default=True)
bandwidth_option = click.option("--bandwidth", default="auto", show_default=True, help='"auto" или положительное число')
output_option = click.option("--output", type=click.Path(dir_okay=False), help="Файл результата (по умолчанию stdout)")


@click.group()
@click.option("--log-level", default=None, help="Уровень логирования")
def cli(log_level: Optional[str]):
    """МНК-инференция при зависимых ошибках"""
    configure_logging(log_level)


@cli.command("fit")
@input_option
@response_option
@intercept_option
@kernel_option
@bandwidth_option
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@click.option("--covariance-output", type=click.Path(dir_okay=False), help="CSV с C_n и JSON-описание рядом")
@output_option
def cmd_fit(input_path, response, add_intercept, kernel, bandwidth, fmt, covariance_output, output):
    """β̂, d_j(n), C_n и тесты T_{j,n}"""
    with handle_errors():
        config = RunConfig(
            command=Command.FIT, input=input_path, response=response, add_intercept=add_intercept,
            kernel=kernel, bandwidth=bandwidth, output=output,
        )
        X, Y = load_regression(config)
        service = RegressionService(settings)
        report, est = service.fit_report(X, Y, config.kernel, config.bandwidth)

        if fmt == "json":
            text = dump_json(report)
        else:
            text = _fit_table(report)

        emit(text, config.output)
        if covariance_output:
            atomic_write_text(covariance_output, covariance_csv(est))
            atomic_write_text(f"{covariance_output}.json", dump_json(service.covariance_sidecar(est)))


def _fit_table(report) -> str:
    frame = pd.DataFrame([c.model_dump() for c in report.coefficients]).set_index("index")
    header = (
        f"n={report.n} p={report.p} kernel={report.kernel} "
        f"h={report.bandwidth.h:g} kept_lags={report.bandwidth.kept_lags} psd={report.psd}\n"
    )
    return header + frame.to_string() + "\n"


@cli.command("test")
@input_option
@response_option
@intercept_option
@kernel_option
@bandwidth_option
@click.option("--indices", callback=parse_int_list, help="Номера коэффициентов через запятую (с нуля)")
@output_option
def cmd_test(input_path, response, add_intercept, kernel, bandwidth, indices, output):
    """Тест T_{j,n} (один индекс) или совместный тест Ξ"""
    with handle_errors():
        config = RunConfig(
            command=Command.TEST, input=input_path, response=response, add_intercept=add_intercept,
            kernel=kernel, bandwidth=bandwidth, indices=indices, output=output,
        )
        X, Y = load_regression(config)
        result = RegressionService(settings).run_test(X, Y, config.indices, config.kernel, config.bandwidth)
        emit(dump_json(result), config.output)


@cli.command("autocov")
@input_option
@response_option
@intercept_option
@kernel_option
@click.option("--max-lag", type=int, default=settings.default_max_lag, show_default=True)
@click.option("--raw", is_flag=True, help="Автоковариации самого отклика, без регрессии")
@output_option
def cmd_autocov(input_path, response, add_intercept, kernel, max_lag, raw, output):
    """Автоковариации остатков (данные для графика) и предложенная ширина окна"""
    with handle_errors():
        config = RunConfig(
            command=Command.AUTOCOV, input=input_path, response=response, add_intercept=add_intercept,
            kernel=kernel, max_lag=max_lag, raw=raw, output=output,
        )
        service = RegressionService(settings)
        if config.raw:
            frame = read_csv_table(config.input)
            X = None
            Y = ResponseVector(frame[resolve_response(frame, config.response)].to_numpy(dtype=float))
        else:
            X, Y = load_regression(config)

        report, acov = service.autocov_report(X, Y, config.kernel, config.max_lag, raw=config.raw)
        emit(autocov_csv(acov), config.output)
        # stdout занят CSV, если файл не указан
        click.echo(f"suggested_h={report.suggested_h:g}", err=not config.output)


@cli.command("diagnose")
@input_option
@click.option("--response", help="Столбец, исключаемый из плана")
@intercept_option
@click.option("--max-lag", type=int, default=5, show_default=True)
@click.option("--rho", callback=parse_rho, help="j,l,k для проверки устойчивости ρ̂ (по умолчанию 0,0,1)")
@click.option("--splits", type=int, default=4, show_default=True)
@click.option("--rho-output", type=click.Path(dir_okay=False), help="CSV prefix_n,value")
@output_option
def cmd_diagnose(input_path, response, add_intercept, max_lag, rho, splits, rho_output, output):
    """Диагностика условий на план"""
    with handle_errors():
        config = RunConfig(
            command=Command.DIAGNOSE, input=input_path, response=response,
            add_intercept=add_intercept, max_lag=max_lag, output=output,
        )
        frame = read_csv_table(config.input)
        if config.response:
            frame = frame.drop(columns=[resolve_response(frame, config.response)])
        if config.add_intercept:
            frame.insert(0, "const", 1.0)
        X = DesignMatrix(frame.to_numpy(dtype=float), tuple(str(c) for c in frame.columns))

        service = DiagnosticsService(settings)
        diagnostics = service.diagnose(X, config.max_lag)
        stability = service.stability(X, rho, splits) if rho_output else None

        for message in diagnostics.warnings:
            click.echo(f"warning: {message}", err=True)
        emit(dump_json(diagnostics), config.output)
        if stability is not None:
            atomic_write_text(rho_output, rho_stability_csv(stability.prefix_n, stability.values))


@cli.command("simulate")
@click.option("--model", type=int, help="1 или 2")
@click.option("--beta", type=float, multiple=True, help="Коэффициенты, по одному на флаг")
@click.option("--n", "sample_sizes", type=int, multiple=True, help="Длина выборки; можно повторять")
@click.option("--replications", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@kernel_option
@bandwidth_option
@click.option("--experiment", help="Название опубликованного исследования")
@click.option("--emit-data", type=click.Path(dir_okay=False), help="Сохранить (Y, X) одного повтора")
@output_option
def cmd_simulate(model, beta, sample_sizes, replications, seed, kernel, bandwidth, experiment, emit_data, output):
    """Монте-Карло оценка уровня и мощности"""
    with handle_errors():
        config = RunConfig(
            command=Command.SIMULATE, model=model, beta=list(beta), sample_sizes=list(sample_sizes),
            n=sample_sizes[0] if sample_sizes else None, replications=replications, seed=seed,
            kernel=kernel, bandwidth=bandwidth, experiment=experiment, emit_data=emit_data, output=output,
        )
        service = SimulationService(settings)

        if config.emit_data:
            if config.experiment:
                raise click.UsageError("--emit-data нельзя совмещать с --experiment")
            sample = service.emit_data(config.model, config.beta, config.n, config.seed)
            atomic_write_text(config.emit_data, regression_csv(sample.X, sample.Y))
            return

        reference = None
        if config.experiment:
            results, reference = service.run_experiment(
                config.experiment, config.replications, config.seed,
                sample_sizes=config.sample_sizes or None, kernel=config.kernel,
            )
        else:
            results = service.run(
                config.model, config.beta, config.sample_sizes, config.kernel,
                config.bandwidth, config.replications, config.seed,
            )

        emit(monte_carlo_csv(results, reference), config.output)
        click.echo(monte_carlo_frame(results, reference).to_string(index=False), err=not config.output)


if __name__ == "__main__":
    cli()
