import io
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidConfig, MalformedInput
from app.models.models import (
    AutocovSequence, CovarianceEstimate, DesignMatrix, MonteCarloResult, ResponseVector
)


INTERCEPT_COLUMN = "const"


def _looks_numeric(name: str) -> bool:
    try:
        float(name)
    except (TypeError, ValueError):
        return False
    return True


def read_csv_table(path: Union[str, Path]) -> pd.DataFrame:
    """
    Читает CSV: разделитель запятая, обязательная строка заголовка,
    десятичная точка, UTF-8; все значения должны быть числовыми.

    Raises:
        MalformedInput: Если файл не читается или не соответствует формату
    """
    try:
        frame = pd.read_csv(path, sep=",", encoding="utf-8", decimal=".")
    except FileNotFoundError:
        raise MalformedInput(f"Файл не найден: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedInput(f"Некорректный CSV {path}: {e}") from None
    return validate_frame(frame, str(path))


def validate_frame(frame: pd.DataFrame, source: str = "данные") -> pd.DataFrame:
    """Проверяет, что таблица непуста, с заголовком и только числовая"""
    if frame.empty:
        raise MalformedInput(f"{source}: нет строк данных")
    if all(_looks_numeric(name) for name in frame.columns):
        raise MalformedInput(f"{source}: отсутствует строка заголовка")
    try:
        numeric = frame.apply(pd.to_numeric, errors="raise").astype(float)
    except (ValueError, TypeError) as e:
        raise MalformedInput(f"{source}: нечисловые значения ({e})") from None
    if numeric.isna().any().any():
        raise MalformedInput(f"{source}: пропущенные значения")
    return numeric


def frame_from_columns(columns: Dict[str, List[float]]) -> pd.DataFrame:
    """Таблица из словаря столбцов (тело HTTP-запроса)"""
    try:
        frame = pd.DataFrame(columns)
    except ValueError as e:
        raise MalformedInput(f"Столбцы разной длины: {e}") from None
    return validate_frame(frame, "тело запроса")


def resolve_response(frame: pd.DataFrame, response: str) -> str:
    """Имя столбца отклика: по имени или по номеру (с нуля)"""
    if response in frame.columns:
        return response
    if response.isdigit() and int(response) < len(frame.columns):
        return frame.columns[int(response)]
    raise InvalidConfig(f"Столбец отклика не найден: {response}")


def build_regression(
    frame: pd.DataFrame,
    response: str,
    add_intercept: bool = False,
) -> Tuple[DesignMatrix, ResponseVector]:
    """
    Разделяет таблицу на отклик и план; остальные столбцы образуют X.

    Свободный член добавляется только по явному флагу add_intercept.
    """
    name = resolve_response(frame, response)
    regressors = frame.drop(columns=[name])
    if add_intercept:
        regressors.insert(0, INTERCEPT_COLUMN, 1.0)
    if regressors.shape[1] == 0:
        raise InvalidConfig("Нет регрессоров: добавьте столбцы или флаг --add-intercept")
    X = DesignMatrix(regressors.to_numpy(dtype=float), tuple(str(c) for c in regressors.columns))
    return X, ResponseVector(frame[name].to_numpy(dtype=float))


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """Запись через временный файл и атомарное переименование"""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as tmp:
            tmp.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _to_csv(frame: pd.DataFrame, header: bool = True) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, header=header, lineterminator="\n")
    return buffer.getvalue()


def autocov_csv(acov: AutocovSequence) -> str:
    """Двухстолбцовый CSV lag,acov"""
    return _to_csv(pd.DataFrame({"lag": np.arange(acov.max_lag + 1), "acov": acov.values}))


def covariance_csv(est: CovarianceEstimate) -> str:
    """C_n построчно, без заголовка"""
    return _to_csv(pd.DataFrame(est.matrix), header=False)


def rho_stability_csv(sizes: Sequence[int], values: Sequence[float]) -> str:
    return _to_csv(pd.DataFrame({"prefix_n": sizes, "value": values}))


def format_beta(beta: Sequence[float]) -> str:
    return ";".join(repr(float(b)) for b in beta)


MONTE_CARLO_COLUMNS = ["n", "h", "kernel", "beta", "N", "rejection_rate", "std_error", "failures"]


def monte_carlo_frame(results: Sequence[MonteCarloResult], reference: Optional[Dict[int, float]] = None) -> pd.DataFrame:
    """Таблица уровня/мощности; при наличии добавляет опубликованные значения"""
    frame = pd.DataFrame(
        [
            {
                "n": r.n,
                "h": "auto" if r.h is None else r.h,
                "kernel": r.kernel_id.value,
                "beta": format_beta(r.beta),
                "N": r.replications,
                "rejection_rate": r.rejection_rate,
                "std_error": r.standard_error,
                "failures": r.failures,
            }
            for r in results
        ],
        columns=MONTE_CARLO_COLUMNS,
    )
    if reference is not None:
        frame["reference"] = [reference.get(r.n) for r in results]
    return frame


def monte_carlo_csv(results: Sequence[MonteCarloResult], reference: Optional[Dict[int, float]] = None) -> str:
    return _to_csv(monte_carlo_frame(results, reference))


def regression_csv(X: DesignMatrix, Y: ResponseVector, response: str = "y") -> str:
    """Отклик и план одного повтора в формате, который читает команда fit"""
    frame = pd.DataFrame(X.entries, columns=list(X.column_names))
    frame.insert(0, response, Y.values)
    return _to_csv(frame)
