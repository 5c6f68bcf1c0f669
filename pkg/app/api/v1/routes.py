from fastapi import APIRouter, Depends
from starlette.concurrency import run_in_threadpool
from typing import List, Union

from app.core.config import Settings, settings
from app.models.models import DesignMatrix, ResponseVector
from app.utils.io_utils import build_regression, frame_from_columns, resolve_response
from app.api.v1.schemas import (
    AutocovReport, AutocovRequest, DiagnoseRequest, DiagnosticsSchema, ErrorResponse, FitReport,
    HypothesisTestRequest, JointTestSchema, MonteCarloRow, RegressionRequest, SimulateRequest,
    UnivariateTestSchema
)
from app.api.v1.services.diagnostics_service import DiagnosticsService
from app.api.v1.services.regression_service import RegressionService
from app.api.v1.services.simulation_service import SimulationService


router = APIRouter()

ERROR_RESPONSES = {
    400: {"model": ErrorResponse, "description": "Вырожденный план или непригодная оценка C_n"},
    422: {"model": ErrorResponse, "description": "Некорректные данные"},
}


def get_settings() -> Settings:
    return settings


def regression_data(request: RegressionRequest):
    frame = frame_from_columns(request.columns)
    return build_regression(frame, request.response, request.add_intercept)


@router.post(
    "/fit",
    response_model=FitReport,
    responses=ERROR_RESPONSES,
    summary="Оценка МНК",
    description="β̂, нормы столбцов, оценка C_n и тесты T_{j,n} для всех коэффициентов"
)
async def fit(request: RegressionRequest, settings: Settings = Depends(get_settings)):
    X, Y = regression_data(request)
    service = RegressionService(settings)
    report, _ = await run_in_threadpool(service.fit_report, X, Y, request.kernel, request.bandwidth)
    return report


@router.post(
    "/test",
    response_model=Union[UnivariateTestSchema, JointTestSchema],
    responses=ERROR_RESPONSES,
    summary="Проверка гипотезы β_j = 0",
    description="Один индекс: тест T_{j,n}; несколько: совместный тест Ξ"
)
async def hypothesis_test(request: HypothesisTestRequest, settings: Settings = Depends(get_settings)):
    X, Y = regression_data(request)
    service = RegressionService(settings)
    return await run_in_threadpool(
        service.run_test, X, Y, request.indices, request.kernel, request.bandwidth
    )


@router.post(
    "/autocov",
    response_model=AutocovReport,
    responses=ERROR_RESPONSES,
    summary="Автоковариации остатков",
    description="Данные для графика автоковариаций и предложенная ширина окна"
)
async def autocov(request: AutocovRequest, settings: Settings = Depends(get_settings)):
    service = RegressionService(settings)
    if request.raw:
        frame = frame_from_columns(request.columns)
        X = None
        Y = ResponseVector(frame[resolve_response(frame, request.response)].to_numpy(dtype=float))
    else:
        X, Y = regression_data(request)
    report, _ = await run_in_threadpool(
        service.autocov_report, X, Y, request.kernel, request.max_lag, request.raw
    )
    return report


@router.post(
    "/diagnose",
    response_model=DiagnosticsSchema,
    responses=ERROR_RESPONSES,
    summary="Диагностика плана",
    description="Нормы столбцов, отношения Линдеберга, ρ̂_{j,l}(k) и λ_min(R̂(0))"
)
async def diagnose(request: DiagnoseRequest, settings: Settings = Depends(get_settings)):
    frame = frame_from_columns(request.columns)
    if request.response:
        frame = frame.drop(columns=[resolve_response(frame, request.response)])
    if request.add_intercept:
        frame.insert(0, "const", 1.0)
    X = DesignMatrix(frame.to_numpy(dtype=float), tuple(str(c) for c in frame.columns))
    return await run_in_threadpool(DiagnosticsService(settings).diagnose, X, request.max_lag)


@router.post(
    "/simulate",
    response_model=List[MonteCarloRow],
    responses=ERROR_RESPONSES,
    summary="Монте-Карло уровень и мощность",
    description="Доля отклонений гипотезы на моделях из симуляционного исследования"
)
async def simulate(request: SimulateRequest, settings: Settings = Depends(get_settings)):
    service = SimulationService(settings)
    results = await run_in_threadpool(
        service.run,
        request.model,
        request.beta,
        [request.n],
        request.kernel,
        request.bandwidth,
        request.replications,
        request.seed,
    )
    return service.to_rows(results)
