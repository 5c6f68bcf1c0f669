import logging
from contextlib import asynccontextmanager
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import RedirectResponse, JSONResponse
import uvicorn
from app.api.v1.routes import router as api_router
from app.core.config import settings
from app.core.exceptions import EstimationError
from app.core.logging import configure_logging


logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Управление жизненным циклом приложения"""
    configure_logging()
    logger.info("%s v%s запущен", settings.project_name, settings.project_version)

    yield

    logger.info("Завершение работы")


app = FastAPI(
    title=settings.project_name,
    description=f"""
    {settings.project_description}

    * **fit** - оценка МНК, матрица C_n и тесты для всех коэффициентов
    * **test** - тест T_{{j,n}} или совместный тест Ξ по набору коэффициентов
    * **autocov** - автоковариации остатков и предложенная ширина окна
    * **diagnose** - проверка условий на план
    * **simulate** - Монте-Карло оценка уровня и мощности

    Номера коэффициентов считаются с нуля: β_0 соответствует первому столбцу плана.
    """,
    version=settings.project_version,
    debug=settings.debug,
    license_info={
        "name": "MIT",
    },
    lifespan=lifespan
)


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


app.include_router(
    api_router,
    prefix=settings.api_v1_prefix,
    tags=["API v1"]
)


@app.get("/", include_in_schema=False)
async def root():
    """Перенаправление на документацию API"""
    return RedirectResponse(url="/docs")


@app.get("/health", tags=["Health"])
async def health_check():
    """Проверка состояния API"""
    return {
        "status": "healthy",
        "message": f"{settings.project_name} is running",
        "version": settings.project_version
    }


@app.exception_handler(EstimationError)
async def estimation_error_handler(request: Request, exc: EstimationError):
    """Ошибки оценивания: класс ошибки, сообщение и совет"""
    logger.info("%s: %s", type(exc).__name__, exc)
    content = {"detail": exc.message, "error": type(exc).__name__, "status_code": exc.status_code}
    if exc.advice:
        content["advice"] = exc.advice
    return JSONResponse(status_code=exc.status_code, content=content)


@app.exception_handler(404)
async def not_found_handler(request: Request, exc: Exception):
    """Обработчик ошибки 404"""
    return JSONResponse(
        status_code=404,
        content={
            "detail": "Endpoint not found",
            "path": str(request.url.path)
        }
    )


def serve() -> None:
    """Запуск uvicorn с адресом из настроек DEPLM_HOST / DEPLM_PORT"""
    debug = settings.debug

    uvicorn.run(
        "app.main:app",
        host=settings.host,
        port=settings.port,
        reload=debug,
        access_log=True,
        log_level="info" if not debug else "debug"
    )


if __name__ == "__main__":
    serve()
