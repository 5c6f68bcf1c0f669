import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.config import Settings
from app.core.exceptions import NotPositiveDefinite
from app.estimation.covariance import covariance_estimate
from app.estimation.inference import joint_test, t_test
from app.estimation.kernels import (
    MIN_BANDWIDTH_OBSERVATIONS, autocovariance, check_bandwidth_rate, get_kernel,
    make_bandwidth, suggest_bandwidth
)
from app.estimation.ols import fit_ols
from app.models.models import (
    AutocovSequence, AutocovSource, Bandwidth, CovarianceEstimate, DesignMatrix,
    RegressionFit, ResponseVector, TaperKernel
)
from app.api.v1.schemas import (
    AutocovReport, BandwidthRateSchema, BandwidthSchema, CoefficientSchema, CovarianceSidecar,
    FitReport, JointTestSchema, UnivariateTestSchema
)


logger = logging.getLogger(__name__)


class RegressionService:
    """Сервис МНК-оценивания со скорректированными тестами"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def _autocov(self, series: np.ndarray, max_lag: int, source=AutocovSource.RESIDUALS) -> AutocovSequence:
        return autocovariance(series, min(max_lag, series.shape[0] - 1), source=source)

    def resolve_bandwidth(
        self,
        residuals: np.ndarray,
        kernel: TaperKernel,
        bandwidth: Union[float, str],
    ) -> Bandwidth:
        """
        Ширина окна: явное значение или автоматический выбор по остаткам.

        На коротких рядах (меньше 30 наблюдений) автоматический выбор
        заменяется окном h = 1, оставляющим только лаг 0.
        """
        if bandwidth != "auto":
            return make_bandwidth(float(bandwidth), kernel, residuals.shape[0])
        return self._suggest(self._autocov(residuals, self.settings.default_max_lag), kernel)

    def _suggest(self, acov: AutocovSequence, kernel: TaperKernel) -> Bandwidth:
        if acov.n < MIN_BANDWIDTH_OBSERVATIONS and acov.values[0] > 0:
            logger.warning("n=%d слишком мало для выбора окна, используется h=1", acov.n)
            return make_bandwidth(1.0, kernel, acov.n)
        return suggest_bandwidth(acov, kernel, self.settings.band_rule)

    def estimate(
        self,
        X: DesignMatrix,
        Y: ResponseVector,
        kernel_id: str,
        bandwidth: Union[float, str],
    ) -> Tuple[RegressionFit, CovarianceEstimate]:
        """МНК и оценка C_n"""
        kernel = get_kernel(kernel_id)
        fit = fit_ols(X, Y)
        h = self.resolve_bandwidth(fit.residuals, kernel, bandwidth)
        return fit, covariance_estimate(fit, X, kernel, h)

    def fit_report(
        self,
        X: DesignMatrix,
        Y: ResponseVector,
        kernel_id: str,
        bandwidth: Union[float, str],
    ) -> Tuple[FitReport, CovarianceEstimate]:
        """
        β̂, d_j(n), C_n и тесты T_{j,n} для всех коэффициентов.

        Raises:
            NotPositiveDefinite: Если C_n не положительно определена
            NonPositiveVariance: Если какая-то дисперсия c_n(j,j) ≤ 0
        """
        fit, est = self.estimate(X, Y, kernel_id, bandwidth)
        if not est.psd:
            raise NotPositiveDefinite(
                f"C_n не положительно определена: λ_min = {est.min_eigenvalue:.3e}",
                eigenvalue=est.min_eigenvalue,
            )

        coefficients: List[CoefficientSchema] = []
        for j in range(fit.p):
            test = t_test(fit, est, j)
            coefficients.append(
                CoefficientSchema(
                    index=j,
                    name=X.column_names[j],
                    beta_hat=float(fit.beta_hat[j]),
                    d=float(fit.scaling.diag[j]),
                    statistic=test.statistic,
                    p_value=test.p_value,
                    reject_at_5pct=test.reject_at_5pct,
                )
            )

        rate = check_bandwidth_rate(est.bandwidth, fit.n)
        report = FitReport(
            n=fit.n,
            p=fit.p,
            coefficients=coefficients,
            covariance=est.matrix.tolist(),
            bandwidth=BandwidthSchema(h=est.bandwidth.h, kept_lags=est.bandwidth.kept_lags),
            kernel=est.kernel_id.value,
            psd=est.psd,
            bandwidth_rate=BandwidthRateSchema(ratio=rate.ratio, warning=rate.warning),
        )
        return report, est

    def run_test(
        self,
        X: DesignMatrix,
        Y: ResponseVector,
        indices: Sequence[int],
        kernel_id: str,
        bandwidth: Union[float, str],
    ) -> Union[UnivariateTestSchema, JointTestSchema]:
        """Один индекс: тест T_{j,n}; несколько: совместный тест Ξ"""
        fit, est = self.estimate(X, Y, kernel_id, bandwidth)
        common = dict(bandwidth=est.bandwidth.h, kernel=est.kernel_id.value)

        if len(indices) == 1:
            test = t_test(fit, est, indices[0])
            return UnivariateTestSchema(
                index=test.coefficient_index,
                name=X.column_names[test.coefficient_index],
                statistic=test.statistic,
                p_value=test.p_value,
                reject_at_5pct=test.reject_at_5pct,
                **common,
            )

        joint = joint_test(fit, est, indices)
        return JointTestSchema(
            indices=list(joint.indices),
            statistic=joint.statistic,
            dof=joint.degrees,
            p_value=joint.p_value,
            reject_at_5pct=joint.reject_at_5pct,
            components=joint.components.tolist(),
            **common,
        )

    def autocov_report(
        self,
        X: Optional[DesignMatrix],
        Y: ResponseVector,
        kernel_id: str,
        max_lag: int,
        raw: bool = False,
    ) -> Tuple[AutocovReport, AutocovSequence]:
        """
        Автоковариации остатков (или самого ряда при raw) и предложенное окно.

        Raises:
            DegenerateSeries: Если γ̂*_0 = 0
        """
        kernel = get_kernel(kernel_id)
        if raw:
            series, source = Y.values, AutocovSource.ERRORS
        else:
            series, source = fit_ols(X, Y).residuals, AutocovSource.RESIDUALS

        acov = self._autocov(series, max_lag, source)
        suggested = self._suggest(acov, kernel)
        report = AutocovReport(
            lags=list(range(acov.max_lag + 1)),
            acov=acov.values.tolist(),
            n=acov.n,
            suggested_h=suggested.h,
            kept_lags=suggested.kept_lags,
        )
        return report, acov

    @staticmethod
    def covariance_sidecar(est: CovarianceEstimate) -> CovarianceSidecar:
        return CovarianceSidecar(
            bandwidth=est.bandwidth.h,
            kept_lags=est.bandwidth.kept_lags,
            kernel=est.kernel_id.value,
            psd=est.psd,
            min_eigenvalue=est.min_eigenvalue,
            n=est.n,
            p=est.p,
        )
