from typing import Optional, Tuple

from app.core.config import Settings
from app.estimation.diagnostics import design_diagnostics, prefix_sizes, rho_stability
from app.models.models import DesignMatrix
from app.api.v1.schemas import DiagnosticsSchema, RhoStabilitySchema


class DiagnosticsService:
    """Сервис диагностики условий на план"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def diagnose(self, X: DesignMatrix, max_lag: int) -> DiagnosticsSchema:
        """Диагностика плана с порогами из настроек"""
        result = design_diagnostics(
            X,
            min(max_lag, X.n - 1),
            lindeberg_warning_ratio=self.settings.lindeberg_warning_ratio,
            r0_eigenvalue_warning=self.settings.r0_eigenvalue_warning,
        )
        return DiagnosticsSchema(
            columns=list(X.column_names),
            d_values=result.d_values.tolist(),
            lindeberg_ratios=result.lindeberg_ratios.tolist(),
            rho_hat=result.rho_hat.tolist(),
            r0_min_eigenvalue=result.r0_min_eigenvalue,
            warnings=result.warnings,
        )

    def stability(
        self,
        X: DesignMatrix,
        rho: Optional[Tuple[int, int, int]],
        splits: int,
    ) -> RhoStabilitySchema:
        """ρ̂_{j,l}(k) на вложенных префиксах; по умолчанию (0, 0, 1)"""
        j, l, k = rho or (0, 0, min(1, X.n - 1))
        values = rho_stability(X, j, l, k, splits)
        return RhoStabilitySchema(prefix_n=prefix_sizes(X.n, splits).tolist(), values=values.tolist())
