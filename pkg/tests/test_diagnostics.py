import numpy as np
import pytest

from app.core.config import Settings
from app.core.exceptions import InvalidConfig, LagOutOfRange, ZeroColumn
from app.estimation.diagnostics import (
    LINDEBERG_WARNING_RATIO, R0_EIGENVALUE_WARNING, design_diagnostics, prefix_sizes, rho_stability
)
from app.estimation.simulation import simulate_design
from app.models.models import DesignMatrix, ModelId, ModelSpec


def test_trend_column_dominated_by_last_point():
    X = DesignMatrix(np.array([[1.0], [2.0], [3.0]]), ("trend",))

    result = design_diagnostics(X, 2)

    np.testing.assert_allclose(result.d_values, [np.sqrt(14.0)])
    assert result.lindeberg_ratios[0] == pytest.approx(0.8018, abs=1e-4)
    assert any("trend" in message for message in result.warnings)


def test_constant_column_has_no_warning():
    result = design_diagnostics(DesignMatrix(np.ones((100, 1))), 3)

    assert result.lindeberg_ratios[0] == pytest.approx(0.1)
    assert result.warnings == []


def test_orthogonal_columns_give_identity_r0():
    X = DesignMatrix(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]))

    result = design_diagnostics(X, 1)

    assert result.r0_min_eigenvalue == pytest.approx(1.0)
    assert result.rho(0, 1, 1) == pytest.approx(1.0)
    assert result.rho(1, 0, 1) == pytest.approx(0.5)


def test_near_collinear_design_warns():
    x = np.arange(1.0, 101.0)
    X = DesignMatrix(np.column_stack([x, x + 1e-7 * np.sin(x)]))

    result = design_diagnostics(X, 2)

    assert result.r0_min_eigenvalue < 1e-10
    assert any("R̂(0)" in message for message in result.warnings)


def test_rho_hat_bounds(rng):
    X = DesignMatrix(rng.normal(size=(60, 3)))

    result = design_diagnostics(X, 10)

    assert result.rho_hat.shape == (11, 3, 3)
    np.testing.assert_array_equal(np.diagonal(result.rho_hat[0]), np.ones(3))
    assert np.all(np.abs(result.rho_hat) <= 1.0 + 1e-12)


def test_design_diagnostics_errors():
    with pytest.raises(LagOutOfRange):
        design_diagnostics(DesignMatrix(np.ones((3, 1))), 3)
    with pytest.raises(ZeroColumn):
        design_diagnostics(DesignMatrix(np.column_stack([np.ones(3), np.zeros(3)])), 1)


def test_model1_design_passes_diagnostics():
    spec = ModelSpec(ModelId.MODEL1, (3.0, 0.0), 1000)
    X = simulate_design(spec, np.random.default_rng(3))

    result = design_diagnostics(X, 5)

    assert result.warnings == []


def test_prefix_sizes():
    np.testing.assert_array_equal(prefix_sizes(1000, 4), [250, 500, 750, 1000])


def test_rho_stability_constant_column():
    values = rho_stability(DesignMatrix(np.ones((8, 1))), 0, 0, 1, 4)

    np.testing.assert_allclose(values, [1 / 2, 3 / 4, 5 / 6, 7 / 8])


def test_rho_stability_alternating_column():
    column = np.where(np.arange(1000) % 2 == 0, 1.0, -1.0)

    values = rho_stability(DesignMatrix(column[:, None]), 0, 0, 1, 4)

    assert np.all(values < -0.99)


def test_rho_stability_lag_zero_is_exactly_one(rng):
    values = rho_stability(DesignMatrix(rng.normal(size=(90, 2))), 1, 1, 0, 3)

    np.testing.assert_array_equal(values, np.ones(3))


def test_rho_stability_errors():
    X = DesignMatrix(np.ones((8, 2)))

    with pytest.raises(InvalidConfig):
        rho_stability(X, 0, 0, 1, 1)
    with pytest.raises(InvalidConfig):
        rho_stability(X, 0, 2, 1, 4)
    with pytest.raises(LagOutOfRange):
        rho_stability(X, 0, 1, 2, 4)


def test_settings_thresholds_default_to_diagnostics_constants(monkeypatch):
    monkeypatch.delenv("DEPLM_LINDEBERG_WARNING_RATIO", raising=False)
    monkeypatch.delenv("DEPLM_R0_EIGENVALUE_WARNING", raising=False)

    defaults = Settings(_env_file=None)

    assert defaults.lindeberg_warning_ratio == LINDEBERG_WARNING_RATIO
    assert defaults.r0_eigenvalue_warning == R0_EIGENVALUE_WARNING
