import numpy as np
import pytest
from scipy import linalg

from app.estimation.kernels import get_kernel
from app.models.models import DesignMatrix, RegressionFit


def dense_covariance(X: DesignMatrix, fit: RegressionFit, kernel_id: str, h: float) -> np.ndarray:
    """
    D(n)(X^tX)^{-1} X^t Γ̂* X (X^tX)^{-1} D(n) с явной тёплицевой матрицей n×n.
    """
    n = X.n
    kernel = get_kernel(kernel_id)
    lags = np.arange(n)
    gamma = np.array([fit.residuals[: n - k] @ fit.residuals[k:] for k in lags]) / n
    tapered = linalg.toeplitz(kernel.evaluate(lags / h) * gamma)
    x = X.entries
    bread = linalg.inv(x.T @ x)
    d = np.diag(fit.scaling.diag)
    return d @ bread @ x.T @ tapered @ x @ bread @ d


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_csv(tmp_path):
    """Пишет CSV-фикстуру и возвращает путь"""

    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def mean_fixture(write_csv):
    return write_csv("mean.csv", "y\n1\n2\n3\n")


@pytest.fixture
def regression_fixture(write_csv, rng):
    n = 60
    x = rng.normal(size=n)
    y = 1.0 + 2.0 * x + rng.normal(size=n)
    rows = "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(y, x))
    return write_csv("regression.csv", f"y,x\n{rows}\n")
