"""Evaluation metrics for simulated vs observed volume series.

Six metrics with the hydrology benchmark verdicts: a model is judged
satisfactory when MAPE < 6 %, RSR < 0.7, R^2 > 0.7 and |PBIAS| <= 25 %.
RSR uses the population standard deviation of the observations; PBIAS is
100 * sum(obs - sim) / sum(obs), so over-prediction gives negative bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PipelineError

MAPE_THRESHOLD = 6.0
RSR_THRESHOLD = 0.7
R2_THRESHOLD = 0.7
PBIAS_THRESHOLD = 25.0


@dataclass(frozen=True)
class MetricsReport:
    n: int
    mae: float
    rmse: float
    mape: float
    rsr: float
    r2: float
    pbias: float

    def csv_row(self) -> str:
        """Serialize in the fixed column order n, MAE, RMSE, MAPE, RSR, R2, PBIAS."""
        return ",".join(
            [str(self.n)]
            + [repr(float(v)) for v in
               (self.mae, self.rmse, self.mape, self.rsr, self.r2, self.pbias)]
        )

    @staticmethod
    def csv_header() -> str:
        return "n,mae,rmse,mape,rsr,r2,pbias"


def mae(obs: np.ndarray, sim: np.ndarray) -> float:
    """Mean absolute error."""
    return float(np.mean(np.abs(obs - sim)))


def rmse(obs: np.ndarray, sim: np.ndarray) -> float:
    """Root mean square error."""
    return float(np.sqrt(np.mean((obs - sim) ** 2)))


def mape(obs: np.ndarray, sim: np.ndarray) -> float:
    """Mean absolute percentage error (percent)."""
    if (obs == 0).any():
        raise PipelineError("MAPE undefined: observations contain zero")
    return float(100.0 * np.mean(np.abs(obs - sim) / np.abs(obs)))


def rsr(obs: np.ndarray, sim: np.ndarray) -> float:
    """RMSE normalized by the population SD of the observations."""
    sd = float(np.std(obs))
    if sd == 0:
        raise PipelineError("RSR undefined: observations have zero variance")
    return rmse(obs, sim) / sd


def r_squared(obs: np.ndarray, sim: np.ndarray) -> float:
    """Coefficient of determination, 1 - SSE / SST."""
    sst = float(np.sum((obs - obs.mean()) ** 2))
    if sst == 0:
        raise PipelineError("R^2 undefined: observations have zero variance")
    return 1.0 - float(np.sum((obs - sim) ** 2)) / sst


def pbias(obs: np.ndarray, sim: np.ndarray) -> float:
    """Percent bias, 100 * sum(obs - sim) / sum(obs)."""
    denom = float(np.sum(obs))
    if denom == 0:
        raise PipelineError("PBIAS undefined: observations sum to zero")
    return 100.0 * float(np.sum(obs - sim)) / denom


def compute_metrics(obs, sim) -> MetricsReport:
    """All six metrics for a prediction series against observations."""
    o = np.asarray(obs, dtype=np.float64).ravel()
    s = np.asarray(sim, dtype=np.float64).ravel()
    if o.shape != s.shape:
        raise PipelineError(f"length mismatch: obs {o.size} vs sim {s.size}")
    if o.size < 2:
        raise PipelineError("metrics need n >= 2")
    if not (np.isfinite(o).all() and np.isfinite(s).all()):
        raise PipelineError("metrics require finite series")
    return MetricsReport(
        n=int(o.size),
        mae=mae(o, s),
        rmse=rmse(o, s),
        mape=mape(o, s),
        rsr=rsr(o, s),
        r2=r_squared(o, s),
        pbias=pbias(o, s),
    )


def judge(report: MetricsReport) -> dict:
    """Per-metric pass/fail against the benchmark thresholds (independent)."""
    return {
        "mape": report.mape < MAPE_THRESHOLD,
        "rsr": report.rsr < RSR_THRESHOLD,
        "r2": report.r2 > R2_THRESHOLD,
        "pbias": abs(report.pbias) <= PBIAS_THRESHOLD,
    }
