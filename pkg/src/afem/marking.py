"""
Doerfler (bulk) marking.
"""
import numpy as np

from src.fem.estimator import EstimatorReport


def dorfler_mark(report: EstimatorReport, theta: float) -> np.ndarray:
    """
    Minimal set M with sum_{T in M} eta_T^2 >= theta^2 sum_T eta_T^2.

    Indicators are sorted descending, ties by element id, and the shortest
    prefix reaching the bulk is taken.

    Args:
        report: Estimator indicators
        theta: Bulk parameter in (0, 1)

    Returns:
        Marked element ids
    """
    eta2 = report.indicators ** 2
    total = float(eta2.sum())
    if total == 0.0 or len(eta2) == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((report.partition, -eta2))
    cumulative = np.cumsum(eta2[order])
    count = int(np.searchsorted(cumulative, theta ** 2 * total, side="left")) + 1
    return report.partition[order[:min(count, len(order))]]
