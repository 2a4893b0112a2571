"""
GREEDY adaptive approximation on the bisection forest.

Repeatedly bisects the element with the largest local error until the
global error (sum_T E(T)^q)^{1/q} (max_T E(T) for q = inf) is at most the
tolerance, then applies the conforming closure.
"""
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import structlog

from config.settings import settings
from src.core.errors import ApproximationError, GreedyNonConvergenceError
from src.mesh.forest import MeshForest

logger = structlog.get_logger()

# corners (m, 3, 2) -> (errors (m,), vertex values (m, 3, c))
LocalErrorFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class GreedyResult:
    """Closed partition, approximant and bookkeeping of one GREEDY run."""
    partition: np.ndarray
    values: np.ndarray              # (m, 3, c) approximant vertex values
    local_errors: np.ndarray        # (m,) on the closed partition
    error: float                    # global error on the closed partition
    marked: int                     # GREEDY bisections, closure excluded
    history: list[float] = field(default_factory=list)


def aggregate(errors: np.ndarray, q: float) -> float:
    """(sum E^q)^{1/q}, or max E for q = inf."""
    if len(errors) == 0:
        return 0.0
    if np.isinf(q):
        return float(np.max(errors))
    return math.fsum(float(e) ** q for e in errors) ** (1.0 / q)


class _ErrorCache:
    """Local errors keyed by element id; forest elements never change shape."""

    def __init__(self, forest: MeshForest, local_error: LocalErrorFn):
        self.forest = forest
        self.local_error = local_error
        self.errors: dict[int, float] = {}
        self.values: dict[int, np.ndarray] = {}

    def evaluate(self, ids) -> np.ndarray:
        ids = [int(e) for e in ids]
        missing = [e for e in ids if e not in self.errors]
        if missing:
            errors, values = self.local_error(self.forest.element_coords(missing))
            for eid, err, val in zip(missing, errors, values):
                self.errors[eid] = float(err)
                self.values[eid] = val
        return np.array([self.errors[e] for e in ids])

    def approximant(self, ids) -> np.ndarray:
        return np.stack([self.values[int(e)] for e in ids])


def greedy(
    forest: MeshForest,
    local_error: LocalErrorFn,
    eps: float,
    q: float,
    max_elements: Optional[int] = None,
    record_history: bool = False,
    name: str = "greedy"
) -> GreedyResult:
    """
    Run GREEDY from the forest's current partition.

    Args:
        forest: Mesh forest, refined in place
        local_error: Batched local error evaluator
        eps: Target tolerance (> 0)
        q: Aggregation exponent in [2, inf]
        max_elements: Element cap (default: DISC_GREEDY_MAX_ELEMENTS)
        record_history: Keep the global error after every bisection
        name: Label used in log lines

    Returns:
        GreedyResult on the closed partition

    Raises:
        GreedyNonConvergenceError: element cap reached above tolerance
    """
    if not eps > 0:
        raise ApproximationError(f"GREEDY needs a positive tolerance, got {eps}", {"eps": eps})
    max_elements = settings.greedy_max_elements if max_elements is None else max_elements
    log = logger.bind(routine=name, q=q, eps=eps)

    cache = _ErrorCache(forest, local_error)
    start = forest.active_elements()
    errors = cache.evaluate(start)
    heap = [(-err, forest.label(int(eid)), int(eid)) for eid, err in zip(start, errors)]
    heapq.heapify(heap)

    finite = not np.isinf(q)
    power_sum = math.fsum(float(e) ** q for e in errors) if finite else 0.0
    target = eps ** q if finite else eps

    def current() -> float:
        if finite:
            return max(power_sum, 0.0) ** (1.0 / q)
        return -heap[0][0] if heap else 0.0

    history = [current()] if record_history else []
    floor = current()
    marked = 0

    while True:
        if finite and power_sum <= target:
            # Exact re-summation before accepting
            power_sum = math.fsum((-key) ** q for key, _, _ in heap)
            if power_sum <= target:
                break
        elif not finite and current() <= target:
            break

        if forest.n_active >= max_elements:
            error = current()
            log.warning("GREEDY element cap reached", elements=forest.n_active, error=error, floor=floor)
            raise GreedyNonConvergenceError(
                f"{name} did not reach eps={eps:g} within {max_elements} elements",
                error=error,
                elements=forest.n_active,
                floor=floor,
                tolerance=eps,
            )

        neg_error, _, eid = heapq.heappop(heap)
        c1, c2 = forest.bisect(eid)
        marked += 1
        child_errors = cache.evaluate([c1, c2])
        for child, err in zip((c1, c2), child_errors):
            heapq.heappush(heap, (-float(err), forest.label(child), child))
        if finite:
            power_sum += float(child_errors[0]) ** q + float(child_errors[1]) ** q - (-neg_error) ** q

        floor = min(floor, current())
        if record_history:
            history.append(current())

    forest.conforming_closure()
    partition = forest.active_elements().copy()
    local = cache.evaluate(partition)
    result = GreedyResult(
        partition=partition,
        values=cache.approximant(partition),
        local_errors=local,
        error=aggregate(local, q),
        marked=marked,
        history=history,
    )
    log.info("GREEDY finished", marked=marked, elements=len(partition), error=result.error)
    return result
