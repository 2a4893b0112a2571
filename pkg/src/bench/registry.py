"""
Benchmark registry.

Single source of the test cases the experiment runner knows about. To add a
benchmark, add its factory to cases.py and an entry here.
"""
from enum import Enum
from typing import Callable

from pydantic import BaseModel, ConfigDict

from src.bench.cases import TestCase, kellogg_case, lshaped_case, smooth_case
from src.core.errors import UnknownCaseError


class CaseStatus(str, Enum):
    """How far a benchmark is expected to reach at desk scale."""
    ASYMPTOTIC = "asymptotic"           # optimal rate visible within the dof budget
    PREASYMPTOTIC = "preasymptotic"     # rate still improving at the dof budget


class CaseEntry(BaseModel):
    """Registry entry for one benchmark."""
    id: str
    description: str
    status: CaseStatus
    factory: Callable[[], TestCase]
    singular: bool = False              # exact gradient is unbounded

    model_config = ConfigDict(arbitrary_types_allowed=True)


# =============================================================================
# CASE REGISTRY
# =============================================================================

CASES: dict[str, CaseEntry] = {
    "lshaped": CaseEntry(
        id="lshaped",
        description="L-shaped domain with a circular coefficient jump (1 inside, 5 outside)",
        status=CaseStatus.ASYMPTOTIC,
        factory=lshaped_case,
        singular=True,
    ),
    "kellogg": CaseEntry(
        id="kellogg",
        description="Checkerboard coefficient with the jump lines through the singularity",
        status=CaseStatus.PREASYMPTOTIC,
        factory=kellogg_case,
        singular=True,
    ),
    "smooth": CaseEntry(
        id="smooth",
        description="Laplacian on the unit square with a smooth solution",
        status=CaseStatus.ASYMPTOTIC,
        factory=smooth_case,
    ),
}


# =============================================================================
# HELPER FUNCTIONS
# =============================================================================

def case_names() -> list[str]:
    return list(CASES)


def get_case(name: str) -> TestCase:
    """
    Build a benchmark by name.

    Raises:
        UnknownCaseError: name is not registered
    """
    entry = CASES.get(name)
    if entry is None:
        raise UnknownCaseError(f"Unknown test case: {name}", {"name": name, "known": case_names()})
    return entry.factory()
