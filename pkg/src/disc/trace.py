"""
DISC trace: one record per outer iteration.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

TRACE_COLUMNS = [
    "k", "eps_k", "dofs_rhs", "dofs_coeff", "dofs_pde",
    "Nf", "NA", "Nu", "eta", "energy_error", "seconds",
]


class TraceRow(BaseModel):
    """Outer iteration k of DISC."""
    k: int
    eps_k: float
    dofs_rhs: int
    dofs_coeff: int
    dofs_pde: int
    Nf: int
    NA: int
    Nu: int
    eta: float
    energy_error: Optional[float] = None
    seconds: float = 0.0

    # Diagnostics
    elements: int = 0
    oscillation: float = 0.0
    coeff_error: float = 0.0
    r_hat: float = 0.0
    M_hat: float = 0.0
    inner_iterations: int = 0
    eta_entry: float = 0.0
    contraction: Optional[float] = None
    closure_overhead: float = 0.0
    galerkin_residual: float = 0.0      # worst solve of the inner loop


@dataclass
class DiscTrace:
    """Trace of a DISC run plus its final discrete state."""
    rows: list[TraceRow] = field(default_factory=list)
    stop_reason: str = "running"
    final: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self, diagnostics: bool = False) -> pd.DataFrame:
        frame = pd.DataFrame([row.model_dump() for row in self.rows])
        if frame.empty:
            frame = pd.DataFrame(columns=list(TraceRow.model_fields))
        return frame if diagnostics else frame[TRACE_COLUMNS]

    def write_csv(self, path: Union[str, Path], diagnostics: bool = False) -> Path:
        path = Path(path)
        self.to_frame(diagnostics).to_csv(path, index=False)
        return path

    def points(self, error_column: str = "energy_error") -> tuple[np.ndarray, np.ndarray]:
        """(dofs, error) pairs with a positive error, for EOC fits."""
        frame = self.to_frame(diagnostics=True)
        if frame.empty:
            return np.zeros(0), np.zeros(0)
        errors = pd.to_numeric(frame[error_column], errors="coerce").to_numpy(dtype=float)
        dofs = frame["dofs_pde"].to_numpy(dtype=float)
        valid = np.isfinite(errors) & (errors > 0)
        return dofs[valid], errors[valid]


def read_trace(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path)
