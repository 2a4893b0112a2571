"""
Text dumps of solutions, indicators and piecewise polynomial fields.
"""
from pathlib import Path
from typing import Union

import numpy as np

from src.fem.estimator import EstimatorReport
from src.fem.fields import PwPolyMatrix, PwPolyScalar


def write_solution(path: Union[str, Path], U: np.ndarray, mesh_file: str = "mesh_final.txt") -> Path:
    """`dof_index value` pairs; the first line names the mesh the dofs belong to."""
    path = Path(path)
    lines = [f"# mesh {mesh_file}"] + [f"{i} {value!r}" for i, value in enumerate(map(float, U))]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_estimator(path: Union[str, Path], report: EstimatorReport) -> Path:
    """`element value` pairs in element-id order."""
    path = Path(path)
    lines = [f"{int(e)} {float(eta)!r}" for e, eta in zip(report.partition, report.indicators)]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_field(path: Union[str, Path], field: Union[PwPolyScalar, PwPolyMatrix]) -> Path:
    """
    Per-element vertex coefficients in element-id order.

    Scalar fields write 3 values per element, matrix fields 9
    (a11 a12 a22 at each vertex).
    """
    path = Path(path)
    flat = field.values.reshape(len(field.partition), -1)
    lines = [f"# degree {field.degree}"]
    lines += [f"{int(e)} " + " ".join(repr(float(v)) for v in row) for e, row in zip(field.partition, flat)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_solution(path: Union[str, Path]) -> np.ndarray:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line and not line.startswith("#")]
    values = np.empty(len(rows))
    for index, value in rows:
        values[int(index)] = float(value)
    return values
