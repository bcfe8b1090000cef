"""Bidirectional ridge-regression bridges between pairwise embedding spaces.

Each direction is a square matrix B solving (X'X + lambda*I) B = X'Y,
applied with the row-vector convention y = x B. Fitting uses a Cholesky
factorization (the system is symmetric positive definite for lambda > 0)
with a pivoted fallback, and every successful fit is verified against
the normal equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .binio import Reader, Writer
from .errors import FormatError, SolverError, ValidationError

TEXT_TO_VISION = "text_to_vision"
VISION_TO_TEXT = "vision_to_text"
_DIRECTION_CODES = {TEXT_TO_VISION: 0, VISION_TO_TEXT: 1}
_DIRECTION_NAMES = {0: TEXT_TO_VISION, 1: VISION_TO_TEXT}

_MAGIC = b"LSEM"
_VERSION = 1

# Verified on every fit; quantified so tests can assert it directly.
NORMAL_EQ_TOLERANCE = 1e-8


@dataclass(frozen=True)
class LinearMap:
    direction: str
    dim: int
    matrix: np.ndarray
    lam: float
    source_encoder: str = ""
    target_encoder: str = ""

    def __post_init__(self) -> None:
        if self.direction not in _DIRECTION_CODES:
            raise ValidationError(f"unknown map direction {self.direction!r}")
        if self.matrix.shape != (self.dim, self.dim):
            raise ValidationError(
                f"matrix shape {self.matrix.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ValidationError("non-finite entries in map matrix")
        if self.lam < 0:
            raise ValidationError(f"negative lambda {self.lam}")


@dataclass(frozen=True)
class FitReport:
    n_samples: int
    train_residual: float
    normal_eq_residual: float


def _relative(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return num / den


def _validate_xy(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2:
        raise ValidationError(f"expected 2-D matrices, got shapes {X.shape} and {Y.shape}")
    if X.shape[0] != Y.shape[0]:
        raise ValidationError(f"row count mismatch: {X.shape[0]} vs {Y.shape[0]}")
    if X.shape[1] != Y.shape[1]:
        raise ValidationError(f"column count mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if X.shape[0] < 1:
        raise ValidationError("need at least one sample row")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(Y)):
        raise ValidationError("non-finite values in input matrices")
    return X, Y


def fit_ridge(
    X: np.ndarray,
    Y: np.ndarray,
    lam: float,
    direction: str = TEXT_TO_VISION,
    source_encoder: str = "",
    target_encoder: str = "",
) -> tuple[LinearMap, FitReport]:
    """Solve (X'X + lam*I) B = X'Y and package the result with diagnostics.

    Requires lam > 0 or full-column-rank X; raises SolverError otherwise,
    or when the solution fails the normal-equation residual check.
    """
    X, Y = _validate_xy(X, Y)
    if lam < 0:
        raise ValidationError(f"negative lambda {lam}")
    dim = X.shape[1]

    gram = X.T @ X
    rhs = X.T @ Y
    system = gram + lam * np.eye(dim)

    if lam == 0.0 and np.linalg.matrix_rank(X) < dim:
        raise SolverError(
            f"singular system: lambda is 0 and X has rank < {dim}; "
            "use a positive lambda"
        )
    try:
        factor = scipy.linalg.cho_factor(system, lower=True)
        beta = scipy.linalg.cho_solve(factor, rhs)
    except np.linalg.LinAlgError:
        # Not numerically SPD; pivoted LU still solves the square system.
        beta = scipy.linalg.solve(system, rhs)

    normal_eq_residual = _relative(
        float(np.linalg.norm(system @ beta - rhs)), float(np.linalg.norm(rhs))
    )
    if not normal_eq_residual <= NORMAL_EQ_TOLERANCE:
        raise SolverError(
            f"normal-equation residual {normal_eq_residual:.3e} exceeds "
            f"{NORMAL_EQ_TOLERANCE:.0e}; system too ill-conditioned"
        )
    train_residual = _relative(
        float(np.linalg.norm(Y - X @ beta)), float(np.linalg.norm(Y))
    )
    fitted = LinearMap(
        direction=direction,
        dim=dim,
        matrix=beta,
        lam=float(lam),
        source_encoder=source_encoder,
        target_encoder=target_encoder,
    )
    report = FitReport(
        n_samples=X.shape[0],
        train_residual=train_residual,
        normal_eq_residual=normal_eq_residual,
    )
    return fitted, report


def apply_map(linear_map: LinearMap, x: np.ndarray) -> np.ndarray:
    """Map a D-vector or an n-by-D matrix through y = x B."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != linear_map.dim:
        raise ValidationError(
            f"input shape {x.shape} incompatible with map dim {linear_map.dim}"
        )
    return x @ linear_map.matrix


def fit_bidirectional(
    X_text: np.ndarray,
    X_vision: np.ndarray,
    lam: float,
    text_encoder: str = "",
    vision_encoder: str = "",
) -> tuple[LinearMap, LinearMap, FitReport, FitReport]:
    """Fit both bridge directions over aligned text/vision sample rows."""
    t2v, t2v_report = fit_ridge(
        X_text, X_vision, lam,
        direction=TEXT_TO_VISION,
        source_encoder=text_encoder,
        target_encoder=vision_encoder,
    )
    v2t, v2t_report = fit_ridge(
        X_vision, X_text, lam,
        direction=VISION_TO_TEXT,
        source_encoder=vision_encoder,
        target_encoder=text_encoder,
    )
    return t2v, v2t, t2v_report, v2t_report


def save_map(linear_map: LinearMap, path: str | Path) -> None:
    writer = Writer()
    writer.raw(_MAGIC)
    writer.u32(_VERSION)
    writer.u8(_DIRECTION_CODES[linear_map.direction])
    writer.u32(linear_map.dim)
    writer.f64(linear_map.lam)
    writer.raw(np.ascontiguousarray(linear_map.matrix, dtype="<f8").tobytes())
    Path(path).write_bytes(writer.finish())


def load_map(path: str | Path) -> LinearMap:
    path = Path(path)
    reader = Reader(path.read_bytes(), path.name)
    reader.expect_magic(_MAGIC)
    version = reader.u32()
    if version != _VERSION:
        raise FormatError(f"{path.name}: unsupported version {version}")
    code = reader.u8()
    if code not in _DIRECTION_NAMES:
        raise FormatError(f"{path.name}: unknown direction code {code}")
    dim = reader.u32()
    lam = reader.f64()
    raw = reader.raw(8 * dim * dim)
    reader.expect_end()
    matrix = np.frombuffer(raw, dtype="<f8").reshape(dim, dim).copy()
    return LinearMap(direction=_DIRECTION_NAMES[code], dim=dim, matrix=matrix, lam=lam)
