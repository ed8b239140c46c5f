import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.app.config import get_settings
from src.app.schemas.funcspace import TestFunction
from src.app.schemas.quadrature import PVConfig


class OperatorKind(str, Enum):
    H = "H"
    I = "I"
    I_LAMBDA = "I_lambda"


class GridSpec(BaseModel):
    """
    Evaluation points in y plus the λ sweep. Both are stored sorted.
    """
    model_config = ConfigDict(frozen=True)

    y_grid: tuple[float, ...]
    lambda_list: tuple[float, ...] = ()

    @field_validator("y_grid", "lambda_list")
    @classmethod
    def check_finite_sorted(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("grid values must be finite")
        if list(v) != sorted(v):
            raise ValueError("grid values must be sorted ascending")
        return v

    @field_validator("lambda_list")
    @classmethod
    def check_positive(cls, v):
        if any(lam <= 0 for lam in v):
            raise ValueError("every λ must be positive")
        return v

    @classmethod
    def default(cls) -> "GridSpec":
        settings = get_settings()
        y = np.logspace(np.log10(settings.Y_GRID_MIN), np.log10(settings.Y_GRID_MAX), settings.Y_GRID_POINTS)
        return cls(y_grid=tuple(float(v) for v in y), lambda_list=tuple(sorted(settings.LAMBDA_SWEEP)))


class OperatorRequest(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    operator_kind: OperatorKind
    function: TestFunction
    grid: GridSpec
    cfg: PVConfig = Field(default_factory=PVConfig.from_settings)
    lam: float | None = None

    @model_validator(mode="after")
    def check_lambda(self):
        if self.operator_kind == OperatorKind.I_LAMBDA and (self.lam is None or self.lam <= 0):
            raise ValueError(f"I_lambda needs λ > 0, got {self.lam}")
        return self


class OperatorRow(BaseModel):
    y: float
    value: float
    error_estimate: float
    truncation_bound: float
