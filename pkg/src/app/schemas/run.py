from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.app.config import get_settings
from src.app.schemas.funcspace import SchauderParams, WeightKind
from src.app.schemas.operators import GridSpec, OperatorKind
from src.app.schemas.quadrature import PVConfig


class Command(str, Enum):
    APPLY = "apply"
    CERTIFY = "certify"
    LIMIT_STUDY = "limit-study"
    CATALOG = "catalog"


_PV_KEYS = ("fold_radius", "truncation_radius", "base_panels", "max_refine_depth", "rel_tol", "abs_tol", "max_panels")


class RunConfig(BaseModel):
    """
    One resolved run: config file values with --set overrides merged on top.
    Unknown keys are rejected.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    function: str = "const1"
    operator: OperatorKind = OperatorKind.I_LAMBDA
    lam: float = Field(default=100.0, gt=0)
    lambda_list: tuple[float, ...] | None = None
    y_grid: tuple[float, ...] | None = None
    claim: str | None = None
    weight_kind: WeightKind = WeightKind.POLYNOMIAL
    m: int | None = None
    kappa: float | None = None
    alpha: float = 0.5
    output: Path | None = None
    seed: int = Field(default_factory=lambda: get_settings().DEFAULT_SEED)

    # PV overrides
    fold_radius: float | None = None
    truncation_radius: float | None = None
    base_panels: int | None = None
    max_refine_depth: int | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    max_panels: int | None = None

    @field_validator("lambda_list", "y_grid", mode="before")
    @classmethod
    def split_list(cls, v):
        if isinstance(v, str):
            v = [item for item in v.replace(";", ",").split(",") if item.strip()]
            return tuple(float(item) for item in v)
        return v

    @field_validator("lambda_list", "y_grid")
    @classmethod
    def sort_list(cls, v):
        return None if v is None else tuple(sorted(v))

    @field_validator("claim", "output", "m", "kappa", mode="before")
    @classmethod
    def blank_is_none(cls, v):
        if isinstance(v, str) and not v.strip():
            return None
        return v

    def pv_config(self) -> PVConfig:
        return PVConfig.from_settings(**{key: getattr(self, key) for key in _PV_KEYS})

    def grid(self) -> GridSpec:
        default = GridSpec.default()
        return GridSpec(
            y_grid=self.y_grid if self.y_grid is not None else default.y_grid,
            lambda_list=self.lambda_list if self.lambda_list is not None else default.lambda_list,
        )

    def schauder_params(self, fallback: SchauderParams) -> SchauderParams:
        return SchauderParams(
            weight_kind=self.weight_kind,
            m=fallback.m if self.m is None else self.m,
            kappa=fallback.kappa if self.kappa is None else self.kappa,
            alpha=self.alpha,
        )

    def header(self) -> dict:
        """The resolved config as embedded in artifact headers."""
        return self.model_dump(mode="json")
