from enum import Enum
from typing import Any, Callable, ClassVar

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.app.config import get_settings


class WeightKind(str, Enum):
    POLYNOMIAL = "polynomial"
    LOGARITHMIC = "logarithmic"


class SchauderParams(BaseModel):
    """
    Identifies Λ^α_(m,κ) (polynomial weight) or Λ^α_(log,κ) (logarithmic weight).
    `k` is the derivative order of the Λ^k_(m) classes used for the scaling limit.
    """
    model_config = ConfigDict(frozen=True)

    weight_kind: WeightKind = WeightKind.POLYNOMIAL
    m: int = 0
    kappa: float = 0.0
    alpha: float | None = 0.5
    k: int | None = None

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, v):
        if v is not None and not 0.0 < v < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {v}")
        return v

    @field_validator("k")
    @classmethod
    def check_k(cls, v):
        if v is not None and v < 0:
            raise ValueError(f"derivative order k must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def check_log_endpoint(self):
        # The log spaces only appear at the endpoints κ = -1 (H) and κ = 0 (I).
        if self.weight_kind == WeightKind.LOGARITHMIC and self.kappa not in (-1.0, 0.0):
            raise ValueError(f"logarithmic weight pairs only with kappa -1 or 0, got {self.kappa}")
        return self

    @property
    def is_log(self) -> bool:
        return self.weight_kind == WeightKind.LOGARITHMIC

    def describe(self) -> str:
        base = "log" if self.is_log else str(self.m)
        alpha = "" if self.alpha is None else f"^{self.alpha:g}"
        return f"Lambda{alpha}_({base},{self.kappa:g})"


class TestFunction(BaseModel):
    """
    A closed-form real function with optional derivative and antiderivative.

    `eval`, `deriv` and `antideriv` take and return numpy arrays (scalars work too).
    `growth_constant` is the C in |φ(x)| <= C (1+|x|)^m e^{κ|x|} for `claimed_class`.
    """
    __test__: ClassVar[bool] = False
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    eval: Callable[..., Any]
    deriv: Callable[..., Any] | None = None
    antideriv: Callable[..., Any] | None = None
    claimed_class: SchauderParams = SchauderParams()
    growth_constant: float = 1.0
    description: str = ""

    def __call__(self, x):
        return self.eval(x)


class WeightFunction(BaseModel):
    """
    w(x) = (1+|x|)^m e^{κ|x|}, or log(1+|x|) e^{κ|x|} for the logarithmic kind.
    """
    model_config = ConfigDict(frozen=True)

    params: SchauderParams

    def __call__(self, x):
        # Imported here so the schema module stays free of service imports at load time.
        from src.app.services.funcspace_service import weight_values
        return weight_values(self.params, x)


def _default_steps() -> tuple[float, ...]:
    return tuple(get_settings().HOLDER_STEPS)


class PairScheme(BaseModel):
    """
    Pair generator for the Hölder seminorm: each grid point is paired with x + h for
    every step h, with `n_far` seeded random far points, and with both window ends.
    """
    model_config = ConfigDict(frozen=True)

    n_points: int = Field(default_factory=lambda: get_settings().HOLDER_GRID_POINTS, ge=2)
    steps: tuple[float, ...] = Field(default_factory=_default_steps)
    n_far: int = Field(default_factory=lambda: get_settings().HOLDER_FAR_POINTS, ge=0)
    seed: int = Field(default_factory=lambda: get_settings().DEFAULT_SEED)

    @model_validator(mode="after")
    def check_scales(self):
        positive = sorted(h for h in self.steps if h > 0)
        if len(positive) != len(self.steps):
            raise ValueError("pair steps must be positive")
        if len(positive) >= 2 and positive[-1] / positive[0] < 8.0 and self.n_far == 0:
            raise ValueError("pair scheme must span several dyadic scales or include far pairs")
        return self
