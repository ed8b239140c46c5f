from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.app.config import get_settings


class PVConfig(BaseModel):
    """
    Quadrature control shared by the smooth integrator and the principal-value fold.
    """
    model_config = ConfigDict(frozen=True)

    fold_radius: float = Field(gt=0)
    truncation_radius: float = Field(gt=0)
    base_panels: int = Field(ge=4)
    max_refine_depth: int = Field(ge=1)
    rel_tol: float = Field(gt=0)
    abs_tol: float = Field(gt=0)
    max_panels: int = Field(default=20000, ge=16)

    @model_validator(mode="after")
    def check_radii(self):
        if not self.fold_radius < self.truncation_radius:
            raise ValueError(
                f"fold radius {self.fold_radius} must be below truncation radius {self.truncation_radius}"
            )
        return self

    @classmethod
    def from_settings(cls, **overrides) -> "PVConfig":
        settings = get_settings()
        values = {
            "fold_radius": settings.FOLD_RADIUS,
            "truncation_radius": settings.TRUNCATION_RADIUS,
            "base_panels": settings.BASE_PANELS,
            "max_refine_depth": settings.MAX_REFINE_DEPTH,
            "rel_tol": settings.REL_TOL,
            "abs_tol": settings.ABS_TOL,
            "max_panels": settings.MAX_PANELS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def refined(self, factor: int = 2) -> "PVConfig":
        """Doubles the panel density and tightens both tolerances by factor**4."""
        return self.model_copy(update={
            "base_panels": self.base_panels * factor,
            "rel_tol": self.rel_tol / factor**4,
            "abs_tol": self.abs_tol / factor**4,
            "max_panels": self.max_panels * factor,
        })

    def with_abs_tol(self, abs_tol: float) -> "PVConfig":
        return self.model_copy(update={"abs_tol": max(abs_tol, 1e-300)})


class QuadResult(BaseModel):
    value: float
    error_estimate: float = Field(ge=0)
    panels_used: int = 0
    truncation_bound: float = Field(default=0.0, ge=0)
    converged: bool = True

    @property
    def error_budget(self) -> float:
        return self.error_estimate + self.truncation_bound

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            value=self.value + other.value,
            error_estimate=self.error_estimate + other.error_estimate,
            panels_used=self.panels_used + other.panels_used,
            truncation_bound=self.truncation_bound + other.truncation_bound,
            converged=self.converged and other.converged,
        )

    def scaled(self, factor: float) -> "QuadResult":
        f = abs(factor)
        return QuadResult(
            value=factor * self.value,
            error_estimate=f * self.error_estimate,
            panels_used=self.panels_used,
            truncation_bound=f * self.truncation_bound,
            converged=self.converged,
        )
