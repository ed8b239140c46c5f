from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class CertificateSample(BaseModel):
    point: dict[str, float]
    lhs: float
    rhs: float
    ratio: float


class BoundCertificate(BaseModel):
    """
    Empirical certificate for one estimate: the measured constant is the largest
    lhs/rhs over the samples, and `passed` records the stability verdict.
    Serializes with the field name "pass".
    """
    model_config = ConfigDict(populate_by_name=True)

    claim_id: str
    rhs_form: str
    measured_constant: float
    passed: bool = Field(alias="pass")
    samples: list[CertificateSample] = []
    grid: dict[str, Any] = {}
    seed: int | None = None
    details: dict[str, Any] = {}

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True, mode="json")


class RateFit(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]
    lambdas: list[float] = []
    errors: list[float] = []
    budgets: list[float] = []
    scaled_errors: list[float] = []
    exact_zero: bool = False
    noise_dominated: bool = False
    uniform_bound: bool = True
    # max error at y = c/λ per λ, outside the fit
    diagnostic_errors: list[float] = []


class ABDecomposition(BaseModel):
    """The pieces of I_λφ(y): A1 + A0 is the inner region, B the tail."""
    A1: float
    A0: float
    B: float
    A: float
    error_estimate: float = 0.0

    @property
    def total(self) -> float:
        return self.A1 + self.A0 + self.B


class Lemma5Ratios(BaseModel):
    lhs_a: float
    rhs_a: float
    lhs_b: float
    rhs_b: float
    lhs_c: float
    rhs_c: float
    delta: float

    @staticmethod
    def _ratio(lhs: float, rhs: float) -> float:
        if lhs == 0.0:
            return 0.0
        return lhs / rhs if rhs > 0 else float("inf")

    @property
    def a(self) -> float:
        return self._ratio(self.lhs_a, self.rhs_a)

    @property
    def b(self) -> float:
        return self._ratio(self.lhs_b, self.rhs_b)

    @property
    def c(self) -> float:
        return self._ratio(self.lhs_c, self.rhs_c)


class TailReport(BaseModel):
    """The |t| > y region split at |t| = 1, with both tail-lemma right-hand forms."""
    B: float
    inner: float
    outer: float
    lemma7_form: float
    lemma8_form: float
    error_estimate: float = 0.0
