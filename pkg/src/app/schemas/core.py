from pydantic import BaseModel, ConfigDict, model_validator


class Window(BaseModel):
    """
    A bounded sampling window [a, b] on the real line.
    """
    model_config = ConfigDict(frozen=True)

    a: float
    b: float

    @model_validator(mode="after")
    def check_order(self):
        if not self.a < self.b:
            raise ValueError(f"window needs a < b, got [{self.a}, {self.b}]")
        return self

    @classmethod
    def of(cls, window: "Window | tuple[float, float]") -> "Window":
        if isinstance(window, Window):
            return window
        a, b = window
        return cls(a=float(a), b=float(b))

    @property
    def is_symmetric(self) -> bool:
        return self.a == -self.b

    def as_tuple(self) -> tuple[float, float]:
        return (self.a, self.b)


class ErrorResponse(BaseModel):
    """
    What a failed command reports on stderr.
    """
    detail: str
    exit_code: int
