import logging
import re
from typing import Callable

import numpy as np

from src.app.schemas.funcspace import SchauderParams, TestFunction
from src.app.services.funcspace_service import log_cosh
from src.app.utils.errors import UnknownFunctionError
from src.app.utils.expnorm import inv_two_cosh

logger = logging.getLogger(__name__)


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _const1() -> TestFunction:
    return TestFunction(
        label="const1",
        eval=lambda x: np.ones_like(_arr(x)),
        deriv=lambda x: np.zeros_like(_arr(x)),
        antideriv=lambda y: _arr(y),
        claimed_class=SchauderParams(m=0, kappa=0.0),
        description="phi = 1",
    )


def _poly(n: int) -> TestFunction:
    return TestFunction(
        label=f"poly:{n}",
        eval=lambda x: _arr(x) ** n,
        deriv=lambda x: n * _arr(x) ** (n - 1),
        antideriv=lambda y: _arr(y) ** (n + 1) / (n + 1),
        claimed_class=SchauderParams(m=n, kappa=0.0),
        description=f"phi = x^{n}",
    )


def _sin() -> TestFunction:
    return TestFunction(
        label="sin",
        eval=lambda x: np.sin(_arr(x)),
        deriv=lambda x: np.cos(_arr(x)),
        antideriv=lambda y: 1.0 - np.cos(_arr(y)),
        claimed_class=SchauderParams(m=0, kappa=0.0),
        description="phi = sin x",
    )


def _lorentzian() -> TestFunction:
    return TestFunction(
        label="lorentzian",
        eval=lambda x: 1.0 / (1.0 + _arr(x) ** 2),
        deriv=lambda x: -2.0 * _arr(x) / (1.0 + _arr(x) ** 2) ** 2,
        antideriv=lambda y: np.arctan(_arr(y)),
        claimed_class=SchauderParams(m=0, kappa=0.0),
        description="phi = 1/(1+x^2)",
    )


def _xexp() -> TestFunction:
    # derivative (1-|x|)e^{-|x|} equals 1 from both sides at 0
    return TestFunction(
        label="xexp",
        eval=lambda x: _arr(x) * np.exp(-np.abs(_arr(x))),
        deriv=lambda x: (1.0 - np.abs(_arr(x))) * np.exp(-np.abs(_arr(x))),
        antideriv=lambda y: 1.0 - (1.0 + np.abs(_arr(y))) * np.exp(-np.abs(_arr(y))),
        claimed_class=SchauderParams(m=0, kappa=0.0),
        growth_constant=float(np.exp(-1.0)),
        description="phi = x e^{-|x|}",
    )


def _tanh() -> TestFunction:
    return TestFunction(
        label="tanh",
        eval=lambda x: np.tanh(_arr(x)),
        deriv=lambda x: (2.0 * inv_two_cosh(x)) ** 2,
        antideriv=lambda y: log_cosh(y),
        claimed_class=SchauderParams(m=0, kappa=0.0),
        description="phi = tanh x",
    )


def _holder(alpha: float) -> TestFunction:
    return TestFunction(
        label=f"holder:{alpha:g}",
        eval=lambda x: np.abs(_arr(x)) ** alpha,
        antideriv=lambda y: np.sign(_arr(y)) * np.abs(_arr(y)) ** (1.0 + alpha) / (1.0 + alpha),
        claimed_class=SchauderParams(m=1, kappa=0.0, alpha=alpha),
        description=f"phi = |x|^{alpha:g}, Hölder but not Lipschitz at 0",
    )


def _sech() -> TestFunction:
    return TestFunction(
        label="sech",
        eval=lambda x: 2.0 * inv_two_cosh(x),
        deriv=lambda x: -np.tanh(_arr(x)) * 2.0 * inv_two_cosh(x),
        antideriv=lambda y: 2.0 * np.arctan(np.tanh(0.5 * _arr(y))),
        claimed_class=SchauderParams(m=0, kappa=-1.0),
        growth_constant=2.0,
        description="phi = 1/cosh x",
    )


def _sinh() -> TestFunction:
    return TestFunction(
        label="sinh",
        eval=lambda x: np.sinh(_arr(x)),
        deriv=lambda x: np.cosh(_arr(x)),
        antideriv=lambda y: np.cosh(_arr(y)) - 1.0,
        claimed_class=SchauderParams(m=0, kappa=1.0),
        growth_constant=0.5,
        description="phi = sinh x",
    )


def _cosh() -> TestFunction:
    return TestFunction(
        label="cosh",
        eval=lambda x: np.cosh(_arr(x)),
        deriv=lambda x: np.sinh(_arr(x)),
        antideriv=lambda y: np.sinh(_arr(y)),
        claimed_class=SchauderParams(m=0, kappa=1.0),
        description="phi = cosh x, annihilated by I",
    )


# Fixed labels; "poly:<n>" and "holder:<alpha>" are parsed below.
CATALOG: dict[str, Callable[[], TestFunction]] = {
    "const1": _const1,
    "poly:1": lambda: _poly(1),
    "poly:2": lambda: _poly(2),
    "poly:3": lambda: _poly(3),
    "sin": _sin,
    "lorentzian": _lorentzian,
    "xexp": _xexp,
    "tanh": _tanh,
    "holder:0.5": lambda: _holder(0.5),
    "sech": _sech,
    "sinh": _sinh,
    "cosh": _cosh,
}

_POLY = re.compile(r"^poly:(\d+)$")
_HOLDER = re.compile(r"^holder:([0-9]*\.?[0-9]+)$")


def get_function(label: str) -> TestFunction:
    """Looks up a test function by label."""
    label = label.strip()
    if label in CATALOG:
        return CATALOG[label]()
    match = _POLY.match(label)
    if match and 1 <= int(match.group(1)) <= 6:
        return _poly(int(match.group(1)))
    match = _HOLDER.match(label)
    if match and 0.0 < float(match.group(1)) < 1.0:
        return _holder(float(match.group(1)))
    raise UnknownFunctionError(f"Unknown test function '{label}'. Known labels: {', '.join(CATALOG)}")


def list_functions() -> list[TestFunction]:
    return [factory() for factory in CATALOG.values()]


def smooth_catalog() -> list[TestFunction]:
    """Catalog entries with derivative and antiderivative and polynomial growth (κ = 0)."""
    return [
        phi for phi in list_functions()
        if phi.deriv is not None and phi.antideriv is not None and phi.claimed_class.kappa == 0.0
    ]
