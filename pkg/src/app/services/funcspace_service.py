"""
Weights, norm estimators and transforms for test functions.

All estimators sample on a bounded window and therefore return lower bounds
of the corresponding global norms.
"""
import logging

import numpy as np

from src.app.config import get_settings
from src.app.schemas.core import Window
from src.app.schemas.funcspace import PairScheme, SchauderParams, TestFunction, WeightKind
from src.app.utils.errors import DomainError
from src.app.utils.expnorm import inv_two_cosh, log_two_cosh

logger = logging.getLogger(__name__)


# --- WEIGHTS ---

def weight_values(params: SchauderParams, x) -> np.ndarray:
    """(1+|x|)^m e^{κ|x|}, or log(1+|x|) e^{κ|x|}, vectorized."""
    ax = np.abs(np.asarray(x, dtype=float))
    if params.weight_kind == WeightKind.LOGARITHMIC:
        return np.log1p(ax) * np.exp(params.kappa * ax)
    return np.exp(params.m * np.log1p(ax) + params.kappa * ax)


def weight_eval(params: SchauderParams, x: float) -> float:
    return float(weight_values(params, x))


def _values(phi: TestFunction, x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(phi.eval(x), dtype=float), x.shape)


def _derivs(phi: TestFunction, x: np.ndarray) -> np.ndarray:
    if phi.deriv is None:
        raise DomainError(f"Function '{phi.label}' has no derivative")
    return np.broadcast_to(np.asarray(phi.deriv(x), dtype=float), x.shape)


def _usable(params: SchauderParams, x: np.ndarray) -> np.ndarray:
    if params.is_log:
        return np.abs(x) >= get_settings().X_MIN_LOG
    return np.ones(x.shape, dtype=bool)


# --- SUP NORM ---

def estimate_sup_norm_sampled(x, values, params: SchauderParams) -> float:
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = _usable(params, x)
    if not mask.any():
        raise DomainError("No sample points left after excluding the log-weight zero")
    return float(np.max(np.abs(values[mask]) / weight_values(params, x[mask])))


def estimate_sup_norm(
    phi: TestFunction,
    params: SchauderParams,
    window: Window | tuple[float, float],
    n_samples: int | None = None,
) -> float:
    """max |φ(x)| / w(x) over n_samples equispaced points of the window."""
    window = Window.of(window)
    n = get_settings().SUP_SAMPLES if n_samples is None else n_samples
    if n < 2:
        raise DomainError(f"n_samples must be >= 2, got {n}")
    x = np.linspace(window.a, window.b, n)
    return estimate_sup_norm_sampled(x, _values(phi, x), params)


# --- HOLDER SEMINORM ---

def holder_pairs(window: Window | tuple[float, float], scheme: PairScheme) -> tuple[np.ndarray, np.ndarray]:
    """
    Grid points paired with x + h for each step, with seeded far points and with
    both window ends; mirrored when the window is symmetric.
    """
    window = Window.of(window)
    grid = np.linspace(window.a, window.b, scheme.n_points)
    left, right = [], []
    for h in scheme.steps:
        inside = grid + h <= window.b
        left.append(grid[inside])
        right.append(grid[inside] + h)
    rng = np.random.default_rng(scheme.seed)
    far = rng.uniform(window.a, window.b, scheme.n_far)
    for partner in np.concatenate([far, [window.a, window.b]]):
        left.append(grid)
        right.append(np.full_like(grid, partner))
    xs, ys = np.concatenate(left), np.concatenate(right)
    if window.is_symmetric:
        xs, ys = np.concatenate([xs, -xs]), np.concatenate([ys, -ys])
    keep = xs != ys
    return xs[keep], ys[keep]


def _holder_ratio(xs, ys, fx, fy, params: SchauderParams) -> float:
    if params.alpha is None:
        raise DomainError("Hölder seminorm needs alpha")
    mask = _usable(params, xs) | _usable(params, ys)
    mask &= xs != ys
    if not mask.any():
        return 0.0
    xs, ys, fx, fy = xs[mask], ys[mask], fx[mask], fy[mask]
    denom = np.abs(xs - ys) ** params.alpha * (weight_values(params, xs) + weight_values(params, ys))
    return float(np.max(np.abs(fx - fy) / denom))


def estimate_holder_seminorm(
    phi: TestFunction,
    params: SchauderParams,
    window: Window | tuple[float, float],
    pair_scheme: PairScheme | None = None,
) -> float:
    """max |φ(x)-φ(y)| / (|x-y|^α (w(x)+w(y))) over the pair scheme."""
    scheme = PairScheme() if pair_scheme is None else pair_scheme
    xs, ys = holder_pairs(window, scheme)
    return _holder_ratio(xs, ys, _values(phi, xs), _values(phi, ys), params)


def estimate_holder_seminorm_sampled(x, values, params: SchauderParams) -> float:
    """Hölder estimate over every pair of a tabulated function."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    i, j = np.triu_indices(x.size, k=1)
    return _holder_ratio(x[i], x[j], values[i], values[j], params)


def estimate_schauder_norm(
    phi: TestFunction,
    params: SchauderParams,
    window: Window | tuple[float, float],
    pair_scheme: PairScheme | None = None,
) -> float:
    return max(
        estimate_sup_norm(phi, params, window),
        estimate_holder_seminorm(phi, params, window, pair_scheme),
    )


def estimate_schauder_norm_sampled(x, values, params: SchauderParams) -> float:
    return max(
        estimate_sup_norm_sampled(x, values, params),
        estimate_holder_seminorm_sampled(x, values, params),
    )


# --- C^k NORMS ---

def estimate_ck_norm(
    phi: TestFunction,
    m: int,
    k: int,
    window: Window | tuple[float, float],
    n_samples: int | None = None,
    extra_points=(),
) -> float:
    """
    Best C with |∂^l φ(x)| <= C(1+|x|)^m for l <= k on the window.
    `extra_points` are sampled in addition to the equispaced grid.
    """
    if k not in (0, 1):
        raise DomainError(f"derivative order k must be 0 or 1, got {k}")
    window = Window.of(window)
    n = get_settings().SUP_SAMPLES if n_samples is None else n_samples
    x = np.concatenate([np.linspace(window.a, window.b, n), np.asarray(extra_points, dtype=float).ravel()])
    w = np.exp(m * np.log1p(np.abs(x)))
    best = float(np.max(np.abs(_values(phi, x)) / w))
    if k == 1:
        best = max(best, float(np.max(np.abs(_derivs(phi, x)) / w)))
    return best


def sup_on_interval(phi: TestFunction, a: float, b: float, derivative: bool = False, n_samples: int | None = None) -> float:
    """‖φ‖ in C^0[a, b], or C^1[a, b] when `derivative` is set."""
    n = get_settings().SUP_SAMPLES if n_samples is None else n_samples
    x = np.linspace(a, b, n)
    best = float(np.max(np.abs(_values(phi, x))))
    if derivative:
        best = max(best, float(np.max(np.abs(_derivs(phi, x)))))
    return best


# --- INVARIANT CHECKS ---

def _smooth_points(window: Window, n_points: int) -> np.ndarray:
    x = np.linspace(window.a, window.b, n_points)
    # catalog kinks sit at 0
    return x[np.abs(x) > 0.05]


def check_derivative(
    phi: TestFunction,
    window: Window | tuple[float, float] = (-3.0, 3.0),
    n_points: int = 41,
    h: float = 1e-3,
) -> tuple[float, float]:
    """
    Centered differences at steps h and h/2 against `deriv`.
    Returns (max error at h/2, observed order); the order is about 2 on smooth points.
    """
    x = _smooth_points(Window.of(window), n_points)
    exact = _derivs(phi, x)
    errs = []
    for step in (h, h / 2):
        approx = (_values(phi, x + step) - _values(phi, x - step)) / (2 * step)
        errs.append(float(np.max(np.abs(approx - exact))))
    order = float(np.log2(errs[0] / errs[1])) if errs[1] > 0 and errs[0] > 0 else float("inf")
    return errs[1], order


def check_antiderivative(
    phi: TestFunction,
    window: Window | tuple[float, float] = (-3.0, 3.0),
    n_points: int = 41,
    h: float = 1e-4,
) -> float:
    """Max |F'(x) - φ(x)| by centered differences; also requires F(0) = 0."""
    if phi.antideriv is None:
        raise DomainError(f"Function '{phi.label}' has no antiderivative")
    if abs(float(phi.antideriv(np.array([0.0]))[0])) > 1e-14:
        return float("inf")
    x = _smooth_points(Window.of(window), n_points)
    approx = (np.asarray(phi.antideriv(x + h)) - np.asarray(phi.antideriv(x - h))) / (2 * h)
    return float(np.max(np.abs(approx - _values(phi, x))))


def check_growth_bound(
    phi: TestFunction,
    window: Window | tuple[float, float],
    n_samples: int | None = None,
) -> bool:
    """|φ(x)| <= C·w(x) on the window for the stored constant C and claimed class."""
    window = Window.of(window)
    n = get_settings().SUP_SAMPLES if n_samples is None else n_samples
    x = np.linspace(window.a, window.b, n)
    bound = phi.growth_constant * weight_values(phi.claimed_class, x)
    return bool(np.all(np.abs(_values(phi, x)) <= bound * (1 + 1e-12) + 1e-300))


# --- TRANSFORMS ---

def reflect(phi: TestFunction) -> TestFunction:
    """x -> φ(-x); the claimed class is unchanged since weights are even."""
    deriv = None if phi.deriv is None else (lambda x: -np.asarray(phi.deriv(-np.asarray(x, dtype=float))))
    antideriv = None if phi.antideriv is None else (lambda y: -np.asarray(phi.antideriv(-np.asarray(y, dtype=float))))
    return TestFunction(
        label=f"reflect({phi.label})",
        eval=lambda x: phi.eval(-np.asarray(x, dtype=float)),
        deriv=deriv,
        antideriv=antideriv,
        claimed_class=phi.claimed_class,
        growth_constant=phi.growth_constant,
        description=f"{phi.label} mirrored",
    )


def multiplier_map(phi: TestFunction) -> TestFunction:
    """
    Mφ = φ / (e^x + e^{-x}). Maps the (m, κ) class onto (m, κ-1) with the same constant.
    """
    def deriv(x):
        x = np.asarray(x, dtype=float)
        return (np.asarray(phi.deriv(x)) - np.tanh(x) * np.asarray(phi.eval(x))) * inv_two_cosh(x)

    cls = phi.claimed_class
    return TestFunction(
        label=f"M({phi.label})",
        eval=lambda x: np.asarray(phi.eval(x), dtype=float) * inv_two_cosh(x),
        deriv=None if phi.deriv is None else deriv,
        claimed_class=cls.model_copy(update={"kappa": cls.kappa - 1.0}),
        growth_constant=phi.growth_constant,
        description=f"{phi.label} times 1/(e^x+e^-x)",
    )


def dilate(phi: TestFunction, lam: float) -> TestFunction:
    """η -> φ(η/λ), the rescaling that relates I_λ to I."""
    if lam <= 0:
        raise DomainError(f"dilation needs λ > 0, got {lam}")
    deriv = None if phi.deriv is None else (lambda x: np.asarray(phi.deriv(np.asarray(x, dtype=float) / lam)) / lam)
    antideriv = None if phi.antideriv is None else (lambda y: lam * np.asarray(phi.antideriv(np.asarray(y, dtype=float) / lam)))
    cls = phi.claimed_class
    return TestFunction(
        label=f"dilate({phi.label},{lam:g})",
        eval=lambda x: phi.eval(np.asarray(x, dtype=float) / lam),
        deriv=deriv,
        antideriv=antideriv,
        claimed_class=cls.model_copy(update={"kappa": cls.kappa / lam}),
        growth_constant=phi.growth_constant * max(lam, 1.0 / lam) ** abs(cls.m),
        description=f"{phi.label} at x/{lam:g}",
    )


def log_cosh(x) -> np.ndarray:
    """log cosh x without overflow."""
    return log_two_cosh(x) - np.log(2.0)
