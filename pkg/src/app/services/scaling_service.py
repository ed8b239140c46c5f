"""
The λ -> ∞ limit of I_λ: the Dirac family χ_λ, the A1 + A0 + B decomposition,
the tail split at |t| = 1 and the log-log rate fit.
"""
import logging
import math
from typing import Sequence

import numpy as np

from src.app.config import get_settings
from src.app.schemas.certificates import ABDecomposition, Lemma5Ratios, RateFit, TailReport
from src.app.schemas.funcspace import TestFunction
from src.app.schemas.quadrature import PVConfig
from src.app.services import funcspace_service as fs
from src.app.services import operator_service as ops
from src.app.services.quadrature_service import composite_rule, integrate_panels, integrate_smooth
from src.app.utils.errors import DomainError

logger = logging.getLogger(__name__)

_CHUNK = 4096

# E(λ) below this multiple of abs_tol is treated as zero
ZERO_FLOOR_FACTOR = 100.0


# --- CHI ---

def _chi(lam: float, rho, t, y: float):
    """χ_λ(ρ, t) for 0 < t < y, exponent-normalized; broadcasts over ρ and t."""
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    s = lam * t
    with np.errstate(over="ignore", under="ignore"):
        lead = s / -np.expm1(-2.0 * s)
        ratio = (1.0 + math.exp(-2.0 * lam * y)) / (1.0 + np.exp(-2.0 * lam * (y - rho * t)))
        return lead * np.exp(s * (rho - 1.0)) * ratio


def chi_eval(lam: float, rho, t: float, y: float):
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    if not 0 < t < y:
        raise DomainError(f"chi needs 0 < t < y, got t={t}, y={y}")
    if np.any(np.abs(np.asarray(rho, dtype=float)) > 1):
        raise DomainError("chi needs |rho| <= 1")
    value = _chi(lam, rho, t, y)
    return float(value) if np.ndim(value) == 0 else value


def rho_breakpoints(lam: float, t: float) -> list[float]:
    """Panels graded toward ρ = 1, where χ_λ concentrates with width 1/(λt)."""
    depth = int(math.ceil(math.log2(max(lam * t, 2.0)))) + 6
    return [0.0] + [1.0 - 2.0 ** -j for j in range(1, depth + 1)]


def rho_integral(f, lam: float, t: float, cfg: PVConfig) -> float:
    """∫_{-1}^{1} f(ρ) dρ for integrands carrying a χ_λ(·, t) factor."""
    return integrate_smooth(f, -1.0, 1.0, cfg, breakpoints=rho_breakpoints(lam, t)).value


def chi_moment(lam: float, t: float, y: float, cfg: PVConfig) -> float:
    """∫_{-1}^{1} χ_λ(ρ, t) dρ."""
    chi_eval(lam, 0.0, t, y)
    return rho_integral(lambda rho: _chi(lam, rho, t, y), lam, t, cfg)


def chi_moment_defect(lam: float, t: float, y: float, cfg: PVConfig, log_scale: float = 0.0) -> float:
    """
    e^{log_scale}·(∫χ_λ dρ - 1), integrated as a difference so it keeps its
    relative accuracy when it is exponentially small. The unperturbed profile
    λt e^{-λt(1-ρ)}/(1-e^{-2λt}) integrates to exactly 1.
    """
    chi_eval(lam, 0.0, t, y)
    s = lam * t
    lead = s / -math.expm1(-2.0 * s)

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(under="ignore"):
            near = np.exp(-2.0 * lam * (y - rho * t))
            gap = math.exp(-2.0 * lam * y + log_scale) - np.exp(-2.0 * lam * (y - rho * t) + log_scale)
            return lead * np.exp(s * (rho - 1.0)) * gap / (1.0 + near)
    return rho_integral(f, lam, t, cfg)


def dirac_error_terms(
    phi: TestFunction,
    lam: float,
    y: float,
    t: float,
    delta: float,
    cfg: PVConfig,
    norm0: float,
    norm1: float,
) -> Lemma5Ratios:
    """
    The three pieces of ∫χ_λ tanh(λu)φ(u)dρ - φ(y-t), u = y - ρt, next to their bounds:
      (a) |∫χ - 1|·|φ(y-t)|                 vs ‖φ‖₀(1+y)^m (e^{-λy} + e^{-2λ(y-t)})
      (b) |∫χ (φ(u) - φ(y-t))|              vs ‖φ‖₁(1+y)^m (δt + e^{-λδt})
      (c) ∫χ |tanh(λu) - 1|·|φ(u)|          vs e^{-2λ(y-t)} ‖φ‖₀(1+y)^m
    `norm0` and `norm1` are the Λ^0_(m) and Λ^1_(m) norms of φ. The (a) and (c)
    pairs are each multiplied by one common exponential so neither side underflows.
    """
    chi_eval(lam, 0.0, t, y)
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    m = phi.claimed_class.m
    poly = (1.0 + y) ** m
    at = float(np.asarray(phi.eval(np.array([y - t])), dtype=float).ravel()[0])

    # (a), scaled by e^{L} with L the smaller of the two decay exponents
    L = min(lam * y, 2.0 * lam * (y - t))
    defect = chi_moment_defect(lam, t, y, cfg, log_scale=L)
    lhs_a = abs(defect) * abs(at)
    rhs_a = norm0 * poly * (math.exp(L - lam * y) + math.exp(L - 2.0 * lam * (y - t)))

    # (b)
    def variation(rho):
        u = y - np.asarray(rho, dtype=float) * t
        return _chi(lam, rho, t, y) * (np.asarray(phi.eval(u), dtype=float) - at)
    lhs_b = abs(rho_integral(variation, lam, t, cfg))
    rhs_b = norm1 * poly * (delta * t + math.exp(-lam * delta * t))

    # (c), scaled by e^{2λ(y-t)}; 1 - tanh(λu) = 2e^{-2λu}/(1 + e^{-2λu})
    def saturation(rho):
        rho = np.asarray(rho, dtype=float)
        u = y - rho * t
        with np.errstate(under="ignore"):
            gap = 2.0 * np.exp(-2.0 * lam * t * (1.0 - rho)) / (1.0 + np.exp(-2.0 * lam * u))
        return _chi(lam, rho, t, y) * gap * np.abs(np.asarray(phi.eval(u), dtype=float))
    lhs_c = rho_integral(saturation, lam, t, cfg)
    rhs_c = norm0 * poly

    return Lemma5Ratios(
        lhs_a=lhs_a, rhs_a=rhs_a,
        lhs_b=lhs_b, rhs_b=rhs_b,
        lhs_c=lhs_c, rhs_c=rhs_c,
        delta=delta,
    )


# --- A/B DECOMPOSITION ---

def _rho_rule(lam: float, y: float) -> tuple[np.ndarray, np.ndarray]:
    return composite_rule([-1.0] + rho_breakpoints(lam, y) + [1.0])


def _inner_integral(phi_term, lam: float, y: float):
    """t -> ∫_{-1}^{1} χ_λ(ρ, t)·phi_term(y - ρt) dρ on a fixed tensor rule."""
    rho, w = _rho_rule(lam, y)

    def inner(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        for start in range(0, t.size, _CHUNK):
            tc = t[start:start + _CHUNK, None]
            u = y - rho[None, :] * tc
            out[start:start + _CHUNK] = (_chi(lam, rho[None, :], tc, y) * phi_term(u)) @ w
        return out
    return inner


def _t_edges(lam: float, y: float, cfg: PVConfig) -> np.ndarray:
    layer = [y - p for p in ops.boundary_layer_edges(lam, 0.0, y)]
    return np.unique(np.concatenate([np.linspace(0.0, y, cfg.base_panels + 1), layer]))


def decompose_A_B(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> ABDecomposition:
    """
    I_λφ(y) = A1 + A0 + B with
      A1 = -(1/λ)∫_0^y∫_{-1}^1 χ_λ φ'(y-ρt) dρ dt,
      A0 = ∫_0^y∫_{-1}^1 χ_λ tanh(λ(y-ρt)) φ(y-ρt) dρ dt,
      B  = the |t| > y region.
    A carries the directly folded inner region for comparison with A1 + A0.
    """
    if phi.deriv is None:
        raise DomainError(f"Decomposition needs a derivative; '{phi.label}' has none")
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    if y < 0:
        mirrored = decompose_A_B(fs.reflect(phi), lam, -y, cfg)
        return ABDecomposition(
            A1=-mirrored.A1, A0=-mirrored.A0, B=-mirrored.B, A=-mirrored.A,
            error_estimate=mirrored.error_estimate,
        )
    a_res, b_res = ops.evaluate_I_lambda_regions(phi, lam, y, cfg)
    if y == 0:
        return ABDecomposition(A1=0.0, A0=0.0, B=b_res.value, A=0.0, error_estimate=b_res.error_budget)

    edges = _t_edges(lam, y, cfg)
    a1_inner = _inner_integral(lambda u: np.asarray(phi.deriv(u), dtype=float), lam, y)
    a0_inner = _inner_integral(lambda u: np.tanh(lam * u) * np.asarray(phi.eval(u), dtype=float), lam, y)
    a1 = integrate_panels(a1_inner, edges, cfg, label="A1")
    a0 = integrate_panels(a0_inner, edges, cfg, label="A0")
    return ABDecomposition(
        A1=-a1.value / lam,
        A0=a0.value,
        B=b_res.value,
        A=a_res.value,
        error_estimate=a1.error_estimate / lam + a0.error_estimate + b_res.error_budget,
    )


# --- TAIL REGION ---

def tail_report(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> TailReport:
    """
    B = ∫_{|t|>y} split into y < |t| < 1 and |t| > 1, with the two tail forms
    (1/λ)(1 + log(1 + 1/(λy))) and y + 1/λ.
    """
    if y <= 0:
        raise DomainError(f"tail report needs y > 0, got {y}")
    T = ops.i_lambda_cutoff(phi, lam, y, cfg)
    split = min(max(1.0, y), T)
    inner = ops.integrate_I_lambda_region(phi, lam, y, y, split, cfg)
    outer = ops.integrate_I_lambda_region(phi, lam, y, split, T, cfg)
    tail = ops.i_lambda_tail_bound(phi, lam, y, T)
    return TailReport(
        B=inner.value + outer.value,
        inner=inner.value,
        outer=outer.value,
        lemma7_form=(1.0 + math.log1p(1.0 / (lam * y))) / lam,
        lemma8_form=y + 1.0 / lam,
        error_estimate=inner.error_estimate + outer.error_estimate + tail,
    )


def diagnostic_points(lam: float) -> list[float]:
    """y = c/λ for each configured c, so λy is the same at every λ."""
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    return [c / lam for c in get_settings().Y_GRID_DIAGNOSTIC]


def tail_diagnostics(phi: TestFunction, lam: float, cfg: PVConfig) -> list[TailReport]:
    """tail_report at each diagnostic point of λ."""
    return [tail_report(phi, lam, y, cfg) for y in diagnostic_points(lam)]


# --- RATE FIT ---

def fit_rate(
    lambdas: Sequence[float],
    errors: Sequence[float],
    budgets: Sequence[float] | None = None,
    zero_floor: float = 0.0,
) -> RateFit:
    """
    Least-squares line through (log λ, log E).

    Errors at or below `zero_floor` are indistinguishable from quadrature noise
    and count as zero. When every E is zero the fit is reported as the
    exact-zero case with slope 0 and r² = 1.
    """
    settings = get_settings()
    lam = np.asarray(lambdas, dtype=float)
    err = np.asarray(errors, dtype=float)
    bud = np.zeros_like(err) if budgets is None else np.asarray(budgets, dtype=float)
    if lam.size != err.size or lam.size < 2:
        raise DomainError("fit_rate needs at least two (λ, E) pairs of equal length")
    order = np.argsort(lam, kind="stable")
    lam, err, bud = lam[order], err[order], bud[order]
    scaled = err * np.sqrt(lam)
    resolved = err > zero_floor
    noise = bool(np.any(resolved & (bud > settings.NOISE_FRACTION * err)))

    if not resolved.any():
        return RateFit(
            slope=0.0, intercept=0.0, r_squared=1.0, points=[],
            lambdas=lam.tolist(), errors=err.tolist(), budgets=bud.tolist(), scaled_errors=scaled.tolist(),
            exact_zero=True, noise_dominated=False, uniform_bound=True,
        )
    if resolved.sum() < 2:
        logger.warning(f"Only one λ resolves E above the noise floor {zero_floor:.1e}")
        return RateFit(
            slope=0.0, intercept=0.0, r_squared=0.0, points=[],
            lambdas=lam.tolist(), errors=err.tolist(), budgets=bud.tolist(), scaled_errors=scaled.tolist(),
            exact_zero=False, noise_dominated=True, uniform_bound=False,
        )
    x, v = np.log(lam[resolved]), np.log(err[resolved])
    slope, intercept = np.polyfit(x, v, 1)
    residual = v - (slope * x + intercept)
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual ** 2)) / ss_tot if ss_tot > 0 else 1.0

    # E·√λ may fall (faster decay is compliant) but must not climb by more than 20% per step
    steps_ok = bool(np.all(scaled[1:] <= 1.2 * scaled[:-1] + 1e-300))
    spread_ok = bool(scaled[0] > 0 and scaled.max() / scaled[0] < 5.0)
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        points=[(float(a), float(b)) for a, b in zip(x, v)],
        lambdas=lam.tolist(),
        errors=err.tolist(),
        budgets=bud.tolist(),
        scaled_errors=scaled.tolist(),
        exact_zero=False,
        noise_dominated=noise,
        uniform_bound=steps_ok and spread_ok,
    )


def measure_scaling_limit(
    phi: TestFunction,
    lambda_list: Sequence[float],
    y_grid: Sequence[float],
    m: int,
    cfg: PVConfig,
) -> RateFit:
    """
    E(λ) = max_y |I_λφ(y) - ∫_0^y φ| / (1+|y|)^{m+1}, fitted against λ.
    The same weighted error at the diagnostic points y = c/λ is reported
    per λ as diagnostic_errors and kept out of the fit.
    """
    if phi.antideriv is None:
        raise DomainError(f"'{phi.label}' has no antiderivative to compare against")
    if any(y <= 0 for y in y_grid):
        raise DomainError("the y grid must lie in (0, Y]")
    if len(lambda_list) < 5:
        logger.warning(f"Only {len(lambda_list)} λ values; the rate fit wants at least 5")

    ys = np.asarray(sorted(y_grid), dtype=float)
    exact = np.asarray(phi.antideriv(ys), dtype=float)
    weights = (1.0 + ys) ** (m + 1)
    errors, budgets, diagnostics = [], [], []
    for lam in sorted(lambda_list):
        results = [ops.evaluate_I_lambda(phi, lam, float(y), cfg) for y in ys]
        values = np.array([r.value for r in results])
        budget = np.array([r.error_budget for r in results])
        errors.append(float(np.max(np.abs(values - exact) / weights)))
        budgets.append(float(np.max(budget / weights)))

        near = np.asarray(diagnostic_points(lam))
        near_values = np.array([ops.apply_I_lambda(phi, lam, float(y), cfg) for y in near])
        near_exact = np.asarray(phi.antideriv(near), dtype=float)
        near_errors = np.abs(near_values - near_exact) / (1.0 + near) ** (m + 1)
        diagnostics.append(float(np.max(near_errors, initial=0.0)))
        logger.info(
            f"{phi.label}: λ={lam:g} E={errors[-1]:.4e} budget={budgets[-1]:.2e} near-zero={diagnostics[-1]:.2e}"
        )

    fit = fit_rate(sorted(lambda_list), errors, budgets, zero_floor=ZERO_FLOOR_FACTOR * cfg.abs_tol)
    fit = fit.model_copy(update={"diagnostic_errors": diagnostics})
    if fit.noise_dominated:
        logger.warning(f"{phi.label}: quadrature budget exceeds {get_settings().NOISE_FRACTION:.0%} of E(λ)")
    return fit


# --- KERNEL LIMIT ---

def kernel_indicator_gap(lam: float, y: float, eta_list: Sequence[float]) -> list[dict]:
    """|K_λ(y, η) - 1{0 < η < y}| for each η."""
    rows = []
    for eta in eta_list:
        value = ops.kernel_K_lambda(lam, y, eta)
        inside = (0 < eta < y) if y > 0 else (y < eta < 0)
        indicator = (1.0 if y > 0 else -1.0) if inside else 0.0
        rows.append({"eta": float(eta), "value": value, "indicator": indicator, "gap": abs(value - indicator)})
    return rows
