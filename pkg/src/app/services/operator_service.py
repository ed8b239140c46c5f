"""
The kernels K, K_λ and k, and the operators H, I and I_λ.

P.V. integrals are folded at the singularity: with an odd kernel,
P.V.∫K(y-η)ψ(η)dη = ∫_0^∞ K(t)(ψ(y-t) - ψ(y+t)) dt.
"""
import logging
import math

import numpy as np

from src.app.schemas.funcspace import TestFunction
from src.app.schemas.operators import OperatorKind, OperatorRequest, OperatorRow
from src.app.schemas.quadrature import PVConfig, QuadResult
from src.app.services import funcspace_service as fs
from src.app.services.quadrature_service import (
    integrate_panels,
    log_exp_poly_tail,
    pv_integrate_folded,
)
from src.app.utils.errors import DomainError, SingularityError
from src.app.utils.expnorm import inv_two_sinh, scaled_kernel, two_cosh

logger = logging.getLogger(__name__)


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


# --- KERNELS ---

def kernel_K(t):
    """K(t) = 1/(e^t - e^{-t}), odd, evaluated as sign(t)·e^{-|t|}/(1 - e^{-2|t|})."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr == 0):
        raise SingularityError("K is singular at t = 0; fold the integral instead")
    return _scalar_or_array(inv_two_sinh(arr), t)


def kernel_K_prime(t):
    """K'(t) = -(e^t + e^{-t})/(e^t - e^{-t})^2, even."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr == 0):
        raise SingularityError("K' is singular at t = 0")
    at = np.abs(arr)
    q = np.exp(-2.0 * at)
    return _scalar_or_array(-np.exp(-at) * (1.0 + q) / np.expm1(-2.0 * at) ** 2, t)


def kernel_K_lambda(lam: float, y, eta):
    """K_λ(y, η) = K(λ(y-η))·(e^{λy}+e^{-λy})/(e^{λη}+e^{-λη})."""
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    y_arr = np.asarray(y, dtype=float)
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(y_arr == eta_arr):
        raise SingularityError("K_lambda is singular at eta = y")
    value = scaled_kernel(lam, y_arr, eta_arr, y_arr - eta_arr)
    return float(value) if np.ndim(value) == 0 else value


def map_line_to_real(z: complex, a: float) -> float:
    """πz = πa + iy  ->  y = π·Im z."""
    if abs(z.real - a) > 1e-12:
        raise DomainError(f"z = {z} is not on the line Re z = {a}")
    return math.pi * z.imag


def map_real_to_line(y: float, a: float) -> complex:
    return complex(a, y / math.pi)


def kernel_k_line(z: complex, xi: complex, a: float) -> complex:
    """
    k(z, ξ) = (e^{iπ(z-a)} + e^{-iπ(z-a)}) / ((e^{iπ(ξ-a)} + e^{-iπ(ξ-a)})(e^{iπ(ξ-z)} - e^{-iπ(ξ-z)})).

    Evaluated directly in complex arithmetic; on the line it equals K_1(y, η),
    the Jacobian dξ = (i/π) dη left out.
    """
    if xi == z:
        raise SingularityError("k is singular at xi = z")
    ipi = 1j * math.pi
    num = np.exp(ipi * (z - a)) + np.exp(-ipi * (z - a))
    # (ξ-z) enters as a difference: the pole at ξ = z that I_λ carries at λ = 1
    den = (np.exp(ipi * (xi - a)) + np.exp(-ipi * (xi - a))) * (np.exp(ipi * (xi - z)) - np.exp(-ipi * (xi - z)))
    return complex(num / den)


# --- H ---

def _growth(phi: TestFunction) -> tuple[int, float, float]:
    cls = phi.claimed_class
    return cls.m, cls.kappa, phi.growth_constant


def _log_poly_prefactor(m: int, y: float) -> float:
    return max(m, 0) * math.log1p(abs(y))


def _near_scale(phi: TestFunction, y: float, width: float) -> float:
    x = np.array([y - width, y, y + width])
    return float(np.max(np.abs(np.broadcast_to(np.asarray(phi.eval(x), dtype=float), x.shape))))


def h_cutoff(phi: TestFunction, y: float, cfg: PVConfig) -> float:
    _, kappa, _ = _growth(phi)
    return abs(y) + cfg.truncation_radius / (1.0 - max(kappa, 0.0))


def h_tail_bound(phi: TestFunction, y: float, T: float) -> float:
    """
    Majorant of the discarded ∫_T^∞ |K(t)|·(|ψ(y-t)| + |ψ(y+t)|) dt from the
    claimed growth |ψ(x)| <= C(1+|x|)^m e^{κ|x|}.
    """
    m, kappa, C = _growth(phi)
    if C == 0:
        return 0.0
    log_bound = (
        math.log(2.0 * C)
        + abs(kappa) * abs(y)
        + _log_poly_prefactor(m, y)
        - math.log(-math.expm1(-2.0 * T))
        + log_exp_poly_tail(max(m, 0), 1.0 - kappa, T)
    )
    return math.exp(min(log_bound, 700.0))


def evaluate_H(psi: TestFunction, y: float, cfg: PVConfig) -> QuadResult:
    """P.V.∫K(y-η)ψ(η)dη with the truncation bound in the result."""
    _, kappa, _ = _growth(psi)
    if kappa >= 1:
        raise DomainError(f"H needs kappa < 1, '{psi.label}' claims {kappa}")
    T = h_cutoff(psi, y, cfg)

    def g(y0, t):
        t = np.asarray(t, dtype=float)
        diff = np.asarray(psi.eval(y0 - t), dtype=float) - np.asarray(psi.eval(y0 + t), dtype=float)
        return inv_two_sinh(t) * diff

    scale = 0.5 * _near_scale(psi, y, cfg.fold_radius)
    breaks = [abs(y)] if 0 < abs(y) < T else []
    return pv_integrate_folded(g, y, cfg, upper=T, tail_bound=h_tail_bound(psi, y, T), breakpoints=breaks, scale=scale)


def apply_H(psi: TestFunction, y: float, cfg: PVConfig) -> float:
    return evaluate_H(psi, y, cfg).value


# --- I ---

def evaluate_I(phi: TestFunction, y: float, cfg: PVConfig) -> QuadResult:
    """I(φ)(y) = (e^{-y}+e^y)·H(Mφ)(y)."""
    _, kappa, _ = _growth(phi)
    if kappa >= 2:
        raise DomainError(f"I needs kappa < 2, '{phi.label}' claims {kappa}")
    factor = float(two_cosh(y))
    inner_cfg = cfg.with_abs_tol(cfg.abs_tol / factor)
    return evaluate_H(fs.multiplier_map(phi), y, inner_cfg).scaled(factor)


def apply_I(phi: TestFunction, y: float, cfg: PVConfig) -> float:
    return evaluate_I(phi, y, cfg).value


def apply_I_direct(phi: TestFunction, y: float, cfg: PVConfig) -> float:
    """I = I_1 by plain quadrature of the un-conjugated kernel."""
    return evaluate_I_lambda_unsplit(phi, 1.0, y, cfg).value


# --- I_LAMBDA ---

def i_lambda_fold(phi: TestFunction, lam: float):
    """
    Folded I_λ integrand g(y, t) = K(λt)[R(y, y-t)φ(y-t) - R(y, y+t)φ(y+t)],
    R(y, u) = (e^{λy}+e^{-λy})/(e^{λu}+e^{-λu}).
    """
    def g(y0, t):
        t = np.asarray(t, dtype=float)
        lo, hi = y0 - t, y0 + t
        left = scaled_kernel(lam, y0, lo, t) * np.asarray(phi.eval(lo), dtype=float)
        right = scaled_kernel(lam, y0, hi, t) * np.asarray(phi.eval(hi), dtype=float)
        return left - right
    return g


def i_lambda_cutoff(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> float:
    _, kappa, _ = _growth(phi)
    if 2.0 * lam <= kappa:
        raise DomainError(f"I_lambda diverges for kappa={kappa} >= 2λ={2 * lam}")
    # keeps both λ(T-|y|) and (2λ-κ)(T-|y|) at or above the truncation radius
    reach = max(2.0 * cfg.truncation_radius / (2.0 * lam - kappa), cfg.truncation_radius / lam)
    return abs(y) + reach


def i_lambda_tail_bound(phi: TestFunction, lam: float, y: float, T: float) -> float:
    """Majorant of ∫_T^∞ |g(y, t)| dt; every exponent is combined in log space."""
    m, kappa, C = _growth(phi)
    if C == 0:
        return 0.0
    log_bound = (
        math.log(4.0 * C)
        + 2.0 * lam * abs(y)
        + abs(kappa) * abs(y)
        + _log_poly_prefactor(m, y)
        - math.log(-math.expm1(-2.0 * lam * T))
        + log_exp_poly_tail(max(m, 0), 2.0 * lam - kappa, T)
    )
    return math.exp(min(log_bound, 700.0))


def boundary_layer_edges(lam: float, start: float, stop: float) -> list[float]:
    """Breakpoints start + 2^k/λ, resolving the 1/λ boundary layer at `start`."""
    if stop <= start:
        return []
    points = []
    step = 0.25 / lam
    while start + step < stop:
        points.append(start + step)
        step *= 2.0
    return points


def integrate_I_lambda_region(phi: TestFunction, lam: float, y: float, lo: float, hi: float, cfg: PVConfig) -> QuadResult:
    """∫_lo^hi g(y, t) dt for 0 < lo < hi, away from the fold point."""
    if hi <= lo:
        return QuadResult(value=0.0, error_estimate=0.0)
    g = i_lambda_fold(phi, lam)
    edges = np.unique(np.concatenate([
        np.linspace(lo, hi, cfg.base_panels + 1),
        boundary_layer_edges(lam, lo, hi),
        [abs(y)] if lo < abs(y) < hi else [],
    ]))
    return integrate_panels(lambda t: g(y, t), edges, cfg, label=f"I_lambda region ({lo:g}, {hi:g})")


def _fold_scale(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> float:
    return _near_scale(phi, y, cfg.fold_radius) / (2.0 * lam)


def evaluate_I_lambda_regions(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> tuple[QuadResult, QuadResult]:
    """
    The split (A) = ∫_0^y, (B) = ∫_y^∞ of the folded integrand for y >= 0.
    At y = 0 region (A) is empty and (B) carries the fold point.
    """
    if y < 0:
        raise DomainError("region split is defined for y >= 0; reflect first")
    g = i_lambda_fold(phi, lam)
    T = i_lambda_cutoff(phi, lam, y, cfg)
    tail = i_lambda_tail_bound(phi, lam, y, T)
    scale = _fold_scale(phi, lam, y, cfg)
    if y == 0:
        empty = QuadResult(value=0.0, error_estimate=0.0)
        b = pv_integrate_folded(g, 0.0, cfg, upper=T, tail_bound=tail, breakpoints=boundary_layer_edges(lam, 0.0, T), scale=scale)
        return empty, b
    inner = [y - p for p in boundary_layer_edges(lam, 0.0, y)]
    a = pv_integrate_folded(g, y, cfg, upper=y, breakpoints=inner, scale=scale)
    b = integrate_I_lambda_region(phi, lam, y, y, T, cfg)
    return a, b.model_copy(update={"truncation_bound": tail})


def evaluate_I_lambda(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> QuadResult:
    """I_λ(φ)(y) as (A) + (B); y < 0 goes through I_λ[φ](-y) = -I_λ[φ(-·)](y)."""
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    if y < 0:
        return evaluate_I_lambda(fs.reflect(phi), lam, -y, cfg).scaled(-1.0)
    a, b = evaluate_I_lambda_regions(phi, lam, y, cfg)
    return a + b


def apply_I_lambda(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> float:
    return evaluate_I_lambda(phi, lam, y, cfg).value


def evaluate_I_lambda_unsplit(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> QuadResult:
    """The plain fold over (0, T) with no breakpoint at t = |y|."""
    if lam <= 0:
        raise DomainError(f"λ must be positive, got {lam}")
    if y < 0:
        return evaluate_I_lambda_unsplit(fs.reflect(phi), lam, -y, cfg).scaled(-1.0)
    T = i_lambda_cutoff(phi, lam, y, cfg)
    return pv_integrate_folded(
        i_lambda_fold(phi, lam), y, cfg,
        upper=T,
        tail_bound=i_lambda_tail_bound(phi, lam, y, T),
        scale=_fold_scale(phi, lam, y, cfg),
    )


def apply_I_lambda_unsplit(phi: TestFunction, lam: float, y: float, cfg: PVConfig) -> float:
    return evaluate_I_lambda_unsplit(phi, lam, y, cfg).value


# --- GRID EVALUATION ---

def evaluate(kind: OperatorKind, phi: TestFunction, y: float, cfg: PVConfig, lam: float | None = None) -> QuadResult:
    if kind == OperatorKind.H:
        return evaluate_H(phi, y, cfg)
    if kind == OperatorKind.I:
        return evaluate_I(phi, y, cfg)
    return evaluate_I_lambda(phi, lam, y, cfg)


def evaluate_request(request: OperatorRequest) -> list[OperatorRow]:
    """One row per grid point, in grid order."""
    rows = []
    for y in request.grid.y_grid:
        result = evaluate(request.operator_kind, request.function, y, request.cfg, request.lam)
        if not result.converged:
            logger.warning(f"{request.operator_kind.value}({request.function.label}) at y={y} did not converge")
        rows.append(OperatorRow(
            y=y,
            value=result.value,
            error_estimate=result.error_estimate,
            truncation_bound=result.truncation_bound,
        ))
    logger.info(f"Evaluated {request.operator_kind.value}({request.function.label}) on {len(rows)} points")
    return rows
