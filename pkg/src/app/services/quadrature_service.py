"""
Adaptive Gauss–Kronrod integration and the principal-value fold.

Every integrand is called with a 1-D numpy array of nodes and must return an
array of the same shape (scalars broadcast). Panel sums are reduced in
left-endpoint order with np.sum, so results do not depend on refinement order.
"""
import logging
import math
import warnings
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, special

from src.app.schemas.quadrature import PVConfig, QuadResult
from src.app.utils.errors import DomainError, NaNIntegrandError, NonLipschitzInputError

logger = logging.getLogger(__name__)

# --- GAUSS-KRONROD 7/15 ---

def kronrod_rule(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gauss–Kronrod (n, 2n+1) rule on [-1, 1]: nodes left to right, Kronrod
    weights, and the embedded Gauss weights (zero at the extension nodes).

    The extension nodes are the roots of the Stieltjes polynomial E_{n+1},
    orthogonal to every polynomial of degree <= n under the sign-changing
    weight P_n. E_{n+1} = P_{n+1} + Σ c_k P_k is solved for in the Legendre
    basis with a Gauss rule exact for the degree-3n+1 products.
    """
    if n < 1:
        raise DomainError(f"Kronrod rule needs n >= 1, got {n}")
    g_nodes, g_weights = special.roots_legendre(n)

    x, w = special.roots_legendre(2 * n + 2)
    P = legendre.legvander(x, n + 1)
    weighted = (w * P[:, n])[:, None] * P[:, : n + 1]
    coef = np.linalg.solve(weighted.T @ P[:, : n + 1], -weighted.T @ P[:, n + 1])
    stieltjes = legendre.Legendre(np.append(coef, 1.0))
    extension = np.sort(stieltjes.roots().real)
    # one Newton step polishes the companion-matrix roots
    extension = extension - stieltjes(extension) / stieltjes.deriv()(extension)

    nodes = np.sort(np.concatenate([g_nodes, extension]))
    nodes = 0.5 * (nodes - nodes[::-1])
    moments = np.zeros(2 * n + 1)
    moments[0] = 2.0
    kronrod = np.linalg.solve(legendre.legvander(nodes, 2 * n).T, moments)
    kronrod = 0.5 * (kronrod + kronrod[::-1])

    gauss = np.zeros(2 * n + 1)
    gauss[np.argmin(np.abs(nodes[:, None] - g_nodes[None, :]), axis=0)] = g_weights
    return nodes, kronrod, gauss


_NODES, _KRONROD, _GAUSS = kronrod_rule(7)

_EPS = np.finfo(float).eps

Integrand = Callable[[np.ndarray], np.ndarray]


def _evaluate(f: Integrand, x: np.ndarray) -> np.ndarray:
    values = np.asarray(f(x), dtype=float)
    values = np.broadcast_to(values, x.shape)
    if not np.all(np.isfinite(values)):
        bad = x[~np.isfinite(values)]
        raise NaNIntegrandError(f"Integrand is not finite at {bad.ravel()[:3].tolist()}")
    return values


def _gk15(f: Integrand, lo: np.ndarray, hi: np.ndarray):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    fx = _evaluate(f, x.ravel()).reshape(x.shape)
    kronrod = half * (fx @ _KRONROD)
    gauss = half * (fx @ _GAUSS)
    resabs = np.abs(half) * (np.abs(fx) @ _KRONROD)
    return kronrod, np.abs(kronrod - gauss), resabs


def integrate_panels(
    f: Integrand,
    edges: Sequence[float],
    cfg: PVConfig,
    label: str = "integral",
) -> QuadResult:
    """
    Adaptive GK15 over the initial panels given by `edges` (strictly increasing).
    Panels whose error exceeds their width-share of the tolerance are bisected
    in batches until every panel converges or a refinement cap is hit.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return QuadResult(value=0.0, error_estimate=0.0, panels_used=0)
    if np.any(np.diff(edges) <= 0):
        raise DomainError(f"{label}: panel edges must be strictly increasing")

    total_width = edges[-1] - edges[0]
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    done_lo, done_val, done_err = [], [], []
    converged = True
    depth = 0

    while True:
        val, err, resabs = _gk15(f, lo, hi)
        settled = sum(float(np.sum(v)) for v in done_val)
        estimate = settled + float(np.sum(val))
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(estimate))
        local = tol * (hi - lo) / total_width
        ok = (err <= local) | (err <= 50.0 * _EPS * resabs)

        done_lo.append(lo[ok])
        done_val.append(val[ok])
        done_err.append(err[ok])
        if ok.all():
            break

        n_panels = sum(a.size for a in done_lo) + 2 * int((~ok).sum())
        if depth >= cfg.max_refine_depth or n_panels > cfg.max_panels:
            logger.warning(
                f"{label}: refinement stopped at depth {depth} with {n_panels} panels; "
                f"error estimate {float(np.sum(err[~ok])):.3e} exceeds tolerance {tol:.3e}"
            )
            done_lo.append(lo[~ok])
            done_val.append(val[~ok])
            done_err.append(err[~ok])
            converged = False
            break

        mid = 0.5 * (lo[~ok] + hi[~ok])
        lo, hi = np.concatenate([lo[~ok], mid]), np.concatenate([mid, hi[~ok]])
        depth += 1

    all_lo = np.concatenate(done_lo)
    order = np.argsort(all_lo, kind="stable")
    values = np.concatenate(done_val)[order]
    errors = np.concatenate(done_err)[order]
    return QuadResult(
        value=float(np.sum(values)),
        error_estimate=float(np.sum(errors)),
        panels_used=int(values.size),
        converged=converged,
    )


def _edges(a: float, b: float, n: int, breakpoints: Iterable[float] = ()) -> np.ndarray:
    base = np.linspace(a, b, n + 1)
    inner = [p for p in breakpoints if a < p < b]
    edges = np.unique(np.concatenate([base, np.asarray(inner, dtype=float)]))
    # drop slivers that would make GK nodes coincide
    keep = np.concatenate([[True], np.diff(edges) > 1e-14 * max(1.0, abs(b - a))])
    return edges[keep]


def integrate_smooth(
    f: Integrand,
    a: float,
    b: float,
    cfg: PVConfig,
    breakpoints: Iterable[float] = (),
) -> QuadResult:
    """
    ∫_a^b f by adaptive GK15 starting from `cfg.base_panels` uniform panels
    plus any interior breakpoints.
    """
    if a == b:
        return QuadResult(value=0.0, error_estimate=0.0, panels_used=0)
    if a > b:
        return integrate_smooth(f, b, a, cfg, breakpoints).scaled(-1.0)
    return integrate_panels(f, _edges(a, b, cfg.base_panels, breakpoints), cfg, label="integrate_smooth")


def composite_rule(edges: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the fixed 15-point Kronrod rule on every panel."""
    edges = np.asarray(edges, dtype=float)
    center = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (center[:, None] + half[:, None] * _NODES[None, :]).ravel()
    weights = (half[:, None] * _KRONROD[None, :]).ravel()
    return nodes, weights


# --- PRINCIPAL VALUE ---

def _fold_zone_edges(r0: float, depth: int) -> np.ndarray:
    # (0, r0·2^-depth), then geometric panels up to r0
    return np.concatenate([[0.0], r0 * 2.0 ** -np.arange(depth, -1, -1, dtype=float)])


def _check_near_zero(g: Integrand, r0: float, depth: int, y: float, scale: float | None) -> None:
    """
    Samples |g| at t = r0·2^-j. A 1/t blow-up whose size t·|g| stands clear of
    round-off (relative to `scale`, the magnitude of t·g without cancellation)
    means the input jumps at y.
    """
    levels = np.arange(max(depth - 16, 1), depth + 1)
    t = r0 * 2.0 ** -levels.astype(float)
    mags = np.abs(_evaluate(g, t))
    reference = float(np.max(np.abs(_evaluate(g, r0 * np.array([1.0, 0.5, 0.25])))))
    if not np.all(mags > 0):
        return
    if scale is None:
        scale = r0 * reference
    slope = float(np.polyfit(np.log(t), np.log(mags), 1)[0])
    deepest = float(mags[-1])
    size = deepest * float(t[-1])
    if slope <= -0.95 and deepest > 1e3 * reference and size > 1e-8 * scale:
        raise NonLipschitzInputError(
            f"Folded integrand diverges like t^{slope:.2f} as t -> 0 at y={y}; "
            f"the input is not Hölder continuous at y"
        )
    if slope < -0.05 and deepest > 10.0 * reference and size > 1e-12 * scale:
        logger.warning(f"Fold at y={y}: integrand grows like t^{slope:.2f} near 0 (Hölder-only input)")


def pv_integrate_folded(
    g: Callable[[float, np.ndarray], np.ndarray],
    y: float,
    cfg: PVConfig,
    upper: float | None = None,
    tail_bound: float = 0.0,
    breakpoints: Iterable[float] = (),
    scale: float | None = None,
) -> QuadResult:
    """
    ∫_0^T g(y, t) dt for the folded integrand g(y, t) = K(t)(ψ(y-t) - ψ(y+t)).

    The zone (0, r0) is covered by geometrically graded panels, so t = 0 is
    never sampled; `tail_bound` is the caller's majorant of ∫_T^∞ |g|.
    `scale` is the size of t·|g| before cancellation (about |ψ(y)|/2 for the
    plain kernel) and sets the round-off floor of the divergence check.
    """
    T = cfg.truncation_radius if upper is None else float(upper)
    if T <= 0:
        return QuadResult(value=0.0, error_estimate=0.0, panels_used=0, truncation_bound=tail_bound)
    r0 = min(cfg.fold_radius, 0.5 * T)
    depth = cfg.max_refine_depth

    def integrand(t):
        return g(y, t)

    _check_near_zero(integrand, r0, depth, y, scale)
    edges = np.concatenate([_fold_zone_edges(r0, depth), _edges(r0, T, cfg.base_panels, breakpoints)[1:]])
    inner = [p for p in breakpoints if 0 < p < r0]
    if inner:
        edges = np.unique(np.concatenate([edges, inner]))
    result = integrate_panels(integrand, edges, cfg, label=f"pv fold at y={y}")
    return result.model_copy(update={"truncation_bound": tail_bound})


def pv_excision_oracle(
    h: Integrand,
    y: float,
    cfg: PVConfig,
    eps_list: Sequence[float] = (1e-2, 1e-3, 1e-4),
    upper: float | None = None,
) -> float:
    """
    Symmetric ε-excision ∫_{ε<|s|<T} h(s) ds, with h(s) = K(s)ψ(y-s), extrapolated
    to ε = 0. The excision error is c1·ε + c3·ε³, removed by two Richardson steps.

    Each side goes through QUADPACK (scipy.integrate.quad) rather than the
    Gauss–Kronrod engine above, so the check shares no quadrature code with
    the fold.
    """
    if len(eps_list) != 3:
        raise DomainError("pv_excision_oracle needs exactly three ε values")
    T = cfg.truncation_radius if upper is None else float(upper)
    epsabs = cfg.abs_tol * 1e-3
    epsrel = max(cfg.rel_tol * 1e-3, 1e-13)

    def scalar(side: float) -> Callable[[float], float]:
        return lambda s: float(np.asarray(h(np.array([side * s]))).ravel()[0])

    def excised(eps: float) -> float:
        decades = eps * 10.0 ** np.arange(1, int(math.ceil(math.log10(T / eps))))
        points = decades.tolist() or None
        total = 0.0
        for side in (1.0, -1.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                value, err = integrate.quad(
                    scalar(side), eps, T, points=points, limit=500, epsabs=epsabs, epsrel=epsrel,
                )
            if err > 10 * cfg.abs_tol:
                logger.warning(f"Excision oracle at y={y}, ε={eps}: QUADPACK error estimate {err:.2e}")
            total += value
        return total

    e1, e2, e3 = sorted(eps_list, reverse=True)
    i1, i2, i3 = excised(e1), excised(e2), excised(e3)
    q1, q2 = e1 / e2, e2 / e3
    r1 = (q1 * i2 - i1) / (q1 - 1.0)
    r2 = (q2 * i3 - i2) / (q2 - 1.0)
    q = q2 ** 3
    return float((q * r2 - r1) / (q - 1.0))


# --- TAIL BOUNDS ---

def log_exp_poly_tail(m: int, rate: float, S: float) -> float:
    """log of exp_poly_tail(m, rate, S), safe when rate·S is large."""
    if rate <= 0:
        raise DomainError(f"tail rate must be positive, got {rate}")
    if S < 0:
        raise DomainError(f"tail start must be non-negative, got {S}")
    if m < 0:
        return m * math.log1p(S) - rate * S - math.log(rate)
    terms = [
        math.lgamma(m + 1) - math.lgamma(m - j + 1) + (m - j) * math.log1p(S) - (j + 1) * math.log(rate)
        for j in range(m + 1)
    ]
    top = max(terms)
    return -rate * S + top + math.log(sum(math.exp(v - top) for v in terms))


def exp_poly_tail(m: int, rate: float, S: float) -> float:
    """
    ∫_S^∞ e^{-rate·s}(1+s)^m ds, exact for m >= 0; for m < 0 the majorant
    (1+S)^m e^{-rate·S}/rate.
    """
    return math.exp(log_exp_poly_tail(m, rate, S))


def truncation_bound_exp(m: int, kappa: float, T: float) -> float:
    """Upper bound for ∫_T^∞ e^{-(1-κ)t}(1+t)^m dt."""
    if kappa >= 1:
        raise DomainError(f"kappa must be < 1 for an integrable tail, got {kappa}")
    return exp_poly_tail(m, 1.0 - kappa, T)
