import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.app.schemas.operators import GridSpec, OperatorKind, OperatorRequest
from src.app.schemas.quadrature import PVConfig
from src.app.services import catalog_service
from src.app.services import funcspace_service as fs
from src.app.services import operator_service as ops
from src.app.services.scaling_service import kernel_indicator_gap
from src.app.utils.errors import DomainError, SingularityError

CFG = PVConfig.from_settings()


# --- KERNELS ---

@settings(max_examples=60, deadline=None)
@given(t=st.floats(min_value=1e-6, max_value=700.0))
def test_kernel_K_matches_mpmath(t):
    exact = float(1 / (2 * mpmath.sinh(mpmath.mpf(t))))
    assert math.isclose(ops.kernel_K(t), exact, rel_tol=1e-12)
    assert ops.kernel_K(-t) == -ops.kernel_K(t)


def test_kernel_K_prime():
    print("Testing K'...")
    for t in (1e-3, 0.5, 2.0, 30.0):
        exact = float(mpmath.diff(lambda s: 1 / (2 * mpmath.sinh(s)), mpmath.mpf(t)))
        assert math.isclose(ops.kernel_K_prime(t), exact, rel_tol=1e-10)
        assert ops.kernel_K_prime(-t) == ops.kernel_K_prime(t)
    with pytest.raises(SingularityError):
        ops.kernel_K(0.0)
    with pytest.raises(SingularityError):
        ops.kernel_K_prime(np.array([1.0, 0.0]))
    print("✅ K' passed!")


def test_kernel_K_lambda_overflow_safe():
    print("Testing K_lambda at large λ|y|...")
    lam, y, eta = 1e4, 2.0, 1.5
    value = ops.kernel_K_lambda(lam, y, eta)
    assert math.isfinite(value)
    mp = mpmath.mpf
    exact = mpmath.cosh(mp(lam) * y) / (2 * mpmath.sinh(mp(lam) * (y - eta)) * mpmath.cosh(mp(lam) * eta))
    assert math.isclose(value, float(exact), rel_tol=1e-12)
    with pytest.raises(SingularityError):
        ops.kernel_K_lambda(lam, 1.0, 1.0)
    print("✅ K_lambda passed!")


def test_kernel_pointwise_limit():
    print("Testing K_lambda -> indicator...")
    rows = kernel_indicator_gap(1e3, 1.0, [-0.5, 0.2, 0.5, 0.8, 1.5])
    for row in rows:
        assert row["gap"] < 1e-8, row
    assert [row["indicator"] for row in rows] == [0.0, 1.0, 1.0, 1.0, 0.0]
    print("✅ Pointwise limit passed!")


def test_line_kernel():
    print("Testing the kernel on the line Re z = a...")
    a = 0.25
    for y, eta in [(0.3, -1.2), (2.0, 0.5), (-1.0, 1.0)]:
        z, xi = ops.map_real_to_line(y, a), ops.map_real_to_line(eta, a)
        assert math.isclose(ops.map_line_to_real(z, a), y, rel_tol=1e-14)
        k = ops.kernel_k_line(z, xi, a)
        assert abs(k.imag) < 1e-12 * abs(k.real)
        assert math.isclose(k.real, ops.kernel_K_lambda(1.0, y, eta), rel_tol=1e-12)
        # odd under ξ ↔ z up to the cosh ratio, like K_1
        swapped = ops.kernel_k_line(xi, z, a)
        assert math.isclose(swapped.real * math.cosh(y) ** 2, -k.real * math.cosh(eta) ** 2, rel_tol=1e-10)
    with pytest.raises(DomainError):
        ops.map_line_to_real(complex(0.3, 1.0), a)
    print("✅ Line kernel passed!")


# --- H ---

def test_H_of_sin_closed_form():
    print("Testing H(sin) against its closed form...")
    # H(sin)(y) = -cos(y)·∫_0^∞ sin t / sinh t dt
    c = float(mpmath.quad(lambda t: mpmath.sin(t) / mpmath.sinh(t), [0, mpmath.inf]))
    assert math.isclose(c, math.pi / 2 * math.tanh(math.pi / 2), rel_tol=1e-12)
    sin = catalog_service.get_function("sin")
    for y in (-2.0, 0.0, 0.4, 3.0):
        result = ops.evaluate_H(sin, y, CFG)
        assert abs(result.value + c * math.cos(y)) < 1e-8
        assert result.truncation_bound < 1e-12
    print("✅ H(sin) passed!")


def test_H_of_poly1_is_constant():
    print("Testing H(x)...")
    # ∫_0^∞ K(t)(-2t) dt = -π²/4
    poly1 = catalog_service.get_function("poly:1")
    for y in (-1.0, 0.5, 4.0):
        assert abs(ops.apply_H(poly1, y, CFG) + math.pi ** 2 / 4) < 1e-8
    print("✅ H(x) passed!")


@settings(max_examples=15, deadline=None)
@given(y=st.floats(min_value=0.05, max_value=3.0))
def test_H_maps_even_to_odd(y):
    lorentzian = catalog_service.get_function("lorentzian")
    assert abs(ops.apply_H(lorentzian, y, CFG) + ops.apply_H(lorentzian, -y, CFG)) < 1e-9


def test_H_rejects_fast_growth():
    print("Testing H domain...")
    with pytest.raises(DomainError):
        ops.apply_H(catalog_service.get_function("cosh"), 0.5, CFG)
    print("✅ H domain passed!")


# --- I ---

def test_I_of_constants():
    print("Testing I(1) = y and I(cosh) = 0...")
    const1 = catalog_service.get_function("const1")
    cosh = catalog_service.get_function("cosh")
    for y in (-1.5, 0.5, 1.0, 2.0):
        assert abs(ops.apply_I(const1, y, CFG) - y) < 1e-7
        assert abs(ops.apply_I(cosh, y, CFG)) < 1e-8
    print("✅ I of constants passed!")


def test_I_paths_agree():
    print("Testing conjugated I against the direct kernel...")
    for label in ("const1", "sin", "poly:1"):
        phi = catalog_service.get_function(label)
        for y in (0.3, 1.2):
            assert abs(ops.apply_I(phi, y, CFG) - ops.apply_I_direct(phi, y, CFG)) < 10 * CFG.abs_tol, (label, y)
    with pytest.raises(DomainError):
        ops.apply_I(catalog_service.get_function("poly:1").model_copy(
            update={"claimed_class": fs.SchauderParams(m=1, kappa=2.0)}), 0.5, CFG)
    print("✅ I paths passed!")


# --- I_LAMBDA ---

def test_I_lambda_of_one():
    print("Testing I_lambda(1) = y...")
    const1 = catalog_service.get_function("const1")
    for lam in (1.0, 100.0, 1e4):
        for y in (-2.0, 0.0, 0.5, 1.0, 2.0):
            assert abs(ops.apply_I_lambda(const1, lam, y, CFG) - y) < 1e-7, (lam, y)
    print("✅ I_lambda(1) passed!")


def test_I_lambda_scaling_identity():
    print("Testing I_lambda(φ)(y) = I(φ(·/λ))(λy)/λ...")
    sin = catalog_service.get_function("sin")
    for lam, y in [(4.0, 0.3), (10.0, 1.1)]:
        direct = ops.apply_I_lambda(sin, lam, y, CFG)
        rescaled = ops.apply_I_lambda(fs.dilate(sin, lam), 1.0, lam * y, CFG) / lam
        assert abs(direct - rescaled) < 1e-8
    print("✅ Scaling identity passed!")


def test_I_lambda_split_matches_unsplit():
    print("Testing the |t| = y split...")
    for label in ("sin", "poly:2", "tanh"):
        phi = catalog_service.get_function(label)
        for lam, y in [(10.0, 1.0), (100.0, 0.3)]:
            split = ops.apply_I_lambda(phi, lam, y, CFG)
            plain = ops.apply_I_lambda_unsplit(phi, lam, y, CFG)
            assert abs(split - plain) < 10 * CFG.abs_tol * max(1.0, abs(split)), (label, lam, y)
    print("✅ Split vs unsplit passed!")


def test_I_lambda_converges_to_antiderivative():
    print("Testing I_lambda -> ∫_0^y...")
    sin = catalog_service.get_function("sin")
    gaps = [abs(ops.apply_I_lambda(sin, lam, 1.0, CFG) - (1.0 - math.cos(1.0))) for lam in (10.0, 100.0, 1000.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < gaps[0] / 5
    print("✅ Convergence passed!")


def test_evaluate_request():
    print("Testing grid evaluation...")
    request = OperatorRequest(
        operator_kind=OperatorKind.I_LAMBDA,
        function=catalog_service.get_function("const1"),
        grid=GridSpec(y_grid=(0.5, 1.0, 2.0)),
        lam=100.0,
    )
    rows = ops.evaluate_request(request)
    assert [row.y for row in rows] == [0.5, 1.0, 2.0]
    for row in rows:
        assert abs(row.value - row.y) < 1e-7
        assert row.error_estimate >= 0 and row.truncation_bound >= 0
    with pytest.raises(ValueError):
        OperatorRequest(
            operator_kind=OperatorKind.I_LAMBDA,
            function=catalog_service.get_function("const1"),
            grid=GridSpec(y_grid=(1.0,)),
        )
    print("✅ Grid evaluation passed!")


if __name__ == "__main__":
    test_kernel_K_prime()
    test_kernel_K_lambda_overflow_safe()
    test_kernel_pointwise_limit()
    test_line_kernel()
    test_H_of_sin_closed_form()
    test_H_of_poly1_is_constant()
    test_H_rejects_fast_growth()
    test_I_of_constants()
    test_I_paths_agree()
    test_I_lambda_of_one()
    test_I_lambda_scaling_identity()
    test_I_lambda_split_matches_unsplit()
    test_I_lambda_converges_to_antiderivative()
    test_evaluate_request()
