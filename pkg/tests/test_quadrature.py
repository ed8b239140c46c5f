import math
from unittest.mock import patch

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.app.schemas.quadrature import PVConfig
from src.app.services import catalog_service
from src.app.services import operator_service as ops
from src.app.services import quadrature_service as quad
from src.app.utils.errors import DomainError, NaNIntegrandError, NonLipschitzInputError
from src.app.utils.expnorm import inv_two_sinh

CFG = PVConfig.from_settings()
TIGHT = PVConfig.from_settings(rel_tol=1e-12)


def test_integrate_smooth():
    print("Testing adaptive Gauss-Kronrod...")
    result = quad.integrate_smooth(np.sin, 0.0, math.pi, CFG)
    assert abs(result.value - 2.0) < 1e-12
    assert result.converged

    flipped = quad.integrate_smooth(np.sin, math.pi, 0.0, CFG)
    assert flipped.value == -result.value

    # kink at 1/3 resolved by the breakpoint
    kinked = quad.integrate_smooth(lambda x: np.abs(x - 1.0 / 3.0), 0.0, 1.0, CFG, breakpoints=[1.0 / 3.0])
    assert abs(kinked.value - 5.0 / 18.0) < 1e-13
    print("✅ Adaptive Gauss-Kronrod passed!")


def test_kronrod_rule():
    print("Testing the derived Gauss-Kronrod rule...")
    nodes, kronrod, gauss = quad.kronrod_rule(7)
    assert nodes.shape == kronrod.shape == gauss.shape == (15,)
    assert np.all(np.diff(nodes) > 0)
    assert abs(nodes[-1] - 0.991455371120812639) < 1e-13
    assert abs(nodes[7]) < 1e-15
    assert np.all(kronrod > 0)
    assert np.count_nonzero(gauss) == 7
    # Gauss on the odd-indexed nodes, Kronrod extension on the even ones
    assert np.all(gauss[1::2] > 0)
    for k in range(23):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(kronrod @ nodes ** k - exact) < 1e-13, k
        if k < 14:
            assert abs(gauss @ nodes ** k - exact) < 1e-13, k
    with pytest.raises(DomainError):
        quad.kronrod_rule(0)
    print("✅ Gauss-Kronrod rule passed!")


def test_integrate_panels_errors():
    print("Testing panel validation...")
    with pytest.raises(DomainError):
        quad.integrate_panels(np.cos, [0.0, 1.0, 0.5], CFG)
    with pytest.raises(NaNIntegrandError):
        quad.integrate_smooth(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0, CFG)
    assert quad.integrate_panels(np.cos, [1.0], CFG).value == 0.0
    print("✅ Panel validation passed!")


def test_panel_budget_flags_nonconvergence():
    print("Testing refinement cap...")
    capped = CFG.model_copy(update={"max_refine_depth": 1})
    result = quad.integrate_smooth(lambda x: 1.0 / np.sqrt(x), 1e-12, 1.0, capped)
    assert not result.converged
    print("✅ Refinement cap passed!")


def test_exp_poly_tail_matches_mpmath():
    print("Testing exponential-polynomial tails...")
    for m, rate, S in [(0, 1.0, 5.0), (2, 1.5, 3.0), (3, 0.5, 40.0)]:
        exact = mpmath.quad(lambda s: mpmath.exp(-rate * s) * (1 + s) ** m, [S, mpmath.inf])
        assert math.isclose(quad.exp_poly_tail(m, rate, S), float(exact), rel_tol=1e-12)

    # m < 0 returns a majorant
    exact = mpmath.quad(lambda s: mpmath.exp(-s) / (1 + s), [4, mpmath.inf])
    assert quad.exp_poly_tail(-1, 1.0, 4.0) >= float(exact)

    with pytest.raises(DomainError):
        quad.truncation_bound_exp(0, 1.0, 10.0)
    print("✅ Tails passed!")


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(min_value=-2, max_value=4),
    kappa=st.floats(min_value=-1.0, max_value=0.9),
    T=st.floats(min_value=0.0, max_value=200.0),
    step=st.floats(min_value=1e-3, max_value=50.0),
)
def test_truncation_bound_non_increasing(m, kappa, T, step):
    assert quad.truncation_bound_exp(m, kappa, T + step) <= quad.truncation_bound_exp(m, kappa, T)


def test_fold_agrees_with_excision_oracle():
    print("Testing folded P.V. against the excision oracle...")
    for label in ("sin", "lorentzian", "tanh", "poly:1"):
        psi = catalog_service.get_function(label)
        for y in (-0.7, 0.3, 1.9):
            folded = ops.apply_H(psi, y, TIGHT)
            oracle = quad.pv_excision_oracle(
                lambda s: inv_two_sinh(s) * np.asarray(psi.eval(y - s), dtype=float),
                y, TIGHT, upper=ops.h_cutoff(psi, y, TIGHT),
            )
            assert abs(folded - oracle) < 10 * CFG.abs_tol * max(1.0, abs(oracle)), (label, y, folded, oracle)
    print("✅ Fold vs oracle passed!")


def test_excision_oracle_is_independent():
    print("Testing the excision oracle without the Gauss-Kronrod engine...")
    c = float(mpmath.quad(lambda t: mpmath.sin(t) / mpmath.sinh(t), [0, mpmath.inf]))
    sin = catalog_service.get_function("sin")
    engine_off = AssertionError("oracle reached the adaptive engine")
    with patch.object(quad, "_gk15", side_effect=engine_off), \
            patch.object(quad, "integrate_panels", side_effect=engine_off):
        for y in (0.0, 0.4, 2.5):
            oracle = quad.pv_excision_oracle(
                lambda s: inv_two_sinh(s) * np.sin(y - s), y, TIGHT, upper=40.0,
            )
            assert abs(oracle + c * math.cos(y)) < 1e-8, (y, oracle)
    print("✅ Independent oracle passed!")


def test_parity_zero_cases():
    print("Testing parity zero cases...")
    const1 = catalog_service.get_function("const1")
    lorentzian = catalog_service.get_function("lorentzian")
    for y in (-2.0, 0.5, 3.0):
        assert abs(ops.apply_H(const1, y, CFG)) <= CFG.abs_tol
    # H of an even function vanishes at 0
    assert abs(ops.apply_H(lorentzian, 0.0, CFG)) <= CFG.abs_tol
    print("✅ Parity zero cases passed!")


def test_jump_is_rejected():
    print("Testing non-Hölder input detection...")
    step = catalog_service.get_function("const1").model_copy(update={
        "label": "step",
        "eval": lambda x: np.where(np.asarray(x, dtype=float) < 0.5, 0.0, 1.0),
    })
    with pytest.raises(NonLipschitzInputError):
        ops.apply_H(step, 0.5, CFG)
    print("✅ Non-Hölder input detection passed!")


if __name__ == "__main__":
    test_integrate_smooth()
    test_kronrod_rule()
    test_integrate_panels_errors()
    test_panel_budget_flags_nonconvergence()
    test_exp_poly_tail_matches_mpmath()
    test_fold_agrees_with_excision_oracle()
    test_excision_oracle_is_independent()
    test_parity_zero_cases()
    test_jump_is_rejected()
