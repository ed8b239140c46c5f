import math

import numpy as np
import pytest

from src.app.config import get_settings
from src.app.schemas.certificates import BoundCertificate
from src.app.schemas.funcspace import SchauderParams, WeightKind
from src.app.schemas.operators import OperatorKind
from src.app.schemas.quadrature import PVConfig
from src.app.services import catalog_service
from src.app.services import certificate_service as certs
from src.app.services import scaling_service
from src.app.utils.errors import DomainError, UnknownClaimError

CFG = PVConfig.from_settings()


# --- HELPERS ---

def test_growth_rate():
    print("Testing growth normalization...")
    assert math.isclose(certs.growth_rate(1.0, 1.1), 0.1)
    # a 4x step counts as two doublings
    assert math.isclose(certs.growth_rate(1.0, 1.21, ratio=4.0), 0.1)
    assert certs.growth_rate(0.0, 0.0) == 0.0
    assert certs.growth_rate(0.0, 1.0) == math.inf
    assert math.isclose(certs.sweep_growth([10.0, 20.0, 40.0], [1.0, 1.02, 1.05]), 1.05 / 1.02 - 1.0)
    print("✅ Growth normalization passed!")


def _cert(claim_id, constant, passed, label):
    return BoundCertificate(
        claim_id=claim_id, rhs_form="1", measured_constant=constant, passed=passed,
        details={"growth": 0.01 * constant, "function": label},
    )


def test_merge_certificates():
    print("Testing certificate merging...")
    merged = certs.merge_certificates("X", [_cert("X", 1.0, True, "a"), _cert("X", 3.0, False, "b")])
    assert merged.measured_constant == 3.0
    assert not merged.passed
    assert set(merged.details["parts"]) == {"a", "b"}
    assert merged.to_json_dict()["pass"] is False
    with pytest.raises(DomainError):
        certs.merge_certificates("X", [])
    print("✅ Merging passed!")


def test_unknown_claim():
    print("Testing the claim registry...")
    assert len(certs.CLAIMS) == 17
    with pytest.raises(UnknownClaimError):
        certs.run_claim("Lemma99")
    print("✅ Claim registry passed!")


# --- KERNEL AND LEMMA 1 ---

def test_kernel_bounds():
    print("Testing kernel bounds...")
    cert = certs.certify_kernel_bounds()
    assert cert.claim_id == "Eq9"
    assert cert.passed
    forms = cert.details["forms"]
    assert forms["K_near"] <= 0.5 + 1e-12
    assert forms["K_far"] <= 1.0 / (1.0 - math.exp(-2.0)) + 1e-9
    for name, bound in certs.KERNEL_BOUNDS.items():
        assert cert.details["refined_forms"][name] <= bound
    print("✅ Kernel bounds passed!")


def test_lemma1_rhs_forms():
    print("Testing Lemma 1 right-hand sides...")
    assert math.isclose(certs.lemma1_rhs(1, 0.5, 4.0), 5.0 * math.exp(2.0))
    assert math.isclose(certs.lemma1_rhs(0, -1.0, 4.0), 5.0 * math.exp(-4.0))
    assert math.isclose(certs.lemma1_rhs(-1, -1.0, 4.0), math.log(5.0) * math.exp(-4.0))
    # κ = 0, m = 0: ∫e^{-|z|} dz = 2
    assert abs(certs.lemma1_integral(0, 0.0, 5.0, CFG) - 2.0) < 1e-9
    print("✅ Lemma 1 forms passed!")


@pytest.mark.slow
def test_lemma1_certificates():
    print("Testing Lemma 1 certificates...")
    for m, kappa in [(0, 0.0), (1, 0.5), (-1, -0.5), (0, -1.0), (1, -1.0), (-1, -1.0)]:
        cert = certs.certify_lemma1(m, kappa, cfg=CFG)
        assert cert.claim_id == ("Lemma1.12" if kappa > -1 else "Lemma1.13")
        assert math.isfinite(cert.measured_constant) and cert.measured_constant > 0
        assert cert.details["growth"] < 0.05
        assert cert.passed
    with pytest.raises(DomainError):
        certs.certify_lemma1(0, 0.0, x_grid=[2.0, 5.0])
    with pytest.raises(DomainError):
        certs.certify_lemma1(0, 1.0)
    print("✅ Lemma 1 certificates passed!")


# --- THEOREMS 1 AND 2 ---

def test_target_space():
    print("Testing target spaces...")
    interior = SchauderParams(m=0, kappa=0.0)
    assert certs.target_space(OperatorKind.H, interior) == interior
    assert certs.target_space(OperatorKind.H, SchauderParams(m=0, kappa=-1.0)).m == 1
    log_target = certs.target_space(OperatorKind.H, SchauderParams(m=-1, kappa=-1.0))
    assert log_target.weight_kind == WeightKind.LOGARITHMIC
    assert certs.target_space(OperatorKind.I, SchauderParams(m=2, kappa=0.0)).m == 3
    assert certs.target_space(OperatorKind.I, SchauderParams(m=0, kappa=1.5)).m == 0
    with pytest.raises(DomainError):
        certs.target_space(OperatorKind.H, SchauderParams(m=0, kappa=1.0))
    with pytest.raises(DomainError):
        certs.target_space(OperatorKind.I, SchauderParams(m=-2, kappa=0.0))
    print("✅ Target spaces passed!")


def test_operator_bound_validation():
    print("Testing boundedness certificate inputs...")
    with pytest.raises(DomainError):
        certs.certify_H_bound(SchauderParams(m=0, kappa=1.0), [catalog_service.get_function("sin")])
    with pytest.raises(DomainError):
        certs.certify_I_bound(SchauderParams(m=0, kappa=-0.5), [catalog_service.get_function("sin")])
    with pytest.raises(DomainError):
        certs.certify_operator_bound(OperatorKind.H, SchauderParams(), [])
    print("✅ Boundedness inputs passed!")


@pytest.mark.slow
def test_endpoint_upgrades():
    print("Testing endpoint target upgrades...")
    h_cert = certs.run_claim("Thm1.11", CFG)
    assert h_cert.passed
    assert h_cert.details["naive_growth"] >= 0.10 > h_cert.details["growth"]

    i_cert = certs.run_claim("Thm2.endpoint", CFG)
    assert i_cert.passed
    # I(1) = y, so the unweighted ratio doubles with the window
    assert i_cert.details["naive_growth"] > 0.5
    print("✅ Endpoint upgrades passed!")


# --- LEMMA 3 ---

def test_lemma3_small_grid():
    print("Testing Lemma 3 brackets...")
    a, b = certs.certify_lemma3(
        lam_grid=[1.0, 10.0, 100.0], t_fracs=[0.1, 0.5, 0.9], y_grid=[0.5, 2.0],
        rho_grid=np.linspace(-0.9, 0.9, 7), cfg=CFG,
    )
    assert a.passed and b.passed
    assert a.details["violations"] == 0 and b.details["violations"] == 0
    assert 0.5 < a.details["min_ratio"]
    assert 0.5 <= b.details["min_moment"] <= b.details["max_moment"] <= 2.0
    with pytest.raises(DomainError):
        certs.certify_lemma3(t_fracs=[0.0, 0.5])
    print("✅ Lemma 3 passed!")


@pytest.mark.slow
def test_lemma3_full_grid():
    print("Testing Lemma 3 on the full grid...")
    a, b = certs.certify_lemma3(cfg=CFG)
    assert a.details["n_points"] == 10_000
    assert a.passed and b.passed
    print("✅ Lemma 3 full grid passed!")


# --- LEMMAS 4 TO 8 ---

def test_lemma5_pointwise():
    print("Testing Lemma 5 at single points...")
    for label in ("const1", "sin", "poly:1"):
        phi = catalog_service.get_function(label)
        m = phi.claimed_class.m
        for lam, y, frac in [(50.0, 0.5, 0.5), (200.0, 1.0, 0.9), (400.0, 2.0, 0.1)]:
            r = certs.certify_lemma5(phi, lam, y, frac * y, cfg=CFG)
            assert r.a <= 1.0 + 1e-6, (label, lam, y, r)
            assert r.b <= 2.0 ** (m + 2), (label, lam, y, r)
            assert r.c <= 4.0 * 2.0 ** m, (label, lam, y, r)
    with pytest.raises(DomainError):
        certs.certify_lemma5(catalog_service.get_function("sin"), 50.0, 1.0, 1.0)
    print("✅ Lemma 5 pointwise passed!")


def test_lemma5_delta():
    assert certs.lemma5_delta(100.0, 1.0) == 0.1
    # δλ >= 2 once 1/(y√λ) is too small
    assert certs.lemma5_delta(100.0, 10.0) == 0.02


def test_sweep_stability_window():
    print("Testing the stability window of a λ sweep...")
    # a constant that climbs at small λ, then settles
    table = {10.0: 0.137, 100.0: 0.178, 1000.0: 0.183, 10000.0: 0.184}
    phi = catalog_service.get_function("sin")

    def sweep(stable_from):
        return certs._sweep_certificate(
            "Lemma4", "1", phi, list(table), [0.5, 1.0],
            lambda lam, y: (table[lam] * y, y), stable_from=stable_from,
        )

    settled = sweep(100.0)
    assert settled.passed
    assert settled.measured_constant == 0.184
    assert settled.details["growth"] < 0.01 < 0.05 < settled.details["full_growth"]

    early = sweep(0.0)
    assert not early.passed
    assert early.details["growth"] == early.details["full_growth"]
    print("✅ Stability window passed!")


@pytest.mark.slow
def test_lemma4_claim_passes():
    print("Testing the Lemma 4 claim over the smooth catalog...")
    cert = certs.run_claim("Lemma4", CFG)
    assert cert.passed, cert.details
    assert cert.grid["lam"] == list(certs.LEMMA4_LAMBDAS)
    parts = cert.details["parts"]
    assert {phi.label for phi in catalog_service.smooth_catalog()} == set(parts)
    assert "xexp" in parts and parts["xexp"]["pass"]
    print("✅ Lemma 4 claim passed!")


@pytest.mark.slow
def test_lemma4_constant_is_stable():
    print("Testing Lemma 4...")
    cert = certs.certify_lemma4(catalog_service.get_function("sin"), cfg=CFG)
    assert cert.passed
    assert cert.details["max_reconstruction_gap"] < 1e-7
    print("✅ Lemma 4 passed!")


@pytest.mark.slow
def test_tail_lemmas():
    print("Testing Lemmas 7 and 8...")
    phi = catalog_service.get_function("sin")
    lemma7, none8 = certs.certify_tail_lemmas(phi, certs.LEMMA7_LAMBDAS, certs.LEMMA7_YS, CFG)
    assert none8 is None
    assert lemma7.passed

    _, lemma8 = certs.certify_tail_lemmas(phi, certs.LEMMA8_LAMBDAS, certs.LEMMA8_YS, CFG)
    assert lemma8.passed
    assert lemma8.details["tighter"]
    print("✅ Tail lemmas passed!")


def test_tail_lemmas_split_regimes():
    print("Testing the λy split...")
    phi = catalog_service.get_function("const1")
    lemma7, lemma8 = certs.certify_tail_lemmas(phi, [100.0], [1e-3, 1.0], CFG)
    assert [s.point["y"] for s in lemma7.samples] == [1.0]
    assert {s.point["y"] for s in lemma8.samples} == {1e-3}
    # near-zero points follow λ
    _, lemma8 = certs.certify_tail_lemmas(phi, [100.0], [1.0], CFG, diagnostics=True)
    assert {s.point["y"] for s in lemma8.samples} == set(scaling_service.diagnostic_points(100.0))
    with pytest.raises(DomainError):
        certs.certify_tail_lemmas(phi, [100.0], [0.0], CFG)
    print("✅ λy split passed!")


@pytest.mark.slow
def test_theorem3_poly1():
    print("Testing Theorem 3 for φ = x...")
    cert = certs.certify_theorem3(catalog_service.get_function("poly:1"), cfg=CFG)
    fit = cert.details["fit"]
    assert fit["slope"] <= certs.SLOPE_CEILING
    assert fit["uniform_bound"]
    print("✅ Theorem 3 passed!")


# --- REGISTRY ---

@pytest.mark.slow
@pytest.mark.parametrize("claim_id", list(certs.CLAIMS))
def test_every_claim_passes(claim_id):
    print(f"Testing claim {claim_id}...")
    cert = certs.run_claim(claim_id, CFG)
    assert cert.claim_id == claim_id
    assert cert.passed, (claim_id, cert.measured_constant, cert.details)
    assert math.isfinite(cert.measured_constant)
    assert cert.seed == get_settings().DEFAULT_SEED
    parts = cert.details.get("parts", {})
    if claim_id == "Thm3":
        assert set(parts) == set(certs.THEOREM3_FUNCTIONS)
    if claim_id in ("Lemma4", "Lemma6"):
        assert set(parts) == {phi.label for phi in catalog_service.smooth_catalog()}
    print(f"✅ Claim {claim_id} passed!")


if __name__ == "__main__":
    test_growth_rate()
    test_merge_certificates()
    test_unknown_claim()
    test_kernel_bounds()
    test_lemma1_rhs_forms()
    test_lemma1_certificates()
    test_target_space()
    test_operator_bound_validation()
    test_endpoint_upgrades()
    test_lemma3_small_grid()
    test_lemma3_full_grid()
    test_lemma5_pointwise()
    test_lemma5_delta()
    test_sweep_stability_window()
    test_lemma4_claim_passes()
    test_lemma4_constant_is_stable()
    test_tail_lemmas()
    test_tail_lemmas_split_regimes()
    test_theorem3_poly1()
    for claim_id in certs.CLAIMS:
        test_every_claim_passes(claim_id)
