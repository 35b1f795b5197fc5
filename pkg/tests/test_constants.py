import math
from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from anticoncentration import (
    CertifiedConstant,
    certify_all,
    certify_c1,
    certify_c2,
    certify_c3,
    certify_nu,
    verify_certificate,
)
from anticoncentration.constants import (
    C1_TARGET,
    C2_TARGET,
    C3_TARGET,
    LN3_UPPER,
    c1_constraint_residual,
    c2_constraint_residual,
    c3_constraint_residual,
    default_chain,
)


@pytest.fixture(scope="module")
def chain():
    return default_chain()


def _c1_residual_reference(e1, e2):
    # independent transcription of the C1 constraint
    return 1 - e1 * e2 - F(7, 9) / (1 - 4 * e1 - 3 * e2) - 12 * e1 - 9 * e2


# ------------------------------------------------------------- residuals

def test_c1_residual_origin():
    assert c1_constraint_residual(0, 0) == F(2, 9)


def test_c1_residual_corner_infeasible():
    assert c1_constraint_residual(F(1, 24), F(1, 24)) < 0


def test_c1_residual_range_checked():
    with pytest.raises(ValueError):
        c1_constraint_residual(F(1, 23), 0)


@given(st.fractions(0, F(1, 24)), st.fractions(0, F(1, 24)))
def test_c1_residual_matches_reference(e1, e2):
    assert c1_constraint_residual(e1, e2) == _c1_residual_reference(e1, e2)


def test_c2_residual_is_quadratic():
    c1 = F(99993, 100000)
    e = F(1, 10**5)
    # multiplying through by (1 - e) gives the balance quadratic
    assert c2_constraint_residual(e, c1) * (1 - e) == 4 * e * e - 5 * e + (1 - c1)


def test_c3_residual_origin():
    c2 = F(999986, 10**6)
    assert c3_constraint_residual(0, 0, c2) == 1 - c2


def test_c3_residual_infeasible_point():
    assert c3_constraint_residual(F(1, 2), F(1, 20), F(999986, 10**6)) < 0


@given(st.fractions(0, F(1, 2)), st.fractions(0, F(1, 20)))
def test_c3_residual_matches_reference(e4, e5):
    c2 = F(999986, 10**6)
    ref = (1 - e4 * e5) - 3 * (e4 + e5) - c2 / ((1 - e4) ** 3 * (1 - e5))
    assert c3_constraint_residual(e4, e5, c2) == ref


# ---------------------------------------------------------- certificates

def test_default_chain_meets_targets(chain):
    assert all(c.verified for c in chain.values())
    assert chain["C1"].value <= C1_TARGET
    assert chain["C2"].value <= C2_TARGET
    assert chain["C3"].value <= C3_TARGET


def test_c1_witness_location(chain):
    w = chain["C1"].witnesses
    assert w["eps1"] == pytest.approx(0.0073, abs=5e-4)
    assert w["eps2"] == pytest.approx(0.0097, abs=5e-4)
    assert c1_constraint_residual(w["eps1"], w["eps2"]) >= 0


def test_c3_witness_scale(chain):
    w = chain["C3"].witnesses
    assert c3_constraint_residual(w["eps4"], w["eps5"], chain["C2"].value) >= 0
    assert all(F(1, 10**7) < w[k] < F(1, 10**5) for k in ("eps4", "eps5"))


def test_c2_from_footnote_c1():
    c1 = CertifiedConstant("C1", F(99993, 100000), {}, F(0))
    # certify_c2 wants a verified C1, so exercise the root step through the residual
    from anticoncentration.constants import _eps3_below_root
    e3 = _eps3_below_root(c1.value)
    assert float(e3) == pytest.approx(1.40e-5, rel=5e-3)
    assert float(1 - e3) == pytest.approx(0.9999860, abs=5e-8)
    assert c2_constraint_residual(e3, c1.value) >= 0
    assert c2_constraint_residual(e3 + F(1, 10**12), c1.value) < 0


def test_c2_tends_to_one_as_c1_does():
    from anticoncentration.constants import _eps3_below_root
    roots = [_eps3_below_root(1 - F(1, 10**k)) for k in (3, 6, 9, 12)]
    assert all(a > b for a, b in zip(roots, roots[1:]))
    assert roots[-1] < F(1, 10**12)


def test_emitted_certificates_verify(chain):
    assert verify_certificate(chain["C1"])
    assert verify_certificate(chain["C2"], {"C1": chain["C1"]})
    assert verify_certificate(chain["C3"], chain)
    assert verify_certificate(chain["nu"], chain)


def test_perturbed_witness_fails(chain):
    c1 = chain["C1"]
    bad = replace(c1, witnesses={**c1.witnesses, "eps1": F(1, 24)})
    assert verify_certificate(bad) is False


def test_negative_residual_claim_fails(chain):
    c1 = chain["C1"]
    assert verify_certificate(replace(c1, residual=F(-1, 10**9))) is False
    assert verify_certificate(replace(c1, residual=c1.residual + 1)) is False


def test_inflated_value_claim_fails(chain):
    c3 = chain["C3"]
    assert verify_certificate(replace(c3, value=c3.value - F(1, 10**20)), chain) is False


def test_missing_upstream_raises(chain):
    with pytest.raises(ValueError):
        verify_certificate(chain["C2"])
    with pytest.raises(ValueError):
        verify_certificate(chain["C3"], {"C2": chain["C2"]})


def test_broken_upstream_propagates(chain):
    bad_c1 = replace(chain["C1"], residual=F(-1))
    assert verify_certificate(chain["C2"], {"C1": bad_c1}) is False


def test_nu_verification_checks_ln3(chain):
    nu = chain["nu"]
    assert verify_certificate(replace(nu, witnesses={"ln3_upper": F(1098, 1000)}), chain) is False
    assert math.log(3) < float(LN3_UPPER) < math.log(3) + 1e-14


def test_nu_consistent_with_c3(chain):
    c3, nu = chain["C3"].value, chain["nu"].value
    exact_nu = -math.log1p(-float(1 - c3)) / math.log(3)
    assert float(nu) <= exact_nu
    assert float(nu) == pytest.approx(exact_nu, rel=1e-9)


def test_certify_c2_requires_verified_c1(chain):
    with pytest.raises(ValueError):
        certify_c2(replace(chain["C1"], residual=F(-1)))


def test_certify_c3_requires_upstream(chain):
    with pytest.raises(ValueError):
        certify_c3(chain["C2"])


# ----------------------------------------------------- resolution / rounds

def test_resolution_monotone_c1():
    values = [certify_c1(r).value for r in (400, 800, 2000)]
    assert values[0] >= values[1] >= values[2]
    assert values[-1] <= C1_TARGET


def test_certify_all_stable_across_resolution(chain):
    other = certify_all(800)
    assert other["C3"].value <= chain["C3"].value
    assert all(c.verified for c in other.values())


def test_certification_is_deterministic(chain):
    again = certify_all()
    assert {k: v.to_json() for k, v in again.items()} == {k: v.to_json() for k, v in chain.items()}


def test_resolution_too_small_rejected():
    with pytest.raises(ValueError):
        certify_c1(10)


# ------------------------------------------------------------ serialization

def test_json_round_trip_bit_exact(chain):
    for cert in chain.values():
        text = cert.to_json()
        back = CertifiedConstant.from_json(text)
        assert back == cert
        assert back.to_json() == text


def test_json_layout(chain):
    d = chain["C1"].to_dict()
    assert set(d) == {"name", "value_numerator", "value_denominator", "witnesses",
                      "residual", "verified", "depends_on"}
    assert F(d["value_numerator"], d["value_denominator"]) == chain["C1"].value


def test_nu_certificate_builds_from_any_c3(chain):
    c3 = chain["C3"]
    nu = certify_nu(c3, chain)
    assert nu.verified
    assert nu.value > 0
