"""The weighted identity, its specializations, and the proof-step chain."""

from fractions import Fraction

import pytest

from carlemanlab import identity
from carlemanlab.identity import (
    CASE_IDS,
    PROOF_STEPS,
    REGIMES,
    OperatorSpec,
    SpecError,
    build_case,
    constraint_monomials,
    numeric_residual,
    printed_form_deltas,
    verify_identity,
    verify_proof_step,
    verify_reconstruction,
    verify_special,
)

THEOREM_MATRIX = [(n, r) for n in (1, 2, 3) for r in REGIMES]


@pytest.mark.parametrize("n,regime", THEOREM_MATRIX,
                         ids=[f"n{n}-{r}" for n, r in THEOREM_MATRIX])
def test_identity_holds(n, regime):
    res = verify_identity(OperatorSpec(n=n, regime=regime))
    assert res.zero, res.surviving_monomials[:5]
    assert len(res.lhs.terms()) > 0
    assert res.surviving_monomials == ()


@pytest.mark.parametrize("spec", [
    OperatorSpec(n=1, regime="R1", a=Fraction(1)),
    OperatorSpec(n=2, regime="R3"),
    OperatorSpec(n=1, regime="R2", a=Fraction(0), b=Fraction(1),
                 a0=Fraction(1)),
    OperatorSpec(n=3, regime="R1"),
    OperatorSpec(n=1, regime="R3", phi_zero=True),
    OperatorSpec(n=2, regime="R1", identity_metric=True),
    OperatorSpec(n=2, regime="R2", real_solution=True),
    OperatorSpec(n=1, regime="raw", a0=Fraction(2)),
], ids=["pinned-a", "R3-n2", "R2-pinned", "R1-n3", "phi-zero",
        "identity-metric", "real-solution", "raw-pinned-a0"])
def test_identity_holds_for_pinned_scalars(spec):
    assert verify_identity(spec).zero


@pytest.mark.parametrize("bad", [
    dict(n=4),
    dict(n=0),
    dict(regime="R9"),
    dict(regime="R2", a=Fraction(1)),
    dict(regime="R2", a0=Fraction(0)),
    dict(regime="R2", b=Fraction(0)),
    dict(regime="R3", b=Fraction(1)),
    dict(regime="R3", b0=(Fraction(0), Fraction(0))),
    dict(regime="R1", b0=(Fraction(1), Fraction(0))),
])
def test_inconsistent_specs_rejected(bad):
    with pytest.raises(SpecError):
        verify_identity(OperatorSpec(n=bad.pop("n", 2), **bad))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_raw_regime_keeps_constraint_monomials(n):
    res, clean = constraint_monomials(OperatorSpec(n=n, regime="raw"))
    assert not res.zero
    assert clean
    assert len(res.surviving_monomials) > 0


@pytest.mark.parametrize("key", PROOF_STEPS)
@pytest.mark.parametrize("n", [1, 2])
def test_proof_step(key, n):
    res = verify_proof_step(key, n=n)
    assert res.zero, (key, res.surviving_monomials[:5])


@pytest.mark.parametrize("n", [1, 2])
def test_reconstruction_from_steps(n):
    assert verify_reconstruction(n=n).zero


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_specialization(case_id):
    res = verify_special(case_id)
    assert res.zero, (case_id, res.surviving_monomials[:5])
    assert len(res.lhs.terms()) > 0


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_mutated_specialization_is_caught(case_id):
    from carlemanlab.canonical import canonicalize

    case = build_case(case_id)
    res = canonicalize(case.lhs - case.mutated_rhs, case.ctx)
    assert not res.is_zero


def test_unknown_case_rejected():
    with pytest.raises(SpecError):
        build_case("laplace")


def test_printed_form_deltas_match_goldens(goldens_dir):
    deltas = printed_form_deltas()
    assert set(deltas) == {"heat_first_order", "elliptic_flux"}
    for name, cf in deltas.items():
        want = (goldens_dir / f"delta_{name}.txt").read_text()
        assert cf.serialize() + "\n" == want
        assert not cf.is_zero


@pytest.mark.parametrize("target", [
    OperatorSpec(n=2, regime="R1"),
    OperatorSpec(n=1, regime="R2"),
    OperatorSpec(n=1, regime="raw"),
    "transport",
    "heat_identity",
    "ginzburg_landau",
])
def test_numeric_residual_vanishes(target):
    values = numeric_residual(target, seed=5)
    assert values
    assert all(v.is_zero for v in values)


@pytest.mark.parametrize("target", [
    OperatorSpec(n=1, regime="R1"),
    "transport",
    "elliptic",
])
def test_numeric_residual_detects_mutation(target):
    values = numeric_residual(target, seed=5, mutated=True)
    assert any(not v.is_zero for v in values)
