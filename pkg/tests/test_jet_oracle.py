"""Independent exact evaluation of expressions as polynomial jets."""

import random
from fractions import Fraction

import pytest

from carlemanlab.exact import QQi
from carlemanlab.exprs import Context, Pow, conj, d_t, d_x, ito_d
from carlemanlab.jetoracle import (
    JetAssignment,
    eval_jet,
    eval_jet_many,
    random_assignment,
    random_point,
)

from strategies import make_context, random_plain_expr


def _zero_polys(ctx, skip=()):
    return {name: {} for name in ctx.symbols if name not in skip}


def test_linear_semimartingale_value():
    # z = x + i t evaluates z zbar to |z|^2 = 2 at (1, 1)
    ctx = Context(1)
    z, _, _ = ctx.semimartingale("z")
    polys = _zero_polys(ctx)
    polys["z"] = {(1, 0): QQi(1), (0, 1): QQi(0, 1)}
    a = JetAssignment(ctx=ctx, polys=polys)
    v = eval_jet(z * conj(z), a, (Fraction(1), Fraction(1)))
    assert v.value == QQi(2) and v.dt.is_zero() and v.dB.is_zero()
    assert not v.is_zero


def test_hand_differentiated_energy_coefficient():
    # ell = x^2 t: (ell_x)^2 - ell_xx at (1, 2) is 16 - 4 = 12
    ctx = Context(1)
    ell = ctx.real_field("ell")
    a = JetAssignment(ctx=ctx, polys={"ell": {(2, 1): QQi(1)}})
    e = Pow(d_x(ell, 1), 2) - d_x(d_x(ell, 1), 1)
    v = eval_jet(e, a, (Fraction(1), Fraction(2)))
    assert v.value == QQi(12)
    assert v.dt.is_zero() and v.dB.is_zero()


def test_ito_jets_of_product():
    ctx = make_context(1)
    z, p, q = ctx.sym("z"), ctx.sym("Pz"), ctx.sym("Qz")
    target = ito_d(z * conj(z))
    drift = p * conj(z) + conj(p) * z + q * conj(q)
    noise = q * conj(z) + conj(q) * z
    for seed in (3, 17, 40):
        a = random_assignment(ctx, seed)
        pt = random_point(ctx, seed + 1)
        got = eval_jet(target, a, pt)
        want_dt = eval_jet(drift, a, pt).value
        want_db = eval_jet(noise, a, pt).value
        assert got.value.is_zero()
        assert got.differential_pair() == (want_dt, want_db)


def test_multiplicativity_on_plain_expressions():
    ctx = make_context(2)
    rng = random.Random(71)
    for seed in range(12):
        u = random_plain_expr(ctx, rng, 3)
        v = random_plain_expr(ctx, rng, 3)
        a = random_assignment(ctx, 100 + seed)
        pt = random_point(ctx, 200 + seed)
        vu, vv, vp = (eval_jet(x, a, pt) for x in (u, v, u * v))
        assert vp.value == vu.value * vv.value


def test_linearity():
    ctx = make_context(2)
    rng = random.Random(9)
    u = random_plain_expr(ctx, rng, 4)
    a = random_assignment(ctx, 5)
    pts = [random_point(ctx, 300 + k) for k in range(4)]
    for single, double in zip(eval_jet_many(u, a, pts),
                              eval_jet_many(u + u, a, pts)):
        assert double.value == single.value * QQi(2)


def test_conjugation_consistency():
    ctx = make_context(2)
    rng = random.Random(23)
    u = random_plain_expr(ctx, rng, 4)
    a = random_assignment(ctx, 6)
    pt = random_point(ctx, 7)
    assert eval_jet(conj(u), a, pt).value == eval_jet(u, a, pt).value.conj()


def test_exponential_generator_growth():
    # a field assigned the generator E with dE/dt = 3E differentiates
    # accordingly, including mixed t * E monomials
    ctx = Context(1)
    phi = ctx.real_field("phi")
    rates = (Fraction(3),)
    a = JetAssignment(ctx=ctx, polys={"phi": {(0, 0, 1): QQi(1)}},
                      exp_rates=rates)
    pt = (Fraction(1, 2), Fraction(1, 3), Fraction(5, 7))
    lhs = eval_jet(d_t(phi), a, pt).value
    assert lhs == eval_jet(phi, a, pt).value * QQi(3)

    # mixed monomial: d/dt (t E) = E + 3 t E
    b = JetAssignment(ctx=ctx, polys={"phi": {(0, 1, 1): QQi(1)}},
                      exp_rates=rates)
    got = eval_jet(d_t(phi), b, pt).value
    e_val = QQi(Fraction(5, 7))
    assert got == e_val + QQi(3) * QQi(Fraction(1, 3)) * e_val


def test_random_assignment_deterministic():
    ctx = make_context(2)
    a = random_assignment(ctx, 42)
    b = random_assignment(ctx, 42)
    c = random_assignment(ctx, 43)
    assert a.polys == b.polys
    assert a.polys != c.polys


def test_real_symbols_get_real_polynomials():
    ctx = make_context(2)
    a = random_assignment(ctx, 12)
    for name, sym in ctx.symbols.items():
        if sym.real:
            assert all(c.is_real() for c in a.polys[name].values())
    # scalars are constants
    assert all(all(e == 0 for e in exps) for exps in a.polys["lam"])


def test_nvars_accounts_for_generators():
    ctx = make_context(2)
    a = random_assignment(ctx, 1, exp_rates=(Fraction(2), Fraction(5)))
    assert a.nvars == 2 + 1 + 2
    assert a.t_index() == 2
