"""Expression construction, symbol table rules, and basic calculus."""

import pytest

from carlemanlab.canonical import canonicalize
from carlemanlab.exprs import (
    C,
    Context,
    I,
    DB,
    DT,
    Dx,
    ExprError,
    Mul,
    conj,
    d_t,
    d_x,
    deriv,
    esum,
    im,
    ito_d,
    re,
)


@pytest.fixture
def ctx():
    c = Context(2)
    c.semimartingale("z")
    c.real_field("ell")
    c.complex_field("Phi")
    c.real_scalar("lam")
    return c


def test_dimension_bounds():
    for bad in (0, 4, -1):
        with pytest.raises(ExprError):
            Context(bad)


def test_duplicate_declaration(ctx):
    with pytest.raises(ExprError):
        ctx.real_field("ell")


def test_unknown_symbol(ctx):
    with pytest.raises(ExprError):
        ctx.sym("missing")


def test_semimartingale_flags(ctx):
    assert ctx.symbols["z"].semimartingale
    assert ctx.symbols["Pz"].semimartingale and ctx.symbols["Qz"].semimartingale
    for name in ("ell", "Phi", "lam"):
        assert not ctx.symbols[name].semimartingale


def test_real_symbols_fixed_by_conjugation(ctx):
    for name in ("ell", "lam"):
        e = ctx.sym(name)
        assert canonicalize(conj(e) - e, ctx).is_zero
    assert not canonicalize(conj(ctx.sym("z")) - ctx.sym("z"), ctx).is_zero
    assert not canonicalize(conj(ctx.sym("Phi")) - ctx.sym("Phi"), ctx).is_zero


def test_derivative_direction_bounds(ctx):
    z = ctx.sym("z")
    with pytest.raises(ExprError):
        canonicalize(d_x(z, 3), ctx)  # n = 2 has no third direction


def test_deriv_name_dispatch(ctx):
    ell = ctx.sym("ell")
    assert canonicalize(deriv(ell, "x1") - d_x(ell, 1), ctx).is_zero
    assert canonicalize(deriv(ell, "t") - d_t(ell), ctx).is_zero
    with pytest.raises(ExprError):
        deriv(ell, "x9")


def test_chain_rule_on_square(ctx):
    ell = ctx.sym("ell")
    lhs = deriv(ell * ell, "x1")
    rhs = C(2) * ell * d_x(ell, 1)
    assert canonicalize(lhs - rhs, ctx).is_zero


def test_exponential_weight_rewrite():
    # theta = e^ell is never an atom: derivatives rewrite through ell
    ctx = Context(1)
    ell = ctx.real_field("ell")
    theta = ctx.rewrite_field("theta")
    ctx.set_rewrite("theta", "x1", d_x(ell, 1) * theta)
    ctx.set_rewrite("theta", "t", d_t(ell) * theta)
    got = canonicalize(d_x(theta, 1) - d_x(ell, 1) * theta, ctx)
    assert got.is_zero
    got_t = canonicalize(d_t(theta) - d_t(ell) * theta, ctx)
    assert got_t.is_zero


def test_rewrites_rejected_on_semimartingales(ctx):
    with pytest.raises(ExprError):
        ctx.set_rewrite("z", "t", ctx.sym("ell"))


def test_ito_of_deterministic_field(ctx):
    ell = ctx.sym("ell")
    assert canonicalize(ito_d(ell) - d_t(ell) * DT, ctx).is_zero


def test_ito_jets(ctx):
    z = ctx.sym("z")
    dz = ito_d(z)
    expected = ctx.sym("Pz") * DT + ctx.sym("Qz") * DB
    assert canonicalize(dz - expected, ctx).is_zero


def test_direct_product_construction(ctx):
    # a11 * dx1(z) builds a product node over one derivative atom
    a11 = ctx.real_field("a11")
    e = Mul([a11, Dx(1, ctx.sym("z"))])
    cf = canonicalize(e, ctx)
    assert len(cf) == 1
    (mono, coeff), = cf.terms()
    assert coeff == 1
    assert cf.monomial_strs() == ["a11*z_x1"]


def test_re_im_decomposition(ctx):
    phi = ctx.sym("Phi")
    recomposed = re(phi) + I * im(phi)
    assert canonicalize(recomposed - phi, ctx).is_zero


def test_null_pair_declaration(ctx):
    a = ctx.real_scalar("a")
    b01 = ctx.real_scalar("b01")
    ctx.declare_null_pair("a", "b01")
    assert ctx.annihilates({"a", "b01"})
    assert not ctx.annihilates({"a", "lam"})
    assert canonicalize(a * b01, ctx).is_zero
    with pytest.raises(ExprError):
        ctx.declare_null_pair("ell", "lam")  # fields cannot be null pairs


def test_esum_empty_is_zero(ctx):
    assert canonicalize(esum([]), ctx).is_zero
