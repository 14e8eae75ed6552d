"""Multiplier-identity builders and verifiers.

The operator under study is

    L w = a0 dw - (a + i b) sum_jk (a^jk w_xj)_xk dt + b0 . grad w dt

with real scalars a0, a, b, a constant real vector b0, a symmetric
coefficient family a^jk, a real weight exponent ell (theta = e^ell) and a
complex auxiliary field Phi.  Multiplying L w by the conjugate of a
carefully chosen first-order expression I1 and by theta turns the product
into an exact sum of recognizable pieces: a magnitude term, a martingale
term, spatial divergences, energy densities, first-order couplings and
quadratic-variation corrections.  This module builds both sides of that
identity, of each intermediate identity used to derive it, and of its
classical specializations, and checks that the canonical residual is the
zero form.

theta itself is never represented: every build works in the weighted
variable z = theta w, where conjugating by theta only inserts multiples
of derivatives of ell.

Verification regimes
    R1   a arbitrary, b0 = 0
    R2   a = 0, b0 = 0 (Schrodinger-type principal part)
    R3   a = b = 0, b0 arbitrary (transport principal part)
    raw  all scalars symbolic; the products a*b0^j and b*b0^j are
         declared null pairs, mirroring the constraint that makes the
         three regimes exhaustive
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .canonical import CanonicalForm, canonicalize
from .exprs import C, Context, DT, Expr, I, conj, d_t, d_x, esum, im, ito_d, re
from . import jetoracle as jo
from .jetoracle import JetAssignment, JetValue, eval_jet_many

REGIMES = ("R1", "R2", "R3", "raw")

PROOF_STEPS = ("2", "03", "3", "5", "6", "10", "02", "zr2", "zr0")

CASE_IDS = (
    "elliptic",
    "transport",
    "ginzburg_landau",
    "schrodinger",
    "heat_identity",
    "fst",
    "ode",
    "c02",
) + tuple(f"proof_step({k})" for k in PROOF_STEPS)


class SpecError(ValueError):
    """Raised for regime-inconsistent operator specifications."""


@dataclass(frozen=True)
class OperatorSpec:
    """Parameters selecting one instance of the operator and its regime.

    Scalars left as None stay fully symbolic.  b0 left as None takes the
    regime default (zero for R1/R2, symbolic for R3/raw).
    """

    n: int = 1
    regime: str = "R1"
    a0: Optional[Fraction] = None
    a: Optional[Fraction] = None
    b: Optional[Fraction] = None
    b0: Optional[tuple] = None
    identity_metric: bool = False
    real_solution: bool = False
    phi_zero: bool = False
    constraint_rewriting: bool = True

    def validate(self) -> None:
        if self.n not in (1, 2, 3):
            raise SpecError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.regime not in REGIMES:
            raise SpecError(f"unknown regime {self.regime!r}")
        def given(v):
            return v is not None
        if self.regime in ("R1", "R2") and given(self.b0) and any(self.b0):
            raise SpecError(f"regime {self.regime} requires b0 = 0")
        if self.regime == "R2":
            if given(self.a) and self.a != 0:
                raise SpecError("regime R2 requires a = 0")
            if given(self.a0) and self.a0 == 0:
                raise SpecError("regime R2 requires a0 nonzero")
            if given(self.b) and self.b == 0:
                raise SpecError("regime R2 requires b nonzero")
        if self.regime == "R3":
            if (given(self.a) and self.a != 0) or (given(self.b) and self.b != 0):
                raise SpecError("regime R3 requires a = b = 0")
            if given(self.a0) and self.a0 == 0:
                raise SpecError("regime R3 requires a0 nonzero")
            if given(self.b0) and not any(self.b0):
                raise SpecError("regime R3 requires b0 nonzero")


@dataclass(frozen=True)
class IdentityResidual:
    """Outcome of one canonical-residual check."""

    case: str
    lhs: CanonicalForm
    rhs: CanonicalForm
    residual: CanonicalForm
    zero: bool
    surviving_monomials: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "zero": self.zero,
            "lhs_monomials": len(self.lhs.terms()),
            "rhs_monomials": len(self.rhs.terms()),
            "surviving_monomials": list(self.surviving_monomials),
        }


def _residual(case: str, lhs: Expr, rhs: Expr, ctx: Context) -> IdentityResidual:
    lhs_cf = canonicalize(lhs, ctx)
    rhs_cf = canonicalize(rhs, ctx)
    res = lhs_cf - rhs_cf
    return IdentityResidual(
        case=case,
        lhs=lhs_cf,
        rhs=rhs_cf,
        residual=res,
        zero=res.is_zero,
        surviving_monomials=tuple(res.serialize().splitlines()) if not res.is_zero else (),
    )


# ---------------------------------------------------------------------------
# Workspace: one set of ingredient expressions
# ---------------------------------------------------------------------------


class Workspace:
    """A context plus the named ingredients of one identity build.

    All ingredients are plain expressions, so specializations can pass
    composed trees (for example ell = mu * phi, or z = i * u).
    """

    def __init__(self, ctx, z, a0, a, b, b0, ajk, ell, phi):
        self.ctx = ctx
        self.n = ctx.n
        self.z = z
        self.zc = conj(z)
        self.a0 = a0
        self.a = a
        self.b = b
        self.b0 = list(b0)
        self._ajk = dict(ajk)
        self.ell = ell
        self.phi = phi
        rng = range(1, self.n + 1)
        self.zx = {j: d_x(z, j) for j in rng}
        self.zcx = {j: d_x(self.zc, j) for j in rng}
        self.ellx = {j: d_x(ell, j) for j in rng}
        self.ellt = d_t(ell)
        self.dz = ito_d(z)
        self.dzc = ito_d(self.zc)
        self.dzx = {j: ito_d(self.zx[j]) for j in rng}
        self.dzcx = {j: ito_d(self.zcx[j]) for j in rng}
        self.A = self._build_A()
        self.Lam = self._build_Lambda()
        self.b0_grad_ell = self.b0_dot_grad(ell)
        self.I1 = self._build_I1()
        self.I2 = self._build_I2()
        self.theta_L = self._build_theta_L()

    def am(self, j: int, k: int) -> Expr:
        return self._ajk[(j, k) if j <= k else (k, j)]

    def b0_dot_grad(self, e: Expr) -> Expr:
        return esum(self.b0[j - 1] * d_x(e, j) for j in range(1, self.n + 1))

    def _pairs(self):
        n = self.n
        return [(j, k) for j in range(1, n + 1) for k in range(1, n + 1)]

    def _build_A(self) -> Expr:
        terms = []
        for j, k in self._pairs():
            terms.append(self.am(j, k) * self.ellx[j] * self.ellx[k])
            terms.append(-d_x(self.am(j, k) * self.ellx[j], k))
        return esum(terms)

    def _build_Lambda(self) -> Expr:
        terms = [d_x(self.am(j, k) * self.zx[j], k) for j, k in self._pairs()]
        terms.append(self.A * self.z)
        return esum(terms)

    def _build_I1(self) -> Expr:
        grad_term = esum(
            self.am(j, k) * self.ellx[j] * self.zx[k] for j, k in self._pairs()
        )
        return (
            -(self.a * self.Lam)
            + C(2) * I * self.b * grad_term
            + (self.phi - self.a0 * self.ellt - self.b0_grad_ell) * self.z
        )

    def _build_I2(self) -> Expr:
        grad_term = esum(
            self.am(j, k) * self.ellx[j] * self.zx[k] for j, k in self._pairs()
        )
        return (
            self.a0 * self.dz
            - I * self.b * self.Lam * DT
            + C(2) * self.a * grad_term * DT
            + self.b0_dot_grad(self.z) * DT
            - self.phi * self.z * DT
        )

    def _build_theta_L(self) -> Expr:
        # theta * L(theta^{-1} z), written with W_j = z_xj - ell_xj z.
        W = {j: self.zx[j] - self.ellx[j] * self.z for j in range(1, self.n + 1)}
        second = []
        for j, k in self._pairs():
            second.append(d_x(self.am(j, k) * W[j], k))
            second.append(-(self.ellx[k] * self.am(j, k) * W[j]))
        transport = esum(
            self.b0[j - 1] * (self.zx[j] - self.ellx[j] * self.z)
            for j in range(1, self.n + 1)
        )
        return (
            self.a0 * (self.dz - self.ellt * self.z * DT)
            - (self.a + I * self.b) * esum(second) * DT
            + transport * DT
        )

    # -- energy and flux coefficients ----------------------------------

    def B_coef(self) -> Expr:
        a, b, a0 = self.a, self.b, self.a0
        sq = a * a + b * b
        div_part = esum(
            d_x(self.A * self.am(j, k) * self.ellx[j], k) for j, k in self._pairs()
        )
        return (
            C(2) * sq * div_part
            + a * a0 * d_t(self.A)
            + C(2) * a * self.A * re(self.phi)
            - C(2) * b * self.A * im(self.phi)
            - C(2) * re(self.phi * (conj(self.phi) - a0 * self.ellt - self.b0_grad_ell))
            + a0 * (a0 * d_t(self.ellt) + d_t(self.b0_grad_ell))
            + self.b0_dot_grad(a0 * self.ellt + self.b0_grad_ell)
        )

    def D_coef(self, j: int, k: int) -> Expr:
        a, b, a0 = self.a, self.b, self.a0
        sq = a * a + b * b
        inner = []
        for jp in range(1, self.n + 1):
            for kp in range(1, self.n + 1):
                inner.append(self.am(j, kp) * d_x(self.am(jp, k) * self.ellx[jp], kp))
                inner.append(self.am(k, kp) * d_x(self.am(jp, j) * self.ellx[jp], kp))
                inner.append(-d_x(self.am(j, k) * self.am(jp, kp) * self.ellx[jp], kp))
        return (
            -(a * a0 * d_t(self.am(j, k)))
            + C(2) * b * im(self.phi) * self.am(j, k)
            - C(2) * a * re(self.phi) * self.am(j, k)
            + C(2) * sq * esum(inner)
        )

    def M_expr(self) -> Expr:
        a, b, a0 = self.a, self.b, self.a0
        mid = []
        for j, k in self._pairs():
            mid.append(
                self.am(j, k)
                * (a * self.zx[j] * self.zcx[k] + C(2) * b * self.ellx[j] * im(self.zcx[k] * self.z))
            )
        return (
            -(a * a0 * self.A * self.z * self.zc)
            + a0 * esum(mid)
            - a0 * (a0 * self.ellt + self.b0_grad_ell) * self.z * self.zc
        )

    def V_flux(self, k: int) -> Expr:
        a, b, a0 = self.a, self.b, self.a0
        sq = a * a + b * b
        n = self.n
        t1 = esum(self.am(j, k) * re(self.zx[j] * self.dzc) for j in range(1, n + 1))
        t2 = esum(self.am(j, k) * self.ellx[j] * im(self.z * self.dzc) for j in range(1, n + 1))
        t3 = esum(self.am(j, k) * self.ellx[j] * self.z * self.zc for j in range(1, n + 1))
        t4 = esum(self.am(j, k) * re(self.zcx[j] * self.phi * self.z) for j in range(1, n + 1))
        t5 = esum(
            self.am(j, k) * im(self.zx[j] * (conj(self.phi) - a0 * self.ellt) * self.zc)
            for j in range(1, n + 1)
        )
        t6 = []
        for j in range(1, n + 1):
            for jp in range(1, n + 1):
                for kp in range(1, n + 1):
                    t6.append(
                        self.am(j, k) * self.am(jp, kp) * self.ellx[j] * self.zx[jp] * self.zcx[kp]
                    )
                    t6.append(
                        -(
                            self.am(j, kp)
                            * self.am(jp, k)
                            * self.ellx[j]
                            * (self.zx[jp] * self.zcx[kp] + self.zcx[jp] * self.zx[kp])
                        )
                    )
        return (
            -(C(2) * a * a0 * t1)
            - C(2) * a0 * b * t2
            - C(2) * self.A * sq * t3 * DT
            + C(2) * a * t4 * DT
            + C(2) * b * t5 * DT
            + C(2) * sq * esum(t6) * DT
        )

    def E_coef(self, j: int) -> Expr:
        return esum(
            self.am(j, k)
            * (C(2) * self.ellx[k] * (conj(self.phi) - self.a0 * self.ellt) - d_x(conj(self.phi), k))
            for k in range(1, self.n + 1)
        )

    def F_coef(self, j: int) -> Expr:
        terms = []
        for k in range(1, self.n + 1):
            terms.append(self.am(j, k) * d_x(self.phi - self.a0 * self.ellt, k))
            terms.append(-(self.a0 * d_t(self.am(j, k) * self.ellx[k])))
            terms.append(-(C(2) * self.am(j, k) * self.ellx[k] * self.phi))
        return esum(terms)


def _make_symbol_or_const(ctx: Context, name: str, value) -> Expr:
    if value is None:
        return ctx.real_scalar(name)
    return C(Fraction(value))


def make_theorem_workspace(spec: OperatorSpec) -> Workspace:
    """Declare symbols for the general identity under the given spec."""
    spec.validate()
    ctx = Context(n=spec.n)
    a0 = _make_symbol_or_const(ctx, "a0", spec.a0)
    if spec.regime == "R2":
        a = C(0) if spec.a is None else C(Fraction(spec.a))
    else:
        a = _make_symbol_or_const(ctx, "a", spec.a)
    if spec.regime == "R3":
        a = C(0) if spec.a is None else C(Fraction(spec.a))
        b = C(0) if spec.b is None else C(Fraction(spec.b))
    else:
        b = _make_symbol_or_const(ctx, "b", spec.b)
    if spec.regime in ("R1", "R2"):
        b0 = [C(0)] * spec.n
    elif spec.b0 is not None:
        b0 = [C(Fraction(v)) for v in spec.b0]
    else:
        b0 = [ctx.real_scalar(f"b0{j}") for j in range(1, spec.n + 1)]
    if spec.regime == "raw" and spec.constraint_rewriting:
        for j in range(1, spec.n + 1):
            if spec.a is None and spec.b0 is None:
                ctx.declare_null_pair("a", f"b0{j}")
            if spec.b is None and spec.b0 is None:
                ctx.declare_null_pair("b", f"b0{j}")
    ajk = {}
    for j in range(1, spec.n + 1):
        for k in range(j, spec.n + 1):
            if spec.identity_metric:
                ajk[(j, k)] = C(1) if j == k else C(0)
            else:
                ajk[(j, k)] = ctx.real_field(f"a{j}{k}")
    ell = ctx.real_field("ell")
    if spec.phi_zero:
        phi = C(0)
    elif spec.real_solution:
        phi = ctx.real_field("Phi")
    else:
        phi = ctx.complex_field("Phi")
    z, _, _ = ctx.semimartingale("z", real=spec.real_solution)
    return Workspace(ctx, z, a0, a, b, b0, ajk, ell, phi)


# ---------------------------------------------------------------------------
# The general identity
# ---------------------------------------------------------------------------


def rhs_groups(ws: Workspace) -> list[tuple[str, Expr]]:
    """The right-hand side of the general identity, split into its terms."""
    n = ws.n
    a, b, a0 = ws.a, ws.b, ws.a0
    pairs = ws._pairs()
    magnitude = C(2) * ws.I1 * conj(ws.I1) * DT
    martingale = ito_d(ws.M_expr())
    divergence = esum(d_x(ws.V_flux(k), k) for k in range(1, n + 1))
    zero_order = ws.B_coef() * ws.z * ws.zc * DT
    gradient_form = esum(ws.D_coef(j, k) * ws.zx[j] * ws.zcx[k] for j, k in pairs) * DT
    first_order = (
        C(2)
        * esum(
            re((a * ws.E_coef(j) + conj(ws.phi) * ws.b0[j - 1]) * ws.zc * ws.zx[j])
            + b * im(ws.F_coef(j) * ws.z * ws.zcx[j])
            for j in range(1, n + 1)
        )
        * DT
    )
    qv_gradient = -(a * a0 * esum(ws.am(j, k) * ws.dzx[j] * ws.dzcx[k] for j, k in pairs))
    weight_transport = -(
        ws.b0_dot_grad((a0 * ws.ellt + ws.b0_grad_ell) * ws.z * ws.zc) * DT
    )
    qv_mass = a0 * (a * ws.A + a0 * ws.ellt + ws.b0_grad_ell) * ws.dz * ws.dzc
    qv_mixed = -(
        C(2) * a0 * b * esum(ws.am(j, k) * ws.ellx[k] * im(ws.dz * ws.dzcx[j]) for j, k in pairs)
    )
    stochastic_mass = (
        C(2)
        * a0
        * (
            b * esum(d_x(ws.am(j, k) * ws.ellx[k], j) for j, k in pairs) * im(ws.z * ws.dzc)
            + re(conj(ws.phi) * ws.zc * ws.dz)
        )
    )
    return [
        ("magnitude", magnitude),
        ("martingale", martingale),
        ("divergence", divergence),
        ("zero_order", zero_order),
        ("gradient_form", gradient_form),
        ("first_order", first_order),
        ("qv_gradient", qv_gradient),
        ("weight_transport", weight_transport),
        ("qv_mass", qv_mass),
        ("qv_mixed", qv_mixed),
        ("stochastic_mass", stochastic_mass),
    ]


def build_identity(spec: OperatorSpec) -> tuple[Expr, Expr, Workspace]:
    """Both sides of the general identity for the given spec."""
    ws = make_theorem_workspace(spec)
    lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
    rhs = esum(e for _, e in rhs_groups(ws))
    return lhs, rhs, ws


def verify_identity(spec: OperatorSpec) -> IdentityResidual:
    lhs, rhs, ws = build_identity(spec)
    case = f"theorem(n={spec.n},{spec.regime})"
    return _residual(case, lhs, rhs, ws.ctx)


def constraint_monomials(spec: OperatorSpec) -> tuple[IdentityResidual, bool]:
    """Residual with constraint rewriting disabled, plus a flag telling
    whether every surviving monomial contains one of the null products
    a*b0^j or b*b0^j."""
    if spec.regime != "raw":
        raise SpecError("constraint inspection applies to the raw regime")
    lhs, rhs, ws = build_identity(
        OperatorSpec(
            n=spec.n,
            regime="raw",
            identity_metric=spec.identity_metric,
            real_solution=spec.real_solution,
            constraint_rewriting=False,
        )
    )
    res = _residual(f"raw-unconstrained(n={spec.n})", lhs, rhs, ws.ctx)
    b0names = {f"b0{j}" for j in range(1, spec.n + 1)}
    ok = not res.zero
    for mono, _ in res.residual.terms():
        names = {key[1] for key, _ in mono if key[0] == "f"}
        if not (names & {"a", "b"} and names & b0names):
            ok = False
    return res, ok


# ---------------------------------------------------------------------------
# Proof steps
# ---------------------------------------------------------------------------


def make_step_workspace(n: int = 2) -> Workspace:
    return make_theorem_workspace(OperatorSpec(n=n, regime="raw"))


def _groups_03(ws: Workspace) -> list[Expr]:
    """The nine terms of the expanded cross product 2 Re(conj(I1) I2)."""
    a, b, a0 = ws.a, ws.b, ws.a0
    sq = a * a + b * b
    pairs = ws._pairs()
    Lc = conj(ws.Lam)
    pc = conj(ws.phi)
    g1 = -(C(2) * a * a0 * re(Lc * ws.dz))
    g2 = -(C(4) * sq * re(esum(ws.am(j, k) * ws.ellx[j] * (ws.zx[k] * Lc) for j, k in pairs)) * DT)
    g3 = C(2) * a * re(ws.phi * Lc * ws.z) * DT
    g4 = C(4) * a0 * b * esum(ws.am(j, k) * ws.ellx[j] * im(ws.zcx[k] * ws.dz) for j, k in pairs)
    g5 = C(4) * b * esum(ws.am(j, k) * ws.ellx[j] * im(pc * ws.zc * ws.zx[k]) for j, k in pairs) * DT
    g6 = C(2) * b * im((pc - a0 * ws.ellt) * ws.zc * ws.Lam) * DT
    g7 = (
        C(4)
        * a
        * esum(ws.am(j, k) * ws.ellx[j] * re((pc - a0 * ws.ellt) * ws.zc * ws.zx[k]) for j, k in pairs)
        * DT
    )
    g8 = C(2) * re(
        (pc - a0 * ws.ellt - ws.b0_grad_ell)
        * ws.zc
        * (a0 * ws.dz + ws.b0_dot_grad(ws.z) * DT)
    )
    g9 = -(C(2) * re(ws.phi * (pc - a0 * ws.ellt - ws.b0_grad_ell)) * ws.z * ws.zc * DT)
    return [g1, g2, g3, g4, g5, g6, g7, g8, g9]


def _step_sides(ws: Workspace, key: str) -> tuple[Expr, Expr]:
    a, b, a0 = ws.a, ws.b, ws.a0
    sq = a * a + b * b
    pairs = ws._pairs()
    n = ws.n
    g = _groups_03(ws)
    pc = conj(ws.phi)
    if key == "2":
        lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
        rhs = C(2) * ws.I1 * conj(ws.I1) * DT + C(2) * re(conj(ws.I1) * ws.I2)
        return lhs, rhs
    if key == "03":
        return C(2) * re(conj(ws.I1) * ws.I2), esum(g)
    if key == "3":
        lhs = g[0]
        terms = []
        for j, k in pairs:
            terms.append(-(a * a0 * d_x(ws.am(j, k) * ws.zx[j] * ws.dzc + ws.am(j, k) * ws.zcx[j] * ws.dz, k)))
            terms.append(ito_d(a * a0 * ws.am(j, k) * ws.zx[j] * ws.zcx[k]))
            terms.append(-(a * a0 * d_t(ws.am(j, k)) * ws.zx[j] * ws.zcx[k] * DT))
            terms.append(-(a * a0 * ws.am(j, k) * ws.dzx[j] * ws.dzcx[k]))
        terms.append(-ito_d(a * a0 * ws.A * ws.z * ws.zc))
        terms.append(a * a0 * d_t(ws.A) * ws.z * ws.zc * DT)
        terms.append(a * a0 * ws.A * ws.dz * ws.dzc)
        return lhs, esum(terms)
    if key == "5":
        lhs = g[1]
        terms = []
        for j, k in pairs:
            terms.append(-(C(2) * sq * d_x(ws.A * ws.am(j, k) * ws.ellx[j] * ws.z * ws.zc, k) * DT))
            terms.append(C(2) * sq * d_x(ws.A * ws.am(j, k) * ws.ellx[j], k) * ws.z * ws.zc * DT)
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for jp in range(1, n + 1):
                    for kp in range(1, n + 1):
                        cross = ws.zx[jp] * ws.zcx[k] + ws.zcx[jp] * ws.zx[k]
                        terms.append(
                            -(C(2) * sq * d_x(ws.am(j, k) * ws.ellx[j] * ws.am(jp, kp) * cross, kp) * DT)
                        )
                        terms.append(
                            C(2) * sq * ws.am(jp, kp) * d_x(ws.am(j, k) * ws.ellx[j], kp) * cross * DT
                        )
                        terms.append(
                            C(2)
                            * sq
                            * (
                                d_x(ws.am(j, k) * ws.ellx[j] * ws.am(jp, kp) * ws.zx[jp] * ws.zcx[kp], k)
                                - d_x(ws.am(j, k) * ws.am(jp, kp) * ws.ellx[j], k) * ws.zx[jp] * ws.zcx[kp]
                            )
                            * DT
                        )
        return lhs, esum(terms)
    if key == "6":
        lhs = g[2]
        terms = []
        for j, k in pairs:
            terms.append(C(2) * a * d_x(re(ws.am(j, k) * ws.zcx[j] * ws.phi * ws.z), k) * DT)
            terms.append(-(C(2) * a * re(ws.phi) * ws.am(j, k) * ws.zx[j] * ws.zcx[k] * DT))
            terms.append(-(C(2) * a * re(ws.am(j, k) * d_x(ws.phi, k) * ws.z * ws.zcx[j]) * DT))
        terms.append(C(2) * a * ws.A * re(ws.phi) * ws.z * ws.zc * DT)
        return lhs, esum(terms)
    if key == "10":
        lhs = g[3]
        terms = []
        for j, k in pairs:
            alj = ws.am(j, k) * ws.ellx[j]
            terms.append(C(2) * a0 * b * ito_d(alj * im(ws.zcx[k] * ws.z)))
            terms.append(-(C(2) * a0 * b * d_x(alj * im(ws.z * ws.dzc), k)))
            terms.append(-(C(2) * a0 * b * d_t(alj) * im(ws.zcx[k] * ws.z) * DT))
            terms.append(C(2) * a0 * b * d_x(alj, k) * im(ws.z * ws.dzc))
            terms.append(-(C(2) * a0 * b * alj * im(ws.dz * ws.dzcx[k])))
        return lhs, esum(terms)
    if key == "02":
        lhs = g[5]
        terms = []
        for j, k in pairs:
            terms.append(C(2) * b * d_x(im(ws.am(j, k) * ws.zx[j] * (pc - a0 * ws.ellt) * ws.zc), k) * DT)
            terms.append(C(2) * b * im(ws.phi) * ws.am(j, k) * ws.zx[j] * ws.zcx[k] * DT)
            terms.append(-(C(2) * b * ws.am(j, k) * im(d_x(pc - a0 * ws.ellt, k) * ws.zx[j] * ws.zc) * DT))
        terms.append(-(C(2) * b * ws.A * im(ws.phi) * ws.z * ws.zc * DT))
        return lhs, esum(terms)
    if key == "zr2":
        lhs = g[7]
        rhs = C(2) * re(pc * ws.zc * (a0 * ws.dz + ws.b0_dot_grad(ws.z) * DT)) + _zr0_lhs(ws)
        return lhs, rhs
    if key == "zr0":
        lhs = _zr0_lhs(ws)
        wt = a0 * ws.ellt + ws.b0_grad_ell
        rhs = (
            -ito_d(a0 * wt * ws.z * ws.zc)
            + a0 * (a0 * d_t(ws.ellt) + d_t(ws.b0_grad_ell)) * ws.z * ws.zc * DT
            + a0 * wt * ws.dz * ws.dzc
            - ws.b0_dot_grad(wt * ws.z * ws.zc) * DT
            + ws.b0_dot_grad(wt) * ws.z * ws.zc * DT
        )
        return lhs, rhs
    raise SpecError(f"unknown proof step {key!r}")


def _zr0_lhs(ws: Workspace) -> Expr:
    wt = ws.a0 * ws.ellt + ws.b0_grad_ell
    return -(
        wt
        * (
            ws.a0 * ito_d(ws.z * ws.zc)
            - ws.a0 * ws.dz * ws.dzc
            + ws.b0_dot_grad(ws.z * ws.zc) * DT
        )
    )


def verify_proof_step(key: str, n: int = 2) -> IdentityResidual:
    ws = make_step_workspace(n)
    lhs, rhs = _step_sides(ws, key)
    return _residual(f"proof_step({key})", lhs, rhs, ws.ctx)


def verify_reconstruction(n: int = 2) -> IdentityResidual:
    """Replay the derivation: substitute every proof step's expansion into
    the cross-product split and compare with the grouped right-hand side."""
    ws = make_step_workspace(n)
    g = _groups_03(ws)
    pieces = [C(2) * ws.I1 * conj(ws.I1) * DT]
    for key in ("3", "5", "6", "10", "02"):
        pieces.append(_step_sides(ws, key)[1])
    pieces.extend([g[4], g[6], g[8]])
    pieces.append(
        C(2) * re(conj(ws.phi) * ws.zc * (ws.a0 * ws.dz + ws.b0_dot_grad(ws.z) * DT))
    )
    pieces.append(_step_sides(ws, "zr0")[1])
    assembled = esum(pieces)
    rhs = esum(e for _, e in rhs_groups(ws))
    return _residual(f"reconstruction(n={n})", assembled, rhs, ws.ctx)


# ---------------------------------------------------------------------------
# Specializations
# ---------------------------------------------------------------------------


@dataclass
class VerificationCase:
    """One catalog entry: both sides, a detectable corruption, and a
    factory for oracle assignments consistent with the case's rewrites."""

    case_id: str
    ctx: Context
    lhs: Expr
    rhs: Expr
    mutated_rhs: Expr
    mutation_note: str
    make_assignment: Callable[[int], tuple[JetAssignment, tuple]]


def _plain_oracle(ctx: Context, degree: int = 2, filter_t: bool = False,
                  filter_x: bool = False, fixed_fn=None, exp_rates=()):
    def factory(seed: int):
        fixed = fixed_fn(seed) if fixed_fn else None
        a = jo.random_assignment(ctx, seed, degree=degree, exp_rates=exp_rates, fixed=fixed)
        if filter_t or filter_x:
            tix = ctx.n
            keep_fixed = set(fixed or ())
            for name, poly in list(a.polys.items()):
                if name in keep_fixed:
                    continue
                if filter_t:
                    poly = {e: c for e, c in poly.items() if e[tix] == 0}
                if filter_x:
                    poly = {e: c for e, c in poly.items() if all(e[j] == 0 for j in range(tix))}
                a.polys[name] = poly
        rng = random.Random(seed ^ 0x5EED)
        pt = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(a.nvars))
        return a, pt
    return factory


def _theorem_case(case_id: str, spec: OperatorSpec, drop_group: str) -> VerificationCase:
    ws = make_theorem_workspace(spec)
    lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
    groups = rhs_groups(ws)
    rhs = esum(e for _, e in groups)
    mutated = esum(e for name, e in groups if name != drop_group)
    return VerificationCase(
        case_id=case_id,
        ctx=ws.ctx,
        lhs=lhs,
        rhs=rhs,
        mutated_rhs=mutated,
        mutation_note=f"dropped the {drop_group} term",
        make_assignment=_plain_oracle(ws.ctx),
    )


def _case_transport(n: int = 2) -> VerificationCase:
    ctx = Context(n=n)
    ell = ctx.real_field("ell")
    b0 = [ctx.real_scalar(f"b0{j}") for j in range(1, n + 1)]
    z, _, _ = ctx.semimartingale("z", real=True)
    ws = Workspace(
        ctx, z, C(1), C(0), C(0), b0,
        {(j, k): (C(1) if j == k else C(0)) for j in range(1, n + 1) for k in range(j, n + 1)},
        ell, C(0),
    )
    wt = ws.ellt + ws.b0_grad_ell
    lhs = C(2) * ws.I1 * ws.theta_L
    groups = [
        C(2) * ws.I1 * conj(ws.I1) * DT,
        -ito_d(wt * ws.z * ws.zc),
        ws.B_coef() * ws.z * ws.zc * DT,
        -(ws.b0_dot_grad(wt * ws.z * ws.zc) * DT),
        wt * ws.dz * ws.dzc,
    ]
    return VerificationCase(
        case_id="transport",
        ctx=ctx,
        lhs=lhs,
        rhs=esum(groups),
        mutated_rhs=esum(groups[:2] + groups[3:]),
        mutation_note="dropped the energy term",
        make_assignment=_plain_oracle(ctx),
    )


def _case_ginzburg_landau(n: int = 2) -> VerificationCase:
    ctx = Context(n=n)
    mu = ctx.real_scalar("mu")
    b = ctx.real_scalar("b")
    phi_w = ctx.rewrite_field("phi", real=True, dx=[C(0)] * n)
    ctx.set_rewrite("phi", "t", C(3) * mu * phi_w)
    z, _, _ = ctx.semimartingale("z")
    ws = Workspace(
        ctx, z, C(1), C(1), b,
        [C(0)] * n,
        {(j, k): (C(1) if j == k else C(0)) for j in range(1, n + 1) for k in range(j, n + 1)},
        mu * phi_w, -mu,
    )
    lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
    grad_sq = esum(ws.zx[j] * ws.zcx[j] for j in range(1, n + 1))
    coef = mu + C(3) * mu * mu * phi_w
    Vk = {
        k: (
            -(C(2) * re(ws.zx[k] * ws.dzc + mu * ws.zcx[k] * ws.z * DT))
            - C(2) * b * coef * im(ws.zx[k] * ws.zc) * DT
        )
        for k in range(1, n + 1)
    }
    groups = [
        C(2) * ws.I1 * conj(ws.I1) * DT,
        ito_d(grad_sq - C(3) * mu * mu * phi_w * ws.z * ws.zc),
        esum(d_x(Vk[k], k) for k in range(1, n + 1)),
        mu * mu * (C(3) * mu * phi_w - C(2)) * ws.z * ws.zc * DT,
        C(2) * mu * grad_sq * DT,
        -esum(ws.dzx[j] * ws.dzcx[j] for j in range(1, n + 1)),
        -(C(2) * mu * re(ws.zc * ws.dz)),
        C(3) * mu * mu * phi_w * ws.dz * ws.dzc,
    ]

    def fixed_fn(seed: int):
        nv = ctx.n + 1 + 1
        rng = random.Random(seed * 31 + 5)
        mu_val = Fraction(rng.randint(1, 4), rng.randint(1, 3))
        fixed_fn.rate = 3 * mu_val
        return {
            "phi": jo.p_var(nv - 1, nv),
            "mu": jo.p_const(jo.QQi(mu_val), nv),
        }

    def factory(seed: int):
        fixed = fixed_fn(seed)
        a = jo.random_assignment(ctx, seed, degree=2, exp_rates=(fixed_fn.rate,), fixed=fixed)
        rng = random.Random(seed ^ 0x5EED)
        pt = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(a.nvars))
        return a, pt

    return VerificationCase(
        case_id="ginzburg_landau",
        ctx=ctx,
        lhs=lhs,
        rhs=esum(groups),
        mutated_rhs=esum(groups[:3] + groups[4:]),
        mutation_note="dropped the mass energy term",
        make_assignment=factory,
    )


def _heat_sides(n: int = 2) -> tuple[Workspace, Expr, list[Expr], Expr]:
    """Shared construction for the stochastic heat specialization.

    Returns the workspace, the left side, the derived right-side groups,
    and the first-order term whose sign distinguishes the derived form
    from the printed one.
    """
    ctx = Context(n=n)
    ell = ctx.real_field("ell")
    z, _, _ = ctx.semimartingale("z", real=True)
    lap_ell = esum(d_x(d_x(ell, j), j) for j in range(1, n + 1))
    phi = C(2) * lap_ell
    ws = Workspace(
        ctx, z, C(1), C(-1), C(0), [C(0)] * n,
        {(j, k): (C(1) if j == k else C(0)) for j in range(1, n + 1) for k in range(j, n + 1)},
        ell, phi,
    )
    A = esum(ws.ellx[j] * ws.ellx[j] for j in range(1, n + 1)) - lap_ell
    I1 = esum(d_x(ws.zx[j], j) for j in range(1, n + 1)) + A * ws.z + (phi - ws.ellt) * ws.z
    lhs = C(2) * I1 * ws.theta_L
    grad_sq = esum(ws.zx[j] * ws.zcx[j] for j in range(1, n + 1))
    M = A * ws.z * ws.z - grad_sq - ws.ellt * ws.z * ws.z
    B = (
        C(2) * esum(d_x(A * ws.ellx[j], j) for j in range(1, n + 1))
        - d_t(A)
        - C(2) * A * phi
        - C(2) * (phi * phi - ws.ellt * phi)
        + d_t(ws.ellt)
    )
    def Dc(j, k):
        diag = C(2) * phi - C(2) * lap_ell if j == k else C(0)
        return diag + C(4) * d_x(ws.ellx[j], k)
    Vk = {
        k: (
            C(2) * ws.zx[k] * ws.dz
            - C(2) * A * ws.ellx[k] * ws.z * ws.z * DT
            - C(2) * ws.zx[k] * phi * ws.z * DT
            + C(2) * grad_sq * ws.ellx[k] * DT
            - C(4) * esum(ws.ellx[j] * ws.zx[j] for j in range(1, n + 1)) * ws.zx[k] * DT
        )
        for k in range(1, n + 1)
    }
    def Ec(j):
        return C(2) * ws.ellx[j] * (phi - ws.ellt) - d_x(phi, j)
    e_term = C(2) * esum(Ec(j) * ws.z * ws.zx[j] for j in range(1, n + 1)) * DT
    groups = [
        C(2) * I1 * I1 * DT,
        ito_d(M),
        esum(d_x(Vk[k], k) for k in range(1, n + 1)),
        B * ws.z * ws.z * DT,
        esum(Dc(j, k) * ws.zx[j] * ws.zx[k] for j in range(1, n + 1) for k in range(1, n + 1)) * DT,
        -e_term,
        esum(ws.dzx[j] * ws.dzx[j] for j in range(1, n + 1)),
        (-A + ws.ellt) * ws.dz * ws.dz,
        C(2) * phi * ws.z * ws.dz,
    ]
    return ws, lhs, groups, e_term


def _case_heat_identity(n: int = 2) -> VerificationCase:
    ws, lhs, groups, e_term = _heat_sides(n)
    # The corruption flips the first-order coupling back to the printed
    # sign, which is exactly the delta recorded by printed_form_deltas.
    mutated = esum(groups[:5] + [e_term] + groups[6:])
    return VerificationCase(
        case_id="heat_identity",
        ctx=ws.ctx,
        lhs=lhs,
        rhs=esum(groups),
        mutated_rhs=mutated,
        mutation_note="flipped the sign of the first-order coupling",
        make_assignment=_plain_oracle(ws.ctx),
    )


def _case_elliptic(n: int = 2) -> tuple[VerificationCase, Expr, Expr]:
    """The time-independent divergence-form specialization.

    Returns the case plus (printed_Vk_divergence, derived_Vk_divergence)
    used to record the printed-corollary delta.
    """
    ctx = Context(n=n)
    ell = ctx.real_field("ell")
    phi = ctx.real_field("Phi")
    ajk = {}
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            ajk[(j, k)] = ctx.real_field(f"a{j}{k}")
    z = ctx.real_field("z")
    ws = Workspace(ctx, z, C(0), C(-1), C(0), [C(0)] * n, ajk, ell, phi)
    pairs = ws._pairs()
    I1 = ws.Lam + phi * ws.z
    # L acts through theta as a plain second-order divergence form; the dt
    # factor is dropped since nothing here is stochastic.
    W = {j: ws.zx[j] - ws.ellx[j] * ws.z for j in range(1, n + 1)}
    op = esum(
        d_x(ws.am(j, k) * W[j], k) - ws.ellx[k] * ws.am(j, k) * W[j] for j, k in pairs
    )
    lhs = C(2) * I1 * op
    B = (
        C(2) * esum(d_x(ws.A * ws.am(j, k) * ws.ellx[j], k) for j, k in pairs)
        - C(2) * ws.A * phi
        - C(2) * phi * phi
    )
    def Dc(j, k):
        inner = []
        for jp in range(1, n + 1):
            for kp in range(1, n + 1):
                inner.append(C(2) * ws.am(j, kp) * d_x(ws.am(jp, k) * ws.ellx[jp], kp))
                inner.append(-d_x(ws.am(j, k) * ws.am(jp, kp) * ws.ellx[jp], kp))
        return C(2) * phi * ws.am(j, k) + C(2) * esum(inner)
    def V_tail(k):
        t = []
        for j in range(1, n + 1):
            for jp in range(1, n + 1):
                for kp in range(1, n + 1):
                    t.append(ws.am(j, k) * ws.am(jp, kp) * ws.ellx[j] * ws.zx[jp] * ws.zx[kp])
                    t.append(
                        -(ws.am(j, kp) * ws.am(jp, k) * ws.ellx[j] * (ws.zx[jp] * ws.zx[kp] + ws.zx[jp] * ws.zx[kp]))
                    )
        return esum(t)
    def V_derived(k):
        return (
            -(C(2) * ws.A * esum(ws.am(j, k) * ws.ellx[j] for j in range(1, n + 1)) * ws.z * ws.z)
            - C(2) * phi * ws.z * esum(ws.am(j, k) * ws.zx[j] for j in range(1, n + 1))
            + C(2) * V_tail(k)
        )
    def V_printed(k):
        return (
            -(C(2) * ws.A * esum(ws.am(j, k) * ws.ellx[j] for j in range(1, n + 1)) * ws.z * ws.z)
            - C(2) * phi * ws.z * esum(ws.am(j, k) for j in range(1, n + 1))
            + C(2) * V_tail(k)
        )
    e_term = -(
        C(2)
        * esum(
            ws.am(j, k) * (C(2) * ws.ellx[k] * phi - d_x(phi, k)) * ws.z * ws.zx[j]
            for j, k in pairs
        )
    )
    div_derived = esum(d_x(V_derived(k), k) for k in range(1, n + 1))
    div_printed = esum(d_x(V_printed(k), k) for k in range(1, n + 1))
    groups = [
        C(2) * I1 * I1,
        div_derived,
        B * ws.z * ws.z,
        esum(Dc(j, k) * ws.zx[j] * ws.zx[k] for j in range(1, n + 1) for k in range(1, n + 1)),
        e_term,
    ]
    case = VerificationCase(
        case_id="elliptic",
        ctx=ctx,
        lhs=lhs,
        rhs=esum(groups),
        mutated_rhs=esum(groups[:2] + groups[3:]),
        mutation_note="dropped the energy term",
        make_assignment=_plain_oracle(ctx, filter_t=True),
    )
    return case, div_printed, div_derived


def _case_schrodinger(n: int = 2) -> VerificationCase:
    ctx = Context(n=n)
    ell = ctx.real_field("ell")
    psi = ctx.complex_field("Psi")
    u, _, _ = ctx.semimartingale("u")
    tag1 = ctx.real_scalar("tag1")
    tag2 = ctx.real_scalar("tag2")
    z = I * u
    phi = -(I * psi)
    ws = Workspace(
        ctx, z, C(1), C(0), C(1), [C(0)] * n,
        {(j, k): (C(1) if j == k else C(0)) for j in range(1, n + 1) for k in range(j, n + 1)},
        ell, phi,
    )
    lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
    rhs_main = esum(e for _, e in rhs_groups(ws))
    # The same operator written for v = -i w and u = theta v: the weighted
    # actions must agree, and I1 must collapse to the first-order form
    # -i ell_t u - 2 grad ell . grad u + Psi u.
    I1_target = (
        -(I * d_t(ell) * u)
        - C(2) * esum(d_x(ell, j) * d_x(u, j) for j in range(1, n + 1))
        + psi * u
    )
    Wu = {j: d_x(u, j) - d_x(ell, j) * u for j in range(1, n + 1)}
    theta_P = I * (ito_d(u) - d_t(ell) * u * DT) + esum(
        d_x(Wu[j], j) - d_x(ell, j) * Wu[j] for j in range(1, n + 1)
    ) * DT
    lhs_total = lhs + tag1 * (ws.I1 - I1_target) + tag2 * (ws.theta_L - theta_P)
    groups = rhs_groups(ws)
    mutated = esum(e for name, e in groups if name != "zero_order")
    return VerificationCase(
        case_id="schrodinger",
        ctx=ctx,
        lhs=lhs_total,
        rhs=rhs_main,
        mutated_rhs=mutated,
        mutation_note="dropped the energy term",
        make_assignment=_plain_oracle(ctx),
    )


def _case_fst(n: int = 2) -> VerificationCase:
    ctx = Context(n=n)
    lam = ctx.real_scalar("lam")
    tag1 = ctx.real_scalar("tag1")
    u = ctx.real_field("u")
    g = [ctx.real_field(f"g{j}") for j in range(1, n + 1)]
    xi = []
    for j in range(1, n + 1):
        dxs = [C(1) if k == j else C(0) for k in range(1, n + 1)]
        xi.append(ctx.rewrite_field(f"xi{j}", real=True, dx=dxs, dt=C(0)))
    # Weight exponent ell = lam * sum xi_j^2, so ell_xj = 2 lam xi_j.
    ellx = [C(2) * lam * xi[j - 1] for j in range(1, n + 1)]
    half = C(1, 2)
    lhs_main = u * esum(g[j - 1] * d_x(u, j) for j in range(1, n + 1))
    lhs_mid = esum(g[j - 1] * d_x(half * u * u, j) for j in range(1, n + 1))
    div_term = esum(
        C(2) * ellx[j - 1] * (half * u * u * g[j - 1]) + d_x(half * u * u * g[j - 1], j)
        for j in range(1, n + 1)
    )
    absorb = (
        half * esum(d_x(g[j - 1], j) for j in range(1, n + 1))
        + C(2) * lam * esum(g[j - 1] * xi[j - 1] for j in range(1, n + 1))
    ) * u * u
    lhs = lhs_main + tag1 * (lhs_main - lhs_mid)
    rhs = div_term - absorb
    mutated = div_term - (
        C(2) * lam * esum(g[j - 1] * xi[j - 1] for j in range(1, n + 1)) * u * u
    )

    def fixed_fn(seed: int):
        rng = random.Random(seed * 17 + 3)
        nv = ctx.n + 1
        out = {}
        for j in range(1, n + 1):
            x0j = Fraction(rng.randint(1, 6), rng.randint(1, 3))
            out[f"xi{j}"] = jo.p_add(jo.p_var(j - 1, nv), jo.p_const(jo.QQi(-x0j), nv))
        return out

    return VerificationCase(
        case_id="fst",
        ctx=ctx,
        lhs=lhs,
        rhs=rhs,
        mutated_rhs=mutated,
        mutation_note="dropped the divergence absorption term",
        make_assignment=_plain_oracle(ctx, filter_t=True, fixed_fn=fixed_fn),
    )


def _case_ode(components: int = 3) -> VerificationCase:
    ctx = Context(n=1)
    lam = ctx.real_scalar("lam")
    ys = []
    for j in range(1, components + 1):
        y = ctx.real_field(f"y{j}")
        ctx.set_rewrite(f"y{j}", "x1", C(0))
        ys.append(y)
    sq = esum(y * y for y in ys)
    lhs = C(2) * esum(y * d_t(y) for y in ys)
    decay = -(lam * sq) + d_t(sq)
    rhs = decay + lam * sq
    mutated = decay
    return VerificationCase(
        case_id="ode",
        ctx=ctx,
        lhs=lhs,
        rhs=rhs,
        mutated_rhs=mutated,
        mutation_note="dropped the energy term",
        make_assignment=_plain_oracle(ctx, filter_x=True),
    )


def _case_c02(n: int = 2) -> VerificationCase:
    ctx = Context(n=n)
    z, _, _ = ctx.semimartingale("z")
    tags = [ctx.real_scalar(f"tag{j}") for j in range(1, 2 * n + 1)]
    lhs_terms = []
    rhs_terms = []
    mut_terms = []
    for k in range(1, n + 1):
        zc = conj(z)
        left = im(d_x(zc, k) * ito_d(z))
        chain = im(
            ito_d(d_x(zc, k) * z)
            - d_x(z * ito_d(zc), k)
            - ito_d(d_x(zc, k)) * ito_d(z)
            + d_x(z, k) * ito_d(zc)
        )
        right = -im(d_x(z, k) * ito_d(zc))
        lhs_terms.append(tags[2 * (k - 1)] * left + tags[2 * k - 1] * left)
        rhs_terms.append(tags[2 * (k - 1)] * chain + tags[2 * k - 1] * right)
        mut_terms.append(tags[2 * (k - 1)] * chain - tags[2 * k - 1] * right)
    return VerificationCase(
        case_id="c02",
        ctx=ctx,
        lhs=esum(lhs_terms),
        rhs=esum(rhs_terms),
        mutated_rhs=esum(mut_terms),
        mutation_note="flipped the antisymmetry sign",
        make_assignment=_plain_oracle(ctx),
    )


def _case_proof_step(key: str, n: int = 2) -> VerificationCase:
    ws = make_step_workspace(n)
    lhs, rhs = _step_sides(ws, key)
    # The steps have heterogeneous structure, so the corruption is a
    # uniform spurious term rather than a per-step dropped piece.  The
    # oracle must respect the null products a*b0^j and b*b0^j, which the
    # cross-product expansion relies on.
    mutated = rhs + ws.z * ws.zc * DT
    return VerificationCase(
        case_id=f"proof_step({key})",
        ctx=ws.ctx,
        lhs=lhs,
        rhs=rhs,
        mutated_rhs=mutated,
        mutation_note="added a spurious mass term",
        make_assignment=_raw_oracle(ws),
    )


def build_case(case_id: str) -> VerificationCase:
    if case_id == "elliptic":
        return _case_elliptic()[0]
    if case_id == "transport":
        return _case_transport()
    if case_id == "ginzburg_landau":
        return _case_ginzburg_landau()
    if case_id == "schrodinger":
        return _case_schrodinger()
    if case_id == "heat_identity":
        return _case_heat_identity()
    if case_id == "fst":
        return _case_fst()
    if case_id == "ode":
        return _case_ode()
    if case_id == "c02":
        return _case_c02()
    if case_id.startswith("proof_step(") and case_id.endswith(")"):
        key = case_id[len("proof_step("):-1]
        if key in PROOF_STEPS:
            return _case_proof_step(key)
    raise SpecError(f"unknown case id {case_id!r}")


def verify_special(case_id: str) -> IdentityResidual:
    case = build_case(case_id)
    return _residual(case.case_id, case.lhs, case.rhs, case.ctx)


def printed_form_deltas() -> dict[str, CanonicalForm]:
    """Canonical deltas between two printed specializations and the forms
    obtained by substituting into the general identity.

    heat_first_order: the printed first-order coupling enters with a plus
    sign; the substitution produces a minus sign.  elliptic_flux: one
    printed flux term omits a gradient factor.  Both deltas are recorded
    rather than silently corrected.
    """
    ws, _, _, e_term = _heat_sides(2)
    heat_delta = canonicalize(C(2) * e_term, ws.ctx)
    case, div_printed, div_derived = _case_elliptic(2)
    elliptic_delta = canonicalize(div_printed - div_derived, case.ctx)
    return {
        "heat_first_order": heat_delta,
        "elliptic_flux": elliptic_delta,
    }


# ---------------------------------------------------------------------------
# Exact numeric spot checks
# ---------------------------------------------------------------------------


def numeric_residual(target, seed: int, assignments: int = 4, points: int = 5,
                     mutated: bool = False) -> list[JetValue]:
    """Exact polynomial evaluations of an identity residual.

    target is either an OperatorSpec (general identity) or a case id.
    Returns one JetValue per (assignment, point); for an intact identity
    every component of every value is exactly zero.
    """
    if isinstance(target, OperatorSpec):
        ws = make_theorem_workspace(target)
        lhs = C(2) * re(conj(ws.I1) * ws.theta_L)
        groups = rhs_groups(ws)
        rhs = esum(e for name, e in groups if not (mutated and name == "zero_order"))
        ctx = ws.ctx
        factory = _plain_oracle(ctx)
        if target.regime == "raw":
            factory = _raw_oracle(ws)
    else:
        case = build_case(target)
        ctx = case.ctx
        lhs = case.lhs
        rhs = case.mutated_rhs if mutated else case.rhs
        factory = case.make_assignment
    residual = lhs - rhs
    out = []
    for i in range(assignments):
        assignment, base_pt = factory(seed + 101 * i)
        rng = random.Random(seed + 7919 * i)
        pts = [
            tuple(
                Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                for _ in range(assignment.nvars)
            )
            for _ in range(points)
        ]
        pts.append(base_pt)
        out.extend(eval_jet_many(residual, assignment, pts))
    return out


def _raw_oracle(ws: Workspace):
    base = _plain_oracle(ws.ctx)

    def factory(seed: int):
        a, pt = base(seed)
        if seed % 2 == 0:
            for j in range(1, ws.n + 1):
                a.polys[f"b0{j}"] = {}
        else:
            a.polys["a"] = {}
            a.polys["b"] = {}
        return a, pt

    return factory
