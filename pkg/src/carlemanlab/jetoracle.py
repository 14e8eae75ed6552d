"""Independent numeric oracle: exact polynomial evaluation of expressions.

Every declared symbol is assigned a polynomial over the coordinates
(x1..xn, t) and optionally over auxiliary exponential generators E_i
satisfying d/dt E_i = c_i E_i with rational c_i (these model weights like
e^{3 mu t} without leaving the polynomial ring).  An expression then
evaluates to three exact rational-complex numbers: the differential-free
part and the dt and dB coefficients.

This module never builds canonical forms and never touches the
canonicalizer's Ito-table code; it re-derives the product rules directly
on polynomials, so it is an independent check of the symbolic pipeline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import QQi
from .exprs import (
    Add,
    Conj,
    Const,
    Context,
    DBAtom,
    DIto,
    DtAtom,
    Dt,
    Dx,
    Expr,
    ExprError,
    ImPart,
    Mul,
    Pow,
    RePart,
    Sym,
)

# A polynomial is a dict: exponent tuple -> QQi.  The exponent tuple has
# length n + 1 + n_exp: spatial coordinates, then t, then the exponential
# generators.

Poly = dict


def p_zero() -> Poly:
    return {}


def p_const(c: QQi, nvars: int) -> Poly:
    if c.is_zero():
        return {}
    return {(0,) * nvars: c}


def p_var(idx: int, nvars: int) -> Poly:
    exps = [0] * nvars
    exps[idx] = 1
    return {tuple(exps): QQi(1)}


def p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        cur = out.get(e)
        new = c if cur is None else cur + c
        if new.is_zero():
            out.pop(e, None)
        else:
            out[e] = new
    return out


def p_scale(a: Poly, c: QQi) -> Poly:
    if c.is_zero():
        return {}
    return {e: k * c for e, k in a.items()}


def p_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            cur = out.get(e)
            new = c if cur is None else cur + c
            if new.is_zero():
                out.pop(e, None)
            else:
                out[e] = new
    return out


def p_conj(a: Poly) -> Poly:
    # All generators are real-valued, so conjugation only touches coefficients.
    return {e: c.conj() for e, c in a.items()}


@dataclass
class JetAssignment:
    """Polynomial values for every symbol plus the exponential generators.

    exp_rates[i] is c_i in d/dt E_i = c_i E_i.  polys maps symbol name to
    its polynomial.  Consistency with any derivative rewrites declared on
    the context is the caller's responsibility (the builders in
    `identity` construct consistent assignments).
    """

    ctx: Context
    polys: dict[str, Poly]
    exp_rates: tuple[Fraction, ...] = ()

    @property
    def nvars(self) -> int:
        return self.ctx.n + 1 + len(self.exp_rates)

    def t_index(self) -> int:
        return self.ctx.n

    def diff(self, p: Poly, var_idx: int) -> Poly:
        """d/dvar of a polynomial; for t also applies the E_i growth rules."""
        out: Poly = {}
        tix = self.t_index()
        for exps, c in p.items():
            k = exps[var_idx]
            if k:
                e2 = list(exps)
                e2[var_idx] = k - 1
                e2 = tuple(e2)
                add = c * QQi(k)
                cur = out.get(e2)
                new = add if cur is None else cur + add
                if new.is_zero():
                    out.pop(e2, None)
                else:
                    out[e2] = new
            if var_idx == tix and self.exp_rates:
                rate = Fraction(0)
                for i, ci in enumerate(self.exp_rates):
                    rate += exps[tix + 1 + i] * ci
                if rate:
                    add = c * QQi(rate)
                    cur = out.get(exps)
                    new = add if cur is None else cur + add
                    if new.is_zero():
                        out.pop(exps, None)
                    else:
                        out[exps] = new
        return out


@dataclass(frozen=True)
class JetValue:
    """Exact evaluation result: plain part plus dt and dB coefficients."""

    value: QQi
    dt: QQi
    dB: QQi

    @property
    def is_zero(self) -> bool:
        return self.value.is_zero() and self.dt.is_zero() and self.dB.is_zero()

    def differential_pair(self) -> tuple[QQi, QQi]:
        return (self.dt, self.dB)


class _Eval:
    def __init__(self, assignment: JetAssignment):
        self.a = assignment
        self.nv = assignment.nvars
        self.zero = p_zero()
        self.memo: dict[int, tuple[Poly, Poly, Poly]] = {}
        self.dmemo: dict[int, tuple[Poly, Poly]] = {}

    # -- plain/differential triple ------------------------------------

    def run(self, e: Expr) -> tuple[Poly, Poly, Poly]:
        key = id(e)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._run(e)
        self.memo[key] = out
        return out

    def _sym_poly(self, e: Sym) -> Poly:
        name = e.sym.name
        try:
            return self.a.polys[name]
        except KeyError:
            raise ExprError(f"no polynomial assigned to symbol {name!r}") from None

    def _run(self, e: Expr) -> tuple[Poly, Poly, Poly]:
        z = self.zero
        if isinstance(e, Const):
            return (p_const(e.value, self.nv), z, z)
        if isinstance(e, Sym):
            return (self._sym_poly(e), z, z)
        if isinstance(e, DtAtom):
            return (z, p_const(QQi(1), self.nv), z)
        if isinstance(e, DBAtom):
            return (z, z, p_const(QQi(1), self.nv))
        if isinstance(e, Add):
            p, qt, qb = z, z, z
            for t in e.terms:
                tp, tt, tb = self.run(t)
                p, qt, qb = p_add(p, tp), p_add(qt, tt), p_add(qb, tb)
            return (p, qt, qb)
        if isinstance(e, Mul):
            p, qt, qb = p_const(QQi(1), self.nv), z, z
            for f in e.factors:
                fp, ft, fb = self.run(f)
                # (p + qt dt + qb dB)(fp + ft dt + fb dB) with the Ito table
                ndt = p_add(
                    p_add(p_mul(p, ft), p_mul(qt, fp)), p_mul(qb, fb)
                )
                ndb = p_add(p_mul(p, fb), p_mul(qb, fp))
                p, qt, qb = p_mul(p, fp), ndt, ndb
            return (p, qt, qb)
        if isinstance(e, Pow):
            p, qt, qb = p_const(QQi(1), self.nv), z, z
            for _ in range(e.exp):
                fp, ft, fb = self.run(e.base)
                ndt = p_add(p_add(p_mul(p, ft), p_mul(qt, fp)), p_mul(qb, fb))
                ndb = p_add(p_mul(p, fb), p_mul(qb, fp))
                p, qt, qb = p_mul(p, fp), ndt, ndb
            return (p, qt, qb)
        if isinstance(e, Dx):
            p, qt, qb = self.run(e.arg)
            j = e.j - 1
            return (self.a.diff(p, j), self.a.diff(qt, j), self.a.diff(qb, j))
        if isinstance(e, Dt):
            if _contains_semimartingale(e.arg, self.a.ctx):
                raise ExprError("time derivative applied over a semimartingale")
            p, qt, qb = self.run(e.arg)
            tix = self.a.t_index()
            return (self.a.diff(p, tix), self.a.diff(qt, tix), self.a.diff(qb, tix))
        if isinstance(e, DIto):
            ddt, ddb = self.dval(e.arg)
            return (z, ddt, ddb)
        if isinstance(e, Conj):
            p, qt, qb = self.run(e.arg)
            return (p_conj(p), p_conj(qt), p_conj(qb))
        if isinstance(e, RePart):
            p, qt, qb = self.run(e.arg)
            half = QQi(Fraction(1, 2))
            return tuple(
                p_scale(p_add(c, p_conj(c)), half) for c in (p, qt, qb)
            )  # type: ignore[return-value]
        if isinstance(e, ImPart):
            p, qt, qb = self.run(e.arg)
            mih = QQi(0, Fraction(-1, 2))
            return tuple(
                p_scale(p_add(c, p_scale(p_conj(c), QQi(-1))), mih)
                for c in (p, qt, qb)
            )  # type: ignore[return-value]
        raise ExprError(f"cannot evaluate node {type(e).__name__}")

    # -- Ito differential of a differential-free expression -------------

    def dval(self, e: Expr) -> tuple[Poly, Poly]:
        key = id(e)
        hit = self.dmemo.get(key)
        if hit is not None:
            return hit
        out = self._dval(e)
        self.dmemo[key] = out
        return out

    def _dval(self, e: Expr) -> tuple[Poly, Poly]:
        z = self.zero
        if isinstance(e, Const):
            return (z, z)
        if isinstance(e, (DtAtom, DBAtom, DIto)):
            raise ExprError("d() applied to an expression already containing dt or dB")
        if isinstance(e, Sym):
            sym = e.sym
            if sym.semimartingale:
                if sym.jets is None:
                    raise ExprError(f"semimartingale {sym.name!r} has no registered jets")
                p, q = sym.jets
                return (self.a.polys[p.name], self.a.polys[q.name])
            if sym.kind == "real-scalar":
                return (z, z)
            return (self.a.diff(self._sym_poly(e), self.a.t_index()), z)
        if isinstance(e, Add):
            dt_, db_ = z, z
            for t in e.terms:
                tdt, tdb = self.dval(t)
                dt_, db_ = p_add(dt_, tdt), p_add(db_, tdb)
            return (dt_, db_)
        if isinstance(e, Mul):
            return self._dval_product(list(e.factors))
        if isinstance(e, Pow):
            return self._dval_product([e.base] * e.exp)
        if isinstance(e, Dx):
            ddt, ddb = self.dval(e.arg)
            j = e.j - 1
            return (self.a.diff(ddt, j), self.a.diff(ddb, j))
        if isinstance(e, Dt):
            ddt, ddb = self.dval(e.arg)
            tix = self.a.t_index()
            return (self.a.diff(ddt, tix), self.a.diff(ddb, tix))
        if isinstance(e, Conj):
            ddt, ddb = self.dval(e.arg)
            return (p_conj(ddt), p_conj(ddb))
        if isinstance(e, RePart):
            ddt, ddb = self.dval(e.arg)
            half = QQi(Fraction(1, 2))
            return (
                p_scale(p_add(ddt, p_conj(ddt)), half),
                p_scale(p_add(ddb, p_conj(ddb)), half),
            )
        if isinstance(e, ImPart):
            ddt, ddb = self.dval(e.arg)
            mih = QQi(0, Fraction(-1, 2))
            return (
                p_scale(p_add(ddt, p_scale(p_conj(ddt), QQi(-1))), mih),
                p_scale(p_add(ddb, p_scale(p_conj(ddb), QQi(-1))), mih),
            )
        raise ExprError(f"cannot apply d() over node {type(e).__name__}")

    def _dval_product(self, factors: list[Expr]) -> tuple[Poly, Poly]:
        z = self.zero
        if not factors:
            return (z, z)
        head, rest = factors[0], factors[1:]
        hdt, hdb = self.dval(head)
        if not rest:
            return (hdt, hdb)
        rdt, rdb = self._dval_product(rest)
        hp = self.run(head)[0]
        rp = p_const(QQi(1), self.nv)
        for f in rest:
            rp = p_mul(rp, self.run(f)[0])
        # d(uv) = u dv + v du + du dv, with du dv = (dB parts) dt
        out_dt = p_add(p_add(p_mul(hp, rdt), p_mul(rp, hdt)), p_mul(hdb, rdb))
        out_db = p_add(p_mul(hp, rdb), p_mul(rp, hdb))
        return (out_dt, out_db)


def _contains_semimartingale(e: Expr, ctx: Context) -> bool:
    if isinstance(e, Sym):
        return e.sym.semimartingale
    if isinstance(e, (Add, Mul)):
        kids = e.terms if isinstance(e, Add) else e.factors
        return any(_contains_semimartingale(k, ctx) for k in kids)
    if isinstance(e, (Pow,)):
        return _contains_semimartingale(e.base, ctx)
    if isinstance(e, (Dx, Dt)):
        return _contains_semimartingale(e.arg, ctx)
    if isinstance(e, (DIto, Conj, RePart, ImPart)):
        return _contains_semimartingale(e.arg, ctx)
    return False


def p_eval(p: Poly, point: tuple) -> QQi:
    total = QQi(0)
    for exps, c in p.items():
        term = c
        for x, k in zip(point, exps):
            if k:
                term = term * (QQi(x) ** k)
        total = total + term
    return total


def eval_jet_many(expr: Expr, assignment: JetAssignment, points) -> list[JetValue]:
    """Evaluate expr at several points, sharing one tree traversal."""
    ev = _Eval(assignment)
    p, qt, qb = ev.run(expr)
    out = []
    for point in points:
        if len(point) != assignment.nvars:
            raise ExprError(
                f"point has {len(point)} coordinates, assignment needs {assignment.nvars}"
            )
        out.append(JetValue(p_eval(p, point), p_eval(qt, point), p_eval(qb, point)))
    return out


def eval_jet(expr: Expr, assignment: JetAssignment, point: tuple) -> JetValue:
    """Evaluate expr exactly at a rational point.

    point supplies values for (x1..xn, t, E1..Em) in order.  Returns the
    plain value and the dt and dB coefficients; for a verified identity
    residual all three are exactly zero.
    """
    if len(point) != assignment.nvars:
        raise ExprError(
            f"point has {len(point)} coordinates, assignment needs {assignment.nvars}"
        )
    ev = _Eval(assignment)
    p, qt, qb = ev.run(expr)
    return JetValue(p_eval(p, point), p_eval(qt, point), p_eval(qb, point))


# ---------------------------------------------------------------------------
# Random assignments and points
# ---------------------------------------------------------------------------


def random_polynomial(
    rng: random.Random,
    nvars: int,
    degree: int = 3,
    terms: int = 5,
    real: bool = False,
    constant: bool = False,
) -> Poly:
    """Sparse random polynomial with small rational coefficients."""

    def coeff() -> QQi:
        num = rng.randint(-6, 6) or 1
        den = rng.randint(1, 4)
        if real:
            return QQi(Fraction(num, den))
        return QQi(Fraction(num, den), Fraction(rng.randint(-6, 6), rng.randint(1, 4)))

    out: Poly = {}
    if constant:
        return {(0,) * nvars: coeff()}
    for _ in range(terms):
        exps = [0] * nvars
        budget = rng.randint(0, degree)
        for _ in range(budget):
            exps[rng.randrange(nvars)] += 1
        e = tuple(exps)
        cur = out.get(e)
        c = coeff()
        new = c if cur is None else cur + c
        if new.is_zero():
            out.pop(e, None)
        else:
            out[e] = new
    return out


def random_assignment(
    ctx: Context,
    seed: int,
    degree: int = 3,
    exp_rates: tuple[Fraction, ...] = (),
    fixed: Optional[dict[str, Poly]] = None,
    constant_names: tuple[str, ...] = (),
) -> JetAssignment:
    """Random polynomial assignment for every declared symbol.

    fixed overrides specific symbols (used for rewrite-bearing fields,
    whose polynomials must satisfy their registered derivative rules).
    Real symbols get real polynomials; real scalars get constants.
    """
    rng = random.Random(seed)
    nvars = ctx.n + 1 + len(exp_rates)
    polys: dict[str, Poly] = {}
    fixed = fixed or {}
    for name, sym in sorted(ctx.symbols.items()):
        if name in fixed:
            polys[name] = fixed[name]
            continue
        polys[name] = random_polynomial(
            rng,
            nvars,
            degree=degree,
            real=sym.real,
            constant=(sym.kind == "real-scalar" or name in constant_names),
        )
    return JetAssignment(ctx=ctx, polys=polys, exp_rates=exp_rates)


def random_point(ctx: Context, seed: int, n_exp: int = 0) -> tuple:
    rng = random.Random(seed)
    nvars = ctx.n + 1 + n_exp
    return tuple(
        Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for _ in range(nvars)
    )
