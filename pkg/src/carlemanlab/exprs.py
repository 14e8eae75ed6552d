"""Expression trees over declared field symbols.

An :class:`Expr` is an immutable tree whose leaves are exact constants,
field symbols, or the formal differentials dt and dB.  Interior nodes are
sums, products, integer powers, spatial and time derivatives, the Ito
differential d(.), complex conjugation, and real/imaginary parts.

Symbols are declared on a :class:`Context`, which fixes the spatial
dimension n, knows which symbols are semimartingales and what their jets
are, carries optional derivative rewrites (so weights like e^{3 mu t}
never appear as transcendental atoms, only through their closed
derivative rules), and records pairs of scalar symbols whose product is
declared to vanish.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Union

from .exact import QQi, _coerce

KINDS = ("complex-field", "real-field", "real-scalar", "drift-jet", "diffusion-jet")

# Derivative direction keys: ("x", j) with 1-based j, or ("t",).
VarKey = tuple


class ExprError(ValueError):
    """Raised for ill-formed symbolic operations."""


class FieldSymbol:
    """A declared field. Identity is by name within one Context."""

    __slots__ = ("name", "kind", "real", "semimartingale", "jets", "rewrites")

    def __init__(self, name: str, kind: str, real: bool, semimartingale: bool = False):
        if kind not in KINDS:
            raise ExprError(f"unknown symbol kind {kind!r}")
        self.name = name
        self.kind = kind
        self.real = real
        self.semimartingale = semimartingale
        self.jets: Optional[tuple["FieldSymbol", "FieldSymbol"]] = None
        self.rewrites: dict[VarKey, "Expr"] = {}

    def __repr__(self):
        return f"FieldSymbol({self.name!r}, {self.kind!r})"


class Context:
    """Symbol table for one verification problem.

    n is the spatial dimension (1..3).  null_pairs holds unordered pairs
    of real-scalar symbol names whose product is rewritten to zero during
    canonicalization.
    """

    def __init__(self, n: int):
        if n not in (1, 2, 3):
            raise ExprError(f"spatial dimension must be 1, 2 or 3, got {n}")
        self.n = n
        self.symbols: dict[str, FieldSymbol] = {}
        self._null_map: dict[str, set[str]] = {}

    # -- declarations ------------------------------------------------

    def _declare(self, sym: FieldSymbol) -> "Expr":
        if sym.name in self.symbols:
            raise ExprError(f"symbol {sym.name!r} already declared")
        if not sym.name.isidentifier():
            raise ExprError(f"symbol name {sym.name!r} is not an identifier")
        self.symbols[sym.name] = sym
        return Sym(sym)

    def complex_field(self, name: str) -> "Expr":
        return self._declare(FieldSymbol(name, "complex-field", real=False))

    def real_field(self, name: str) -> "Expr":
        return self._declare(FieldSymbol(name, "real-field", real=True))

    def real_scalar(self, name: str) -> "Expr":
        """A real constant: every derivative of it is zero."""
        return self._declare(FieldSymbol(name, "real-scalar", real=True))

    def semimartingale(
        self,
        name: str,
        real: bool = False,
        drift: Optional[str] = None,
        diffusion: Optional[str] = None,
    ) -> tuple["Expr", "Expr", "Expr"]:
        """Declare a semimartingale with registered jets d(name) = P dt + Q dB.

        Returns (field, drift jet, diffusion jet) expressions.
        """
        kind = "real-field" if real else "complex-field"
        base = FieldSymbol(name, kind, real=real, semimartingale=True)
        pname = drift or f"P{name}"
        qname = diffusion or f"Q{name}"
        p = FieldSymbol(pname, "drift-jet", real=real, semimartingale=True)
        q = FieldSymbol(qname, "diffusion-jet", real=real, semimartingale=True)
        base.jets = (p, q)
        e = self._declare(base)
        ep = self._declare(p)
        eq = self._declare(q)
        return e, ep, eq

    def rewrite_field(
        self,
        name: str,
        real: bool = True,
        dx: Optional[Iterable["Expr"]] = None,
        dt: Optional["Expr"] = None,
    ) -> "Expr":
        """Declare a field whose derivatives rewrite to closed expressions.

        dx gives the rewrite for each of the n spatial directions; dt for
        the time direction.  Directions without a rewrite differentiate
        normally.  Rewrites keep exponential weights polynomial: a field
        phi standing for e^{3 mu t} is declared with dt = 3*mu*phi.
        """
        kind = "real-field" if real else "complex-field"
        sym = FieldSymbol(name, kind, real=real)
        expr = self._declare(sym)
        if dx is not None:
            dx = list(dx)
            if len(dx) != self.n:
                raise ExprError(f"need {self.n} spatial rewrites for {name!r}")
            for j, rw in enumerate(dx, start=1):
                sym.rewrites[("x", j)] = as_expr(rw)
        if dt is not None:
            sym.rewrites[("t",)] = as_expr(dt)
        return expr

    def set_rewrite(self, name: str, var: str, expr) -> None:
        """Register a derivative rewrite after declaration.

        Needed when the rewrite references the field itself, as for a
        field phi standing for e^{3 mu t} with set_rewrite("phi", "t",
        3*mu*phi).  var is "x1".."x3" or "t".
        """
        sym = self.symbols.get(name)
        if sym is None:
            raise ExprError(f"unknown symbol {name!r}")
        if sym.semimartingale:
            raise ExprError("semimartingales cannot carry derivative rewrites")
        if var == "t":
            key: VarKey = ("t",)
        elif len(var) == 2 and var[0] == "x" and var[1].isdigit():
            j = int(var[1])
            if not 1 <= j <= self.n:
                raise ExprError(f"direction {var!r} out of range for n={self.n}")
            key = ("x", j)
        else:
            raise ExprError(f"unknown derivative direction {var!r}")
        sym.rewrites[key] = as_expr(expr)

    # -- vanishing products -------------------------------------------

    def declare_null_pair(self, name_a: str, name_b: str) -> None:
        for nm in (name_a, name_b):
            sym = self.symbols.get(nm)
            if sym is None:
                raise ExprError(f"unknown symbol {nm!r}")
            if sym.kind != "real-scalar":
                raise ExprError("null pairs are only supported for real scalars")
        self._null_map.setdefault(name_a, set()).add(name_b)
        self._null_map.setdefault(name_b, set()).add(name_a)

    def annihilates(self, names: Iterable[str]) -> bool:
        if not self._null_map:
            return False
        names = set(names)
        for nm in names:
            partners = self._null_map.get(nm)
            if partners and not partners.isdisjoint(names):
                return True
        return False

    def sym(self, name: str) -> "Expr":
        try:
            return Sym(self.symbols[name])
        except KeyError:
            raise ExprError(f"unknown symbol {name!r}") from None

    def var_keys(self) -> list[VarKey]:
        return [("x", j) for j in range(1, self.n + 1)] + [("t",)]


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------

Number = Union[int, Fraction, QQi]


def as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, QQi)):
        return Const(_coerce(x))
    raise ExprError(f"cannot interpret {type(x).__name__} as an expression")


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((MINUS_ONE, as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((MINUS_ONE, self))))

    def __neg__(self):
        return Mul((MINUS_ONE, self))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ExprError("powers must be nonnegative integers")
        return Pow(self, k)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: QQi):
        self.value = value


class Sym(Expr):
    __slots__ = ("sym",)

    def __init__(self, sym: FieldSymbol):
        self.sym = sym


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]):
        self.terms = tuple(terms)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]):
        self.factors = tuple(factors)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = exp


class Dx(Expr):
    __slots__ = ("j", "arg")

    def __init__(self, j: int, arg: Expr):
        self.j = j
        self.arg = arg


class Dt(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg


class DIto(Expr):
    """Lazy Ito differential d(arg); expanded during canonicalization."""

    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg


class Conj(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg


class RePart(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg


class ImPart(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg


class DtAtom(Expr):
    __slots__ = ()


class DBAtom(Expr):
    __slots__ = ()


DT = DtAtom()
DB = DBAtom()

MINUS_ONE = Const(QQi(-1))
I = Const(QQi(0, 1))


def C(p: Number, q: int = 1) -> Const:
    """Exact rational constant p/q."""
    if isinstance(p, QQi):
        if q != 1:
            raise ExprError("QQi constant takes no denominator")
        return Const(p)
    return Const(QQi(Fraction(p, q)))


# -- public operation names ------------------------------------------------


def deriv(e: Expr, var: str) -> Expr:
    """Partial derivative; var is "x1".."x3" or "t"."""
    e = as_expr(e)
    if var == "t":
        return Dt(e)
    if len(var) == 2 and var[0] == "x" and var[1] in "123":
        return Dx(int(var[1]), e)
    raise ExprError(f"unknown derivative direction {var!r}")


def d_x(e: Expr, j: int) -> Expr:
    return Dx(j, as_expr(e))


def d_t(e: Expr) -> Expr:
    return Dt(as_expr(e))


def ito_d(e: Expr) -> Expr:
    """Ito differential d(e); the Ito table is applied on canonicalization."""
    return DIto(as_expr(e))


def conj(e: Expr) -> Expr:
    return Conj(as_expr(e))


def re(e: Expr) -> Expr:
    return RePart(as_expr(e))


def im(e: Expr) -> Expr:
    return ImPart(as_expr(e))


def esum(terms: Iterable[Expr]) -> Expr:
    terms = [as_expr(t) for t in terms]
    if not terms:
        return Const(QQi(0))
    return Add(terms)
