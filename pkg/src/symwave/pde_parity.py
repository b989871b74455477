"""Parse ``P(d/dx) u_t = F(u)`` and check the reflection-parity hypotheses.

Under ``x -> -x`` a product of derivatives of ``u`` picks up the sign
``(-1)^(total x-order)``; ``y`` and ``t`` derivatives are unaffected. A
symmetric solution of the equation is forced to travel when ``P`` is even
and every monomial of ``F`` is odd, or ``P`` is odd and every monomial of
``F`` is even.

Grammar (informal)::

    equation := expr "=" expr
    expr     := ["+"|"-"] term (("+"|"-") term)*
    term     := power (["*"|"/"] power)*          # juxtaposition multiplies
    power    := atom (("^"|"**") INTEGER)?
    atom     := NUMBER | NAME | u_SUBSCRIPT | "(" expr ")" [_SUBSCRIPT]

Subscripts are strings over ``x, y, t`` (``u_xxt``, ``u_{xxt}``) and may be
attached to a parenthesized group to differentiate it. ``NAME`` must be a
key of ``params`` (named constants such as ``kappa``).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .errors import PdeSyntaxError, UnsupportedEquation

EVEN, ODD, MIXED = "even", "odd", "mixed"

# key of a monomial: sorted tuple of ((order_x, order_y, order_t), exponent)
_Key = tuple


# --------------------------------------------------------------------------
# Polynomials in derivatives of u
# --------------------------------------------------------------------------

def _mul_keys(a: _Key, b: _Key) -> _Key:
    merged = dict(a)
    for order, e in b:
        merged[order] = merged.get(order, 0) + e
    return tuple(sorted(merged.items()))


class _Poly:
    """Sparse polynomial ``{key: Fraction}`` with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, c) -> "_Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def derivative(cls, order) -> "_Poly":
        return cls({((tuple(order), 1),): Fraction(1)})

    def is_const(self) -> bool:
        return all(k == () for k in self.terms)

    def const_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return _Poly(out)

    def __neg__(self):
        return _Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = _mul_keys(ka, kb)
                out[k] = out.get(k, Fraction(0)) + va * vb
        return _Poly(out)

    def power(self, n: int) -> "_Poly":
        out = _Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def diff(self, axis: int) -> "_Poly":
        """Total derivative along ``axis`` (0 = x, 1 = y, 2 = t), product rule."""
        out = {}
        for key, coef in self.terms.items():
            for i, (order, e) in enumerate(key):
                raised = list(order)
                raised[axis] += 1
                rest = list(key)
                if e == 1:
                    del rest[i]
                else:
                    rest[i] = (order, e - 1)
                k = _mul_keys(tuple(rest), (((tuple(raised)), 1),))
                out[k] = out.get(k, Fraction(0)) + coef * e
        return _Poly(out)


# --------------------------------------------------------------------------
# Public types
# --------------------------------------------------------------------------

def _factor_text(order, e) -> str:
    ox, oy = order
    name = "u" + ("_" + "x" * ox + "y" * oy if ox or oy else "")
    return name if e == 1 else f"{name}^{e}"


@dataclass(frozen=True)
class DerivativeMonomial:
    """``coefficient * prod (d_x^ox d_y^oy u)^e`` over ``factors``."""

    coefficient: Fraction
    factors: tuple

    def __post_init__(self):
        seen = set()
        for order, e in self.factors:
            if e < 1:
                raise ValueError("exponents must be >= 1")
            if order in seen:
                raise ValueError("factors must be merged per derivative order")
            seen.add(order)
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        object.__setattr__(self, "factors", tuple(sorted((tuple(o), int(e)) for o, e in self.factors)))

    @property
    def total_x_order(self) -> int:
        return sum(o[0] * e for o, e in self.factors)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    def sort_key(self):
        return (self.degree, self.total_x_order, self.factors)

    def to_text(self) -> str:
        c = self.coefficient
        if not self.factors:
            return str(c)
        body = "*".join(_factor_text(o, e) for o, e in self.factors)
        if c == 1:
            return body
        if c == -1:
            return "-" + body
        return f"{c}*{body}"

    def __str__(self):
        return self.to_text()


def monomial_x_parity(m: DerivativeMonomial) -> str:
    return ODD if m.total_x_order % 2 else EVEN


@dataclass(frozen=True)
class PdeSpec:
    """``sum_j p_j d_x^j u_t = sum F-monomials``."""

    p_coefficients: tuple
    f_monomials: tuple
    source_text: str = ""

    def __post_init__(self):
        p = tuple(Fraction(c) for c in self.p_coefficients)
        while p and p[-1] == 0:
            p = p[:-1]
        if not p:
            raise UnsupportedEquation("the equation has no u_t term (P = 0)")
        object.__setattr__(self, "p_coefficients", p)
        object.__setattr__(self, "f_monomials",
                           tuple(sorted(self.f_monomials, key=DerivativeMonomial.sort_key)))

    def f_text(self) -> str:
        if not self.f_monomials:
            return "0"
        out = self.f_monomials[0].to_text()
        for m in self.f_monomials[1:]:
            t = m.to_text()
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    def p_text(self) -> str:
        parts = []
        for j, c in enumerate(self.p_coefficients):
            if c:
                parts.append(f"{c}*d_x^{j}" if j else f"{c}")
        return " + ".join(parts)


@dataclass(frozen=True)
class ParityReport:
    source: str
    p_parity: str
    f_parity: str
    hypotheses_met: bool
    witness: Optional[DerivativeMonomial] = None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "p_parity": self.p_parity,
            "f_parity": self.f_parity,
            "hypotheses_met": self.hypotheses_met,
            "witness": None if self.witness is None else self.witness.to_text(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<gsub>_(?:\{[A-Za-z]+\}|[A-Za-z]+))
  | (?P<name>[^\W\d_]\w*?)(?:_(?P<sub>\{[A-Za-z]+\}|[A-Za-z]+))?(?![\w])
  | (?P<pow>\*\*|\^)
  | (?P<op>[-+*/()=])
""", re.VERBOSE | re.UNICODE)


def _tokenize(src: str):
    pos, out = 0, []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise PdeSyntaxError(f"unexpected character {src[pos]!r} at position {pos}")
        kind = m.lastgroup
        if kind in ("name", "sub"):
            out.append(("name", (m.group("name"), m.group("sub")), pos))
        elif kind != "ws":
            out.append((kind, m.group(kind), pos))
        pos = m.end()
    out.append(("end", None, len(src)))
    return out


def _orders(sub: str):
    sub = sub.strip("{}")
    if any(ch not in "xyt" for ch in sub):
        raise PdeSyntaxError(f"derivative subscript {sub!r} may only contain x, y, t")
    return (sub.count("x"), sub.count("y"), sub.count("t"))


class _Parser:
    def __init__(self, src: str, params: Mapping):
        self.toks = _tokenize(src)
        self.i = 0
        self.params = {k: Fraction(v) for k, v in (params or {}).items()}

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind and tok[0] != kind or value is not None and tok[1] != value:
            want = value or kind
            raise PdeSyntaxError(f"expected {want!r} at position {tok[2]}, found {tok[1]!r}")
        self.i += 1
        return tok

    def equation(self):
        lhs = self.expr()
        if self.peek()[0] != "op" or self.peek()[1] != "=":
            raise PdeSyntaxError("an equation needs exactly one '='")
        self.take("op", "=")
        rhs = self.expr()
        self.take("end")
        return lhs - rhs

    def expr(self):
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                t = self.term()
                acc = acc + t if tok[1] == "+" else acc - t
            else:
                return acc

    def _starts_atom(self, tok) -> bool:
        return tok[0] in ("num", "name") or (tok[0] == "op" and tok[1] == "(")

    def term(self):
        acc = self.power()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "*/":
                self.take()
                rhs = self.power()
                if tok[1] == "*":
                    acc = acc * rhs
                else:
                    if not rhs.is_const():
                        raise UnsupportedEquation("division by a non-constant expression")
                    if rhs.const_value() == 0:
                        raise PdeSyntaxError("division by zero")
                    acc = acc * _Poly.const(1 / rhs.const_value())
            elif self._starts_atom(tok):
                acc = acc * self.power()
            else:
                return acc

    def power(self):
        base = self.atom()
        if self.peek()[0] == "pow":
            self.take()
            tok = self.take("num")
            if not re.fullmatch(r"\d+", tok[1]):
                raise PdeSyntaxError(f"exponent must be a non-negative integer at position {tok[2]}")
            base = base.power(int(tok[1]))
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return _Poly.const(Fraction(tok[1]))
        if tok[0] == "name":
            self.take()
            name, sub = tok[1]
            if name == "u":
                order = _orders(sub) if sub else (0, 0, 0)
                return _Poly.derivative(order)
            if name in self.params:
                if sub:
                    raise PdeSyntaxError(f"constant {name!r} cannot carry a derivative subscript")
                return _Poly.const(self.params[name])
            raise UnsupportedEquation(f"unknown symbol {name!r}: only u and named constants are allowed")
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            inner = self.expr()
            self.take("op", ")")
            if self.peek()[0] == "gsub":
                for axis, count in enumerate(_orders(self.take()[1][1:])):
                    for _ in range(count):
                        inner = inner.diff(axis)
            return inner
        raise PdeSyntaxError(f"unexpected {tok[1]!r} at position {tok[2]}")


def parse_pde(source: str, params: Optional[Mapping] = None) -> PdeSpec:
    """Parse one equation into canonical ``P`` and ``F``.

    ``params`` binds named constants to exact values (anything accepted by
    ``Fraction``).
    """
    if not isinstance(source, str) or not source.strip():
        raise PdeSyntaxError("empty equation")
    poly = _Parser(source, params or {}).equation()
    p = {}
    f = []
    for key, coef in poly.terms.items():
        time_factors = [(o, e) for o, e in key if o[2] > 0]
        if not time_factors:
            factors = tuple(((o[0], o[1]), e) for o, e in key)
            f.append(DerivativeMonomial(-coef, factors))
            continue
        (order, e), = time_factors if len(time_factors) == 1 else (None,)
        if order is None or e != 1 or len(key) != 1:
            raise UnsupportedEquation("u_t must appear linearly and on its own")
        if order[2] > 1:
            raise UnsupportedEquation("only first-order time derivatives are supported")
        if order[1]:
            raise UnsupportedEquation("y-derivatives of u_t are not supported")
        p[order[0]] = p.get(order[0], Fraction(0)) + coef
    if not p:
        if any(o[2] for key in poly.terms for o, _ in key):
            raise UnsupportedEquation("only first-order time derivatives are supported")
        raise UnsupportedEquation("the equation has no u_t term (P = 0)")
    deg = max(p)
    return PdeSpec(tuple(p.get(j, Fraction(0)) for j in range(deg + 1)), tuple(f), source)


# --------------------------------------------------------------------------
# Hypothesis check
# --------------------------------------------------------------------------

def _parity_of(indices) -> str:
    kinds = {i % 2 for i in indices}
    if kinds == {0}:
        return EVEN
    if kinds == {1}:
        return ODD
    return MIXED


def check_hypotheses(spec: PdeSpec) -> ParityReport:
    """Classify ``P`` and ``F`` and decide the hypotheses.

    The zero right-hand side satisfies both parity conditions and is
    reported with the parity that ``P`` requires. When the hypotheses fail
    and ``P`` is pure, ``witness`` is the first ``F`` monomial (canonical
    order) with the wrong parity.
    """
    p_par = _parity_of(j for j, c in enumerate(spec.p_coefficients) if c)
    wanted = {EVEN: ODD, ODD: EVEN}.get(p_par)
    if spec.f_monomials:
        f_par = _parity_of(m.total_x_order for m in spec.f_monomials)
    else:
        f_par = wanted or EVEN
    met = wanted is not None and f_par == wanted
    witness = None
    if not met and wanted is not None:
        witness = next(m for m in spec.f_monomials if monomial_x_parity(m) != wanted)
    return ParityReport(spec.source_text, p_par, f_par, met, witness)


def check_equation(source: str, params: Optional[Mapping] = None) -> ParityReport:
    return check_hypotheses(parse_pde(source, params))


# --------------------------------------------------------------------------
# Built-in corpus
# --------------------------------------------------------------------------

BUILTIN_PARAMS = {"kappa": 1}

BUILTIN_CORPUS = {
    "KdV": "u_t + u_xxx + 6*u*u_x = 0",
    "BBM": "u_t - u_xxt + u_x + u*u_x = 0",
    "DP": "u_t - u_xxt + 2*kappa*u_x + 4*u*u_x = 3*u_x*u_xx + u*u_xxx",
    "KP": "(2*u_t + 3*u*u_x + 1/3*u_xxx)_x + u_yy = 0",
}

COUNTEREXAMPLES = {
    "heat": "u_t = u_xx",
}


def read_equation_file(path) -> list:
    """Equations from a UTF-8 text file, one per line; ``#`` starts a comment."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if text:
                out.append(text)
    return out
