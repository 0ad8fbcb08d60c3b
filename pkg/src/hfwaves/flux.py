"""Flux functions F: R -> R^d as exact expression trees.

Grammar of a flux spec (whitespace is ignored)::

    flux    := '[' expr (',' expr)* ']'  |  expr
    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom (('^' | '**') unary)?         right associative
    atom    := NUMBER | 'u' | 'pi' | NAME '(' args ')' | '(' expr ')'
    args    := expr (',' expr)*

Functions: sin, cos, exp, log, sqrt, abspow(x, p) = |x|^(1+p),
flatbump(x) = exp(-1/x^2) with value 0 at x = 0.

Derivatives of every order come from Taylor-jet arithmetic
(:mod:`hfwaves.jets`); nothing here uses finite differences.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets
from .jets import DomainError, Jet

__all__ = [
    "FluxSyntaxError",
    "DomainError",
    "Expr",
    "FluxExpr",
    "parse_expr",
    "parse_flux",
    "eval_jet",
    "velocity_derivatives",
    "velocity",
    "catalog_flux",
    "CATALOG",
]


class FluxSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}: {text[:position]}<*>{text[position:]}")


# -- expression nodes ---------------------------------------------------------


class Expr:
    def jet(self, x: Jet) -> Jet:
        raise NotImplementedError

    def has_var(self) -> bool:
        return any(child.has_var() for child in self.children())

    def children(self) -> tuple["Expr", ...]:
        return ()

    def const_value(self) -> float:
        return float(self.jet(Jet.constant(0.0, 0)).value)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def jet(self, x):
        return Jet.constant(self.value, x.order, like=x.value)

    def __str__(self):
        v = self.value
        if v.is_integer() and abs(v) < 1e15:
            s = str(int(v))
        else:
            s = repr(v)
        return f"({s})" if v < 0 else s


@dataclass(frozen=True)
class Var(Expr):
    def jet(self, x):
        return x

    def has_var(self):
        return True

    def __str__(self):
        return "u"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)

    def jet(self, x):
        a = self.left.jet(x)
        if self.op == "^":
            if not self.right.has_var():
                return jets.power(a, self.right.const_value())
            return jets.exp(self.right.jet(x) * jets.log(a))
        b = self.right.jet(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)

    def jet(self, x):
        return -self.arg.jet(x)

    def __str__(self):
        return f"(-{self.arg})"


_UNARY = {
    "sin": jets.sin,
    "cos": jets.cos,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "flatbump": jets.flatbump,
}
_ARITY = {name: 1 for name in _UNARY} | {"abspow": 2}


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]

    def children(self):
        return self.args

    def jet(self, x):
        if self.name == "abspow":
            p = self.args[1]
            if p.has_var():
                raise DomainError("abspow exponent must be constant")
            return jets.abspow(self.args[0].jet(x), p.const_value())
        return _UNARY[self.name](self.args[0].jet(x))

    def __str__(self):
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


# -- parser -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^(),\[\]]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise FluxSyntaxError("unexpected character", pos + _lead_ws(text, pos), text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise FluxSyntaxError(f"expected {value!r}", tok[2], self.text)
        self.i += 1
        return tok

    def flux(self) -> list[Expr]:
        if self.peek()[1] == "[":
            self.take("[")
            comps = [self.expr()]
            while self.peek()[1] == ",":
                self.take(",")
                comps.append(self.expr())
            self.take("]")
        else:
            comps = [self.expr()]
        self.expect_end()
        return comps

    def expect_end(self):
        tok = self.peek()
        if tok[0] != "end":
            raise FluxSyntaxError(f"unexpected token {tok[1]!r}", tok[2], self.text)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            arg = self.unary()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.take()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value == "u":
                return Var()
            if value == "pi":
                return Const(math.pi)
            if value not in _ARITY:
                raise FluxSyntaxError(f"unsupported function {value!r}", pos, self.text)
            self.take("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take(",")
                args.append(self.expr())
            close = self.take(")")
            if len(args) != _ARITY[value]:
                raise FluxSyntaxError(
                    f"{value} takes {_ARITY[value]} argument(s), got {len(args)}", close[2], self.text
                )
            return Call(value, tuple(args))
        if value == "(":
            node = self.expr()
            self.take(")")
            return node
        raise FluxSyntaxError(f"unexpected token {value!r}" if value else "unexpected end", pos, self.text)


def _lead_ws(text: str, pos: int) -> int:
    return len(text[pos:]) - len(text[pos:].lstrip())


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    p.expect_end()
    return node


# -- flux ---------------------------------------------------------------------


def _smoothness(node: Expr) -> float:
    """Crude smoothness class: inf for C^inf trees, else the abspow order."""
    here = math.inf
    if isinstance(node, Call) and node.name == "abspow" and not node.args[1].has_var():
        r = 1.0 + node.args[1].const_value()
        if not (r.is_integer() and int(r) % 2 == 0):
            here = math.ceil(r) - 1
    return min([here] + [_smoothness(c) for c in node.children()])


@dataclass(frozen=True)
class FluxExpr:
    """Vector flux F = (F_1, ..., F_d) of a scalar state u.

    ``smoothness`` is an annotation only (C^k class, inf for C^inf); it is
    inferred from abspow nodes but never enforced.
    """

    components: tuple[Expr, ...]
    name: str = ""
    smoothness: float = field(default=math.inf)

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("a flux needs at least one component")

    @property
    def d(self) -> int:
        return len(self.components)

    def __str__(self) -> str:
        return "[" + ", ".join(str(c) for c in self.components) + "]"

    def __call__(self, u) -> np.ndarray:
        """F(u) stacked along the last axis."""
        return np.stack([eval_jet(self, i, u, 0).value for i in range(self.d)], axis=-1)


def parse_flux(text: str, name: str = "") -> FluxExpr:
    comps = _Parser(text).flux()
    smooth = min(_smoothness(c) for c in comps)
    return FluxExpr(tuple(comps), name=name or text.strip(), smoothness=smooth)


def eval_jet(flux: FluxExpr, component: int, u, K: int) -> Jet:
    """Jet of order K of the component ``flux.components[component]`` at u.

    ``component`` is 0-based.  ``u`` may be a scalar or an array of base
    points; the jet then carries a batch axis.
    """
    if not 0 <= component < flux.d:
        raise IndexError(f"component {component} out of range for d={flux.d}")
    if K < 0:
        raise ValueError("order must be non-negative")
    x = Jet.variable(u, K)
    with np.errstate(all="ignore"):
        out = flux.components[component].jet(x)
    if out.c.shape[1:] != np.shape(u):
        out = Jet(np.broadcast_to(out.c, (K + 1,) + np.shape(u)).copy())
    if not np.all(np.isfinite(out.c)):
        raise DomainError(f"non-finite jet of component {component} at u={u}")
    return out


def velocity_derivatives(flux: FluxExpr, u, kmax: int) -> np.ndarray:
    """Rows k = 0..kmax hold a^(k)(u) = F^(k+1)(u); shape (kmax+1, *u.shape, d)."""
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    cols = [eval_jet(flux, i, u, kmax + 1).derivatives()[1:] for i in range(flux.d)]
    return np.stack(cols, axis=-1)


def velocity(flux: FluxExpr, u) -> np.ndarray:
    """a(u) = F'(u), shape (*u.shape, d)."""
    return velocity_derivatives(flux, u, 0)[0]


# -- catalog ------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    build: object  # callable d -> spec string
    default_d: int
    expected_dF: object  # callable d -> int or inf
    note: str


def _power_chain(d: int) -> str:
    return "[" + ", ".join(f"u^{k + 1}/{k + 1}" for k in range(1, d + 1)) + "]"


def _multid_burgers(d: int) -> str:
    return "[" + ", ".join("u^2" for _ in range(d)) + "]"


def _flatbump(d: int) -> str:
    # F_k = exp(-1/u^2) u^(k-1): analytic away from 0, every derivative vanishes at 0
    return "[" + ", ".join(f"flatbump(u)*u^{k}" for k in range(d)) + "]"


CATALOG: dict[str, CatalogEntry] = {
    "burgers1d": CatalogEntry("burgers1d", lambda d: "[u^2/2]", 1, lambda d: 1, "convex 1-D flux"),
    "trig2d": CatalogEntry("trig2d", lambda d: "[cos(u), sin(u)]", 2, lambda d: 2, "det(F'', F''') = 1"),
    "power-chain-d": CatalogEntry(
        "power-chain-d", _power_chain, 2, lambda d: d, "a(u) = (u, u^2, ..., u^d), genuinely nonlinear"
    ),
    "multid-burgers": CatalogEntry(
        "multid-burgers", _multid_burgers, 2, lambda d: 1 if d == 1 else math.inf, "a'' = 0, not nonlinear for d >= 2"
    ),
    "flatbump-d": CatalogEntry(
        "flatbump-d", _flatbump, 2, lambda d: math.inf, "flat at u = 0: d_F[0] = inf"
    ),
}


def catalog_flux(key: str, d: int | None = None) -> FluxExpr:
    """Build a catalog flux.  Keys accept an inline dimension: 'power-chain-d(d=3)'."""
    m = re.fullmatch(r"\s*([\w-]+)\s*(?:\(\s*d\s*=\s*(\d+)\s*\))?\s*", key)
    if m is None or m.group(1) not in CATALOG:
        raise KeyError(f"unknown catalog flux {key!r}; known: {sorted(CATALOG)}")
    entry = CATALOG[m.group(1)]
    if m.group(2) is not None:
        d = int(m.group(2))
    if d is None:
        d = entry.default_d
    if entry.key in ("burgers1d",) and d != 1 or entry.key == "trig2d" and d != 2:
        raise ValueError(f"{entry.key} has fixed dimension")
    label = entry.key if entry.key in ("burgers1d", "trig2d") else f"{entry.key}(d={d})"
    return parse_flux(entry.build(d), name=label)


def resolve_flux(spec: str) -> FluxExpr:
    """Catalog key or literal flux spec."""
    try:
        return catalog_flux(spec)
    except KeyError:
        return parse_flux(spec)


def linear_combination(flux: FluxExpr, v: Sequence[float]) -> Expr:
    """Expression for v . F(u)."""
    node: Expr | None = None
    for vi, comp in zip(v, flux.components):
        if vi == 0:
            continue
        term = comp if vi == 1 else BinOp("*", Const(float(vi)), comp)
        node = term if node is None else BinOp("+", node, term)
    return node if node is not None else Const(0.0)
