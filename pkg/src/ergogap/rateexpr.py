"""Tiny arithmetic language for birth and death rates.

Expressions range over a single integer variable ``i``::

    2*i + 4 + sqrt(2)
    i^2
    max(1, i/3) * 2^i

Supported: ``+ - * / ^`` (``^`` binds tightest and is right-associative),
unary minus, integer/decimal literals, ``sqrt``, ``min``, ``max`` and the
constants ``pi`` and ``e``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import SpecError

__all__ = [
    "RateExpr",
    "RateExprError",
    "Leading",
    "parse_rate_expr",
]


class RateExprError(SpecError):
    """Syntax or name error in a rate expression; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


_FUNCS = {"sqrt": 1, "min": 2, "max": 2}
_CONSTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


# --------------------------------------------------------------------------
# Tree


@dataclass(frozen=True)
class Num:
    value: float
    text: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Const, Neg, BinOp, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3


def _fmt(node: Node, ctx: int = 0) -> str:
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return "i"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_fmt(a) for a in node.args)})"
    if isinstance(node, Neg):
        s = "-" + _fmt(node.arg, _NEG_PREC)
        return f"({s})" if ctx > _NEG_PREC else s
    p = _PREC[node.op]
    if node.op == "^":
        s = f"{_fmt(node.left, p + 1)}^{_fmt(node.right, _NEG_PREC)}"
    else:
        # left-associative: the right operand needs parens at equal precedence
        s = f"{_fmt(node.left, p)} {node.op} {_fmt(node.right, p + 1)}"
    return f"({s})" if ctx > p else s


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        data = text.encode("utf-8")
        while True:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:]
                if rest.strip() == "":
                    break
                off = pos + len(rest) - len(rest.lstrip())
                raise RateExprError(
                    f"unexpected character {text[off]!r}",
                    len(text[:off].encode("utf-8")),
                    text,
                )
            kind = m.lastgroup
            start = m.start(kind)
            self.toks.append((kind, m.group(kind), len(text[:start].encode("utf-8"))))
            pos = m.end()
        self.toks.append(("end", "", len(data)))
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            got = "end of input" if kind == "end" else repr(val)
            raise RateExprError(f"expected {value!r}, got {got}", off, self.text)

    def parse(self) -> Node:
        node = self.additive()
        kind, val, off = self.peek()
        if kind != "end":
            raise RateExprError(f"unexpected token {val!r}", off, self.text)
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val), val)
        if kind == "name":
            if val == "i":
                return Var()
            if val in _CONSTS:
                return Const(val)
            if val in _FUNCS:
                self.expect("(")
                args = [self.additive()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.additive())
                self.expect(")")
                if len(args) != _FUNCS[val]:
                    raise RateExprError(
                        f"{val} takes {_FUNCS[val]} argument(s), got {len(args)}",
                        off,
                        self.text,
                    )
                return Call(val, tuple(args))
            raise RateExprError(f"unknown identifier {val!r}", off, self.text)
        if kind == "op" and val == "(":
            node = self.additive()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(val)
        raise RateExprError(f"unexpected {got}", off, self.text)


# --------------------------------------------------------------------------
# Evaluation


def _eval(node: Node, i: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(i.shape, node.value)
    if isinstance(node, Var):
        return i.astype(float)
    if isinstance(node, Const):
        return np.full(i.shape, _CONSTS[node.name])
    if isinstance(node, Neg):
        return -_eval(node.arg, i)
    if isinstance(node, Call):
        args = [_eval(a, i) for a in node.args]
        if node.name == "sqrt":
            return np.sqrt(args[0])
        return np.minimum(*args) if node.name == "min" else np.maximum(*args)
    x, y = _eval(node.left, i), _eval(node.right, i)
    if node.op == "+":
        return x + y
    if node.op == "-":
        return x - y
    if node.op == "*":
        return x * y
    if node.op == "/":
        return x / y
    return np.power(x, y)


def _slog_add(s1, l1, s2, l2):
    """Signed-log addition: returns (sign, log|x+y|)."""
    big = l1 >= l2
    sb = np.where(big, s1, s2)
    lb = np.where(big, l1, l2)
    ss = np.where(big, s2, s1)
    ls = np.where(big, l2, l1)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(np.isfinite(lb), ls - lb, 0.0)
        same = sb * ss >= 0
        mag = np.where(same, np.log1p(np.exp(d)), np.log1p(-np.exp(d)))
        out_l = np.where(ss == 0, lb, lb + mag)
        out_l = np.where(sb == 0, ls, out_l)
    out_s = np.where(sb == 0, ss, sb)
    out_s = np.where(np.isneginf(out_l), 0.0, out_s)
    return out_s, out_l


def _slog(node: Node, i: np.ndarray):
    """Evaluate as (sign, log|value|) so huge and tiny magnitudes survive."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(node, (Num, Const)):
            v = node.value if isinstance(node, Num) else _CONSTS[node.name]
            return np.full(i.shape, float(np.sign(v))), np.full(
                i.shape, math.log(abs(v)) if v != 0 else -np.inf
            )
        if isinstance(node, Var):
            fi = i.astype(float)
            return np.sign(fi), np.log(np.abs(fi))
        if isinstance(node, Neg):
            s, l = _slog(node.arg, i)
            return -s, l
        if isinstance(node, Call):
            args = [_slog(a, i) for a in node.args]
            if node.name == "sqrt":
                s, l = args[0]
                return np.where(s < 0, np.nan, s), np.where(s < 0, np.nan, 0.5 * l)
            (s1, l1), (s2, l2) = args
            v1_gt = np.where(
                s1 != s2,
                s1 > s2,
                np.where(s1 > 0, l1 > l2, np.where(s1 < 0, l1 < l2, False)),
            )
            pick1 = v1_gt if node.name == "max" else ~v1_gt
            return np.where(pick1, s1, s2), np.where(pick1, l1, l2)
        s1, l1 = _slog(node.left, i)
        if node.op in "+-":
            s2, l2 = _slog(node.right, i)
            if node.op == "-":
                s2 = -s2
            return _slog_add(s1, l1, s2, l2)
        if node.op in "*/":
            s2, l2 = _slog(node.right, i)
            if node.op == "*":
                return s1 * s2, np.where((s1 == 0) | (s2 == 0), -np.inf, l1 + l2)
            return np.where(s2 == 0, np.nan, s1 * s2), np.where(
                s2 == 0, np.nan, l1 - l2
            )
        # power: exponent evaluated directly (it is a modest number in practice)
        y = _eval(node.right, i)
        yi = np.round(y)
        integral = np.abs(y - yi) == 0
        odd = integral & (np.mod(yi, 2) == 1)
        sign = np.where(s1 > 0, 1.0, np.where(s1 < 0, np.where(odd, -1.0, 1.0), 0.0))
        sign = np.where((s1 < 0) & ~integral, np.nan, sign)
        sign = np.where((s1 == 0) & (y == 0), 1.0, sign)
        logv = np.where(s1 == 0, np.where(y == 0, 0.0, np.where(y > 0, -np.inf, np.inf)), y * l1)
        return sign, logv


# --------------------------------------------------------------------------
# Asymptotics


@dataclass(frozen=True)
class Leading:
    """Leading term ``coef * i**power * base**i`` as ``i -> oo``."""

    coef: float
    power: float
    base: float

    def dominates(self, other: "Leading") -> int:
        if not math.isclose(self.base, other.base, rel_tol=1e-15):
            return 1 if self.base > other.base else -1
        if not math.isclose(self.power, other.power, rel_tol=1e-15, abs_tol=1e-15):
            return 1 if self.power > other.power else -1
        return 0


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_var(node.arg)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, Call):
        return any(_has_var(a) for a in node.args)
    return False


def _affine(node: Node) -> Optional[tuple[float, float]]:
    """(slope, intercept) if the node is exactly affine in i."""
    if not _has_var(node):
        return 0.0, float(_eval(node, np.zeros(1))[0])
    if isinstance(node, Var):
        return 1.0, 0.0
    if isinstance(node, Neg):
        a = _affine(node.arg)
        return None if a is None else (-a[0], -a[1])
    if isinstance(node, BinOp) and node.op in "+-":
        a, b = _affine(node.left), _affine(node.right)
        if a is None or b is None:
            return None
        sg = 1.0 if node.op == "+" else -1.0
        return a[0] + sg * b[0], a[1] + sg * b[1]
    if isinstance(node, BinOp) and node.op in "*/":
        a, b = _affine(node.left), _affine(node.right)
        if a is None or b is None:
            return None
        if node.op == "*":
            if a[0] == 0:
                return a[1] * b[0], a[1] * b[1]
            if b[0] == 0:
                return b[1] * a[0], b[1] * a[1]
            return None
        if b[0] == 0 and b[1] != 0:
            return a[0] / b[1], a[1] / b[1]
    return None


def _leading(node: Node) -> Optional[Leading]:
    if not _has_var(node):
        v = float(_eval(node, np.zeros(1))[0])
        return Leading(v, 0.0, 1.0)
    if isinstance(node, Var):
        return Leading(1.0, 1.0, 1.0)
    if isinstance(node, Neg):
        a = _leading(node.arg)
        return None if a is None else Leading(-a.coef, a.power, a.base)
    if isinstance(node, Call):
        args = [_leading(a) for a in node.args]
        if any(a is None for a in args):
            return None
        if node.name == "sqrt":
            a = args[0]
            if a.coef <= 0:
                return None
            return Leading(math.sqrt(a.coef), a.power / 2, math.sqrt(a.base))
        a, b = args
        if a.coef == 0 or b.coef == 0 or a.coef * b.coef < 0:
            return None
        d = a.dominates(b)
        if d == 0:
            pick = max if node.name == "max" else min
            return Leading(pick(a.coef, b.coef), a.power, a.base)
        bigger = a if (d > 0) == (a.coef > 0) else b
        smaller = b if bigger is a else a
        return bigger if node.name == "max" else smaller
    op = node.op
    if op == "^":
        expo = _affine(node.right)
        if expo is None:
            return None
        slope, icpt = expo
        if slope == 0:
            a = _leading(node.left)
            if a is None or (a.coef < 0 and icpt != round(icpt)):
                return None
            if a.coef == 0:
                return None
            return Leading(a.coef**icpt, a.power * icpt, a.base**icpt)
        if _has_var(node.left):
            return None
        x = float(_eval(node.left, np.zeros(1))[0])
        if x <= 0:
            return None
        return Leading(x**icpt, 0.0, x**slope)
    a, b = _leading(node.left), _leading(node.right)
    if a is None or b is None:
        return None
    if op in "+-":
        if op == "-":
            b = Leading(-b.coef, b.power, b.base)
        if a.coef == 0:
            return b
        if b.coef == 0:
            return a
        d = a.dominates(b)
        if d > 0:
            return a
        if d < 0:
            return b
        c = a.coef + b.coef
        if abs(c) <= 1e-14 * max(abs(a.coef), abs(b.coef)):
            return None  # cancellation: subleading terms would decide
        return Leading(c, a.power, a.base)
    if op == "*":
        return Leading(a.coef * b.coef, a.power + b.power, a.base * b.base)
    if b.coef == 0:
        return None
    return Leading(a.coef / b.coef, a.power - b.power, a.base / b.base)


# --------------------------------------------------------------------------


class RateExpr:
    """A parsed rate expression; immutable."""

    __slots__ = ("_root", "_text")

    def __init__(self, root: Node, text: str = ""):
        self._root = root
        self._text = text

    @property
    def source(self) -> str:
        return self._text

    def __str__(self) -> str:
        return _fmt(self._root)

    def __repr__(self) -> str:
        return f"RateExpr({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RateExpr) and self._root == other._root

    def __hash__(self) -> int:
        return hash(self._root)

    def __call__(self, i):
        """Evaluate at an integer index or an array of indices."""
        arr = np.asarray(i)
        with np.errstate(all="ignore"):
            out = _eval(self._root, np.atleast_1d(arr).astype(np.int64))
        return float(out[0]) if arr.ndim == 0 else out

    def log_eval(self, i) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(sign, log|value|)`` at the given indices.

        Ordinary float evaluation is used where it is finite and well inside
        the normal range; the remaining entries are redone in signed-log
        arithmetic so values like ``2^i`` at ``i = 10^5`` stay usable.
        """
        idx = np.atleast_1d(np.asarray(i)).astype(np.int64)
        with np.errstate(all="ignore"):
            v = _eval(self._root, idx)
            sign = np.sign(v)
            logv = np.log(np.abs(v))
        # exact zeros are redone too: they may be underflow (2^-i at large i)
        bad = ~np.isfinite(v) | (np.abs(v) < 1e-280) | (np.abs(v) > 1e280)
        if bad.any():
            s2, l2 = _slog(self._root, idx[bad])
            sign[bad] = s2
            logv[bad] = l2
        return sign, logv

    @property
    def is_constant(self) -> bool:
        return not _has_var(self._root)

    def leading(self) -> Optional[Leading]:
        """Leading asymptotic term, or None when it cannot be decided structurally."""
        return _leading(self._root)


def parse_rate_expr(text: str) -> RateExpr:
    if not isinstance(text, str) or not text.strip():
        raise RateExprError("empty expression", 0, text if isinstance(text, str) else "")
    return RateExpr(_Parser(text).parse(), text)
