"""Small expression language for coefficients and shift exponents.

Grammar (infix, ASCII with unicode aliases for the arithmetic signs):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?            right-associative
    atom   := NUMBER | 'i' | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | log | sqrt | atan | abs

Evaluation is complex-valued; the imaginary unit is the literal ``i``.
Domain violations (log of a non-positive real, division by zero, overflow)
raise :class:`DomainError` naming the offending subexpression instead of
letting NaNs leak into downstream limit estimation.  Differentiation is
exact on the AST; ``abs`` is the single non-differentiable primitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "atan", "abs")

# |Im z| below this (relative) slack means z is treated as a real number
# for the purpose of branch-cut domain checks.
_REAL_SLACK = 1e-12


class ExprError(Exception):
    """Base class for expression-language failures."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class DomainError(ExprError):
    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message} in subexpression {pretty(subexpr)!r}")


class NonDifferentiableError(ExprError):
    pass


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str = "t"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of  + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Call]

IMAG_UNIT = Num(1j)


def variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Neg):
        return variables(expr.arg)
    if isinstance(expr, Bin):
        return variables(expr.left) | variables(expr.right)
    if isinstance(expr, Call):
        return variables(expr.arg)
    return frozenset()


def is_constant(expr: Expr) -> bool:
    return not variables(expr)


def constant_value(expr: Expr) -> complex:
    """Value of a variable-free expression."""
    if not is_constant(expr):
        raise ExprError(f"expression {pretty(expr)!r} is not constant")
    return complex(evaluate(expr, 1.0))


def substitute(expr: Expr, replacement: Expr, variable: str = "t") -> Expr:
    """Replace every occurrence of the variable by another expression."""
    if isinstance(expr, Var):
        return replacement if expr.name == variable else expr
    if isinstance(expr, Neg):
        return Neg(substitute(expr.arg, replacement, variable))
    if isinstance(expr, Bin):
        return Bin(expr.op,
                   substitute(expr.left, replacement, variable),
                   substitute(expr.right, replacement, variable))
    if isinstance(expr, Call):
        return Call(expr.fn, substitute(expr.arg, replacement, variable))
    return expr


# --------------------------------------------------------------------------
# Tokenizer / parser
# --------------------------------------------------------------------------

_ALIASES = {"×": "*", "÷": "/", "−": "-", "∙": "*", "·": "*"}
_OPS = "+-*/^"


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM, IDENT, OP, LPAREN, RPAREN, END
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    toks = []
    i, n = 0, len(source)
    while i < n:
        ch = _ALIASES.get(source[i], source[i])
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                seen_dot = seen_dot or source[j] == "."
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            toks.append(_Token("NUM", source[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            toks.append(_Token("IDENT", source[i:j], i))
            i = j
            continue
        if ch in _OPS:
            toks.append(_Token("OP", ch, i))
            i += 1
            continue
        if ch == "(":
            toks.append(_Token("LPAREN", ch, i))
            i += 1
            continue
        if ch == ")":
            toks.append(_Token("RPAREN", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {source[i]!r}", i,
                         expected=("number", "identifier", "operator", "(", ")"))
    toks.append(_Token("END", "", n))
    return toks


class _Parser:
    def __init__(self, source: str, variable: str):
        self.source = source
        self.variable = variable
        self.toks = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"found {tok.text or 'end of input'!r}", tok.pos,
                             expected=(what,))
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ParseError(f"trailing input {tok.text!r}", tok.pos,
                             expected=("operator", "end of input"))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            e = Bin(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "^":
            self.advance()
            return Bin("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            return Num(complex(float(tok.text)))
        if tok.kind == "LPAREN":
            self.advance()
            e = self.expr()
            self.expect("RPAREN", ")")
            return e
        if tok.kind == "IDENT":
            self.advance()
            name = tok.text
            if self.peek().kind == "LPAREN":
                if name not in FUNCTIONS:
                    raise UnknownIdentifierError(name, tok.pos)
                self.advance()
                arg = self.expr()
                self.expect("RPAREN", ")")
                return Call(name, arg)
            if name == "i":
                return IMAG_UNIT
            if name == self.variable:
                return Var(name)
            raise UnknownIdentifierError(name, tok.pos)
        raise ParseError(f"found {tok.text or 'end of input'!r}", tok.pos,
                         expected=("number", "identifier", "(", "-"))


def parse(source: str, variable: str = "t") -> Expr:
    """Parse infix source text into an AST.

    Raises :class:`ParseError` (with byte offset and expected-token set) on
    malformed input and :class:`UnknownIdentifierError` for identifiers other
    than the declared variable, ``i``, and the built-in functions.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0, expected=("expression",))
    return _Parser(source, variable).parse()


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _realish(z: np.ndarray) -> np.ndarray:
    return np.abs(z.imag) <= _REAL_SLACK * (1.0 + np.abs(z.real))


def _check_finite(value: np.ndarray, node: Expr) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise DomainError("non-finite value (overflow or singularity)", node)
    return value


def _powi(base: np.ndarray, n: int) -> np.ndarray:
    # exact repeated multiplication for small integer exponents
    if n == 0:
        return np.ones_like(base)
    result = None
    acc = base
    k = abs(n)
    while k:
        if k & 1:
            result = acc if result is None else result * acc
        acc = acc * acc
        k >>= 1
    return result if n > 0 else 1.0 / result


def _eval(node: Expr, x: np.ndarray, variable: str) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(x.shape, complex(node.value))
    if isinstance(node, Var):
        if node.name != variable:
            raise DomainError(f"unbound variable {node.name!r}", node)
        return x
    if isinstance(node, Neg):
        return -_eval(node.arg, x, variable)
    if isinstance(node, Bin):
        left = _eval(node.left, x, variable)
        right = _eval(node.right, x, variable)
        if node.op == "+":
            return _check_finite(left + right, node)
        if node.op == "-":
            return _check_finite(left - right, node)
        if node.op == "*":
            return _check_finite(left * right, node)
        if node.op == "/":
            if np.any(right == 0):
                raise DomainError("division by zero", node)
            return _check_finite(left / right, node)
        # '^'
        if isinstance(node.right, Num):
            ev = complex(node.right.value)
            if ev.imag == 0 and ev.real == int(ev.real) and abs(ev.real) <= 64:
                n = int(ev.real)
                if n < 0 and np.any(left == 0):
                    raise DomainError("zero raised to a negative power", node)
                return _check_finite(_powi(left, n), node)
        real_exp = _realish(right)
        int_exp = real_exp & (np.abs(right.real - np.round(right.real)) <= 1e-9)
        bad = _realish(left) & (left.real < 0) & ~int_exp
        if np.any(bad):
            raise DomainError("negative real base with non-integer exponent", node)
        if np.any((left == 0) & (right.real <= 0)):
            raise DomainError("zero base with non-positive exponent", node)
        with np.errstate(all="ignore"):
            return _check_finite(np.power(left, right), node)
    if isinstance(node, Call):
        u = _eval(node.arg, x, variable)
        with np.errstate(all="ignore"):
            if node.fn == "sin":
                return _check_finite(np.sin(u), node)
            if node.fn == "cos":
                return _check_finite(np.cos(u), node)
            if node.fn == "exp":
                return _check_finite(np.exp(u), node)
            if node.fn == "log":
                if np.any(_realish(u) & (u.real <= 0)):
                    raise DomainError("log of a non-positive real argument", node)
                return _check_finite(np.log(u), node)
            if node.fn == "sqrt":
                if np.any(_realish(u) & (u.real < 0)):
                    raise DomainError("sqrt of a negative real argument", node)
                return _check_finite(np.sqrt(u), node)
            if node.fn == "atan":
                return _check_finite(np.arctan(u), node)
            if node.fn == "abs":
                return _check_finite(np.abs(u).astype(complex), node)
    raise ExprError(f"malformed AST node {node!r}")


def evaluate(expr: Expr, value, variable: str = "t"):
    """Evaluate the expression at a scalar or array argument.

    Returns a complex scalar for scalar input, a complex ndarray otherwise.
    """
    arr = np.asarray(value, dtype=complex)
    scalar = arr.ndim == 0
    out = _eval(expr, np.atleast_1d(arr), variable)
    return complex(out[0]) if scalar else out


# --------------------------------------------------------------------------
# Differentiation
# --------------------------------------------------------------------------

def _is_num(e: Expr, v: complex) -> bool:
    return isinstance(e, Num) and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return Bin("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return Neg(b)
    return Bin("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0) or _is_num(b, 0):
        return Num(0j)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return Bin("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return Num(0j)
    if _is_num(b, 1):
        return a
    return Bin("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 1):
        return a
    if _is_num(b, 0):
        return Num(complex(1.0))
    return Bin("^", a, b)


def differentiate(expr: Expr, variable: str = "t") -> Expr:
    """Exact symbolic derivative with respect to the variable.

    Raises :class:`NonDifferentiableError` if the expression contains
    ``abs``.
    """
    if isinstance(expr, Num):
        return Num(0j)
    if isinstance(expr, Var):
        return Num(complex(1.0)) if expr.name == variable else Num(0j)
    if isinstance(expr, Neg):
        return Neg(differentiate(expr.arg, variable))
    if isinstance(expr, Bin):
        dl = differentiate(expr.left, variable)
        dr = differentiate(expr.right, variable)
        if expr.op == "+":
            return _add(dl, dr)
        if expr.op == "-":
            return _sub(dl, dr)
        if expr.op == "*":
            return _add(_mul(dl, expr.right), _mul(expr.left, dr))
        if expr.op == "/":
            num = _sub(_mul(dl, expr.right), _mul(expr.left, dr))
            return _div(num, _pow(expr.right, Num(complex(2.0))))
        # '^'
        if isinstance(expr.right, Num):
            c = expr.right.value
            inner = _mul(Num(c), _pow(expr.left, Num(c - 1)))
            return _mul(inner, dl)
        # general u^v = exp(v log u)
        bracket = _add(_mul(dr, Call("log", expr.left)),
                       _div(_mul(expr.right, dl), expr.left))
        return _mul(Bin("^", expr.left, expr.right), bracket)
    if isinstance(expr, Call):
        u = expr.arg
        du = differentiate(u, variable)
        if expr.fn == "sin":
            return _mul(Call("cos", u), du)
        if expr.fn == "cos":
            return Neg(_mul(Call("sin", u), du))
        if expr.fn == "exp":
            return _mul(Call("exp", u), du)
        if expr.fn == "log":
            return _div(du, u)
        if expr.fn == "sqrt":
            return _div(du, _mul(Num(complex(2.0)), Call("sqrt", u)))
        if expr.fn == "atan":
            return _div(du, _add(Num(complex(1.0)), _pow(u, Num(complex(2.0)))))
        raise NonDifferentiableError(f"{expr.fn!r} is not differentiable")
    raise ExprError(f"malformed AST node {expr!r}")


# --------------------------------------------------------------------------
# Pretty printer
# --------------------------------------------------------------------------

# precedence levels: '+','-' 1, '*','/' 2, unary minus 3, '^' 4, atoms 5
_PREC_BIN = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC_BIN[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def _num_text(value: complex) -> str:
    if value == 1j:
        return "i"
    r = value.real
    if value.imag == 0:
        if r >= 0 and r == int(r) and abs(r) < 1e15:
            return str(int(r))
        if r >= 0:
            return repr(r)
    # negative or general complex constants do not arise from parsing or
    # differentiation; render a reparseable fallback anyway
    if value.imag == 0:
        return f"(0-{repr(-r)})"
    return f"({value.real}+{value.imag}*i)"


def _render(e: Expr, minimum: int) -> str:
    me = _prec(e)
    if isinstance(e, Num):
        text = _num_text(e.value)
    elif isinstance(e, Var):
        text = e.name
    elif isinstance(e, Call):
        text = f"{e.fn}({_render(e.arg, 1)})"
    elif isinstance(e, Neg):
        text = "-" + _render(e.arg, 3)
    else:
        if e.op == "^":
            text = _render(e.left, 5) + "^" + _render(e.right, 3)
        else:
            lhs = _render(e.left, me)
            rhs = _render(e.right, me + 1)
            text = f"{lhs}{e.op}{rhs}"
    if me < minimum:
        return f"({text})"
    return text


def pretty(expr: Expr) -> str:
    """Render the AST as source text that reparses to an equal AST."""
    return _render(expr, 1)
