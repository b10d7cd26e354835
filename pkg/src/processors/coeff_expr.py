"""
Coefficient Expression Processor
Parses, binds, prints and evaluates the complex coefficient fields a_ij(z), a_ij̄(z), b_i(z)
"""

import cmath
import logging
import re
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import (
    ConfigError,
    DimensionMismatch,
    DivisionNearZero,
    ExprSyntaxError,
    IndexOutOfRange,
    RCFinslerError,
)
from src.utils.linalg_core import CMatrix, as_vector

logger = logging.getLogger(__name__)

MAX_POWER = 16
MAX_DEPTH = 200
DIVISOR_FLOOR = 1e-300

# Precedence levels used by the printer
PREC_ADD = 1
PREC_MUL = 2
PREC_NEG = 3
PREC_POW = 4
PREC_ATOM = 5


class NumericOverflow(RCFinslerError):
    name = "NumericOverflow"


def _format_real(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Literal:
    value: complex

    prec = PREC_ATOM

    def evaluate(self, z: np.ndarray) -> complex:
        return self.value

    def to_source(self) -> str:
        re_part, im_part = self.value.real, self.value.imag
        if im_part == 0:
            text = _format_real(re_part)
            return f"({text})" if text.startswith("-") else text
        if re_part == 0:
            text = _format_real(im_part) + "i"
            return f"({text})" if text.startswith("-") else text
        sign = "-" if im_part < 0 else "+"
        return f"({_format_real(re_part)}{sign}{_format_real(abs(im_part))}i)"


@dataclass(frozen=True)
class Var:
    index: int

    prec = PREC_ATOM

    def evaluate(self, z: np.ndarray) -> complex:
        return complex(z[self.index - 1])

    def to_source(self) -> str:
        return f"z{self.index}" if self.index < 10 else f"z_{self.index}"


@dataclass(frozen=True)
class Conj:
    arg: Any

    prec = PREC_ATOM

    def evaluate(self, z: np.ndarray) -> complex:
        return self.arg.evaluate(z).conjugate()

    def to_source(self) -> str:
        return f"conj({self.arg.to_source()})"


@dataclass(frozen=True)
class Exp:
    arg: Any

    prec = PREC_ATOM

    def evaluate(self, z: np.ndarray) -> complex:
        value = self.arg.evaluate(z)
        try:
            return cmath.exp(value)
        except OverflowError:
            raise NumericOverflow(f"exp overflow at argument {value}")

    def to_source(self) -> str:
        return f"exp({self.arg.to_source()})"


@dataclass(frozen=True)
class Neg:
    arg: Any

    prec = PREC_NEG

    def evaluate(self, z: np.ndarray) -> complex:
        return -self.arg.evaluate(z)

    def to_source(self) -> str:
        return "-" + _wrap(self.arg, PREC_NEG)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Any
    right: Any

    @property
    def prec(self) -> int:
        return PREC_ADD if self.op in "+-" else PREC_MUL

    def evaluate(self, z: np.ndarray) -> complex:
        lhs = self.left.evaluate(z)
        rhs = self.right.evaluate(z)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        if abs(rhs) < DIVISOR_FLOOR:
            raise DivisionNearZero(f"Divisor modulus {abs(rhs):.3e} below {DIVISOR_FLOOR}")
        return lhs / rhs

    def to_source(self) -> str:
        # Left-associative: the right operand needs strictly higher precedence
        return f"{_wrap(self.left, self.prec)}{self.op}{_wrap(self.right, self.prec + 1)}"


@dataclass(frozen=True)
class Pow:
    base: Any
    exponent: int

    prec = PREC_POW

    def evaluate(self, z: np.ndarray) -> complex:
        value = self.base.evaluate(z)
        if self.exponent < 0:
            if abs(value) < DIVISOR_FLOOR:
                raise DivisionNearZero("Negative power of a vanishing base")
            return 1 / value ** (-self.exponent)
        return value ** self.exponent

    def to_source(self) -> str:
        return f"{_wrap(self.base, PREC_ATOM)}^{self.exponent}"


ExprAst = Union[Literal, Var, Conj, Exp, Neg, BinOp, Pow]


def _wrap(node: ExprAst, min_prec: int) -> str:
    text = node.to_source()
    return f"({text})" if node.prec < min_prec else text


def to_source(ast: ExprAst) -> str:
    """Print an AST as text that parses back to the same tree"""
    return ast.to_source()


# ---------------------------------------------------------------------------
# Tokenizer and recursive-descent parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_VAR_RE = re.compile(r"^z(?:_?)([1-9][0-9]*)$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if not match:
            raise ExprSyntaxError(
                f"Unexpected character {source[pos]!r}", line, pos - line_start + 1, "token"
            )
        kind = match.lastgroup
        if kind == "nl":
            line += 1
            line_start = match.end()
        elif kind != "ws":
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    """Recursive descent over the token list; precedence ^ > unary - > * / > + -"""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, expected: str):
        tok = self.current
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"Unexpected {found!r}", tok.line, tok.column, expected)

    def accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail(repr(text))

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail(f"nesting depth <= {MAX_DEPTH}")

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.current.kind != "eof":
            self.fail("operator or end of input")
        return node

    def expr(self) -> ExprAst:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.current.text
            self.pos += 1
            node = _fold(BinOp(op, node, self.term()))
        return node

    def term(self) -> ExprAst:
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> ExprAst:
        if self.accept("-"):
            self.enter()
            node = _fold(Neg(self.unary()))
            self.depth -= 1
            return node
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        # Right-associative chain of signed integers, folded to one integer
        self.enter()
        negative = self.accept("-")
        tok = self.current
        if tok.kind != "number" or not tok.text.isdigit():
            self.fail("integer exponent")
        self.pos += 1
        value = int(tok.text)
        if self.accept("^"):
            inner = self.exponent()
            if inner < 0:
                raise ExprSyntaxError(
                    "Non-integer exponent", tok.line, tok.column, "non-negative inner exponent"
                )
            value = value ** inner
        value = -value if negative else value
        if abs(value) > MAX_POWER:
            raise ExprSyntaxError(
                f"Exponent {value} out of range", tok.line, tok.column, f"|p| <= {MAX_POWER}"
            )
        self.depth -= 1
        return value

    def atom(self) -> ExprAst:
        tok = self.current
        if tok.kind == "number":
            self.pos += 1
            if tok.text.endswith("i"):
                value = complex(0.0, float(tok.text[:-1]))
            else:
                value = complex(float(tok.text), 0.0)
            if not cmath.isfinite(value):
                raise ExprSyntaxError(f"Number {tok.text} out of range", tok.line, tok.column, "finite number")
            return Literal(value)
        if tok.kind == "ident":
            self.pos += 1
            if tok.text in ("conj", "exp"):
                self.expect("(")
                self.enter()
                arg = self.expr()
                self.depth -= 1
                self.expect(")")
                return Conj(arg) if tok.text == "conj" else Exp(arg)
            match = _VAR_RE.match(tok.text)
            if not match:
                self.pos -= 1
                self.fail("variable z1..z9, z_10.. or conj/exp")
            return Var(int(match.group(1)))
        if self.accept("("):
            self.enter()
            node = self.expr()
            self.depth -= 1
            self.expect(")")
            return node
        self.fail("number, variable, function or '('")


def _fold(node: ExprAst) -> ExprAst:
    """Fold signs and sums of literals so complex constants stay single literals"""
    if isinstance(node, Neg) and isinstance(node.arg, Literal):
        return Literal(-node.arg.value)
    if isinstance(node, BinOp) and isinstance(node.left, Literal) and isinstance(node.right, Literal):
        if node.op == "+":
            value = node.left.value + node.right.value
        elif node.op == "-":
            value = node.left.value - node.right.value
        else:
            return node
        # an overflowing sum stays unfolded
        if cmath.isfinite(value):
            return Literal(value)
    return node


def parse(source: Union[str, bytes]) -> ExprAst:
    """
    Parse coefficient-field source text

    Args:
        source: Text (or UTF-8 bytes) in the coefficient grammar

    Returns:
        Immutable expression tree

    Raises:
        ExprSyntaxError: for any input outside the grammar
    """
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ExprSyntaxError("Invalid UTF-8", 1, e.start + 1, "UTF-8 text")
    try:
        return _Parser(tokenize(source)).parse()
    except ExprSyntaxError:
        raise
    except (ValueError, OverflowError, RecursionError) as e:
        raise ExprSyntaxError(f"Unreadable expression ({e.__class__.__name__})", 1, 1, "expression")


def variables(ast: ExprAst) -> List[int]:
    """Sorted distinct variable indices referenced by the tree"""
    found = set()
    stack = [ast]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.index)
        elif isinstance(node, (Conj, Exp, Neg)):
            stack.append(node.arg)
        elif isinstance(node, BinOp):
            stack.extend((node.left, node.right))
        elif isinstance(node, Pow):
            stack.append(node.base)
    return sorted(found)


def bind(ast: ExprAst, n: int) -> ExprAst:
    """
    Check every variable index against the dimension

    Raises:
        IndexOutOfRange: for z_k with k > n
    """
    for k in variables(ast):
        if k > n:
            raise IndexOutOfRange(f"Variable z{k} exceeds dimension n = {n}", {"index": k, "n": n})
    return ast


def evaluate(ast: ExprAst, z: Sequence[complex]) -> complex:
    """Evaluate a bound tree at the base point z"""
    return complex(ast.evaluate(np.asarray(z, dtype=complex)))


# ---------------------------------------------------------------------------
# Field tables
# ---------------------------------------------------------------------------

ZERO = Literal(0j)


@dataclass(frozen=True)
class FieldTable:
    """Coefficient fields a_ij(z) (symmetric slots), a_ij̄(z) and b_i(z)"""

    n: int
    a_sym: Tuple[Tuple[ExprAst, ...], ...]
    a_mixed: Tuple[Tuple[ExprAst, ...], ...]
    b: Tuple[ExprAst, ...]

    @classmethod
    def build(
        cls,
        n: int,
        a_sym: Optional[Sequence[Sequence[Optional[ExprAst]]]] = None,
        a_mixed: Optional[Sequence[Sequence[Optional[ExprAst]]]] = None,
        b: Optional[Sequence[Optional[ExprAst]]] = None,
    ) -> "FieldTable":
        """Assemble a table from (possibly ragged) AST grids; missing entries are 0"""
        if n < 1:
            raise ConfigError("Metric dimension must be >= 1")

        def entry(grid, i, j):
            if grid is None or i >= len(grid) or grid[i] is None or j >= len(grid[i]):
                return None
            return grid[i][j]

        sym = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                upper, lower = entry(a_sym, i, j), entry(a_sym, j, i)
                if upper is None and lower is None:
                    node = ZERO
                elif upper is None or lower is None or upper == lower:
                    node = upper if upper is not None else lower
                else:
                    node = BinOp("*", Literal(0.5 + 0j), BinOp("+", upper, lower))
                sym[i][j] = sym[j][i] = bind(node, n)

        mixed = [[bind(entry(a_mixed, i, j) or ZERO, n) for j in range(n)] for i in range(n)]
        one_form = [bind((b[i] if b is not None and i < len(b) and b[i] is not None else ZERO), n) for i in range(n)]

        return cls(
            n=n,
            a_sym=tuple(tuple(row) for row in sym),
            a_mixed=tuple(tuple(row) for row in mixed),
            b=tuple(one_form),
        )

    @classmethod
    def from_mapping(cls, data: Dict[str, Any]) -> "FieldTable":
        """
        Load a metric definition {"n", "a_sym", "a_mixed", "b"} of expression strings

        Raises:
            ConfigError: for a malformed document
            ExprSyntaxError / IndexOutOfRange: for bad expressions
        """
        if not isinstance(data, dict) or "n" not in data:
            raise ConfigError("Metric definition must be an object with an 'n' field")
        try:
            n = int(data["n"])
        except (TypeError, ValueError):
            raise ConfigError("Metric field 'n' must be an integer")

        def grid(key):
            rows = data.get(key) or []
            if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
                raise ConfigError(f"Metric field '{key}' must be a list of lists")
            return [[parse(str(cell)) for cell in row] for row in rows]

        b_src = data.get("b") or []
        if not isinstance(b_src, list):
            raise ConfigError("Metric field 'b' must be a list")

        return cls.build(
            n, a_sym=grid("a_sym"), a_mixed=grid("a_mixed"), b=[parse(str(cell)) for cell in b_src]
        )

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "a_sym": [[to_source(e) for e in row] for row in self.a_sym],
            "a_mixed": [[to_source(e) for e in row] for row in self.a_mixed],
            "b": [to_source(e) for e in self.b],
        }

    def mixed_is_zero(self) -> bool:
        return all(e == ZERO for row in self.a_mixed for e in row)

    def evaluate(self, z: Sequence[complex]) -> Tuple[CMatrix, CMatrix, np.ndarray]:
        """
        Evaluate the fields at z

        Returns:
            (a_ij symmetric, Hermitian part of a_ij̄, b_i); α² = Re{η·a·η + η·a_mixed·η̄}
            is unchanged by both symmetrizations
        """
        zv = np.asarray(z, dtype=complex)
        if zv.size != self.n:
            raise DimensionMismatch(f"Base point has {zv.size} coordinates, metric expects {self.n}")
        a = np.array([[e.evaluate(zv) for e in row] for row in self.a_sym], dtype=complex)
        m = np.array([[e.evaluate(zv) for e in row] for row in self.a_mixed], dtype=complex)
        b = np.array([e.evaluate(zv) for e in self.b], dtype=complex)
        return CMatrix.symmetric(a), CMatrix.general((m + m.conj().T) / 2), as_vector(b)
