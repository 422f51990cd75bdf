# models/syntax.py
"""
Program Syntax

Immutable AST node types for the toy imperative language:
1. Expressions: rational literals, variables, negation and the four operators
2. Tests: the four comparisons and negation
3. Instructions: labeled skip, assignment, if, while, input, and sequencing

Nodes are frozen dataclasses, so ASTs are hashable values that can be shared
freely and used as keys. Source positions are carried for diagnostics only
and never take part in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple, Union

from models.numerics import format_rational


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalLiteral:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    e: "Expr"


@dataclass(frozen=True)
class BinOp:
    """Shared shape of the four binary operators; `symbol` is fixed per subclass."""
    lhs: "Expr"
    rhs: "Expr"
    symbol = "?"


@dataclass(frozen=True)
class Add(BinOp):
    symbol = "+"


@dataclass(frozen=True)
class Sub(BinOp):
    symbol = "-"


@dataclass(frozen=True)
class Mul(BinOp):
    symbol = "*"


@dataclass(frozen=True)
class Div(BinOp):
    symbol = "/"


Expr = Union[RationalLiteral, Var, Neg, Add, Sub, Mul, Div]

BINOP_BY_SYMBOL = {"+": Add, "-": Sub, "*": Mul, "/": Div}


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Compare:
    lhs: Expr
    rhs: Expr
    symbol = "?"


@dataclass(frozen=True)
class Le(Compare):
    symbol = "<="


@dataclass(frozen=True)
class Lt(Compare):
    symbol = "<"


@dataclass(frozen=True)
class Eq(Compare):
    symbol = "=="


@dataclass(frozen=True)
class Ne(Compare):
    symbol = "!="


@dataclass(frozen=True)
class Not:
    t: "Test"


Test = Union[Le, Lt, Eq, Ne, Not]

COMPARE_BY_SYMBOL = {"<=": Le, "<": Lt, "==": Eq, "!=": Ne}


# ---------------------------------------------------------------------------
# Instructions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    label: Optional[int] = None
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    label: Optional[int]
    var: str
    expr: Expr
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    label: Optional[int]
    test: Test
    then: "Instr"
    orelse: "Instr"
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    label: Optional[int]
    test: Test
    body: "Instr"
    line: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Input:
    label: Optional[int]
    targets: Tuple[str, ...]
    line: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        if not self.targets:
            raise ValueError("input needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"input targets must be distinct: {self.targets}")


@dataclass(frozen=True)
class Seq:
    first: "Instr"
    second: "Instr"


Instr = Union[Skip, Assign, If, While, Input, Seq]
LABELED = (Skip, Assign, If, While, Input)


@dataclass(frozen=True)
class Program:
    """
    A parsed program.

    Attributes
    ----------
    root : Instr
        The instruction tree.
    exit_label : int
        Successor label of the whole program (one past the largest label).
    declared_vars : tuple of str
        The program's finite variable set, in declaration or first-use order.
    """
    root: Instr
    exit_label: int
    declared_vars: Tuple[str, ...]


def sequence(*instrs: Instr) -> Instr:
    """Right-nested canonical sequence of one or more instructions."""
    flat: List[Instr] = []
    for instr in instrs:
        flat.extend(flatten(instr))
    if not flat:
        raise ValueError("sequence needs at least one instruction")
    result = flat[-1]
    for instr in reversed(flat[:-1]):
        result = Seq(instr, result)
    return result


def flatten(instr: Instr) -> List[Instr]:
    if isinstance(instr, Seq):
        return flatten(instr.first) + flatten(instr.second)
    return [instr]


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------

def free_vars(node) -> frozenset:
    """Variables occurring syntactically in an expression, test, instruction or program."""
    if isinstance(node, Program):
        return free_vars(node.root)
    if isinstance(node, RationalLiteral) or isinstance(node, Skip):
        return frozenset()
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return free_vars(node.e)
    if isinstance(node, (BinOp, Compare)):
        return free_vars(node.lhs) | free_vars(node.rhs)
    if isinstance(node, Not):
        return free_vars(node.t)
    if isinstance(node, Assign):
        return frozenset({node.var}) | free_vars(node.expr)
    if isinstance(node, If):
        return free_vars(node.test) | free_vars(node.then) | free_vars(node.orelse)
    if isinstance(node, While):
        return free_vars(node.test) | free_vars(node.body)
    if isinstance(node, Input):
        return frozenset(node.targets)
    if isinstance(node, Seq):
        return free_vars(node.first) | free_vars(node.second)
    raise TypeError(f"not a syntax node: {node!r}")


def preorder(instr: Instr) -> Iterator[Instr]:
    """Instruction nodes in preorder (Seq nodes included)."""
    yield instr
    if isinstance(instr, If):
        yield from preorder(instr.then)
        yield from preorder(instr.orelse)
    elif isinstance(instr, While):
        yield from preorder(instr.body)
    elif isinstance(instr, Seq):
        yield from preorder(instr.first)
        yield from preorder(instr.second)


def labels(instr: Instr) -> List[Optional[int]]:
    return [node.label for node in preorder(instr) if isinstance(node, LABELED)]


def find_instr(program: Program, label: int) -> Optional[Instr]:
    for node in preorder(program.root):
        if isinstance(node, LABELED) and node.label == label:
            return node
    return None


def input_sites(instr: Instr) -> List[Input]:
    return [node for node in preorder(instr) if isinstance(node, Input)]


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

def _print_expr(e: Expr, level: int = 0) -> str:
    # level 0: additive context, 1: multiplicative left, 2: operand that needs atoms
    if isinstance(e, RationalLiteral):
        return format_rational(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-({_print_expr(e.e)})"
    if isinstance(e, (Add, Sub)):
        text = f"{_print_expr(e.lhs, 0)} {e.symbol} {_print_expr(e.rhs, 1)}"
        return f"({text})" if level >= 1 else text
    if isinstance(e, (Mul, Div)):
        text = f"{_print_expr(e.lhs, 1)} {e.symbol} {_print_expr(e.rhs, 2)}"
        return f"({text})" if level >= 2 else text
    raise TypeError(f"not an expression: {e!r}")


def _print_test(t: Test) -> str:
    if isinstance(t, Not):
        return f"!({_print_test(t.t)})"
    return f"{_print_expr(t.lhs)} {t.symbol} {_print_expr(t.rhs)}"


def _prefix(label: Optional[int]) -> str:
    return "" if label is None else f"^{label} "


def _print_instr(instr: Instr) -> str:
    if isinstance(instr, Seq):
        return f"{_print_instr(instr.first)}; {_print_instr(instr.second)}"
    prefix = _prefix(instr.label)
    if isinstance(instr, Skip):
        return f"{prefix}skip"
    if isinstance(instr, Assign):
        return f"{prefix}{instr.var} = {_print_expr(instr.expr)}"
    if isinstance(instr, If):
        return (f"{prefix}if {_print_test(instr.test)} then {{ {_print_instr(instr.then)} }}"
                f" else {{ {_print_instr(instr.orelse)} }}")
    if isinstance(instr, While):
        return f"{prefix}while {_print_test(instr.test)} {{ {_print_instr(instr.body)} }}"
    if isinstance(instr, Input):
        return f"{prefix}({', '.join(instr.targets)}) = input()"
    raise TypeError(f"not an instruction: {instr!r}")


def pretty_print(node) -> str:
    """
    Render a node in the concrete syntax.

    Parsing the output of a parsed program gives back a structurally equal
    AST with the same labels.
    """
    if isinstance(node, Program):
        return _print_instr(node.root)
    if isinstance(node, (RationalLiteral, Var, Neg, BinOp)):
        return _print_expr(node)
    if isinstance(node, (Compare, Not)):
        return _print_test(node)
    return _print_instr(node)
