# services/parse_program.py
"""
Program Parsing Service

This module turns program text into the immutable ASTs of models.syntax. It:
1. Parses with an LALR grammar (lark) that tracks source positions
2. Converts lark errors into ProgramSyntaxError with line and column
3. Checks label uniqueness and the optional `vars` declaration header
4. Numbers unlabeled instructions in preorder

Where an operand is expected, a minus written directly before a number is
part of the literal (`-3/2`); `-(3/2)` is the negation of a literal.

Concrete syntax, by example:

    # comments run to the end of the line
    vars x, y;
    ^1 x = 3/2;
    ^2 while x < 3 { ^3 x = x + 1 };
    ^4 if x <= y then { skip } else { y = -(x) + -3/2 };
    ^5 (x, y) = input()
"""

import logging
from dataclasses import replace
from fractions import Fraction
from itertools import count
from typing import Dict, Optional, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from models.errors import DuplicateLabel, ProgramSyntaxError, UndeclaredVariable, WorkbenchError
from models.syntax import (
    BINOP_BY_SYMBOL, COMPARE_BY_SYMBOL, Assign, If, Input, Instr, Lt, Le, Neg, Not, Program,
    RationalLiteral, Seq, Skip, Var, While, free_vars, labels, sequence,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
program: decl? seq

decl: "vars" NAME ("," NAME)* ";"

seq: instr (";" instr)* ";"?

instr: label? stmt
label: "^" INT

?stmt: "skip"                                   -> skip
     | NAME "=" expr                            -> assign
     | "if" test "then"? block "else" block     -> if_
     | "while" test block                       -> while_
     | "(" NAME ("," NAME)* ")" "=" "input" "(" ")"  -> input_

block: "{" seq "}"

?test: comparison
     | "!" "(" test ")"                         -> not_

comparison: expr COMPARATOR expr
COMPARATOR: "<=" | ">=" | "==" | "!=" | "<" | ">"

?expr: sum
?sum: product
    | sum "+" product                           -> add
    | sum "-" product                           -> sub
?product: unary
    | product "*" unary                         -> mul
    | product "/" unary                         -> div
?unary: atom
    | "-" unary                                 -> neg
?atom: SIGNED                                   -> literal
     | RATIONAL                                 -> literal
     | DECIMAL                                  -> literal
     | INT                                      -> literal
     | NAME                                     -> var
     | "(" expr ")"

SIGNED.3: /-\d+(\/0*[1-9]\d*|\.\d+)?/
RATIONAL.2: /\d+\/0*[1-9]\d*/
DECIMAL.2: /\d+\.\d+/
INT: /\d+/
NAME: /[A-Za-z_][A-Za-z0-9_]*/

%ignore /[ \t\f\r\n]+/
%ignore /#[^\n]*/
"""


@v_args(meta=True)
class ProgramTransformer(Transformer):
    """Builds models.syntax nodes; records where each variable is first used."""

    def __init__(self):
        super().__init__()
        self.first_use: Dict[str, Tuple[int, int]] = {}
        self.declared: Optional[Tuple[str, ...]] = None

    def _use(self, token):
        name = str(token)
        self.first_use.setdefault(name, (token.line, token.column))
        return name

    def program(self, meta, children):
        if len(children) == 2:
            self.declared = children[0]
        return children[-1]

    def decl(self, meta, children):
        names = tuple(str(c) for c in children)
        if len(set(names)) != len(names):
            raise ProgramSyntaxError("a variable is declared twice", meta.line, meta.column)
        return names

    def seq(self, meta, children):
        return sequence(*children)

    def instr(self, meta, children):
        if len(children) == 2:
            return replace(children[1], label=children[0])
        return children[0]

    def label(self, meta, children):
        return int(children[0])

    def block(self, meta, children):
        return children[0]

    def skip(self, meta, children):
        return Skip(None, line=meta.line)

    def assign(self, meta, children):
        return Assign(None, self._use(children[0]), children[1], line=meta.line)

    def if_(self, meta, children):
        test, then, orelse = children
        return If(None, test, then, orelse, line=meta.line)

    def while_(self, meta, children):
        test, body = children
        return While(None, test, body, line=meta.line)

    def input_(self, meta, children):
        targets = tuple(self._use(c) for c in children)
        if len(set(targets)) != len(targets):
            raise ProgramSyntaxError("input targets must be distinct", meta.line, meta.column)
        return Input(None, targets, line=meta.line)

    def not_(self, meta, children):
        return Not(children[0])

    def comparison(self, meta, children):
        lhs, op, rhs = children
        op = str(op)
        # >= and > are sugar for negated < and <=
        if op == ">=":
            return Not(Lt(lhs, rhs))
        if op == ">":
            return Not(Le(lhs, rhs))
        return COMPARE_BY_SYMBOL[op](lhs, rhs)

    def add(self, meta, children):
        return BINOP_BY_SYMBOL["+"](*children)

    def sub(self, meta, children):
        return BINOP_BY_SYMBOL["-"](*children)

    def mul(self, meta, children):
        return BINOP_BY_SYMBOL["*"](*children)

    def div(self, meta, children):
        return BINOP_BY_SYMBOL["/"](*children)

    def neg(self, meta, children):
        return Neg(children[0])

    def literal(self, meta, children):
        return RationalLiteral(Fraction(str(children[0])))

    def var(self, meta, children):
        return Var(self._use(children[0]))


parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True, start=["program", "expr", "test"])


def _parse(text: str, start: str):
    """Run the parser and transformer, translating lark failures."""
    transformer = ProgramTransformer()
    try:
        tree = parser.parse(text, start=start)
        return transformer.transform(tree), transformer
    except VisitError as e:
        if isinstance(e.orig_exc, WorkbenchError):
            raise e.orig_exc
        raise
    except UnexpectedEOF as e:
        lines = text.splitlines() or [""]
        raise ProgramSyntaxError("unexpected end of input", len(lines), len(lines[-1]) + 1) from None
    except UnexpectedInput as e:
        raise ProgramSyntaxError(f"unexpected input near {_context(text, e)!r}", e.line, e.column) from None


def _context(text: str, error: UnexpectedInput) -> str:
    try:
        return error.get_context(text, span=12).splitlines()[0].strip()
    except Exception:
        return ""


def assign_labels(instr: Instr, fresh) -> Instr:
    """Give every unlabeled instruction the next label from `fresh`, in preorder."""
    if isinstance(instr, Seq):
        first = assign_labels(instr.first, fresh)
        return Seq(first, assign_labels(instr.second, fresh))
    label = instr.label if instr.label is not None else next(fresh)
    if isinstance(instr, If):
        then = assign_labels(instr.then, fresh)
        return replace(instr, label=label, then=then, orelse=assign_labels(instr.orelse, fresh))
    if isinstance(instr, While):
        return replace(instr, label=label, body=assign_labels(instr.body, fresh))
    return replace(instr, label=label)


def parse_program(text: str) -> Program:
    """
    Parse program text into a labeled Program.

    Parameters
    ----------
    text : str
        Program source.

    Returns
    -------
    Program
        Root instruction with every label assigned, the exit label and the
        declared variables.

    Raises
    ------
    ProgramSyntaxError
        If the text does not match the grammar.
    DuplicateLabel
        If two instructions carry the same explicit label.
    UndeclaredVariable
        If a `vars` header is present and a variable outside it is used.
    """
    root, transformer = _parse(text, "program")

    explicit = [label for label in labels(root) if label is not None]
    seen = set()
    for label in explicit:
        if label in seen:
            raise DuplicateLabel(label)
        seen.add(label)

    fresh = (n for n in count(1) if n not in seen)
    root = assign_labels(root, fresh)

    if transformer.declared is not None:
        for name, (line, column) in transformer.first_use.items():
            if name not in transformer.declared:
                raise UndeclaredVariable(name, line, column)
        declared = transformer.declared
    else:
        declared = tuple(transformer.first_use)

    exit_label = max(labels(root)) + 1
    logger.debug("parsed program: %d labels, variables %s", exit_label - 1, declared)
    return Program(root=root, exit_label=exit_label, declared_vars=declared)


def make_program(root: Instr, declared=None) -> Program:
    """Label an AST built in code and wrap it as a Program."""
    taken = {label for label in labels(root) if label is not None}
    root = assign_labels(root, (n for n in count(1) if n not in taken))
    if declared is None:
        declared = tuple(sorted(free_vars(root)))
    return Program(root=root, exit_label=max(labels(root)) + 1, declared_vars=tuple(declared))


def parse_expr(text: str):
    """Parse a single expression."""
    return _parse(text, "expr")[0]


def parse_test(text: str):
    """Parse a single test."""
    return _parse(text, "test")[0]


def load_program(path) -> Program:
    """Read a UTF-8 program file and parse it."""
    with open(path, encoding="utf-8") as handle:
        return parse_program(handle.read())
