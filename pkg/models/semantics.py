# models/semantics.py
"""
Concrete Semantics of Expressions and Tests

This module implements:
1. Env, the immutable program state mapping variables to RealE or FloatE values
2. The real semantics of expressions (exact rationals, err absorbing)
3. The float semantics of expressions (rounding at every subexpression)
4. The set-valued semantics of tests: {0}, {1}, or {0, 1} when err is involved

A Semantics object bundles the mode (real or float) with the float format so
that the rest of the workbench can evaluate without caring which one is active.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from models.errors import NotRepresentable, UnboundVariable
from models.numerics import (
    ERR, FloatFormat, FloatValue, float_arith, format_decimal, format_rational, inj,
    parse_real, proj, real_arith,
)
from models.syntax import Add, Compare, Div, Eq, Le, Lt, Mul, Ne, Neg, Not, RationalLiteral, Sub, Var

OPERATOR_OF = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


@dataclass(frozen=True)
class Env:
    """
    An environment: a total map from the declared variables to values.

    Bindings are kept sorted by name so that equal maps are equal objects
    (and hash alike); `mode` is 'real' or 'float'.
    """
    bindings: Tuple[Tuple[str, object], ...]
    mode: str = "real"

    @classmethod
    def of(cls, mapping: Mapping[str, object], mode: str = "real") -> "Env":
        return cls(tuple(sorted(mapping.items())), mode)

    def get(self, name: str):
        for key, value in self.bindings:
            if key == name:
                return value
        raise UnboundVariable(name)

    def __getitem__(self, name: str):
        return self.get(name)

    def __contains__(self, name: str) -> bool:
        return any(key == name for key, _ in self.bindings)

    def set(self, name: str, value) -> "Env":
        return self.update({name: value})

    def update(self, changes: Mapping[str, object]) -> "Env":
        merged = dict(self.bindings)
        merged.update(changes)
        return Env.of(merged, self.mode)

    def restrict(self, names: Iterable[str]) -> "Env":
        keep = set(names)
        return Env(tuple((k, v) for k, v in self.bindings if k in keep), self.mode)

    def names(self) -> Tuple[str, ...]:
        return tuple(key for key, _ in self.bindings)

    def as_dict(self) -> Dict[str, object]:
        return dict(self.bindings)

    def __str__(self):
        if not self.bindings:
            return "{}"
        return ", ".join(f"{k}={_show(v)}" for k, v in self.bindings)


def _show(value) -> str:
    if isinstance(value, FloatValue):
        return format_decimal(value.to_fraction())
    return format_rational(value)


@dataclass(frozen=True)
class TestResult:
    """A non-empty subset of {0, 1}."""
    __test__ = False  # not a pytest class

    values: frozenset

    def __post_init__(self):
        if not self.values or not self.values <= {0, 1}:
            raise ValueError(f"invalid test result {set(self.values)}")

    def __contains__(self, v) -> bool:
        return v in self.values

    def __iter__(self):
        return iter(sorted(self.values))

    def negate(self) -> "TestResult":
        return TestResult(frozenset(1 - v for v in self.values))

    @property
    def is_singleton(self) -> bool:
        return len(self.values) == 1

    def __str__(self):
        return "{" + ",".join(str(v) for v in sorted(self.values)) + "}"


TRUE = TestResult(frozenset({1}))
FALSE = TestResult(frozenset({0}))
EITHER = TestResult(frozenset({0, 1}))


def _compare(test: Compare, a, b) -> TestResult:
    if a is ERR or b is ERR:
        return EITHER
    if isinstance(test, Le):
        holds = a <= b
    elif isinstance(test, Lt):
        holds = a < b
    elif isinstance(test, Eq):
        holds = a == b
    elif isinstance(test, Ne):
        holds = a != b
    else:
        raise TypeError(f"not a comparison: {test!r}")
    return TRUE if holds else FALSE


def eval_real(e, env: Env):
    """
    Real semantics of an expression.

    Parameters
    ----------
    e : Expr
        Expression to evaluate.
    env : Env
        Real-mode environment covering the free variables of e.

    Returns
    -------
    Fraction or ERR

    Raises
    ------
    UnboundVariable
        If e mentions a variable env does not bind.
    """
    if isinstance(e, RationalLiteral):
        return Fraction(e.value)
    if isinstance(e, Var):
        return env.get(e.name)
    if isinstance(e, Neg):
        return real_arith("neg", eval_real(e.e, env))
    return real_arith(OPERATOR_OF[type(e)], eval_real(e.lhs, env), eval_real(e.rhs, env))


def eval_float(e, fmt: FloatFormat, env: Env):
    """
    Float semantics of an expression: literals go through proj, and every
    operator computes on the inj-images of its operands before rounding.
    """
    if isinstance(e, RationalLiteral):
        return proj(fmt, Fraction(e.value))
    if isinstance(e, Var):
        return env.get(e.name)
    if isinstance(e, Neg):
        return float_arith(fmt, "neg", eval_float(e.e, fmt, env))
    return float_arith(fmt, OPERATOR_OF[type(e)], eval_float(e.lhs, fmt, env), eval_float(e.rhs, fmt, env))


def eval_test(t, env: Env, fmt: Optional[FloatFormat] = None) -> TestResult:
    """
    Set-valued semantics of a test.

    Comparisons give {1} or {0} on non-err operands and {0, 1} as soon as
    one operand evaluates to err; negation maps every v to 1 - v.
    `fmt` is required for float-mode environments.
    """
    if isinstance(t, Not):
        return eval_test(t.t, env, fmt).negate()
    if env.mode == "float":
        if fmt is None:
            raise ValueError("a float format is required to evaluate float-mode tests")
        return _compare(t, inj(eval_float(t.lhs, fmt, env)), inj(eval_float(t.rhs, fmt, env)))
    return _compare(t, eval_real(t.lhs, env), eval_real(t.rhs, env))


class Semantics:
    """
    The active concrete semantics: real, or float over a given format.

    Parameters
    ----------
    fmt : FloatFormat, optional
        Float format; None selects the real semantics.
    """
    def __init__(self, fmt: Optional[FloatFormat] = None):
        self.fmt = fmt

    @classmethod
    def from_string(cls, text: str) -> "Semantics":
        """'real', or a float format string such as 'tiny:p=3,emin=-1,emax=1'."""
        text = text.strip()
        if text == "real":
            return cls()
        return cls(FloatFormat.parse(text))

    @property
    def mode(self) -> str:
        return "real" if self.fmt is None else "float"

    def __eq__(self, other):
        return isinstance(other, Semantics) and self.fmt == other.fmt

    def __hash__(self):
        return hash(self.fmt)

    def __str__(self):
        return "real" if self.fmt is None else str(self.fmt)

    def eval_expr(self, e, env: Env):
        if self.fmt is None:
            return eval_real(e, env)
        return eval_float(e, self.fmt, env)

    def eval_test(self, t, env: Env) -> TestResult:
        return eval_test(t, env, self.fmt)

    def coerce(self, r):
        """Bring an err-extended real into the active value set (proj in float mode)."""
        if self.fmt is None:
            return r
        return proj(self.fmt, r)

    def to_real(self, value):
        """inj in float mode, identity in real mode."""
        if isinstance(value, FloatValue):
            return inj(value)
        return value

    def parse_value(self, text: str):
        """
        Parse a value for this semantics.

        Raises
        ------
        NotRepresentable
            In float mode, for a rational that the format cannot hold exactly.
        """
        r = parse_real(text)
        return self.exact_value(r)

    def exact_value(self, r):
        if self.fmt is None or r is ERR:
            return r
        f = proj(self.fmt, r)
        if f is ERR or f.to_fraction() != r:
            raise NotRepresentable(f"{format_rational(r)} is not representable in {self.fmt}")
        return f

    def format_value(self, value) -> str:
        return _show(value)

    def env(self, mapping: Mapping[str, object]) -> Env:
        """Build an environment of this mode from already-converted values."""
        return Env.of(mapping, self.mode)
