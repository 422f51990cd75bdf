# models/answers.py
"""
Answer Domains and Continuations

This module implements the answer domains that weakest preconditions live in
and the continuations (maps from environments to answers) that they transform:
1. AnswerDomain: an omega-cpo with a smallest element and binary suprema
2. BoolAns ({0, 1}, may-reachability) and ExtNonNegAns ([0, +inf], expectations)
3. The Continuation family: expression-valued, indicator, table-backed, and the
   pointwise algebra (scale, add, join, truncation) the prevision laws need

Continuations are immutable; evaluating one is a pure function of the env.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from functools import reduce
from typing import Callable, Dict, Iterable, Mapping, Optional

from models.errors import DomainMismatch
from models.numerics import ERR, format_decimal

INFINITY = math.inf


class AnswerDomain(ABC):
    """
    Capability record of an answer domain.

    Attributes
    ----------
    name : str
        Identifier used on the command line.
    bottom : object
        The least element.
    exact_chains : bool
        True when ascending chains over finite env sets always stabilise
        (the domain has no infinite ascending chains).
    """
    name = "abstract"
    bottom = None
    exact_chains = False

    @abstractmethod
    def leq(self, a, b) -> bool:
        ...

    @abstractmethod
    def join(self, a, b):
        ...

    @abstractmethod
    def contains(self, a) -> bool:
        ...

    def eq(self, a, b) -> bool:
        return a == b

    def join_all(self, values: Iterable):
        return reduce(self.join, values, self.bottom)

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, a) -> str:
        return format_decimal(a)

    def __repr__(self):
        return f"<{self.name} answers>"


class BoolAns(AnswerDomain):
    """{0, 1} ordered 0 < 1; continuations are predicates on environments."""
    name = "bool"
    bottom = 0
    exact_chains = True

    def leq(self, a, b) -> bool:
        return a <= b

    def join(self, a, b):
        return max(a, b)

    def contains(self, a) -> bool:
        return a in (0, 1)

    def parse(self, text: str):
        value = int(text.strip())
        if value not in (0, 1):
            raise ValueError(f"boolean answer must be 0 or 1, got {text!r}")
        return value

    def format(self, a) -> str:
        return str(int(a))


class ExtNonNegAns(AnswerDomain):
    """
    [0, +inf] with exact rationals below infinity.

    Arithmetic follows the extended convention: 0 * inf = inf * 0 = 0,
    inf * inf = inf, x + inf = inf + x = inf.
    """
    name = "extnonneg"
    bottom = Fraction(0)
    exact_chains = False

    def leq(self, a, b) -> bool:
        return a <= b

    def join(self, a, b):
        return a if a >= b else b

    def contains(self, a) -> bool:
        return a == INFINITY or (isinstance(a, (int, Fraction)) and a >= 0)

    def add(self, a, b):
        if a == INFINITY or b == INFINITY:
            return INFINITY
        return Fraction(a) + Fraction(b)

    def mul(self, a, b):
        if a == 0 or b == 0:
            return Fraction(0)
        if a == INFINITY or b == INFINITY:
            return INFINITY
        return Fraction(a) * Fraction(b)

    def minus(self, a, b):
        """a - b for b <= a, b finite."""
        if a == INFINITY:
            return INFINITY
        return Fraction(a) - Fraction(b)

    def parse(self, text: str):
        text = text.strip()
        if text in ("inf", "+inf"):
            return INFINITY
        try:
            value = Fraction(text)
        except ZeroDivisionError:
            raise ValueError(f"{text!r} has a zero denominator") from None
        if value < 0:
            raise ValueError(f"answer must be non-negative, got {text!r}")
        return value

    def format(self, a) -> str:
        if a == INFINITY:
            return "+inf"
        return format_decimal(a)


BOOL = BoolAns()
EXT = ExtNonNegAns()

DOMAINS = {"bool": BOOL, "extnonneg": EXT, "ext": EXT}


def domain_by_name(name: str) -> AnswerDomain:
    try:
        return DOMAINS[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown answer domain {name!r}; choose bool or extnonneg") from None


def same_domain(a: AnswerDomain, b: AnswerDomain) -> bool:
    return a.name == b.name


# ---------------------------------------------------------------------------
# Continuations
# ---------------------------------------------------------------------------

class Continuation(ABC):
    """A total map from environments to answers of one domain."""
    domain: AnswerDomain = EXT
    description = "continuation"

    @abstractmethod
    def __call__(self, env):
        ...

    def __repr__(self):
        return f"<{self.description} over {self.domain.name}>"


class ConstCont(Continuation):
    def __init__(self, domain: AnswerDomain, value):
        self.domain = domain
        self.value = value
        self.description = f"const {domain.format(value)}"

    def __call__(self, env):
        return self.value


class ExprCont(Continuation):
    """
    An expression read as a non-negative answer.

    err and negative values map to `default` (0 unless configured).
    """
    def __init__(self, expr, semantics, default=Fraction(0)):
        from models.syntax import pretty_print
        self.domain = EXT
        self.expr = expr
        self.semantics = semantics
        self.default = default
        self.description = f"expr: {pretty_print(expr)}"

    def __call__(self, env):
        value = self.semantics.to_real(self.semantics.eval_expr(self.expr, env))
        if value is ERR or value < 0:
            return self.default
        return value


class IndicatorCont(Continuation):
    """1 where the test may hold (1 is in its result set), 0 elsewhere."""
    def __init__(self, test, semantics, domain: AnswerDomain = BOOL):
        from models.syntax import pretty_print
        self.domain = domain
        self.test = test
        self.semantics = semantics
        self.one = 1 if domain is BOOL else Fraction(1)
        self.zero = domain.bottom
        self.description = f"indicator: {pretty_print(test)}"

    def __call__(self, env):
        return self.one if 1 in self.semantics.eval_test(self.test, env) else self.zero


class TableCont(Continuation):
    """A finite table with a default for environments outside it."""
    def __init__(self, domain: AnswerDomain, table: Mapping, default=None):
        self.domain = domain
        self.table = dict(table)
        self.default = domain.bottom if default is None else default
        self.description = f"table of {len(self.table)} rows"

    def __call__(self, env):
        return self.table.get(env, self.default)


class FunctionCont(Continuation):
    """Wraps a plain function; used for continuations built by the engine."""
    def __init__(self, domain: AnswerDomain, fn: Callable, description: str = "function"):
        self.domain = domain
        self.fn = fn
        self.description = description

    def __call__(self, env):
        return self.fn(env)


class MemoCont(Continuation):
    """Caches answers per environment. Only valid while the wrapped continuation is fixed."""
    def __init__(self, inner: Continuation, on_evaluate: Optional[Callable] = None):
        self.domain = inner.domain
        self.inner = inner
        self.cache: Dict = {}
        self.on_evaluate = on_evaluate
        self.description = inner.description

    def __call__(self, env):
        try:
            return self.cache[env]
        except KeyError:
            pass
        if self.on_evaluate is not None:
            self.on_evaluate()
        value = self.inner(env)
        self.cache[env] = value
        return value


class ScaledSum(Continuation):
    """alpha * first + second, pointwise in [0, +inf]."""
    def __init__(self, alpha, first: Continuation, second: Optional[Continuation] = None):
        _require_ext(first)
        if second is not None:
            _require_ext(second)
        alpha = INFINITY if alpha == INFINITY else Fraction(alpha)
        if alpha < 0:
            raise ValueError("scaling factor must be non-negative")
        self.domain = EXT
        self.alpha = alpha
        self.first = first
        self.second = second
        tail = "" if second is None else f" + ({second.description})"
        self.description = f"{EXT.format(alpha)}*({first.description}){tail}"

    def __call__(self, env):
        value = EXT.mul(self.alpha, self.first(env))
        if self.second is None:
            return value
        return EXT.add(value, self.second(env))


class JoinCont(Continuation):
    def __init__(self, first: Continuation, second: Continuation):
        if not same_domain(first.domain, second.domain):
            raise DomainMismatch(f"cannot join {first.domain.name} with {second.domain.name}")
        self.domain = first.domain
        self.first = first
        self.second = second
        self.description = f"sup({first.description}, {second.description})"

    def __call__(self, env):
        return self.domain.join(self.first(env), self.second(env))


class MinCont(Continuation):
    """Truncation min(kappa, cap)."""
    def __init__(self, inner: Continuation, cap):
        _require_ext(inner)
        self.domain = EXT
        self.inner = inner
        self.cap = cap
        self.description = f"min({inner.description}, {EXT.format(cap)})"

    def __call__(self, env):
        value = self.inner(env)
        return value if value <= self.cap else self.cap


def _require_ext(kappa: Continuation):
    if not same_domain(kappa.domain, EXT):
        raise DomainMismatch(f"{kappa.description} is not an extended non-negative continuation")


def zero(domain: AnswerDomain = EXT) -> ConstCont:
    return ConstCont(domain, domain.bottom)


def kappa_eval(kappa: Continuation, env, domain: Optional[AnswerDomain] = None):
    """
    Evaluate a continuation, checking it belongs to the expected domain.

    Raises
    ------
    DomainMismatch
        If `domain` is given and differs from the continuation's.
    """
    if domain is not None and not same_domain(kappa.domain, domain):
        raise DomainMismatch(f"continuation answers in {kappa.domain.name}, engine expects {domain.name}")
    return kappa(env)


def scale(alpha, kappa: Continuation) -> Continuation:
    return ScaledSum(alpha, kappa)


def add(first: Continuation, second: Continuation) -> Continuation:
    return ScaledSum(1, first, second)


def join(first: Continuation, second: Continuation) -> Continuation:
    return JoinCont(first, second)


def kappa_algebra(op: str, *kappas: Continuation, alpha=None) -> Continuation:
    """
    Pointwise continuation algebra: 'scale' (needs alpha >= 0), 'add', 'join'.
    """
    if op == "scale":
        if alpha is None or len(kappas) != 1:
            raise ValueError("scale takes one continuation and alpha")
        return scale(alpha, kappas[0])
    if op == "add":
        return reduce(add, kappas)
    if op == "join":
        return reduce(join, kappas)
    raise ValueError(f"unknown continuation operation {op!r}")
