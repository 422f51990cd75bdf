# models/wp.py
"""
Weakest Preconditions in Continuation-Passing Style

This module implements the wp semantics of programs over an answer domain:
1. wp: structural recursion on instructions (skip, assignment, sequence,
   if with a supremum over the possible test outcomes, input via Choquet)
2. LoopFunctional: the per-iteration map H_t whose Kleene chain from the
   bottom functional defines while-loops
3. wp_fixpoint: exact fixpoints by table iteration over the loop's finite
   env closure, with lazy bounded unfolding when the closure is not finite
4. enumerate_exec: an operational may-semantics oracle that branches on both
   outcomes of an undecided test

Continuations are evaluated on demand; loop continuations memoise their
answers, which is valid because their continuation argument is fixed.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from models.answers import (
    EXT, AnswerDomain, Continuation, FunctionCont, MemoCont, TableCont, same_domain, zero,
)
from models.capacity import InputModel, outcome_envs, wp_input
from models.errors import DomainMismatch, NoInputModel
from models.semantics import Env, Semantics
from models.syntax import Assign, If, Input, Instr, Seq, Skip, While, free_vars, pretty_print

logger = logging.getLogger(__name__)

# lazy unfolding nests one evaluation per loop level and per sequenced instruction;
# entry points raise the interpreter limit to this before evaluating
RECURSION_LIMIT = 20000


def raise_recursion_limit() -> int:
    """Lift the interpreter recursion limit to at least RECURSION_LIMIT; returns the previous limit."""
    previous = sys.getrecursionlimit()
    sys.setrecursionlimit(max(previous, RECURSION_LIMIT))
    return previous


@dataclass
class WpConfig:
    """
    Parameters of a wp computation.

    Attributes
    ----------
    semantics : Semantics
        Real, or float over a format.
    domain : AnswerDomain
        Answers of the continuations.
    max_iter : int
        Iteration budget N for loops whose fixpoint is not found exactly.
    universe : sequence of Env, optional
        Environments whose loop answers are tabulated eagerly.
    input_model : InputModel, optional
        Capacities for the program's input sites.
    closure_limit : int
        Largest loop env closure that is tabulated.
    fuel : int
        Step bound of the enumeration oracle used to compute closures.
    trace : FixpointTrace, optional
        Receives the status of every loop answer that is read.
    """
    semantics: Semantics = field(default_factory=Semantics)
    domain: AnswerDomain = EXT
    max_iter: int = 64
    universe: Optional[Sequence[Env]] = None
    input_model: Optional[InputModel] = None
    closure_limit: int = 4096
    fuel: int = 10000
    trace: Optional["FixpointTrace"] = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.fuel < 1:
            raise ValueError("fuel must be at least 1")


@dataclass(frozen=True)
class FixpointStatus:
    """
    How a loop answer was obtained.

    kind is 'stabilized' (exact; n iterations reached the fixpoint),
    'budget_exhausted' (the n-th approximant is reported) or 'lazy'
    (nothing evaluated yet).
    """
    kind: str
    n: int = 0

    @property
    def exact(self) -> bool:
        return self.kind == "stabilized"

    def __str__(self):
        return f"{self.kind}({self.n})"


LAZY = FixpointStatus("lazy", 0)
EXACT = FixpointStatus("stabilized", 0)


def combine_status(statuses) -> FixpointStatus:
    """Worst of several statuses; no loop at all counts as stabilized(0)."""
    statuses = [s for s in statuses if s.kind != "lazy"]
    if not statuses:
        return EXACT
    inexact = [s for s in statuses if not s.exact]
    if inexact:
        return FixpointStatus("budget_exhausted", max(s.n for s in inexact))
    return FixpointStatus("stabilized", max(s.n for s in statuses))


class FixpointTrace:
    """Collects the statuses of the loop answers read during an evaluation."""

    def __init__(self):
        self.statuses: Set[FixpointStatus] = set()

    def record(self, status: FixpointStatus):
        self.statuses.add(status)

    def reset(self):
        self.statuses.clear()

    @property
    def status(self) -> FixpointStatus:
        return combine_status(self.statuses)


# ---------------------------------------------------------------------------
# Enumeration oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExecutionResult:
    """
    Final environments of the terminating runs.

    exhausted is true when some run did not terminate within the fuel
    (including runs caught in a cycle); truncated is true only when the
    fuel bound itself cut a run, in which case `finals` may be incomplete.
    """
    finals: FrozenSet[Env]
    exhausted: bool
    truncated: bool = False


def _successors(state, semantics: Semantics, input_model: Optional[InputModel]):
    env, kont = state
    head, rest = kont[0], kont[1:]
    if isinstance(head, Seq):
        return [(env, (head.first, head.second) + rest)]
    if isinstance(head, Skip):
        return [(env, rest)]
    if isinstance(head, Assign):
        return [(env.set(head.var, semantics.eval_expr(head.expr, env)), rest)]
    if isinstance(head, If):
        result = semantics.eval_test(head.test, env)
        return [(env, ((head.then if v == 1 else head.orelse),) + rest) for v in result]
    if isinstance(head, While):
        result = semantics.eval_test(head.test, env)
        return [(env, (head.body, head) + rest) if v == 1 else (env, rest) for v in result]
    if isinstance(head, Input):
        if input_model is None:
            raise NoInputModel(f"input site ^{head.label} needs an input model")
        return [(successor, rest) for successor in outcome_envs(input_model.capacity(head.label), env)]
    raise TypeError(f"not an instruction: {head!r}")


def enumerate_exec(instr: Instr, env: Env, fuel: int = 10000, semantics: Optional[Semantics] = None,
                   input_model: Optional[InputModel] = None) -> ExecutionResult:
    """
    Run a program operationally, branching on both outcomes of every test
    that evaluates to {0, 1} (and on every outcome of an input site when a
    model is given).

    Parameters
    ----------
    instr : Instr
        Program to run.
    env : Env
        Initial environment.
    fuel : int
        Longest run explored, in executed instruction nodes.
    semantics : Semantics, optional
        Defaults to the real semantics.
    input_model : InputModel, optional
        Needed only for programs containing input.

    Returns
    -------
    ExecutionResult
    """
    semantics = semantics or Semantics()
    finals: Set[Env] = set()
    exhausted = truncated = False
    visited = set()
    on_path = set()
    stack: List[Tuple[bool, tuple, int]] = [(True, (env, (instr,)), 0)]

    while stack:
        entering, state, depth = stack.pop()
        if not entering:
            on_path.discard(state)
            continue
        if state in on_path:
            exhausted = True
            continue
        if state in visited:
            continue
        if depth > fuel:
            exhausted = truncated = True
            continue
        visited.add(state)
        current, kont = state
        if not kont:
            finals.add(current)
            continue
        on_path.add(state)
        stack.append((False, state, depth))
        for successor in _successors(state, semantics, input_model):
            stack.append((True, successor, depth + 1))

    return ExecutionResult(frozenset(finals), exhausted, truncated)


# ---------------------------------------------------------------------------
# wp
# ---------------------------------------------------------------------------

def wp(instr: Instr, kappa: Continuation, cfg: WpConfig) -> Continuation:
    """
    Weakest precondition of an instruction for a continuation.

    Parameters
    ----------
    instr : Instr
        The instruction.
    kappa : Continuation
        What happens after it; must answer in cfg.domain.
    cfg : WpConfig
        Semantics, answer domain and loop budget.

    Returns
    -------
    Continuation
        Total and pure; evaluated lazily per environment.

    Raises
    ------
    DomainMismatch
        If kappa answers in another domain, or for input with Boolean answers.
    NoInputModel
        If instr contains input and cfg has no input model.
    """
    if not same_domain(kappa.domain, cfg.domain):
        raise DomainMismatch(f"continuation answers in {kappa.domain.name}, engine uses {cfg.domain.name}")
    semantics = cfg.semantics
    domain = cfg.domain

    if isinstance(instr, Skip):
        return kappa

    if isinstance(instr, Assign):
        def assign(env, _instr=instr):
            return kappa(env.set(_instr.var, semantics.eval_expr(_instr.expr, env)))
        return FunctionCont(domain, assign, f"wp(^{instr.label} {instr.var} = ...)")

    if isinstance(instr, Seq):
        return wp(instr.first, wp(instr.second, kappa, cfg), cfg)

    if isinstance(instr, If):
        then = wp(instr.then, kappa, cfg)
        orelse = wp(instr.orelse, kappa, cfg)

        def branch(env, _test=instr.test):
            return domain.join_all(then(env) if v == 1 else orelse(env)
                                   for v in semantics.eval_test(_test, env))
        return FunctionCont(domain, branch, f"wp(^{instr.label} if)")

    if isinstance(instr, While):
        return wp_fixpoint(instr, kappa, cfg)[0]

    if isinstance(instr, Input):
        if cfg.input_model is None:
            raise NoInputModel(f"input site ^{instr.label} needs an input model")
        if not same_domain(domain, EXT):
            raise DomainMismatch("input sites need extended non-negative answers")
        model = cfg.input_model
        model.capacity(instr.label)

        def choose(env, _instr=instr):
            return wp_input(kappa, model, _instr.label, env, _instr.targets)
        return FunctionCont(domain, choose, f"wp(^{instr.label} input)")

    raise TypeError(f"not an instruction: {instr!r}")


class LoopFunctional:
    """
    H_t for a loop test and body.

    H(phi)(kappa)(env) is wp(body)(phi(kappa))(env) where the test holds,
    kappa(env) where it fails, and the supremum of both where it may go
    either way.
    """
    def __init__(self, test, body: Instr, cfg: WpConfig):
        self.test = test
        self.body = body
        self.cfg = cfg
        # universes seed the outermost loop only
        self.body_cfg = replace(cfg, universe=None)

    @classmethod
    def of(cls, loop: While, cfg: WpConfig) -> "LoopFunctional":
        return cls(loop.test, loop.body, cfg)

    def step(self, kappa: Continuation, inner: Continuation) -> Continuation:
        """H applied to a functional whose value at kappa is `inner`."""
        domain = self.cfg.domain
        semantics = self.cfg.semantics
        around = wp(self.body, inner, self.body_cfg)

        def unfold(env):
            result = semantics.eval_test(self.test, env)
            if result.is_singleton:
                return around(env) if 1 in result else kappa(env)
            return domain.join(around(env), kappa(env))
        return FunctionCont(domain, unfold, "H")

    def approximants(self, kappa: Continuation, n: int) -> List[Continuation]:
        """H^k(bottom)(kappa) for k = 0..n, each memoised."""
        chain: List[Continuation] = [zero(self.cfg.domain)]
        for _ in range(n):
            chain.append(MemoCont(self.step(kappa, chain[-1])))
        return chain


class LoopContinuation(Continuation):
    """
    The least fixpoint of a loop at a fixed continuation, solved on demand.

    For each queried environment the loop's env closure (guard-possibly-true
    environments closed under the body's final environments) is computed
    with the enumeration oracle. A finite closure within the limit is
    tabulated and iterated from bottom until two tables agree; otherwise
    the loop is unfolded lazily at most max_iter times.
    """
    def __init__(self, loop: While, kappa: Continuation, cfg: WpConfig):
        self.loop = loop
        self.kappa = kappa
        self.cfg = cfg
        self.domain = cfg.domain
        self.functional = LoopFunctional.of(loop, cfg)
        self.description = f"wp(^{loop.label} while)"
        self.answers: Dict[Env, object] = {}
        self.statuses: Dict[Env, FixpointStatus] = {}
        self._lazy: Dict[Tuple[Env, int], Tuple[object, int]] = {}

    def __call__(self, env: Env):
        if env not in self.answers:
            self.solve([env])
        if self.cfg.trace is not None:
            self.cfg.trace.record(self.statuses[env])
        return self.answers[env]

    def status_at(self, env: Env) -> FixpointStatus:
        if env not in self.statuses:
            self.solve([env])
        return self.statuses[env]

    @property
    def status(self) -> FixpointStatus:
        if not self.statuses:
            return LAZY
        return combine_status(self.statuses.values())

    def closure(self, starts: Sequence[Env], boundary: Optional[Set[Env]] = None) -> Optional[Set[Env]]:
        """
        The env closure of `starts`, or None when it is not finite within the limits.

        Already answered environments end the search; they are added to
        `boundary` when one is given.
        """
        semantics = self.cfg.semantics
        seen: Set[Env] = set()
        frontier = [env for env in starts if env not in self.answers]
        while frontier:
            env = frontier.pop()
            if env in self.answers:
                if boundary is not None:
                    boundary.add(env)
                continue
            if env in seen:
                continue
            seen.add(env)
            if len(seen) > self.cfg.closure_limit:
                return None
            if 1 not in semantics.eval_test(self.loop.test, env):
                continue
            run = enumerate_exec(self.loop.body, env, self.cfg.fuel, semantics, self.cfg.input_model)
            if run.truncated:
                return None
            frontier.extend(run.finals)
        return seen

    def solve(self, starts: Sequence[Env]):
        boundary: Set[Env] = set()
        closure = self.closure(starts, boundary)
        if closure is None:
            for env in starts:
                self._solve_lazily(env)
            return
        if not closure:
            return

        solved = dict(self.answers)
        table = {env: self.domain.bottom for env in closure}
        status = None
        for n in range(self.cfg.max_iter):
            current = TableCont(self.domain, {**solved, **table})
            step = self.functional.step(self.kappa, current)
            following = {env: step(env) for env in closure}
            if all(self.domain.eq(following[env], table[env]) for env in closure):
                status = FixpointStatus("stabilized", n)
                break
            table = following
        if status is None:
            status = FixpointStatus("budget_exhausted", self.cfg.max_iter)
            logger.warning("loop ^%s did not stabilise within %d iterations over %d environments",
                           self.loop.label, self.cfg.max_iter, len(closure))
        # a table read from approximated answers is itself approximate
        inherited = [self.statuses[env] for env in boundary if not self.statuses[env].exact]
        if inherited:
            status = combine_status([status] + inherited)
        logger.debug("loop ^%s: closure of %d environments, %s", self.loop.label, len(closure), status)
        for env in closure:
            self.answers[env] = table[env]
            self.statuses[env] = status

    def _solve_lazily(self, env: Env):
        budget = self.cfg.max_iter
        value, lowest = self._unfold(env, budget)
        if lowest == 0:
            status = FixpointStatus("budget_exhausted", budget)
            logger.warning("loop ^%s at %s: reporting the %d-th approximant", self.loop.label, env, budget)
        else:
            status = FixpointStatus("stabilized", budget - lowest)
        logger.debug("loop ^%s at %s unfolded lazily: %s", self.loop.label, env, status)
        self.answers[env] = value
        self.statuses[env] = status

    def _unfold(self, env: Env, n: int) -> Tuple[object, int]:
        """
        H^n(bottom)(kappa)(env) and the lowest level its computation read.
        Level 0 is the bottom functional; a result that never reads it is
        already the fixpoint value.
        """
        if n == 0:
            return self.domain.bottom, 0
        key = (env, n)
        if key not in self._lazy:
            lowest = [n]

            def previous(e):
                value, reached = self._unfold(e, n - 1)
                lowest[0] = min(lowest[0], reached)
                return value

            inner = FunctionCont(self.domain, previous, "H^n")
            value = self.functional.step(self.kappa, inner)(env)
            self._lazy[key] = (value, lowest[0])
        return self._lazy[key]


def wp_fixpoint(loop: While, kappa: Continuation, cfg: WpConfig) -> Tuple[LoopContinuation, FixpointStatus]:
    """
    The continuation of a while-loop and its stabilisation status.

    With a universe in cfg the loop is solved eagerly for every universe
    environment binding the loop's variables, and the returned status covers
    them; otherwise answers are
    computed per queried environment (see LoopContinuation.status_at) and
    the returned status is 'lazy'.

    Raises
    ------
    DomainMismatch
        If kappa answers in another domain than cfg.
    """
    if not same_domain(kappa.domain, cfg.domain):
        raise DomainMismatch(f"continuation answers in {kappa.domain.name}, engine uses {cfg.domain.name}")
    result = LoopContinuation(loop, kappa, cfg)
    if cfg.universe:
        # a loop after assignments may read variables the universe leaves unbound
        needed = free_vars(loop)
        starts = [env for env in cfg.universe if needed <= set(env.names())]
        if starts:
            result.solve(starts)
    return result, result.status


def kleene_chain(loop: While, kappa: Continuation, cfg: WpConfig, env: Env, n: int) -> List:
    """Values H^k(bottom)(kappa)(env) for k = 0..n."""
    chain = LoopFunctional.of(loop, cfg).approximants(kappa, n)
    values = [approximant(env) for approximant in chain]
    logger.debug("Kleene chain of %s at %s: %s", pretty_print(loop.test), env, values)
    return values


def wp_table(program, kappa: Continuation, cfg: WpConfig, envs: Sequence[Env]) -> List[Tuple[Env, object, FixpointStatus]]:
    """Answer and loop status of wp(program, kappa) at each environment."""
    trace = cfg.trace if cfg.trace is not None else FixpointTrace()
    cfg = replace(cfg, trace=trace)
    result = wp(program.root, kappa, cfg)
    rows = []
    for env in envs:
        trace.reset()
        value = result(env)
        rows.append((env, value, trace.status))
    return rows
