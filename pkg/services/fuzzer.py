# services/fuzzer.py
"""
Program Generation Service

This module generates random programs, expressions, tests and environments
from a seeded numpy Generator, for the oracle and law-checking sweeps:
1. Up to four data variables, values from a nine-point rational grid
2. Loops bounded by construction: a counter the body never assigns
3. An err-free mode (no division, no err in environments) for the
   deterministic-collapse checks
4. Optional input sites, for syntax sweeps (wp needs an input model for them)
"""

from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from models.numerics import ERR, VALUE_GRID
from models.semantics import Env, Semantics
from models.syntax import (
    Add, Assign, Div, Eq, If, Input, Le, Lt, Mul, Ne, Neg, Not, Program, RationalLiteral, Skip, Sub,
    Var, While, sequence,
)
from services.parse_program import make_program

DATA_VARIABLES = ("x", "y", "z", "w")
COUNTERS = ("i", "j", "k")


class ProgramFuzzer:
    """
    Random program generator.

    Parameters
    ----------
    rng : np.random.Generator
        Source of randomness; the same seed gives the same programs.
    n_vars : int, optional
        Number of data variables (1 to 4), by default 3.
    max_depth : int, optional
        Nesting bound for expressions and instructions, by default 3.
    err_free : bool, optional
        Avoid division, so no run ever produces err from a clean env.
    loops : bool, optional
        Allow bounded while-loops, by default True.
    inputs : bool, optional
        Allow `(..) = input()` sites, by default False.
    """
    def __init__(self, rng: np.random.Generator, n_vars: int = 3, max_depth: int = 3,
                 err_free: bool = False, loops: bool = True, inputs: bool = False):
        if not 1 <= n_vars <= len(DATA_VARIABLES):
            raise ValueError(f"n_vars must be between 1 and {len(DATA_VARIABLES)}")
        self.rng = rng
        self.variables = DATA_VARIABLES[:n_vars]
        self.max_depth = max_depth
        self.err_free = err_free
        self.loops = loops
        self.inputs = inputs

    def _pick(self, options: Sequence):
        return options[int(self.rng.integers(len(options)))]

    def literal(self):
        return RationalLiteral(self._pick(VALUE_GRID))

    def expr(self, depth: Optional[int] = None):
        depth = self.max_depth if depth is None else depth
        roll = self.rng.random()
        if depth <= 0 or roll < 0.3:
            return Var(self._pick(self.variables)) if self.rng.random() < 0.6 else self.literal()
        if roll < 0.4:
            return Neg(self.expr(depth - 1))
        operators = (Add, Sub, Mul) if self.err_free else (Add, Sub, Mul, Div)
        return self._pick(operators)(self.expr(depth - 1), self.expr(depth - 1))

    def test(self, depth: int = 1):
        if depth > 0 and self.rng.random() < 0.15:
            return Not(self.test(depth - 1))
        comparison = self._pick((Le, Lt, Eq, Ne))
        return comparison(self.expr(1), self.expr(1))

    def instr(self, depth: Optional[int] = None, level: int = 0):
        depth = self.max_depth if depth is None else depth
        roll = self.rng.random()
        if depth <= 0 or roll < 0.45:
            return Assign(None, self._pick(self.variables), self.expr(2))
        if roll < 0.5:
            if self.inputs and self.rng.random() < 0.5:
                return self.input_site()
            return Skip()
        if roll < 0.75:
            return If(None, self.test(), self.block(depth - 1, level), self.block(depth - 1, level))
        if self.loops and level < len(COUNTERS):
            return self.bounded_loop(depth - 1, level)
        return self.block(depth - 1, level)

    def input_site(self) -> Input:
        count = 1 + int(self.rng.integers(min(2, len(self.variables))))
        targets = self.rng.choice(len(self.variables), size=count, replace=False)
        return Input(None, tuple(self.variables[int(t)] for t in sorted(targets)))

    def block(self, depth: int, level: int):
        count = 1 + int(self.rng.integers(3))
        return sequence(*(self.instr(depth, level) for _ in range(count)))

    def bounded_loop(self, depth: int, level: int):
        """`c = 0; while c < k { body; c = c + 1 }` with a counter the body never assigns."""
        counter = COUNTERS[level]
        bound = RationalLiteral(Fraction(1 + int(self.rng.integers(3))))
        body = sequence(self.block(depth, level + 1),
                        Assign(None, counter, Add(Var(counter), RationalLiteral(Fraction(1)))))
        return sequence(Assign(None, counter, RationalLiteral(Fraction(0))),
                        While(None, Lt(Var(counter), bound), body))

    def program(self, length: Optional[int] = None) -> Program:
        length = length or 1 + int(self.rng.integers(4))
        root = sequence(*(self.instr() for _ in range(length)))
        return make_program(root)

    def env(self, semantics: Semantics, variables: Optional[Sequence[str]] = None,
            err_rate: float = 0.1) -> Env:
        """A random environment over `variables` (the data variables and counters by default)."""
        variables = variables or (self.variables + COUNTERS)
        mapping = {}
        for var in variables:
            if not self.err_free and self.rng.random() < err_rate:
                mapping[var] = ERR
            else:
                mapping[var] = semantics.coerce(self._pick(VALUE_GRID))
        return semantics.env(mapping)

    def envs(self, semantics: Semantics, n: int, variables: Optional[Sequence[str]] = None) -> List[Env]:
        return [self.env(semantics, variables) for _ in range(n)]


def generate_programs(seed: int, n: int, **options) -> List[Program]:
    """n programs from a fresh Generator seeded with `seed`."""
    fuzzer = ProgramFuzzer(np.random.default_rng(seed), **options)
    return [fuzzer.program() for _ in range(n)]
