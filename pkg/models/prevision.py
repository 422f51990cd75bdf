# models/prevision.py
"""
Parametric Previsions and Law Checking

A parametric prevision maps non-negative continuations to non-negative
continuations. This module implements:
1. ParametricPrevision with builders for the identity, wp of a program and
   the Choquet semantics of an input site
2. compose, sup2 and fix_at (the per-environment classical view)
3. SamplePlan: seeded random continuations, scalars, environments and chains
4. check_laws: homogeneity, monotonicity, upper, lower, linear and chain
   continuity, verified with exact arithmetic on the samples
5. LawReport: verdicts, replayable counterexamples and tabular exports
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.answers import (
    EXT, INFINITY, Continuation, ExprCont, FunctionCont, JoinCont, MinCont, add, same_domain, scale,
)
from models.errors import DomainMismatch
from models.numerics import ERR, VALUE_GRID, FloatValue, format_decimal, inj
from models.semantics import Env, Semantics
from models.syntax import Add, Input, Mul, RationalLiteral, Var
from models.wp import WpConfig, wp

logger = logging.getLogger(__name__)

LAWS = ("homogeneous", "monotone", "upper", "lower", "linear", "continuous")
GUARANTEED = ("homogeneous", "monotone", "upper")
MAX_RECORDED = 5
TRUNCATION_BASE = 8

EVIDENCE_NOTE = (
    "laws are checked on samples with exact arithmetic: a violation is a genuine "
    "counterexample, except that a chain supremum is read off the settled prefix "
    "of the chain; passing is evidence and not proof; measurability of the "
    "per-state view is not checked"
)


@dataclass
class ParametricPrevision:
    """
    A transformer of non-negative continuations.

    Attributes
    ----------
    transform : callable
        Continuation -> Continuation.
    provenance : str
        'identity', 'wp-of-program', 'composed', 'sup-of', 'choquet-input' or 'user'.
    description : str
        Free text for reports.
    """
    transform: Callable[[Continuation], Continuation]
    provenance: str = "user"
    description: str = ""
    domain: object = EXT

    def __call__(self, kappa: Continuation) -> Continuation:
        return self.transform(kappa)


def identity_prevision() -> ParametricPrevision:
    return ParametricPrevision(lambda kappa: kappa, "identity", "identity")


def wp_prevision(instr, cfg: WpConfig, description: str = "") -> ParametricPrevision:
    if not same_domain(cfg.domain, EXT):
        raise DomainMismatch("previsions act on extended non-negative continuations")
    return ParametricPrevision(lambda kappa: wp(instr, kappa, cfg), "wp-of-program", description)


def input_prevision(model, label: int, targets: Tuple[str, ...], cfg: WpConfig) -> ParametricPrevision:
    """The prevision of a lone input site: kappa -> Choquet integral of kappa over the site's outcomes."""
    site = Input(label, tuple(targets))
    cfg = replace(cfg, input_model=model, domain=EXT)
    return ParametricPrevision(lambda kappa: wp(site, kappa, cfg), "choquet-input", f"input ^{label}")


def compose(first: ParametricPrevision, second: ParametricPrevision) -> ParametricPrevision:
    """(first o second)(kappa) = first(second(kappa))."""
    if not same_domain(first.domain, second.domain):
        raise DomainMismatch("cannot compose previsions over different answer domains")
    return ParametricPrevision(lambda kappa: first(second(kappa)), "composed",
                               f"({first.description}) o ({second.description})", first.domain)


def sup2(first: ParametricPrevision, second: ParametricPrevision) -> ParametricPrevision:
    if not same_domain(first.domain, second.domain):
        raise DomainMismatch("cannot join previsions over different answer domains")
    return ParametricPrevision(lambda kappa: JoinCont(first(kappa), second(kappa)), "sup-of",
                               f"sup({first.description}, {second.description})", first.domain)


class ClassicalPrevision:
    """The view kappa -> F(kappa)(env) of a parametric prevision at one environment."""

    def __init__(self, parametric: ParametricPrevision, env: Env):
        self.parametric = parametric
        self.env = env

    def __call__(self, kappa: Continuation):
        return self.parametric(kappa)(self.env)

    def check(self, plan: "SamplePlan") -> "LawReport":
        return check_laws(self.parametric, plan.at(self.env))


def fix_at(prevision: ParametricPrevision, env: Env) -> ClassicalPrevision:
    return ClassicalPrevision(prevision, env)


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------

@dataclass
class Chain:
    """
    A finite prefix of an ascending chain of continuations and the supremum
    of the whole chain.

    `levels` are the parameters of the members: scaling factors for a
    scaling chain, truncation heights for a truncation chain. The limit is
    never one of the members.
    """
    kind: str
    members: List[Continuation]
    limit: Continuation
    levels: List[Fraction] = field(default_factory=list)

    def supremum(self, values: Sequence):
        """
        The supremum of the infinite chain implied by the values of its prefix.

        A scaling chain whose values follow (1 - 2^-n) * c has supremum c; a
        truncation chain whose last three values agree has settled. Returns
        None when the values show neither pattern.
        """
        if self.kind == "scaling":
            factor = self.levels[-1]
            if factor == 0:
                return None
            c = values[-1] if values[-1] == INFINITY else values[-1] / factor
            if all(v == EXT.mul(level, c) for level, v in zip(self.levels, values)):
                return c
            return None
        if len(values) >= 3 and values[-1] == values[-2] == values[-3]:
            return values[-1]
        return None


def scaling_chain(kappa: Continuation, length: int) -> Chain:
    """(1 - 2^-n) * kappa for n = 0..length, approaching kappa."""
    levels = [1 - Fraction(1, 2 ** n) for n in range(length + 1)]
    return Chain("scaling", [scale(level, kappa) for level in levels], kappa, levels)


def truncation_chain(kappa: Continuation, length: int) -> Chain:
    """min(kappa, h) for h = 0, 1, 8, 64, ... (length + 1 members), approaching kappa."""
    levels = [Fraction(0)] + [Fraction(TRUNCATION_BASE) ** k for k in range(length)]
    return Chain("truncation", [MinCont(kappa, level) for level in levels], kappa, levels)


def _lookup_cont(rng: np.random.Generator, var: str) -> Continuation:
    """A random table from the grid values of one variable; err and other values map to a random default."""
    table = {value: _draw_answer(rng) for value in VALUE_GRID}
    default = _draw_answer(rng)

    def lookup(env, _table=table, _default=default):
        value = env.get(var) if var in env else ERR
        if isinstance(value, FloatValue):
            value = inj(value)
        return _default if value is ERR else _table.get(value, _default)

    return FunctionCont(EXT, lookup, f"table on {var}")


def _draw_answer(rng: np.random.Generator):
    if rng.random() < 0.05:
        return INFINITY
    return Fraction(int(rng.integers(0, 9)), 2)


def _affine_expr(rng: np.random.Generator, variables: Sequence[str]):
    expr = RationalLiteral(Fraction(int(rng.integers(0, 5)), 2))
    for _ in range(int(rng.integers(1, 3))):
        var = Var(str(rng.choice(list(variables))))
        coefficient = RationalLiteral(Fraction(int(rng.integers(-2, 5)), 2))
        expr = Add(expr, Mul(coefficient, var))
    return expr


@dataclass
class SamplePlan:
    """
    Samples for law checking.

    Attributes
    ----------
    envs : list of Env
    kappas : list of Continuation
    pairs : list of (int, int)
        Indices into kappas for the binary laws.
    scalars : list of Fraction
        Non-negative factors; generated plans always include 0.
    chains : list of Chain
    """
    envs: List[Env]
    kappas: List[Continuation]
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    scalars: List[Fraction] = field(default_factory=lambda: [Fraction(0), Fraction(1, 2), Fraction(2)])
    chains: List[Chain] = field(default_factory=list)

    def at(self, env: Env) -> "SamplePlan":
        return replace(self, envs=[env])

    @classmethod
    def generate(cls, rng: np.random.Generator, semantics: Semantics, variables: Sequence[str],
                 n_envs: int = 12, n_kappas: int = 10, n_pairs: int = 20, n_scalars: int = 5,
                 chain_length: int = 4, err_rate: float = 0.1) -> "SamplePlan":
        """
        Draw a plan from a seeded generator.

        Environments take grid values (err with probability err_rate),
        converted to the semantics' value set; continuations alternate
        between random one-variable tables and affine expressions.
        """
        variables = list(variables) or ["x"]
        envs = []
        for _ in range(n_envs):
            mapping = {}
            for var in variables:
                if rng.random() < err_rate:
                    mapping[var] = ERR
                else:
                    mapping[var] = semantics.coerce(VALUE_GRID[int(rng.integers(len(VALUE_GRID)))])
            envs.append(semantics.env(mapping))

        kappas: List[Continuation] = []
        for k in range(n_kappas):
            if k % 2 == 0:
                kappas.append(_lookup_cont(rng, str(rng.choice(variables))))
            else:
                kappas.append(ExprCont(_affine_expr(rng, variables), semantics))

        pairs = [(int(rng.integers(n_kappas)), int(rng.integers(n_kappas))) for _ in range(n_pairs)]
        scalars = [Fraction(0)] + [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
                                   for _ in range(max(n_scalars - 1, 0))]
        chains = []
        for k in range(min(2, n_kappas)):
            chains.append(scaling_chain(kappas[k], chain_length))
            chains.append(truncation_chain(kappas[k], chain_length))
        return cls(envs=envs, kappas=kappas, pairs=pairs, scalars=scalars, chains=chains)


# ---------------------------------------------------------------------------
# Law checking
# ---------------------------------------------------------------------------

@dataclass
class Violation:
    """One falsified instance of a law."""
    law: str
    env: Env
    kappas: Tuple[Continuation, ...]
    lhs: object
    rhs: object
    alpha: Optional[Fraction] = None
    chain: Optional[Chain] = None

    def describe(self) -> str:
        parts = [f"at {self.env}", "kappas " + "; ".join(k.description for k in self.kappas)]
        if self.alpha is not None:
            parts.append(f"alpha {format_decimal(self.alpha)}")
        parts.append(f"lhs {EXT.format(self.lhs)} rhs {EXT.format(self.rhs)}")
        return ", ".join(parts)


def _sides(law: str, prevision: ParametricPrevision, kappas, env: Env, alpha=None, chain=None):
    """Evaluate both sides of a law instance; returns (lhs, rhs, holds)."""
    if law == "homogeneous":
        (kappa,) = kappas
        lhs = prevision(scale(alpha, kappa))(env)
        rhs = EXT.mul(alpha, prevision(kappa)(env))
        return lhs, rhs, lhs == rhs
    if law == "monotone":
        low, high = kappas
        lhs, rhs = prevision(low)(env), prevision(high)(env)
        return lhs, rhs, lhs <= rhs
    if law in ("upper", "lower", "linear"):
        first, second = kappas
        lhs = prevision(add(first, second))(env)
        rhs = EXT.add(prevision(first)(env), prevision(second)(env))
        holds = {"upper": lhs <= rhs, "lower": lhs >= rhs, "linear": lhs == rhs}[law]
        return lhs, rhs, holds
    if law == "continuous":
        values = [prevision(member)(env) for member in chain.members]
        rhs = prevision(chain.limit)(env)
        supremum = chain.supremum(values)
        lhs = max(values) if supremum is None else supremum
        holds = all(a <= b for a, b in zip(values, values[1:])) and max(values) <= rhs
        if supremum is not None:
            holds = holds and supremum == rhs
        return lhs, rhs, holds
    raise ValueError(f"unknown law {law!r}")


@dataclass
class LawReport:
    """
    Verdicts of check_laws.

    counts[law] is the number of checked instances and violations[law]
    holds up to MAX_RECORDED counterexamples; falsified[law] counts all.
    """
    provenance: str
    description: str
    counts: Dict[str, int] = field(default_factory=lambda: {law: 0 for law in LAWS})
    falsified: Dict[str, int] = field(default_factory=lambda: {law: 0 for law in LAWS})
    violations: Dict[str, List[Violation]] = field(default_factory=lambda: {law: [] for law in LAWS})
    note: str = EVIDENCE_NOTE

    def record(self, law: str, holds: bool, violation: Callable[[], Violation]):
        self.counts[law] += 1
        if not holds:
            self.falsified[law] += 1
            if len(self.violations[law]) < MAX_RECORDED:
                self.violations[law].append(violation())

    def verdict(self, law: str) -> bool:
        return self.falsified[law] == 0

    @property
    def guaranteed_laws_hold(self) -> bool:
        """Homogeneity, monotonicity and the upper law: the properties every wp prevision has."""
        return all(self.verdict(law) for law in GUARANTEED)

    def counterexample(self, law: str) -> Optional[Violation]:
        return self.violations[law][0] if self.violations[law] else None

    def replay(self, prevision: ParametricPrevision) -> bool:
        """True when every recorded counterexample is still a violation."""
        for law, found in self.violations.items():
            for v in found:
                _, _, holds = _sides(law, prevision, v.kappas, v.env, v.alpha, v.chain)
                if holds:
                    return False
        return True

    def merge(self, other: "LawReport") -> "LawReport":
        for law in LAWS:
            self.counts[law] += other.counts[law]
            self.falsified[law] += other.falsified[law]
            room = MAX_RECORDED - len(self.violations[law])
            self.violations[law].extend(other.violations[law][:max(room, 0)])
        return self

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for law in LAWS:
            example = self.counterexample(law)
            rows.append({
                "law": law,
                "samples": self.counts[law],
                "violations": self.falsified[law],
                "verdict": "holds" if self.verdict(law) else "falsified",
                "counterexample": example.describe() if example else "",
            })
        return pd.DataFrame(rows)

    def to_key_values(self) -> List[Tuple[str, str]]:
        pairs = [("prevision", self.provenance)]
        if self.description:
            pairs.append(("description", self.description))
        for law in LAWS:
            pairs.append((f"{law}.samples", str(self.counts[law])))
            pairs.append((f"{law}.verdict", "holds" if self.verdict(law) else "falsified"))
            example = self.counterexample(law)
            if example is not None:
                pairs.append((f"{law}.counterexample", example.describe()))
        pairs.append(("note", self.note))
        return pairs


def check_laws(prevision: ParametricPrevision, plan: SamplePlan) -> LawReport:
    """
    Check the prevision laws on a sample plan.

    Homogeneity F(a k) = a F(k) for every (k, a, env); monotonicity
    F(k1) <= F(k1 + k2) and F(k1) <= F(sup(k1, k2)); upper, lower and
    linear laws on F(k1 + k2) against F(k1) + F(k2); continuity on the
    plan's chains.

    Returns
    -------
    LawReport
        Verdicts; no exception is raised for a falsified law.
    """
    report = LawReport(prevision.provenance, prevision.description)
    # images of the plan's own continuations; temporaries are transformed on use
    images: Dict[Continuation, Continuation] = {}
    owned = list(plan.kappas) + [kappa for chain in plan.chains for kappa in chain.members + [chain.limit]]
    for kappa in owned:
        if kappa not in images:
            images[kappa] = prevision(kappa)

    def applied(kappa):
        image = images.get(kappa)
        return prevision(kappa) if image is None else image

    cached = ParametricPrevision(applied, prevision.provenance, prevision.description, prevision.domain)

    for env in plan.envs:
        for kappa in plan.kappas:
            for alpha in plan.scalars:
                lhs, rhs, holds = _sides("homogeneous", cached, (kappa,), env, alpha)
                report.record("homogeneous", holds,
                              lambda: Violation("homogeneous", env, (kappa,), lhs, rhs, alpha=alpha))

        for i, j in plan.pairs:
            first, second = plan.kappas[i], plan.kappas[j]
            for high in (add(first, second), JoinCont(first, second)):
                lhs, rhs, holds = _sides("monotone", cached, (first, high), env)
                report.record("monotone", holds, lambda: Violation("monotone", env, (first, high), lhs, rhs))
            for law in ("upper", "lower", "linear"):
                lhs, rhs, holds = _sides(law, cached, (first, second), env)
                report.record(law, holds, lambda: Violation(law, env, (first, second), lhs, rhs))

        for chain in plan.chains:
            lhs, rhs, holds = _sides("continuous", cached, (), env, chain=chain)
            report.record("continuous", holds,
                          lambda: Violation("continuous", env, tuple(chain.members), lhs, rhs, chain=chain))

    logger.debug("checked %s: %s", prevision.provenance,
                 {law: (report.counts[law], report.falsified[law]) for law in LAWS})
    return report
