# models/capacity.py
"""
Capacities and Choquet Integration

This module implements finite capacities (non-additive measures) and the
semantics of the `input` instruction built on them:
1. OutcomeSpace: the finite set of values an input site may produce
2. Capacity: a set function stored as a table over all subsets (bitmask index),
   built from explicit values, probabilities, belief masses or plausibilities
3. capacity_classify: monotone / convex / concave / normalized flags
4. choquet: the level-set closed form of the Choquet integral
5. extend_capacity and wp_input: lifting a capacity over outcomes to sets of
   environments, and the weakest precondition of an input site

Subset i of an n-outcome space is the bitmask whose bit k is set when
outcome k belongs to the subset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from models.answers import EXT, INFINITY
from models.errors import NoModelForSite, NonMonotoneCapacity, SpaceTooLarge

logger = logging.getLogger(__name__)

MAX_OUTCOMES = 20
MAX_PAIRWISE_OUTCOMES = 12


@dataclass(frozen=True)
class OutcomeSpace:
    """
    Finite outcomes of an input site.

    Attributes
    ----------
    vars : tuple of str
        The input variables, in order.
    outcomes : tuple of tuples
        One value per input variable for each outcome; values are already in
        the active semantics' value set.
    """
    vars: Tuple[str, ...]
    outcomes: Tuple[Tuple[object, ...], ...]

    def __post_init__(self):
        if not self.vars:
            raise ValueError("an outcome space needs at least one variable")
        if not self.outcomes:
            raise ValueError("an outcome space needs at least one outcome")
        for outcome in self.outcomes:
            if len(outcome) != len(self.vars):
                raise ValueError(f"outcome {outcome} does not assign exactly {self.vars}")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("outcomes must be pairwise distinct")
        if len(self.outcomes) > MAX_OUTCOMES:
            raise SpaceTooLarge(f"{len(self.outcomes)} outcomes; at most {MAX_OUTCOMES} are tabulated")

    @property
    def size(self) -> int:
        return len(self.outcomes)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def assignment(self, index: int) -> Dict[str, object]:
        return dict(zip(self.vars, self.outcomes[index]))

    def name(self, index: int) -> str:
        return f"o{index + 1}"

    def index_of(self, name: str) -> int:
        """Outcome index of a 1-based name such as 'o2' or '2'."""
        text = name.strip()
        if text.startswith("o"):
            text = text[1:]
        index = int(text) - 1
        if not 0 <= index < self.size:
            raise ValueError(f"no outcome {name!r} among {self.size}")
        return index


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def members(mask: int) -> Tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def zeta_transform(values: np.ndarray, n: int, sign: int = 1) -> np.ndarray:
    """
    Subset-sum (zeta) transform over bitmask-indexed values; sign=-1 gives
    the inverse (Moebius) transform.
    """
    result = values.copy()
    masks = np.arange(1 << n)
    for k in range(n):
        bit = 1 << k
        upper = masks[(masks & bit) != 0]
        if sign > 0:
            result[upper] = result[upper] + result[upper ^ bit]
        else:
            result[upper] = result[upper] - result[upper ^ bit]
    return result


@dataclass(frozen=True)
class CapacityFlags:
    monotone: bool
    convex: bool
    concave: bool
    normalized: bool
    continuous: bool = True

    def names(self) -> Tuple[str, ...]:
        return tuple(name for name in ("monotone", "convex", "concave", "normalized", "continuous")
                     if getattr(self, name))

    def __str__(self):
        return ",".join(self.names()) or "none"


class Capacity:
    """
    A set function on the subsets of an OutcomeSpace with value 0 on the
    empty set and non-negative values elsewhere.

    Parameters
    ----------
    space : OutcomeSpace
        The outcomes.
    table : sequence
        2**n non-negative rationals indexed by subset bitmask.
    kind : str, optional
        Provenance: 'table', 'probability', 'belief' or 'plausibility'.
    """
    def __init__(self, space: OutcomeSpace, table: Sequence, kind: str = "table"):
        size = 1 << space.size
        if len(table) != size:
            raise ValueError(f"a capacity over {space.size} outcomes needs {size} values, got {len(table)}")
        values = np.empty(size, dtype=object)
        for mask, value in enumerate(table):
            value = Fraction(value)
            if value < 0:
                raise ValueError(f"capacity of subset {set(members(mask))} is negative")
            values[mask] = value
        if values[0] != 0:
            raise ValueError("the capacity of the empty set must be 0")
        self.space = space
        self.table = values
        self.kind = kind

    @classmethod
    def from_table(cls, space: OutcomeSpace, values: Union[Sequence, Mapping]) -> "Capacity":
        """From a full list, or a mapping subset (iterable of indices) -> value; missing subsets are 0."""
        if isinstance(values, Mapping):
            table = [Fraction(0)] * (1 << space.size)
            for subset, value in values.items():
                table[mask_of(subset)] = Fraction(value)
            return cls(space, table)
        return cls(space, list(values))

    @classmethod
    def from_probability(cls, space: OutcomeSpace, weights: Sequence) -> "Capacity":
        if len(weights) != space.size:
            raise ValueError(f"expected {space.size} probabilities, got {len(weights)}")
        singletons = np.zeros(1 << space.size, dtype=object)
        singletons[:] = Fraction(0)
        for i, weight in enumerate(weights):
            singletons[1 << i] = Fraction(weight)
        return cls(space, list(zeta_transform(singletons, space.size)), kind="probability")

    @classmethod
    def from_masses(cls, space: OutcomeSpace, masses: Mapping) -> "Capacity":
        """
        Belief function of non-negative Moebius masses given as
        {subset of outcome indices: mass}. Mass on the empty set is not allowed.
        """
        dense = np.empty(1 << space.size, dtype=object)
        dense[:] = Fraction(0)
        for subset, mass in masses.items():
            mask = mask_of(subset)
            mass = Fraction(mass)
            if mask == 0:
                raise ValueError("the empty set cannot carry mass")
            if mass < 0:
                raise ValueError(f"mass of {set(subset)} is negative")
            dense[mask] += mass
        return cls(space, list(zeta_transform(dense, space.size)), kind="belief")

    @classmethod
    def plausibility_of(cls, space: OutcomeSpace, masses: Mapping) -> "Capacity":
        return cls.from_masses(space, masses).dual()

    def __call__(self, subset: Union[int, Iterable[int]]):
        mask = subset if isinstance(subset, (int, np.integer)) else mask_of(subset)
        return self.table[mask]

    def __eq__(self, other):
        return (isinstance(other, Capacity) and self.space == other.space
                and bool(np.all(self.table == other.table)))

    def __hash__(self):
        return hash((self.space, tuple(self.table)))

    def __repr__(self):
        return f"<Capacity {self.kind} over {self.space.size} outcomes>"

    @property
    def total(self) -> Fraction:
        return self.table[self.space.full]

    def mobius(self) -> np.ndarray:
        """Moebius masses m with value(A) = sum of m(B) over B subset of A."""
        return zeta_transform(self.table, self.space.size, sign=-1)

    def dual(self) -> "Capacity":
        """Conjugate capacity: A -> value(Omega) - value(Omega minus A)."""
        full = self.space.full
        masks = np.arange(1 << self.space.size)
        table = self.total - self.table[full ^ masks]
        kind = {"belief": "plausibility", "plausibility": "belief"}.get(self.kind, "dual")
        return Capacity(self.space, list(table), kind=kind)

    @cached_property
    def flags(self) -> CapacityFlags:
        return capacity_classify(self)

    def to_frame(self):
        rows = []
        for mask in range(1 << self.space.size):
            rows.append({
                "subset": "{" + ",".join(str(i + 1) for i in members(mask)) + "}",
                "value": self.table[mask],
            })
        return pd.DataFrame(rows)


def capacity_classify(nu: Capacity, pairwise: bool = False) -> CapacityFlags:
    """
    Classify a capacity.

    The default check uses the local conditions: monotone iff adding one
    outcome never lowers the value, convex (supermodular) iff
    nu(A+i+j) + nu(A) >= nu(A+i) + nu(A+j) for all A and i, j outside A, and
    dually for concave. These are equivalent to the all-pairs definitions.

    Parameters
    ----------
    nu : Capacity
        Capacity to classify.
    pairwise : bool, optional
        Check the literal all-pairs definitions instead.

    Raises
    ------
    SpaceTooLarge
        If `pairwise` is requested for more than 12 outcomes.
    """
    n = nu.space.size
    table = nu.table
    masks = np.arange(1 << n)

    if pairwise:
        if n > MAX_PAIRWISE_OUTCOMES:
            raise SpaceTooLarge(f"all-pairs classification is limited to {MAX_PAIRWISE_OUTCOMES} outcomes")
        monotone = convex = concave = True
        for a in range(1 << n):
            supersets = masks[(masks & a) == a]
            monotone = monotone and bool(np.all(table[supersets] >= table[a]))
            lhs = table[a | masks] + table[a & masks]
            rhs = table[a] + table
            convex = convex and bool(np.all(lhs >= rhs))
            concave = concave and bool(np.all(lhs <= rhs))
    else:
        monotone = convex = concave = True
        for i in range(n):
            bit = 1 << i
            without = masks[(masks & bit) == 0]
            monotone = monotone and bool(np.all(table[without | bit] >= table[without]))
        for i, j in combinations(range(n), 2):
            both = (1 << i) | (1 << j)
            base = masks[(masks & both) == 0]
            lhs = table[base | both] + table[base]
            rhs = table[base | 1 << i] + table[base | 1 << j]
            convex = convex and bool(np.all(lhs >= rhs))
            concave = concave and bool(np.all(lhs <= rhs))

    flags = CapacityFlags(monotone=monotone, convex=convex, concave=concave,
                          normalized=nu.total == 1)
    logger.debug("classified %r: %s", nu, flags)
    return flags


def choquet(f: Union[Sequence, Mapping[int, object]], nu: Capacity):
    """
    Choquet integral of a non-negative function over outcomes.

    With the distinct values a_1 > ... > a_m of f and a_{m+1} = 0, returns
    the sum of (a_i - a_{i+1}) * nu({w : f(w) >= a_i}). Values may be +inf,
    under the convention 0 * inf = 0.

    Parameters
    ----------
    f : sequence or mapping
        One value per outcome index.
    nu : Capacity
        A monotone capacity.

    Returns
    -------
    Fraction or inf

    Raises
    ------
    NonMonotoneCapacity
        If nu is not monotone.
    """
    if not nu.flags.monotone:
        raise NonMonotoneCapacity(f"{nu!r} is not monotone")
    values = [f[i] for i in range(nu.space.size)]
    for value in values:
        if value < 0:
            raise ValueError(f"Choquet integrand must be non-negative, got {value}")
    levels = sorted(set(values), reverse=True)
    levels.append(Fraction(0))
    total = Fraction(0)
    for level, below in zip(levels, levels[1:]):
        if level <= below:
            continue
        upper_set = mask_of(i for i, value in enumerate(values) if value >= level)
        total = EXT.add(total, EXT.mul(EXT.minus(level, below), nu(upper_set)))
    return total


def extend_capacity(nu: Capacity, env) -> Callable:
    """
    Lift nu from outcomes to sets of environments around `env`.

    The returned set function maps C (a predicate on environments, or a
    collection of environments) to nu of the outcomes x whose environment
    env[V_I -> x] belongs to C. Variables outside V_I keep their value in env.
    """
    space = nu.space
    successors = [env.update(space.assignment(i)) for i in range(space.size)]

    def extension(region):
        contains = region if callable(region) else (lambda candidate, _r=frozenset(region): candidate in _r)
        return nu(mask_of(i for i, candidate in enumerate(successors) if contains(candidate)))

    return extension


class InputModel:
    """
    Capacities for the input sites of a program.

    Parameters
    ----------
    sites : mapping, optional
        label -> Capacity (the capacity carries its OutcomeSpace).
    """
    def __init__(self, sites: Optional[Mapping[int, Capacity]] = None):
        self.sites: Dict[int, Capacity] = dict(sites or {})

    def add(self, label: int, nu: Capacity) -> "InputModel":
        self.sites[label] = nu
        return self

    def capacity(self, label: int) -> Capacity:
        try:
            return self.sites[label]
        except KeyError:
            raise NoModelForSite(label) from None

    def __contains__(self, label: int) -> bool:
        return label in self.sites

    def __repr__(self):
        return f"<InputModel sites={sorted(self.sites)}>"


def outcome_envs(nu: Capacity, env):
    """Environments reached from env through each outcome, by outcome index."""
    return [env.update(nu.space.assignment(i)) for i in range(nu.space.size)]


def wp_input(kappa, model: InputModel, site: int, env, targets: Optional[Tuple[str, ...]] = None):
    """
    Weakest precondition of an input site at env: the Choquet integral of
    o -> kappa(env[V_I -> o]) against the site's capacity.

    Raises
    ------
    NoModelForSite
        If the model has no capacity for `site`.
    ValueError
        If `targets` is given and differs from the capacity's input variables.
    """
    nu = model.capacity(site)
    if targets is not None and set(targets) != set(nu.space.vars):
        raise ValueError(f"input site ^{site} assigns {targets}, its capacity assigns {nu.space.vars}")
    values = [kappa(successor) for successor in outcome_envs(nu, env)]
    return choquet(values, nu)


__all__ = [
    "OutcomeSpace", "Capacity", "CapacityFlags", "InputModel", "capacity_classify", "choquet",
    "extend_capacity", "wp_input", "outcome_envs", "mask_of", "members", "zeta_transform", "INFINITY",
]
