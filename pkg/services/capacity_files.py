# services/capacity_files.py
"""
Capacity File Service

Reads capacity files of the form

    # two outcomes for x
    outcomes: x=0.5 | x=1.0
    table: {}=0 {1}=0.2 {2}=0.3 {1,2}=1

The first content line lists the outcomes (several input variables are
separated by commas: `x=0, y=1 | x=1, y=0`). The second line gives the
capacity as one of:
- `prob: 0.5 0.5`                one probability per outcome
- `mass: {1}=0.3 {1,2}=0.7`      belief function from Moebius masses
- `plaus: {1}=0.3 {1,2}=0.7`     plausibility dual of those masses
- `table: {}=0 {1}=0.2 ...`      every subset listed explicitly
Outcomes are numbered from 1 in subset literals.
"""

import logging
import re
from fractions import Fraction
from typing import Dict, FrozenSet, List, Tuple

from models.capacity import Capacity, OutcomeSpace
from models.errors import FileFormatError
from models.semantics import Semantics
from services.build_universe import content_lines, parse_bindings

logger = logging.getLogger(__name__)

SUBSET_ENTRY = re.compile(r"\{([^}]*)\}\s*=\s*(\S+)")


def _fraction(text: str, path, line: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise FileFormatError(path, line, f"{text!r} is not a rational number") from None


def parse_outcomes(text: str, semantics: Semantics, path="<text>", line: int = 1) -> OutcomeSpace:
    """Parse the body of an `outcomes:` line."""
    variables = None
    outcomes = []
    for part in text.split("|"):
        bindings = parse_bindings(part, semantics, path, line)
        if variables is None:
            variables = tuple(bindings)
        elif set(bindings) != set(variables):
            raise FileFormatError(path, line, f"outcome {part.strip()!r} does not assign {', '.join(variables)}")
        outcomes.append(tuple(bindings[v] for v in variables))
    try:
        return OutcomeSpace(variables, tuple(outcomes))
    except ValueError as e:
        raise FileFormatError(path, line, str(e)) from None


def parse_subset_entries(text: str, size: int, path, line: int) -> Dict[FrozenSet[int], Fraction]:
    """`{1,2}=0.7 {}=0` as {frozenset({0, 1}): 7/10, frozenset(): 0} with 0-based indices."""
    entries = {}
    consumed = SUBSET_ENTRY.sub("", text).strip()
    if consumed:
        raise FileFormatError(path, line, f"cannot read {consumed!r}")
    for members, value in SUBSET_ENTRY.findall(text):
        indices = set()
        for item in (m.strip() for m in members.split(",") if m.strip()):
            if not item.isdigit() or not 1 <= int(item) <= size:
                raise FileFormatError(path, line, f"no outcome {item!r} (outcomes are 1..{size})")
            indices.add(int(item) - 1)
        subset = frozenset(indices)
        if subset in entries:
            raise FileFormatError(path, line, f"subset {{{members}}} listed twice")
        entries[subset] = _fraction(value, path, line)
    return entries


def parse_capacity(lines: List[Tuple[int, str]], semantics: Semantics, path="<text>") -> Capacity:
    if len(lines) != 2:
        raise FileFormatError(path, lines[-1][0] if lines else 0,
                              "expected an 'outcomes:' line followed by one capacity line")
    (first_line, first), (line, second) = lines
    keyword, _, body = first.partition(":")
    if keyword.strip() != "outcomes":
        raise FileFormatError(path, first_line, "the first line must start with 'outcomes:'")
    space = parse_outcomes(body, semantics, path, first_line)

    keyword, _, body = second.partition(":")
    keyword = keyword.strip()
    try:
        if keyword == "prob":
            weights = [_fraction(w, path, line) for w in body.split()]
            return Capacity.from_probability(space, weights)
        if keyword in ("mass", "plaus"):
            masses = parse_subset_entries(body, space.size, path, line)
            if keyword == "mass":
                return Capacity.from_masses(space, masses)
            return Capacity.plausibility_of(space, masses)
        if keyword == "table":
            entries = parse_subset_entries(body, space.size, path, line)
            if len(entries) != 1 << space.size:
                raise FileFormatError(path, line, f"a table lists all {1 << space.size} subsets, got {len(entries)}")
            return Capacity.from_table(space, entries)
    except ValueError as e:
        raise FileFormatError(path, line, str(e)) from None
    raise FileFormatError(path, line, f"unknown capacity kind {keyword!r}; use prob, mass, plaus or table")


def load_capacity(path, semantics: Semantics) -> Capacity:
    """
    Read a capacity file.

    Raises
    ------
    FileFormatError
        On malformed content, out-of-range outcome numbers, negative values,
        or outcome values the active format cannot represent.
    """
    nu = parse_capacity(content_lines(path), semantics, path)
    logger.debug("loaded %r from %s", nu, path)
    return nu
