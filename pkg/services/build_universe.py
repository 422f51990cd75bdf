# services/build_universe.py
"""
Environment and Universe Loading Service

This module reads the text files that describe program states:
1. Env files: one binding per line (`x = 3/2`), or comma-separated bindings
2. Universe files: one environment per line (`x = 0, y = 1`), or products
   of value sets (`x in {0, 1, 2}` on one line per variable)
3. Table files for table continuations: `x = 1, y = 0 -> 3/2`, `default -> 0`
4. Continuation spec strings: `indicator: <test>`, `expr: <expr>`, `table: <file>`

Lines starting with `#` and blank lines are ignored everywhere. Values are
`err`, integers, decimals or fractions; in float mode they must be exactly
representable in the active format.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from models.answers import EXT, AnswerDomain, Continuation, ExprCont, IndicatorCont, TableCont, same_domain
from models.errors import DomainMismatch, FileFormatError, WorkbenchError
from models.semantics import Env, Semantics
from services.parse_program import parse_expr, parse_test

logger = logging.getLogger(__name__)

BINDING = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)\s*$")
PRODUCT = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s+in\s*\{(.*)\}\s*$")


def content_lines(path) -> List[Tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        lines = []
        for number, raw in enumerate(handle, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                lines.append((number, text))
        return lines


def _value(text: str, semantics: Semantics, path, line: int):
    try:
        return semantics.parse_value(text)
    except (ValueError, ZeroDivisionError):
        raise FileFormatError(path, line, f"cannot read value {text!r}") from None
    except WorkbenchError as e:
        raise FileFormatError(path, line, str(e)) from None


def parse_bindings(text: str, semantics: Semantics, path="<text>", line: int = 1) -> Dict[str, object]:
    """Parse `x = 1, y = err` into a dict of values of the active semantics."""
    bindings = {}
    for part in text.split(","):
        match = BINDING.match(part)
        if not match:
            raise FileFormatError(path, line, f"expected 'name = value', got {part.strip()!r}")
        name, value = match.groups()
        if name in bindings:
            raise FileFormatError(path, line, f"variable '{name}' bound twice")
        bindings[name] = _value(value, semantics, path, line)
    return bindings


def _check_variables(bindings: Dict[str, object], variables: Optional[Sequence[str]], path, line: int):
    if variables is None:
        return
    missing = [v for v in variables if v not in bindings]
    if missing:
        raise FileFormatError(path, line, f"no value for {', '.join(missing)}")


def load_env(path, semantics: Semantics, variables: Optional[Sequence[str]] = None) -> Env:
    """
    Read an env file.

    Parameters
    ----------
    path : str or Path
        File with one or more `name = value` bindings per line.
    semantics : Semantics
        Determines the value set.
    variables : sequence of str, optional
        Variables that must be bound (typically the program's declared ones).

    Returns
    -------
    Env

    Raises
    ------
    FileFormatError
        On malformed lines, duplicate or missing bindings, or unrepresentable values.
    """
    bindings: Dict[str, object] = {}
    last = 0
    for line, text in content_lines(path):
        for name, value in parse_bindings(text, semantics, path, line).items():
            if name in bindings:
                raise FileFormatError(path, line, f"variable '{name}' bound twice")
            bindings[name] = value
        last = line
    _check_variables(bindings, variables, path, last)
    return semantics.env(bindings)


def load_universe(path, semantics: Semantics, variables: Optional[Sequence[str]] = None) -> List[Env]:
    """
    Read a universe file: explicit env rows, or `var in {...}` products.

    The two styles cannot be mixed in one file. Products enumerate in the
    order the variables are listed, last variable fastest.

    Raises
    ------
    FileFormatError
        On malformed or mixed content.
    """
    rows: List[Env] = []
    factors: Dict[str, List[object]] = {}
    for line, text in content_lines(path):
        product = PRODUCT.match(text)
        if product:
            if rows:
                raise FileFormatError(path, line, "cannot mix env rows and products")
            name, values = product.groups()
            if name in factors:
                raise FileFormatError(path, line, f"variable '{name}' listed twice")
            items = [v.strip() for v in values.split(",") if v.strip()]
            if not items:
                raise FileFormatError(path, line, f"empty value set for '{name}'")
            factors[name] = list(dict.fromkeys(_value(v, semantics, path, line) for v in items))
        else:
            if factors:
                raise FileFormatError(path, line, "cannot mix env rows and products")
            bindings = parse_bindings(text, semantics, path, line)
            _check_variables(bindings, variables, path, line)
            rows.append(semantics.env(bindings))

    if factors:
        _check_variables(factors, variables, path, 0)
        index = pd.MultiIndex.from_product(list(factors.values()), names=list(factors))
        rows = [semantics.env(dict(zip(index.names, combo))) for combo in index]

    if not rows:
        raise FileFormatError(path, 0, "the universe is empty")
    rows = list(dict.fromkeys(rows))
    logger.debug("loaded %d environments from %s", len(rows), path)
    return rows


def universe_frame(envs: Sequence[Env], semantics: Semantics) -> pd.DataFrame:
    """One row per environment, one column per variable, values rendered as text."""
    return pd.DataFrame([{name: semantics.format_value(value) for name, value in env.bindings} for env in envs])


def load_table(path, semantics: Semantics, domain: AnswerDomain) -> TableCont:
    """
    Read a table continuation: `x = 1, y = 0 -> 3/2` rows and an optional
    `default -> 0` (bottom when absent).
    """
    table = {}
    default = None
    for line, text in content_lines(path):
        if "->" not in text:
            raise FileFormatError(path, line, "expected 'bindings -> answer'")
        lhs, rhs = (part.strip() for part in text.rsplit("->", 1))
        try:
            answer = domain.parse(rhs)
        except (ValueError, ZeroDivisionError):
            raise FileFormatError(path, line, f"{rhs!r} is not a {domain.name} answer") from None
        if lhs == "default":
            default = answer
            continue
        env = semantics.env(parse_bindings(lhs, semantics, path, line))
        if env in table:
            raise FileFormatError(path, line, f"environment {env} listed twice")
        table[env] = answer
    return TableCont(domain, table, default)


def parse_continuation(spec: str, semantics: Semantics, domain: AnswerDomain,
                       base_dir: Optional[Path] = None, expr_default=None) -> Continuation:
    """
    Build a continuation from `indicator: <test>`, `expr: <expr>` or `table: <file>`.

    An `expr:` spec may end in `default <value>`, the answer where the
    expression is err or negative; otherwise `expr_default` (0 when None) is used.

    Raises
    ------
    DomainMismatch
        For `expr:` with Boolean answers.
    ValueError
        For an unknown spec kind or an invalid default.
    """
    kind, _, body = spec.partition(":")
    kind, body = kind.strip().lower(), body.strip()
    if kind == "indicator":
        return IndicatorCont(parse_test(body), semantics, domain)
    if kind == "expr":
        if not same_domain(domain, EXT):
            raise DomainMismatch("expression continuations answer in extnonneg")
        text, marker, value = body.rpartition(" default ")
        if marker:
            body, expr_default = text, EXT.parse(value)
        return ExprCont(parse_expr(body), semantics, EXT.bottom if expr_default is None else expr_default)
    if kind == "table":
        path = Path(body)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_table(path, semantics, domain)
    raise ValueError(f"unknown continuation {spec!r}; use 'indicator:', 'expr:' or 'table:'")
