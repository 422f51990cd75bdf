# models/run_config.py
"""
Run Configuration Model

This module implements the RunConfig class that holds the settings of one
workbench run. It provides a single place to read:
1. Semantics (real, or a float format string)
2. Loop and oracle budgets (max_iter, fuel, closure_limit)
3. Sampling parameters (seed, samples)
4. Output format (human or key-value)
5. The answer of expression continuations where the expression is err or negative

Settings are layered: built-in defaults, then a JSON config file, then the
WPWB_SEED environment variable (seed only), then command-line flags.
"""

import json
import logging
import os
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from models.answers import EXT, AnswerDomain
from models.errors import FileFormatError
from models.semantics import Semantics
from models.wp import WpConfig

logger = logging.getLogger(__name__)

SEED_VARIABLE = "WPWB_SEED"
OUTPUT_FORMATS = ("human", "kv")


class RunConfig:
    """
    Settings of a workbench run.

    Attributes
    ----------
    data : dict
        - format : str
            'real', 'binary64' or 'tiny:p=..,emin=..,emax=..' (default 'real')
        - max_iter : int
            Loop iteration budget N (default 64)
        - fuel : int
            Enumeration oracle step bound (default 10000)
        - closure_limit : int
            Largest loop env closure tabulated exactly (default 4096)
        - seed : int
            Seed of every random draw (default 0)
        - samples : int
            Environments per law-checking plan (default 12)
        - output : str
            'human' or 'kv' (default 'human')
        - expr_default : str or number
            Answer of `expr:` continuations at err or negative values, in
            [0, +inf] (default 0)
    """
    def __init__(self):
        """Initialize a RunConfig with the default settings."""
        self.data = {
            "format": "real",
            "max_iter": 64,
            "fuel": 10000,
            "closure_limit": 4096,
            "seed": 0,
            "samples": 12,
            "output": "human",
            "expr_default": 0,
        }

    @classmethod
    def load(cls, overrides: Optional[Mapping] = None, config_path=None,
             environ: Optional[Mapping[str, str]] = None) -> "RunConfig":
        """
        Build a configuration from the layered sources.

        Parameters
        ----------
        overrides : mapping, optional
            Command-line values; None entries are ignored.
        config_path : str or Path, optional
            JSON file with a subset of the data keys.
        environ : mapping, optional
            Environment variables, by default os.environ.

        Raises
        ------
        FileFormatError
            If the config file is unreadable, has unknown keys, or a value is invalid.
        """
        config = cls()
        if config_path is not None:
            config.update_from_file(config_path)
        environ = os.environ if environ is None else environ
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None and k in config.data}
        if "seed" not in overrides and environ.get(SEED_VARIABLE):
            try:
                config.data["seed"] = int(environ[SEED_VARIABLE])
            except ValueError:
                raise FileFormatError(SEED_VARIABLE, 0, f"seed must be an integer, got {environ[SEED_VARIABLE]!r}") from None
        config.data.update(overrides)
        config.validate(config_path or "<command line>")
        return config

    def update_from_file(self, path):
        try:
            with open(path, encoding="utf-8") as handle:
                values = json.load(handle)
        except json.JSONDecodeError as e:
            raise FileFormatError(path, e.lineno, f"invalid JSON: {e.msg}") from None
        if not isinstance(values, dict):
            raise FileFormatError(path, 1, "the config file must hold a JSON object")
        unknown = sorted(set(values) - set(self.data))
        if unknown:
            raise FileFormatError(path, 1, f"unknown settings: {', '.join(unknown)}")
        self.data.update(values)
        logger.debug("settings from %s: %s", path, values)

    def validate(self, source="<settings>"):
        for key in ("max_iter", "fuel", "closure_limit", "samples"):
            if not isinstance(self.data[key], int) or self.data[key] < 1:
                raise FileFormatError(source, 0, f"{key} must be a positive integer")
        if not isinstance(self.data["seed"], int):
            raise FileFormatError(source, 0, "seed must be an integer")
        if self.data["output"] not in OUTPUT_FORMATS:
            raise FileFormatError(source, 0, f"output must be one of {', '.join(OUTPUT_FORMATS)}")
        try:
            EXT.parse(str(self.data["expr_default"]))
        except ValueError as e:
            raise FileFormatError(source, 0, f"expr_default: {e}") from None
        try:
            Semantics.from_string(self.data["format"])
        except ValueError as e:
            raise FileFormatError(source, 0, str(e)) from None

    @staticmethod
    def require_file(path) -> Path:
        path = Path(path)
        if not path.is_file():
            raise FileFormatError(path, 0, "no such file")
        return path

    @property
    def semantics(self) -> Semantics:
        return Semantics.from_string(self.data["format"])

    @property
    def machine_readable(self) -> bool:
        return self.data["output"] == "kv"

    @property
    def expr_default(self):
        return EXT.parse(str(self.data["expr_default"]))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.data["seed"])

    def wp_config(self, domain: AnswerDomain = EXT, universe=None, input_model=None) -> WpConfig:
        return WpConfig(
            semantics=self.semantics,
            domain=domain,
            max_iter=self.data["max_iter"],
            universe=universe,
            input_model=input_model,
            closure_limit=self.data["closure_limit"],
            fuel=self.data["fuel"],
        )
