"""Utility functions: report save/load, rational and float text forms, timer."""

from __future__ import annotations

import json
import logging
import time
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 15


def format_fraction(value: Fraction) -> str:
    """Canonical "p/q" text, e.g. Fraction(32) -> "32/1"."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"Not a rational number: {text!r}") from exc


def format_float(value: float) -> str:
    return format(float(value), f".{SIGNIFICANT_DIGITS}g")


def format_complex(value: complex) -> str:
    value = complex(value)
    sign = "-" if value.imag < 0 else "+"
    return f"{format_float(value.real)}{sign}{format_float(abs(value.imag))}j"


def jsonable(obj: Any) -> Any:
    """Convert report values to JSON-safe, byte-stable forms."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return format_complex(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    return str(obj)


def save_report(text: str, path: str | Path) -> None:
    """Write a serialized report to ``path``."""
    with open(path, "w") as f:
        f.write(text)


def load_report(path: str | Path) -> dict:
    """Load a JSON report."""
    with open(path) as f:
        return json.load(f)


class Timer:
    """Measures a block and logs ``label`` with its duration on exit.

    Durations are for the log only; reports stay free of timing data.
    """

    def __init__(self, label: str, log: logging.Logger | None = None, level: int = logging.DEBUG):
        self.label = label
        self.log = log or logger
        self.level = level
        self.elapsed: float = 0.0

    def __enter__(self) -> Timer:
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc: Any) -> None:
        self.elapsed = time.perf_counter() - self._start
        outcome = "failed after" if exc[0] is not None else "took"
        self.log.log(self.level, "%s %s %.3fs", self.label, outcome, self.elapsed)
