"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Utility Functions Module
"""

import re
import sys
import logging
from fractions import Fraction

import numpy as np

try:
    from .errors import InputError
except ImportError:
    from errors import InputError

# Global verbose flag
_verbose = False

RATIONAL_PATTERN = re.compile(r"\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*")


def parse_rational(value, where="value"):
    """
    Parses an exact rational from a "p/q" or integer string.

    Args:
        value (str | int): The text to parse. JSON integers are accepted as-is.
        where (str): Location used in the error message.

    Returns:
        Fraction: The parsed rational.

    Raises:
        InputError: On decimal notation, floats, or anything else that is not p/q.
    """
    if isinstance(value, bool):
        raise InputError(f"{where}: expected a rational string 'p/q', got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise InputError(f"{where}: expected a rational string 'p/q', got {value!r}")
    match = RATIONAL_PATTERN.fullmatch(value)
    if not match:
        raise InputError(
            f"{where}: {value!r} is not a rational 'p/q' (decimal input is rejected)"
        )
    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise InputError(f"{where}: {value!r} has a zero denominator")
    return Fraction(int(numerator), int(denominator or 1))


def format_rational(value):
    """
    Formats a rational as "p/q", or "p" when the denominator is 1.
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational_list(text, where="list"):
    if text is None:
        return None
    items = [item for item in text.split(",") if item.strip()]
    return [parse_rational(item, f"{where}[{i}]") for i, item in enumerate(items)]


def parse_name_list(text):
    if not text:
        return []
    return [item.strip() for item in text.split(",") if item.strip()]


def sub_seed(seed, index):
    """
    Derives the seed of draw `index` from an experiment seed.

    The split is a fixed function of (seed, index) so that draws are
    independent of execution order.
    """
    if seed < 0 or index < 0:
        raise InputError(f"Seeds must be non-negative integers, got seed {seed}")
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def print_progress_bar(
    iteration,
    total,
    prefix="",
    suffix="",
    decimals=1,
    width=40,
):
    """Draw progress on standard error, verbose mode only."""
    if not verbose() or total <= 0:
        return
    done = width * iteration // total
    bar = "#" * done + "-" * (width - done)
    percent = f"{100 * iteration / total:.{decimals}f}"
    print(f"\r{prefix} |{bar}| {percent}% {suffix}", end="", file=sys.stderr)
    if iteration == total:
        print(file=sys.stderr)


def time_formatter(seconds):
    """Render seconds as "1h 2m 3s", dropping leading zero units."""
    m, s = divmod(int(seconds), 60)
    h, m = divmod(m, 60)
    return f"{h}h {m}m {s}s" if h else f"{m}m {s}s" if m else f"{s}s"


def set_verbose(value):
    global _verbose
    _verbose = value
    logging.basicConfig(
        stream=sys.stderr,
        format="%(levelname)s: %(message)s",
        level=logging.DEBUG if value else logging.WARNING,
        force=True,
    )


def verbose():
    return _verbose
