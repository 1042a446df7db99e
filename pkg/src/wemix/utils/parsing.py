"""Parsers for the `family:param` option strings and grid strings of the CLI."""

import math
import re
from typing import Optional, Pattern

import numpy as np

from wemix.errors import InputError

# "family" or "family:param"; param may be a number, inf or a bare word
_FAMILY_PARAM_PATTERN: Pattern[str] = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*(?::\s*([^:\s]+)\s*)?$")

# start:stop:count, as in 0.01:0.2:20
_RANGE_PATTERN: Pattern[str] = re.compile(r"^\s*([^:]+):([^:]+):(\d+)\s*$")


def split_family(text: str, valid: tuple[str, ...]) -> tuple[str, Optional[str]]:
    """Split an option string into its family and raw parameter.

    Args:
        text: Option string such as "gkl:0.9" or "folded-normal"
        valid: Accepted family names

    Returns:
        (family, parameter string or None)

    Raises:
        InputError: if the string is malformed or the family is unknown
    """
    match = _FAMILY_PARAM_PATTERN.match(text or "")
    if match is None:
        raise InputError(f"cannot parse option {text!r}; expected family or family:param")
    family = match.group(1).lower()
    if family not in valid:
        raise InputError(f"unknown family {family!r}; valid options: {', '.join(valid)}")
    return family, match.group(2)


def parse_number(text: str) -> float:
    """Parse a float, accepting inf/infinity."""
    lowered = text.strip().lower()
    if lowered in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(lowered)
    except ValueError as e:
        raise InputError(f"not a number: {text!r}") from e


def parse_float_grid(text: str) -> list[float]:
    """Parse "start:stop:count" (evenly spaced) or a comma list into sorted floats."""
    match = _RANGE_PATTERN.match(text)
    if match is not None:
        start, stop = parse_number(match.group(1)), parse_number(match.group(2))
        count = int(match.group(3))
        if count < 1 or start <= 0 or stop <= 0:
            raise InputError(f"invalid grid {text!r}: need positive bounds and count >= 1")
        if count == 1:
            return [start]
        return [float(v) for v in np.linspace(start, stop, count)]
    values = sorted(parse_number(part) for part in text.split(",") if part.strip())
    if not values:
        raise InputError(f"empty grid {text!r}")
    return values


def parse_int_grid(text: str) -> list[int]:
    """Parse "1,2,3" or "1:4" into a sorted list of positive integers."""
    try:
        if ":" in text:
            low, high = (int(part) for part in text.split(":", 1))
            values = list(range(low, high + 1))
        else:
            values = sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError as e:
        raise InputError(f"invalid integer grid {text!r}") from e
    if not values or min(values) < 1:
        raise InputError(f"invalid integer grid {text!r}: values must be >= 1")
    return values
