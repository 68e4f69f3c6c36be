"""Budget defaults with environment overrides.

Environment variables:
  MIXER_MAX_ORDER    cap on full group enumeration (default 2,000,000)
  MIXER_LOOP_BUDGET  cap on exact pair-enumeration loops (default 10**9)
"""

from __future__ import annotations

import os

DEFAULT_MAX_ORDER = 2_000_000
DEFAULT_LOOP_BUDGET = 10**9


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def max_order(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return _env_int("MIXER_MAX_ORDER", DEFAULT_MAX_ORDER)


def loop_budget(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return _env_int("MIXER_LOOP_BUDGET", DEFAULT_LOOP_BUDGET)
