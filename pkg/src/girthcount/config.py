"""Node caps for the exact engines.

Caps may be raised through the environment:

    GIRTHCOUNT_IND_CAP    independence-polynomial cap (default 34)
    GIRTHCOUNT_COLOR_CAP  coloring-count cap for general graphs (default 16)
"""

import os

ENV_PREFIX = "GIRTHCOUNT_"
DEFAULT_IND_CAP = 34
DEFAULT_COLOR_CAP = 16


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{ENV_PREFIX}{name} must be non-negative")
    return value


def ind_cap() -> int:
    return _env_int("IND_CAP", DEFAULT_IND_CAP)


def color_cap() -> int:
    return _env_int("COLOR_CAP", DEFAULT_COLOR_CAP)
