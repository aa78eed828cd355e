"""Package-level exceptions that map onto CLI exit codes."""

import os

DEFAULT_COMPONENT_CAP = 10**7


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured scalar-component cap."""


class InvariantViolation(AssertionError):
    """An identity that must hold exactly did not (a bug trap)."""


def component_cap() -> int:
    raw = os.environ.get("VSI_COMPONENT_CAP")
    if raw is None or not raw.strip():
        return DEFAULT_COMPONENT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"VSI_COMPONENT_CAP must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise ValueError("VSI_COMPONENT_CAP must be positive")
    return cap
