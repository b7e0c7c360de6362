"""Shared exception types.

Two failure families are distinguished because the command line maps them to
different exit codes: configuration problems (bad parameters, inconsistent
modes, violated preconditions) and resource refusals (requests whose cost
would exceed the configured guardrails).
"""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid parameters, inconsistent modes, or violated preconditions."""


class ResourceRefusal(RuntimeError):
    """The request was refused because it exceeds a size guardrail.

    Raised instead of attempting work that would materialise words or grids
    beyond the configured limits; pass ``force=True`` (or ``--force`` on the
    command line) to override deliberately.
    """
