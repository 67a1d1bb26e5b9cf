"""Exact service curves, delay bounds and packet simulation for interleaved
weighted round-robin. Rationals are fractions.Fraction; flow indices start at 0."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, DomainError, Policy, __doc__  # noqa: F401
