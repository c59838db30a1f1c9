"""Optimal execution with a major trader, a mean field of minor traders,
and a deterministic target schedule."""

from .errors import *  # noqa: F401,F403
from .model import *  # noqa: F401,F403

__version__ = "0.1.0"
