"""Exponential perturbative expansions for linear ODE systems."""

__version__ = "0.1.0"

try:
    from ._liexp import *  # noqa: F401,F403  (installed layout)
except ImportError:  # pragma: no cover - in-tree builds put _liexp on sys.path
    from _liexp import *  # noqa: F401,F403
