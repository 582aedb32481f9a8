"""Entropy inequalities for log-concave measures.

Thin re-export of the compiled ``_entlab`` module. Reports are plain dicts
with keys name, lhs, rhs, lhs_se, rhs_se, margin, slack, satisfied, params.
"""

from ._entlab import *  # noqa: F401,F403
from ._entlab import __doc__  # noqa: F401

__version__ = "0.1.0"


def unsatisfied(reports):
    """The reports whose decision rule failed."""
    return [r for r in reports if not r["satisfied"]]
