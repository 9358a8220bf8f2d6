"""Error-probability curves for block coding via composition-class RG flow."""

from wimpyrg.dist import FiniteDist, JointDist, DeltaDist
from wimpyrg.errors import WimpyError, RGBreakdown, NoConvergence

__all__ = ["FiniteDist", "JointDist", "DeltaDist", "WimpyError", "RGBreakdown", "NoConvergence"]
__version__ = "0.1.0"
