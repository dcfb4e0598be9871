"""Exact computations with (C,F)-constructions of rank one and finite rank."""
from .certified import CertifiedValue
from .errors import CFError
from .groups import GroupSet
from .rank_one import Cylinder, RankOneSystem
from .finite_rank import CylinderK, RankKSystem

__all__ = ["CertifiedValue", "CFError", "GroupSet", "Cylinder", "RankOneSystem", "CylinderK", "RankKSystem"]
__version__ = "0.1.0"
