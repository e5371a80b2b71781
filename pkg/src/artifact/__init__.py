"""Submodular and ω-submodular width of conjunctive queries, with an evaluation engine."""
from .errors import DefectError, NotShannonError, ResourceError

__version__ = "0.1.0"
