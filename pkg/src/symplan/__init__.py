"""Symbolic numeric planning: PDDL front end, SMT encodings, bound-deepening engine."""

__version__ = "0.1.0"
