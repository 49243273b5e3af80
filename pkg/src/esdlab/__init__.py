"""Entanglement dynamics and sudden death in exactly solvable two-qubit models."""

__version__ = "0.1.0"
