"""Exact state-vector simulation of qubit-mediated two-mode entangling protocols."""

__version__ = "0.1.0"
