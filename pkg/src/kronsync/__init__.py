"""Kron-reduced transient cost, cohesion certificates and susceptance
allocation for power networks."""

__version__ = "0.1.0"
