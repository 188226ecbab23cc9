"""Statevector toolkit for CR-derived entanglers and PQC benchmarking."""

__version__ = "0.1.0"
