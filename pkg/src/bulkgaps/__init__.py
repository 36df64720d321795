"""Largest bulk eigenvalue gaps of unitary-invariant ensembles: samplers,
gap statistics, limiting laws and deterministic gap-probability engines."""

__version__ = "0.1.0"
