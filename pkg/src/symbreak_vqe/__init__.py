"""Exact-statevector VQE with symmetry-breaking layers and natural gradient descent."""

__version__ = "0.1.0"
