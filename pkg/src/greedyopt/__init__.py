"""Greedy-optimal gradient optimizers from gradient statistics.

Closed-form optimal optimizers over convex trust regions, dynamic
(filter-valued) lifts, K-choice hyperparameter switching, convergence
endpoint machinery, and independent brute-force certification oracles.
"""

from .linalg import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
