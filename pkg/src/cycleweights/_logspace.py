"""Small log-space helpers used in the O(N^2) inner loops.

``scipy.special.logsumexp`` carries enough per-call overhead to matter when it
is called 2e4 times on short vectors, hence the hand-rolled variant here.
"""
import math

import numpy as np


def logsumexp(x: np.ndarray) -> float:
    """ln(sum(exp(x))) for a 1-d array; ``-inf`` entries are skipped."""
    m = x.max()
    if m == -math.inf:
        return -math.inf
    return float(m + math.log(np.exp(x - m).sum()))


def log_add(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))
