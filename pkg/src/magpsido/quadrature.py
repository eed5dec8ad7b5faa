"""Gauss-Legendre quadrature helpers on [0, 1] and (0, t]."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre_01(order):
    """Nodes and weights for int_0^1 f(s) ds at the given order."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def gauss_legendre_0t(order, t):
    """Nodes and weights for int_0^t f(s) ds."""
    s, w = gauss_legendre_01(order)
    return t * s, t * w
