"""Brute-force references kept independent of the arc-chain code."""

from fractions import Fraction
from math import ceil, floor

import numpy as np


def grid_pass_mask(n_seq, eps, Q):
    """For alpha = m/Q, m = 0..Q-1: True when ||n alpha|| < eps for every n.

    Exact: ||n m / Q|| = min(r, Q - r) / Q with r = n m mod Q, compared in integers.
    """
    eps = Fraction(eps)
    a, b = eps.numerator, eps.denominator
    m = np.arange(Q, dtype=np.int64)
    mask = np.ones(Q, dtype=bool)
    for n in n_seq:
        r = (np.int64(n % Q) * m) % Q
        d = np.minimum(r, Q - r)
        mask &= d * b < a * Q
    return mask


def arcs_grid_mask(arcs, Q):
    """Grid points m/Q lying strictly inside any of the given open arcs (lifted coordinates)."""
    mask = np.zeros(Q, dtype=bool)
    for arc in arcs:
        lo, hi = arc.lo * Q, arc.hi * Q
        start, stop = floor(lo) + 1, ceil(hi) - 1
        for m in range(start, stop + 1):
            mask[m % Q] = True
    return mask
