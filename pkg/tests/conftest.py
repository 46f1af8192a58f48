"""Shared independent oracles: exhaustive rule enumeration and finite differences.

These deliberately avoid the library's own computation paths (no binomial
convolutions, no Bernstein algebra) so agreement is a real cross-check.
"""

import itertools

import numpy as np
import pytest

from treemajority.model import ModelParams
from treemajority.update_map import UpdateMap, g_eval


def enumerate_policy(m: int, p_b: float, p_r: float, k: int) -> float:
    """Adoption probability by brute force over all 2^m success/failure patterns.

    Children 0..k-1 hold B, the rest hold R; a pattern's weight is the product
    of per-child Bernoulli probabilities, and it contributes fully on a strict
    B-majority of successes, half on a tie.
    """
    total = 0.0
    for bits in itertools.product((0, 1), repeat=m):
        prob = 1.0
        n_b = n_r = 0
        for i, hit in enumerate(bits):
            rate = p_b if i < k else p_r
            prob *= rate if hit else 1.0 - rate
            if hit:
                if i < k:
                    n_b += 1
                else:
                    n_r += 1
        if n_b > n_r:
            total += prob
        elif n_b == n_r:
            total += 0.5 * prob
    return total


def central_diff(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def second_central_diff(f, x: float, h: float) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / h**2


def analytic_marginals(params: ModelParams, pi_0: float, horizon: int) -> np.ndarray:
    """The exact marginal recursion, iterated a fixed number of steps."""
    gm = UpdateMap.from_params(params)
    out = np.empty(horizon + 1)
    out[0] = pi_0
    for t in range(horizon):
        out[t + 1] = g_eval(gm, out[t])
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
