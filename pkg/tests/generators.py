"""Seeded random inputs shared by the oracle and acceptance tests."""

import numpy as np

from rdpersuasion.oracle import PopulationLimits


def feasible_population_limits(count, seed):
    """PopulationLimits with p+ >= p- and p+ - p- <= min(e+ - e-, 1 - p-)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        em, ep = np.sort(rng.uniform(0, 1, 2))
        if ep - em < 0.02:
            continue
        pm = rng.uniform(0, 0.97)
        jump = rng.uniform(0, min(ep - em, 1 - pm))
        out.append(PopulationLimits(float(pm + jump), float(pm), float(ep), float(em)))
    return out


def marginal_pairs(count, seed):
    """(p1, p0) pairs with p0 kept away from 1."""
    rng = np.random.default_rng(seed)
    return [(float(rng.uniform(0, 1)), float(rng.uniform(0, 0.95))) for _ in range(count)]
