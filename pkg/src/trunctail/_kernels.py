"""Numba kernels for the two Monte Carlo hot loops.

Both kernels consume a ``numpy.random.Generator`` whose method streams are
bit-identical between numba and numpy, so results do not depend on which side
drives the generator.
"""

from __future__ import annotations

import numba

RESIDUAL_ZERO = 0
RESIDUAL_EXPONENTIAL = 1
RESIDUAL_UNIFORM = 2


@numba.njit(cache=True)
def z_series(gen, n_terms, q):
    """Truncated Poisson-arrival series sum_{j<=N} (G_1/G_j)^q.

    Returns (value, G_1, G_N); the extra arrival times let callers estimate
    the contribution lost to truncating the series at N terms.
    """
    g = gen.standard_exponential()
    g1 = g
    total = 1.0  # j = 1 term is exactly 1
    for _ in range(n_terms - 1):
        g += gen.standard_exponential()
        total += (g1 / g) ** q
    return total, g1, g


@numba.njit(cache=True)
def truncated_row_sum(gen, n, alpha, scale, dir_cdf, dirs, m, res_kind, res_param, out):
    """Sum of one row of n truncated heavy-tailed vectors, accumulated in ``out``.

    Radius is Pareto(alpha, scale), direction is drawn from the atoms in
    ``dirs`` with cumulative weights ``dir_cdf``; radii above ``m`` are pushed
    back to m plus a residual draw.
    """
    d = dirs.shape[1]
    for i in range(d):
        out[i] = 0.0
    inv_alpha = 1.0 / alpha
    n_atoms = dir_cdf.shape[0]
    for _ in range(n):
        u = gen.random()
        k = 0
        while k < n_atoms - 1 and u > dir_cdf[k]:
            k += 1
        # 1 - random() lies in (0, 1], keeping the radius finite
        rad = scale * (1.0 - gen.random()) ** (-inv_alpha)
        if rad > m:
            if res_kind == RESIDUAL_EXPONENTIAL:
                rad = m + gen.standard_exponential() / res_param
            elif res_kind == RESIDUAL_UNIFORM:
                rad = m + gen.random() * res_param
            else:
                rad = m
        for i in range(d):
            out[i] += rad * dirs[k, i]
