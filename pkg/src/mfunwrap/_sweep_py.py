"""Pure-Python mean-field sweep, used when the compiled kernel is unavailable.

Mirrors ``_sweep.pyx`` operation for operation so both backends produce the
same beliefs up to floating-point rounding.
"""
import math

PROB_FLOOR = 1e-12


def _mean(p):
    return p[2] - p[0]


def _normalize(c_m, c_0, c_p):
    lo = min(c_m, c_0, c_p)
    e_m = math.exp(lo - c_m)
    e_0 = math.exp(lo - c_0)
    e_p = math.exp(lo - c_p)
    s = e_m + e_0 + e_p
    mix = 1.0 - 3.0 * PROB_FLOOR
    return (
        PROB_FLOOR + mix * e_m / s,
        PROB_FLOOR + mix * e_0 / s,
        PROB_FLOOR + mix * e_p / s,
    )


def _triple(d, lin, quad, data_weight):
    # cost(k) = w (d - k)^2 + quad k^2 + lin k
    return _normalize(
        data_weight * (d + 1.0) ** 2 + quad - lin,
        data_weight * d * d,
        data_weight * (d - 1.0) ** 2 + quad + lin,
    )


def update_a(dx, alpha, beta, i, j, inv_temp, data_weight):
    """New triple for horizontal edge (i, j) given all other beliefs."""
    rows = alpha.shape[0]
    lin = 0.0
    quad = 0.0
    if i < rows - 1:
        rest = _mean(beta[i, j + 1]) - _mean(alpha[i + 1, j]) - _mean(beta[i, j])
        lin += 2.0 * rest
        quad += 1.0
    if i > 0:
        rest = _mean(alpha[i - 1, j]) + _mean(beta[i - 1, j + 1]) - _mean(beta[i - 1, j])
        lin -= 2.0 * rest
        quad += 1.0
    return _triple(float(dx[i, j]), lin * inv_temp, quad * inv_temp, data_weight)


def update_b(dy, alpha, beta, i, j, inv_temp, data_weight):
    """New triple for vertical edge (i, j) given all other beliefs."""
    cols = beta.shape[1]
    lin = 0.0
    quad = 0.0
    if j < cols - 1:
        rest = _mean(alpha[i, j]) + _mean(beta[i, j + 1]) - _mean(alpha[i + 1, j])
        lin -= 2.0 * rest
        quad += 1.0
    if j > 0:
        rest = _mean(alpha[i, j - 1]) - _mean(alpha[i + 1, j - 1]) - _mean(beta[i, j - 1])
        lin += 2.0 * rest
        quad += 1.0
    return _triple(float(dy[i, j]), lin * inv_temp, quad * inv_temp, data_weight)


def sweep_inplace(dx, dy, alpha, beta, inv_temp, data_weight, order):
    """Update every edge listed in ``order`` in turn, writing into alpha/beta.

    Edge ids ``0 .. n_a - 1`` are horizontal edges in raster order, the rest
    vertical edges in raster order.
    """
    ncols_a = alpha.shape[1]
    ncols_b = beta.shape[1]
    n_a = alpha.shape[0] * ncols_a
    for e in order:
        e = int(e)
        if e < n_a:
            i, j = divmod(e, ncols_a)
            alpha[i, j] = update_a(dx, alpha, beta, i, j, inv_temp, data_weight)
        else:
            i, j = divmod(e - n_a, ncols_b)
            beta[i, j] = update_b(dy, alpha, beta, i, j, inv_temp, data_weight)
