"""Pure numpy edge kernels.

Reference implementation of the hot loops; ``_ckernels.pyx`` mirrors every
expression here operation for operation so both backends round identically.
Per-cell sums visit edges in canonical order, alternating the ``K`` and ``L``
contributions of each edge, which is what ``np.bincount`` does with an
interleaved index.
"""
import numpy as np

NAME = "python"

# drift modes
VOLUME_FILLING = 0
FULL_UPWIND = 1


def _interleaved(ek, el):
    idx = np.empty(2 * ek.size, dtype=np.intp)
    idx[0::2] = ek
    idx[1::2] = el
    return idx


def _scatter_antisym(n, ek, el, flux):
    w = np.empty(2 * flux.size)
    w[0::2] = flux
    w[1::2] = -flux
    return np.bincount(_interleaved(ek, el), weights=w, minlength=n)


def _scatter_sym(n, ek, el, w_edge):
    w = np.empty(2 * w_edge.size)
    w[0::2] = w_edge
    w[1::2] = w_edge
    return np.bincount(_interleaved(ek, el), weights=w, minlength=n)


def int_exponent(p):
    """``p - 2`` as an int when it is a small whole number, else -1."""
    k = p - 2.0
    if k == int(k) and 0 <= k <= 64:
        return int(k)
    return -1


def ipow(x, k):
    """``x**k`` by square-and-multiply; the compiled kernel uses the same sequence."""
    result = np.ones_like(x)
    base = x
    first = True
    while k:
        if k & 1:
            result = base.copy() if first else result * base
            first = False
        k >>= 1
        if k:
            base = base * base
    return result


def grad_power(g, p):
    """``|g|^(p - 2)``; integer exponents avoid libm/SIMD ``pow`` differences."""
    k = int_exponent(p)
    if k >= 0:
        return ipow(np.abs(g), k)
    return np.abs(g) ** (p - 2.0)


def pflux(g, p):
    g = np.asarray(g, dtype=float)
    if p == 2.0:
        return g.copy()
    return grad_power(g, p) * g


def edge_fluxes(Avals, u, fu, v, ek, el, tau, p, chi, mode):
    """Diffusive, chemotactic and v-diffusive edge fluxes, oriented K -> L."""
    D = tau * pflux(Avals[el] - Avals[ek], p)
    dv = v[el] - v[ek]
    pos = np.maximum(dv, 0.0)
    neg = np.maximum(-dv, 0.0)
    uk, ul = u[ek], u[el]
    if mode == VOLUME_FILLING:
        fk, fl = fu[el], fu[ek]  # f evaluated on the receiving cell
    else:
        fk, fl = fu[ek], fu[el]
    C = (chi * tau) * (pos * uk * fk - neg * ul * fl)
    G = tau * dv
    return D, C, G


def assemble(Avals, u, fu, v, ek, el, tau, p, chi, mode):
    """Per-cell sums ``sum(D - C)`` and ``sum(G)`` with K-side sign."""
    D, C, G = edge_fluxes(Avals, u, fu, v, ek, el, tau, p, chi, mode)
    n = u.size
    return _scatter_antisym(n, ek, el, D - C), _scatter_antisym(n, ek, el, G)


def cfl_sums(Avals, v, ek, el, tau, p, c_lin, c_deriv):
    """Per-cell rate sums for the step restriction.

    Returns ``(diffusion, drift_gradient, tau_sum)`` where ``diffusion`` sums
    ``tau * max(c_lin * max(1, |dA|^(p-2)), c_deriv * |dA|^(p-2))`` and
    ``drift_gradient`` sums ``tau * |dv|``.
    """
    n = v.size
    if p == 2.0:
        gp = np.ones(ek.size)
    else:
        gp = grad_power(Avals[el] - Avals[ek], p)
    w = tau * np.maximum(c_lin * np.maximum(gp, 1.0), c_deriv * gp)
    dvs = tau * np.abs(v[el] - v[ek])
    return (
        _scatter_sym(n, ek, el, w),
        _scatter_sym(n, ek, el, dvs),
        _scatter_sym(n, ek, el, tau),
    )
