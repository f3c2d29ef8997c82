"""Filon-type rules for int exp(i omega s) g(s) ds on a single panel.

g is replaced by its polynomial interpolant through the panel samples and the
product with the exponential is integrated exactly, so the rule loses no
accuracy when omega * h is large.  All weights are functions of
theta = omega * h only and are computed on the reference panel [0, 1].
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np
from numpy.polynomial.legendre import leggauss

# |theta| below which the power series replaces the unstable upward recursion
SERIES_CUTOFF = 4.0
_SERIES_TERMS = 64


def moments(theta, pmax):
    """mu_p(theta) = int_0^1 u^p exp(i theta u) du for p = 0..pmax; shape theta.shape + (pmax+1,)."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty(theta.shape + (pmax + 1,), dtype=complex)
    small = np.abs(theta) < SERIES_CUTOFF

    if np.any(small):
        ts = theta[small]
        n = np.arange(_SERIES_TERMS)
        coef = np.array([1.0 / factorial(k) for k in n])
        powers = (1j * ts[..., None]) ** n * coef
        for p in range(pmax + 1):
            out[small, p] = powers @ (1.0 / (n + p + 1.0))

    big = ~small
    if np.any(big):
        tb = theta[big]
        e = np.exp(1j * tb)
        it = 1j * tb
        mu = (e - 1.0) / it
        out[big, 0] = mu
        for p in range(1, pmax + 1):
            mu = (e - p * mu) / it
            out[big, p] = mu
    return out


@lru_cache(maxsize=32)
def _inverse_vandermonde(nodes):
    u = np.asarray(nodes, dtype=float)
    vander = u[:, None] ** np.arange(len(u))[None, :]
    return np.linalg.inv(vander)


def panel_weights(theta, nodes=(0.0, 1 / 3, 2 / 3, 1.0)):
    """Weights w_a(theta) with int_0^1 exp(i theta u) p(u) du = sum_a w_a p(u_a)."""
    vinv = _inverse_vandermonde(tuple(float(x) for x in nodes))
    return moments(theta, len(nodes) - 1) @ vinv


def triangle_weights(theta, nodes=(0.0, 1 / 3, 2 / 3, 1.0), gl_points=None):
    """Weights T_ab(theta) for the ordered double integral

        int_0^1 du int_0^u du' exp(-i theta (u - u')) p(u) q(u') = sum_ab p(u_a) T_ab q(u_b).

    The inner integral is done in closed form through ``moments``; the outer
    one by Gauss-Legendre with enough points to resolve exp(-i theta u).
    """
    theta = np.asarray(theta, dtype=float)
    nn = len(nodes)
    vinv = _inverse_vandermonde(tuple(float(x) for x in nodes))
    tmax = float(np.max(np.abs(theta))) if theta.size else 0.0
    if gl_points is None:
        gl_points = 40 + 2 * int(np.ceil(tmax))
    x, w = leggauss(gl_points)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    tu = theta[..., None] * u                       # (..., G)
    inner = moments(tu, nn - 1)                     # (..., G, nn): mu_q(theta u)
    inner = inner * u[:, None] ** (np.arange(nn) + 1.0)   # J_q(u) = u^{q+1} mu_q(theta u)
    outer = np.exp(-1j * tu)[..., None] * (u[:, None] ** np.arange(nn))   # (..., G, nn)
    m = np.einsum("...gp,...gq,g->...pq", outer, inner, w)
    return np.einsum("pa,...pq,qb->...ab", vinv, m, vinv)


def oscillatory_panel_integral(omega, s, g):
    """int_{s_0}^{s_-1} exp(i omega s) g(s) ds from samples (s_i, g_i) of one panel."""
    s = np.asarray(s, dtype=float)
    g = np.asarray(g, dtype=complex)
    if s.size < 2 or s.shape != g.shape:
        raise ValueError("need at least two samples with matching shapes")
    a, h = s[0], s[-1] - s[0]
    if h <= 0:
        raise ValueError("panel samples must be increasing")
    u = tuple((s - a) / h)
    w = panel_weights(np.asarray(omega * h), u)
    return complex(h * np.exp(1j * omega * a) * (w @ g))
