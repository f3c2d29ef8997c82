"""Quadrature rules on momentum space R^3.

A grid is a product of a radial rule (composite Gauss-Legendre panels) with
an angular rule (Gauss-Legendre in cos(theta) times a uniform azimuthal
rule).  Every integral over k in the package is a weighted sum over the
nodes of one of these grids.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.polynomial.legendre import leggauss

# inner radius of the log layout when no infrared cutoff is given, relative to k_max
LOG_FLOOR = 1e-6


class ModeGrid:
    """Immutable set of momentum nodes with positive quadrature weights.

    Attributes
    ----------
    nodes : (n, 3) ndarray
        Momentum vectors.
    weights : (n,) ndarray
        Weight of each node (d^3k measure).
    sigma_ir, k_max : float
        Radial range covered by the nodes.
    """

    def __init__(self, nodes, weights, sigma_ir, k_max, radial_count=0,
                 angular_count=0, azimuth_count=0, params=None):
        nodes = np.array(nodes, dtype=float, copy=True).reshape(-1, 3)
        weights = np.array(weights, dtype=float, copy=True).reshape(-1)
        if nodes.shape[0] != weights.shape[0]:
            raise ValueError("nodes and weights differ in length")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        knorm = np.linalg.norm(nodes, axis=1)
        if np.any(knorm <= 0):
            raise ValueError("a node sits at k = 0")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        knorm.setflags(write=False)
        self.nodes = nodes
        self.weights = weights
        self.knorm = knorm
        self.kappa = nodes / knorm[:, None]
        self.kappa.setflags(write=False)
        self.sigma_ir = float(sigma_ir)
        self.k_max = float(k_max)
        self.radial_count = int(radial_count)
        self.angular_count = int(angular_count)
        self.azimuth_count = int(azimuth_count)
        self.params = dict(params or {})
        h = hashlib.sha256()
        h.update(nodes.tobytes())
        h.update(weights.tobytes())
        self.key = h.hexdigest()

    @classmethod
    def from_nodes(cls, nodes, weights, sigma_ir=0.0):
        """Grid from explicit nodes, used for the few-mode oracle comparisons."""
        knorm = np.linalg.norm(np.asarray(nodes, dtype=float).reshape(-1, 3), axis=1)
        return cls(nodes, weights, sigma_ir, knorm.max(),
                   params={"explicit_nodes": len(knorm)})

    def __len__(self):
        return self.weights.shape[0]

    def __repr__(self):
        return (f"ModeGrid(n={len(self)}, sigma_ir={self.sigma_ir:g}, "
                f"k_max={self.k_max:g})")

    def same_as(self, other):
        return self is other or self.key == other.key

    @property
    def shell_volume(self):
        return 4.0 * np.pi / 3.0 * (self.k_max**3 - self.sigma_ir**3)


def _panel_points(count, max_order=8):
    """Split ``count`` nodes into equal Gauss-Legendre panels."""
    for order in range(min(max_order, count), 0, -1):
        if count % order == 0:
            return count // order, order
    return count, 1


def radial_rule(sigma_ir, k_max, count, layout="log"):
    """Radial nodes r_i and weights w_i with sum w_i f(r_i) ~ int f(r) r^2 dr."""
    npan, order = _panel_points(count)
    x, w = leggauss(order)
    if layout == "linear":
        edges = np.linspace(sigma_ir, k_max, npan + 1)
        a, b = edges[:-1, None], edges[1:, None]
        r = 0.5 * (b - a) * x + 0.5 * (b + a)
        wr = 0.5 * (b - a) * w * r**2
        return r.ravel(), wr.ravel()
    if layout != "log":
        raise ValueError(f"unknown radial layout {layout!r}")

    inner = sigma_ir if sigma_ir > 0 else k_max * LOG_FLOOR
    r_parts, w_parts = [], []
    if sigma_ir == 0:
        # one linear panel closes the ball [0, inner]; it never touches r = 0
        if npan > 1:
            npan -= 1
            x0, w0 = x, w
        else:
            x0, w0 = leggauss(count // 2)
            x, w = leggauss(count - count // 2)
        r0 = 0.5 * inner * (x0 + 1.0)
        r_parts.append(r0)
        w_parts.append(0.5 * inner * w0 * r0**2)
    # Gauss-Legendre in u = ln r, so dr = r du
    edges = np.linspace(np.log(inner), np.log(k_max), npan + 1)
    a, b = edges[:-1, None], edges[1:, None]
    u = 0.5 * (b - a) * x + 0.5 * (b + a)
    r = np.exp(u)
    r_parts.append(r.ravel())
    w_parts.append((0.5 * (b - a) * w * r**3).ravel())
    return np.concatenate(r_parts), np.concatenate(w_parts)


def build_grid(sigma_ir, k_max, radial_count, angular_count, radial_layout="log",
               azimuth_count=None):
    """Build the product quadrature on the shell sigma_ir <= |k| <= k_max.

    ``angular_count`` is the number of Gauss-Legendre nodes in cos(theta);
    ``azimuth_count`` (default ``2 * angular_count``) uniform azimuths.  An
    even azimuth count makes the node set symmetric under k -> -k.
    """
    sigma_ir = float(sigma_ir)
    k_max = float(k_max)
    if sigma_ir < 0:
        raise ValueError("sigma_ir must be non-negative")
    if not sigma_ir < k_max:
        raise ValueError(f"empty momentum shell: sigma_ir={sigma_ir} >= k_max={k_max}")
    if azimuth_count is None:
        azimuth_count = 2 * angular_count
    if min(radial_count, angular_count, azimuth_count) < 1:
        raise ValueError("node counts must be >= 1")
    if radial_layout == "log" and sigma_ir == 0 and radial_count < 2:
        raise ValueError("log layout with sigma_ir = 0 needs radial_count >= 2")

    r, wr = radial_rule(sigma_ir, k_max, radial_count, radial_layout)
    c, wc = leggauss(angular_count)
    phi = 2.0 * np.pi * (np.arange(azimuth_count) + 0.5) / azimuth_count
    wphi = np.full(azimuth_count, 2.0 * np.pi / azimuth_count)

    s = np.sqrt(1.0 - c**2)
    dirs = np.stack([
        s[:, None] * np.cos(phi)[None, :],
        s[:, None] * np.sin(phi)[None, :],
        np.broadcast_to(c[:, None], (angular_count, azimuth_count)),
    ], axis=-1).reshape(-1, 3)
    wdir = (wc[:, None] * wphi[None, :]).ravel()

    nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * wdir[None, :]).ravel()
    params = {
        "sigma_ir": sigma_ir, "k_max": k_max, "radial_count": int(radial_count),
        "angular_count": int(angular_count), "azimuth_count": int(azimuth_count),
        "radial_layout": radial_layout,
    }
    return ModeGrid(nodes, weights, sigma_ir, k_max, radial_count, angular_count,
                    azimuth_count, params)


def _check_len(grid, f):
    f = np.asarray(f)
    if f.shape[-1] != len(grid):
        raise ValueError(f"expected {len(grid)} node values, got {f.shape[-1]}")
    return f


def quad_integrate(grid, f):
    """Sum_i w_i f(k_i); ``f`` may carry leading batch axes."""
    f = _check_len(grid, f)
    return f @ grid.weights


def l2_inner(grid, f, g):
    """<f, g> in L^2(R^3), antilinear in ``f``."""
    f = _check_len(grid, f)
    g = _check_len(grid, g)
    if f.shape != g.shape:
        raise ValueError("f and g differ in shape")
    return (np.conj(f) * g) @ grid.weights


def l2_norm_sq(grid, f):
    f = _check_len(grid, f)
    return float((np.abs(f) ** 2) @ grid.weights)
