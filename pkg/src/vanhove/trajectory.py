"""Prescribed C^4 (in fact C^infinity) source trajectories.

A trajectory is a fixed start point plus a sum of scalar profiles times
constant direction vectors.  Profiles return their value and first four
time derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_ORDER = 4

_GL_X, _GL_W = leggauss(64)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _bump(u):
    """exp(-1/(u(1-u))) on (0, 1), zero elsewhere."""
    u = np.asarray(u, dtype=float)
    p = u * (1.0 - u)
    out = np.zeros_like(p)
    m = p > 0
    out[m] = np.exp(-1.0 / p[m])
    return out


def _bump_integral(u):
    u = np.asarray(u, dtype=float)
    return u * (_bump(u[..., None] * _GL_X) @ _GL_W)


_BUMP_TOTAL = float(_bump_integral(np.array(1.0)))


def smoothstep(u, order=0):
    """Monotone step s(u) from 0 (u <= 0) to 1 (u >= 1), flat to all orders at the ends.

    s(u) = S(u) / S(1) with S(u) = int_0^u exp(-1/(v(1-v))) dv.
    """
    if order > MAX_ORDER or order < 0:
        raise ValueError(f"derivative order {order} not in 0..{MAX_ORDER}")
    u = np.asarray(u, dtype=float)
    if order == 0:
        inside = np.clip(u, 0.0, 1.0)
        return np.where(u >= 1.0, 1.0, _bump_integral(inside) / _BUMP_TOTAL)

    p = u * (1.0 - u)
    out = np.zeros_like(p)
    # below p = 2e-3 the bump is < 1e-217 and every derivative is negligible
    m = p > 2e-3
    if not np.any(m):
        return out
    pm = p[m]
    dp = 1.0 - 2.0 * u[m]
    b = np.exp(-1.0 / pm)
    q1 = dp / pm**2
    if order == 1:
        val = b
    elif order == 2:
        val = q1 * b
    else:
        q2 = (-2.0 * pm - 2.0 * dp**2) / pm**3
        if order == 3:
            val = (q2 + q1**2) * b
        else:
            q3 = (12.0 * pm * dp + 6.0 * dp**3) / pm**4
            val = (q3 + 3.0 * q1 * q2 + q1**3) * b
    out[m] = val / _BUMP_TOTAL
    return out


def _derivs(fn, t):
    return np.stack([fn(t, n) for n in range(MAX_ORDER + 1)])


def _leibniz(f, g):
    """Derivatives 0..4 of a product from stacked derivatives of the factors."""
    binom = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1], [1, 4, 6, 4, 1]]
    return np.stack([sum(c * f[j] * g[n - j] for j, c in enumerate(binom[n]))
                     for n in range(MAX_ORDER + 1)])


@dataclass(frozen=True)
class Ramp:
    """smoothstep((t - t0) / duration)."""
    t0: float
    duration: float

    def derivs(self, t):
        u = (np.asarray(t, dtype=float) - self.t0) / self.duration
        return np.stack([smoothstep(u, n) / self.duration**n for n in range(MAX_ORDER + 1)])

    @property
    def support(self):
        return (self.t0, self.t0 + self.duration)


@dataclass(frozen=True)
class WindowedSine:
    """sin(omega (t - t0) + phase) times a window that ramps up on
    [t0, t0 + ramp] and down on [t0 + duration - ramp, t0 + duration]."""
    t0: float
    duration: float
    omega: float
    ramp: float
    phase: float = 0.0

    def derivs(self, t):
        t = np.asarray(t, dtype=float)
        arg = self.omega * (t - self.t0) + self.phase
        sine = np.stack([self.omega**n * np.sin(arg + n * np.pi / 2) for n in range(MAX_ORDER + 1)])
        up = (t - self.t0) / self.ramp
        down = (self.t0 + self.duration - t) / self.ramp
        w_up = np.stack([smoothstep(up, n) / self.ramp**n for n in range(MAX_ORDER + 1)])
        w_dn = np.stack([smoothstep(down, n) * (-1.0 / self.ramp) ** n
                         for n in range(MAX_ORDER + 1)])
        return _leibniz(sine, _leibniz(w_up, w_dn))

    @property
    def support(self):
        return (self.t0, self.t0 + self.duration)


@dataclass(frozen=True)
class Trajectory:
    """x(t) = start + sum_c direction_c * profile_c(t)."""
    start: tuple
    terms: tuple = field(default_factory=tuple)
    kind: str = "rest"

    def __call__(self, t, order=0):
        return trajectory_eval(self, t, order)

    @property
    def motion_support(self):
        """Smallest interval outside of which the source is at rest (None if never moving)."""
        if not self.terms:
            return None
        lo = min(p.support[0] for _, p in self.terms)
        hi = max(p.support[1] for _, p in self.terms)
        return (lo, hi)


def trajectory_eval(traj, t, order=0):
    """Position (order 0) or n-th time derivative; shape t.shape + (3,)."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"derivative order {order} not in 0..{MAX_ORDER}")
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (3,))
    if order == 0:
        out += np.asarray(traj.start, dtype=float)
    for direction, profile in traj.terms:
        out += profile.derivs(t)[order][..., None] * np.asarray(direction, dtype=float)
    return out


def rest(point):
    return Trajectory(tuple(map(float, point)), (), "rest")


def smoothstep_translation(start, displacement, t0=0.0, duration=1.0):
    return Trajectory(tuple(map(float, start)),
                      ((tuple(map(float, displacement)), Ramp(float(t0), float(duration))),),
                      "smoothstep_translation")


def oscillation(center, amplitude, omega, t0=0.0, duration=1.0, ramp=None, phase=0.0):
    """Sinusoidal oscillation along ``amplitude`` switched on and off smoothly."""
    if ramp is None:
        ramp = duration / 3.0
    if 2 * ramp > duration:
        raise ValueError("ramps longer than the oscillation window")
    prof = WindowedSine(float(t0), float(duration), float(omega), float(ramp), float(phase))
    return Trajectory(tuple(map(float, center)), ((tuple(map(float, amplitude)), prof),),
                      "oscillation")


def composite(*trajs):
    start = np.sum([np.asarray(tr.start) for tr in trajs], axis=0)
    terms = tuple(term for tr in trajs for term in tr.terms)
    return Trajectory(tuple(map(float, start)), terms, "composite")
