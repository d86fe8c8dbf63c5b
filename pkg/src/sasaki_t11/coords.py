"""Charts on T^{1,1}: real angles, transverse complex coordinates, frames, sampling.

Real coordinates are ordered ``(psi, theta1, phi1, theta2, phi2)``. The
transverse complex coordinates are ``w^j = tan(theta_j / 2) exp(i phi_j)``.

Most helpers here are written against "coordinate tuples": sequences of
five entries that may be floats, arrays of sample points or
:class:`~sasaki_t11.jets.Jet` objects, so the same expressions serve plain
evaluation and exact differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import jets

PSI, THETA1, PHI1, THETA2, PHI2 = range(5)
THETA = (THETA1, THETA2)
PHI = (PHI1, PHI2)
COORD_NAMES = ("psi", "theta1", "phi1", "theta2", "phi2")

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


class DomainError(ValueError):
    """A point lies outside the open chart (poles, w = 0)."""


def _wrap(x: float, period: float) -> float:
    r = math.fmod(x, period)
    if r < 0:
        r += period
    return 0.0 if r >= period else r


@dataclass(frozen=True)
class RealPoint:
    psi: float
    theta1: float
    phi1: float
    theta2: float
    phi2: float

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            t = float(getattr(self, name))
            if not 0.0 < t < math.pi:
                raise DomainError(f"{name}={t!r} outside the open interval (0, pi)")
            object.__setattr__(self, name, t)
        object.__setattr__(self, "psi", _wrap(float(self.psi), FOUR_PI))
        object.__setattr__(self, "phi1", _wrap(float(self.phi1), TWO_PI))
        object.__setattr__(self, "phi2", _wrap(float(self.phi2), TWO_PI))

    def as_array(self) -> np.ndarray:
        return np.array([self.psi, self.theta1, self.phi1, self.theta2, self.phi2])

    @classmethod
    def from_array(cls, a) -> "RealPoint":
        a = np.asarray(a, dtype=float)
        if a.shape != (5,):
            raise ValueError(f"expected 5 coordinates, got shape {a.shape}")
        return cls(*map(float, a))


@dataclass(frozen=True)
class ComplexPoint:
    """A point in the ``(psi, w1, w2)`` chart. Fields may hold arrays for batches."""

    w1: complex
    w2: complex
    psi: float = 0.0

    @property
    def w(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(np.asarray(self.w1, complex), np.asarray(self.w2, complex)), axis=-1)

    @classmethod
    def from_array(cls, w, psi=0.0) -> "ComplexPoint":
        w = np.asarray(w, dtype=complex)
        return cls(w[..., 0], w[..., 1], psi)


@dataclass(frozen=True)
class ChartDomain:
    eps_theta: float = 0.1
    exclude_w_zero: bool = True

    def __post_init__(self):
        if not 0.0 < self.eps_theta < math.pi / 2:
            raise ValueError(f"eps_theta must lie in (0, pi/2), got {self.eps_theta!r}")

    def contains(self, p: RealPoint) -> bool:
        lo, hi = self.eps_theta, math.pi - self.eps_theta
        return lo <= p.theta1 <= hi and lo <= p.theta2 <= hi


def as_points(p) -> np.ndarray:
    """Coerce a RealPoint, a list of them, or an array to an ``(..., 5)`` array."""
    if isinstance(p, RealPoint):
        return p.as_array()
    if isinstance(p, (list, tuple)) and p and isinstance(p[0], RealPoint):
        return np.array([q.as_array() for q in p])
    a = np.asarray(p, dtype=float)
    if a.shape[-1:] != (5,):
        raise ValueError(f"points must have 5 trailing coordinates, got shape {a.shape}")
    return a


# conversions ---------------------------------------------------------------------


def to_complex(p: RealPoint, dom: ChartDomain | None = None) -> ComplexPoint:
    if dom is not None and not dom.contains(p):
        raise DomainError(f"{p} is within eps_theta={dom.eps_theta} of a pole")
    w1 = math.tan(p.theta1 / 2) * complex(math.cos(p.phi1), math.sin(p.phi1))
    w2 = math.tan(p.theta2 / 2) * complex(math.cos(p.phi2), math.sin(p.phi2))
    return ComplexPoint(w1, w2, p.psi)


def to_real(q: ComplexPoint) -> RealPoint:
    coords = []
    for w in (complex(q.w1), complex(q.w2)):
        r = abs(w)
        if r == 0.0:
            raise DomainError("w = 0 is outside the chart")
        coords += [2.0 * math.atan(r), _wrap(math.atan2(w.imag, w.real), TWO_PI)]
    return RealPoint(q.psi, *coords)


def complex_array(x) -> np.ndarray:
    """Batch version of :func:`to_complex`: ``(..., 5)`` reals -> ``(..., 2)`` complex."""
    x = as_points(x)
    return np.stack(
        [np.tan(x[..., t] / 2) * np.exp(1j * x[..., f]) for t, f in zip(THETA, PHI)], axis=-1
    )


def real_array(w, psi=0.0) -> np.ndarray:
    """Batch inverse of :func:`complex_array`; ``psi`` broadcasts."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise DomainError("w = 0 is outside the chart")
    r = np.abs(w)
    ang = np.mod(np.angle(w), TWO_PI)
    psi = np.broadcast_to(np.asarray(psi, dtype=float), r.shape[:-1])
    return np.stack([psi, 2 * np.arctan(r[..., 0]), ang[..., 0], 2 * np.arctan(r[..., 1]), ang[..., 1]], axis=-1)


# transverse holomorphic data ----------------------------------------------------------


class Holo(NamedTuple):
    """Transverse complex coordinates and their logarithms at a point (or jet)."""

    w: tuple
    wbar: tuple
    logw: tuple
    logwbar: tuple


def holo_from_real(x: Sequence) -> Holo:
    """``x`` is a coordinate tuple; the log branch is ``log tan(theta/2) + i phi``."""
    w, logw = [], []
    for t, f in zip(THETA, PHI):
        r = jets.tan(0.5 * x[t])
        w.append(r * jets.exp(1j * x[f]))
        logw.append(jets.log(r) + 1j * x[f])
    return Holo(tuple(w), tuple(jets.conj(v) for v in w), tuple(logw), tuple(jets.conj(v) for v in logw))


def _log_upper(w):
    # branch with arg in [0, 2pi), matching the canonical range of phi
    if isinstance(w, jets.Jet):
        base = jets.log(w)
        shift = np.where(base.val.imag < 0, 2j * math.pi, 0.0)
        return jets.Jet(base.val + shift, base.grad, base.hess)
    base = np.log(np.asarray(w, dtype=complex))
    return base + np.where(base.imag < 0, 2j * math.pi, 0.0)


def holo_from_cartesian(u: Sequence) -> Holo:
    """``u = (x1, y1, x2, y2)`` with ``w^j = x_j + i y_j``."""
    w = (u[0] + 1j * u[1], u[2] + 1j * u[3])
    logw = tuple(_log_upper(v) for v in w)
    return Holo(w, tuple(jets.conj(v) for v in w), logw, tuple(jets.conj(v) for v in logw))


def holo_from_complex(q: ComplexPoint) -> Holo:
    w = q.w
    if np.any(w == 0):
        raise DomainError("w = 0 is outside the chart")
    return holo_from_cartesian([w[..., 0].real, w[..., 0].imag, w[..., 1].real, w[..., 1].imag])


def cartesian_variables(q: ComplexPoint) -> list:
    w = q.w
    return jets.variables(np.stack([w[..., 0].real, w[..., 0].imag, w[..., 1].real, w[..., 1].imag], axis=-1))


def complex_point(q) -> ComplexPoint:
    """Accept a ComplexPoint, a RealPoint, or an ``(..., 5)`` array of real points."""
    if isinstance(q, ComplexPoint):
        return q
    if isinstance(q, RealPoint):
        return to_complex(q)
    x = as_points(q)
    return ComplexPoint.from_array(complex_array(x), x[..., PSI])


# frames ------------------------------------------------------------------------


def coframe(x: Sequence) -> np.ndarray:
    """Rows ``dw^j`` in the real coordinate basis (object array, shape (2, 5))."""
    E = jets.zeros((2, 5))
    for j, (t, f) in enumerate(zip(THETA, PHI)):
        half = 0.5 * x[t]
        phase = jets.exp(1j * x[f])
        E[j, t] = 0.5 / jets.cos(half) ** 2 * phase
        E[j, f] = 1j * jets.tan(half) * phase
    return E


def frame(x: Sequence) -> np.ndarray:
    """Vectors ``d/dw^j`` in the real coordinate basis (object array, shape (2, 5))."""
    F = jets.zeros((2, 5))
    for j, (t, f) in enumerate(zip(THETA, PHI)):
        lead = jets.cos(0.5 * x[t]) ** 2 * jets.exp(-1j * x[f])
        F[j, t] = lead
        F[j, f] = -1j * lead / jets.sin(x[t])
    return F


def complex_frame_in_real(p) -> np.ndarray:
    """Rows ``d/dw^1, d/dw^2, d/dwbar^1, d/dwbar^2`` as complex 5-vectors."""
    x = as_points(p)
    F = jets.values(frame([x[..., k] for k in range(5)]))
    return np.concatenate([F, np.conj(F)], axis=-2)


def coframe_in_real(p) -> np.ndarray:
    """Rows ``dw^1, dw^2, dwbar^1, dwbar^2`` as complex covectors."""
    x = as_points(p)
    E = jets.values(coframe([x[..., k] for k in range(5)]))
    return np.concatenate([E, np.conj(E)], axis=-2)


# sampling -------------------------------------------------------------------------


def sample_array(dom: ChartDomain, n: int, seed: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    lo, hi = dom.eps_theta, math.pi - dom.eps_theta
    cols = [
        rng.uniform(0.0, FOUR_PI, n),
        rng.uniform(lo, hi, n),
        rng.uniform(0.0, TWO_PI, n),
        rng.uniform(lo, hi, n),
        rng.uniform(0.0, TWO_PI, n),
    ]
    return np.stack(cols, axis=-1) if n else np.empty((0, 5))


def sample_points(dom: ChartDomain, n: int, seed: int) -> list[RealPoint]:
    return [RealPoint.from_array(row) for row in sample_array(dom, n, seed)]


def coordinate_tuple(x) -> list:
    x = as_points(x)
    return [x[..., k] for k in range(5)]
