"""Transverse Kahler-Ricci flow on the basic potential.

The potential-level equation is

    d phi / dt = log det(h + phi_{,j lbar}) - log det h + 6 phi (+ source)

with ``h`` the transverse metric of the base potential. ``source`` is an
optional time-independent pluriharmonic term (default none). Any such term
leaves the metric-level flow ``d g^T / dt = -Ric^T + 6 g^T`` unchanged, so it
records the freedom of the potential equation; the plain equation is the
``source=None`` case.

For pluriharmonic initial data the determinant terms cancel and each point
evolves by ``d phi / dt = 6 phi (+ source)`` independently. Otherwise
:func:`integrate_flow` evolves a tensor grid in ``(theta1, phi1, theta2,
phi2)`` and recomputes the complex Hessian by finite differences each stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import jets
from .coords import (
    TWO_PI,
    ChartDomain,
    ComplexPoint,
    as_points,
    complex_array,
    complex_point,
    real_array,
    sample_array,
)
from .deform import BasicFunction, pluriharmonic_residual
from .sasaki import TRANSVERSE_EINSTEIN_CONSTANT, SasakiPotential, TransverseMetric, standard_potential
from .tensor import kahler_ricci_2d

RATE = 6.0  # 2n + 2
PLURIHARMONIC_TOL = 1e-9
MAX_LOCAL_ERROR = 1e-6
INTEGRATORS = ("rk4", "euler")
_ORDER = {"rk4": 4, "euler": 1}


class FlowError(ArithmeticError):
    pass


class ConeExitError(FlowError):
    """``h + phi_{,j lbar}`` stopped being positive-definite."""

    def __init__(self, message: str, point=None, t: float | None = None, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.point = point
        self.t = t
        self.min_eigenvalue = min_eigenvalue


class StepRejectedError(FlowError):
    def __init__(self, message: str, t: float, estimate: float):
        super().__init__(message)
        self.t = t
        self.estimate = estimate


def _probe_points() -> np.ndarray:
    return sample_array(ChartDomain(0.2), 16, 0)


def is_pluriharmonic(phi: BasicFunction, points=None, tol: float = PLURIHARMONIC_TOL) -> bool:
    pts = _probe_points() if points is None else as_points(points)
    return bool(pluriharmonic_residual(phi, pts, "closed").max() < tol) and bool(
        pluriharmonic_residual(phi, pts, "jets").max() < tol
    )


# residuals -----------------------------------------------------------------------


def _logdet(H: np.ndarray) -> np.ndarray:
    det = (H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]).real
    return np.log(det)


def check_cone(H: np.ndarray, where=None, t: float | None = None) -> None:
    """Raise :class:`ConeExitError` unless every Hermitian 2x2 in ``H`` is positive-definite."""
    lam = np.linalg.eigvalsh(H)[..., 0]
    if np.any(~(lam > 0)):
        idx = np.unravel_index(int(np.argmin(np.where(np.isnan(lam), -np.inf, lam))), lam.shape)
        pt = None if where is None else np.asarray(where)[idx]
        raise ConeExitError(
            f"transverse metric left the positive cone at index {idx} (t={t}): min eigenvalue {lam[idx]:.3e}",
            point=pt,
            t=t,
            min_eigenvalue=float(lam[idx]),
        )


def flow_rhs(phi: BasicFunction, q, K: SasakiPotential | None = None, source: BasicFunction | None = None,
             method: str = "jets", t: float | None = None) -> np.ndarray:
    """Right-hand side of the potential equation for the potential ``phi`` at ``q``."""
    K = K or standard_potential()
    q = complex_point(q)
    h = K.complex_hessian(q)
    H = h + phi.complex_hessian(q, method)
    check_cone(H, q.w, t)
    out = _logdet(H) - _logdet(h) + RATE * phi.at(q)
    if source is not None:
        out = out + source.at(q)
    return out


def flow_residual(phi_t: BasicFunction, dphi_dt: BasicFunction, q, K: SasakiPotential | None = None,
                  source: BasicFunction | None = None, method: str = "jets") -> np.ndarray:
    """``|d phi/dt - log det(h + phi_{,j lbar}) + log det h - 6 phi|`` at each point."""
    return np.abs(dphi_dt.at(q) - flow_rhs(phi_t, q, K, source, method))


def metric_flow_residual(K: SasakiPotential | None, phi_t: BasicFunction, dphi_dt: BasicFunction, q) -> np.ndarray:
    """Max entry of ``d g^T/dt + Ric^T - 6 g^T`` with ``g^T(t) = h + phi_{,j lbar}``."""
    K = K or standard_potential()
    q = complex_point(q)
    gt = TransverseMetric(lambda z: jets.object_array(K.hess(z)) + jets.object_array(phi_t.hess(z)))
    g_now = gt.at(q)
    check_cone(np.broadcast_to(g_now, q.w.shape[:-1] + (2, 2)), q.w)
    ric = kahler_ricci_2d(gt, q)
    dg = dphi_dt.complex_hessian(q, "jets")
    r = dg + ric - TRANSVERSE_EINSTEIN_CONSTANT * g_now
    return np.abs(r).max(axis=(-2, -1))


# analytic family ------------------------------------------------------------------


def flow_coefficient(t: float) -> float:
    return math.expm1(RATE * t)


def analytic_solution(phi0: BasicFunction, t: float) -> BasicFunction:
    """``(e^{6t} - 1) phi0`` for pluriharmonic ``phi0``."""
    if not is_pluriharmonic(phi0):
        raise ValueError(f"{phi0.name} is not pluriharmonic; the scaling family does not apply")
    return phi0.scaled(flow_coefficient(t), f"(e^(6t)-1)*{phi0.name}@t={t:g}")


def analytic_rate(phi0: BasicFunction, t: float) -> BasicFunction:
    return phi0.scaled(RATE * math.exp(RATE * t), f"6e^(6t)*{phi0.name}@t={t:g}")


@dataclass(frozen=True)
class FlowState:
    """The scaling family ``(e^{6t} - 1) phi0`` at time ``t``."""

    phi0: BasicFunction
    t: float = 0.0

    @property
    def phi(self) -> BasicFunction:
        return analytic_solution(self.phi0, self.t)

    @property
    def rate(self) -> BasicFunction:
        return analytic_rate(self.phi0, self.t)

    def residual(self, q, K: SasakiPotential | None = None, source: BasicFunction | None = None) -> np.ndarray:
        return flow_residual(self.phi, self.rate, q, K, source)

    def metric_residual(self, q, K: SasakiPotential | None = None) -> np.ndarray:
        return metric_flow_residual(K, self.phi, self.rate, q)


def residual_consistency(state: FlowState, q, K: SasakiPotential | None = None) -> dict[str, float]:
    """Measured ratio between the metric-level and potential-level residuals.

    Diagnostic only: ``ratio = max(metric) / max(potential)`` over ``q``.
    """
    pot = state.residual(q, K)
    met = state.metric_residual(q, K)
    pmax, mmax = float(pot.max()), float(met.max())
    return {"potential": pmax, "metric": mmax, "ratio": mmax / pmax if pmax > 0 else math.inf if mmax > 0 else 0.0}


# tensor grid ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorGrid:
    """Product grid in ``(theta1, phi1, theta2, phi2)``; ``psi`` is irrelevant for basic data."""

    theta1: np.ndarray
    phi1: np.ndarray
    theta2: np.ndarray
    phi2: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (len(self.theta1), len(self.phi1), len(self.theta2), len(self.phi2))

    def points(self) -> np.ndarray:
        T1, P1, T2, P2 = np.meshgrid(self.theta1, self.phi1, self.theta2, self.phi2, indexing="ij")
        return np.stack([np.zeros_like(T1), T1, P1, T2, P2], axis=-1)

    def axes(self) -> list[np.ndarray]:
        """Coordinates ``(a1, phi1, a2, phi2)`` with ``a = log tan(theta/2) = Re log w``."""
        return [np.log(np.tan(0.5 * self.theta1)), self.phi1, np.log(np.tan(0.5 * self.theta2)), self.phi2]


def tensor_grid(n1: int = 16, n2: int = 3, eps: float = 0.1, centre: tuple[float, float] = (math.pi / 2, math.pi / 2),
                spacing: float = 0.05) -> TensorGrid:
    """``n1 x n1`` on the first sphere, ``n2 x n2`` patch around ``centre`` on the second.

    ``theta1`` is uniform in ``log tan(theta1/2)`` between the pole margins
    ``eps``; ``phi1`` stays ``eps`` away from the cut at ``0``.
    """
    if n1 < 3 or n2 < 3:
        raise ValueError("finite differences need at least three points per axis")
    a_lo, a_hi = math.log(math.tan(eps / 2)), math.log(math.tan((math.pi - eps) / 2))
    off = spacing * (np.arange(n2) - (n2 - 1) / 2)
    return TensorGrid(
        2.0 * np.arctan(np.exp(np.linspace(a_lo, a_hi, n1))),
        np.linspace(eps, TWO_PI - eps, n1),
        centre[0] + off,
        centre[1] + off,
    )


def grid_complex_hessian(values: np.ndarray, grid: TensorGrid) -> np.ndarray:
    """``phi_{,j lbar}`` from second-order finite differences on the grid."""
    axes = grid.axes()
    d1 = np.gradient(values, *axes, edge_order=2)
    d2 = [np.gradient(d, *axes, edge_order=2) for d in d1]  # d2[i][k] = d_k d_i phi
    w = complex_array(grid.points())
    H = np.empty(values.shape + (2, 2), dtype=complex)
    for j in range(2):
        for l in range(2):
            aj, fj, al, fl = 2 * j, 2 * j + 1, 2 * l, 2 * l + 1
            dd = 0.25 * (d2[aj][al] + d2[fj][fl] + 1j * (d2[aj][fl] - d2[fj][al]))
            H[..., j, l] = dd / (w[..., j] * np.conj(w[..., l]))
    return H


# integrator ------------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowConfig:
    dt: float = 1e-3
    t_end: float = 0.5
    integrator: str = "rk4"
    grid: object = None
    max_local_error: float | None = MAX_LOCAL_ERROR

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end!r}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")


@dataclass
class FlowSeries:
    times: np.ndarray
    values: np.ndarray  # (n_times,) + grid shape
    points: np.ndarray  # grid shape + (5,)
    phi0: BasicFunction
    pointwise: bool
    max_error_estimate: float = 0.0
    source: BasicFunction | None = field(default=None, repr=False)

    def reference(self) -> np.ndarray | None:
        """``(e^{6t} - 1) phi0`` on the grid when ``phi0`` is pluriharmonic."""
        if not self.pointwise:
            return None
        base = self.phi0.at_real(self.points)
        return np.stack([flow_coefficient(t) * base for t in self.times])

    def records(self) -> Iterator[dict]:
        ref = self.reference()
        flat_pts = self.points.reshape(-1, 5)
        for k, t in enumerate(self.times):
            vals = self.values[k].reshape(-1)
            res = None if ref is None else np.abs(vals - ref[k].reshape(-1))
            for i, p in enumerate(flat_pts):
                yield {
                    "t": float(t),
                    "point": [float(v) for v in p],
                    "phi": float(vals[i]),
                    "residual": None if res is None else float(res[i]),
                }


def _step(f, y, t, dt, integrator):
    if integrator == "euler":
        return y + dt * f(t, y)
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _grid_points(grid) -> np.ndarray:
    if grid is None:
        return tensor_grid().points()
    if isinstance(grid, TensorGrid):
        return grid.points()
    if isinstance(grid, ComplexPoint):
        return real_array(grid.w, grid.psi)
    if isinstance(grid, (list, tuple)) and grid and isinstance(grid[0], ComplexPoint):
        return real_array(np.stack([q.w for q in grid]), [q.psi for q in grid])
    return as_points(grid)


def integrate_flow(phi0: BasicFunction, cfg: FlowConfig | None = None, K: SasakiPotential | None = None,
                   source: BasicFunction | None = None) -> FlowSeries:
    """Evolve ``phi(0) = phi0`` under the potential equation.

    Pluriharmonic data (with a pluriharmonic or absent ``source``) evolve
    pointwise on any set of points. Other data need a :class:`TensorGrid`.
    Every step is checked by step doubling; an estimated local error above
    ``cfg.max_local_error`` (relative to ``max(1, |phi|)``) raises
    :class:`StepRejectedError`.
    """
    cfg = cfg or FlowConfig()
    K = K or standard_potential()
    pointwise = is_pluriharmonic(phi0) and (source is None or is_pluriharmonic(source))
    if not pointwise and cfg.grid is not None and not isinstance(cfg.grid, TensorGrid):
        raise ValueError("non-pluriharmonic data need a TensorGrid for the spatial Hessian")
    grid = cfg.grid if cfg.grid is not None or pointwise else tensor_grid()
    pts = _grid_points(grid)
    y = phi0.at_real(pts)
    src = np.zeros_like(y) if source is None else source.at_real(pts)

    if pointwise:
        # phi stays pluriharmonic, so log det(h + phi_{,j lbar}) - log det h = 0
        def f(t, v):
            return RATE * v + src
    else:
        assert isinstance(grid, TensorGrid)
        h = K.complex_hessian(pts)
        logdet_h = _logdet(h)

        def f(t, v):
            H = h + grid_complex_hessian(v, grid)
            check_cone(H, pts, t)
            return _logdet(H) - logdet_h + RATE * v + src

    n_full = int(math.floor(cfg.t_end / cfg.dt + 1e-9))
    steps = [cfg.dt] * n_full
    rest = cfg.t_end - n_full * cfg.dt
    if rest > 1e-12 * max(1.0, cfg.t_end):
        steps.append(rest)
    times = [0.0]
    values = [y]
    t = 0.0
    worst = 0.0
    p = _ORDER[cfg.integrator]
    for dt in steps:
        full = _step(f, y, t, dt, cfg.integrator)
        if cfg.max_local_error is not None:
            half = _step(f, _step(f, y, t, dt / 2, cfg.integrator), t + dt / 2, dt / 2, cfg.integrator)
            est = float(np.max(np.abs(half - full) / np.maximum(1.0, np.abs(half)))) / (2**p - 1)
            worst = max(worst, est)
            if est > cfg.max_local_error:
                raise StepRejectedError(
                    f"{cfg.integrator} step at t={t:.6g} with dt={dt:g}: local error estimate {est:.3e} "
                    f"exceeds {cfg.max_local_error:g}",
                    t,
                    est,
                )
        y = full
        t = t + dt
        times.append(t)
        values.append(y)
    return FlowSeries(np.array(times), np.stack(values), pts, phi0, pointwise, worst, source)


def relative_error(series: FlowSeries, exact) -> float:
    """``max_t max_x |phi_num - exact| / max_t max_x |exact|`` for an array or ``exact(t, points)``."""
    ref = exact if isinstance(exact, np.ndarray) else np.stack([exact(t, series.points) for t in series.times])
    scale = float(np.abs(ref).max())
    err = float(np.abs(series.values - ref).max())
    if scale == 0.0:
        return err
    return err / scale


def exponential_solution(phi0: BasicFunction, source: BasicFunction | None = None):
    """Exact solution ``e^{6t} phi0 + (e^{6t} - 1) source / 6`` of the pointwise equation."""

    def exact(t, points):
        out = math.exp(RATE * t) * phi0.at_real(points)
        if source is not None:
            out = out + flow_coefficient(t) / RATE * source.at_real(points)
        return out

    return exact


__all__ = [
    "ConeExitError",
    "FlowConfig",
    "FlowError",
    "FlowSeries",
    "FlowState",
    "StepRejectedError",
    "TensorGrid",
    "analytic_rate",
    "analytic_solution",
    "check_cone",
    "exponential_solution",
    "flow_coefficient",
    "flow_residual",
    "flow_rhs",
    "grid_complex_hessian",
    "integrate_flow",
    "is_pluriharmonic",
    "metric_flow_residual",
    "relative_error",
    "residual_consistency",
    "tensor_grid",
]
