"""Levi-Civita curvature of metric component fields.

The engine is dimension-agnostic. Metric components are closed-form
functions of a coordinate tuple; their first and second derivatives come
from second-order jets (exact to rounding) or, for cross-validation only,
from fourth-order central differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import jets
from .coords import ComplexPoint, as_points, cartesian_variables, holo_from_cartesian

RCOND_MIN = 1e-10
FD_STEP = 1e-3


class MetricError(ArithmeticError):
    """The metric cannot be inverted at a point."""


class SingularMetricError(MetricError):
    pass


class NotPositiveDefiniteError(MetricError):
    pass


class MetricField:
    """Symmetric ``dim x dim`` metric components as a function of a coordinate tuple.

    ``components(x)`` receives ``dim`` coordinate entries (floats, arrays or
    jets) and returns a nested list or object array of component
    expressions. Only the upper triangle is read; the lower one is mirrored,
    so the assembled matrix is exactly symmetric.
    """

    def __init__(self, components: Callable[[Sequence], object], dim: int = 5, name: str = "g"):
        self._components = components
        self.dim = dim
        self.name = name

    def __repr__(self) -> str:
        return f"MetricField({self.name!r}, dim={self.dim})"

    def components(self, x: Sequence) -> np.ndarray:
        raw = jets.object_array(self._components(x))
        if raw.shape != (self.dim, self.dim):
            raise ValueError(f"{self.name}: expected {self.dim}x{self.dim} components, got {raw.shape}")
        out = jets.zeros(raw.shape)
        for i in range(self.dim):
            for j in range(i, self.dim):
                out[i, j] = out[j, i] = raw[i, j]
        return out

    def _points(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float) if self.dim != 5 else as_points(points)
        if x.shape[-1] != self.dim:
            raise ValueError(f"points need {self.dim} coordinates")
        return x

    def __call__(self, points) -> np.ndarray:
        x = self._points(points)
        g = jets.values(self.components([x[..., k] for k in range(self.dim)])).real
        return np.broadcast_to(g, x.shape[:-1] + (self.dim, self.dim)).copy()

    def jet_derivatives(self, points):
        """``(g, dg, ddg)`` with ``dg[..., i, j, k] = d_k g_ij``, ``ddg[..., i, j, k, l]``."""
        x = self._points(points)
        val, grad, hess = jets.unpack(self.components(jets.variables(x)), self.dim)
        shape = x.shape[:-1] + (self.dim,) * 2
        return (
            np.broadcast_to(val.real, shape).copy(),
            np.broadcast_to(grad.real, shape + (self.dim,)).copy(),
            np.broadcast_to(hess.real, shape + (self.dim, self.dim)).copy(),
        )

    def fd_derivatives(self, points, step: float = FD_STEP):
        """Fourth-order central differences for the same triple as :meth:`jet_derivatives`."""
        x = self._points(points)
        n = self.dim
        h = step
        weights = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
        cache: dict[tuple, np.ndarray] = {}

        def at(*moves: tuple[int, int]) -> np.ndarray:
            key = tuple(sorted(moves))
            if key not in cache:
                y = x.copy()
                for k, s in moves:
                    y[..., k] += s * h
                cache[key] = self(y)
            return cache[key]

        g = at()
        dg = np.zeros(g.shape + (n,))
        ddg = np.zeros(g.shape + (n, n))
        for k in range(n):
            dg[..., k] = sum(w * at((k, s)) for s, w in weights.items()) / (12 * h)
            ddg[..., k, k] = (
                -at((k, 2)) + 16 * at((k, 1)) - 30 * g + 16 * at((k, -1)) - at((k, -2))
            ) / (12 * h * h)
            for l in range(k + 1, n):
                acc = sum(ws * wt * at((k, s), (l, t)) for s, ws in weights.items() for t, wt in weights.items())
                ddg[..., k, l] = ddg[..., l, k] = acc / (144 * h * h)
        return g, dg, ddg

    def derivatives(self, points, deriv: str = "jets", step: float = FD_STEP):
        if deriv == "jets":
            return self.jet_derivatives(points)
        if deriv == "fd":
            return self.fd_derivatives(points, step)
        raise ValueError(f"unknown derivative scheme {deriv!r}")


def flat_metric(dim: int = 5) -> MetricField:
    return MetricField(lambda x: np.eye(dim).tolist(), dim, "flat")


# curvature -----------------------------------------------------------------------


def check_metric(g: np.ndarray) -> np.ndarray:
    """Raise unless every matrix in the batch is well conditioned and positive-definite."""
    g = np.asarray(g)
    rcond = 1.0 / np.linalg.cond(g)
    if np.any(~(rcond > RCOND_MIN)):
        bad = np.argwhere(~np.atleast_1d(rcond > RCOND_MIN))[0]
        raise SingularMetricError(f"metric ill-conditioned at batch index {tuple(bad)}: rcond={np.atleast_1d(rcond)[tuple(bad)]:.3e}")
    n = g.shape[-1]
    for k in range(1, n + 1):
        minor = np.linalg.det(g[..., :k, :k])
        if np.any(minor <= 0):
            bad = np.argwhere(np.atleast_1d(minor <= 0))[0]
            raise NotPositiveDefiniteError(
                f"leading minor {k} non-positive at batch index {tuple(bad)}: {np.atleast_1d(minor)[tuple(bad)]:.3e}"
            )
    return np.linalg.inv(g)


def _connection(g, dg, ddg):
    ginv = check_metric(g)
    # lowered symbols G[l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    low = 0.5 * (
        np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg)
    )
    dlow = 0.5 * (
        np.einsum("...jlim->...lijm", ddg) + np.einsum("...iljm->...lijm", ddg) - np.einsum("...ijlm->...lijm", ddg)
    )
    gamma = np.einsum("...kl,...lij->...kij", ginv, low)
    dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dg, ginv)
    dgamma = np.einsum("...klm,...lij->...kijm", dginv, low) + np.einsum("...kl,...lijm->...kijm", ginv, dlow)
    return ginv, gamma, dgamma


def _ricci(gamma, dgamma):
    return (
        np.einsum("...kijk->...ij", dgamma)
        - np.einsum("...kkji->...ij", dgamma)
        + np.einsum("...kkl,...lij->...ij", gamma, gamma)
        - np.einsum("...kil,...lkj->...ij", gamma, gamma)
    )


def christoffel(g: MetricField, p, deriv: str = "jets") -> np.ndarray:
    """``Gamma[..., k, i, j]`` for the Levi-Civita connection."""
    return _connection(*g.derivatives(p, deriv))[1]


def ricci(g: MetricField, p, deriv: str = "jets") -> np.ndarray:
    _, gamma, dgamma = _connection(*g.derivatives(p, deriv))
    return _ricci(gamma, dgamma)


def scalar_curvature(g: MetricField, p, deriv: str = "jets") -> np.ndarray:
    ginv, gamma, dgamma = _connection(*g.derivatives(p, deriv))
    return np.einsum("...ij,...ij->...", ginv, _ricci(gamma, dgamma))


@dataclass(frozen=True)
class CurvatureReport:
    christoffel: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    einstein_residual: np.ndarray | None = None


def curvature_report(g: MetricField, p, lam: float | None = None, deriv: str = "jets") -> CurvatureReport:
    gij, dg, ddg = g.derivatives(p, deriv)
    ginv, gamma, dgamma = _connection(gij, dg, ddg)
    ric = _ricci(gamma, dgamma)
    scalar = np.einsum("...ij,...ij->...", ginv, ric)
    resid = None if lam is None else np.abs(ric - lam * gij).max(axis=(-2, -1))
    return CurvatureReport(gamma, ric, scalar, resid)


class ResidualStats(NamedTuple):
    max: float
    mean: float


def einstein_residual(g: MetricField, lam: float, points, deriv: str = "jets") -> ResidualStats:
    """Max and mean over points of ``max_ij |Ric_ij - lam g_ij|``."""
    x = as_points(points)
    if x.ndim == 1:
        x = x[None, :]
    if len(x) == 0:
        return ResidualStats(0.0, 0.0)
    rep = curvature_report(g, x, lam, deriv)
    r = rep.einstein_residual
    return ResidualStats(float(r.max()), float(r.mean()))


# transverse Kahler curvature ------------------------------------------------------------


def kahler_ricci_2d(h, q: ComplexPoint) -> np.ndarray:
    """``Ric^T_{j lbar} = -d_j d_lbar log det h`` for a Hermitian 2x2 field.

    ``h`` is any object with ``components(z: Holo)`` returning the 2x2
    Hermitian components ``h_{j lbar}``. Derivatives are taken with jets in
    ``(Re w1, Im w1, Re w2, Im w2)``.
    """
    z = holo_from_cartesian(cartesian_variables(q))
    H = jets.object_array(h.components(z))
    det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
    det_val = jets.value(det)
    if np.any(np.real(det_val) <= 0):
        raise NotPositiveDefiniteError("transverse metric has non-positive determinant")
    logdet = jets.log(jets.real(det))
    if not isinstance(logdet, jets.Jet):
        # constant metric: no coordinate dependence
        shape = np.shape(jets.value(z.w[0]))
        return np.zeros(shape + (2, 2), dtype=complex)
    hess = np.asarray(logdet.hess)
    ric = np.empty(hess.shape[:-2] + (2, 2), dtype=complex)
    for j in range(2):
        for l in range(2):
            xj, yj, xl, yl = 2 * j, 2 * j + 1, 2 * l, 2 * l + 1
            ddbar = 0.25 * (hess[..., xj, xl] + hess[..., yj, yl] + 1j * (hess[..., xj, yl] - hess[..., yj, xl]))
            ric[..., j, l] = -ddbar
    return ric
