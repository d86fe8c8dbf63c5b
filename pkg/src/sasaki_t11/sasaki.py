"""Sasaki structure of T^{1,1} generated by a Sasaki potential.

With leaf coordinate ``x = psi / 3`` and transverse coordinates ``w^j``,
a real basic potential ``K`` determines

    eta  = dx + i K_{,j} dw^j - i K_{,jbar} dwbar^j
    deta = -2i K_{,j lbar} dw^j ^ dwbar^l
    g    = eta (x) eta + K_{,j lbar} (dw^j (x) dwbar^l + dwbar^l (x) dw^j)
    Phi  = -i (d_j - i K_{,j} d_x) (x) dw^j + c.c.

Everything is expressed in the real basis ``(d_psi, d_theta1, d_phi1,
d_theta2, d_phi2)``. The Reeb field is ``xi = d_x = 3 d_psi``.

Contact-metric convention: the 2-form ``deta`` is the ordinary exterior
derivative, and the metric satisfies ``g(X, Y) = (1/2) deta(X, Phi Y) +
eta(X) eta(Y)``; the transverse Kahler form is ``deta / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .coords import (
    PHI,
    PSI,
    THETA,
    ComplexPoint,
    Holo,
    as_points,
    coframe,
    complex_point,
    coordinate_tuple,
    frame,
    holo_from_complex,
    holo_from_real,
)
from .tensor import MetricField, kahler_ricci_2d, ricci

LEAF_SCALE = 1.0 / 3.0  # x = psi / 3
REEB = np.array([3.0, 0.0, 0.0, 0.0, 0.0])
EINSTEIN_CONSTANT = 4.0  # 2n for n = 2
TRANSVERSE_EINSTEIN_CONSTANT = 6.0  # 2n + 2


@dataclass(frozen=True)
class SasakiPotential:
    """A real basic potential with closed-form complex derivatives.

    Each callable takes a :class:`~sasaki_t11.coords.Holo` and must be
    written with :mod:`sasaki_t11.jets` operations so it accepts jets.
    ``grad`` returns ``(K_{,1}, K_{,2})``; ``hess`` returns the 2x2
    ``K_{,j lbar}``.
    """

    value: Callable[[Holo], object]
    grad: Callable[[Holo], Sequence]
    hess: Callable[[Holo], object]
    name: str = "K"

    def at(self, q) -> np.ndarray:
        return np.real(jets.value(self.value(holo_from_complex(complex_point(q)))))

    def complex_gradient(self, q) -> np.ndarray:
        z = holo_from_complex(complex_point(q))
        return jets.values(list(self.grad(z)))

    def complex_hessian(self, q) -> np.ndarray:
        z = holo_from_complex(complex_point(q))
        return jets.values(self.hess(z)).astype(complex)


def standard_potential() -> SasakiPotential:
    """``K = (1/3) sum log(1 + |w^j|^2) - (1/6) sum log |w^j|^2``."""

    def value(z: Holo):
        return sum(
            jets.log(1.0 + w * wb) / 3.0 - (lw + lwb) / 6.0
            for w, wb, lw, lwb in zip(z.w, z.wbar, z.logw, z.logwbar)
        )

    def grad(z: Holo):
        return [wb / (3.0 * (1.0 + w * wb)) - 1.0 / (6.0 * w) for w, wb in zip(z.w, z.wbar)]

    def hess(z: Holo):
        H = jets.zeros((2, 2))
        for j, (w, wb) in enumerate(zip(z.w, z.wbar)):
            H[j, j] = 1.0 / (3.0 * (1.0 + w * wb) ** 2)
        return H

    return SasakiPotential(value, grad, hess, "standard")


@dataclass(frozen=True)
class Holomorphic:
    """A holomorphic function ``f(w1, w2)`` with its derivatives ``(f_1, f_2)``."""

    value: Callable[[Holo], object]
    derivative: Callable[[Holo], Sequence]


def gauge_transform(K: SasakiPotential, f: Holomorphic):
    """Return ``(K + f + fbar, psi_shift)``.

    The new potential generates the same structure once the leaf coordinate
    is moved: the metric built from the new potential at ``(psi, w)``
    equals the original metric pulled back along
    ``psi -> psi + psi_shift(x)``, with ``psi_shift = -6 Im f``.
    """

    def value(z):
        return K.value(z) + 2.0 * jets.real(f.value(z))

    def grad(z):
        return [a + b for a, b in zip(K.grad(z), f.derivative(z))]

    def psi_shift(x):
        return -6.0 * jets.imag(f.value(holo_from_real(x)))

    return SasakiPotential(value, grad, K.hess, f"{K.name}+gauge"), psi_shift


# contact form ----------------------------------------------------------------------


@dataclass(frozen=True)
class ContactForm:
    """Coefficients of a 1-form against ``(dpsi, dtheta1, dphi1, dtheta2, dphi2)``.

    ``two_form``, when given, returns the closed-form exterior derivative as a
    5x5 object matrix; :meth:`exterior_derivative` recomputes it from the
    coefficients with jets.
    """

    coefficients: Callable[[Sequence], Sequence]
    two_form: Callable[[Sequence], object] | None = None
    name: str = "eta"

    def at(self, points) -> np.ndarray:
        x = as_points(points)
        return np.broadcast_to(jets.values(list(self.coefficients(coordinate_tuple(x)))).real, x.shape).copy()

    def exterior_derivative(self, points) -> np.ndarray:
        """``F[..., a, b] = d_a eta_b - d_b eta_a``."""
        x = as_points(points)
        _, grad, _ = jets.unpack(list(self.coefficients(jets.variables(x))), 5)
        grad = np.broadcast_to(grad.real, x.shape + (5,))
        # grad[..., b, a] = d_a eta_b
        return np.swapaxes(grad, -1, -2) - grad

    def closed_two_form(self, points) -> np.ndarray:
        if self.two_form is None:
            raise ValueError(f"{self.name} carries no closed-form exterior derivative")
        x = as_points(points)
        F = jets.values(self.two_form(coordinate_tuple(x))).real
        return np.broadcast_to(F, x.shape[:-1] + (5, 5)).copy()


def _hermitian_pair(x, h) -> np.ndarray:
    """``M = E^T h conj(E)`` with ``E`` the ``dw`` coframe (object 5x5)."""
    E = coframe(x)
    return E.T @ jets.object_array(h) @ jets.conjugate(E)


def eta_from_potential(K: SasakiPotential) -> ContactForm:
    def coefficients(x):
        z = holo_from_real(x)
        E = coframe(x)
        Kj = jets.object_array(list(K.grad(z)))
        eta = -2.0 * jets.imag_part(Kj @ E)
        eta[PSI] = eta[PSI] + LEAF_SCALE
        return list(eta)

    def two_form(x):
        return 4.0 * jets.imag_part(_hermitian_pair(x, K.hess(holo_from_real(x))))

    return ContactForm(coefficients, two_form, f"eta[{K.name}]")


def reeb_field() -> np.ndarray:
    return REEB.copy()


# transverse metric and assembly ------------------------------------------------------------


@dataclass(frozen=True)
class TransverseMetric:
    """Hermitian components ``h_{j lbar}`` as a function of :class:`Holo`."""

    components: Callable[[Holo], object]
    name: str = "gT"

    def at(self, q) -> np.ndarray:
        z = holo_from_complex(complex_point(q))
        return jets.values(self.components(z)).astype(complex)


def transverse_metric(K: SasakiPotential) -> TransverseMetric:
    return TransverseMetric(K.hess, f"gT[{K.name}]")


def real_transverse_form(x, h) -> np.ndarray:
    """``h_{j lbar} (dw^j dwbar^l + dwbar^l dw^j)`` as a real symmetric 5x5 object matrix."""
    return 2.0 * jets.real_part(_hermitian_pair(x, h))


def assemble_metric(eta: ContactForm, h: TransverseMetric) -> MetricField:
    """``g = eta (x) eta + 2 Re(h_{j lbar} dw^j dwbar^l)``."""

    def components(x):
        e = jets.object_array(list(eta.coefficients(x)))
        return np.outer(e, e) + real_transverse_form(x, h.components(holo_from_real(x)))

    return MetricField(components, 5, f"assembled[{eta.name}]")


def round_block(x) -> np.ndarray:
    """``(1/6) sum (dtheta_j^2 + sin^2 theta_j dphi_j^2)``."""
    G = jets.zeros((5, 5))
    for t, f in zip(THETA, PHI):
        G[t, t] = 1.0 / 6.0
        G[f, f] = jets.sin(x[t]) ** 2 / 6.0
    return G


def standard_metric() -> MetricField:
    """Closed form ``(1/6) round blocks + (1/9)(dpsi + cos th1 dphi1 + cos th2 dphi2)^2``."""

    def components(x):
        a = jets.zeros(5)
        a[PSI] = 1.0
        for t, f in zip(THETA, PHI):
            a[f] = jets.cos(x[t])
        return np.outer(a, a) / 9.0 + round_block(x)

    return MetricField(components, 5, "T11")


# Phi and the horizontal frame -------------------------------------------------------------


def horizontal_frame(K: SasakiPotential, x) -> np.ndarray:
    """``X_j = d/dw^j - i K_{,j} xi`` (object 2x5), the (1,0) part of ``Ker eta``."""
    F = frame(x)
    Kj = list(K.grad(holo_from_real(x)))
    X = F.copy()
    for j in range(2):
        X[j, PSI] = X[j, PSI] - 1j * Kj[j] * REEB[PSI]
    return X


def phi_matrix(K: SasakiPotential, x) -> np.ndarray:
    """``Phi^a_b = 2 Re(-i X_j^a dw^j_b)`` (object 5x5)."""
    X = horizontal_frame(K, x)
    E = coframe(x)
    return 2.0 * jets.real_part(-1j * (X.T @ E))


def phi_tensor(K: SasakiPotential, p) -> np.ndarray:
    x = as_points(p)
    P = jets.values(phi_matrix(K, coordinate_tuple(x))).real
    return np.broadcast_to(P, x.shape[:-1] + (5, 5)).copy()


@dataclass(frozen=True)
class SasakiStructure:
    """Bundled ``(eta, xi, Phi, g)`` plus the data the checks need.

    ``phi`` and ``frame`` take coordinate tuples and return object
    matrices; ``frame`` spans the (1,0) part of ``Ker eta``.
    """

    eta: ContactForm
    reeb: np.ndarray
    phi: Callable[[Sequence], np.ndarray]
    metric: MetricField
    frame: Callable[[Sequence], np.ndarray]
    transverse: TransverseMetric
    potential: SasakiPotential | None = None
    name: str = "sasaki"
    einstein_constant: float | None = field(default=EINSTEIN_CONSTANT)

    def eta_at(self, points) -> np.ndarray:
        return self.eta.at(points)

    def phi_at(self, points) -> np.ndarray:
        x = as_points(points)
        P = jets.values(self.phi(coordinate_tuple(x))).real
        return np.broadcast_to(P, x.shape[:-1] + (5, 5)).copy()

    def frame_at(self, points) -> np.ndarray:
        x = as_points(points)
        X = jets.values(self.frame(coordinate_tuple(x))).astype(complex)
        return np.broadcast_to(X, x.shape[:-1] + (2, 5)).copy()


def sasaki_structure(K: SasakiPotential | None = None) -> SasakiStructure:
    K = K or standard_potential()
    eta = eta_from_potential(K)
    h = transverse_metric(K)
    return SasakiStructure(
        eta=eta,
        reeb=reeb_field(),
        phi=lambda x: phi_matrix(K, x),
        metric=assemble_metric(eta, h),
        frame=lambda x: horizontal_frame(K, x),
        transverse=h,
        potential=K,
        name=K.name,
    )


# checks -------------------------------------------------------------------------------


def _maxabs(a) -> float:
    a = np.abs(np.asarray(a))
    return float(a.max()) if a.size else 0.0


def per_point(a, batch_ndim: int = 1) -> np.ndarray:
    """Max-abs over the trailing (tensor) axes, keeping ``batch_ndim`` leading axes."""
    a = np.abs(np.asarray(a))
    return a.reshape(a.shape[:batch_ndim] + (-1,)).max(axis=-1)


def maxima(residuals: dict[str, np.ndarray]) -> dict[str, float]:
    return {k: _maxabs(v) for k, v in residuals.items()}


def _batch(points) -> np.ndarray:
    x = as_points(points)
    return x[None, :] if x.ndim == 1 else x


def contact_residuals(s: SasakiStructure, points) -> dict[str, np.ndarray]:
    """Per-point residuals of the almost-contact-metric identities."""
    x = _batch(points)
    eta = s.eta_at(x)
    P = s.phi_at(x)
    g = s.metric(x)
    xi = s.reeb
    eye = np.eye(5)
    xi_eta = np.einsum("a,...b->...ab", xi, eta)
    PgP = np.einsum("...ca,...cd,...db->...ab", P, g, P)
    return {
        "eta(xi)=1": per_point(eta @ xi - 1.0),
        "Phi(xi)=0": per_point(P @ xi),
        "eta.Phi=0": per_point(np.einsum("...a,...ab->...b", eta, P)),
        "Phi^2=-Id+xi(x)eta": per_point(P @ P + eye - xi_eta),
        "g(PhiX,PhiY)=g-eta(x)eta": per_point(PgP - g + np.einsum("...a,...b->...ab", eta, eta)),
        "g(xi,xi)=1": per_point(np.einsum("a,...ab,b->...", xi, g, xi) - 1.0),
    }


def contact_identities(s: SasakiStructure, points) -> dict[str, float]:
    """Max residuals of the almost-contact-metric identities over ``points``."""
    return maxima(contact_residuals(s, points))


def boyer_residuals(s: SasakiStructure, points, deriv: str = "jets") -> dict[str, np.ndarray]:
    """Per-point residuals of ``Ric(xi,xi) = 2n``, ``Ric(X, xi) = 0`` and ``Ric|_D = Ric^T - 2g``.

    The transverse block is compared in the complex frame ``{X_j}`` of the
    structure, both the (1,1) and the (2,0) parts.
    """
    x = _batch(points)
    ric = ricci(s.metric, x, deriv)
    g = s.metric(x)
    xi = s.reeb
    X = s.frame_at(x)
    Xb = np.conj(X)
    ric_t = kahler_ricci_2d(s.transverse, complex_point(x))
    ric_11 = np.einsum("...ja,...ab,...lb->...jl", X, ric, Xb)
    ric_20 = np.einsum("...ja,...ab,...lb->...jl", X, ric, X)
    g_11 = np.einsum("...ja,...ab,...lb->...jl", X, g, Xb)
    g_20 = np.einsum("...ja,...ab,...lb->...jl", X, g, X)
    return {
        "Ric(xi,xi)=2n": per_point(np.einsum("a,...ab,b->...", xi, ric, xi) - EINSTEIN_CONSTANT),
        "Ric(X,xi)=0": per_point(np.einsum("...ja,...ab,b->...j", X, ric, xi)),
        "Ric|D=RicT-2g": np.maximum(per_point(ric_11 - (ric_t - 2.0 * g_11)), per_point(ric_20 + 2.0 * g_20)),
    }


def boyer_decomposition(s: SasakiStructure, points, deriv: str = "jets") -> dict[str, float]:
    return maxima(boyer_residuals(s, points, deriv))


def deta_residual(s: SasakiStructure, points) -> np.ndarray:
    """Per-point difference between ``d eta`` from coefficient jets and the closed complex form."""
    x = _batch(points)
    return per_point(s.eta.exterior_derivative(x) - s.eta.closed_two_form(x))


def deta_complex_difference(s: SasakiStructure, points) -> float:
    return _maxabs(deta_residual(s, points))


def gauge_residual(K: SasakiPotential, f: Holomorphic, points) -> np.ndarray:
    """Per-point ``|g' - J^T g J|`` for the gauge-transformed potential.

    ``J`` is the Jacobian of ``(psi + psi_shift, theta, phi)``; since the
    metric is ``psi``-independent no point shift is needed.
    """
    x = _batch(points)
    K2, shift = gauge_transform(K, f)
    g_new = sasaki_structure(K2).metric(x)
    g_old = sasaki_structure(K).metric(x)
    _, dsh, _ = jets.unpack([shift(jets.variables(x))], 5)
    J = np.broadcast_to(np.eye(5), g_new.shape).copy()
    J[..., PSI, :] += np.broadcast_to(dsh[..., 0, :].real, x.shape)
    return per_point(g_new - np.einsum("...ab,...ac,...cd->...bd", J, g_old, J))
