"""Deformations of the contact form by basic functions.

A real basic function ``phi`` moves the contact form to
``eta~ = eta + d^c phi`` with ``d^c phi = (i/2)(dbar - d) phi = Im(phi_{,j} dw^j)``.
In real coordinates

    d^c phi = sum_j (1/2) sin(theta_j) d phi/d theta_j dphi_j
              - (1 / (2 sin theta_j)) d phi/d phi_j dtheta_j.

The Reeb field is unchanged; ``Phi~ = Phi - xi (x) (d^c phi o Phi)``, the
horizontal frame becomes ``X~_j = X_j + (i/2) phi_{,j} xi`` and the metric
is ``g~ = (1/2) d eta(., Phi~ .) + eta~ (x) eta~``. When ``phi`` is
pluriharmonic (``phi_{,j lbar} = 0``) the deformation leaves ``d eta``
and the transverse metric untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .coords import (
    PHI,
    PSI,
    THETA,
    Holo,
    as_points,
    cartesian_variables,
    coframe,
    complex_point,
    coordinate_tuple,
    holo_from_cartesian,
    holo_from_complex,
    holo_from_real,
)
from .sasaki import (
    EINSTEIN_CONSTANT,
    REEB,
    ContactForm,
    SasakiStructure,
    TransverseMetric,
    _batch,
    _hermitian_pair,
    maxima,
    per_point,
    horizontal_frame,
    round_block,
    sasaki_structure,
    standard_potential,
)
from .tensor import MetricField


@dataclass(frozen=True)
class BasicFunction:
    """A real, Reeb-invariant function of ``(w1, w2)``.

    ``value``, ``grad`` and ``hess`` take a :class:`Holo` and must be jet
    compatible; ``grad`` returns ``(phi_{,1}, phi_{,2})`` and ``hess`` the
    2x2 ``phi_{,j lbar}``. ``tag`` is ``"LogModulus"``, ``"LogSquared"`` or
    ``"Custom"``.
    """

    value: Callable[[Holo], object]
    grad: Callable[[Holo], Sequence]
    hess: Callable[[Holo], object]
    tag: str = "Custom"
    c1: float = 0.0
    c2: float = 0.0
    name: str = "phi"

    @property
    def c(self) -> tuple[float, float]:
        return (self.c1, self.c2)

    def at(self, q) -> np.ndarray:
        q = complex_point(q)
        v = np.real(jets.values([self.value(holo_from_complex(q))])[..., 0])
        return np.broadcast_to(v, q.w.shape[:-1]).copy()

    def at_real(self, points) -> np.ndarray:
        x = as_points(points)
        v = np.real(jets.values([self.value(holo_from_real(coordinate_tuple(x)))])[..., 0])
        return np.broadcast_to(v, x.shape[:-1]).copy()

    def complex_gradient(self, q) -> np.ndarray:
        return jets.values(list(self.grad(holo_from_complex(complex_point(q))))).astype(complex)

    def complex_hessian(self, q, method: str = "jets") -> np.ndarray:
        """``phi_{,j lbar}`` at ``q``.

        ``method="jets"`` differentiates :attr:`value` twice in
        ``(Re w, Im w)``; ``"closed"`` evaluates :attr:`hess`.
        """
        q = complex_point(q)
        if method == "closed":
            return np.broadcast_to(
                jets.values(self.hess(holo_from_complex(q))).astype(complex), q.w.shape[:-1] + (2, 2)
            ).copy()
        if method != "jets":
            raise ValueError(f"unknown method {method!r}")
        v = self.value(holo_from_cartesian_jets(q))
        _, _, H = jets.unpack([v], 4)
        H = H[..., 0, :, :]
        out = np.empty(H.shape[:-2] + (2, 2), dtype=complex)
        for j in range(2):
            for l in range(2):
                xj, yj, xl, yl = 2 * j, 2 * j + 1, 2 * l, 2 * l + 1
                out[..., j, l] = 0.25 * (H[..., xj, xl] + H[..., yj, yl] + 1j * (H[..., xj, yl] - H[..., yj, xl]))
        return out

    def scaled(self, s: float, name: str | None = None) -> "BasicFunction":
        return BasicFunction(
            lambda z: s * self.value(z),
            lambda z: [s * g for g in self.grad(z)],
            lambda z: s * jets.object_array(self.hess(z)),
            self.tag,
            self.c1,
            self.c2,
            name or f"{s:g}*{self.name}",
        )


def holo_from_cartesian_jets(q) -> Holo:
    return holo_from_cartesian(cartesian_variables(q))


def _check_c(c1: float, c2: float) -> None:
    for c in (c1, c2):
        if not math.isfinite(c):
            raise ValueError(f"family parameter must be finite, got {c!r}")


def zero_function() -> BasicFunction:
    return BasicFunction(lambda z: 0.0, lambda z: [0.0, 0.0], lambda z: jets.zeros((2, 2)), "Custom", name="0")


def log_modulus(c1: float, c2: float, scale: float = 1.0 / 6.0) -> BasicFunction:
    """``phi = scale * sum c_j log |w^j|^2``.

    The default scale yields ``eta~ = eta + (1/6) sum c_j dphi_j``.
    """
    _check_c(c1, c2)
    c = (c1, c2)

    def value(z):
        return sum(scale * cj * (lw + lwb) for cj, lw, lwb in zip(c, z.logw, z.logwbar))

    def grad(z):
        return [scale * cj / w for cj, w in zip(c, z.w)]

    return BasicFunction(value, grad, lambda z: jets.zeros((2, 2)), "LogModulus", c1, c2, f"LogModulus({c1:g},{c2:g})")


def log_squared(c1: float, c2: float, scale: float = 1.0 / 12.0) -> BasicFunction:
    """``phi = scale * sum c_j (log^2 w^j + log^2 wbar^j)``.

    On the chart ``log w = log tan(theta/2) + i phi`` this is
    ``2 scale sum c_j (log^2 tan(theta_j/2) - phi_j^2)``. The default scale
    yields ``eta~ = eta + (1/6) sum c_j (log tan(theta_j/2) dphi_j +
    phi_j / sin(theta_j) dtheta_j)``. The function is chart-local: it
    jumps across the cut ``phi_j = 0``.
    """
    _check_c(c1, c2)
    c = (c1, c2)

    def value(z):
        return sum(scale * cj * (lw * lw + lwb * lwb) for cj, lw, lwb in zip(c, z.logw, z.logwbar))

    def grad(z):
        return [2.0 * scale * cj * lw / w for cj, lw, w in zip(c, z.logw, z.w)]

    return BasicFunction(value, grad, lambda z: jets.zeros((2, 2)), "LogSquared", c1, c2, f"LogSquared({c1:g},{c2:g})")


def modulus_squared(j: int = 0, scale: float = 1.0) -> BasicFunction:
    """``phi = scale |w^j|^2``; not pluriharmonic (``phi_{,j jbar} = scale``)."""

    def value(z):
        return scale * z.w[j] * z.wbar[j]

    def grad(z):
        g = [0.0, 0.0]
        g[j] = scale * z.wbar[j]
        return g

    def hess(z):
        H = jets.zeros((2, 2))
        H[j, j] = scale
        return H

    return BasicFunction(value, grad, hess, "Custom", name=f"{scale:g}|w{j + 1}|^2")


FAMILIES = {"LogModulus": log_modulus, "LogSquared": log_squared}


def family_function(tag: str, c1: float, c2: float) -> BasicFunction:
    try:
        return FAMILIES[tag](c1, c2)
    except KeyError:
        raise ValueError(f"unknown family {tag!r}; expected one of {sorted(FAMILIES)}") from None


def pluriharmonic_residual(phi: BasicFunction, q, method: str = "jets") -> np.ndarray:
    """``max_{j,l} |phi_{,j lbar}|`` at each point of ``q``."""
    return np.abs(phi.complex_hessian(q, method)).max(axis=(-2, -1))


# deformed contact form ---------------------------------------------------------


def d_c(phi: BasicFunction, x) -> np.ndarray:
    """Coefficients of ``d^c phi = Im(phi_{,j} dw^j)`` (object 5-vector)."""
    g = jets.object_array(list(phi.grad(holo_from_real(x))))
    return jets.imag_part(g @ coframe(x))


def d_c_real(phi: BasicFunction, points) -> np.ndarray:
    """``d^c phi`` from real partial derivatives of :attr:`BasicFunction.value`."""
    x = as_points(points)
    _, grad, _ = jets.unpack([phi.value(holo_from_real(jets.variables(x)))], 5)
    grad = np.broadcast_to(grad[..., 0, :].real, x.shape)
    out = np.zeros(x.shape)
    for t, f in zip(THETA, PHI):
        s = np.sin(x[..., t])
        out[..., f] = 0.5 * s * grad[..., t]
        out[..., t] = -0.5 * grad[..., f] / s
    return out


def deform_eta(eta: ContactForm, phi: BasicFunction, K=None) -> ContactForm:
    """``eta + d^c phi``.

    ``K`` supplies the transverse metric for the closed-form exterior
    derivative ``4 Im(E^T (h - h_phi / 2) conj(E))``; without it the result
    carries no closed form.
    """

    def coefficients(x):
        return list(jets.object_array(list(eta.coefficients(x))) + d_c(phi, x))

    two_form = None
    if K is not None:

        def two_form(x):
            z = holo_from_real(x)
            h = jets.object_array(K.hess(z)) - 0.5 * jets.object_array(phi.hess(z))
            return 4.0 * jets.imag_part(_hermitian_pair(x, h))

    return ContactForm(coefficients, two_form, f"{eta.name}+dc[{phi.name}]")


def deform_frame(K, phi: BasicFunction, x) -> np.ndarray:
    """``X~_j = X_j + (i/2) phi_{,j} xi`` (object 2x5)."""
    X = horizontal_frame(K, x)
    g = list(phi.grad(holo_from_real(x)))
    for j in range(2):
        X[j, PSI] = X[j, PSI] + 0.5j * g[j] * REEB[PSI]
    return X


def deform_phi_matrix(P: np.ndarray, dc: np.ndarray) -> np.ndarray:
    """``Phi~ = Phi - xi (x) (d^c phi o Phi)`` for object matrices."""
    row = dc @ P
    out = P.copy()
    out[PSI, :] = out[PSI, :] - REEB[PSI] * row
    return out


def deform_phi(structure: SasakiStructure, phi: BasicFunction) -> Callable[[Sequence], np.ndarray]:
    return lambda x: deform_phi_matrix(structure.phi(x), d_c(phi, x))


def _symmetric(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def assemble_deformed_metric(
    eta_tilde: ContactForm, phi_tilde: Callable, two_form: Callable | None = None, name: str = "g~"
) -> MetricField:
    """``g~ = (1/2) d eta(., Phi~ .) + eta~ (x) eta~``, symmetrized.

    ``two_form`` defaults to the closed-form exterior derivative carried by
    ``eta_tilde``; pass the undeformed one to follow ``d eta~ = d eta``.
    """
    F = two_form or eta_tilde.two_form
    if F is None:
        raise ValueError("assembly needs the exterior derivative of the contact form")

    def raw(x):
        e = jets.object_array(list(eta_tilde.coefficients(x)))
        return 0.5 * (jets.object_array(F(x)) @ phi_tilde(x)) + np.outer(e, e)

    return MetricField(lambda x: _symmetric(raw(x)), 5, name), raw


def proposition_metric(phi: BasicFunction, points) -> np.ndarray:
    """Closed form ``(eta + d^c phi)^2 + (1/6) round blocks`` at ``points``.

    ``d^c phi`` comes from the real partials ``d phi / d theta_j`` and
    ``d phi / d phi_j`` of :attr:`BasicFunction.value`, independently of the
    complex-gradient callable used by :func:`deform_eta`.
    """
    x = as_points(points)
    a = np.zeros(x.shape)
    a[..., PSI] = 1.0 / 3.0
    for t, f in zip(THETA, PHI):
        a[..., f] = np.cos(x[..., t]) / 3.0
    a = a + d_c_real(phi, x)
    R = np.broadcast_to(jets.values(round_block(coordinate_tuple(x))).real, x.shape[:-1] + (5, 5))
    return np.einsum("...a,...b->...ab", a, a) + R


def family_metric(tag: str, c1: float, c2: float) -> MetricField:
    """Closed-form metric of a two-parameter family, jet compatible.

    LogModulus: ``(1/9)(dpsi + sum (cos th_j + c_j/2) dphi_j)^2 + round``.
    LogSquared: ``(1/9)(dpsi + sum (cos th_j + (c_j/2) log tan(th_j/2)) dphi_j
    + sum (c_j/2) phi_j / sin th_j dth_j)^2 + round``.
    """
    _check_c(c1, c2)
    c = (c1, c2)
    if tag not in FAMILIES:
        raise ValueError(f"unknown family {tag!r}; expected one of {sorted(FAMILIES)}")

    def components(x):
        a = jets.zeros(5)
        a[PSI] = 1.0
        for cj, t, f in zip(c, THETA, PHI):
            if tag == "LogModulus":
                a[f] = jets.cos(x[t]) + 0.5 * cj
            else:
                a[f] = jets.cos(x[t]) + 0.5 * cj * jets.log(jets.tan(0.5 * x[t]))
                a[t] = 0.5 * cj * x[f] / jets.sin(x[t])
        return np.outer(a, a) / 9.0 + round_block(x)

    return MetricField(components, 5, f"{tag}({c1:g},{c2:g})")


# deformed structure ------------------------------------------------------------------


@dataclass(frozen=True)
class DeformedStructure(SasakiStructure):
    """A :class:`SasakiStructure` obtained by deforming a base structure."""

    base: SasakiStructure | None = None
    function: BasicFunction | None = None
    raw_metric: Callable | None = field(default=None, repr=False)

    @property
    def eta_tilde(self) -> ContactForm:
        return self.eta

    @property
    def phi_tilde(self):
        return self.phi

    @property
    def metric_tilde(self) -> MetricField:
        return self.metric

    @property
    def frame_tilde(self):
        return self.frame


def deform(phi: BasicFunction, structure: SasakiStructure | None = None) -> DeformedStructure:
    s = structure or sasaki_structure()
    K = s.potential or standard_potential()
    eta_t = deform_eta(s.eta, phi, K)
    phi_t = deform_phi(s, phi)
    metric, raw = assemble_deformed_metric(eta_t, phi_t, s.eta.two_form, f"g~[{phi.name}]")
    return DeformedStructure(
        eta=eta_t,
        reeb=s.reeb,
        phi=phi_t,
        metric=metric,
        frame=lambda x: deform_frame(K, phi, x),
        transverse=s.transverse,
        potential=K,
        name=f"{s.name}+{phi.name}",
        einstein_constant=s.einstein_constant,
        base=s,
        function=phi,
        raw_metric=raw,
    )


def d_homothety(structure: SasakiStructure, a: float) -> SasakiStructure:
    """``eta -> a eta``, ``xi -> xi / a``, ``Phi`` kept, ``g -> a g + a(a-1) eta (x) eta``.

    The transverse metric scales by ``a``; the Einstein constant is no
    longer ``4`` unless ``a = 1``.
    """
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ValueError(f"D-homothety needs a positive constant, got {a!r}")
    eta = structure.eta
    base_two = eta.two_form
    new_eta = ContactForm(
        lambda x: [a * e for e in eta.coefficients(x)],
        None if base_two is None else (lambda x: a * jets.object_array(base_two(x))),
        f"{a:g}*{eta.name}",
    )
    g = structure.metric

    def components(x):
        e = jets.object_array(list(eta.coefficients(x)))
        return a * g.components(x) + a * (a - 1.0) * np.outer(e, e)

    h = structure.transverse

    return SasakiStructure(
        eta=new_eta,
        reeb=structure.reeb / a,
        phi=structure.phi,
        metric=MetricField(components, 5, f"D{a:g}[{g.name}]"),
        frame=structure.frame,
        transverse=TransverseMetric(lambda z: a * jets.object_array(h.components(z)), f"{a:g}*{h.name}"),
        potential=None,
        name=f"D{a:g}[{structure.name}]",
        einstein_constant=EINSTEIN_CONSTANT if a == 1 else None,
    )



# checks --------------------------------------------------------------------------------


def structure_residuals(d: DeformedStructure, points) -> dict[str, np.ndarray]:
    """Per-point residuals of the deformation invariants."""
    x = _batch(points)
    base = d.base
    eta_t = d.eta_at(x)
    P = d.phi_at(x)
    Xt = d.frame_at(x)
    X = base.frame_at(x)
    g_t = d.metric(x)
    g = base.metric(x)
    raw = np.broadcast_to(jets.values(d.raw_metric(coordinate_tuple(x))).real, g_t.shape)
    xi = d.reeb
    eye = np.eye(5)
    Pb = base.phi_at(x)
    blk_t = np.einsum("...ja,...ab,...lb->...jl", Xt, g_t, np.conj(Xt))
    blk = np.einsum("...ja,...ab,...lb->...jl", X, g, np.conj(X))
    # transverse complex structure: Phi~ X~_j = -i X~_j, and mod xi equal to Phi X_j
    PX_t = np.einsum("...ab,...jb->...ja", P, Xt)
    PX = np.einsum("...ab,...jb->...ja", Pb, X)
    horiz = np.ones(5)
    horiz[PSI] = 0.0
    return {
        "d eta~ = d eta": per_point(d.eta.exterior_derivative(x) - base.eta.exterior_derivative(x)),
        "eta~(X~_j)=0": per_point(np.einsum("...a,...ja->...j", eta_t, Xt)),
        "eta~(xi)=1": per_point(eta_t @ xi - 1.0),
        "Phi~(xi)=0": per_point(P @ xi),
        "eta~.Phi~=0": per_point(np.einsum("...a,...ab->...b", eta_t, P)),
        "Phi~^2=-Id+xi(x)eta~": per_point(P @ P + eye - np.einsum("a,...b->...ab", xi, eta_t)),
        "Phi~X~=-iX~": per_point(PX_t + 1j * Xt),
        "J invariance": per_point((PX_t - PX) * horiz),
        "transverse block": per_point(blk_t - blk),
        "g~ symmetric": per_point(raw - np.swapaxes(raw, -1, -2)),
        "g~(xi,xi)=1": per_point(np.einsum("a,...ab,b->...", xi, g_t, xi) - 1.0),
    }


def structure_checks(d: DeformedStructure, points) -> dict[str, float]:
    return maxima(structure_residuals(d, points))
