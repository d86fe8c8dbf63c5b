import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sasaki_t11.coords import ChartDomain, ComplexPoint, sample_array
from sasaki_t11.sasaki import (
    EINSTEIN_CONSTANT,
    REEB,
    Holomorphic,
    boyer_decomposition,
    contact_identities,
    deta_complex_difference,
    eta_from_potential,
    gauge_residual,
    gauge_transform,
    phi_tensor,
    reeb_field,
    sasaki_structure,
    standard_metric,
    standard_potential,
    transverse_metric,
)
from sasaki_t11.tensor import einstein_residual

K = standard_potential()
S = sasaki_structure()


def equator(phi1=0.4, phi2=2.0):
    return ComplexPoint(np.exp(1j * phi1), np.exp(1j * phi2))


# potential


def test_potential_hessian_at_equator_matches_oracle():
    f = lambda x, y: oracles.mp.log(1 + x * x + y * y) / 3 - oracles.mp.log(x * x + y * y) / 6
    expected = float(oracles.complex_hessian_11(f, complex(np.exp(0.4j))))
    H = K.complex_hessian(equator())
    assert expected == pytest.approx(1 / 12, abs=1e-25)
    assert H[0, 0].real == pytest.approx(expected, abs=1e-15)
    assert H[0, 1] == 0 and H[1, 0] == 0


def test_potential_gradient_matches_finite_difference():
    q = ComplexPoint(0.4 + 0.3j, 1.3 - 0.2j)
    h = 1e-6
    grad = K.complex_gradient(q)
    for j, dw in enumerate(([h, 0], [0, h])):
        dx = (K.at(ComplexPoint(q.w1 + dw[0], q.w2 + dw[1])) - K.at(ComplexPoint(q.w1 - dw[0], q.w2 - dw[1]))) / (2 * h)
        dy = (K.at(ComplexPoint(q.w1 + 1j * dw[0], q.w2 + 1j * dw[1])) - K.at(ComplexPoint(q.w1 - 1j * dw[0], q.w2 - 1j * dw[1]))) / (2 * h)
        assert grad[j] == pytest.approx(0.5 * (dx - 1j * dy), abs=1e-8)


def test_transverse_metric_diagonal_at_equator():
    np.testing.assert_allclose(transverse_metric(K).at(equator()), np.eye(2) / 12, atol=1e-16)


# contact form and Reeb field


def test_eta_coefficients_at_sixty_degrees():
    x = np.array([0.5, math.pi / 3, 1.0, math.pi / 3, 4.0])
    eta = eta_from_potential(K).at(x)
    np.testing.assert_allclose(eta, [1 / 3, 0.0, 1 / 6, 0.0, 1 / 6], atol=1e-15)


def test_reeb_normalization(points):
    assert np.array_equal(reeb_field(), REEB)
    np.testing.assert_allclose(S.eta_at(points) @ REEB, 1.0, atol=1e-15)
    deta = S.eta.exterior_derivative(points)
    assert np.abs(deta @ REEB).max() < 1e-14
    g = S.metric(points)
    np.testing.assert_allclose(np.einsum("a,nab,b->n", REEB, g, REEB), 1.0, atol=1e-14)


def test_deta_matches_closed_form(points):
    assert deta_complex_difference(S, points) < 1e-12


def test_phi_eigenvalues():
    x = np.array([0.1, 0.8, 2.0, 2.1, 5.5])
    ev = np.linalg.eigvals(phi_tensor(K, x))
    ev = ev[np.argsort(ev.imag)]
    np.testing.assert_allclose(ev, [-1j, -1j, 0, 1j, 1j], atol=1e-12)


def test_frame_is_minus_i_eigenspace(points):
    X = S.frame_at(points)
    P = S.phi_at(points)
    np.testing.assert_allclose(np.einsum("nab,njb->nja", P, X), -1j * X, atol=1e-12)
    assert np.abs(np.einsum("na,nja->nj", S.eta_at(points), X)).max() < 1e-14


@pytest.mark.parametrize("name,tol", [("eta(xi)=1", 1e-14), ("Phi(xi)=0", 1e-14), ("eta.Phi=0", 1e-14),
                                      ("Phi^2=-Id+xi(x)eta", 1e-12), ("g(PhiX,PhiY)=g-eta(x)eta", 1e-12),
                                      ("g(xi,xi)=1", 1e-14)])
def test_contact_identities(points, name, tol):
    assert contact_identities(S, points)[name] < tol


# metric


def test_assembled_metric_matches_closed_form(points):
    np.testing.assert_allclose(S.metric(points), standard_metric()(points), atol=1e-14)


def test_metric_entries():
    t1, t2 = 0.7, 2.3
    g = standard_metric()(np.array([0.2, t1, 1.0, t2, 3.0]))
    assert g[0, 0] == pytest.approx(1 / 9)
    assert g[1, 1] == pytest.approx(1 / 6)
    assert g[3, 3] == pytest.approx(1 / 6)
    assert g[2, 4] == pytest.approx(math.cos(t1) * math.cos(t2) / 9)
    assert g[2, 2] == pytest.approx(math.cos(t1) ** 2 / 9 + math.sin(t1) ** 2 / 6)


def test_metric_matches_oracle():
    x = [0.2, 0.7, 1.0, 2.3, 3.0]
    expected = np.array(oracles.t11_metric(x).tolist(), dtype=float)
    np.testing.assert_allclose(standard_metric()(np.array(x)), expected, atol=1e-15)


@given(st.floats(-10, 10), st.integers(0, 10**6))
def test_metric_is_psi_independent(psi, seed):
    x = sample_array(ChartDomain(), 1, seed)[0]
    y = x.copy()
    y[0] = psi
    np.testing.assert_allclose(S.metric(x), S.metric(y), atol=1e-15)


def test_standard_structure_is_einstein(points):
    assert S.einstein_constant == EINSTEIN_CONSTANT
    assert einstein_residual(S.metric, EINSTEIN_CONSTANT, points).max < 1e-10


def test_boyer_decomposition(points):
    res = boyer_decomposition(S, points)
    assert set(res) == {"Ric(xi,xi)=2n", "Ric(X,xi)=0", "Ric|D=RicT-2g"}
    assert max(res.values()) < 1e-9


# gauge


def _const(c):
    return Holomorphic(lambda z: c + 0 * z.w[0], lambda z: [0 * z.w[0], 0 * z.w[1]])


def test_zero_gauge_is_identity(few_points):
    assert gauge_residual(K, _const(0.0), few_points).max() == 0.0


def test_constant_gauge_shifts_psi_only(few_points):
    K2, shift = gauge_transform(K, _const(0.3 + 0.5j))
    assert shift(list(few_points[0])) == pytest.approx(-3.0)
    assert gauge_residual(K, _const(0.3 + 0.5j), few_points).max() < 1e-14


@pytest.mark.parametrize("a", [0.5, 1j, -0.2 + 0.7j])
def test_linear_gauge_is_a_coordinate_change(few_points, a):
    f = Holomorphic(lambda z: a * z.w[0], lambda z: [a + 0 * z.w[0], 0 * z.w[1]])
    K2, _ = gauge_transform(K, f)
    g_new = sasaki_structure(K2).metric(few_points)
    assert np.abs(g_new - S.metric(few_points)).max() > 1e-3
    assert gauge_residual(K, f, few_points).max() < 1e-11
