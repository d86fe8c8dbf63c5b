import math

import numpy as np
import pytest

import oracles
from sasaki_t11 import jets
from sasaki_t11.coords import ChartDomain, ComplexPoint, sample_array
from sasaki_t11.sasaki import TransverseMetric, standard_metric, standard_potential, transverse_metric
from sasaki_t11.tensor import (
    MetricField,
    NotPositiveDefiniteError,
    SingularMetricError,
    check_metric,
    christoffel,
    curvature_report,
    einstein_residual,
    flat_metric,
    kahler_ricci_2d,
    ricci,
    scalar_curvature,
)

S2 = MetricField(lambda x: [[1.0, 0.0], [0.0, jets.sin(x[0]) ** 2]], dim=2, name="S2")


def s2_points(n=50, seed=0):
    rng = np.random.default_rng(seed)
    return np.stack([rng.uniform(0.2, math.pi - 0.2, n), rng.uniform(0, 2 * math.pi, n)], axis=-1)


def test_flat_space_is_flat():
    x = sample_array(ChartDomain(), 1000, 4)
    assert not christoffel(flat_metric(), x).any()
    assert not ricci(flat_metric(), x).any()
    assert not scalar_curvature(flat_metric(), x).any()
    assert einstein_residual(flat_metric(), 0.0, x).max == 0.0


def test_round_sphere_christoffel():
    x = s2_points()
    G = christoffel(S2, x)
    t = x[:, 0]
    np.testing.assert_allclose(G[:, 0, 1, 1], -np.sin(t) * np.cos(t), atol=1e-14)
    np.testing.assert_allclose(G[:, 1, 0, 1], np.cos(t) / np.sin(t), atol=1e-13)


def test_round_sphere_ricci_and_scalar():
    x = s2_points()
    np.testing.assert_allclose(ricci(S2, x), S2(x), atol=1e-12)
    np.testing.assert_allclose(scalar_curvature(S2, x), 2.0, atol=1e-12)


@pytest.mark.parametrize("deriv", ["jets", "fd"])
def test_t11_einstein(points, deriv):
    tol = 1e-7 if deriv == "jets" else 1e-4
    assert einstein_residual(standard_metric(), 4.0, points, deriv).max < tol


def test_t11_scalar_curvature_is_twenty(points):
    np.testing.assert_allclose(scalar_curvature(standard_metric(), points), 20.0, atol=1e-10)


def test_wrong_einstein_constant_detected(points):
    g = standard_metric()
    r = curvature_report(g, points, 3.0).einstein_residual
    np.testing.assert_allclose(r, np.abs(g(points)).max(axis=(-2, -1)), atol=1e-10)
    assert r.min() > 0.1


def test_christoffel_symmetric_and_ricci_symmetric(points):
    rep = curvature_report(standard_metric(), points)
    assert np.abs(rep.christoffel - np.swapaxes(rep.christoffel, -1, -2)).max() < 1e-12
    assert np.abs(rep.ricci - np.swapaxes(rep.ricci, -1, -2)).max() < 1e-9
    ginv = np.linalg.inv(standard_metric()(points))
    np.testing.assert_allclose(rep.scalar, np.einsum("nij,nij->n", ginv, rep.ricci), atol=1e-9)


def test_ricci_matches_mpmath_oracle():
    x = [0.4, 0.9, 1.7, 2.2, 5.0]
    R, _ = oracles.ricci(lambda y: oracles.t11_metric(y), x)
    np.testing.assert_allclose(ricci(standard_metric(), np.array(x)), np.array(R.tolist(), dtype=float), atol=1e-13)


def test_metric_is_exactly_symmetric():
    g = MetricField(lambda x: [[1.0, x[0], 0.0], [99.0, 2.0, 0.0], [0.0, 0.0, 1.0]], dim=3)
    m = g(np.array([0.1, 0.0, 0.0]))
    assert m[1, 0] == m[0, 1] == 0.1


def test_wrong_shape_rejected():
    g = MetricField(lambda x: [[1.0]], dim=2)
    with pytest.raises(ValueError):
        g(np.zeros(2))


def test_singular_metric_raises():
    g = MetricField(lambda x: [[1.0, 1.0], [1.0, 1.0]], dim=2)
    with pytest.raises(SingularMetricError):
        ricci(g, np.zeros(2))


def test_indefinite_metric_raises():
    with pytest.raises(NotPositiveDefiniteError):
        check_metric(np.diag([1.0, -1.0, 1.0]))


def test_fd_step_and_scheme_validation():
    with pytest.raises(ValueError):
        S2.derivatives(np.array([1.0, 0.0]), "spline")


def test_mixed_partials_symmetric_on_t11(points):
    _, _, ddg = standard_metric().jet_derivatives(points)
    assert np.abs(ddg - np.swapaxes(ddg, -1, -2)).max() < 1e-12


# transverse Kahler curvature


def test_constant_transverse_metric_has_zero_ricci():
    h = TransverseMetric(lambda z: [[2.0, 0.5j], [-0.5j, 1.0]])
    q = ComplexPoint(np.array([0.3 + 0.2j, 1.1]), np.array([0.7j, -0.4 + 0.1j]))
    assert np.abs(kahler_ricci_2d(h, q)).max() < 1e-14


def test_fubini_study_block_is_transverse_einstein():
    x = sample_array(ChartDomain(), 200, 12)
    from sasaki_t11.coords import complex_point

    q = complex_point(x)
    h = transverse_metric(standard_potential())
    ric = kahler_ricci_2d(h, q)
    np.testing.assert_allclose(ric, 6.0 * h.at(q), atol=1e-12)
    assert np.abs(ric[:, 0, 1]).max() < 1e-14


def test_kahler_ricci_against_mpmath():
    # only h_{1 1bar} = (1/3)(1+|w1|^2)^-2 depends on w1, so Ric_{1 1bar} = -dd-bar log of it
    w = 0.6 + 0.8j
    logh = lambda x, y: oracles.mp.log(oracles.mp.mpf(1) / 3 / (1 + x * x + y * y) ** 2)
    expected = -float(oracles.complex_hessian_11(logh, w))
    h = transverse_metric(standard_potential())
    ric = kahler_ricci_2d(h, ComplexPoint(w, 0.5))
    assert ric[0, 0].real == pytest.approx(expected, rel=1e-12)


def test_degenerate_transverse_metric_rejected():
    h = TransverseMetric(lambda z: [[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(NotPositiveDefiniteError):
        kahler_ricci_2d(h, ComplexPoint(0.5, 0.5))
