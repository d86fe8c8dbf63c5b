"""One test per acceptance criterion, each printing a pass/fail line."""

import math
import time

import numpy as np
import pytest

from sasaki_t11 import jets
from sasaki_t11.cli import RunConfig, run
from sasaki_t11.coords import ChartDomain, complex_point, sample_array
from sasaki_t11.deform import (
    d_homothety,
    deform,
    family_function,
    family_metric,
    log_modulus,
    log_squared,
    modulus_squared,
    pluriharmonic_residual,
    proposition_metric,
    structure_checks,
)
from sasaki_t11.flow import FlowConfig, FlowState, flow_coefficient, integrate_flow, relative_error
from sasaki_t11.sasaki import Holomorphic, boyer_decomposition, gauge_residual, sasaki_structure, standard_metric, standard_potential
from sasaki_t11.tensor import MetricField, christoffel, einstein_residual, flat_metric, ricci, scalar_curvature

DOMAIN = ChartDomain(0.1)
FAMILY_CASES = [("LogModulus", (0.3, -0.7)), ("LogModulus", (1.0, 1.0)), ("LogSquared", (0.2, 0.5))]


def pts(n, seed=0):
    return sample_array(DOMAIN, n, seed)


def test_criterion_1_standard_einstein(acceptance):
    x = pts(1000)
    start = time.perf_counter()
    r = einstein_residual(standard_metric(), 4.0, x).max
    wall = time.perf_counter() - start
    ok = r < 1e-7 and wall < 30
    acceptance(1, "standard metric Ric = 4g", ok, f"max residual {r:.2e} (< 1e-7), {wall:.2f} s (< 30 s)")
    assert ok


def test_criterion_2_family_einstein(acceptance):
    x = pts(500, 1)
    res = {f"{tag}{c}": einstein_residual(deform(family_function(tag, *c)).metric, 4.0, x).max for tag, c in FAMILY_CASES}
    ok = max(res.values()) < 1e-7
    acceptance(2, "deformed families stay Einstein", ok, ", ".join(f"{k} {v:.2e}" for k, v in res.items()))
    assert ok


def test_criterion_3_boyer(acceptance):
    x = pts(200, 2)
    structures = [sasaki_structure()] + [deform(family_function(tag, *c)) for tag, c in FAMILY_CASES]
    worst = {"Ric(xi,xi)=2n": 0.0, "Ric(X,xi)=0": 0.0, "Ric|D=RicT-2g": 0.0}
    for s in structures:
        for k, v in boyer_decomposition(s, x).items():
            worst[k] = max(worst[k], v)
    ok = worst["Ric(xi,xi)=2n"] < 1e-7 and worst["Ric(X,xi)=0"] < 1e-7 and worst["Ric|D=RicT-2g"] < 1e-6
    acceptance(3, "Boyer decomposition", ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert ok


def test_criterion_4_deformation_structure(acceptance):
    x = pts(200, 3)
    deta = block = closed = 0.0
    for tag, c in FAMILY_CASES:
        phi = family_function(tag, *c)
        d = deform(phi)
        chk = structure_checks(d, x)
        deta = max(deta, chk["d eta~ = d eta"])
        block = max(block, chk["transverse block"])
        g = d.metric(x)
        closed = max(closed, np.abs(g - family_metric(tag, *c)(x)).max(), np.abs(g - proposition_metric(phi, x)).max())
    ok = deta < 1e-9 and block < 1e-9 and closed < 1e-10
    acceptance(4, "deformation structure", ok, f"d eta {deta:.2e}, block {block:.2e}, closed form {closed:.2e}")
    assert ok


def test_criterion_5_pluriharmonic(acceptance):
    q = complex_point(pts(500, 4))
    fam = max(pluriharmonic_residual(p, q, m).max() for p in (log_modulus(0.3, -0.7), log_squared(0.2, 0.5))
              for m in ("jets", "closed"))
    non = modulus_squared(0).complex_hessian(q)
    gap = np.abs(np.abs(non[:, 0, 0]) - 1.0).max()
    others = np.abs(non[:, [0, 1, 1], [1, 0, 1]]).max()
    ok = fam < 1e-12 and gap == 0.0 and others == 0.0
    acceptance(5, "pluriharmonicity", ok, f"families {fam:.2e}, |w1|^2 entry off 1 by {gap:.1e}")
    assert ok


def test_criterion_6_flow(acceptance):
    x = pts(200, 5)
    phi0 = log_modulus(0.3, -0.7)
    ts = (0.0, 0.1, 0.5, 1.0)
    pot = max(FlowState(phi0, t).residual(x).max() for t in ts)
    met = max(FlowState(phi0, t).metric_residual(x).max() for t in ts)
    s = integrate_flow(phi0, FlowConfig(dt=1e-3, t_end=0.5, integrator="rk4", grid=x))
    ref = np.stack([flow_coefficient(t) * phi0.at_real(x) for t in s.times])
    rk4 = relative_error(s, ref)
    ok_pot, ok_rk4, ok_met = pot < 1e-10, rk4 < 1e-6, met < 1e-6
    ok = ok_pot and ok_rk4 and ok_met
    acceptance(6, "flow", ok, f"potential residual {pot:.2e} ({'ok' if ok_pot else 'above 1e-10'}), "
               f"rk4 vs (e^(6t)-1) phi0 {rk4:.2e} ({'ok' if ok_rk4 else 'above 1e-6'}), "
               f"metric residual {met:.2e} ({'ok' if ok_met else 'above 1e-6'})")
    assert ok_pot, f"analytic family residual {pot:.3e} exceeds 1e-10"
    assert ok_rk4, f"rk4 relative error {rk4:.3e} exceeds 1e-6"
    assert ok_met


def _shipped_metrics():
    S = sasaki_structure()
    out = {"flat": flat_metric(), "T11": standard_metric(), "assembled": S.metric}
    for tag, c in FAMILY_CASES:
        out[f"family {tag}{c}"] = family_metric(tag, *c)
        out[f"deformed {tag}{c}"] = deform(family_function(tag, *c)).metric
    out["D-homothety 0.5"] = d_homothety(S, 0.5).metric
    out["D-homothety 2"] = d_homothety(S, 2.0).metric
    return out


def test_criterion_7_engine(acceptance):
    # mixed tolerance: 1e-5 absolute, or relative where derivatives exceed 1
    x = pts(50, 6)
    worst = absolute = 0.0
    for name, g in _shipped_metrics().items():
        for a, b in zip(g.jet_derivatives(x), g.fd_derivatives(x)):
            worst = max(worst, float((np.abs(a - b) / np.maximum(1.0, np.abs(a))).max()))
            absolute = max(absolute, float(np.abs(a - b).max()))
    sphere = MetricField(lambda y: [[1.0, 0.0], [0.0, jets.sin(y[0]) ** 2]], dim=2, name="S2")
    rng = np.random.default_rng(6)
    y = np.stack([rng.uniform(0.2, math.pi - 0.2, 100), rng.uniform(0, 2 * math.pi, 100)], axis=-1)
    flat = max(np.abs(christoffel(flat_metric(), x)).max(), np.abs(ricci(flat_metric(), x)).max())
    s2 = max(np.abs(ricci(sphere, y) - sphere(y)).max(), np.abs(scalar_curvature(sphere, y) - 2.0).max())
    ok = worst < 1e-5 and flat < 1e-10 and s2 < 1e-10
    acceptance(7, "jets vs 4th-order FD and curvature oracles", ok,
               f"jet/fd gap {worst:.2e} (absolute {absolute:.1e}), flat {flat:.1e}, S2 {s2:.2e}")
    assert ok


def test_criterion_8_gauge_and_homothety(acceptance):
    x = pts(100, 8)
    K = standard_potential()
    gauges = [
        Holomorphic(lambda z: 0.3 + 0.5j + 0 * z.w[0], lambda z: [0 * z.w[0], 0 * z.w[1]]),
        Holomorphic(lambda z: (0.2 - 0.7j) * z.w[0], lambda z: [0.2 - 0.7j + 0 * z.w[0], 0 * z.w[1]]),
        Holomorphic(lambda z: 0.4j * z.w[0] * z.w[1], lambda z: [0.4j * z.w[1], 0.4j * z.w[0]]),
    ]
    gauge = max(gauge_residual(K, f, x).max() for f in gauges)
    hom = 0.0
    for a in (0.5, 2.0):
        D = d_homothety(sasaki_structure(), a)
        hom = max(hom, np.abs(D.eta_at(x) @ D.reeb - 1.0).max(),
                  np.abs(np.einsum("a,nab,b->n", D.reeb, D.metric(x), D.reeb) - 1.0).max())
    ok = gauge < 1e-9 and hom < 1e-12
    acceptance(8, "gauge and D-homothety invariants", ok, f"gauge {gauge:.2e}, D-homothety {hom:.2e}")
    assert ok


def test_criterion_9_cli_determinism(acceptance):
    configs = [
        dict(command="verify einstein", family="LogSquared", c1=0.2, c2=0.5, samples=50, seed=3),
        dict(command="verify contact", samples=50, seed=3),
        dict(command="emit grid", family="LogModulus", grid_n=8, out_format="csv"),
        dict(command="emit grid", family="LogModulus", grid_n=8, out_format="json"),
    ]
    same = all(run(RunConfig(**c)) == run(RunConfig(**c)) for c in configs)
    codes = (run(RunConfig(**configs[0]))[0], run(RunConfig(**{**configs[1], "tol": 1e-16}))[0])
    ok = same and codes == (0, 1)
    acceptance(9, "CLI determinism and exit codes", ok, f"identical bytes {same}, exit codes pass/fail {codes}")
    assert ok
