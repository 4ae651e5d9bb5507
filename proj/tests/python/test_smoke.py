import math

import pytest

qp = pytest.importorskip("qpspec")

EDGES = [0, 3.8571, 6.8571, 12.1004, 100.7092]


def test_bloch_roundtrip():
    s = qp.build_spectrum(EDGES)
    k = qp.k_above(s, 5.0)
    assert k.imag > 0
    assert qp.dispersion(s, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert max(abs(s.gap_residual(j)) for j in (1, 2)) < 1e-10


def test_classify_and_regions():
    s = qp.build_spectrum(EDGES)
    p = qp.AdiabaticProblem(s, alpha=3.0, n=1, epsilon=0.1)
    rep = qp.classify(p, 5.5)
    assert rep.regime in list(qp.Regime.__members__.values())
    cells = qp.region_map(p, [2.0, 3.0], [5.0, 5.5, 6.0])
    assert len(cells) == 6
    with pytest.raises(qp.QpspecError):
        qp.region_map(p, [], [5.0])


def test_quantize_ladder():
    s = qp.build_spectrum(EDGES)
    p = qp.AdiabaticProblem(s, alpha=3.0, n=1, epsilon=0.01)
    ladder = qp.quantize(p, 5.2, 5.5)
    energies = [e for _, e in ladder]
    assert energies == sorted(energies)
    assert len(energies) > 1


def test_cocycle_unimodular_and_ids():
    mc = qp.ModelCocycle()
    mc.theta, mc.tau, mc.epsilon = 4.0, 1e-3, 0.05
    mc.h = qp.h_from_epsilon(0.05)
    mc.gamma0, mc.gammapi = -1.0, 1.0
    m = qp.model_matrix(mc, 0.3, 10.0)
    assert abs(m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1) < 1e-12
    assert qp.resolvent_verdict(mc, 50.0) == "Resolvent"
    assert qp.ids_increment(mc, -3000.0, 3000.0) == pytest.approx(0.05 / math.pi, rel=0.01)
    r = qp.lyapunov(mc, 50.0, iterations=5000)
    assert r.theta_cocycle >= 0


def test_theta_lambda():
    theta, lam = qp.theta_lambda(math.log(2))
    assert theta == pytest.approx(2.0)
    assert lam == pytest.approx(1.25)
