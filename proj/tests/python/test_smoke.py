import math
import os

import numpy as np
import pytest

import wacrisk as wr

DATA = os.path.join(os.path.dirname(__file__), "..", "..", "data")


def two_machine():
    return wr.load_network(os.path.join(DATA, "two_machine.json"))


def test_open_loop_two_machine():
    (i, j, sigma), = wr.sigma_pairs(two_machine(), 0.0, 0.0, 0.075, 0.0, 0.7, 0.3, 2.0)
    assert (i, j) == (1, 2)
    assert sigma == pytest.approx(1.0155, abs=1e-3)


def test_closed_form_without_gains():
    for s1, s2 in [(0.5, 0.5), (1.0, 3.0), (4.0, 0.2)]:
        value, _, diverging = wr.f(wr.ScaledParams(s1, s2, 0.0, 0.0))
        assert not diverging
        assert value == pytest.approx(math.pi / (s1 * s2), rel=1e-6)


def test_membership_matches_root():
    sp = wr.ScaledParams(1.0, 1.0, 0.3, 0.2)
    v = wr.membership(sp)
    assert v["stable"] == (wr.rightmost_root(sp).real < 0)


def test_unstable_statistics_raise():
    with pytest.raises(wr.InfeasibleError):
        wr.sigma_pairs(two_machine(), 0.0, 100.0, 0.075, 0.5, 0.7, 0.3, 2.0)


def test_bad_laplacian_raises():
    with pytest.raises(wr.ValidationError):
        wr.decompose_laplacian(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_risk_branches():
    s = wr.SystemicSet(math.pi / 3, 1.5, 0.1)
    assert wr.risk(0.5 * s.safe_sigma, s) == 0.0
    assert math.isinf(wr.risk(1.01 * s.critical_sigma, s))
    mid = 0.5 * (s.safe_sigma + s.critical_sigma)
    assert wr.risk(mid, s) == pytest.approx(wr.risk_from_definition(mid, s), abs=1e-6)


def test_synthesis_shapes():
    modes, M, K, pairs = wr.synthesize(two_machine(), 0.075, 0.1, 0.7, 0.0, 2.0)
    assert len(modes) == 1 and len(pairs) == 1
    assert M.shape == (2, 2) and K.shape == (2, 2)
    assert np.allclose(M, M.T) and np.allclose(K, K.T)


def test_simulation_smoke():
    s = wr.load_network(os.path.join(DATA, "three_node_line.json"))
    emp = wr.simulate(s, 0.5, 0.5, 1.0, 0.05, 1.0, 0.3, 2.0, trajectories=400, seed=3)
    th = wr.sigma_pairs(s, 0.5, 0.5, 1.0, 0.05, 1.0, 0.3, 2.0)
    for (i, j, var, se), (_, _, sigma) in zip(emp, th):
        assert abs(var - sigma**2) < 5 * se + 0.05 * sigma**2
