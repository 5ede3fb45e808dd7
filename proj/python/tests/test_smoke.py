import math

import pytest

import stein_prelimit as sp


def test_version():
    assert sp.__version__ == "0.1.0"


def test_weights():
    assert sp.weight(0, 0.5) == 59 / 256
    assert sum(sp.weight(i, 0.3) for i in range(5)) == pytest.approx(1.0, abs=1e-14)
    num, den = sp.weight_coefficients()[0][0]
    assert (num, den) == (1, 1)
    with pytest.raises(sp.ArgumentError):
        sp.weight(5, 0.1)


def test_interpolate_cubic():
    delta = 0.25
    values = [(delta * i) ** 3 for i in range(20)]
    assert sp.interpolate(values, delta, 1.1) == pytest.approx(1.1**3, rel=1e-12)
    assert sp.interpolate(values, delta, 1.1, deriv=1) == pytest.approx(3 * 1.1**2, rel=1e-10)
    with pytest.raises(sp.DomainError):
        sp.interpolate(values, delta, 10.0)


def test_poisson_solvers_agree():
    lam, mu, delta = 0.5, 1.0, 1.0
    h = sp.sample_dlip(120, delta, 3)
    closed = sp.birth_death_poisson(lam, mu, delta, h)
    direct = sp.solve_poisson_mm1(lam, mu, delta, h)
    assert closed[0] == 0.0
    assert max(abs(a - b) for a, b in zip(closed[:30], direct[:30])) < 1e-8


def test_mm1_quantities():
    gap = sp.convergence_gap(0.9, 1.0, 0.1)
    assert 0.0 < gap <= sp.daly_bound(0.9, 1.0, 0.1) * 10
    sweep = sp.convergence_sweep([0.5, 0.9])
    assert len(sweep["rows"]) == 2
    assert sweep["slope"] == pytest.approx(1.0, abs=1e-6)
    assert sp.wasserstein_exponential(1.0, 2.5) == pytest.approx(1.5)
    with pytest.raises(sp.StabilityError):
        sp.geometric_mean(1.0, 1.0, 1.0)


def test_interchange_identity():
    delta = 0.5
    f = [math.sin(delta * i) for i in range(30)]
    r = sp.mm1_interchange(1.0, 2.0, delta, f, 2.3)
    assert abs(r["residual"]) < 1e-10


def test_coupling_time():
    e = sp.estimate_coupling_time(1.0, 2.0, 3, 4000, 11)
    assert abs(e["mean"] - 4.0) <= 4 * e["stderr"]
    assert e["replications"] == 4000
