import numpy as np
import pytest

from hypflow.analysis import find_sigma0, phi0_min_gap, phi_derivative, phi_eval, phi_theta_eval
from hypflow.errors import DomainError, ParameterError


def test_phi_endpoints_and_monotonicity():
    assert phi_eval(0.0) == pytest.approx(-(3.0**1.5) / 27.0)
    assert phi_eval(1.0) == pytest.approx(4 / 3 - 1 / 27 - 8 / 27)
    a = np.linspace(0, 1, 1001)
    assert np.all(phi_derivative(a) > 0)
    fd = (phi_eval(a[1:]) - phi_eval(a[:-1])) / (a[1] - a[0])
    assert np.allclose(fd, phi_derivative(0.5 * (a[1:] + a[:-1])), atol=1e-6)


def test_root_and_bracket():
    res = find_sigma0(1e-10)
    assert 0.14596 < res.root < 0.14597
    assert res.residual < 1e-9
    assert res.bracket[1] - res.bracket[0] <= 1e-10
    assert phi_eval(res.bracket[0]) < 0 < phi_eval(res.bracket[1])


def test_deterministic_and_loose_tolerance():
    assert find_sigma0(1e-12) == find_sigma0(1e-12)
    loose = find_sigma0(1e-4)
    assert loose.bracket[0] < 0.14596427586 < loose.bracket[1]
    with pytest.raises(DomainError):
        find_sigma0(1e-20)


def test_phi_theta():
    assert phi_theta_eval(1.0, 0.3) == pytest.approx(0.3)
    assert phi_theta_eval(0.3, 0.3, theta=0.5) == pytest.approx(0.3)
    with pytest.raises(ParameterError):
        phi_theta_eval(0.5, 0.3, theta=1.0)


def test_phi0_stays_above_phi_beyond_sigma0():
    # above σ₀ the minimum of φ₀ over [a, 1] does not fall below φ(a)
    for a in np.linspace(0.15, 0.95, 9):
        assert phi0_min_gap(a) >= -1e-12
