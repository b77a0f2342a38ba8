import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypflow.curvature import (
    CurvatureFunctionSpec,
    F_matrix_eval,
    cone_contains,
    elementary_symmetric_all,
    f_and_grad,
    f_eval,
    normalized_symmetric,
    random_cone_samples,
    verify_structure,
)
from hypflow.errors import ConeViolationError, DomainError, ParameterError
from hypflow.linalg import jacobi_eigh

SPECS = [CurvatureFunctionSpec(n, k, l) for n in (2, 3, 4) for k, l in ((1, 0), (2, 0), (2, 1), (3, 1)) if k <= n]


def test_known_values():
    spec = CurvatureFunctionSpec(3, 2, 1)
    # H2 = (2 + 3 + 6)/3, H1 = 2  ->  f = 11/6
    assert f_eval(spec, [1.0, 2.0, 3.0]) == pytest.approx(11.0 / 6.0, rel=1e-15)
    assert f_eval(CurvatureFunctionSpec(2, 2, 0), [4.0, 9.0]) == pytest.approx(6.0)
    assert f_eval(CurvatureFunctionSpec(3, 1, 0), [1.0, -1.0, 3.0]) == pytest.approx(1.0)


def test_elementary_symmetric_against_brute_force():
    from itertools import combinations

    lam = np.array([0.3, -1.2, 2.5, 0.7])
    e = elementary_symmetric_all(lam, 4)
    for m in range(5):
        brute = sum(np.prod(c) for c in combinations(lam, m)) if m else 1.0
        assert e[m] == pytest.approx(brute, abs=1e-13)
    assert normalized_symmetric(np.ones(4), 3) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        normalized_symmetric(lam, 5)


def test_spec_validation():
    with pytest.raises(ParameterError):
        CurvatureFunctionSpec(2, 3, 0)
    with pytest.raises(ParameterError):
        CurvatureFunctionSpec(3, 2, 2)
    with pytest.raises(ParameterError):
        CurvatureFunctionSpec(0, 1, 0)
    assert CurvatureFunctionSpec(4, 3, 1).order == 2


def test_cone_membership_examples():
    spec = CurvatureFunctionSpec(3, 2, 0)
    assert cone_contains(spec, [1.0, 1.0, 1.0])
    assert cone_contains(spec, [3.0, 3.0, -1.0])
    assert not cone_contains(spec, [1.0, 1.0, -1.0])  # σ₂ = 1 − 2 < 0
    assert not cone_contains(CurvatureFunctionSpec(2, 1, 0), [-1.0, 0.5])
    with pytest.raises(ConeViolationError):
        f_eval(spec, [1.0, 1.0, -1.0])


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"n{s.n}k{s.k}l{s.l}")
def test_gradient_matches_finite_differences(spec):
    rng = np.random.default_rng(3)
    pts = random_cone_samples(spec, 50, rng)
    _, grad = f_and_grad(spec, pts)
    step = 1e-6
    for i in range(spec.n):
        e = np.zeros(spec.n)
        e[i] = step
        fd = (f_eval(spec, pts + e) - f_eval(spec, pts - e)) / (2 * step)
        scale = np.maximum(1.0, np.abs(f_eval(spec, pts)))
        assert np.all(np.abs(fd - grad[:, i]) <= 1e-6 * scale)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"n{s.n}k{s.k}l{s.l}")
def test_structure_conditions_hold(spec):
    rng = np.random.default_rng(11)
    report = verify_structure(spec, random_cone_samples(spec, 2000, rng), tol=1e-10)
    assert report.all_passed, report.summary()


def test_structure_detects_a_broken_function(monkeypatch):
    # a non-concave replacement must trip the concavity check
    spec = CurvatureFunctionSpec(2, 1, 0)
    import hypflow.curvature as cmod

    real = cmod.f_eval

    def convex(s, lam):
        lam = np.asarray(lam, dtype=float)
        return real(s, lam) ** 2

    monkeypatch.setattr(cmod, "f_eval", convex)
    rng = np.random.default_rng(0)
    report = verify_structure(spec, random_cone_samples(spec, 200, rng), tol=1e-10)
    assert not report.passed("concavity")


def _symmetric(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    return 0.5 * (M + M.T)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_jacobi_against_numpy_oracle(n):
    for seed in range(20):
        A = _symmetric(n, seed)
        vals, P = jacobi_eigh(A)
        ref = np.linalg.eigh(A)[0]
        assert np.allclose(vals, ref, atol=1e-12)
        assert np.allclose(P.T @ np.diag(vals) @ P, A, atol=1e-12)
        assert np.allclose(P @ P.T, np.eye(n), atol=1e-12)


def test_jacobi_repeated_eigenvalues():
    Q = np.linalg.qr(np.random.default_rng(5).standard_normal((4, 4)))[0]
    A = Q @ np.diag([2.0, 2.0, 2.0, -1.0]) @ Q.T
    vals, P = jacobi_eigh(A)
    assert np.allclose(vals, [-1.0, 2.0, 2.0, 2.0], atol=1e-13)


def test_F_matrix_is_directional_derivative():
    spec = CurvatureFunctionSpec(3, 2, 1)
    rng = np.random.default_rng(2)
    base = np.diag([1.0, 2.0, 0.5])
    Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    A = Q @ base @ Q.T
    val = F_matrix_eval(spec, A)
    B = _symmetric(3, 9)
    t = 1e-6
    fd = (F_matrix_eval(spec, A + t * B).value - F_matrix_eval(spec, A - t * B).value) / (2 * t)
    assert fd == pytest.approx(np.sum(val.gradient_matrix * B), rel=1e-7)
    # oracle: same value from numpy eigenvalues
    assert val.value == pytest.approx(f_eval(spec, np.linalg.eigvalsh(A)), rel=1e-13)


def test_F_matrix_at_umbilic_point_is_scalar():
    spec = CurvatureFunctionSpec(4, 3, 1)
    val = F_matrix_eval(spec, 0.7 * np.eye(4))
    assert val.value == pytest.approx(0.7)
    assert np.allclose(val.gradient_matrix, np.eye(4) / 4, atol=1e-13)


def test_F_matrix_rejects_wrong_shape():
    with pytest.raises(DomainError):
        F_matrix_eval(CurvatureFunctionSpec(3, 1, 0), np.eye(2))


positive_vectors = arrays(np.float64, 3, elements=st.floats(0.05, 20.0))


@settings(max_examples=200, deadline=None)
@given(lam=positive_vectors, t=st.floats(0.01, 100.0))
def test_homogeneity_property(lam, t):
    spec = CurvatureFunctionSpec(3, 3, 1)
    assert f_eval(spec, t * lam) == pytest.approx(t * f_eval(spec, lam), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(lam=positive_vectors)
def test_symmetry_and_mean_bound_property(lam):
    spec = CurvatureFunctionSpec(3, 2, 0)
    f = f_eval(spec, lam)
    assert f_eval(spec, lam[::-1]) == pytest.approx(f, rel=1e-13)
    assert f <= lam.mean() * (1 + 1e-12)
    assert f >= lam.min() * (1 - 1e-12)


@settings(max_examples=200, deadline=None)
@given(lam=positive_vectors)
def test_euler_relation_property(lam):
    spec = CurvatureFunctionSpec(3, 2, 1)
    f, grad = f_and_grad(spec, lam)
    assert np.dot(grad, lam) == pytest.approx(f, rel=1e-12)
    assert np.all(grad > 0)
    assert grad.sum() >= 1.0 - 1e-12
