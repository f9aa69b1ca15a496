import math

import numpy as np
import pytest
import scipy.linalg

from agentloop import experiments as exp
from agentloop.certificates import (
    CertificateError,
    certify_mode,
    comparability_constant,
    decay_rate,
    eigen_spectrum,
    solve_lyapunov,
)


def quadratic_roots(a):
    """Independent 2x2 oracle: eigenvalues from trace and determinant."""
    tr = a[0][0] + a[1][1]
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    disc = complex(tr * tr - 4.0 * det) ** 0.5
    return sorted([(tr + disc) / 2.0, (tr - disc) / 2.0], key=lambda z: (z.real, z.imag))


def test_spectrum_a2_real_parts():
    spec = eigen_spectrum(exp.A2)
    re = sorted(z.real for z in spec)
    assert re[0] == pytest.approx(-2.057, abs=1e-3)
    assert re[1] == pytest.approx(-0.609, abs=1e-3)


def test_spectrum_identity_and_rotation():
    assert eigen_spectrum(-np.eye(2)) == [(-1 + 0j), (-1 + 0j)]
    spec = eigen_spectrum([[0.0, 1.0], [-1.0, 0.0]])
    assert spec == [complex(0, -1), complex(0, 1)]


def test_spectrum_matches_quadratic_oracle():
    for a in (exp.A1, exp.A2, exp.A1 + exp.AD, exp.A2 + exp.AD):
        got = eigen_spectrum(a)
        want = quadratic_roots(a.tolist())
        for g, w in zip(got, want):
            assert abs(g - w) < 1e-12


def test_spectrum_larger_matrix_residual_checked():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 5))
    got = sorted(eigen_spectrum(a), key=lambda z: (z.real, z.imag))
    want = sorted(np.linalg.eigvals(a), key=lambda z: (z.real, z.imag))
    for g, w in zip(got, want):
        assert abs(g - w) < 1e-9


def test_spectrum_rejects_nonsquare():
    with pytest.raises(CertificateError):
        eigen_spectrum(np.zeros((2, 3)))


def test_decay_rate_a2_anchor():
    assert decay_rate(exp.A2) == pytest.approx(0.609, abs=1e-3)


def test_decay_rate_identity():
    assert decay_rate(-np.eye(2)) == 1.0


def test_decay_rate_a1_from_quadratic_oracle():
    want = min(-z.real for z in quadratic_roots(exp.A1.tolist()))
    assert decay_rate(exp.A1) == pytest.approx(want, abs=1e-12)


def test_decay_rate_rejects_non_hurwitz():
    with pytest.raises(CertificateError, match="not Hurwitz"):
        decay_rate(np.array([[0.0, 1.0], [2.0, -0.2]]))


def test_lyapunov_identity_case():
    p = solve_lyapunov(-np.eye(2), np.eye(2))
    assert np.allclose(p, 0.5 * np.eye(2), atol=1e-14)


def test_lyapunov_diagonal_case():
    p = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
    assert np.allclose(p, np.diag([0.5, 0.25]), atol=1e-14)


def test_lyapunov_a1_residual_and_scipy_cross_check():
    a = exp.A1
    p = solve_lyapunov(a)
    resid = np.linalg.norm(a.T @ p + p @ a + np.eye(2))
    assert resid <= 1e-10 * np.linalg.norm(np.eye(2))
    # independent dense solver route
    p_ref = scipy.linalg.solve_continuous_lyapunov(a.T, -np.eye(2))
    assert np.allclose(p, p_ref, atol=1e-10)


def test_lyapunov_rejects_non_hurwitz_and_bad_q():
    with pytest.raises(CertificateError):
        solve_lyapunov(np.array([[1.0]]), np.eye(1))
    with pytest.raises(CertificateError):
        solve_lyapunov(-np.eye(2), -np.eye(2))
    with pytest.raises(CertificateError):
        solve_lyapunov(-np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_lyapunov_residual_on_1000_random_hurwitz():
    rng = np.random.default_rng(42)
    eye = {2: np.eye(2), 3: np.eye(3)}
    for k in range(1000):
        n = 2 if k % 2 == 0 else 3
        m = rng.normal(size=(n, n))
        a = -(m.T @ m) - 0.05 * eye[n]
        p = solve_lyapunov(a, eye[n])
        resid = np.linalg.norm(a.T @ p + p @ a + eye[n])
        assert resid <= 1e-10 * np.linalg.norm(eye[n])
        assert np.min(np.linalg.eigvalsh(p)) > 0


def test_decay_rate_similarity_invariance():
    rng = np.random.default_rng(11)
    for _ in range(50):
        m = rng.normal(size=(3, 3))
        a = -(m.T @ m) - 0.1 * np.eye(3)
        t = np.eye(3) + 0.1 * rng.normal(size=(3, 3))
        sim = t @ a @ np.linalg.inv(t)
        assert decay_rate(sim) == pytest.approx(decay_rate(a), abs=1e-8)


def test_comparability_single_mode_is_one():
    assert comparability_constant([certify_mode(exp.A1)]) == 1.0


def test_comparability_eigenvalue_ratio():
    from agentloop.certificates import ModeCertificate

    c1 = ModeCertificate(p_matrix=np.eye(2), gamma=1.0, eigenvalues=[-1, -1])
    c2 = ModeCertificate(p_matrix=2 * np.eye(2), gamma=1.0, eigenvalues=[-1, -1])
    assert comparability_constant([c1, c2]) == 2.0


def test_comparability_benchmark_pair_at_least_one():
    nu = comparability_constant([certify_mode(exp.A1), certify_mode(exp.A2)])
    assert nu >= 1.0


def test_comparability_scale_covariance():
    from agentloop.certificates import ModeCertificate

    rng = np.random.default_rng(5)
    m = rng.normal(size=(2, 2))
    base = certify_mode(-(m.T @ m) - 0.1 * np.eye(2))
    other = certify_mode(exp.A2)
    lo_b, hi_b = base.p_eig_bounds
    lo_o, hi_o = other.p_eig_bounds
    for s in (1.0, 2.0, 7.5):
        scaled = ModeCertificate(p_matrix=s * other.p_matrix, gamma=other.gamma,
                                 eigenvalues=other.eigenvalues)
        got = comparability_constant([base, scaled])
        want = max(1.0, (s * hi_o) / lo_b, hi_b / (s * lo_o))
        assert got == pytest.approx(want, rel=1e-12)


def test_comparability_dimension_mismatch():
    with pytest.raises(CertificateError):
        comparability_constant([certify_mode(exp.A1), certify_mode(-np.eye(3))])


def test_frozen_mode_lyapunov_nonincreasing_along_run():
    from agentloop.engine import simulate

    cfg = exp.level1_baseline()
    p = solve_lyapunov(exp.A1)
    traj = simulate(cfg)
    v = np.einsum("ij,jk,ik->i", traj.x, p, traj.x)
    assert np.all(np.diff(v) <= 1e-12 * v[0])
