"""Lyapunov-theoretic constants for small dense linear modes.

Quadratic certificates V_p(x) = x' P_p x with A' P + P A = -Q, per-mode
decay rates from the spectrum, and the cross-mode comparability factor.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .model import ModeDynamics

MAX_DIM = 16
_EIG_RESIDUAL_RTOL = 1e-10
_LYAP_RESIDUAL_RTOL = 1e-10
_SYMMETRY_RTOL = 1e-12


class CertificateError(ValueError):
    """Raised when a certificate cannot be produced (non-Hurwitz mode, bad Q)."""


def _square(a) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise CertificateError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise CertificateError(f"dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise CertificateError("matrix has non-finite entries")
    return a


def eigen_spectrum(a) -> list[complex]:
    """Eigenvalues of a square matrix, sorted by (real, imag).

    2x2 uses the closed-form quadratic; larger sizes use the dense
    iterative solver with a per-pair residual check |Av - lambda v|
    <= 1e-10 |A|.
    """
    a = _square(a)
    n = a.shape[0]
    if n == 1:
        return [complex(a[0, 0])]
    if n == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = cmath.sqrt(complex(tr * tr - 4.0 * det))
        lam = [(tr + disc) / 2.0, (tr - disc) / 2.0]
    else:
        vals, vecs = np.linalg.eig(a)
        scale = np.linalg.norm(a, 2)
        for k in range(n):
            resid = np.linalg.norm(a @ vecs[:, k] - vals[k] * vecs[:, k])
            if resid > _EIG_RESIDUAL_RTOL * max(scale, 1.0):
                raise CertificateError(
                    f"eigenpair residual {resid:.3e} exceeds tolerance for eigenvalue {vals[k]}"
                )
        lam = [complex(v) for v in vals]
    return sorted(lam, key=lambda z: (z.real, z.imag))


def decay_rate(a) -> float:
    """Frozen-mode decay rate: min over the spectrum of -Re(lambda).

    Requires a Hurwitz matrix; the offending eigenvalue is named otherwise.
    """
    spec = eigen_spectrum(a)
    worst = max(spec, key=lambda z: z.real)
    if worst.real >= 0:
        raise CertificateError(f"matrix is not Hurwitz: eigenvalue {worst} has Re >= 0")
    return -worst.real


def solve_lyapunov(a, q=None) -> np.ndarray:
    """Unique SPD solution P of A' P + P A = -Q via the Kronecker system.

    Q defaults to the identity.  The result is symmetrized and the
    residual is verified against 1e-10 |Q|_F.
    """
    a = _square(a)
    n = a.shape[0]
    if q is None:
        q = np.eye(n)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if q.shape != a.shape:
        raise CertificateError(f"Q shape {q.shape} does not match A shape {a.shape}")
    if np.linalg.norm(q - q.T) > _SYMMETRY_RTOL * max(np.linalg.norm(q), 1.0):
        raise CertificateError("Q must be symmetric")
    if np.min(np.linalg.eigvalsh(q)) <= 0:
        raise CertificateError("Q must be positive definite")
    decay_rate(a)  # rejects non-Hurwitz a, for which no SPD solution exists

    eye = np.eye(n)
    # vec(A'P) + vec(PA) = (I (x) A' + A' (x) I) vec(P)
    kron = np.kron(eye, a.T) + np.kron(a.T, eye)
    p = np.linalg.solve(kron, -q.reshape(-1)).reshape(n, n)
    p = 0.5 * (p + p.T)

    resid = np.linalg.norm(a.T @ p + p @ a + q)
    if resid > _LYAP_RESIDUAL_RTOL * np.linalg.norm(q):
        raise CertificateError(f"Lyapunov residual {resid:.3e} exceeds tolerance")
    return p


@dataclass
class ModeCertificate:
    """Quadratic certificate of one mode: P matrix, decay rate, spectrum."""

    p_matrix: np.ndarray
    gamma: float
    eigenvalues: list[complex]

    @property
    def dim(self) -> int:
        return self.p_matrix.shape[0]

    @property
    def p_eig_bounds(self) -> tuple[float, float]:
        """(lambda_min, lambda_max) of the P matrix."""
        w = np.linalg.eigvalsh(self.p_matrix)
        return float(w[0]), float(w[-1])


def certify_mode(dyn: ModeDynamics | np.ndarray, q=None) -> ModeCertificate:
    """Build the quadratic certificate for one mode's flow matrix."""
    a = dyn.a if isinstance(dyn, ModeDynamics) else np.asarray(dyn, dtype=float)
    return ModeCertificate(
        p_matrix=solve_lyapunov(a, q),
        gamma=decay_rate(a),
        eigenvalues=eigen_spectrum(a),
    )


def comparability_constant(certs: list[ModeCertificate]) -> float:
    """Smallest nu >= 1 with V_p <= nu V_p' for every ordered mode pair.

    For quadratic pairs this is the max over p != p' of
    lambda_max(P_p) / lambda_min(P_p'); a single mode gives exactly 1.
    """
    if not certs:
        raise CertificateError("need at least one certificate")
    dims = {c.dim for c in certs}
    if len(dims) > 1:
        raise CertificateError(f"certificates have mismatched dimensions {sorted(dims)}")
    nu = 1.0
    bounds = [c.p_eig_bounds for c in certs]
    for i, (_, hi_i) in enumerate(bounds):
        for j, (lo_j, _) in enumerate(bounds):
            if i != j:
                nu = max(nu, hi_i / lo_j)
    return nu
