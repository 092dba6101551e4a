"""Truncated single- and two-mode Fock-space linear algebra.

States are plain complex numpy vectors, operators plain square arrays.  Only
two-mode operators carry explicit dimension metadata, since the flattening
``m * dim_in + p`` (``m`` output-mode level, ``p`` input-mode level) is needed
to take partial traces and partial transposes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

STRUCTURAL_TOL = 1e-12
POWER_ITERATION_CAP = 100_000


class FockDomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """Iterative routine stopped at its cap; ``last`` holds the final iterate."""

    def __init__(self, message, value=None, last=None):
        super().__init__(message)
        self.value = value
        self.last = last


def _check_dim(dim, minimum=1):
    if int(dim) != dim or dim < minimum:
        raise FockDomainError(f"Fock dimension must be an integer >= {minimum}, got {dim}")
    return int(dim)


def coherent_state(alpha, dim):
    """Fock amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` for ``n < dim``."""
    dim = _check_dim(dim)
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
        return vec
    # log-space keeps large n finite for big |alpha|
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def coherent_overlap(alpha, beta):
    """Exact <alpha|beta> for coherent states, no truncation."""
    alpha = complex(alpha)
    beta = complex(beta)
    return np.exp(0.5 * (-abs(beta) ** 2 - abs(alpha) ** 2 + 2 * np.conj(alpha) * beta))


def coherent_tail(alpha, dim):
    """Weight a coherent state puts on levels ``>= dim`` (Poisson tail)."""
    from scipy.stats import poisson

    return float(poisson.sf(dim - 1, abs(complex(alpha)) ** 2))


def thermal_state(x, dim):
    """Truncated thermal state ``(1 - x) sum_n x^n |n><n|``."""
    dim = _check_dim(dim)
    if not 0 <= x < 1:
        raise FockDomainError(f"thermal parameter must satisfy 0 <= x < 1, got {x}")
    return np.diag((1 - x) * float(x) ** np.arange(dim)).astype(complex)


def mode_operators(dim):
    """Return ``(a, a_dagger, number)`` truncated to ``dim`` levels."""
    dim = _check_dim(dim, minimum=2)
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    return a, a.conj().T.copy(), np.diag(np.arange(dim)).astype(complex)


@dataclass(frozen=True)
class TwoModeOperator:
    """Operator on ``H_out (x) H_in`` with flattened index ``m * dim_in + p``."""

    matrix: np.ndarray
    dim_out: int
    dim_in: int

    def __post_init__(self):
        n = self.dim_out * self.dim_in
        if self.matrix.shape != (n, n):
            raise FockDomainError(
                f"matrix shape {self.matrix.shape} inconsistent with dims "
                f"({self.dim_out}, {self.dim_in})"
            )

    def as_tensor(self):
        """View as a rank-4 array indexed ``[m, p, n, q]``."""
        return self.matrix.reshape(self.dim_out, self.dim_in, self.dim_out, self.dim_in)


def tensor(A, B):
    """Kronecker product ``A (x) B`` as a :class:`TwoModeOperator`."""
    A = np.asarray(A)
    B = np.asarray(B)
    return TwoModeOperator(np.kron(A, B), A.shape[0], B.shape[0])


def partial_trace(X, keep="out"):
    """Trace out one mode of a two-mode operator; ``keep`` is ``"out"`` or ``"in"``."""
    t = X.as_tensor()
    if keep == "out":
        return np.einsum("mpnp->mn", t)
    if keep == "in":
        return np.einsum("mpmq->pq", t)
    raise FockDomainError(f"keep must be 'out' or 'in', got {keep!r}")


def unitary_from_generator(K, tol=1e-10):
    """``exp(K)`` for anti-Hermitian ``K``; returns ``(U, unitarity_defect)``.

    Uses the eigendecomposition of the Hermitian matrix ``iK``.
    """
    K = np.asarray(K, dtype=complex)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise FockDomainError("generator must be a square matrix")
    skew = np.max(np.abs(K + K.conj().T)) if K.size else 0.0
    if skew > tol:
        raise FockDomainError(f"generator is not anti-Hermitian (|K + K^dag| = {skew:.3e})")
    w, V = np.linalg.eigh(1j * K)
    U = (V * np.exp(-1j * w)) @ V.conj().T
    defect = float(np.max(np.abs(U @ U.conj().T - np.eye(K.shape[0])))) if K.size else 0.0
    return U, defect


def _power_start(n):
    # all-ones plus a deterministic, non-symmetric ripple
    v = np.ones(n) + 0.1 * np.sin(np.arange(1, n + 1) * 0.7)
    return v / np.linalg.norm(v)


def dominant_eigenvalue(H, tol=1e-12, max_iter=POWER_ITERATION_CAP):
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    Stops when successive Rayleigh quotients differ by less than
    ``tol * value``.  Raises :class:`ConvergenceError` at the iteration cap.
    """
    H = np.asarray(H)
    n = H.shape[0]
    v = _power_start(n).astype(H.dtype if np.iscomplexobj(H) else float)
    w = H @ v
    value = float(np.real(np.vdot(v, w)))
    for _ in range(max_iter):
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        v = w / norm
        w = H @ v
        new = float(np.real(np.vdot(v, w)))
        if abs(new - value) <= tol * abs(new):
            return new, v
        value = new
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps", value=value, last=v
    )


def trace_power(H, p):
    """``Tr[H^p]``; eigenvalue route for Hermitian input."""
    if int(p) != p or p < 1:
        raise FockDomainError(f"power must be a positive integer, got {p}")
    H = np.asarray(H)
    if np.allclose(H, H.conj().T, atol=STRUCTURAL_TOL, rtol=0):
        return float(np.sum(np.linalg.eigvalsh(H) ** int(p)))
    return float(np.real(np.trace(np.linalg.matrix_power(H, int(p)))))


def trace_distance(rho, sigma):
    """Half the trace norm of ``rho - sigma`` (both Hermitian)."""
    diff = np.asarray(rho) - np.asarray(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def expectation(rho, vec):
    """``<vec|rho|vec>`` as a real number."""
    return float(np.real(np.vdot(vec, rho @ vec)))


def displacement(alpha, dim):
    """Truncated displacement ``exp(alpha a^dag - conj(alpha) a)``."""
    a, ad, _ = mode_operators(dim)
    U, _ = unitary_from_generator(complex(alpha) * ad - np.conj(complex(alpha)) * a)
    return U
