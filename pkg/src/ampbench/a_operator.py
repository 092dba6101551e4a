"""The amplification operator A_{g,lam,x} in truncated two-mode Fock space.

For a thermal ``sigma_x`` the operator is

    A = lam/(1-x) * int d^2a/pi exp(-(lam+1-1/x)|a|^2) |g a><g a| (x) |conj(a)/sqrt(x)><...|

Expanding the coherent states and using
``int d^2a/pi exp(-s|a|^2) a^j conj(a)^k = delta_jk k!/s^(k+1)`` gives, with
``s = lam + 1 + g^2``,

    <m,p|A|n,q> = lam g^(m+n) x^(-(p+q)/2) (m+q)! / ((1-x) sqrt(m! n! p! q!) s^(m+q+1))

when ``m + q == n + p`` and zero otherwise.  The selection rule makes A block
diagonal in ``delta = m - p``; norms and trace powers are computed block by
block.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.special import gammaln

from .fock_core import TwoModeOperator, dominant_eigenvalue, trace_power

log = logging.getLogger(__name__)

ADAPTIVE_START = 30
ADAPTIVE_STEP = 10
ADAPTIVE_CAP = 120


@dataclass(frozen=True)
class AOperatorSpec:
    g: float
    lam: float
    x: float
    dim_out: int = 40
    dim_in: int = 40

    def __post_init__(self):
        if not 0 < self.x < 1:
            raise ValueError(f"x must lie in (0, 1), got {self.x}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.dim_out < 1 or self.dim_in < 1:
            raise ValueError("dimensions must be >= 1")

    def with_dims(self, dim_out, dim_in=None):
        return AOperatorSpec(self.g, self.lam, self.x, dim_out, dim_out if dim_in is None else dim_in)


@dataclass
class CrossNormResult:
    """Best product value found by alternating ascent.

    ``value`` is a certified lower bound on the cross norm; it is exact only
    when matched by an independent upper bound.
    """

    value: float
    phi: np.ndarray
    psi: np.ndarray
    restarts_used: int
    history: list = field(default_factory=list)


@dataclass(frozen=True)
class NormResult:
    value: float
    dim_out: int
    dim_in: int
    truncation_warning: bool = False


def _block_indices(spec, delta):
    lo = max(0, delta)
    hi = min(spec.dim_out - 1, spec.dim_in - 1 + delta)
    return np.arange(lo, hi + 1)


def block_deltas(spec):
    return range(-(spec.dim_in - 1), spec.dim_out)


def build_block(spec, delta):
    """Block of A on the states ``(m, m - delta)``; returns ``(m_values, block)``."""
    g, lam, x = spec.g, spec.lam, spec.x
    s = lam + 1 + g**2
    m = _block_indices(spec, delta)
    M, Nn = np.meshgrid(m, m, indexing="ij")
    P, Q = M - delta, Nn - delta
    k = M + Q
    logv = (
        np.log(lam / (1 - x))
        + (M + Nn) * np.log(g)
        - 0.5 * (P + Q) * np.log(x)
        + gammaln(k + 1)
        - 0.5 * (gammaln(M + 1) + gammaln(Nn + 1) + gammaln(P + 1) + gammaln(Q + 1))
        - (k + 1) * np.log(s)
    )
    return m, np.exp(logv)


def build_a(spec):
    """Dense real matrix of A as a :class:`TwoModeOperator`."""
    d_in = spec.dim_in
    n = spec.dim_out * d_in
    mat = np.zeros((n, n))
    for delta in block_deltas(spec):
        m, block = build_block(spec, delta)
        idx = m * d_in + (m - delta)
        mat[np.ix_(idx, idx)] = block
    return TwoModeOperator(mat, spec.dim_out, d_in)


def _norm_at(spec, tol):
    best = 0.0
    for delta in block_deltas(spec):
        _, block = build_block(spec, delta)
        value, _ = dominant_eigenvalue(block, tol=tol)
        best = max(best, value)
    return best


def operator_norm_numeric(spec, tol=1e-3, adaptive=True, eig_tol=1e-13):
    """Largest eigenvalue of the truncated A.

    With ``adaptive`` the dimensions start at 30 and grow by 10 until the
    value moves by less than ``tol / 2`` (relative), capped at 120 per mode.
    Otherwise the dimensions of ``spec`` are used as given.
    """
    if not adaptive:
        return NormResult(_norm_at(spec, eig_tol), spec.dim_out, spec.dim_in)
    d = ADAPTIVE_START
    prev = _norm_at(spec.with_dims(d), eig_tol)
    while d < ADAPTIVE_CAP:
        d += ADAPTIVE_STEP
        cur = _norm_at(spec.with_dims(d), eig_tol)
        if abs(cur - prev) < 0.5 * tol * abs(cur):
            return NormResult(cur, d, d)
        prev = cur
    log.warning("operator norm not converged at dims (%d, %d)", d, d)
    return NormResult(prev, d, d, truncation_warning=True)


def trace_power_numeric(spec, p):
    """``Tr[A^p]`` of the truncated operator, summed over blocks."""
    return sum(trace_power(build_block(spec, delta)[1], p) for delta in block_deltas(spec))


def partial_transpose(A):
    """Transpose on the input (second) mode: ``<m,p|A^T2|n,q> = <m,q|A|n,p>``."""
    t = A.as_tensor().transpose(0, 3, 2, 1)
    return TwoModeOperator(np.ascontiguousarray(t).reshape(A.matrix.shape), A.dim_out, A.dim_in)


def _top_vector(M):
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    return V[:, -1]


def _random_unit(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def _contraction_matrix(rows):
    # A-operators obey a photon-number selection rule, so mostly zeros
    if np.count_nonzero(rows) < 0.2 * rows.size:
        return sparse.csr_matrix(rows)
    return rows


def _matvec(M, v):
    if np.iscomplexobj(M):
        return M @ v
    # keeps a large real M from being upcast to complex
    return M @ v.real + 1j * (M @ v.imag)


def cross_norm_numeric(A, restarts=20, tol=1e-10, seed=0, max_sweeps=500):
    """Injective cross norm of a PSD two-mode operator by alternating ascent.

    Each sweep fixes the input-mode vector, contracts A down to the output
    mode and takes the top eigenvector, then does the same the other way.
    Restarts use seeded random complex unit vectors; the best pair wins.
    Every sweep can only increase the product value, so a capped run still
    returns a valid lower bound.
    """
    d_out, d_in = A.dim_out, A.dim_in
    t = A.as_tensor()
    # [m, p, n, q] -> rows (m, p, n) for contracting q, and (p, q, m) x n
    by_q = _contraction_matrix(t.reshape(d_out * d_in * d_out, d_in))
    by_n = _contraction_matrix(
        np.ascontiguousarray(t.transpose(1, 3, 0, 2)).reshape(d_in * d_in * d_out, d_out)
    )
    rng = np.random.default_rng(seed)
    best = None
    history = []
    for _ in range(restarts):
        psi = _random_unit(rng, d_in)
        value = -np.inf
        for _ in range(max_sweeps):
            m_out = np.einsum("p,mpn->mn", psi.conj(), _matvec(by_q, psi).reshape(d_out, d_in, d_out))
            phi = _top_vector(m_out)
            m_in = np.einsum("m,pqm->pq", phi.conj(), _matvec(by_n, phi).reshape(d_in, d_in, d_out))
            psi = _top_vector(m_in)
            new = float(np.real(np.vdot(psi, m_in @ psi)))
            if abs(new - value) <= tol * abs(new):
                value = new
                break
            value = new
        history.append(value)
        if best is None or value > best[0]:
            best = (value, phi, psi)
    return CrossNormResult(best[0], best[1], best[2], restarts, history)


def product_expectation(A, phi, psi):
    """``<phi|<psi| A |phi>|psi>``."""
    v = np.kron(phi, psi)
    return float(np.real(np.vdot(v, A.matrix @ v)))
