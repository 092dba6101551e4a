"""Simulators for the amplifier, filter, attenuator and measure-and-prepare
channels, plus quadrature and exact-series fidelity routes.

The squeezer and the attenuator are built from the exponentiated two-mode
generators (``r (a^dag b^dag - a b)`` and ``theta (a b^dag - a^dag b)``), never
from analytic Kraus formulas, so they check the closed forms independently.
Both generators conserve a photon-number combination, so the unitary is
exponentiated one invariant block at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from scipy.special import gammaln

from . import closed_forms as cf
from .fock_core import (
    FockDomainError,
    coherent_state,
    trace_distance,
    unitary_from_generator,
)

GL_ORDER = 64
GH_ORDER = 48
DEFAULT_MAX_DEFICIT = 1e-6


class TruncationError(RuntimeError):
    """Too much weight left the truncated output space."""

    def __init__(self, message, deficit):
        super().__init__(message)
        self.deficit = deficit


# -- channel descriptions -----------------------------------------------------


@dataclass(frozen=True)
class Squeezer:
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise FockDomainError(f"squeezing must be nonnegative, got {self.r}")


@dataclass(frozen=True)
class Attenuator:
    eta: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise FockDomainError(f"attenuation must satisfy 0 < eta <= 1, got {self.eta}")


@dataclass(frozen=True)
class Filter:
    x: float
    N: int

    def __post_init__(self):
        if not self.x > 0 or self.N < 0:
            raise FockDomainError(f"filter needs x > 0 and N >= 0, got x={self.x}, N={self.N}")


@dataclass(frozen=True)
class MeasurePrepareHeterodyne:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise FockDomainError(f"re-preparation gain must be positive, got {self.c}")


@dataclass(frozen=True)
class FilterResult:
    conditional_fidelity: float
    success_probability: float
    N: int


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    order: int
    warning: str | None = None

    def __float__(self):
        return self.value


# -- squeezer -------------------------------------------------------------------


def _chain_generator(weights):
    """Real antisymmetric tridiagonal generator with the given off-diagonal couplings."""
    L = len(weights) + 1
    K = np.zeros((L, L))
    idx = np.arange(L - 1)
    K[idx + 1, idx] = weights
    K[idx, idx + 1] = -weights
    return K


def squeezer_kraus(r, dim, anc_dim=None):
    """Kraus operators ``E_k = <k|_B U |0>_B`` projected onto ``dim`` output levels.

    Input level ``n`` with the ancilla in vacuum lives in the invariant chain
    ``(n + k, k)``, ``k < anc_dim``; the output mode is carried untruncated
    along that chain and only projected at the end.
    """
    anc_dim = dim if anc_dim is None else anc_dim
    kraus = np.zeros((anc_dim, dim, dim), dtype=complex)
    k = np.arange(anc_dim - 1)
    for n in range(dim):
        if anc_dim == 1:
            column = np.ones(1, dtype=complex)
        else:
            # a^dag b^dag |n+k, k> = sqrt((n+k+1)(k+1)) |n+k+1, k+1>
            U, _ = unitary_from_generator(_chain_generator(r * np.sqrt((n + k + 1.0) * (k + 1.0))))
            column = U[:, 0]
        keep = min(anc_dim, dim - n)
        kraus[np.arange(keep), n + np.arange(keep), n] = column[:keep]
    return kraus


def _apply_kraus(kraus, rho):
    return np.sum((kraus @ rho) @ kraus.conj().transpose(0, 2, 1), axis=0)


def apply_squeezer(rho, r, anc_dim=None, max_deficit=DEFAULT_MAX_DEFICIT, return_deficit=False):
    """Two-mode squeezer channel ``Tr_B[U (rho (x) |0><0|) U^dag]``.

    Raises :class:`TruncationError` when more than ``max_deficit`` of the
    trace falls outside the output truncation.
    """
    rho = np.asarray(rho, dtype=complex)
    out = _apply_kraus(squeezer_kraus(r, rho.shape[0], anc_dim), rho)
    deficit = float(np.real(np.trace(rho) - np.trace(out)))
    if deficit > max_deficit:
        raise TruncationError(
            f"squeezer output lost {deficit:.3e} of its trace to truncation", deficit
        )
    return (out, deficit) if return_deficit else out


def squeezer_ancilla_check(rho, r, anc_dim=None):
    """Change in the squeezer output when the ancilla dimension is doubled."""
    dim = np.asarray(rho).shape[0]
    anc_dim = dim if anc_dim is None else anc_dim
    a = apply_squeezer(rho, r, anc_dim, max_deficit=np.inf)
    b = apply_squeezer(rho, r, 2 * anc_dim, max_deficit=np.inf)
    return float(np.max(np.abs(a - b)))


def squeezer_fidelity_pointwise(g, r, alpha):
    """``<g alpha| C_r(|alpha><alpha|) |g alpha>`` in closed form."""
    if r < 0:
        raise FockDomainError(f"squeezing must be nonnegative, got {r}")
    c = np.cosh(r)
    return np.exp(-((g - c) ** 2) * np.abs(alpha) ** 2 / c**2) / c**2


# -- prior averages -------------------------------------------------------------


def _laguerre_average(pointwise, lam, order):
    t, w = laggauss(order)
    u = t / lam
    try:
        vals = np.asarray(pointwise(u), dtype=float)
        if vals.shape != u.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(pointwise(ui)) for ui in u])
    return float(np.sum(w * vals))


def average_fidelity_quadrature(pointwise, lam, quad_order=GL_ORDER, rtol=1e-10):
    """Prior average ``int_0^inf lam exp(-lam u) f(u) du`` of a phase-covariant
    pointwise fidelity ``f(u)``, ``u = |alpha|^2``, by Gauss-Laguerre.

    The error estimate is the change on doubling the order.
    """
    if not lam > 0:
        raise FockDomainError(f"lambda must be positive, got {lam}")
    value = _laguerre_average(pointwise, lam, quad_order)
    refined = _laguerre_average(pointwise, lam, 2 * quad_order)
    err = abs(refined - value)
    warning = None
    if err > rtol * max(1.0, abs(refined)):
        warning = f"order doubling changed the value by {err:.3e}"
    return QuadratureResult(value, err, quad_order, warning)


# -- probabilistic filters -----------------------------------------------------


def filter_coefficients(x, N, dim=None):
    """Diagonal of Q_N, scaled so the largest coefficient is 1."""
    if not x > 0 or N < 0:
        raise FockDomainError(f"filter needs x > 0 and N >= 0, got x={x}, N={N}")
    dim = N + 1 if dim is None else dim
    n = np.arange(dim)
    logc = n * math.log(x)
    logc -= np.max(logc[: N + 1])
    c = np.exp(logc)
    c[n > N] = 0.0
    return c


def apply_filter(rho, x, N):
    """Unnormalised ``Q_N rho Q_N`` and its success probability."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if N >= dim:
        raise FockDomainError(f"cutoff N={N} must be below the dimension {dim}")
    c = filter_coefficients(x, N, dim)
    out = c[:, None] * rho * c[None, :]
    return out, float(np.real(np.trace(out)))


def filter_fidelity_exact(g, lam, x, N):
    """Conditional prior-averaged fidelity of the geometric filter, as exact finite sums.

    numerator   = lam sum_{m,n<=N} c_m c_n g^(m+n) (m+n)!/(m! n!) / s^(m+n+1),  s = lam+1+g^2
    denominator = lam sum_{n<=N} c_n^2 / (lam+1)^(n+1)
    """
    if not lam > 0:
        raise FockDomainError(f"lambda must be positive, got {lam}")
    if lam + 1 <= x * x:
        raise FockDomainError(f"series diverge as N grows: need x^2 < lambda+1, got x={x}")
    c = filter_coefficients(x, N)
    with np.errstate(divide="ignore"):
        logc = np.log(c)
    n = np.arange(N + 1)
    s = lam + 1 + g**2
    M, Nn = np.meshgrid(n, n, indexing="ij")
    K = M + Nn
    log_num = (
        logc[M] + logc[Nn] + K * math.log(g)
        + gammaln(K + 1) - gammaln(M + 1) - gammaln(Nn + 1) - (K + 1) * math.log(s)
    )
    numerator = lam * float(np.sum(np.exp(log_num)))
    denominator = lam * float(np.sum(np.exp(2 * logc - (n + 1) * math.log(lam + 1))))
    return FilterResult(numerator / denominator, denominator, int(N))


# -- attenuator ---------------------------------------------------------------------


def attenuator_kraus(eta, dim):
    """Kraus operators of a beamsplitter with amplitude transmissivity ``eta``."""
    if not 0 < eta <= 1:
        raise FockDomainError(f"attenuation must satisfy 0 < eta <= 1, got {eta}")
    theta = math.acos(eta)
    kraus = np.zeros((dim, dim, dim), dtype=complex)
    kraus[0, 0, 0] = 1.0
    for n in range(1, dim):
        # block of total photon number n, basis (n - k, k)
        k = np.arange(n)
        # a b^dag |n-k, k> = sqrt((n-k)(k+1)) |n-k-1, k+1>
        U, _ = unitary_from_generator(_chain_generator(theta * np.sqrt((n - k) * (k + 1.0))))
        kk = np.arange(n + 1)
        kraus[kk, n - kk, n] = U[:, 0]
    return kraus


def apply_attenuator(rho, eta):
    """Pure-loss channel sending ``|alpha>`` to ``|eta alpha>``."""
    rho = np.asarray(rho, dtype=complex)
    return _apply_kraus(attenuator_kraus(eta, rho.shape[0]), rho)


# -- heterodyne measure-and-prepare --------------------------------------------------


def mp_heterodyne_apply(beta, c, dim, quad_order=GH_ORDER):
    """Output of heterodyne + re-preparation of ``|c alpha_hat>`` on input ``|beta>``.

    Computes ``int d^2a/pi exp(-|a - beta|^2) |c a><c a|`` by a tensor
    Gauss-Hermite rule whose Gaussian absorbs both the outcome density and
    the coherent-state envelope, so each matrix element is integrated exactly
    up to polynomial degree ``2 * quad_order - 1`` per axis.
    """
    if not c > 0:
        raise FockDomainError(f"re-preparation gain must be positive, got {c}")
    beta = complex(beta)
    spread = 1 + c * c
    centre = beta / spread
    t, w = hermgauss(quad_order)
    U, V = np.meshgrid(t, t, indexing="ij")
    nodes = (centre + (U + 1j * V) / math.sqrt(spread)).ravel()
    weights = np.outer(w, w).ravel()
    n = np.arange(dim)
    z = c * nodes
    with np.errstate(divide="ignore"):
        logmag = n[None, :] * np.log(np.abs(z))[:, None] - 0.5 * gammaln(n + 1)[None, :]
    vecs = np.exp(logmag) * np.exp(1j * np.angle(z)[:, None] * n[None, :])
    vecs[:, 0] = 1.0
    scale = math.exp(-c * c * abs(beta) ** 2 / spread) / (math.pi * spread)
    return scale * (vecs.T * weights) @ vecs.conj()


def verify_mp_attenuated_equivalence(g, lam, beta, dim=50, anc_dim=None, attenuate_first=True):
    """Trace distance between the optimal measure-and-prepare output and the
    attenuated optimal squeezer of gain ``g' = sqrt(g^2 + (lam+1)^2)`` on ``|beta>``.

    The identity holds with the attenuation acting on the input before the
    squeezer; ``attenuate_first=False`` composes the other way round.
    """
    params = cf.classical_limit_params(g, lam)
    c = g / (1 + lam)
    r_prime = math.acosh(params.g_prime / (lam + 1))
    mp = mp_heterodyne_apply(beta, c, dim)
    psi = coherent_state(beta, dim)
    rho = np.outer(psi, psi.conj())
    if attenuate_first:
        out = apply_squeezer(apply_attenuator(rho, params.eta), r_prime, anc_dim, max_deficit=np.inf)
    else:
        out = apply_attenuator(apply_squeezer(rho, r_prime, anc_dim, max_deficit=np.inf), params.eta)
    return trace_distance(mp, out)


def apply_channel(spec, rho, **kwargs):
    """Dispatch on a channel description; filters return ``(output, probability)``."""
    if isinstance(spec, Squeezer):
        return apply_squeezer(rho, spec.r, **kwargs)
    if isinstance(spec, Attenuator):
        return apply_attenuator(rho, spec.eta)
    if isinstance(spec, Filter):
        return apply_filter(rho, spec.x, spec.N)
    if isinstance(spec, MeasurePrepareHeterodyne):
        raise TypeError("heterodyne channel takes a coherent amplitude; use mp_heterodyne_apply")
    raise TypeError(f"unknown channel {spec!r}")
