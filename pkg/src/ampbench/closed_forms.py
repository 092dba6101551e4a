"""Closed-form fidelities, benchmarks and A-operator quantities.

Conventions: ``g`` is the target amplitude gain, ``lam`` the inverse variance
of the centred Gaussian prior ``lam * exp(-lam |alpha|^2)`` (measure
``d^2 alpha / pi``), so the mean photon number of the source is ``1 / lam``.
A prior centred at ``alpha0 != 0`` reduces to the centred case by displacing
the input by ``-alpha0`` and the output by ``g * alpha0``.

Branch points ``lam = g - 1`` and ``lam = g**2 - 1`` belong to the left
(lower-``lam``) branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: offset used when the optimal thermal parameter would be exactly 1
X_CLAMP_EPS = 1e-9


class DomainError(ValueError):
    """Parameters outside the validity region of a formula."""


class DivergentIntegralError(DomainError):
    """The Gaussian integral behind a trace formula does not converge."""


@dataclass(frozen=True)
class AmplifierParams:
    g: float
    lam: float
    r: float | None = None
    x: float | None = None
    N: int | None = None

    def __post_init__(self):
        if not self.g > 0:
            raise DomainError(f"gain must be positive, got g={self.g}")
        if not self.lam >= 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        if self.r is not None and self.r < 0:
            raise DomainError(f"squeezing must be nonnegative, got r={self.r}")


@dataclass(frozen=True)
class ClassicalLimitParams:
    g_prime: float
    eta: float


def _require_gain(g):
    if g < 1:
        raise DomainError(f"gain g={g} < 1 (attenuation) is not covered")


def _require_lam(lam):
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")


def f_squeeze_r(g, lam, r):
    """Average fidelity of the two-mode squeezer with squeezing ``r``."""
    if not lam > 0:
        raise DomainError("f_squeeze_r needs lambda > 0; the uniform prior is only a limit")
    if r < 0:
        raise DomainError(f"squeezing must be nonnegative, got r={r}")
    c = math.cosh(r)
    return lam / (lam * c * c + (g - c) ** 2)


def f_squeeze_opt(g, lam):
    """Optimal deterministic fidelity and the squeezing that attains it."""
    _require_gain(g)
    _require_lam(lam)
    if lam <= g - 1:
        return (lam + 1) / g**2, math.acosh(g / (lam + 1))
    return lam / (lam + (g - 1) ** 2), 0.0


def f_det(g, lam):
    return f_squeeze_opt(g, lam)[0]


def f_prob(g, lam):
    """Optimal probabilistic fidelity."""
    _require_gain(g)
    _require_lam(lam)
    if lam <= g**2 - 1:
        return (lam + 1) / g**2
    return 1.0


def cft(g, lam):
    """Classical fidelity threshold (measure-and-prepare benchmark)."""
    if not g > 0:
        raise DomainError(f"gain must be positive, got g={g}")
    _require_lam(lam)
    return (1 + lam) / (1 + lam + g**2)


def norm_a_closed(g, lam, x):
    """Operator norm of the thermal-ansatz A-operator, valid for ``x >= 1/(lam+1)``."""
    if not 0 < x < 1:
        raise DomainError(f"thermal parameter must satisfy 0 < x < 1, got x={x}")
    # tiny slack so the exact boundary x = 1/(lam+1) survives rounding
    if x * (lam + 1) < 1 - 1e-14:
        raise DomainError(
            f"closed form requires x >= 1/(lambda+1) = {1 / (lam + 1):.6g}, got x={x}"
        )
    s = lam + g**2 + 1
    disc = max(s * s - 4 * g**2 / x, 0.0)
    return 2 * lam / ((1 - x) * (s + math.sqrt(disc)))


def optimal_sigma_x(g, lam):
    """Thermal parameter making the norm bound meet the squeezer fidelity.

    When the formula gives exactly 1 (``lam = 0``) the result is clamped to
    ``1 - X_CLAMP_EPS``.
    """
    _require_gain(g)
    _require_lam(lam)
    if lam > g - 1:
        x = g / (lam + g + (g - 1) ** 2)
    else:
        x = 1 / (lam + 1)
    return min(x, 1 - X_CLAMP_EPS)


def det_gamma(p, g, lam, x):
    """Determinant of the circulant ``Gamma_p`` from its Fourier eigenvalues."""
    if int(p) != p or p < 1:
        raise DomainError(f"p must be a positive integer, got {p}")
    if not 0 < x < 1:
        raise DomainError(f"thermal parameter must satisfy 0 < x < 1, got x={x}")
    a = lam + 1 + g**2
    b = g**2
    c = 1 / x
    omega = np.exp(2j * np.pi * np.arange(p) / p)
    terms = a - b * omega - c / omega
    if np.any(terms == 0):
        return 0.0
    # summing logs keeps large p from overflowing the plain product
    total = complex(np.sum(np.log(terms)))
    residue = math.sin(total.imag)
    if abs(residue) > 1e-10:
        raise ArithmeticError(f"circulant determinant has relative imaginary residue {residue:.3e}")
    with np.errstate(over="ignore"):
        magnitude = np.exp(total.real)
    return float(math.copysign(magnitude, math.cos(total.imag)))


def trace_power_closed(p, g, lam, x):
    """``Tr[A^p] = lam^p / ((1 - x)^p det Gamma_p)``."""
    det = det_gamma(p, g, lam, x)
    if lam + 1 - 1 / x <= 0 or det <= 0:
        raise DivergentIntegralError(
            f"Gaussian integral diverges (lambda+1-1/x = {lam + 1 - 1 / x:.6g}, det = {det:.6g})"
        )
    return lam**p / ((1 - x) ** p * det)


def filter_x(g, lam):
    """Geometric ratio of the optimal probabilistic filter."""
    if lam <= g - 1:
        raise DomainError(
            f"lambda={lam} <= g-1={g - 1}: squeezer regime, no filter is optimal"
        )
    if lam <= g**2 - 1:
        return (lam + 1) / g
    return float(g)


def classical_limit_params(g, lam):
    """Gain ``g'`` and attenuation ``eta`` relating classical and quantum optima."""
    if lam > g - 1:
        raise DomainError(f"relation holds only for lambda <= g-1, got lambda={lam}, g={g}")
    g_prime = math.sqrt(g**2 + (lam + 1) ** 2)
    return ClassicalLimitParams(g_prime=g_prime, eta=g / g_prime)


def norm_gap(g, lam):
    """Gap between optimal probabilistic fidelity and the classical threshold."""
    return f_prob(g, lam) - cft(g, lam)
