"""Monte-Carlo estimates of amplifier fidelities from the operational protocols.

Samples are drawn in fixed-size chunks, each from its own child of one
``SeedSequence``.  The chunk layout depends only on ``n``, so an estimate is
bit-for-bit reproducible from ``(seed, n)`` whatever the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import squeezer_fidelity_pointwise

CHUNK = 1 << 16


@dataclass(frozen=True)
class PriorSpec:
    """Gaussian prior ``lam exp(-lam |alpha - alpha0|^2)`` w.r.t. ``d^2 alpha / pi``."""

    lam: float
    alpha0: complex = 0j

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"prior needs lambda > 0, got {self.lam}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int

    def within(self, target, k=4.0):
        return abs(self.mean - target) <= k * self.stderr


def _complex_normal(rng, var, size):
    sd = np.sqrt(var)
    return rng.normal(0.0, sd, size) + 1j * rng.normal(0.0, sd, size)


def sample_prior(prior, rng, size=None):
    """Draw coherent amplitudes from the prior (per-axis variance ``1/(2 lam)``)."""
    return prior.alpha0 + _complex_normal(rng, 0.5 / prior.lam, size)


def sample_heterodyne(alpha, rng, size=None):
    """Heterodyne outcome on ``|alpha>``: density ``exp(-|a - alpha|^2)`` w.r.t. ``d^2 a / pi``."""
    alpha = np.asarray(alpha)
    if size is None:
        size = alpha.shape if alpha.shape else None
    return alpha + _complex_normal(rng, 0.5, size)


def _threads():
    try:
        return max(1, int(os.environ.get("AMPBENCH_THREADS", "1")))
    except ValueError:
        return 1


def _run(kernel, n, seed, threads=None):
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.Generator(np.random.PCG64(ss)), m) for ss, m in zip(children, sizes)]
    threads = threads or _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda job: kernel(*job), jobs))
    else:
        parts = [kernel(*job) for job in jobs]
    values = np.concatenate(parts)
    return Estimate(
        mean=float(np.mean(values)),
        stderr=float(np.std(values, ddof=1) / np.sqrt(n)),
        n_samples=int(n),
        seed=int(seed),
    )


def mc_cft(g, lam, n, seed, alpha0=0j, threads=None):
    """Fidelity of heterodyne + re-preparation of ``|g alpha_hat / (1 + lam)>``.

    Each sample contributes ``|<g alpha | prepared>|^2``.  With ``alpha0`` the
    prior is shifted, the measured input is displaced by ``-alpha0`` and the
    prepared state by ``g alpha0``.
    """
    prior = PriorSpec(lam, alpha0)

    def kernel(rng, m):
        alpha = sample_prior(prior, rng, m)
        outcome = sample_heterodyne(alpha - prior.alpha0, rng, m)
        prepared = g * outcome / (1 + lam) + g * prior.alpha0
        return np.exp(-np.abs(g * alpha - prepared) ** 2)

    return _run(kernel, n, seed, threads)


def mc_squeezer(g, lam, r, n, seed, threads=None):
    """Prior average of the squeezer's per-input fidelity."""
    prior = PriorSpec(lam)

    def kernel(rng, m):
        return squeezer_fidelity_pointwise(g, r, sample_prior(prior, rng, m))

    return _run(kernel, n, seed, threads)


def mc_mean(kernel, n, seed, threads=None):
    """Generic chunked estimate; ``kernel(rng, m)`` returns ``m`` samples."""
    return _run(kernel, n, seed, threads)
