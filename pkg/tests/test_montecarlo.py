import math

import numpy as np
import pytest

from ampbench.closed_forms import cft, f_squeeze_r
from ampbench.montecarlo import (
    CHUNK,
    Estimate,
    PriorSpec,
    mc_cft,
    mc_mean,
    mc_squeezer,
    sample_heterodyne,
    sample_prior,
)

N = 1_000_000


def mean_and_stderr(values):
    return values.mean(), values.std(ddof=1) / math.sqrt(values.size)


def test_prior_concentrates_for_large_lambda():
    rng = np.random.default_rng(0)
    assert np.abs(sample_prior(PriorSpec(1e8), rng, 1000)).max() < 1e-3


def test_prior_mean_photon_number():
    u = np.abs(sample_prior(PriorSpec(3.0), np.random.default_rng(1), N)) ** 2
    mean, se = mean_and_stderr(u)
    assert abs(mean - 1 / 3) <= 4 * se


def test_prior_axis_variance():
    re = sample_prior(PriorSpec(1.0), np.random.default_rng(2), N).real
    sq = (re - re.mean()) ** 2
    mean, se = mean_and_stderr(sq)
    assert abs(mean - 0.5) <= 4 * se


def test_prior_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        PriorSpec(0.0)


def test_heterodyne_noise_has_unit_mean_photons():
    u = np.abs(sample_heterodyne(np.zeros(N), np.random.default_rng(3))) ** 2
    mean, se = mean_and_stderr(u)
    assert abs(mean - 1) <= 4 * se


def test_heterodyne_is_unbiased():
    alpha = 0.7 - 1.1j
    out = sample_heterodyne(alpha, np.random.default_rng(4), N)
    for part, target in ((out.real, alpha.real), (out.imag, alpha.imag)):
        mean, se = mean_and_stderr(part)
        assert abs(mean - target) <= 4 * se


def test_heterodyne_on_prior_adds_variances():
    rng = np.random.default_rng(5)
    alpha = sample_prior(PriorSpec(2.0), rng, N)
    u = np.abs(sample_heterodyne(alpha, rng)) ** 2
    mean, se = mean_and_stderr(u)
    assert abs(mean - 1.5) <= 4 * se


@pytest.mark.parametrize("g,lam,target", [(2, 3, 0.5), (1, 0.001, 0.5), (2, 0.001, 0.2)])
def test_mc_cft_examples(g, lam, target):
    est = mc_cft(g, lam, N, seed=42)
    assert est.within(target)
    assert abs(cft(g, lam) - target) < 1e-3
    assert est.within(cft(g, lam))


def test_mc_cft_headline_precision():
    est = mc_cft(2, 3, N, seed=42)
    assert est.stderr < 5e-4
    assert est.n_samples == N and est.seed == 42


def test_mc_squeezer_examples():
    assert mc_squeezer(2, 3, 0.0, N, seed=42).within(0.75)
    est = mc_squeezer(1, 2, 0.0, 10_000, seed=1)
    assert est.mean == 1 and est.stderr == 0
    r = math.acosh(4 / 3)
    est = mc_squeezer(2, 0.5, r, N, seed=42)
    assert est.within(0.375)
    assert f_squeeze_r(2, 0.5, r) == pytest.approx(0.375)


def test_reproducible_bit_for_bit():
    a = mc_cft(2, 3, 200_003, seed=7)
    b = mc_cft(2, 3, 200_003, seed=7)
    assert a == b
    assert mc_cft(2, 3, 200_003, seed=8).mean != a.mean


def test_thread_count_does_not_change_result(monkeypatch):
    n = 3 * CHUNK + 17
    serial = mc_squeezer(2, 1, 0.4, n, seed=3, threads=1)
    parallel = mc_squeezer(2, 1, 0.4, n, seed=3, threads=4)
    assert serial == parallel
    monkeypatch.setenv("AMPBENCH_THREADS", "3")
    assert mc_squeezer(2, 1, 0.4, n, seed=3) == serial


def test_stderr_scales_as_inverse_sqrt_n():
    errs = [mc_cft(2, 3, n, seed=11).stderr for n in (10_000, 100_000, 1_000_000)]
    for small, large in zip(errs, errs[1:]):
        assert math.sqrt(10) / 1.2 <= small / large <= math.sqrt(10) * 1.2


@pytest.mark.parametrize("alpha0", [1.5 - 0.5j, -3j])
def test_displaced_prior_gives_same_fidelity(alpha0):
    shifted = mc_cft(2, 3, N, seed=21, alpha0=alpha0)
    centred = mc_cft(2, 3, N, seed=22)
    spread = 4 * math.hypot(shifted.stderr, centred.stderr)
    assert abs(shifted.mean - centred.mean) <= spread
    assert shifted.within(0.5)


def test_mc_mean_generic_kernel():
    est = mc_mean(lambda rng, m: rng.uniform(size=m), 500_000, seed=9)
    assert isinstance(est, Estimate)
    assert est.within(0.5)
    assert est.stderr == pytest.approx(math.sqrt(1 / 12 / 500_000), rel=0.01)


def test_needs_two_samples():
    with pytest.raises(ValueError):
        mc_cft(2, 3, 1, seed=0)
