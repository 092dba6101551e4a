import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampbench import a_operator as ao
from ampbench.a_operator import (
    AOperatorSpec,
    build_a,
    build_block,
    cross_norm_numeric,
    operator_norm_numeric,
    partial_transpose,
    product_expectation,
    trace_power_numeric,
)
from ampbench.closed_forms import norm_a_closed, trace_power_closed
from ampbench.fock_core import tensor

HEADLINE = AOperatorSpec(2.0, 3.0, 1 / 3)


def fock_amplitudes(z, dim):
    return np.array([np.exp(-abs(z) ** 2 / 2) * z**n / math.sqrt(math.factorial(n)) for n in range(dim)])


def brute_force_a(g, lam, x, dim, half_width=5.0, points=401):
    """Trapezoid rule for the defining integral over a square in the complex plane."""
    axis = np.linspace(-half_width, half_width, points)
    h = axis[1] - axis[0]
    re, im = np.meshgrid(axis, axis, indexing="ij")
    alpha = (re + 1j * im).ravel()
    weights = h * h / math.pi * np.exp(-(lam + 1 - 1 / x) * np.abs(alpha) ** 2)
    out = fock_amplitudes(g * alpha, dim)  # (dim, npts)
    inp = fock_amplitudes(np.conj(alpha) / math.sqrt(x), dim)
    vecs = np.einsum("mk,pk->mpk", out, inp).reshape(dim * dim, -1)
    return lam / (1 - x) * (vecs * weights) @ vecs.conj().T


@pytest.mark.parametrize("g,lam,x", [(2.0, 3.0, 1 / 3), (1.5, 1.0, 0.6), (3.0, 2.0, 0.45)])
def test_entries_match_brute_force_integral(g, lam, x):
    dim = 6
    oracle = brute_force_a(g, lam, x, dim)
    A = build_a(AOperatorSpec(g, lam, x, dim, dim)).matrix
    np.testing.assert_allclose(A, oracle.real, atol=1e-11 * np.abs(oracle).max())
    assert np.abs(oracle.imag).max() < 1e-12


def test_vacuum_element_and_selection_rule():
    T = build_a(HEADLINE.with_dims(4)).as_tensor()
    assert T[0, 0, 0, 0] == pytest.approx(0.5625, rel=1e-14)
    assert T[1, 0, 0, 0] == 0


def test_block_structure_has_no_off_block_mass():
    T = build_a(AOperatorSpec(2.0, 3.0, 0.3, 9, 7)).as_tensor()
    m, p, n, q = np.indices(T.shape)
    assert np.abs(T[m + q != n + p]).max() < 1e-14
    assert np.abs(T[m + q == n + p]).min() > 0


def test_build_block_covers_dense_matrix():
    spec = AOperatorSpec(2.0, 3.0, 0.4, 5, 8)
    A = build_a(spec)
    total = sum(build_block(spec, d)[1].size for d in ao.block_deltas(spec))
    assert total == np.count_nonzero(A.matrix)


@settings(max_examples=15, deadline=None)
@given(st.floats(1.0, 3.0), st.floats(0.2, 5.0), st.floats(0.05, 0.95))
def test_hermitian_and_psd(g, lam, x):
    A = build_a(AOperatorSpec(g, lam, x, 12, 12)).matrix
    scale = np.abs(A).max()
    assert np.abs(A - A.T).max() <= 1e-12 * scale
    assert np.linalg.eigvalsh(A).min() >= -1e-10 * scale


def test_trace_matches_closed_form():
    assert trace_power_numeric(HEADLINE.with_dims(80), 1) == pytest.approx(4.5, rel=1e-6)


@pytest.mark.parametrize("p", [2, 3, 4, 5])
def test_higher_trace_powers_at_dims_60(p):
    value = trace_power_numeric(HEADLINE.with_dims(60), p)
    assert value == pytest.approx(trace_power_closed(p, 2.0, 3.0, 1 / 3), rel=1e-6)


def test_trace_power_one_at_dims_60_is_truncation_limited():
    # the p = 1 tail decays slowest; at 60 levels it still misses about 1.5e-6
    value = trace_power_numeric(HEADLINE.with_dims(60), 1)
    assert 1e-7 < 1 - value / 4.5 < 1e-5


def test_second_trace_power_is_frobenius_norm():
    A = build_a(HEADLINE.with_dims(20)).matrix
    assert trace_power_numeric(HEADLINE.with_dims(20), 2) == pytest.approx(np.sum(A * A), rel=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_block_path_matches_dense_path(p):
    spec = AOperatorSpec(2.0, 3.0, 0.3, 10, 12)
    A = build_a(spec).matrix
    assert trace_power_numeric(spec, p) == pytest.approx(np.trace(np.linalg.matrix_power(A, p)), rel=1e-12)
    dense_top = np.linalg.eigvalsh(A).max()
    assert operator_norm_numeric(spec, adaptive=False).value == pytest.approx(dense_top, rel=1e-12)


@pytest.mark.parametrize("g,lam,x,target", [(2.0, 3.0, 1 / 3, 0.75), (2.0, 1.0, 0.5, 0.5)])
def test_operator_norm_examples(g, lam, x, target):
    res = operator_norm_numeric(AOperatorSpec(g, lam, x, 40, 40), adaptive=False)
    assert res.value == pytest.approx(target, abs=1e-3)
    assert norm_a_closed(g, lam, x) == pytest.approx(target, abs=1e-12)


def test_operator_norm_grows_with_dims():
    small = operator_norm_numeric(HEADLINE.with_dims(5), adaptive=False).value
    large = operator_norm_numeric(HEADLINE.with_dims(40), adaptive=False).value
    assert small < large


def test_operator_norm_monotone_in_each_dim():
    spec = AOperatorSpec(2.0, 1.0, 0.5)
    dims = [(6, 6), (6, 10), (10, 10), (14, 10), (14, 14), (20, 20)]
    values = [operator_norm_numeric(spec.with_dims(*d), adaptive=False).value for d in dims]
    assert all(b >= a - 1e-14 for a, b in zip(values, values[1:]))


def test_operator_norm_gap_halves_per_ten_levels():
    spec = AOperatorSpec(2.0, 1.0, 0.5)
    target = norm_a_closed(2.0, 1.0, 0.5)
    gaps = [target - operator_norm_numeric(spec.with_dims(d), adaptive=False).value for d in (5, 15, 25)]
    assert gaps[1] <= gaps[0] / 2 and gaps[2] <= gaps[1] / 2


def test_adaptive_norm_converges():
    res = operator_norm_numeric(HEADLINE, tol=1e-3)
    assert res.value == pytest.approx(0.75, rel=1e-3)
    assert not res.truncation_warning
    assert ao.ADAPTIVE_START <= res.dim_out <= ao.ADAPTIVE_CAP


def test_adaptive_norm_warns_at_cap(monkeypatch, caplog):
    monkeypatch.setattr(ao, "ADAPTIVE_CAP", 40)
    res = operator_norm_numeric(AOperatorSpec(2.0, 1.0, 0.5), tol=1e-300)
    assert res.truncation_warning and res.dim_out == 40
    assert "not converged" in caplog.text


def test_partial_transpose_of_product():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Y = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(partial_transpose(tensor(X, Y)).matrix, tensor(X, Y.T).matrix)


def test_partial_transpose_entries():
    A = build_a(AOperatorSpec(2.0, 3.0, 0.25, 4, 5))
    T, P = A.as_tensor(), partial_transpose(A).as_tensor()
    assert P[1, 2, 3, 0] == T[1, 0, 3, 2]


@settings(max_examples=20)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_partial_transpose_is_involution(d1, d2, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(d1 * d2, d1 * d2))
    X = ao.TwoModeOperator(M, d1, d2)
    np.testing.assert_array_equal(partial_transpose(partial_transpose(X)).matrix, M)


def test_cross_norm_of_product_operator():
    A = tensor(np.diag([1.0, 2.0]), np.diag([1.0, 3.0]))
    res = cross_norm_numeric(A, restarts=3)
    assert res.value == pytest.approx(6, rel=1e-10)
    assert abs(res.phi[1]) == pytest.approx(1, abs=1e-6)
    assert abs(res.psi[1]) == pytest.approx(1, abs=1e-6)


def test_cross_norm_value_is_achieved_by_returned_pair():
    A = build_a(AOperatorSpec(2.0, 3.0, 0.3, 12, 12))
    res = cross_norm_numeric(A, restarts=4, seed=3)
    assert product_expectation(A, res.phi, res.psi) == pytest.approx(res.value, abs=1e-10)
    assert res.value <= operator_norm_numeric(AOperatorSpec(2.0, 3.0, 0.3, 12, 12), adaptive=False).value + 1e-10
    assert res.restarts_used == 4 and len(res.history) == 4


def test_cross_norm_reaches_classical_threshold_small_dims():
    spec = AOperatorSpec(2.0, 3.0, 0.25, 15, 15)
    A = build_a(spec)
    for op in (A, partial_transpose(A)):
        res = cross_norm_numeric(op, restarts=5)
        assert res.value == pytest.approx(0.5, abs=2e-3)


def test_cross_norm_equals_operator_norm_for_partial_transpose():
    A = partial_transpose(build_a(AOperatorSpec(2.0, 3.0, 0.25, 15, 15)))
    top = np.linalg.eigvalsh(A.matrix).max()
    assert cross_norm_numeric(A, restarts=5).value == pytest.approx(top, abs=2e-3)


def test_cross_norm_is_deterministic():
    A = build_a(AOperatorSpec(2.0, 3.0, 0.3, 8, 8))
    a = cross_norm_numeric(A, restarts=3, seed=11)
    b = cross_norm_numeric(A, restarts=3, seed=11)
    assert a.value == b.value and a.history == b.history


def test_spec_validation():
    with pytest.raises(ValueError):
        AOperatorSpec(2.0, 3.0, 1.0)
    with pytest.raises(ValueError):
        AOperatorSpec(2.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        AOperatorSpec(2.0, 3.0, 0.5, 0, 4)
