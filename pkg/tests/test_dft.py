import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import crandn, rel_err
from convridge.dft import (
    FreqGrid,
    FreqSignal,
    FreqTransfer,
    dft_forward,
    dft_inverse,
    transfer_of_kernel,
)
from convridge.signal_model import convolve


def naive_dft(x):
    """O(T^2) unitary DFT along the last axis."""
    x = np.asarray(x, dtype=complex)
    T = x.shape[-1]
    t = np.arange(T)
    F = np.exp(-2j * np.pi * np.outer(t, t) / T) / np.sqrt(T)
    return x @ F.T


def naive_idft(xf):
    xf = np.asarray(xf, dtype=complex)
    T = xf.shape[-1]
    t = np.arange(T)
    F = np.exp(2j * np.pi * np.outer(t, t) / T) / np.sqrt(T)
    return xf @ F.T


finite_c = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)


class TestFreqGrid:
    def test_omegas_increasing_in_range(self):
        g = FreqGrid(7)
        assert len(g) == 7 and g.omegas.shape == (7,)
        assert np.all(np.diff(g.omegas) > 0)
        assert g.omegas[0] == 0.0 and g.omegas[-1] < 2 * np.pi

    @pytest.mark.parametrize("T", [0, -3, 2.5])
    def test_rejects_bad_length(self, T):
        with pytest.raises(ValueError):
            FreqGrid(T)

    def test_signal_shape_checked(self):
        with pytest.raises(ValueError):
            FreqSignal(np.zeros((2, 5)), FreqGrid(4))

    def test_transfer_shape_checked(self):
        with pytest.raises(ValueError):
            FreqTransfer(np.zeros((3, 2, 2)), FreqGrid(4))


class TestForward:
    def test_zero(self):
        np.testing.assert_array_equal(dft_forward(np.zeros(6)), np.zeros(6))

    def test_impulse(self):
        out = dft_forward(np.array([1.0, 0, 0, 0]))
        np.testing.assert_allclose(out, np.full(4, 0.5), atol=1e-15)

    def test_matches_naive_sum(self, rng):
        x = crandn(rng, 8)
        out = dft_forward(x)
        assert rel_err(out, naive_dft(x)) < 1e-13
        assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(x), rel=1e-12)

    def test_rowwise_on_matrices(self, rng):
        X = crandn(rng, 3, 11)
        assert rel_err(dft_forward(X), naive_dft(X)) < 1e-13
        np.testing.assert_allclose(
            np.linalg.norm(dft_forward(X), axis=1), np.linalg.norm(X, axis=1), rtol=1e-12
        )

    @pytest.mark.parametrize("T", [1, 2, 5, 12, 97])
    def test_any_length(self, rng, T):
        x = crandn(rng, T)
        assert rel_err(dft_forward(x), naive_dft(x)) < 1e-12


class TestInverse:
    def test_round_trip(self, rng):
        x = crandn(rng, 16)
        assert rel_err(dft_inverse(dft_forward(x)), x) < 1e-12

    def test_constant_to_impulse(self):
        out = dft_inverse(np.full(4, 0.5))
        np.testing.assert_allclose(out, [1, 0, 0, 0], atol=1e-15)

    def test_matches_naive_sum(self, rng):
        xf = crandn(rng, 9)
        assert rel_err(dft_inverse(xf), naive_idft(xf)) < 1e-13

    def test_freq_signal_to_time(self, rng):
        X = crandn(rng, 2, 6)
        fs = FreqSignal(dft_forward(X), FreqGrid(6))
        assert rel_err(fs.to_time(), X) < 1e-12


@settings(max_examples=60, deadline=None)
@given(arrays(np.complex128, st.integers(1, 64), elements=finite_c))
def test_unitarity_and_round_trip(x):
    nx = np.linalg.norm(x)
    out = dft_forward(x)
    assert np.linalg.norm(out) == pytest.approx(nx, rel=1e-12, abs=1e-300)
    assert np.linalg.norm(dft_inverse(out) - x) <= 1e-12 * max(nx, 1e-300)


class TestTransfer:
    def test_identity_kernel(self):
        H = transfer_of_kernel(np.ones((1, 1, 1)), 5)
        np.testing.assert_allclose(H.slices, np.ones((5, 1, 1)), atol=1e-15)

    def test_two_tap_closed_form(self):
        T = 4
        H = transfer_of_kernel(np.ones((1, 1, 2)), T)
        w = FreqGrid(T).omegas
        np.testing.assert_allclose(H.slices[:, 0, 0], 1 + np.exp(1j * w), atol=1e-14)

    def test_two_tap_operator_consistent(self):
        # convolve each DFT basis vector and read off the eigenvalue
        T = 4
        K = np.ones((1, 1, 2))
        H = transfer_of_kernel(K, T)
        for m in range(T):
            e = np.zeros((1, T), dtype=complex)
            e[0, m] = 1.0
            basis = dft_inverse(e)
            out = dft_forward(convolve(K, basis))
            np.testing.assert_allclose(out[0], H.slices[m, 0, 0] * e[0], atol=1e-14)

    def test_consistency_random(self, rng):
        K = crandn(rng, 3, 2, 3)
        H = transfer_of_kernel(K, 8)
        assert (H.n_y, H.n_x) == (3, 2)
        for _ in range(20):
            X = crandn(rng, 2, 8)
            lhs = dft_forward(convolve(K, X, method="direct"))
            assert rel_err(lhs, H.apply(dft_forward(X))) < 1e-10

    def test_materialized_matches_closed_form(self, rng):
        # build H(w_m) column by column from the operator
        n_y, n_x, k, T = 2, 3, 4, 6
        K = crandn(rng, n_y, n_x, k)
        H = transfer_of_kernel(K, T)
        built = np.zeros((T, n_y, n_x), dtype=complex)
        for j in range(n_x):
            for m in range(T):
                e = np.zeros((n_x, T), dtype=complex)
                e[j, m] = 1.0
                built[m, :, j] = dft_forward(convolve(K, dft_inverse(e), "direct"))[:, m]
        assert rel_err(built, H.slices) < 1e-12

    def test_adjoint(self, rng):
        K = crandn(rng, 3, 2, 5)
        H = transfer_of_kernel(K, 7)
        Xf, Yf = crandn(rng, 2, 7), crandn(rng, 3, 7)
        lhs = np.vdot(Yf, H.apply(Xf))
        rhs = np.vdot(H.apply_adjoint(Yf), Xf)
        assert abs(lhs - rhs) < 1e-12 * abs(lhs)

    def test_apply_shape_checked(self, rng):
        H = transfer_of_kernel(crandn(rng, 3, 2, 2), 4)
        with pytest.raises(ValueError):
            H.apply(np.zeros((3, 4)))
        with pytest.raises(ValueError):
            H.apply_adjoint(np.zeros((2, 4)))

    def test_kernel_longer_than_signal(self, rng):
        with pytest.raises(ValueError):
            transfer_of_kernel(crandn(rng, 1, 1, 5), 4)
