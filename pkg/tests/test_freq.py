import numpy as np
import pytest

from pnpir.degrade import gaussian_kernel
from pnpir.freq import (block_downsample_spectrum, block_multiply_spectrum,
                        circular_convolve, psf2otf)
from pnpir.image import ImageTensor


def brute_circular_convolve(plane, k):
    h, w = plane.shape
    kh, kw = k.shape
    ci, cj = kh // 2, kw // 2
    out = np.zeros_like(plane)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(kh):
                for b in range(kw):
                    acc += k[a, b] * plane[(i - (a - ci)) % h, (j - (b - cj)) % w]
            out[i, j] = acc
    return out


class TestPsf2otf:
    def test_delta_kernel_all_ones(self):
        otf = psf2otf(np.array([[1.0]]), 6, 9)
        np.testing.assert_allclose(otf, np.ones((6, 9)), atol=1e-12)

    def test_matches_brute_force_convolution(self):
        rng = np.random.default_rng(0)
        k = rng.random((3, 3))
        k /= k.sum()
        x = rng.random((8, 8))
        via_otf = np.fft.ifft2(psf2otf(k, 8, 8) * np.fft.fft2(x)).real
        np.testing.assert_allclose(via_otf, brute_circular_convolve(x, k), atol=1e-12)

    def test_dc_coefficient_is_one(self):
        k = gaussian_kernel(1.3, 0.8, 0.4, 7)
        assert psf2otf(k, 16, 16)[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(ValueError):
            psf2otf(np.ones((5, 5)) / 25, 4, 8)


class TestCircularConvolve:
    def test_delta_identity(self):
        img = ImageTensor(np.random.default_rng(1).random((3, 6, 6)))
        out = circular_convolve(img, np.array([[1.0]]))
        np.testing.assert_allclose(out.data, img.data, atol=1e-12)

    def test_constant_preserved(self):
        img = ImageTensor(np.full((1, 8, 8), 0.37))
        k = gaussian_kernel(1.0, 1.0, 0.0, 5)
        np.testing.assert_allclose(circular_convolve(img, k).data, img.data, atol=1e-12)

    def test_matches_wrapped_double_loop(self):
        rng = np.random.default_rng(2)
        k = rng.random((3, 3))
        k /= k.sum()
        img = ImageTensor(rng.random((1, 5, 5)))
        out = circular_convolve(img, k)
        np.testing.assert_allclose(out.data[0],
                                   brute_circular_convolve(img.data[0], k), atol=1e-12)

    def test_convolution_theorem_16x16(self):
        rng = np.random.default_rng(3)
        k = rng.random((5, 5))
        k /= k.sum()
        img = ImageTensor(rng.random((1, 16, 16)))
        lhs = circular_convolve(img, k).data[0]
        rhs = np.fft.ifft2(psf2otf(k, 16, 16) * np.fft.fft2(img.data[0])).real
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


class TestRoundTripAndParseval:
    def test_fft_round_trip(self):
        x = np.random.default_rng(4).random((12, 9))
        back = np.fft.ifft2(np.fft.fft2(x)).real
        assert np.max(np.abs(back - x)) / np.max(np.abs(x)) < 1e-12

    def test_parseval(self):
        x = np.random.default_rng(5).random((16, 16))
        lhs = np.sum(np.abs(np.fft.fft2(x)) ** 2)
        rhs = x.size * np.sum(x**2)
        assert abs(lhs - rhs) / rhs < 1e-9


class TestBlockOps:
    def test_downsample_factor_one_identity(self):
        s = np.fft.fft2(np.random.default_rng(6).random((4, 4)))
        np.testing.assert_array_equal(block_downsample_spectrum(s, 1), s)

    def test_downsample_2x2_single_block(self):
        s = np.array([[1 + 1j, 2.0], [3.0, 4 - 2j]])
        out = block_downsample_spectrum(s, 2)
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx((1 + 1j + 2 + 3 + 4 - 2j) / 4)

    def test_downsample_matches_index_gather(self):
        rng = np.random.default_rng(7)
        s = rng.random((4, 4)) + 1j * rng.random((4, 4))
        out = block_downsample_spectrum(s, 2)
        for i in range(2):
            for j in range(2):
                expected = (s[i, j] + s[i + 2, j] + s[i, j + 2] + s[i + 2, j + 2]) / 4
                assert out[i, j] == pytest.approx(expected)

    def test_downsample_non_divisible(self):
        with pytest.raises(ValueError):
            block_downsample_spectrum(np.zeros((5, 4), dtype=complex), 2)

    def test_multiply_factor_one_elementwise(self):
        rng = np.random.default_rng(8)
        a = rng.random((3, 3)) + 1j
        b = rng.random((3, 3))
        np.testing.assert_allclose(block_multiply_spectrum(a, b, 1), a * b)

    def test_multiply_ones_is_identity(self):
        a = np.random.default_rng(9).random((6, 6)) + 0j
        np.testing.assert_array_equal(block_multiply_spectrum(a, np.ones((3, 3)), 2), a)

    def test_multiply_matches_tiling(self):
        rng = np.random.default_rng(10)
        a = rng.random((4, 4)) + 1j * rng.random((4, 4))
        b = rng.random((2, 2)) + 1j * rng.random((2, 2))
        out = block_multiply_spectrum(a, b, 2)
        for i in range(4):
            for j in range(4):
                assert out[i, j] == pytest.approx(a[i, j] * b[i % 2, j % 2])

    def test_downsample_after_ones_multiply(self):
        rng = np.random.default_rng(11)
        a = rng.random((6, 6)) + 1j * rng.random((6, 6))
        direct = block_downsample_spectrum(a, 3)
        via = block_downsample_spectrum(block_multiply_spectrum(a, np.ones((2, 2)), 3), 3)
        np.testing.assert_allclose(via, direct)
