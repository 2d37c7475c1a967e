"""Ingestion and preprocessing: decoding, filtering, morphology, ROI, CLAHE."""

import numpy as np
import pytest

from livecheck.imageproc import (
    RoiRect,
    clahe,
    convolve2d,
    crop,
    extract_roi,
    gaussian_kernel,
    highpass,
    ingest,
    lowpass,
    morph_close,
    resize_bilinear,
    write_pgm,
)

from oracles import (
    conv2d_same_reflect,
    morph_close_oracle,
    resize_bilinear_oracle,
)


class TestIngest:
    def test_p5_two_by_two(self):
        """Raw bytes map to v/255 in row-major order."""
        data = b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64])
        img = ingest(data)
        expected = np.array([[0.0, 1.0], [128 / 255, 64 / 255]])
        np.testing.assert_array_equal(img, expected)

    def test_p5_header_comments_and_whitespace(self):
        data = b"P5 # magic\n# a comment line\n  2\t1 # dims\n255\n" + bytes([10, 20])
        img = ingest(data)
        np.testing.assert_array_equal(img, np.array([[10 / 255, 20 / 255]]))

    def test_p2_ascii(self):
        data = b"P2\n# plain text\n3 1\n255\n0 128 255\n"
        img = ingest(data)
        np.testing.assert_array_equal(img, np.array([[0.0, 128 / 255, 1.0]]))

    def test_sub_255_maxval_accepted(self):
        img = ingest(b"P5\n1 1\n100\n" + bytes([100]))
        assert img[0, 0] == pytest.approx(100 / 255)

    def test_truncated_pixels_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))

    def test_truncated_header_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P5\n2 2\n")

    def test_wrong_magic_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P6\n1 1\n255\n\x00\x00\x00")

    def test_wide_maxval_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P5\n1 1\n65535\n\x00\x00")

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P5\n0 2\n255\n")

    def test_truncated_p2_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P2\n2 2\n255\n1 2 3\n")

    def test_pixel_above_maxval_rejected(self):
        with pytest.raises(ValueError, match="unsupported format"):
            ingest(b"P5\n1 1\n100\n" + bytes([200]))

    def test_write_then_ingest_round_trip(self, random_image):
        img = random_image(9, 7)
        quantized = np.rint(img * 255.0) / 255.0
        np.testing.assert_allclose(ingest(write_pgm(img)), quantized, atol=1e-12)

    def test_writer_emits_binary_p5(self):
        data = write_pgm(np.array([[0.0, 1.0]]))
        assert data.startswith(b"P5\n2 1\n255\n")
        assert data[-2:] == bytes([0, 255])


class TestResize:
    def test_scale_one_is_identity(self, random_image):
        img = random_image(11, 13)
        np.testing.assert_array_equal(resize_bilinear(img, 1.0), img)

    def test_constant_stays_constant(self):
        img = np.full((10, 8), 0.37)
        out = resize_bilinear(img, 0.5)
        assert out.shape == (5, 4)
        np.testing.assert_allclose(out, 0.37, atol=1e-12)

    def test_output_dims_floor(self, random_image):
        out = resize_bilinear(random_image(7, 5), 0.5)
        assert out.shape == (3, 2)

    def test_matches_per_pixel_oracle(self, rng):
        """Separable gather equals direct per-pixel interpolation."""
        for _ in range(20):
            height = int(rng.integers(4, 20))
            width = int(rng.integers(4, 20))
            scale = float(rng.uniform(0.3, 1.0))
            if int(scale * height) < 1 or int(scale * width) < 1:
                continue
            img = rng.uniform(0.0, 1.0, size=(height, width))
            np.testing.assert_allclose(
                resize_bilinear(img, scale), resize_bilinear_oracle(img, scale), atol=1e-12
            )

    def test_range_preserved(self, random_image):
        out = resize_bilinear(random_image(20, 20), 0.7)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_bad_scale_rejected(self, random_image):
        img = random_image(4, 4)
        for scale in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                resize_bilinear(img, scale)

    def test_collapsing_scale_rejected(self):
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros((3, 3)), 0.1)


class TestFiltering:
    def test_gaussian_kernel_normalized_and_symmetric(self):
        kernel = gaussian_kernel(13, 3.0)
        assert kernel.shape == (13, 13)
        assert kernel.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(kernel, kernel[::-1, ::-1], atol=1e-15)
        np.testing.assert_allclose(kernel, kernel.T, atol=1e-15)

    def test_gaussian_kernel_rejects_even_size(self):
        with pytest.raises(ValueError):
            gaussian_kernel(12, 3.0)
        with pytest.raises(ValueError):
            gaussian_kernel(13, 0.0)

    def test_convolve_matches_oracle(self, rng):
        for _ in range(10):
            img = rng.uniform(0.0, 1.0, size=(int(rng.integers(5, 12)), int(rng.integers(5, 12))))
            kernel = rng.standard_normal((3, 3))
            np.testing.assert_allclose(
                convolve2d(img, kernel), conv2d_same_reflect(img, kernel), atol=1e-12
            )

    def test_convolve_kernel_flip(self):
        """An asymmetric kernel distinguishes convolution from correlation."""
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        kernel = np.zeros((3, 3))
        kernel[0, 1] = 1.0  # weight above center
        out = convolve2d(img, kernel)
        # impulse response of a convolution is the kernel itself;
        # correlation would place the weight below the impulse instead
        assert out[1, 2] == 1.0
        assert out[3, 2] == 0.0

    def test_convolve_rejects_oversized_kernel(self):
        with pytest.raises(ValueError):
            convolve2d(np.zeros((3, 3)), np.ones((5, 5)) / 25.0)

    def test_highpass_is_exact_residual(self, random_image):
        """The residual definition holds bit for bit."""
        img = random_image(20, 18)
        np.testing.assert_array_equal(highpass(img), img - lowpass(img))

    def test_lowpass_plus_highpass_reconstructs(self, random_image):
        # adding the parts back rounds once more, so exactness stops at
        # one ulp of the unit intensity scale
        img = random_image(20, 18)
        np.testing.assert_allclose(lowpass(img) + highpass(img), img, atol=2e-16, rtol=0.0)

    def test_highpass_impulse_center(self):
        """A lone bright pixel keeps 1 minus the center kernel weight."""
        img = np.zeros((31, 31))
        img[15, 15] = 1.0
        expected = 1.0 - gaussian_kernel(13, 3.0)[6, 6]
        assert highpass(img)[15, 15] == pytest.approx(expected, abs=1e-12)

    def test_lowpass_constant_preserved(self):
        img = np.full((15, 15), 0.6)
        np.testing.assert_allclose(lowpass(img), 0.6, atol=1e-12)

    def test_lowpass_rejects_small_images(self):
        with pytest.raises(ValueError):
            lowpass(np.zeros((12, 40)))


class TestMorphology:
    def test_matches_oracle(self, rng):
        for _ in range(8):
            img = rng.uniform(0.0, 1.0, size=(int(rng.integers(5, 10)), int(rng.integers(5, 10))))
            np.testing.assert_allclose(morph_close(img, 3), morph_close_oracle(img, 3), atol=1e-15)

    def test_constant_unchanged(self):
        img = np.full((9, 9), 0.4)
        np.testing.assert_array_equal(morph_close(img, 5), img)

    def test_extensive(self, random_image):
        img = random_image(12, 12)
        assert np.all(morph_close(img, 3) >= img - 1e-15)

    def test_idempotent(self, random_image):
        img = random_image(14, 14)
        once = morph_close(img, 3)
        np.testing.assert_allclose(morph_close(once, 3), once, atol=1e-12)

    def test_box_one_is_identity(self, random_image):
        img = random_image(6, 6)
        np.testing.assert_array_equal(morph_close(img, 1), img)

    def test_bad_box_rejected(self):
        with pytest.raises(ValueError):
            morph_close(np.zeros((5, 5)), 4)
        with pytest.raises(ValueError):
            morph_close(np.zeros((5, 5)), 7)


class TestRoi:
    def test_zero_image_gives_full_frame(self):
        rect = extract_roi(np.zeros((30, 40)))
        assert rect == RoiRect(0, 0, 40, 30)

    def test_centered_blob_found(self):
        img = np.zeros((60, 60))
        img[25:35, 20:30] = 1.0
        rect = extract_roi(img)
        # center of mass sits mid-blob; the rect must cover the blob
        assert rect.x0 <= 20 and rect.x0 + rect.width >= 30
        assert rect.y0 <= 25 and rect.y0 + rect.height >= 35
        assert rect.width < 60 or rect.height < 60

    def test_rect_always_inside_image(self, rng):
        for _ in range(10):
            img = rng.uniform(0.0, 1.0, size=(25, 31))
            rect = extract_roi(img)
            assert 0 <= rect.x0 and rect.x0 + rect.width <= 31
            assert 0 <= rect.y0 and rect.y0 + rect.height <= 25
            crop(img, rect)  # must never raise

    def test_small_image_supported(self):
        """Images narrower than the closing box still get a region."""
        rect = extract_roi(np.ones((7, 9)))
        assert rect.width <= 9 and rect.height <= 7

    def test_crop_extracts_expected_window(self):
        img = np.arange(30, dtype=np.float64).reshape(5, 6) / 30.0
        out = crop(img, RoiRect(x0=1, y0=2, width=3, height=2))
        np.testing.assert_array_equal(out, img[2:4, 1:4])

    def test_crop_out_of_bounds_rejected(self):
        with pytest.raises(ValueError):
            crop(np.zeros((4, 4)), RoiRect(2, 2, 3, 1))


class TestClahe:
    def test_constant_maps_to_single_level(self):
        out = clahe(np.full((16, 16), 0.5), tiles=(2, 2), clip=2.0)
        assert np.unique(out).size == 1

    def test_two_level_single_tile_unclipped(self):
        """Half the pixels at 0.25 and half at 0.75 equalize to 0.5 and 1."""
        img = np.zeros((4, 4))
        img[:2] = 0.25
        img[2:] = 0.75
        out = clahe(img, tiles=(1, 1), clip=np.inf)
        np.testing.assert_allclose(out[:2], 0.5, atol=1e-12)
        np.testing.assert_allclose(out[2:], 1.0, atol=1e-12)

    def test_output_in_unit_range(self, random_image):
        out = clahe(random_image(32, 32), tiles=(4, 4), clip=2.0)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_single_tile_is_global_equalization(self, rng):
        """One tile, no clipping: plain histogram equalization by CDF."""
        img = rng.uniform(0.0, 1.0, size=(12, 12))
        out = clahe(img, tiles=(1, 1), clip=np.inf)
        bins = np.minimum((img * 256).astype(int), 255)
        hist = np.bincount(bins.ravel(), minlength=256)
        cdf = np.cumsum(hist) / img.size
        np.testing.assert_allclose(out, cdf[bins], atol=1e-12)

    def test_clipping_flattens_peaks(self):
        """A strong clip limit pulls the mapping toward the identity ramp."""
        rng = np.random.default_rng(7)
        img = np.clip(0.5 + 0.02 * rng.standard_normal((32, 32)), 0.0, 1.0)
        strong = clahe(img, tiles=(1, 1), clip=1.0)
        weak = clahe(img, tiles=(1, 1), clip=np.inf)
        # unclipped equalization stretches the narrow peak much harder
        assert strong.std() < weak.std()

    def test_single_tile_mapping_monotone(self, rng):
        """With one tile the remap is a fixed nondecreasing curve."""
        img = rng.uniform(0.0, 1.0, size=(16, 16))
        out = clahe(img, tiles=(1, 1), clip=2.0)
        order = np.argsort(img.ravel())
        diffs = np.diff(out.ravel()[order])
        assert diffs.min() >= -1e-12

    def test_bad_grid_rejected(self):
        with pytest.raises(ValueError):
            clahe(np.zeros((4, 4)), tiles=(0, 2))
        with pytest.raises(ValueError):
            clahe(np.zeros((4, 4)), tiles=(8, 8))
        with pytest.raises(ValueError):
            clahe(np.zeros((4, 4)), tiles=(2, 2), clip=0.0)

    def test_range_validated(self):
        with pytest.raises(ValueError):
            clahe(np.full((4, 4), 1.5))
