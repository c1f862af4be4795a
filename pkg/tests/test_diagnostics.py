import numpy as np
import pytest

from pnpir.degrade import DegradationSpec, add_awgn, apply_degradation, gaussian_kernel
from pnpir.denoise import make_denoiser
from pnpir.diagnostics import (Histogram, dump_intermediates,
                               residual_histogram, sweep, sweep_to_csv)
from pnpir.image import ImageTensor, decode_png, psnr
from pnpir.schedule import build_schedule
from pnpir.solver import RestorationJob, run


def random_image(shape, seed=0):
    return ImageTensor(np.random.default_rng(seed).random(shape))


def small_deblur_job(seed=0, K=2):
    spec = DegradationSpec("deblur", sigma255=5.0,
                           kernel=gaussian_kernel(1.0, 1.0, 0.0, 3))
    gt = random_image((1, 16, 16), seed=seed)
    y = apply_degradation(gt, spec, seed=seed)
    sched = build_schedule(K, 30.0, 5.0, sigma_data=5.0)
    return RestorationJob(spec=spec, y=y, schedule=sched,
                          denoiser=make_denoiser("tv"), ground_truth=gt)


class TestResidualHistogram:
    def test_identical_images_single_bin(self):
        img = random_image((1, 8, 8))
        hist = residual_histogram(img, img, bins=9)
        assert sum(1 for c in hist.counts if c) == 1
        assert max(hist.counts) == hist.total == 64

    def test_symmetric_differences(self):
        base = np.zeros((1, 4, 4))
        diff = np.zeros((1, 4, 4))
        diff[0, :2] = 0.25
        diff[0, 2:] = -0.25
        hist = residual_histogram(ImageTensor(base + diff), ImageTensor(base), bins=8)
        assert hist.counts == tuple(reversed(hist.counts))

    def test_mass_conservation_and_edges(self):
        a = random_image((3, 8, 8), seed=1)
        b = random_image((3, 8, 8), seed=2)
        hist = residual_histogram(a, b, bins=16)
        assert sum(hist.counts) == hist.total == a.data.size
        assert all(x < y for x, y in zip(hist.bin_edges, hist.bin_edges[1:]))

    def test_gaussian_residual_low_skewness(self):
        clean = ImageTensor(np.zeros((1, 64, 64)))
        noisy = add_awgn(clean, 20.0, seed=5)
        diff = (noisy.data - clean.data).ravel()
        skew = np.mean(diff**3) / np.std(diff) ** 3
        assert abs(skew) < 0.1
        hist = residual_histogram(noisy, clean, bins=64)
        assert hist.total == diff.size

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            residual_histogram(random_image((1, 4, 4)), random_image((1, 5, 4)), 8)


class TestSweep:
    def test_single_cell_equals_direct_run(self):
        job = small_deblur_job(seed=3, K=2)
        table = sweep(job, [2], [30.0])
        out, _ = run(job)
        assert table[0][0] == pytest.approx(psnr(job.ground_truth, out), abs=1e-12)

    def test_cells_independent_of_order(self):
        job = small_deblur_job(seed=4)
        fwd = sweep(job, [1, 2], [10.0, 30.0])
        rev = sweep(job, [2, 1], [30.0, 10.0])
        assert fwd[0][0] == rev[1][1]
        assert fwd[1][1] == rev[0][0]

    def test_requires_ground_truth(self):
        job = small_deblur_job(seed=5)
        job.ground_truth = None
        with pytest.raises(ValueError):
            sweep(job, [1], [10.0])

    def test_csv_shape(self):
        csv = sweep_to_csv([[30.0, 31.5]], [8], [9.0, 49.0])
        lines = csv.strip().split("\n")
        assert lines[0] == "K\\sigma1,9,49"
        assert lines[1] == "8,30.00,31.50"


class TestDumpIntermediates:
    def test_file_count(self, tmp_path):
        job = small_deblur_job(seed=6, K=3)
        files = dump_intermediates(job, {1, 3}, tmp_path)
        assert len(files) == 4
        names = sorted(f.split("/")[-1] for f in files)
        assert names == ["iter001_x.png", "iter001_z.png",
                         "iter003_x.png", "iter003_z.png"]

    def test_empty_set_no_files(self, tmp_path):
        job = small_deblur_job(seed=7)
        assert dump_intermediates(job, set(), tmp_path) == []

    def test_final_dump_matches_run_output(self, tmp_path):
        job = small_deblur_job(seed=8, K=2)
        files = dump_intermediates(job, {2}, tmp_path)
        z_path = [f for f in files if f.endswith("iter002_z.png")][0]
        out, _ = run(job)
        from pnpir.image import encode_png
        with open(z_path, "rb") as fh:
            dumped = fh.read()
        assert dumped == encode_png(out)
