"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Fixture images live in tests/fixtures; kernels in kernels/.
"""

import os
import time
from contextlib import contextmanager

import numpy as np

from pnpir.dataprox import (DataProxContext, deblur_prox, demosaic_prox,
                            sisr_prox_closed)
from pnpir.degrade import (CfaPattern, DegradationSpec, apply_degradation,
                           delta_kernel, gaussian_kernel, load_kernel,
                           sfold_downsample, zerofill_upsample)
from pnpir.denoise import denoise, make_denoiser, tv_prox
from pnpir.diagnostics import sweep
from pnpir.freq import psf2otf
from pnpir.image import (ImageTensor, apply_dihedral, dihedral_compose,
                         dihedral_inverse, psnr, read_png)
from pnpir.schedule import build_schedule
from pnpir.solver import RestorationJob, malvar_demosaic, run

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "fixtures")
KERNELS = os.path.join(os.path.dirname(HERE), "kernels")


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def circulant_matrix(k, h, w):
    otf = psf2otf(k, h, w)
    mat = np.zeros((h * w, h * w))
    for j in range(h * w):
        e = np.zeros(h * w)
        e[j] = 1.0
        mat[:, j] = np.fft.ifft2(otf * np.fft.fft2(e.reshape(h, w))).real.ravel()
    return mat


def decimation_matrix(h, w, s):
    rows = []
    for i in range(0, h, s):
        for j in range(0, w, s):
            e = np.zeros(h * w)
            e[i * w + j] = 1.0
            rows.append(e)
    return np.array(rows)


def tensor(plane):
    return ImageTensor(np.asarray(plane)[None])


def test_closed_form_deblur_oracle():
    with criterion("closed-form deblur matches dense circulant solve (20x, 1e-6, <1s)"):
        rng = np.random.default_rng(101)
        h = w = 8
        start = time.perf_counter()
        worst = 0.0
        for _ in range(20):
            k = rng.random((3, 3))
            k /= k.sum()
            y, z = rng.random((h, w)), rng.random((h, w))
            mat = circulant_matrix(k, h, w)
            ctx = DataProxContext(DegradationSpec("deblur", kernel=k))
            for alpha in (0.01, 0.3, 10.0):
                dense = np.linalg.solve(mat.T @ mat + alpha * np.eye(h * w),
                                        mat.T @ y.ravel() + alpha * z.ravel())
                out = deblur_prox(ctx, tensor(y), tensor(z), alpha)
                worst = max(worst, np.max(np.abs(out.data[0].ravel() - dense)))
        elapsed = time.perf_counter() - start
        assert worst < 1e-6, f"max-abs error {worst}"
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_closed_form_sisr_oracle():
    with criterion("closed-form SISR matches dense solve (20x, 1e-6) and s=1 is deblur (1e-10)"):
        rng = np.random.default_rng(102)
        h = w = 8
        s = 2
        worst = 0.0
        for i in range(20):
            k = delta_kernel(3) if i % 2 == 0 else gaussian_kernel(
                rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6), rng.uniform(0, np.pi), 3)
            y = rng.random((h // s, w // s))
            z = rng.random((h, w))
            mat = decimation_matrix(h, w, s) @ circulant_matrix(k, h, w)
            ctx = DataProxContext(DegradationSpec("sisr", kernel=k, scale=s))
            for alpha in (0.01, 0.3, 10.0):
                dense = np.linalg.solve(mat.T @ mat + alpha * np.eye(h * w),
                                        mat.T @ y.ravel() + alpha * z.ravel())
                out = sisr_prox_closed(ctx, tensor(y), tensor(z), alpha, s)
                worst = max(worst, np.max(np.abs(out.data[0].ravel() - dense)))
        assert worst < 1e-6, f"max-abs error {worst}"

        k = gaussian_kernel(1.1, 0.9, 0.4, 3)
        y, z = tensor(rng.random((h, w))), tensor(rng.random((h, w)))
        a = sisr_prox_closed(DataProxContext(DegradationSpec("sisr", kernel=k, scale=1)),
                             y, z, 0.3, 1)
        b = deblur_prox(DataProxContext(DegradationSpec("deblur", kernel=k)), y, z, 0.3)
        assert np.max(np.abs(a.data - b.data)) < 1e-10


def test_demosaic_prox_exactness():
    with criterion("demosaic prox agrees with per-entry quadratic oracle exactly"):
        rng = np.random.default_rng(103)
        for _ in range(10):
            mask = (rng.random((3, 6, 6)) < rng.uniform(0.2, 0.8)).astype(np.float64)
            y, z = rng.random((3, 6, 6)), rng.random((3, 6, 6))
            alpha = rng.uniform(0.05, 5.0)
            out = demosaic_prox(mask, ImageTensor(y), ImageTensor(z), alpha)
            expected = (mask * y + alpha * z) / (mask + alpha)
            np.testing.assert_array_equal(out.data, expected)


def test_schedule_criteria():
    with criterion("schedule endpoints exact, geometric ratio 1e-12, alpha_K = lambda"):
        sched = build_schedule(8, 49.0, 7.65, lam=0.23, sigma_data=7.65)
        assert sched.sigmas[0] == 49.0
        assert abs(sched.sigmas[-1] - 7.65) < 1e-12
        assert abs(sched.alphas[-1] - 0.23) < 1e-12
        long = build_schedule(24, 49.0, 3.0, sigma_data=3.0)
        sigmas = np.array(long.sigmas)
        ratios = sigmas[1:] / sigmas[:-1]
        assert np.max(np.abs(ratios - ratios[0])) < 1e-12


def test_adjoint_and_group_properties():
    with criterion("adjoint identity exact; dihedral closure/inverse; ensemble neutrality 1e-8"):
        import math
        rng = np.random.default_rng(104)
        for s in (2, 3, 4):
            x = ImageTensor(rng.random((1, 4 * s, 4 * s)))
            y = ImageTensor(rng.random((1, 4, 4)))
            lhs = math.fsum((sfold_downsample(x, s).data * y.data).ravel())
            rhs = math.fsum((x.data * zerofill_upsample(y, s).data).ravel())
            assert lhs == rhs

        img = ImageTensor(rng.random((1, 5, 7)))
        for a in range(8):
            for b in range(8):
                assert 0 <= dihedral_compose(a, b) < 8
            assert dihedral_compose(a, dihedral_inverse(a)) == 0
            back = apply_dihedral(apply_dihedral(img, a), dihedral_inverse(a))
            np.testing.assert_array_equal(back.data, img.data)

        spec = DegradationSpec("deblur", sigma255=5.0,
                               kernel=gaussian_kernel(1.0, 1.0, 0.0, 3))
        gt = ImageTensor(rng.random((1, 16, 16)))
        y = apply_degradation(gt, spec, seed=5)
        sched = build_schedule(8, 30.0, 5.0, sigma_data=5.0)
        for kind in ("identity", "median"):
            outs = [run(RestorationJob(spec=spec, y=y, schedule=sched,
                                       denoiser=make_denoiser(kind),
                                       ensemble=flag))[0]
                    for flag in (True, False)]
            assert np.max(np.abs(outs[0].data - outs[1].data)) < 1e-8


def test_tv_prox_oracle():
    with criterion("TV prox within 1e-4 of dual-QP oracle; nonexpansive on 100 pairs"):
        # frozen minimizer from a convex-programming solver (CLARABEL) on the
        # rng(42) 4x4 instance with weight 0.01
        x = np.random.default_rng(42).random((4, 4))
        expected = np.array([
            [0.7606560975997232, 0.45716241373789773, 0.8386362733245066, 0.7158131095658677],
            [0.11356223234574546, 0.9448445176916039, 0.7607507899191525, 0.7853944639922957],
            [0.14158177267765376, 0.46212957443801833, 0.39371806806588167, 0.8968115713485205],
            [0.6454278825689317, 0.7929687888139255, 0.44245010383210437, 0.24723872176454417],
        ])
        got = tv_prox(ImageTensor(x[None]), 0.01).data[0]
        assert np.max(np.abs(got - expected)) < 1e-4

        rng = np.random.default_rng(105)
        for _ in range(100):
            a, b = rng.random((6, 6)), rng.random((6, 6))
            pa = tv_prox(ImageTensor(a[None]), 0.05).data[0]
            pb = tv_prox(ImageTensor(b[None]), 0.05).data[0]
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-8


def test_end_to_end_deblur_improvement():
    with criterion("deblur fixture: TV prior gains >= 1 dB over blurry input in < 30 s"):
        gt = read_png(os.path.join(FIXTURES, "gray256.png"))
        k = load_kernel(os.path.join(KERNELS, "motion1.txt"))
        spec = DegradationSpec("deblur", sigma255=7.65, kernel=k)
        y = apply_degradation(gt, spec, seed=42)
        sched = build_schedule(8, 49.0, 7.65, lam=0.23, sigma_data=7.65)
        job = RestorationJob(spec=spec, y=y, schedule=sched,
                             denoiser=make_denoiser("tv"), ground_truth=gt)
        # CPU time, not wall time: shared-runner wall clocks are unreliable
        start = time.process_time()
        out, _ = run(job)
        elapsed = time.process_time() - start
        gain = psnr(gt, out) - psnr(gt, y)
        assert gain >= 1.0, f"gain {gain:.2f} dB"
        assert elapsed < 30.0, f"took {elapsed:.1f}s CPU"


def test_end_to_end_demosaic_improvement():
    with criterion("demosaic fixture: K=40 gains >= 0.3 dB over the linear init in < 30 s"):
        gt = read_png(os.path.join(FIXTURES, "color256.png"))
        gt = ImageTensor(gt.data[:, :128, :128])
        spec = DegradationSpec("demosaic")
        y = apply_degradation(gt, spec)
        base = psnr(gt, malvar_demosaic(y, spec.pattern))
        sched = build_schedule(40, 6.0, 0.6, lam=0.23, sigma_data=0.0)
        job = RestorationJob(spec=spec, y=y, schedule=sched,
                             denoiser=make_denoiser("tv:kappa=3"), ground_truth=gt)
        start = time.process_time()
        out, _ = run(job)
        elapsed = time.process_time() - start
        gain = psnr(gt, out) - base
        assert gain >= 0.3, f"gain {gain:.2f} dB over {base:.2f} dB init"
        assert elapsed < 30.0, f"took {elapsed:.1f}s CPU"


def test_parameter_trend():
    with criterion("final PSNR trend: (8,49) > (8,9) and (24,9) > (4,9)"):
        gt = read_png(os.path.join(FIXTURES, "gray256.png"))
        k = load_kernel(os.path.join(KERNELS, "motion1.txt"))
        spec = DegradationSpec("deblur", sigma255=7.65, kernel=k)
        y = apply_degradation(gt, spec, seed=42)
        sched = build_schedule(24, 49.0, 7.65, lam=0.23, sigma_data=7.65)
        job = RestorationJob(spec=spec, y=y, schedule=sched,
                             denoiser=make_denoiser("tv"), ground_truth=gt)
        table = sweep(job, [4, 8, 24], [9.0, 49.0])
        (p4_9, _), (p8_9, p8_49), (p24_9, _) = table
        assert p8_49 > p8_9, f"(8,49)={p8_49:.2f} vs (8,9)={p8_9:.2f}"
        assert p24_9 > p4_9, f"(24,9)={p24_9:.2f} vs (4,9)={p4_9:.2f}"


def test_determinism():
    with criterion("seeded degradation, traces and outputs are bit-identical"):
        rng = np.random.default_rng(106)
        gt = ImageTensor(rng.random((1, 32, 32)))
        k = gaussian_kernel(1.2, 1.2, 0.0, 5)
        spec = DegradationSpec("deblur", sigma255=7.65, kernel=k)
        y1 = apply_degradation(gt, spec, seed=77)
        y2 = apply_degradation(gt, spec, seed=77)
        np.testing.assert_array_equal(y1.data, y2.data)
        sched = build_schedule(4, 30.0, 7.65, sigma_data=7.65)
        runs = []
        for _ in range(2):
            job = RestorationJob(spec=spec, y=y1, schedule=sched,
                                 denoiser=make_denoiser("dct"), ground_truth=gt)
            runs.append(run(job))
        np.testing.assert_array_equal(runs[0][0].data, runs[1][0].data)
        assert [t.__dict__ | {"wall_time": 0} for t in runs[0][1]] == \
               [t.__dict__ | {"wall_time": 0} for t in runs[1][1]]
