import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from bpradon.bandpass import BandSpec, Parity, RadialSpectrum, eval_profile
from bpradon.errors import QuadratureUnderResolved
from bpradon.grids import AngularGrid, RadialGrid, equispaced_angles, make_jittered_grid
from bpradon.radon import (
    ImageEval,
    RasterSpec,
    SampleTable,
    SinogramModel,
    counterexample_norms,
    eval_image,
    eval_sinogram,
    image_raster,
    moment_check,
    norm_bound_check,
    profile_norm_at,
    radial_moments,
    random_model,
    sample_sinogram,
    unfold,
)

CYC = BandSpec(1.0, 2.0)
RAD = BandSpec(1.0, 2.0, "radians")


def const_model(band=CYC):
    return SinogramModel.from_nonnegative(band, {0: (1.0,)})


def polar_image_oracle(model, x, y, n_sigma=512, n_omega=512):
    """f(x) = int int F(sigma w) exp(2 pi i sigma x.w) sigma d sigma d w, brute force in polar form."""
    band = model.band.in_cycles()
    t, w = np.polynomial.legendre.leggauss(n_sigma)
    sig = 0.5 * (band.r_hi - band.r_lo) * t + 0.5 * (band.r_hi + band.r_lo)
    wsig = 0.5 * (band.r_hi - band.r_lo) * w
    om = 2 * math.pi * np.arange(n_omega) / n_omega
    F = np.zeros((n_sigma, n_omega), dtype=complex)
    for n, spec in model.harmonics.items():
        F += spec.in_cycles()(sig)[:, None] * np.exp(1j * n * om)[None, :]
    proj = x * np.cos(om) + y * np.sin(om)
    ph = np.exp(2j * math.pi * sig[:, None] * proj[None, :])
    return float(((wsig * sig) @ (F * ph)).sum().real * 2 * math.pi / n_omega)


class TestModel:
    def test_parity_enforced(self):
        bad = {0: RadialSpectrum(CYC, Parity.ODD, (1.0,))}
        with pytest.raises(ValueError):
            SinogramModel(CYC, 0, bad)

    def test_reality_enforced(self):
        h1 = RadialSpectrum(CYC, Parity.ODD, (1.0,))  # needs H_-1 = -conj(H_1)
        harm = {0: RadialSpectrum(CYC, Parity.EVEN, (0.0,)), 1: h1, -1: h1}
        with pytest.raises(ValueError):
            SinogramModel(CYC, 1, harm)

    def test_text_round_trip(self):
        m = random_model(RAD, 3, 5)
        back = SinogramModel.from_text(m.to_text())
        assert back.to_text() == m.to_text()
        s = np.linspace(-5, 5, 11)
        np.testing.assert_array_equal(eval_sinogram(back, s, 0.3), eval_sinogram(m, s, 0.3))

    def test_from_text_malformed(self):
        with pytest.raises(ValueError):
            SinogramModel.from_text("band=1,2\ndegree=x\n")


class TestSinogram:
    def test_constant_at_origin(self):
        for phi in (0.0, 1.0, 4.0):
            assert eval_sinogram(const_model(), 0.0, phi) == pytest.approx(2.0)

    def test_odd_harmonic_vanishes_at_origin(self):
        m = SinogramModel.from_nonnegative(CYC, {0: (0.0,), 1: (0.0, 1.0)})
        np.testing.assert_allclose(eval_sinogram(m, 0.0, np.linspace(0, 6, 9)), 0.0, atol=1e-15)

    def test_matches_harmonic_sum(self):
        m = random_model(CYC, 2, 1)
        s, phi = 0.7, 1.1
        ref = sum(eval_profile(h, s) * np.exp(1j * n * phi) for n, h in m.harmonics.items())
        assert abs(ref.imag) < 1e-12
        assert eval_sinogram(m, s, phi) == pytest.approx(ref.real, abs=1e-13)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 6), st.integers(0, 10_000), st.sampled_from([CYC, RAD, BandSpec(0.5, 3.0)]))
    def test_range_symmetry(self, N, seed, band):
        m = random_model(band, N, seed)
        rng = np.random.default_rng(seed)
        s = rng.uniform(-30, 30, 100)
        phi = rng.uniform(0, 2 * math.pi, 100)
        np.testing.assert_allclose(eval_sinogram(m, s, phi), eval_sinogram(m, -s, phi + math.pi), atol=1e-12)


class TestSampling:
    def test_exact_and_noisy(self):
        m = random_model(RAD, 2, 0)
        rad = make_jittered_grid(1.0, 0.2, 10.0, 0)
        ang = equispaced_angles(5)
        t0 = sample_sinogram(m, rad, ang)
        direct = eval_sinogram(m, rad.points[:, None], ang.angles[None, :])
        np.testing.assert_array_equal(t0.values, direct)
        t1 = sample_sinogram(m, rad, ang, 0.01, 3)
        t2 = sample_sinogram(m, rad, ang, 0.01, 3)
        np.testing.assert_array_equal(t1.values, t2.values)
        noise = 0.01 * np.random.default_rng(3).standard_normal(t0.values.shape)
        np.testing.assert_allclose(t1.values - t0.values, noise, atol=1e-15)

    def test_zero_model(self):
        t = sample_sinogram(SinogramModel.zero(CYC, 2), RadialGrid([-1.0, 1.0]), equispaced_angles(3))
        assert not np.any(t.values)

    def test_csv_round_trip(self):
        t = sample_sinogram(random_model(CYC, 1, 2), RadialGrid([-1.5, 0.25, 2.0]), equispaced_angles(3))
        text = t.to_csv()
        assert text.splitlines()[0] == "s,theta,value"
        back = SampleTable.from_csv(text)
        np.testing.assert_array_equal(back.values, t.values)
        assert back.to_csv() == text


class TestUnfold:
    def test_constant(self):
        t = SampleTable(RadialGrid([-1.0, 1.0]), equispaced_angles(2), np.full((2, 2), 3.0))
        assert np.all(unfold(t).values == 3.0)

    def test_mirror_matches_model(self):
        m = random_model(CYC, 3, 4)
        t = sample_sinogram(m, make_jittered_grid(0.3, 0.2, 5.0, 1), equispaced_angles(7))
        u = unfold(t)
        np.testing.assert_allclose(u.values, eval_sinogram(m, u.s, u.theta), atol=1e-12)

    def test_single_entry(self):
        v = np.zeros((3, 2))
        v[1, 0] = 1.0
        t = SampleTable(RadialGrid([-1.0, 0.5, 2.0]), AngularGrid([0.0, 1.0]), v)
        u = unfold(t)
        hits = np.nonzero(u.values)[0]
        assert len(hits) == 2
        assert sorted(zip(u.s[hits], u.theta[hits])) == sorted([(0.5, 0.0), (-0.5, math.pi)])


class TestImage:
    def test_origin_constant(self):
        assert eval_image(ImageEval(const_model()), 0.0, 0.0) == pytest.approx(3 * math.pi, rel=1e-12)

    def test_origin_depends_on_n0_only(self):
        m = random_model(CYC, 3, 8)
        m0 = SinogramModel.from_nonnegative(CYC, {0: m.harmonics[0]})
        assert eval_image(ImageEval(m), 0.0, 1.3) == pytest.approx(eval_image(ImageEval(m0), 0.0, 0.0), rel=1e-12)

    def test_hankel_against_fine_quadrature(self):
        x, w = np.polynomial.legendre.leggauss(4096)
        sig, w = 1.5 + 0.5 * x, 0.5 * w
        ref = 2 * math.pi * np.sum(w * special.j0(2 * math.pi * sig * 0.4) * sig)
        assert eval_image(ImageEval(const_model()), 0.4, 0.0) == pytest.approx(ref, abs=1e-8)

    @pytest.mark.parametrize("band, N, seed", [(CYC, 0, 0), (RAD, 2, 1), (BandSpec(0.5, 3.0), 3, 2)])
    def test_against_polar_fourier_oracle(self, band, N, seed):
        m = random_model(band, N, seed)
        ie = ImageEval(m)
        for x, y in ((0.0, 0.0), (0.3, -0.2), (1.1, 0.7), (-2.0, 1.5)):
            ref = polar_image_oracle(m, x, y)
            got = eval_image(ie, math.hypot(x, y), math.atan2(y, x))
            assert got == pytest.approx(ref, abs=1e-4 * max(1.0, abs(ref)))

    def test_under_resolved(self):
        with pytest.raises(QuadratureUnderResolved):
            eval_image(ImageEval(const_model(), order=32), 10.0, 0.0)

    def test_order_floor(self):
        with pytest.raises(ValueError):
            ImageEval(const_model(), order=16)

    def test_raster_orientation(self):
        m = random_model(RAD, 2, 3)
        rs = RasterSpec(6, 3.0)
        r = image_raster(ImageEval(m), rs)
        c = rs.coords
        assert r[4, 1] == pytest.approx(eval_image(ImageEval(m), math.hypot(c[1], c[4]), math.atan2(c[4], c[1])))


class TestIdentities:
    def test_counterexample_frozen(self):
        polar, flat = counterexample_norms(10, 1.0)
        assert polar == pytest.approx(2 * math.pi * 0.9, rel=1e-12)
        assert flat == pytest.approx(4 * math.pi * math.log(10), rel=1e-12)
        assert (polar, flat) == pytest.approx((5.654866776461628, 28.935137649), rel=1e-9)

    def test_counterexample_empty(self):
        assert counterexample_norms(1, 1.0) == (0.0, 0.0)

    def test_counterexample_growth(self):
        _, f10 = counterexample_norms(10, 1.0)
        _, f100 = counterexample_norms(100, 1.0)
        assert f100 - f10 == pytest.approx(4 * math.pi * math.log(10), rel=1e-9)
        flats = [counterexample_norms(n, 1.0)[1] for n in (2, 5, 10, 50, 100)]
        assert all(a < b for a, b in zip(flats, flats[1:]))

    def test_norm_bound_constant(self):
        rep = norm_bound_check(const_model())
        assert rep.f_norm_sq == pytest.approx(3 * math.pi)
        assert rep.sino_norm_sq == pytest.approx(4 * math.pi)
        assert (rep.lower, rep.upper) == pytest.approx((3 * math.pi, 6 * math.pi))
        assert rep.satisfied

    def test_norm_bound_zero(self):
        rep = norm_bound_check(SinogramModel.zero(CYC, 1))
        assert (rep.f_norm_sq, rep.sino_norm_sq, rep.satisfied) == (0.0, 0.0, True)

    @pytest.mark.parametrize("seed", range(50))
    def test_norm_bound_random(self, seed):
        rep = norm_bound_check(random_model(BandSpec(1.0, 3.0), 3, seed, poly_degree=5))
        assert rep.satisfied
        ratio = rep.sino_norm_sq / rep.f_norm_sq
        assert 2 / 3 - 1e-12 <= ratio <= 2 + 1e-12

    def test_norms_against_quadrature(self):
        m = random_model(CYC, 2, 9)
        x, w = np.polynomial.legendre.leggauss(64)
        sig, w = 1.5 + 0.5 * x, 0.5 * w
        f_sq = g_sq = 0.0
        for spec in m.harmonics.values():
            a2 = np.abs(spec(sig)) ** 2
            f_sq += 2 * math.pi * np.sum(w * a2 * sig)
            g_sq += 2 * math.pi * 2 * np.sum(w * a2)
        rep = norm_bound_check(m)
        assert (rep.f_norm_sq, rep.sino_norm_sq) == pytest.approx((f_sq, g_sq), rel=1e-12)

    def test_profile_norm_matches_parseval(self):
        m = SinogramModel.from_nonnegative(CYC, {0: (1.0,)})
        assert profile_norm_at(m, 0.4) == pytest.approx(math.sqrt(2))

    def test_moment_zero_for_constant(self):
        m = moment_check(const_model(), 0, 0.0)
        assert abs(m[0]) <= 1e-3 * profile_norm_at(const_model(), 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_moments_vanish(self, seed):
        m = random_model(CYC, 2, seed)
        mk = np.abs(moment_check(m, 5, 0.7))
        assert np.all(mk <= 1e-3 * profile_norm_at(m, 0.7))

    def test_untapered_moments_do_not_settle(self):
        m = const_model()
        mk = np.abs(moment_check(m, 2, 0.0, taper=False))
        assert mk[2] > 1.0

    def test_gaussian_negative_control(self):
        m0 = radial_moments(lambda s: np.exp(-s * s), 20.0, 2, 1.0)
        np.testing.assert_allclose(m0, [math.sqrt(math.pi), 0.0, math.sqrt(math.pi) / 2], atol=1e-12)

    def test_counterexample_fast(self):
        t0 = time.perf_counter()
        for n in (2, 10, 100):
            counterexample_norms(n, 1.0)
        assert time.perf_counter() - t0 < 1.0
