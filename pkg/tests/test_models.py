import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isomix.errors import DomainError, InvalidDensityError, PreconditionError, UnsupportedOperation
from isomix.models import (
    LOCATION,
    SCALE,
    BivariateNormal,
    ExponentialLocation,
    GammaScale,
    ParamPoint,
    PowerScale,
    conditional_moments,
    density_fz,
    equivariant_constants,
    fz_log_concavity_check,
    log_concavity_check,
    make_model,
    sample,
    sample_batch,
)
from isomix.quadrature import integrate
from isomix.rng import RandomStream, StreamBatch

ALL_MODELS = [
    BivariateNormal(1.0, 1.0, 0.0),
    BivariateNormal(2.0, 10.0, -0.2),
    ExponentialLocation(1.0, 2.0),
    GammaScale(2.0, 3.0),
    GammaScale(0.5, 0.5),
    PowerScale(1.0, 2.0),
]


def _support(model):
    return (-math.inf, math.inf) if model.kind == LOCATION else (0.0, math.inf)


def _theta(model):
    return ParamPoint(0.0, 1.0) if model.kind == LOCATION else ParamPoint(1.0, 2.0, SCALE)


class TestParamPoint:
    def test_order_enforced(self):
        with pytest.raises(DomainError):
            ParamPoint(2.0, 1.0)

    def test_unrestricted_allows_crossing(self):
        assert ParamPoint.unrestricted(2.0, 1.0).lam == -1.0

    def test_scale_positive(self):
        with pytest.raises(DomainError):
            ParamPoint(0.0, 1.0, SCALE)

    def test_from_lambda(self):
        assert ParamPoint.from_lambda(2.5, LOCATION) == ParamPoint(0.0, 2.5)
        assert ParamPoint.from_lambda(3.0, SCALE).lam == 3.0


class TestConstruction:
    def test_make_model(self):
        assert make_model("gamma_scale", a1=1, a2=2) == GammaScale(1, 2)

    def test_unknown_token(self):
        with pytest.raises(PreconditionError, match="gama"):
            make_model("gama", a1=1, a2=1)

    @pytest.mark.parametrize("bad", [dict(sigma1=0, sigma2=1, rho=0), dict(sigma1=1, sigma2=1, rho=1.0)])
    def test_normal_domain(self, bad):
        with pytest.raises(DomainError):
            BivariateNormal(**bad)

    def test_shape_domain(self):
        with pytest.raises(DomainError):
            GammaScale(-1.0, 1.0)


class TestClosedForms:
    def test_normal_density_at_zero(self):
        assert density_fz(BivariateNormal(1, 1, 0), 0.0) == pytest.approx(1 / math.sqrt(4 * math.pi), rel=1e-15)

    def test_exponential_density_at_zero(self):
        assert density_fz(ExponentialLocation(1, 1), 0.0) == pytest.approx(0.5, rel=1e-15)

    def test_gamma_density_at_one(self):
        assert density_fz(GammaScale(1, 1), 1.0) == pytest.approx(0.25, rel=1e-15)

    def test_scale_density_zero_off_support(self):
        assert density_fz(GammaScale(1, 1), -1.0) == 0.0
        assert density_fz(PowerScale(1, 1), 0.0) == 0.0

    def test_constants(self):
        assert equivariant_constants(BivariateNormal(3, 2, 0.1)) == (0.0, 0.0)
        assert equivariant_constants(ExponentialLocation(1, 2)) == (1.0, 2.0)
        assert equivariant_constants(GammaScale(1, 3)) == (0.5, 0.25)
        assert equivariant_constants(PowerScale(1, 2)) == (1.5, 4.0 / 3.0)

    def test_conditional_moments(self):
        assert conditional_moments(GammaScale(1, 1), 1.0) == pytest.approx((1.0, 1.5))
        assert conditional_moments(PowerScale(1, 1), 2.0) == pytest.approx((1 / 3, 1 / 8))

    def test_conditional_moments_location_rejected(self):
        with pytest.raises(UnsupportedOperation):
            conditional_moments(BivariateNormal(1, 1, 0), 1.0)

    def test_conditional_moments_need_positive_z(self):
        with pytest.raises(DomainError):
            conditional_moments(GammaScale(1, 1), 0.0)

    @given(a1=st.floats(0.1, 30), a2=st.floats(0.1, 30), z=st.floats(1e-4, 1e4))
    def test_conditional_jensen(self, a1, a2, z):
        for m in (GammaScale(a1, a2), PowerScale(a1, a2)):
            h1, h2 = conditional_moments(m, z)
            assert h2 >= h1 * h1 * (1 - 1e-12)


class TestNormalization:
    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.token}{m.params()}")
    def test_density_integrates_to_one(self, model):
        r = integrate(model.density_fz, *_support(model), breakpoints=model.fz_kinks(), epsabs=0.0, epsrel=1e-10)
        assert abs(r.value - 1.0) < 1e-6

    @pytest.mark.parametrize("model,mean1", [(GammaScale(2, 3), 2.0), (GammaScale(0.5, 0.5), 0.5),
                                             (PowerScale(1, 2), 0.5), (PowerScale(3, 0.5), 0.75)])
    def test_tower_property(self, model, mean1):
        def f(z):
            return model.conditional_moments(z)[0] * model.density_fz(z)

        r = integrate(f, 0.0, math.inf, breakpoints=model.fz_kinks(), epsabs=0.0, epsrel=1e-10)
        assert r.value == pytest.approx(mean1, abs=1e-6)


class TestSampling:
    n = 100_000

    def test_space_mismatch(self):
        with pytest.raises(PreconditionError):
            sample_batch(GammaScale(1, 1), ParamPoint(0.0, 1.0), StreamBatch.range(1, 0, 10))

    def test_scalar_sample_matches_batch(self):
        m = GammaScale(0.7, 2.0)
        th = ParamPoint(1.0, 3.0, SCALE)
        x1, x2 = sample_batch(m, th, StreamBatch.range(5, 0, 20))
        for i in (0, 7, 19):
            obs = sample(m, th, RandomStream(5, i))
            assert (obs.x1, obs.x2) == (x1[i], x2[i])

    def test_sample_needs_single_row(self):
        with pytest.raises(PreconditionError):
            sample(GammaScale(1, 1), ParamPoint(1, 1, SCALE), StreamBatch.range(1, 0, 2))

    def test_normal_means(self):
        x1, x2 = sample_batch(BivariateNormal(1, 1, 0), ParamPoint(0, 0), StreamBatch.range(21, 0, self.n))
        tol = 4 / math.sqrt(self.n)
        assert abs(x1.mean()) < tol and abs(x2.mean()) < tol

    def test_normal_correlation(self):
        x1, x2 = sample_batch(BivariateNormal(2, 0.5, -0.6), ParamPoint(0, 0), StreamBatch.range(22, 0, self.n))
        assert np.corrcoef(x1, x2)[0, 1] == pytest.approx(-0.6, abs=0.01)
        assert x1.std() == pytest.approx(2.0, rel=0.01)

    def test_exponential_means(self):
        x1, x2 = sample_batch(ExponentialLocation(1, 2), ParamPoint(0, 0), StreamBatch.range(23, 0, self.n))
        assert abs(x1.mean() - 1) < 4 * 1 / math.sqrt(self.n)
        assert abs(x2.mean() - 2) < 4 * 2 / math.sqrt(self.n)

    def test_gamma_means(self):
        x1, x2 = sample_batch(GammaScale(2, 3), ParamPoint(1, 2, SCALE), StreamBatch.range(24, 0, self.n))
        assert abs(x1.mean() - 2) < 4 * math.sqrt(2) / math.sqrt(self.n)
        assert abs(x2.mean() - 6) < 4 * 2 * math.sqrt(3) / math.sqrt(self.n)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.token}{m.params()}")
    def test_sampler_matches_density(self, model):
        th = _theta(model)
        x1, x2 = sample_batch(model, th, StreamBatch.range(31, 0, self.n))
        z = (x2 - th.theta2) - (x1 - th.theta1) if model.kind == LOCATION else (x2 / th.theta2) / (x1 / th.theta1)
        z = np.sort(z)
        qs = np.quantile(z, np.linspace(0.005, 0.995, 120))
        lo = _support(model)[0]
        cdf = np.array([integrate(model.density_fz, lo, q, breakpoints=[k for k in model.fz_kinks() if k < q],
                                  epsabs=1e-12, epsrel=1e-10).value for q in qs])
        ecdf = np.searchsorted(z, qs, side="right") / z.size
        assert np.max(np.abs(ecdf - cdf)) < 1.63 * 1.5 / math.sqrt(self.n)

    @pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: f"{m.token}{m.params()}")
    def test_equivariant_constants_match_mc(self, model):
        th = ParamPoint(0, 0) if model.kind == LOCATION else ParamPoint(1, 1, SCALE)
        z1, z2 = sample_batch(model, th, StreamBatch.range(41, 0, self.n))
        c1, c2 = model.equivariant_constants()
        for z, c in ((z1, c1), (z2, c2)):
            if model.kind == LOCATION:
                assert abs(z.mean() - c) < 4 * z.std() / math.sqrt(self.n)
            else:
                a, b = z, z * z
                r = a.mean() / b.mean()
                se = math.sqrt(np.var(a - r * b) / self.n) / b.mean()
                assert abs(r - c) < 4 * se


def _cauchy(x):
    return 1 / (math.pi * (1 + np.square(x)))


class TestLogConcavity:
    def test_normal(self):
        assert fz_log_concavity_check(BivariateNormal(1, 1, 0))

    def test_exponential(self):
        assert fz_log_concavity_check(ExponentialLocation(1, 2))

    def test_cauchy_fails(self):
        assert not log_concavity_check(_cauchy, (-10, 10), 201)

    def test_cauchy_passes_on_concave_core(self):
        # log of the Cauchy density is concave on (-1, 1)
        assert log_concavity_check(_cauchy, (-0.99, 0.99), 101)

    def test_negative_density_rejected(self):
        with pytest.raises(InvalidDensityError):
            log_concavity_check(lambda x: x, (-1, 1), 11)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            log_concavity_check(_cauchy, (0, 1), 2)
        with pytest.raises(PreconditionError):
            log_concavity_check(_cauchy, (1, 0), 11)

    def test_scale_family_rejected(self):
        with pytest.raises(UnsupportedOperation):
            fz_log_concavity_check(GammaScale(1, 1))
