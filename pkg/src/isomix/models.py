"""Bivariate location and scale families with known nuisance parameters.

Four concrete families are supported:

===================  ==============  ==========================================
family               config token    hyperparameters
===================  ==============  ==========================================
BivariateNormal      ``normal``      sigma1 > 0, sigma2 > 0, -1 < rho < 1
ExponentialLocation  ``exp_loc``     sigma1 > 0, sigma2 > 0 (known scales)
GammaScale           ``gamma_scale`` a1 > 0, a2 > 0 (known shapes)
PowerScale           ``power_scale`` a1 > 0, a2 > 0 (known exponents)
===================  ==============  ==========================================

For location families ``Z_i = X_i - theta_i`` and ``Z = Z2 - Z1``; for scale
families ``Z_i = X_i / theta_i`` and ``Z = Z2 / Z1``.  Every family exposes the
closed-form density of ``Z`` (plus its logarithm, which the quadrature code
uses to stay clear of underflow), the equivariant-estimator constants and a
vectorized exact sampler driven by :class:`~isomix.rng.StreamBatch`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InvalidDensityError, PreconditionError, UnsupportedOperation
from .rng import StreamBatch

LOCATION = "location"
SCALE = "scale"


class Observation(NamedTuple):
    x1: float
    x2: float


@dataclass(frozen=True)
class ParamPoint:
    """A parameter pair in the restricted space ``theta1 <= theta2``."""

    theta1: float
    theta2: float
    space: str = LOCATION
    restricted: bool = True

    def __post_init__(self):
        if self.space not in (LOCATION, SCALE):
            raise PreconditionError(f"unknown parameter space {self.space!r}")
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise DomainError("parameters must be finite")
        if self.space == SCALE and (self.theta1 <= 0 or self.theta2 <= 0):
            raise DomainError("scale parameters must be positive")
        if self.restricted and self.theta1 > self.theta2:
            raise DomainError(f"theta1={self.theta1} exceeds theta2={self.theta2}")

    @classmethod
    def unrestricted(cls, theta1: float, theta2: float, space: str = LOCATION) -> "ParamPoint":
        return cls(theta1, theta2, space, restricted=False)

    @classmethod
    def from_lambda(cls, lam: float, space: str) -> "ParamPoint":
        """Canonical point (0, lam) for location or (1, lam) for scale."""
        if space == LOCATION:
            return cls(0.0, float(lam), LOCATION)
        return cls(1.0, float(lam), SCALE)

    @property
    def lam(self) -> float:
        if self.space == LOCATION:
            return self.theta2 - self.theta1
        return self.theta2 / self.theta1


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


class _Family:
    """Behaviour shared by the concrete families."""

    token: str
    kind: str

    def density_fz(self, z):
        return np.exp(self.log_density_fz(z))

    def conditional_moments(self, z):
        raise UnsupportedOperation(f"conditional moments are defined for scale families only, not {self.token}")

    def fz_kinks(self) -> tuple[float, ...]:
        """Points where f_Z is not smooth; quadrature uses them as panel edges."""
        return ()

    def params(self) -> dict[str, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class BivariateNormal(_Family):
    sigma1: float
    sigma2: float
    rho: float

    token = "normal"
    kind = LOCATION

    def __post_init__(self):
        _positive("sigma1", self.sigma1)
        _positive("sigma2", self.sigma2)
        if not (isinstance(self.rho, (int, float)) and -1.0 < self.rho < 1.0):
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho!r}")

    @property
    def tau2(self) -> float:
        return self.sigma1**2 + self.sigma2**2 - 2.0 * self.rho * self.sigma1 * self.sigma2

    @property
    def gls_weight(self) -> float:
        """Weight on X1 of the best linear combination of X1 and X2 (alpha_0 of the restricted MLE)."""
        return self.sigma2 * (self.sigma2 - self.rho * self.sigma1) / self.tau2

    def params(self):
        return {"sigma1": self.sigma1, "sigma2": self.sigma2, "rho": self.rho}

    def equivariant_constants(self):
        return (0.0, 0.0)

    def log_density_fz(self, z):
        z = np.asarray(z, dtype=float)
        return -0.5 * z * z / self.tau2 - 0.5 * math.log(2.0 * math.pi * self.tau2)

    def fz_mode(self) -> float:
        return 0.0

    def fz_tail_width(self) -> float:
        return 12.0 * math.sqrt(self.tau2)

    def fz_range(self):
        w = self.fz_tail_width()
        return (-w, w)

    def sample_batch(self, theta: ParamPoint, batch: StreamBatch):
        u = batch.normal()
        v = batch.normal()
        x1 = theta.theta1 + self.sigma1 * u
        x2 = theta.theta2 + self.sigma2 * (self.rho * u + math.sqrt(1.0 - self.rho**2) * v)
        return x1, x2


@dataclass(frozen=True)
class ExponentialLocation(_Family):
    sigma1: float
    sigma2: float

    token = "exp_loc"
    kind = LOCATION

    def __post_init__(self):
        _positive("sigma1", self.sigma1)
        _positive("sigma2", self.sigma2)

    def params(self):
        return {"sigma1": self.sigma1, "sigma2": self.sigma2}

    def equivariant_constants(self):
        return (float(self.sigma1), float(self.sigma2))

    def log_density_fz(self, z):
        z = np.asarray(z, dtype=float)
        slope = np.where(z < 0, 1.0 / self.sigma1, -1.0 / self.sigma2)
        return slope * z - math.log(self.sigma1 + self.sigma2)

    def fz_kinks(self):
        return (0.0,)

    def fz_mode(self) -> float:
        return 0.0

    def fz_tail_width(self) -> float:
        return 60.0 * self.sigma1

    def fz_range(self):
        return (-60.0 * self.sigma1, 60.0 * self.sigma2)

    def sample_batch(self, theta: ParamPoint, batch: StreamBatch):
        e1 = batch.exponential()
        e2 = batch.exponential()
        return theta.theta1 + self.sigma1 * e1, theta.theta2 + self.sigma2 * e2


@dataclass(frozen=True)
class GammaScale(_Family):
    a1: float
    a2: float

    token = "gamma_scale"
    kind = SCALE

    def __post_init__(self):
        _positive("a1", self.a1)
        _positive("a2", self.a2)

    def params(self):
        return {"a1": self.a1, "a2": self.a2}

    def equivariant_constants(self):
        return (1.0 / (self.a1 + 1.0), 1.0 / (self.a2 + 1.0))

    def log_density_fz(self, z):
        z = np.asarray(z, dtype=float)
        s = self.a1 + self.a2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                gammaln(s) - gammaln(self.a1) - gammaln(self.a2)
                + (self.a2 - 1.0) * np.log(z)
                - s * np.log1p(z)
            )
        return np.where(z > 0, out, -np.inf)

    def conditional_moments(self, z):
        z = np.asarray(z, dtype=float)
        s = self.a1 + self.a2
        return s / (1.0 + z), (s + 1.0) * s / (1.0 + z) ** 2

    def sample_batch(self, theta: ParamPoint, batch: StreamBatch):
        g1 = batch.gamma(self.a1)
        g2 = batch.gamma(self.a2)
        return theta.theta1 * g1, theta.theta2 * g2


@dataclass(frozen=True)
class PowerScale(_Family):
    a1: float
    a2: float

    token = "power_scale"
    kind = SCALE

    def __post_init__(self):
        _positive("a1", self.a1)
        _positive("a2", self.a2)

    def params(self):
        return {"a1": self.a1, "a2": self.a2}

    def equivariant_constants(self):
        return ((self.a1 + 2.0) / (self.a1 + 1.0), (self.a2 + 2.0) / (self.a2 + 1.0))

    def log_density_fz(self, z):
        z = np.asarray(z, dtype=float)
        s = self.a1 + self.a2
        with np.errstate(divide="ignore", invalid="ignore"):
            logz = np.log(z)
            out = math.log(self.a1 * self.a2 / s) + (self.a2 - 1.0) * logz - s * np.maximum(logz, 0.0)
        return np.where(z > 0, out, -np.inf)

    def conditional_moments(self, z):
        z = np.asarray(z, dtype=float)
        s = self.a1 + self.a2
        m = np.minimum(1.0, 1.0 / z)
        return s / (s + 1.0) * m, s / (s + 2.0) * m * m

    def fz_kinks(self):
        return (1.0,)

    def sample_batch(self, theta: ParamPoint, batch: StreamBatch):
        u1 = batch.uniform()
        u2 = batch.uniform()
        return theta.theta1 * u1 ** (1.0 / self.a1), theta.theta2 * u2 ** (1.0 / self.a2)


ModelSpec = Union[BivariateNormal, ExponentialLocation, GammaScale, PowerScale]

FAMILIES: dict[str, type] = {
    "normal": BivariateNormal,
    "exp_loc": ExponentialLocation,
    "gamma_scale": GammaScale,
    "power_scale": PowerScale,
}


def make_model(token: str, **params: float) -> ModelSpec:
    """Build a model from its config token and hyperparameters."""
    try:
        cls = FAMILIES[token]
    except KeyError:
        raise PreconditionError(f"unknown family {token!r}; expected one of {sorted(FAMILIES)}") from None
    return cls(**params)


def _check_space(model: ModelSpec, params: ParamPoint) -> None:
    if params.space != model.kind:
        raise PreconditionError(f"{model.token} needs a {model.kind} parameter point, got {params.space}")


def sample_batch(model: ModelSpec, params: ParamPoint, batch: StreamBatch):
    """Draw one observation per row of ``batch``; returns arrays ``(x1, x2)``."""
    _check_space(model, params)
    return model.sample_batch(params, batch)


def sample(model: ModelSpec, params: ParamPoint, stream: StreamBatch) -> Observation:
    """One exact draw from ``f_theta``, consuming uniforms from ``stream``."""
    if len(stream) != 1:
        raise PreconditionError("sample() takes a single-row stream; use sample_batch for blocks")
    x1, x2 = sample_batch(model, params, stream)
    return Observation(float(x1[0]), float(x2[0]))


def density_fz(model: ModelSpec, z):
    """Density of ``Z2 - Z1`` (location) or ``Z2 / Z1`` (scale); zero off the support."""
    out = model.density_fz(z)
    return float(out) if np.ndim(out) == 0 else out


def equivariant_constants(model: ModelSpec) -> tuple[float, float]:
    """``(c01, c02)``: E[Z_i] for location families, E[Z_i]/E[Z_i^2] for scale families."""
    return model.equivariant_constants()


def conditional_moments(model: ModelSpec, z):
    """``(E[Z1 | Z=z], E[Z1^2 | Z=z])`` for scale families."""
    if model.kind != SCALE:
        raise UnsupportedOperation(f"conditional moments are defined for scale families only, not {model.token}")
    if np.any(np.asarray(z) <= 0):
        raise DomainError("conditional moments need z > 0")
    h1, h2 = model.conditional_moments(z)
    if np.ndim(h1) == 0:
        return float(h1), float(h2)
    return h1, h2


def log_concavity_check(
    density: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    grid_size: int = 201,
) -> bool:
    """Grid falsifier for log-concavity of a univariate density.

    Tests ``g(x1) g(x2 - d) >= g(x1 - d) g(x2)`` for every grid triple with
    ``a < x1 - d``, ``x1 < x2 < b`` and ``d`` a multiple of the grid step.  A
    ``False`` answer is a certificate of a violation; ``True`` only means no
    violation was found on the grid.  Products are compared with a relative
    slack of 1e-12.
    """
    a, b = interval
    if grid_size < 3:
        raise PreconditionError("grid_size must be at least 3")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError("interval must be finite; truncate infinite ends first")
    if not a < b:
        raise PreconditionError("interval must satisfy a < b")
    x = a + (b - a) * np.arange(1, grid_size) / grid_size
    g = np.asarray(density(x), dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g < 0):
        raise InvalidDensityError("density evaluated negative or non-finite on the grid")
    m = g.size
    for k in range(1, m):
        # x1 = x[i], x1 - d = x[i - k], x2 = x[j], x2 - d = x[j - k], k <= i < j
        gi = g[k:]
        gik = g[:-k]
        lhs = gi[:, None] * gik[None, :]
        rhs = gik[:, None] * gi[None, :]
        upper = np.triu(np.ones((m - k, m - k), dtype=bool), 1)
        slack = 1e-12 * np.maximum(lhs, rhs)
        if np.any((lhs < rhs - slack) & upper):
            return False
    return True


def fz_log_concavity_check(model: ModelSpec, interval=None, grid_size: int = 201) -> bool:
    """:func:`log_concavity_check` applied to ``f_Z`` of a location family.

    Infinite ends of ``interval`` (default: the whole real line) are replaced
    by the family's truncation points.
    """
    if model.kind != LOCATION:
        raise UnsupportedOperation("log-concavity of f_Z is checked for location families")
    lo, hi = model.fz_range()
    a, b = interval if interval is not None else (-math.inf, math.inf)
    a = lo if not math.isfinite(a) else a
    b = hi if not math.isfinite(b) else b
    return log_concavity_check(model.density_fz, (a, b), grid_size)
