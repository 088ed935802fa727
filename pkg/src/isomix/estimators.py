"""Estimators of ordered location/scale pairs.

All functions accept scalar or array observations: given arrays they act
elementwise and return arrays, which is how the Monte Carlo engine calls
them.  Ties ``d1 == d2`` take the ordered branch.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, PreconditionError, UnsupportedOperation
from .models import LOCATION, SCALE, BivariateNormal, ExponentialLocation, GammaScale, Observation


class Estimate(NamedTuple):
    d1: float
    d2: float


@dataclass(frozen=True)
class WeightPair:
    """Loss weights ``(p1, p2)``."""

    p1: float = 1.0
    p2: float = 1.0

    def __post_init__(self):
        for name, v in (("p1", self.p1), ("p2", self.p2)):
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @property
    def alpha0(self) -> float:
        """``p1 / (p1 + p2)``: upper end of the admissible mixing range."""
        return self.p1 / (self.p1 + self.p2)

    @property
    def dominance_edge(self) -> float:
        """``max(0, (p1 - p2) / p1)``: smallest alpha that still beats the base estimator."""
        return max(0.0, (self.p1 - self.p2) / self.p1)


def _pack(d1, d2) -> Estimate:
    if np.ndim(d1) == 0 and np.ndim(d2) == 0:
        return Estimate(float(d1), float(d2))
    return Estimate(np.asarray(d1), np.asarray(d2))


def _require(model, kind: str, op: str) -> None:
    if model.kind != kind:
        raise UnsupportedOperation(f"{op} is defined for {kind} families, not {model.token}")


def blee(model, obs: Observation) -> Estimate:
    """Best location-equivariant estimator ``(x1 - c01, x2 - c02)``."""
    _require(model, LOCATION, "blee")
    c1, c2 = model.equivariant_constants()
    return _pack(np.subtract(obs[0], c1), np.subtract(obs[1], c2))


def bsee(model, obs: Observation) -> Estimate:
    """Best scale-equivariant estimator ``(c01 x1, c02 x2)``."""
    _require(model, SCALE, "bsee")
    x1, x2 = np.asarray(obs[0], dtype=float), np.asarray(obs[1], dtype=float)
    if np.any(x1 <= 0) or np.any(x2 <= 0):
        raise DomainError("scale-family observations must be positive")
    c1, c2 = model.equivariant_constants()
    return _pack(c1 * x1, c2 * x2)


def mix_arrays(d1, d2, r, alpha):
    """Vectorized core of :func:`mix_general`; ``r = p1 / p2`` may be an array."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    crossed = d1 > d2
    gap = d1 - d2
    m1 = alpha * d1 + (1.0 - alpha) * d2
    m2 = d2 + r * (1.0 - alpha) * gap
    return np.where(crossed, m1, d1), np.where(crossed, m2, d2)


def mix_general(base: Estimate, weights: WeightPair, alpha: float) -> Estimate:
    """Isotonic-regression (mixed) version of an arbitrary base estimate.

    Ordered inputs ``d1 <= d2`` pass through.  Crossed inputs become
    ``(a d1 + (1-a) d2, r (1-a) d1 + (1 - r (1-a)) d2)`` with ``r = p1/p2``,
    which keeps ``p1 d1 + p2 d2`` fixed.
    """
    return _pack(*mix_arrays(base[0], base[1], weights.p1 / weights.p2, alpha))


def mixed_location(model, weights: WeightPair, alpha: float, obs: Observation) -> Estimate:
    return mix_general(blee(model, obs), weights, alpha)


def mixed_scale(model, weights: WeightPair, alpha: float, obs: Observation) -> Estimate:
    return mix_general(bsee(model, obs), weights, alpha)


def restricted_mle(model, obs: Observation) -> Estimate:
    """Restricted maximum likelihood estimator under ``theta1 <= theta2``.

    Normal: the crossed case pools both coordinates with the weight
    ``sigma2 (sigma2 - rho sigma1) / tau^2``.  Exponential location:
    ``(min(x1, x2), x2)``.  Gamma scale: ``(min(x1/a1, s), max(x2/a2, s))``
    with ``s = (x1 + x2) / (a1 + a2)``.
    """
    x1 = np.asarray(obs[0], dtype=float)
    x2 = np.asarray(obs[1], dtype=float)
    if isinstance(model, BivariateNormal):
        w = model.gls_weight
        pooled = w * x1 + (1.0 - w) * x2
        crossed = x1 > x2
        return _pack(np.where(crossed, pooled, x1), np.where(crossed, pooled, x2))
    if isinstance(model, ExponentialLocation):
        return _pack(np.minimum(x1, x2), x2)
    if isinstance(model, GammaScale):
        if np.any(x1 <= 0) or np.any(x2 <= 0):
            raise DomainError("scale-family observations must be positive")
        pooled = (x1 + x2) / (model.a1 + model.a2)
        return _pack(np.minimum(x1 / model.a1, pooled), np.maximum(x2 / model.a2, pooled))
    raise UnsupportedOperation(f"no restricted MLE is available for {model.token}")


def _hp_form(model, obs: Observation, weight: float) -> Estimate:
    x1 = np.asarray(obs[0], dtype=float)
    x2 = np.asarray(obs[1], dtype=float)
    pooled = weight * x1 + (1.0 - weight) * x2
    return _pack(np.minimum(x1, pooled), np.maximum(x2, pooled))


def hp_estimator(model, obs: Observation) -> Estimate:
    """Hwang-Peddada estimator ``(min(x1, m), max(x2, m))``, ``m`` the pooled mean."""
    if not isinstance(model, BivariateNormal):
        raise UnsupportedOperation("the Hwang-Peddada estimator is defined for the bivariate normal")
    return _hp_form(model, obs, model.gls_weight)


def pdt_estimator(model, obs: Observation) -> Estimate:
    """Tan-Peddada variant of :func:`hp_estimator` with the pooling weight clipped at 0."""
    if not isinstance(model, BivariateNormal):
        raise UnsupportedOperation("the Tan-Peddada estimator is defined for the bivariate normal")
    return _hp_form(model, obs, max(0.0, model.gls_weight))


_MIX_RE = re.compile(r"^mix:(.+)$")
_NAMED = ("blee", "bsee", "rmle", "hp", "pdt")


@dataclass(frozen=True)
class EstimatorSpec:
    """Serializable estimator tag: ``blee``, ``bsee``, ``mix:<alpha>``, ``rmle``, ``hp`` or ``pdt``."""

    name: str
    alpha: float | None = None
    label: str | None = field(default=None, compare=False)

    @classmethod
    def parse(cls, token: str) -> "EstimatorSpec":
        token = token.strip()
        if token in _NAMED:
            return cls(token)
        m = _MIX_RE.match(token)
        if m:
            try:
                alpha = float(m.group(1))
            except ValueError:
                raise PreconditionError(f"bad mixing coefficient in estimator token {token!r}") from None
            if not math.isfinite(alpha):
                raise PreconditionError(f"mixing coefficient must be finite in {token!r}")
            return cls("mix", alpha, token)
        raise PreconditionError(f"unknown estimator token {token!r}")

    @property
    def token(self) -> str:
        if self.label is not None:
            return self.label
        if self.name == "mix":
            return f"mix:{self.alpha!r}"
        return self.name

    def __str__(self) -> str:
        return self.token

    def check_applicable(self, model) -> None:
        """Raise before any sampling if this estimator cannot be used with ``model``."""
        if self.name == "blee" or (self.name == "mix" and model.kind == LOCATION):
            _require(model, LOCATION, self.token)
        elif self.name == "bsee":
            _require(model, SCALE, self.token)
        elif self.name == "rmle":
            if not isinstance(model, (BivariateNormal, ExponentialLocation, GammaScale)):
                raise UnsupportedOperation(f"no restricted MLE is available for {model.token}")
        elif self.name in ("hp", "pdt"):
            if not isinstance(model, BivariateNormal):
                raise UnsupportedOperation(f"{self.name} is defined for the bivariate normal only")

    def __call__(self, model, weights: WeightPair, obs: Observation) -> Estimate:
        if self.name == "blee":
            return blee(model, obs)
        if self.name == "bsee":
            return bsee(model, obs)
        if self.name == "mix":
            if model.kind == LOCATION:
                return mixed_location(model, weights, self.alpha, obs)
            return mixed_scale(model, weights, self.alpha, obs)
        if self.name == "rmle":
            return restricted_mle(model, obs)
        if self.name == "hp":
            return hp_estimator(model, obs)
        return pdt_estimator(model, obs)
