"""Independent Monte Carlo oracles for the risk-minimizing mixing coefficient.

These never call the package's densities or quadrature.  Each one samples
the underlying pair (Z1, Z2) with numpy/scipy and estimates the ratio of the
two truncated moments, conditioning analytically on the truncation event to
keep every draw useful.  Standard errors use the delta method for a ratio of
means.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special, stats


class OracleValue(NamedTuple):
    alpha: float
    se: float


def _ratio(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    ma, mb = a.mean(), b.mean()
    r = ma / mb
    se = math.sqrt(np.var(a - r * b, ddof=1) / a.size) / abs(mb)
    return r, se


def normal_alpha(sigma1, sigma2, rho, p1, p2, lam, n=1_000_000, seed=0) -> OracleValue:
    """W ~ N(lam, tau^2) truncated to W < 0; alpha_star = lam E[W] / E[W^2]."""
    rng = np.random.default_rng(seed)
    tau = math.sqrt(sigma1**2 + sigma2**2 - 2 * rho * sigma1 * sigma2)
    w = stats.truncnorm.rvs(-math.inf, (0.0 - lam) / tau, loc=lam, scale=tau, size=n, random_state=rng)
    r, se = _ratio(w, w * w)
    share = p2 / (p1 + p2)
    return OracleValue(p1 / (p1 + p2) + share * lam * r, share * lam * se)


def exponential_alpha(sigma1, sigma2, p1, p2, lam, n=1_000_000, seed=0) -> OracleValue:
    """Z1 = sigma1 E1, Z2 = sigma2 E2; the event is Z1 > m = Z2 + lam + sigma1 - sigma2.

    Given Z2 the overshoot of Z1 past max(m, 0) is again exponential, and the
    event has probability exp(-max(m, 0) / sigma1).
    """
    rng = np.random.default_rng(seed)
    z2 = sigma2 * rng.exponential(size=n)
    m = z2 + lam + sigma1 - sigma2
    base = np.maximum(m, 0.0)
    z1 = base + sigma1 * rng.exponential(size=n)
    weight = np.exp(-base / sigma1)
    w = (z2 - z1) - (sigma2 - sigma1 - lam)          # always < 0
    r, se = _ratio(w * weight, w * w * weight)
    share = p2 / (p1 + p2)
    return OracleValue(p1 / (p1 + p2) + share * lam * r, share * lam * se)


def _scale_alpha(z1, z2, weight, c01, c02, p1, p2, lam):
    a = c01 * z1 - c02 * lam * z2                  # > 0 on the event
    r, se = _ratio(a * weight, a * a * weight)
    share = p2 / (p1 + p2)
    return OracleValue(p1 / (p1 + p2) - share * (lam - 1.0) * r, share * (lam - 1.0) * se)


def gamma_alpha(a1, a2, p1, p2, lam, n=1_000_000, seed=0) -> OracleValue:
    """Z_i ~ Gamma(a_i); event Z2 < c Z1 with c = c01 / (c02 lam), sampled by inverse CDF."""
    rng = np.random.default_rng(seed)
    c01, c02 = 1.0 / (a1 + 1.0), 1.0 / (a2 + 1.0)
    c = c01 / (c02 * lam)
    z1 = rng.gamma(a1, size=n)
    cap = special.gammainc(a2, c * z1)
    u = rng.uniform(size=n)
    z2 = special.gammaincinv(a2, u * cap)
    return _scale_alpha(z1, z2, cap, c01, c02, p1, p2, lam)


def power_alpha(a1, a2, p1, p2, lam, n=1_000_000, seed=0) -> OracleValue:
    """Z_i = U_i^(1/a_i) on (0, 1); Z2 truncated below min(c Z1, 1)."""
    rng = np.random.default_rng(seed)
    c01, c02 = (a1 + 2.0) / (a1 + 1.0), (a2 + 2.0) / (a2 + 1.0)
    c = c01 / (c02 * lam)
    z1 = rng.uniform(size=n) ** (1.0 / a1)
    top = np.minimum(c * z1, 1.0)
    cap = top**a2
    z2 = top * rng.uniform(size=n) ** (1.0 / a2)
    return _scale_alpha(z1, z2, cap, c01, c02, p1, p2, lam)


def oracle_for(model, p1, p2, lam, n=1_000_000, seed=0) -> OracleValue:
    token = model.token
    prm = model.params()
    if token == "normal":
        return normal_alpha(prm["sigma1"], prm["sigma2"], prm["rho"], p1, p2, lam, n, seed)
    if token == "exp_loc":
        return exponential_alpha(prm["sigma1"], prm["sigma2"], p1, p2, lam, n, seed)
    if token == "gamma_scale":
        return gamma_alpha(prm["a1"], prm["a2"], p1, p2, lam, n, seed)
    if token == "power_scale":
        return power_alpha(prm["a1"], prm["a2"], p1, p2, lam, n, seed)
    raise ValueError(token)
