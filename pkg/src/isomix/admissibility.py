"""Risk-minimizing mixing coefficients, their large-lambda limit and S_lambda.

For a location family with ``theta = (0, lam)`` the risk of the mixed
estimator is a quadratic in ``alpha`` minimized at

    alpha(lam) = alpha0 + p2 / (p1 + p2) * alpha_star(lam),
    alpha_star(lam) = lam * int_{z<0} z f_Z(z + s) dz / int_{z<0} z^2 f_Z(z + s) dz,

with ``s = c02 - c01 - lam``.  For a scale family with ``theta = (1, lam)``

    alpha(lam) = alpha0 - p2 / (p1 + p2) * alpha_1(lam),
    alpha_1(lam) = (lam - 1) int_0^1 h1(ct) (1-t) f_Z(ct) dt
                   / (c01 int_0^1 h2(ct) (1-t)^2 f_Z(ct) dt),

with ``c = c01 / (c02 lam)`` and ``h1, h2`` the conditional moments of Z1
given Z.  All integrands are evaluated as ``exp(log f_Z - ref)`` for a
reference level ``ref`` near the integrand's peak, which keeps both
integrals representable when ``lam`` is large.  The common factor cancels
in every ratio.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateModelError, PreconditionError, UnsupportedOperation
from .estimators import WeightPair
from .models import LOCATION, SCALE
from .quadrature import integrate

EPSREL = 1e-10
DEFAULT_SCHEDULE = (10.0, 100.0, 1000.0, 10000.0)
DIVERGENCE_THRESHOLD = -1e3
TINY = 1e-300
LR_SLACK = 1e-12
ALPHA_CSV_HEADER = ("family", "lambda", "alpha_star", "alpha", "quad_error")


class AlphaCurvePoint(NamedTuple):
    lam: float
    alpha_star: float
    alpha: float
    quad_error: float


@dataclass(frozen=True)
class AdmissibleInterval:
    """Admissible mixing range ``[lower, upper]`` within the mixed class.

    In the usual (decreasing-curve) case ``upper = alpha0`` and ``lower`` is
    the limit of the curve, ``-inf`` when ``diverges``.  When the curve
    increases the roles swap: ``lower = alpha0`` and ``upper`` is the limit.
    ``certified`` is False when the probe could not settle the limit; the
    reason is in ``note``.
    """

    lower: float
    upper: float
    diverges: bool
    direction: str = "decreasing"
    certified: bool = True
    note: str = ""
    probe: tuple = field(default=(), compare=False)

    def __str__(self) -> str:
        lo = "(-inf" if math.isinf(self.lower) and self.lower < 0 else f"[{self.lower!r}"
        hi = "+inf)" if math.isinf(self.upper) and self.upper > 0 else f"{self.upper!r}]"
        return f"{lo}, {hi}"


def _ratio_error(num, den) -> float:
    """Absolute error bound of ``num.value / den.value`` from the two quadrature errors."""
    v = num.value / den.value
    rel = abs(num.error / num.value) if num.value != 0 else 0.0
    rel += abs(den.error / den.value)
    return abs(v) * rel + (abs(num.error / den.value) if num.value == 0 else 0.0)


# location family ---------------------------------------------------------


def _require_kind(model, kind: str, op: str) -> None:
    if model.kind != kind:
        raise UnsupportedOperation(f"{op} is defined for {kind} families, not {model.token}")


def _location_setup(model, lam: float):
    c1, c2 = model.equivariant_constants()
    s = c2 - c1 - lam
    peak = min(0.0, model.fz_mode() - s)
    ref = float(model.log_density_fz(np.array([peak + s]))[0])
    lower = peak - model.fz_tail_width()
    kinks = [k - s for k in model.fz_kinks() if lower < k - s < 0.0]
    return s, ref, lower, kinks


def _location_weight(model, s: float, ref: float) -> Callable:
    def w(z):
        return np.exp(model.log_density_fz(z + s) - ref)
    return w


def _location_integrals(model, lam: float):
    s, ref, lower, kinks = _location_setup(model, lam)
    w = _location_weight(model, s, ref)
    num = integrate(lambda z: z * w(z), lower, 0.0, breakpoints=kinks, epsabs=0.0, epsrel=EPSREL)
    den = integrate(lambda z: z * z * w(z), lower, 0.0, breakpoints=kinks, epsabs=0.0, epsrel=EPSREL)
    if not den.value > TINY:
        raise DegenerateModelError(f"second-moment integral vanished at lambda={lam}")
    return num, den


def alpha_star_location(model, weights: WeightPair, lam: float) -> tuple[float, float]:
    """``(alpha_star(lam), error bound)`` for a location family."""
    _require_kind(model, LOCATION, "alpha_star_location")
    lam = float(lam)
    if not lam >= 0:
        raise PreconditionError(f"lambda must be >= 0 for location families, got {lam}")
    if lam == 0:
        return 0.0, 0.0
    num, den = _location_integrals(model, lam)
    return lam * num.value / den.value, lam * _ratio_error(num, den)


def alpha_location(model, weights: WeightPair, lam: float) -> AlphaCurvePoint:
    star, err = alpha_star_location(model, weights, lam)
    share = weights.p2 / (weights.p1 + weights.p2)
    return AlphaCurvePoint(float(lam), star, weights.alpha0 + share * star, share * err)


# scale family ------------------------------------------------------------


def _scale_setup(model, lam: float):
    c1, c2 = model.equivariant_constants()
    c = c1 / (c2 * lam)
    kinks = [k / c for k in model.fz_kinks() if 0.0 < k / c < 1.0]
    probe = np.concatenate([np.geomspace(1e-12, 1e-3, 40), np.linspace(1e-3, 1.0 - 1e-9, 200)])
    logs = model.log_density_fz(c * probe)
    logs = logs[np.isfinite(logs)]
    ref = float(np.max(logs)) if logs.size else 0.0
    return c1, c, ref, kinks


def _scale_integrals(model, lam: float):
    c1, c, ref, kinks = _scale_setup(model, lam)

    def parts(t):
        z = c * t
        h1, h2 = model.conditional_moments(z)
        return h1, h2, np.exp(model.log_density_fz(z) - ref)

    def f_num(t):
        h1, _, w = parts(t)
        return h1 * (1.0 - t) * w

    def f_den(t):
        _, h2, w = parts(t)
        return h2 * (1.0 - t) ** 2 * w

    num = integrate(f_num, 0.0, 1.0, breakpoints=kinks, epsabs=0.0, epsrel=EPSREL)
    den = integrate(f_den, 0.0, 1.0, breakpoints=kinks, epsabs=0.0, epsrel=EPSREL)
    if not den.value > TINY:
        raise DegenerateModelError(f"second-moment integral vanished at lambda={lam}")
    return c1, num, den


def alpha_scale(model, weights: WeightPair, lam: float) -> AlphaCurvePoint:
    """Risk-minimizing coefficient for a scale family at ``theta = (1, lam)``."""
    _require_kind(model, SCALE, "alpha_scale")
    lam = float(lam)
    if not lam >= 1:
        raise PreconditionError(f"lambda must be >= 1 for scale families, got {lam}")
    if lam == 1:
        return AlphaCurvePoint(1.0, 0.0, weights.alpha0, 0.0)
    c1, num, den = _scale_integrals(model, lam)
    a1 = (lam - 1.0) * num.value / (c1 * den.value)
    err = (lam - 1.0) / c1 * _ratio_error(num, den)
    share = weights.p2 / (weights.p1 + weights.p2)
    return AlphaCurvePoint(lam, a1, weights.alpha0 - share * a1, share * err)


def alpha_point(model, weights: WeightPair, lam: float) -> AlphaCurvePoint:
    if model.kind == LOCATION:
        return alpha_location(model, weights, lam)
    return alpha_scale(model, weights, lam)


def alpha_curve(model, weights: WeightPair, lam_grid: Sequence[float], threads: int = 1) -> list[AlphaCurvePoint]:
    lams = [float(v) for v in lam_grid]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda v: alpha_point(model, weights, v), lams))
    return [alpha_point(model, weights, v) for v in lams]


def curve_is_nonincreasing(points: Sequence[AlphaCurvePoint]) -> bool:
    """True if each alpha is at most the previous one plus both error bounds."""
    for prev, cur in zip(points[:-1], points[1:]):
        if cur.alpha > prev.alpha + prev.quad_error + cur.quad_error:
            return False
    return True


def alpha_curve_csv(family: str, points: Sequence[AlphaCurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ALPHA_CSV_HEADER)
    for p in points:
        w.writerow([family, repr(float(p.lam)), repr(float(p.alpha_star)), repr(float(p.alpha)),
                    repr(float(p.quad_error))])
    return buf.getvalue()


# large-lambda probe ------------------------------------------------------


def _strictly(values: Sequence[float], decreasing: bool) -> bool:
    pairs = zip(values[:-1], values[1:])
    return all((b < a) if decreasing else (b > a) for a, b in pairs)


def classify_alpha_sequence(values: Sequence[float], alpha0: float, failed: bool = False,
                            threshold: float = DIVERGENCE_THRESHOLD) -> AdmissibleInterval:
    """Turn alpha values at an increasing lambda schedule into an interval.

    ``failed`` means the evaluation after the last value broke down (for
    example an underflowed integral); it counts as divergence only when the
    values already seen show a strict trend.
    """
    vals = [float(v) for v in values]
    probe = tuple(vals)
    heuristic = "heuristic finite probe; the limit is not computed symbolically"
    if failed:
        if len(vals) >= 2 and _strictly(vals, decreasing=True):
            return AdmissibleInterval(-math.inf, alpha0, True, "decreasing", True,
                                      heuristic + "; evaluation broke down after a strictly decreasing run", probe)
        if len(vals) >= 2 and _strictly(vals, decreasing=False):
            return AdmissibleInterval(alpha0, math.inf, True, "increasing", True,
                                      heuristic + "; evaluation broke down after a strictly increasing run", probe)
        last = vals[-1] if vals else math.nan
        return AdmissibleInterval(last, alpha0, False, "decreasing", False,
                                  "inconclusive: evaluation failed before a trend was established", probe)
    if not vals:
        raise PreconditionError("empty alpha sequence")
    if _strictly(vals, decreasing=True) and vals[-1] < threshold:
        return AdmissibleInterval(-math.inf, alpha0, True, "decreasing", True, heuristic, probe)
    if _strictly(vals, decreasing=False) and vals[-1] > -threshold:
        return AdmissibleInterval(alpha0, math.inf, True, "increasing", True, heuristic, probe)
    note = "limit not certified; reporting the value at the last schedule point"
    if len(vals) >= 2 and vals[-1] > vals[0]:
        return AdmissibleInterval(alpha0, vals[-1], False, "increasing", False, note, probe)
    return AdmissibleInterval(vals[-1], alpha0, False, "decreasing", False, note, probe)


def alpha_infinity_probe(model, weights: WeightPair,
                         schedule: Sequence[float] = DEFAULT_SCHEDULE) -> AdmissibleInterval:
    """Probe the large-lambda limit of the alpha curve and report the admissible interval."""
    sched = [float(v) for v in schedule]
    if not sched or any(b <= a for a, b in zip(sched[:-1], sched[1:])):
        raise PreconditionError("schedule must be non-empty and strictly increasing")
    vals: list[float] = []
    failed = False
    for lam in sched:
        try:
            pt = alpha_point(model, weights, lam)
        except (DegenerateModelError, FloatingPointError, ZeroDivisionError):
            failed = True
            break
        if not math.isfinite(pt.alpha):
            failed = True
            break
        vals.append(pt.alpha)
    out = classify_alpha_sequence(vals, weights.alpha0, failed)
    if not out.certified:
        warnings.warn(f"{model.token}: {out.note}", RuntimeWarning, stacklevel=2)
    return out


# S_lambda ----------------------------------------------------------------


class SLambdaDensity:
    """Normalized density of S_lambda.

    Location support is ``z < 0`` with density proportional to
    ``z^2 f_Z(z + s)``; scale support is ``(0, 1)`` with density
    proportional to ``(1-t)^2 h2(ct) f_Z(ct)``.
    """

    def __init__(self, model, lam: float):
        self.model = model
        self.lam = float(lam)
        if model.kind == LOCATION:
            if not self.lam >= 0:
                raise PreconditionError("lambda must be >= 0 for location families")
            s, ref, lower, kinks = _location_setup(model, self.lam)
            self._shift = s
            self.support = (lower, 0.0)
            self._kinks = kinks
        else:
            if not self.lam >= 1:
                raise PreconditionError("lambda must be >= 1 for scale families")
            _, c, ref, kinks = _scale_setup(model, self.lam)
            self._c = c
            self.support = (0.0, 1.0)
            self._kinks = kinks
        self._ref = ref
        norm = integrate(self._unnormalized, *self.support, breakpoints=self._kinks, epsabs=0.0, epsrel=EPSREL)
        if not norm.value > TINY:
            raise DegenerateModelError(f"S_lambda is not normalizable at lambda={self.lam}")
        self.norm = norm.value
        self._log_norm = math.log(norm.value)

    def _log_unnormalized(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi) if self.model.kind == SCALE else (x < hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.model.kind == LOCATION:
                out = 2.0 * np.log(np.abs(x)) + self.model.log_density_fz(x + self._shift) - self._ref
            else:
                xs = np.where(inside, x, 0.5)
                z = self._c * xs
                _, h2 = self.model.conditional_moments(z)
                out = 2.0 * np.log1p(-xs) + np.log(h2) + self.model.log_density_fz(z) - self._ref
        return np.where(inside, out, -np.inf)

    def _unnormalized(self, x):
        return np.exp(self._log_unnormalized(x))

    def logpdf(self, x):
        out = self._log_unnormalized(x) - self._log_norm
        return float(out) if np.ndim(out) == 0 else out

    def pdf(self, x):
        out = np.exp(self._log_unnormalized(x) - self._log_norm)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = pdf

    def cdf(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.support
        out = np.empty(xs.shape)
        for i, v in enumerate(xs):
            if v <= lo:
                out[i] = 0.0
            elif v >= hi:
                out[i] = 1.0
            else:
                r = integrate(self._unnormalized, lo, v, breakpoints=[k for k in self._kinks if k < v],
                              epsabs=1e-14 * self.norm, epsrel=EPSREL)
                out[i] = min(1.0, r.value / self.norm)
        return float(out[0]) if np.ndim(x) == 0 else out


def s_lambda_density(model, weights: WeightPair, lam: float) -> SLambdaDensity:
    return SLambdaDensity(model, lam)


def lr_order_check(lower: SLambdaDensity, upper: SLambdaDensity, grid, slack: float = LR_SLACK) -> bool:
    """Grid falsifier for ``lower <=_lr upper``.

    Requires ``g_upper(z') g_lower(z) >= g_upper(z) g_lower(z')`` for every
    pair ``z < z'`` of grid points, i.e. a non-decreasing likelihood ratio.
    """
    z = np.sort(np.asarray(grid, dtype=float))
    lo = np.asarray(lower.pdf(z))
    up = np.asarray(upper.pdf(z))
    lhs = up[None, :] * lo[:, None]      # g_up(z_j) g_lo(z_i)
    rhs = up[:, None] * lo[None, :]      # g_up(z_i) g_lo(z_j)
    pairs = np.triu(np.ones((z.size, z.size), dtype=bool), 1)
    bad = (lhs < rhs - slack * np.maximum(lhs, rhs)) & pairs
    return not bool(np.any(bad))


def st_order_check(lower: SLambdaDensity, upper: SLambdaDensity, grid, tol: float = 1e-8) -> bool:
    """Grid check of ``lower <=_st upper``: ``F_lower >= F_upper`` pointwise."""
    z = np.asarray(grid, dtype=float)
    return bool(np.all(np.asarray(lower.cdf(z)) >= np.asarray(upper.cdf(z)) - tol))


def default_s_grid(model, lams: Sequence[float], size: int = 200) -> np.ndarray:
    """Grid covering the bulk of S_lambda for every ``lam`` in ``lams``."""
    if model.kind == SCALE:
        return np.linspace(0.0, 1.0, size + 2)[1:-1]
    lowest = min(SLambdaDensity(model, lam).support[0] for lam in lams)
    return np.linspace(lowest, 0.0, size + 1)[:-1]


# monotone-ratio conditions -----------------------------------------------


def ratio_monotone_check(values, slack: float = LR_SLACK) -> str | None:
    """Direction of a sequence up to relative slack: 'increasing', 'decreasing', 'constant' or None."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    tol = slack * np.maximum(1.0, np.maximum(np.abs(v[:-1]), np.abs(v[1:])))
    up = bool(np.all(d >= -tol))
    down = bool(np.all(d <= tol))
    if up and down:
        return "constant"
    if up:
        return "increasing"
    if down:
        return "decreasing"
    return None


def lemma51_condition_check(model, theta_grid=None, z_grid=None, lam_grid=None) -> bool:
    """Grid falsifier for the monotone-ratio conditions behind a monotone scale alpha curve.

    ``model`` only needs ``log_density_fz``, ``conditional_moments`` and
    ``equivariant_constants``.  Checks that, for every ``theta`` in
    ``theta_grid`` (inside (0, 1)), ``h2(theta z) f_Z(theta z) / (h2(z) f_Z(z))``
    is monotone in ``z`` with one common direction, and that
    ``k(t, lam) = (lam - 1) h1(ct) / ((1 - t) h2(ct))`` is non-decreasing in
    ``t`` and in ``lam``.
    """
    c1, c2 = model.equivariant_constants()
    theta = np.linspace(0.05, 0.95, 19) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    z = np.geomspace(1e-3, c1 / c2, 200) if z_grid is None else np.asarray(z_grid, dtype=float)
    lams = np.linspace(1.0, 10.0, 37) if lam_grid is None else np.asarray(lam_grid, dtype=float)
    if np.any((theta <= 0) | (theta >= 1)):
        raise PreconditionError("theta grid must lie in (0, 1)")

    def log_g(x):
        _, h2 = model.conditional_moments(x)
        return np.log(h2) + model.log_density_fz(x)

    base = log_g(z)
    directions = set()
    for th in theta:
        d = ratio_monotone_check(log_g(th * z) - base)
        if d is None:
            return False
        if d != "constant":
            directions.add(d)
    if len(directions) > 1:
        return False

    t = np.linspace(0.0, 1.0, 202)[1:-1]
    k = np.empty((lams.size, t.size))
    for i, lam in enumerate(lams):
        c = c1 / (c2 * lam)
        h1, h2 = model.conditional_moments(c * t)
        k[i] = (lam - 1.0) * h1 / ((1.0 - t) * h2)
    for row in k:
        if ratio_monotone_check(row) not in ("increasing", "constant"):
            return False
    for col in k.T:
        if ratio_monotone_check(col) not in ("increasing", "constant"):
            return False
    return True
