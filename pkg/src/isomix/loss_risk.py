"""Loss functions, pointwise dominance checks and the Monte Carlo risk engine.

Risk estimates use common random numbers: replication ``i`` always draws its
observation from substream ``(seed, i)``, so every estimator evaluated with
the same ``(model, params, n, seed)`` sees exactly the same data.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .estimators import Estimate, EstimatorSpec, WeightPair, mix_general
from .models import LOCATION, SCALE, ParamPoint, sample_batch
from .rng import StreamBatch

DEFAULT_REPLICATIONS = 50_000
CHUNK = 1 << 16
RISK_CSV_HEADER = ("family", "lambda", "estimator", "risk", "std_error", "n", "seed")


def squared(t):
    return np.square(t)


def check_d1(W: Callable, minimizer: float, grid: np.ndarray) -> None:
    """Numerical falsifier for a convex loss kernel with its minimum at ``minimizer``.

    Raises :class:`PreconditionError` if ``W`` is negative, nonzero at the
    minimizer, not strictly monotone on either side of it, or not convex on
    ``grid``.
    """
    w = np.asarray(W(grid), dtype=float)
    w0 = float(np.asarray(W(np.array([minimizer])), dtype=float)[0])
    if not np.all(np.isfinite(w)):
        raise PreconditionError("loss kernel is not finite on the test grid")
    if abs(w0) > 1e-12:
        raise PreconditionError(f"loss kernel must vanish at {minimizer}, got {w0}")
    if np.any(w < 0):
        raise PreconditionError("loss kernel takes negative values")
    left = w[grid < minimizer]
    right = w[grid > minimizer]
    if np.any(np.diff(left) >= 0) or np.any(np.diff(right) <= 0):
        raise PreconditionError("loss kernel is not strictly monotone on each side of its minimizer")
    second = w[2:] - 2.0 * w[1:-1] + w[:-2]
    if np.any(second < -1e-12 * np.maximum(1.0, np.abs(w[1:-1]))):
        raise PreconditionError("loss kernel is not convex on the test grid")


@dataclass(frozen=True)
class LossSpec:
    """Weighted loss ``p1 W(.) + p2 W(.)``.

    Location kind evaluates ``W(d - theta)`` with ``W`` minimized at 0.  Scale
    kind with a custom ``W`` evaluates ``W(d / theta)`` with ``W`` minimized at
    1; with the default kernel it is the plain weighted squared error
    ``p1 (d1 - theta1)^2 + p2 (d2 - theta2)^2``.
    """

    kind: str = LOCATION
    weights: WeightPair = WeightPair()
    W: Callable | None = None

    def __post_init__(self):
        if self.kind not in (LOCATION, SCALE):
            raise PreconditionError(f"unknown loss kind {self.kind!r}")
        if self.W is not None:
            if self.kind == LOCATION:
                check_d1(self.W, 0.0, np.linspace(-10.0, 10.0, 1001))
            else:
                check_d1(self.W, 1.0, np.linspace(1e-3, 10.0, 1001))

    @property
    def minimizer(self) -> float:
        return 0.0 if self.kind == LOCATION else 1.0

    def __call__(self, params: ParamPoint, est: Estimate):
        return loss(self, params, est)


def weighted_loss(kind: str, W, p1, p2, t1, t2, d1, d2):
    """Vectorized core of :func:`loss`; every numeric argument may be an array."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if W is None:
        return p1 * np.square(d1 - t1) + p2 * np.square(d2 - t2)
    if kind == LOCATION:
        return p1 * np.asarray(W(d1 - t1)) + p2 * np.asarray(W(d2 - t2))
    return p1 * np.asarray(W(d1 / t1)) + p2 * np.asarray(W(d2 / t2))


def loss(spec: LossSpec, params: ParamPoint, est: Estimate):
    """Loss of estimate ``est`` at ``params``; vectorized over array estimates."""
    t1, t2 = params.theta1, params.theta2
    if spec.kind == SCALE and (t1 <= 0 or t2 <= 0):
        raise DomainError("scale loss needs positive parameters")
    out = weighted_loss(spec.kind, spec.W, spec.weights.p1, spec.weights.p2, t1, t2, est[0], est[1])
    return float(out) if np.ndim(out) == 0 else out


def dominance_pointwise(spec: LossSpec, params: ParamPoint, base: Estimate, alpha: float):
    """Losses of a crossed estimate and of its mixed version.

    Returns ``(loss_base, loss_mixed, loss_mixed < loss_base)``.
    """
    d1, d2 = float(base[0]), float(base[1])
    if not d1 > d2:
        raise PreconditionError("dominance check needs a crossed estimate d1 > d2")
    if spec.kind == SCALE and not d2 > 0:
        raise PreconditionError("scale dominance check needs d1 > d2 > 0")
    mixed = mix_general(Estimate(d1, d2), spec.weights, alpha)
    lb = loss(spec, params, Estimate(d1, d2))
    lm = loss(spec, params, mixed)
    return lb, lm, lm < lb


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    std_error: float
    replications: int
    seed: int
    estimator_tag: str
    lam: float


def _as_specs(estimators) -> list[EstimatorSpec]:
    out = []
    for e in estimators:
        out.append(e if isinstance(e, EstimatorSpec) else EstimatorSpec.parse(str(e)))
    return out


def _chunk_losses(model, params, specs, spec_loss, seed, start, stop):
    batch = StreamBatch.range(seed, start, stop)
    x1, x2 = sample_batch(model, params, batch)
    return [np.asarray(loss(spec_loss, params, s(model, spec_loss.weights, (x1, x2)))) for s in specs]


def loss_samples(model, params: ParamPoint, estimators, spec_loss: LossSpec, n: int, seed: int,
                 threads: int = 1) -> list[np.ndarray]:
    """Per-replication losses, one array per estimator, all on the same draws."""
    specs = _as_specs(estimators)
    if n < 2:
        raise PreconditionError("need at least two replications")
    if params.space != model.kind:
        raise PreconditionError(f"{model.token} needs a {model.kind} parameter point")
    for s in specs:
        s.check_applicable(model)
    bounds = [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _chunk_losses(model, params, specs, spec_loss, seed, *b), bounds))
    else:
        parts = [_chunk_losses(model, params, specs, spec_loss, seed, *b) for b in bounds]
    return [np.concatenate([p[k] for p in parts]) for k in range(len(specs))]


def monte_carlo_risks(model, params: ParamPoint, estimators, spec_loss: LossSpec,
                      n: int = DEFAULT_REPLICATIONS, seed: int = 0, threads: int = 1) -> list[RiskEstimate]:
    """Risk of several estimators on one shared set of ``n`` draws."""
    specs = _as_specs(estimators)
    samples = loss_samples(model, params, specs, spec_loss, n, seed, threads)
    out = []
    for s, values in zip(specs, samples):
        out.append(RiskEstimate(
            mean=float(np.mean(values)),
            std_error=float(np.std(values, ddof=1) / math.sqrt(n)),
            replications=n,
            seed=seed,
            estimator_tag=s.token,
            lam=params.lam,
        ))
    return out


def monte_carlo_risk(model, params: ParamPoint, estimator, spec_loss: LossSpec,
                     n: int = DEFAULT_REPLICATIONS, seed: int = 0, threads: int = 1) -> RiskEstimate:
    return monte_carlo_risks(model, params, [estimator], spec_loss, n, seed, threads)[0]


def risk_sweep(model, spec_loss: LossSpec, estimators, lam_grid: Iterable[float],
               n: int = DEFAULT_REPLICATIONS, seed: int = 0, threads: int = 1) -> list[RiskEstimate]:
    """Risks along ``theta = (0, lam)`` (location) or ``(1, lam)`` (scale).

    The same seed is used at every grid point, so curves are smooth in
    ``lam`` as well as paired across estimators.
    """
    specs = _as_specs(estimators)
    for s in specs:
        s.check_applicable(model)
    lams = [float(v) for v in lam_grid]
    floor = 0.0 if model.kind == LOCATION else 1.0
    bad = [v for v in lams if not v >= floor]
    if bad:
        raise PreconditionError(f"lambda grid values below {floor}: {bad}")
    rows: list[RiskEstimate] = []
    for lam in lams:
        params = ParamPoint.from_lambda(lam, model.kind)
        rows.extend(monte_carlo_risks(model, params, specs, spec_loss, n, seed, threads))
    return rows


def format_float(x: float) -> str:
    return repr(float(x))


def risk_csv(family: str, rows: Sequence[RiskEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RISK_CSV_HEADER)
    for r in rows:
        w.writerow([family, format_float(r.lam), r.estimator_tag, format_float(r.mean),
                    format_float(r.std_error), r.replications, r.seed])
    return buf.getvalue()
