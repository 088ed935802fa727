"""Mixed (isotonic-regression) estimators of two ordered location or scale parameters.

The package covers the estimators themselves, their Monte Carlo risks under
common random numbers, the risk-minimizing mixing coefficients obtained by
adaptive quadrature, and a small command-line tool.
"""

from .admissibility import (
    AdmissibleInterval,
    AlphaCurvePoint,
    alpha_curve,
    alpha_infinity_probe,
    alpha_location,
    alpha_scale,
    alpha_star_location,
    lemma51_condition_check,
    s_lambda_density,
)
from .estimators import (
    Estimate,
    EstimatorSpec,
    WeightPair,
    blee,
    bsee,
    hp_estimator,
    mix_general,
    mixed_location,
    mixed_scale,
    pdt_estimator,
    restricted_mle,
)
from .loss_risk import LossSpec, RiskEstimate, dominance_pointwise, loss, monte_carlo_risk, risk_sweep
from .models import (
    BivariateNormal,
    ExponentialLocation,
    GammaScale,
    Observation,
    ParamPoint,
    PowerScale,
    make_model,
)

__version__ = "0.1.0"
