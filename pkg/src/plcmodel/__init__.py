"""The PLC model of language change and its planar reduction, the PC system.

Modules: ``core`` (parameters, regimes, vector field), ``critical``
(critical points, nullclines, sectors, outcomes), ``integrate``
(trajectories, fates, separatrix), ``fit`` (least-squares fits of the PLC
model and logistic baselines) and ``cli``.
"""

from .core import (
    DomainError,
    ModelParams,
    ParameterError,
    RawParams,
    Regime,
    State,
    classify_regime,
    make_state,
    normalize,
    vector_field,
)
from .critical import critical_points, jacobian, nullclines, outcome_taxonomy, sector_of
from .fit import Dataset, ModelFamily, fit, load_csv, long_term_outcome, model_eval, predict_holdout
from .integrate import IntegrationError, fate, integrate, settle, trace_separatrix

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DomainError",
    "IntegrationError",
    "ModelFamily",
    "ModelParams",
    "ParameterError",
    "RawParams",
    "Regime",
    "State",
    "classify_regime",
    "critical_points",
    "fate",
    "fit",
    "integrate",
    "jacobian",
    "load_csv",
    "long_term_outcome",
    "make_state",
    "model_eval",
    "normalize",
    "nullclines",
    "outcome_taxonomy",
    "predict_holdout",
    "sector_of",
    "settle",
    "trace_separatrix",
    "vector_field",
]
