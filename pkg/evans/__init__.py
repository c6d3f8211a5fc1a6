from .compound import PAIRS, companion_lift, compound_lift, pairing, wedge
from .evans_function import (
    EvansEvaluation,
    EvansSystem,
    SLEvansFunction,
    Splitting,
    asymptotic_coefficients,
    asymptotic_matrix,
    asymptotic_splitting,
    evans_eval,
    evans_eval_SL,
    symmetric_wedge,
    vandermonde,
)
