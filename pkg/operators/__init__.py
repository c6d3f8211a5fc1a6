from .coefficients import (
    FIELD_COLUMNS,
    CoefficientField,
    GridResolutionWarning,
    apply_eigensystem_discrete,
    coefficient_fields,
    dispersion,
    eigensystem_scale,
    lagrange_multipliers,
    s_operator_bounds,
    sl_kernel_residual,
)
