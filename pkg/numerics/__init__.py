from .errors import (
    BracketError,
    ContourError,
    DomainError,
    EssentialSpectrumError,
    IntegrationError,
    NovikovError,
    NumericalError,
    ParameterError,
    QuadratureError,
    ShootingError,
)
from .kernels import (
    DEFAULT_TOLERANCES,
    Tolerances,
    Trajectory,
    biquadratic_roots,
    find_root,
    integrate_ode,
    quad_singular,
)
