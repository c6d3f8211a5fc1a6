from .wave_profile import (
    GridSpec,
    WaveParams,
    WaveProfile,
    admissible_a_max,
    crest_orbit,
    crest_value,
    derivatives_closed_form,
    dpotential,
    energy_gap,
    k_from_a,
    params_from_a,
    params_from_k,
    potential,
    shoot_profile,
    x_of_phi,
)
