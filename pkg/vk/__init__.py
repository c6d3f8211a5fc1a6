from .functionals import (
    InnerProductCheck,
    RescaleCheck,
    VKAnalyzer,
    VKScan,
    WitnessValue,
    calF,
    functional_E,
    functional_E_grid,
    functional_F1,
    functional_F1_grid,
    functional_F2,
    inner_product_prefactor,
    positivity_witness,
    rescale_identity_check,
    variation_density,
    variation_positivity,
    vk_inner_product_direct,
    vk_scan,
    witness_bound_holds,
)
