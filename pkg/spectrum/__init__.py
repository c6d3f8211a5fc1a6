from .contours import Contour, ContourSettings, default_contours, dip_ratios, winding_number
from .verification import (
    BScan,
    SpectralReport,
    SpectralVerifier,
    bound_energy,
    bound_sigma1,
    lambda_minus_winding_check,
    locate_lambda_minus,
    scan_B_contour,
    scan_start,
    verify_H1,
)
