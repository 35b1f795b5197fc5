"""Exact concentration probabilities of i.i.d. sums over Z_p and Z.

Includes closed-form anticoncentration bounds, brute-force oracles and an
exactly verified certification chain for the constants C1, C2, C3 and nu.
"""

__version__ = "0.1.0"

from .dist import (  # noqa: E402
    ConcentrationResult,
    IntegerDistribution,
    ModularDistribution,
    concentration_at,
    convolve,
    dft,
    dilate,
    inverse_dft,
    is_symmetric,
    max_concentration,
    point_mass,
    self_convolve,
    translate,
    uniform_on,
)
from .bounds import (  # noqa: E402
    BoundReport,
    berry_esseen_interval_bound,
    best_bound,
    freiman_transfer_applicable,
    iterated_bound,
    lev_bound,
    lev_coefficient,
    nu_exponent,
    peak_location,
    sigma_rho,
    triple_bound,
)
from .constants import (  # noqa: E402
    CertifiedConstant,
    certify_all,
    certify_c1,
    certify_c2,
    certify_c3,
    certify_nu,
    verify_certificate,
)
from .oracle import (  # noqa: E402
    ScanRecord,
    count_solutions,
    general3_stress,
    leader_radcliffe_scan,
    peak_triple_count,
    random_bounded_distribution,
)

__all__ = [
    "__version__",
    "ConcentrationResult",
    "IntegerDistribution",
    "ModularDistribution",
    "concentration_at",
    "convolve",
    "dft",
    "dilate",
    "inverse_dft",
    "is_symmetric",
    "max_concentration",
    "point_mass",
    "self_convolve",
    "translate",
    "uniform_on",
    "BoundReport",
    "berry_esseen_interval_bound",
    "best_bound",
    "freiman_transfer_applicable",
    "iterated_bound",
    "lev_bound",
    "lev_coefficient",
    "nu_exponent",
    "peak_location",
    "sigma_rho",
    "triple_bound",
    "CertifiedConstant",
    "certify_all",
    "certify_c1",
    "certify_c2",
    "certify_c3",
    "certify_nu",
    "verify_certificate",
    "ScanRecord",
    "count_solutions",
    "general3_stress",
    "leader_radcliffe_scan",
    "peak_triple_count",
    "random_bounded_distribution",
]
