from .base import GeodesicBall, InvalidInput, Manifold, NumericalError, zeta
from .hyperbolic import Hyperboloid, minkowski_form, to_poincare_disk
from .spd import SPD, expm_sym, inv_sqrt_spd, logm_spd, sqrt_spd

__all__ = [
    "GeodesicBall",
    "Hyperboloid",
    "InvalidInput",
    "Manifold",
    "NumericalError",
    "SPD",
    "expm_sym",
    "inv_sqrt_spd",
    "logm_spd",
    "minkowski_form",
    "sqrt_spd",
    "to_poincare_disk",
    "zeta",
]
