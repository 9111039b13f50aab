"""Prime-pair ensembles, exact prime counting and the spectrum of a
semiclassical factorization simulator."""

from .analytic import ZetaZeros, default_zeros, li, load_zeros, riemann_r
from .ensemble import Ensemble, build_ensemble, cardinality_estimate, membership
from .primes import PiOracle, lucy_pi, nth_prime, pi_exact, sieve
from .semiclassical import FitModel, PredictionSeries, fit_u_of_kappa, kappa_empirical, predict_pi
from .spectrum import SpectralContext, build_context, energy, invert_energy, quantum_condition, scan_eigenvalues

__version__ = "0.1.0"

__all__ = [
    "Ensemble", "FitModel", "PiOracle", "PredictionSeries", "SpectralContext", "ZetaZeros",
    "build_context", "build_ensemble", "cardinality_estimate", "default_zeros", "energy",
    "fit_u_of_kappa", "invert_energy", "kappa_empirical", "li", "load_zeros", "lucy_pi",
    "membership", "nth_prime", "pi_exact", "predict_pi", "quantum_condition", "riemann_r",
    "scan_eigenvalues", "sieve",
]
