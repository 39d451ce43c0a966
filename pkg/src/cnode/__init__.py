"""Capacity, normalized optimal detection error (NODE) and MMSE of vector and
continuous-time Gaussian channels."""

from .exceptions import (ConvergenceError, InfeasibleSnrError, InvalidInputError,
                         NoSignalPathError, NumericError, TruncationError)
from .ltv import (ContinuousReport, averaged_limits, capacity_integral, continuous_report,
                  count_integral, cup_function, gaussian_closed_form, lemma1_derivative_check,
                  mmse_integral, node_integral, solve_water_level)
from .montecarlo import SimConfig, SimReport, error_whiteness_test, simulate_matched_filter
from .quadrature import QuadratureConfig
from .spectral import (ChannelSpec, MmseReport, SpectralChannel, WaterfillSolution,
                       capacity_derivative_check, capacity_from_snr,
                       gaussian_mutual_information, mmse, node, spectrum, waterfill)
from .symbols import GaussianSymbol, TabulatedSymbol, WeylSymbolModel
from .tables import SweepTable
from .weyl import (DiscretizedOperator, EigenSpectrum, build_kernel, eigen_count,
                   eigen_spectrum, szego_convergence_study)

__version__ = "0.1.0"
