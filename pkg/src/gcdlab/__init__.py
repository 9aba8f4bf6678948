"""GCD sums, generalized GCD matrices and dilated sawtooth sums."""

from .bounds import BoundParams, g_bound, th4_rhs
from .canonical import canonical_reduce
from .dilated import DilatedSystem, franel_landau, maximal_l2_sq, resonance_sum, sawtooth_l2_sq
from .gcdcore import IndexSet, IntegerSequence, gcd_sum, s_form
from .multiindex import MultiIndex, PrimeTable, compose, factorize
from .poisson import verify_identity
from .spectral import GcdMatrix, eig_extremes
from .weights import WeightSequence, eta, kappa, power_law

__version__ = "0.1.0"
