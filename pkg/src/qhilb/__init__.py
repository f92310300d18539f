"""Exact quantum cohomology of the Hilbert square of a quadric surface.

The package computes, entirely in exact rational arithmetic:

  * the classical cohomology ring on its fixed 14-class basis,
  * genus-zero Gromov-Witten invariants via seed values and the
    associativity (WDVV) recursion, with honest Unknown states for the
    values the seeds cannot reach,
  * the small quantum product and the seventeen-relation presentation,
  * hyperelliptic curve counts on the quadric via an exact binomial
    inversion of the point-incidence invariants.
"""

from .chow import CohVector, cup, divisor_degree, integrate, involution, normal_form, pairing
from .coeffring import QSeries, Rational
from .gw_engine import Engine, Unknown
from .hyperelliptic import HyperellipticQuery, beta_of, count_table, seed_vanishing
from .quantum import GammaSeries, QCohVector, SmallQuantum, gamma, load_relations, small_product, verify_all

__all__ = [
    "CohVector", "cup", "divisor_degree", "integrate", "involution",
    "normal_form", "pairing", "QSeries", "Rational", "Engine", "Unknown",
    "HyperellipticQuery", "beta_of", "count_table", "seed_vanishing",
    "GammaSeries", "QCohVector", "SmallQuantum", "gamma", "load_relations",
    "small_product", "verify_all",
]

__version__ = "0.1.0"
