"""p-adic differential operators with congruence level on the formal unit disk."""

from .scalar import Context, Mag, PadicScalar, scalar_arith, valuation
from .tate import TateSeries
from .dop import DiffOp
from .weierstrass import DivisionResult, HenselResult, SimplicityWitness
from .weierstrass import divide, hensel_factor, simplicity_witness
from .ideals import DivisionBasis, Exponent, Staircase, UnitIdeal
from .ideals import division_basis, exponent, normal_form, oracle_staircase
from .charvar import CharCycle, CyclicQuotient, DirectSum, VerticalComponent
from .charvar import NOT_A_CONNECTION, char_cycle, connection_rank, is_holonomic, length_bound
from .tower import FiniteOp, ProductFamily, TowerReport
from .tower import level_norm_suite, nbar_profile, tower_report, units_check
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Context", "Mag", "PadicScalar", "scalar_arith", "valuation",
    "TateSeries",
    "DiffOp",
    "DivisionResult", "HenselResult", "SimplicityWitness",
    "divide", "hensel_factor", "simplicity_witness",
    "DivisionBasis", "Exponent", "Staircase", "UnitIdeal",
    "division_basis", "exponent", "normal_form", "oracle_staircase",
    "CharCycle", "CyclicQuotient", "DirectSum", "VerticalComponent",
    "NOT_A_CONNECTION", "char_cycle", "connection_rank", "is_holonomic", "length_bound",
    "FiniteOp", "ProductFamily", "TowerReport",
    "level_norm_suite", "nbar_profile", "tower_report", "units_check",
    "errors",
]
