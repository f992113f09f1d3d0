"""Structure constants and Z2-graded extensions of generalized Haagerup categories."""

__version__ = "0.1.0"

from .abelian import Character, FiniteAbelianGroup, RootOfUnity, parse_group
from .category import CategoryData, EpsilonTable, EtaTable, load_category, save_category, verify_axioms
from .asolve import SolveConfig, load_A, save_A, solve_A
from .extdata import (
    ExtensionData,
    ExtensionParams,
    check_extension_data,
    check_reduced_system,
    search_extension_data,
)
from .equiv import EquivalenceMove, act, classify, compute_tau, coreq_count

__all__ = [
    "__version__",
    "Character",
    "FiniteAbelianGroup",
    "RootOfUnity",
    "parse_group",
    "CategoryData",
    "EpsilonTable",
    "EtaTable",
    "load_category",
    "save_category",
    "verify_axioms",
    "SolveConfig",
    "load_A",
    "save_A",
    "solve_A",
    "ExtensionData",
    "ExtensionParams",
    "check_extension_data",
    "check_reduced_system",
    "search_extension_data",
    "EquivalenceMove",
    "act",
    "classify",
    "compute_tau",
    "coreq_count",
]
