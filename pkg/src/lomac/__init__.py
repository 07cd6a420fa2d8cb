"""Low-rank nodal DG solvers with local macroscopic conservation for Vlasov-Poisson."""
from .config import ConfigError, SolverConfig, parse_config
from .lowrank import LowRankFunction, WeightPair, to_dense, truncate_weighted
from .stepper import DiagnosticsRecord, KineticState, NumericalAbort, VlasovPoissonSolver, run

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "SolverConfig", "parse_config",
    "LowRankFunction", "WeightPair", "to_dense", "truncate_weighted",
    "DiagnosticsRecord", "KineticState", "NumericalAbort", "VlasovPoissonSolver", "run",
]
