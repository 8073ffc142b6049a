"""Continuous quantum error correction as Markovian corrective jumps.

Stabilizer codes over symplectic Pauli operators, a dense Lindblad engine,
reduced syndrome-block dynamics, closed-form solutions for the three-qubit
phase code and a quantum-trajectory Monte Carlo engine.
"""

from .analytic import (bloch_exact, decay_rates, fidelity_exact, fidelity_no_correction, p0_exact,
                       strong_correction)
from .blocks import SyndromeBlockState, bloch_rhs, block_parameters, integrate_blocks, lambda_matrix
from .codes import (StabilizerCode, load_code, recovery_map, recovery_operator, three_qubit_phase_code,
                    verify_code)
from .config import ScenarioConfig, load_config
from .engines import compare_results, run_engines, run_scenario
from .errors import (CQECError, CodeStructureError, ConfigError, IntegrationError,
                     InvalidDensityMatrixError, NumericalConsistencyError, PauliParseError,
                     ResourceLimitError, SizeMismatchError)
from .lindblad import LindbladSpec, build_spec, fidelity, integrate, lindblad_rhs, syndrome_blocks
from .pauli import PauliOperator, commutes, dense_matrix, format_pauli, multiply, parse_pauli
from .trajectories import TrajectoryConfig, ensemble_average, sample_trajectory

__version__ = "0.1.0"

__all__ = [
    "CQECError", "CodeStructureError", "ConfigError", "IntegrationError", "InvalidDensityMatrixError",
    "LindbladSpec", "NumericalConsistencyError", "PauliOperator", "PauliParseError",
    "ResourceLimitError", "ScenarioConfig", "SizeMismatchError", "StabilizerCode",
    "SyndromeBlockState", "TrajectoryConfig", "bloch_exact", "bloch_rhs", "block_parameters",
    "build_spec", "commutes", "compare_results", "decay_rates", "dense_matrix", "ensemble_average",
    "fidelity", "fidelity_exact", "fidelity_no_correction", "format_pauli", "integrate",
    "integrate_blocks", "lambda_matrix", "lindblad_rhs", "load_code", "load_config", "multiply",
    "p0_exact", "parse_pauli", "recovery_map", "recovery_operator", "run_engines", "run_scenario",
    "sample_trajectory", "strong_correction", "syndrome_blocks", "three_qubit_phase_code",
    "verify_code",
]
