"""Composite-pulse design and verification for Lambda-type three-level systems."""
from .expansion import ErrorExpansion, analytic_expansion, taylor_oracle
from .landscape import FidelityGrid, RobustnessReport, robustness_report, sweep
from .pulses import (
    ErrorPair,
    GateParams,
    PulseSpec,
    SequenceSpec,
    extract_gate_params,
    gate_fidelity,
    propagate_sequence,
)
from .solver import ConstraintSystem, InfeasibleDesign, PhaseSolution, solve_five, solve_seven, solve_three
from .transfer import CavitySystem, TransferTask, transfer_fidelity

__version__ = "0.1.0"
