"""Exact simulator for measurement-based teleportation of collective spins."""

from .errors import ContractViolation, DomainError
from .spincore import (BlochAngles, EnsembleState, RotationMatrix, SpinVector,
                       apply_rotation, make_dicke, make_spin_coherent,
                       q_function, q_function_grid, r_matrix,
                       r_matrix_reference, spin_expectation)
from .approx import (four_circle_state, phi_angle, r_approx_ho, r_approx_wkb)
from .measurement import (DenseTriState, PovmKernel, QndOutcome,
                          povm_projector_limit_check, povm_weight,
                          project_number, qnd_project_dense)
from .prep import PairState, PrepTrace, max_entangled, prep_adaptive
from .teleport import (BranchedState, InitialConfig, OutcomeRecord,
                       OutcomeTable, apply_corrections, delta_plus,
                       outcome_table, protocol1_branch, protocol1_enumerate,
                       protocol2_branch, protocol2_enumerate, sample_run)
from .analysis import (DephasingChannel, TeleportStats, aggregate,
                       c_coefficient, c_coefficient_root,
                       dephase_closed_form, dephase_quadrature_oracle,
                       dephased_error_scan, dephased_outcome_table,
                       qse_bound, tel_error)

__version__ = "0.1.0"

__all__ = [
    "BlochAngles", "EnsembleState", "RotationMatrix", "SpinVector",
    "apply_rotation", "make_dicke", "make_spin_coherent",
    "q_function", "q_function_grid", "r_matrix", "r_matrix_reference",
    "spin_expectation",
    "four_circle_state", "phi_angle", "r_approx_ho", "r_approx_wkb",
    "DenseTriState", "PovmKernel", "QndOutcome",
    "povm_projector_limit_check", "povm_weight", "project_number",
    "qnd_project_dense",
    "PairState", "PrepTrace", "max_entangled", "prep_adaptive",
    "BranchedState", "InitialConfig", "OutcomeRecord", "OutcomeTable",
    "apply_corrections", "delta_plus", "outcome_table",
    "protocol1_branch", "protocol1_enumerate",
    "protocol2_branch", "protocol2_enumerate", "sample_run",
    "DephasingChannel", "TeleportStats", "aggregate",
    "c_coefficient", "c_coefficient_root",
    "dephase_closed_form", "dephase_quadrature_oracle",
    "dephased_error_scan", "dephased_outcome_table",
    "qse_bound", "tel_error",
    "ContractViolation", "DomainError",
]
