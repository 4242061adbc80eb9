"""Feed-forward neural quantum states for SYK and Heisenberg ground states."""

__version__ = "0.1.0"

from .basis import SectorBasis, apply_two_body, build_sector_basis
from .compress import CompressionReport, compression_scan, svd_truncate
from .ed import GroundStateSolution, bipartite_entropy, ground_state, page_value
from .harness import (Problem, TrainSettings, TrainingRecord, build_problem, scaling_sweep, train,
                      truncation_verdict, write_records_csv)
from .models import CouplingTensor, SparseHamiltonian, build_heisenberg, build_syk_hamiltonian, sample_syk_couplings
from .nqs import Architecture, NetworkParams, init_params, log_amplitude, log_amplitudes, num_params
from .optimize import AdamConfig, Objective, adam_step, gradient, overlap_loss, relative_energy_error, voe_loss
