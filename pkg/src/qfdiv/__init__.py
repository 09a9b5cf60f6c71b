"""Optimized quantum f-divergences: evaluation, optimization over tau, and
randomized certification of the data-processing inequality."""

from .channels import (QuantumChannel, apply_channel, petz_recovery_channel,
                       petz_recovery_isometry, random_channel, stinespring_isometry)
from .divergences import (fidelity, optimized_objective, petz_f_divergence, petz_renyi,
                          quantum_relative_entropy, sandwiched_renyi)
from .errors import DomainViolation, InvalidInput, NonConvergence, NumericalFailure
from .functions import custom, from_alpha, from_expression, neg_log, neg_power, power
from .linalg import eig_hermitian, matrix_function, partial_trace
from .optimizer import (DivergenceReport, OptimizerConfig, optimize_tau_generic,
                        optimized_f_divergence)
from .states import make_rng, random_density

__version__ = "0.1.0"
