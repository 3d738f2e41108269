"""
Robustness of the updates against line-search perturbations: closed-form
influence functions, finite-difference probes and the matrix sequences that
expose unbounded influence.
"""
from bregqn.core.spd import matrix_square_root
from bregqn.robustness.influence import (
    PerturbationSpec,
    PerturbedUpdate,
    delta_influence,
    family_influence,
    gamma_influence,
    perturbed_update,
)
from bregqn.robustness.probe import InfluenceReport, ProbeRow, influence_along, probe_influence
from bregqn.robustness.sequences import SequenceKind, SequenceParams, adversarial_sequence, orthonormal_complement

__all__ = [
    'matrix_square_root',
    'PerturbationSpec', 'PerturbedUpdate', 'delta_influence', 'family_influence', 'gamma_influence',
    'perturbed_update',
    'InfluenceReport', 'ProbeRow', 'influence_along', 'probe_influence',
    'SequenceKind', 'SequenceParams', 'adversarial_sequence', 'orthonormal_complement',
]
