"""Optimal single-qubit gate synthesis over the V, Clifford+T and Clifford+sqrt(T) gate sets."""

from .channels import (
    MixSpec,
    PauliChannel,
    diamond_diag_diag,
    diamond_diag_general,
    diamond_unitary_unitary,
    fallback_mixture_bound,
    mixing_probability,
    pauli_distance,
    projective_mixture_distance,
    twirled_mixture_distance,
)
from .exactsynth import GateSequence, QuaternionMatrix, eval_sequence, parse_sequence, synth
from .rings import RingElement, get_gate_set
from .synth import (
    ApproxSolution,
    SearchExhausted,
    SynthConfig,
    approx_diagonal,
    approx_fallback,
    approx_general_su2,
    approx_magnitude,
    approx_mixed_diagonal,
    approx_mixed_fallback,
    approx_mixed_magnitude,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxSolution",
    "GateSequence",
    "MixSpec",
    "PauliChannel",
    "QuaternionMatrix",
    "RingElement",
    "SearchExhausted",
    "SynthConfig",
    "approx_diagonal",
    "approx_fallback",
    "approx_general_su2",
    "approx_magnitude",
    "approx_mixed_diagonal",
    "approx_mixed_fallback",
    "approx_mixed_magnitude",
    "diamond_diag_diag",
    "diamond_diag_general",
    "diamond_unitary_unitary",
    "eval_sequence",
    "fallback_mixture_bound",
    "get_gate_set",
    "mixing_probability",
    "parse_sequence",
    "pauli_distance",
    "projective_mixture_distance",
    "synth",
    "twirled_mixture_distance",
]
