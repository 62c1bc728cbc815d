"""Desk-scale simulator of two authenticated semi-quantum direct
communication protocols over Bell states, with adversary models and Monte
Carlo verification of their eavesdropping-detection probabilities."""

__version__ = "0.1.0"

from .qsim import BellState, Pauli, QuantumRegister, states_equal
from .keys import KeyMaterial, Permutation, gen_keys
from .protocol import DetectionCause, RunOutcome, Variant, run_session
from .adversary import AttackStrategy

__all__ = [
    "AttackStrategy",
    "BellState",
    "DetectionCause",
    "KeyMaterial",
    "Pauli",
    "Permutation",
    "QuantumRegister",
    "RunOutcome",
    "Variant",
    "gen_keys",
    "run_session",
    "states_equal",
    "__version__",
]
