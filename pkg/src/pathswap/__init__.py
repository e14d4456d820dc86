"""Simulation and verification of swapping single-particle path-spin
entanglement onto the spins of two particles that never interact."""

from .analysis import concurrence_2q, entanglement_entropy, purity, schmidt
from .gates import BeamSplitterParams, GateMatrix
from .protocol import ProtocolConfig, run_protocol, sample_run, verify_swap
from .svcore import StateVector, amplitude, apply_unitary, fidelity, measure_slot, partial_trace, tensor_product

__version__ = "0.1.0"
