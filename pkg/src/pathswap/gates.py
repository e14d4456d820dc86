"""Unitaries used by the interferometric swap.

Path convention: row/column 0 is the transmitted mode ``T`` (``T'`` after
the second beam splitter), 1 is the reflected mode ``R``.  Spin: 0 = up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .svcore import ATOL, check_unitary

_SQRT1_2 = 1 / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class GateMatrix:
    name: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate {self.name}: unsupported shape {m.shape}")
        check_unitary(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __matmul__(self, other: "GateMatrix") -> "GateMatrix":
        return GateMatrix(f"{self.name}·{other.name}", self.matrix @ other.matrix)

    def dagger(self) -> "GateMatrix":
        return GateMatrix(f"{self.name}†", self.matrix.conj().T)

    def __repr__(self):
        return f"GateMatrix({self.name!r}, dim={self.dim})"


@dataclass(frozen=True)
class BeamSplitterParams:
    """Real transmission/reflection amplitudes with ``alpha**2 + beta**2 == 1``."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("beam splitter amplitudes must be finite")
        if a < 0 or b < 0:
            raise ValueError(f"beam splitter amplitudes must be non-negative, got {a}, {b}")
        if abs(a * a + b * b - 1.0) > ATOL:
            raise ValueError(f"alpha^2 + beta^2 = {a * a + b * b!r}, expected 1")

    @classmethod
    def from_alpha(cls, alpha: float) -> "BeamSplitterParams":
        alpha = float(alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        return cls(alpha, math.sqrt(max(0.0, 1.0 - alpha * alpha)))


def beam_splitter_bs1(params: BeamSplitterParams) -> GateMatrix:
    """Input beam splitter: ``T -> a T + i b R``, ``R -> i b T + a R``.

    The incident particle enters in the ``T`` slot; the second column is the
    unitary completion.
    """
    if not isinstance(params, BeamSplitterParams):
        raise TypeError("beam_splitter_bs1 expects BeamSplitterParams")
    a, b = params.alpha, params.beta
    return GateMatrix("BS1", [[a, 1j * b], [1j * b, a]])


def beam_splitter_bs2() -> GateMatrix:
    """Balanced recombiner: ``T -> (i T' + R')/sqrt2``, ``R -> (T' + i R')/sqrt2``."""
    return GateMatrix("BS2", _SQRT1_2 * np.array([[1j, 1], [1, 1j]]))


def spin_flipper(flip_channel: str = "R") -> GateMatrix:
    """Path-controlled spin flip on ``(p, s)``: sigma_x on ``s`` in ``flip_channel``."""
    x = np.array([[0, 1], [1, 0]])
    eye = np.eye(2)
    if flip_channel == "R":
        blocks = (eye, x)
    elif flip_channel == "T":
        blocks = (x, eye)
    else:
        raise ValueError(f"flip_channel must be 'T' or 'R', got {flip_channel!r}")
    m = np.zeros((4, 4), dtype=np.complex128)
    m[:2, :2], m[2:, 2:] = blocks
    return GateMatrix(f"SF[{flip_channel}]", m)


def cnot() -> GateMatrix:
    return GateMatrix(
        "CNOT",
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    )


def sg_rotation() -> GateMatrix:
    """Basis rotation applied to the spin ahead of the Stern-Gerlach readout."""
    return GateMatrix("SG", _SQRT1_2 * np.array([[1, 1], [1, -1]]))


def phase_s() -> GateMatrix:
    return GateMatrix("S", [[1, 0], [0, 1j]])


def pauli_z() -> GateMatrix:
    return GateMatrix("Z", [[1, 0], [0, -1]])


def pauli_x() -> GateMatrix:
    return GateMatrix("X", [[0, 1], [1, 0]])


def identity(num_qubits: int = 1) -> GateMatrix:
    return GateMatrix("I", np.eye(2**num_qubits))
