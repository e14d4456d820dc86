"""Bipartite entanglement measures for pure states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .svcore import ATOL, DensityMatrix, RegisterError, StateVector, tensor_product


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray  # descending, non-negative
    left_basis: list[StateVector]
    right_basis: list[StateVector]

    def reconstruct(self) -> StateVector:
        """Recombine into the joint state on the union of both sides."""
        total = None
        for lam, l, r in zip(self.coefficients, self.left_basis, self.right_basis):
            term = lam * tensor_product(l, r).amps
            total = term if total is None else total + term
        slots = tensor_product(self.left_basis[0], self.right_basis[0]).slots
        return StateVector(slots, total)


def _bipartition(state: StateVector, left: Sequence[str]):
    left = list(left)
    for s in left:
        if s not in state.slots:
            raise RegisterError(f"slot {s!r} not present in {state.slots}")
    if len(set(left)) != len(left):
        raise RegisterError(f"repeated slot in {left}")
    left = tuple(s for s in state.slots if s in left)
    right = tuple(s for s in state.slots if s not in left)
    if not left or not right:
        raise RegisterError(f"trivial bipartition {left} | {right}")
    return left, right


def schmidt(state: StateVector, left: Sequence[str]) -> SchmidtDecomposition:
    left, right = _bipartition(state, left)
    axes = [state.slots.index(s) for s in left + right]
    m = np.transpose(state.tensor(), axes).reshape(2 ** len(left), 2 ** len(right))
    u, sv, vh = np.linalg.svd(m)
    k = len(sv)
    return SchmidtDecomposition(
        coefficients=sv,
        left_basis=[StateVector(left, u[:, j]) for j in range(k)],
        right_basis=[StateVector(right, vh[j, :]) for j in range(k)],
    )


def concurrence_2q(state: StateVector) -> float:
    """Wootters concurrence of a two-qubit pure state, ``2|a00 a11 - a01 a10|``."""
    if state.num_slots != 2:
        raise RegisterError(f"concurrence_2q needs exactly two slots, got {state.slots}")
    a = state.amps
    return float(min(2 * abs(a[0] * a[3] - a[1] * a[2]), 1.0))


def entanglement_entropy(state: StateVector, left: Sequence[str]) -> float:
    """Von Neumann entropy (bits) of either side of the cut."""
    lam = schmidt(state, left).coefficients
    p = lam**2
    p = p[p > 0]
    h = -np.sum(p * np.log2(p))
    return float(h) if h > 0 else 0.0


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def purity(rho) -> float:
    """``tr(rho^2)``.  Accepts a :class:`DensityMatrix` or a square array."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"purity needs a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.conj().T, atol=ATOL, rtol=0):
        raise ValueError("purity of a non-Hermitian matrix")
    # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))
