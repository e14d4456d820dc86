"""Dense state-vector engine over the fixed four-slot register ``[p, s, q2, q3]``.

Slot ``p`` is the path qubit of the carrier particle (index 0 = transmitted
channel ``T``, index 1 = reflected channel ``R``; after the second beam
splitter the same indices read ``T'`` / ``R'``).  Slots ``s``, ``q2`` and
``q3`` are spins with index 0 = spin up = ``|0>``.

A state may cover any subset of the layout.  Amplitudes are stored in
``numpy.kron`` order over the present slots, the earliest layout slot being
the most significant bit.  Code outside this module should read amplitudes
through :func:`amplitude` and never rely on raw positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np

LAYOUT: tuple[str, ...] = ("p", "s", "q2", "q3")

ATOL = 1e-12
RENORM_DRIFT = 1e-13
# Branches whose projected norm squared is below this are treated as impossible.
ZERO_PROBABILITY = 1e-24

_PATH_NAMES = {"T": 0, "R": 1, "T'": 0, "R'": 1, "T′": 0, "R′": 1}
_SPIN_NAMES = {"0": 0, "1": 1, "up": 0, "down": 1}


class RegisterError(ValueError):
    """Bad slot names, slot collisions, incomplete labels."""


class UnitarityError(ValueError):
    """A matrix offered as a gate is not unitary."""


def _order_slots(slots: Sequence[str]) -> tuple[str, ...]:
    unknown = [s for s in slots if s not in LAYOUT]
    if unknown:
        raise RegisterError(f"unknown slot(s) {unknown}; layout is {LAYOUT}")
    if len(set(slots)) != len(slots):
        raise RegisterError(f"duplicate slots in {tuple(slots)}")
    return tuple(s for s in LAYOUT if s in slots)


def basis_index(slot: str, value: Union[int, str]) -> int:
    """Map a per-slot basis name (``'T'``, ``"R'"``, ``0``, ``'down'``...) to 0/1."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        if value in (0, 1):
            return int(value)
        raise RegisterError(f"basis index {value!r} out of range for slot {slot}")
    table = _PATH_NAMES if slot == "p" else _SPIN_NAMES
    try:
        return table[str(value)]
    except KeyError:
        raise RegisterError(f"unknown basis label {value!r} for slot {slot}") from None


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a subset of the register.

    Instances are immutable; ``amps`` is a read-only complex128 array.
    """

    slots: tuple[str, ...]
    amps: np.ndarray

    def __post_init__(self):
        slots = tuple(self.slots)
        if not slots:
            raise RegisterError("a state must cover at least one slot")
        if _order_slots(slots) != slots:
            raise RegisterError(f"slots {slots} are not in layout order {LAYOUT}")
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != 2 ** len(slots):
            raise RegisterError(
                f"{amps.size} amplitudes given for {len(slots)} slot(s)"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized (norm {norm!r})")
        if abs(norm - 1.0) > RENORM_DRIFT:
            amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, slots: Sequence[str], amps, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(tuple(slots), amps)

    @classmethod
    def basis(cls, **label) -> "StateVector":
        """Computational basis state, e.g. ``StateVector.basis(p="T", s=0)``."""
        slots = _order_slots(list(label))
        amps = np.zeros(2 ** len(slots), dtype=np.complex128)
        amps[_flat_index(slots, label)] = 1.0
        return cls(slots, amps)

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per slot."""
        return self.amps.reshape((2,) * len(self.slots))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def with_phase(self, phase: complex) -> "StateVector":
        return StateVector(self.slots, self.amps * phase)

    def __repr__(self):
        terms = ", ".join(
            f"{lab}: {amp:.6g}" for lab, amp in labeled_amplitudes(self).items()
        )
        return f"StateVector({'/'.join(self.slots)}; {terms})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on ``slots``."""

    slots: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        slots = _order_slots(tuple(self.slots))
        m = np.array(self.matrix, dtype=np.complex128)
        dim = 2 ** len(slots)
        if m.shape != (dim, dim):
            raise RegisterError(f"matrix shape {m.shape} does not match {len(slots)} slot(s)")
        if not np.allclose(m, m.conj().T, atol=ATOL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > ATOL:
            raise ValueError(f"density matrix trace {np.trace(m)!r} != 1")
        if np.linalg.eigvalsh(m).min() < -ATOL:
            raise ValueError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues ascending, with round-off negatives clamped to zero."""
        w = np.linalg.eigvalsh(self.matrix)
        return np.where((w < 0) & (w >= -ATOL), 0.0, w)


class MeasurementBranch(NamedTuple):
    outcome: int
    probability: float
    state: StateVector | None  # None when the branch is impossible


def _flat_index(slots: Sequence[str], label: Mapping[str, Union[int, str]]) -> int:
    missing = [s for s in slots if s not in label]
    if missing:
        raise RegisterError(f"label does not assign slot(s) {missing}")
    extra = [s for s in label if s not in slots]
    if extra:
        raise RegisterError(f"label names slot(s) {extra} not present in {tuple(slots)}")
    idx = 0
    for slot in slots:
        idx = (idx << 1) | basis_index(slot, label[slot])
    return idx


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Joint state of two states on disjoint slots, reordered to the layout."""
    if set(a.slots) & set(b.slots):
        raise RegisterError(f"slot collision: {sorted(set(a.slots) & set(b.slots))}")
    joint = np.tensordot(a.tensor(), b.tensor(), axes=0)
    order = a.slots + b.slots
    target = _order_slots(order)
    joint = np.transpose(joint, [order.index(s) for s in target])
    return StateVector(target, joint.reshape(-1))


def _as_matrix(g) -> tuple[np.ndarray, str]:
    m = getattr(g, "matrix", g)
    return np.asarray(m, dtype=np.complex128), getattr(g, "name", "matrix")


def check_unitary(m: np.ndarray, atol: float = ATOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UnitarityError(f"unitarity violation: non-square shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise UnitarityError("unitarity violation: non-finite entry")
    err = np.abs(m @ m.conj().T - np.eye(m.shape[0])).max()
    if err > atol:
        raise UnitarityError(f"unitarity violation: max |G G^dag - I| = {err:.3e}")


def apply_unitary(state: StateVector, g, targets: Sequence[str]) -> StateVector:
    """Apply gate ``g`` (a ``GateMatrix`` or square array) to ``targets``.

    ``targets`` order matters: the first target is the most significant qubit
    of ``g``'s matrix.
    """
    m, name = _as_matrix(g)
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise RegisterError(f"repeated target in {targets}")
    for t in targets:
        if t not in LAYOUT:
            raise RegisterError(f"unknown slot {t!r}")
        if t not in state.slots:
            raise RegisterError(f"slot {t!r} not present in {state.slots}")
    k = len(targets)
    if m.shape != (2**k, 2**k):
        raise RegisterError(f"gate {name} has shape {m.shape}, expected {(2**k, 2**k)} for {k} target(s)")
    check_unitary(m)

    axes = [state.slots.index(t) for t in targets]
    psi = np.tensordot(m.reshape((2,) * (2 * k)), state.tensor(), axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the gate's output axes first; move them back into place
    psi = np.moveaxis(psi, list(range(k)), axes)
    return StateVector(state.slots, psi.reshape(-1))


def amplitude(state: StateVector, label: Mapping[str, Union[int, str]] | None = None, **kw) -> complex:
    """Amplitude of one basis label, e.g. ``amplitude(psi, p="R", s=0)``."""
    label = dict(label or {}, **kw)
    return complex(state.amps[_flat_index(state.slots, label)])


def labeled_amplitudes(
    state: StateVector, atol: float = 0.0, path_names: tuple[str, str] = ("T", "R")
) -> dict[str, complex]:
    """``{"p=T s=0": amp, ...}`` for amplitudes with modulus above ``atol``."""
    out = {}
    n = state.num_slots
    for idx, amp in enumerate(state.amps):
        if abs(amp) <= atol and atol > 0:
            continue
        if atol == 0 and amp == 0:
            continue
        bits = [(idx >> (n - 1 - j)) & 1 for j in range(n)]
        parts = [
            f"{slot}={path_names[b] if slot == 'p' else b}" for slot, b in zip(state.slots, bits)
        ]
        out[" ".join(parts)] = complex(amp)
    return out


def canonical_phase(amps: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    nz = np.flatnonzero(np.abs(amps) > atol)
    if nz.size == 0:
        return amps
    lead = amps[nz[0]]
    return amps * (abs(lead) / lead)


def measure_slot(state: StateVector, slot: str, fix_phase: bool = True) -> list[MeasurementBranch]:
    """Projective measurement of one slot in its computational basis.

    Returns both outcomes.  Each post-measurement state is renormalized and
    no longer contains ``slot``.  With ``fix_phase`` the arbitrary global
    phase of each post-state is removed (see :func:`canonical_phase`).
    A single-slot state leaves nothing behind, so its branches carry
    ``state=None``.
    """
    if slot not in state.slots:
        raise RegisterError(f"slot {slot!r} not present in {state.slots}")
    axis = state.slots.index(slot)
    rest = tuple(s for s in state.slots if s != slot)
    psi = state.tensor()
    branches = []
    for outcome in (0, 1):
        sub = np.take(psi, outcome, axis=axis).reshape(-1)
        prob = float(np.vdot(sub, sub).real)
        if prob < ZERO_PROBABILITY:
            branches.append(MeasurementBranch(outcome, 0.0, None))
            continue
        post = None
        if rest:
            sub = sub / np.sqrt(prob)
            if fix_phase:
                sub = canonical_phase(sub)
            post = StateVector(rest, sub)
        branches.append(MeasurementBranch(outcome, prob, post))
    total = sum(b.probability for b in branches)
    # round-off only; the input is normalized
    return [b._replace(probability=b.probability / total) for b in branches]


def partial_trace(state: StateVector, keep: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix on ``keep``; every other slot is traced out."""
    if not keep:
        raise RegisterError("partial_trace needs a nonempty keep set")
    keep = _order_slots(tuple(keep))
    for s in keep:
        if s not in state.slots:
            raise RegisterError(f"slot {s!r} not present in {state.slots}")
    kept_axes = [state.slots.index(s) for s in keep]
    traced = [i for i in range(state.num_slots) if i not in kept_axes]
    m = np.transpose(state.tensor(), kept_axes + traced).reshape(2 ** len(keep), -1)
    rho = m @ m.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(keep, rho / np.trace(rho).real)


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``; blind to global phase."""
    if a.slots != b.slots:
        raise RegisterError(f"register mismatch: {a.slots} vs {b.slots}")
    f = abs(np.vdot(a.amps, b.amps)) ** 2
    return float(min(max(f, 0.0), 1.0))
