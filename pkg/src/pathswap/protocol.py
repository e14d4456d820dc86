"""Staged simulation of the path-spin to spin-spin entanglement swap.

Alice prepares a path-spin entangled carrier (beam splitter plus spin
flipper), copies its spin into her ancilla ``q2`` with a CNOT, then ships
the carrier to Bob.  Bob CNOTs the carrier spin into his ancilla ``q3``,
recombines the paths on a 50-50 beam splitter, rotates the spin, reads out
which detector fired and the spin, and applies a local correction to
``q3``.  ``q2`` (now with Charlie) and ``q3`` end up entangled without ever
being acted on jointly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import gates
from .analysis import binary_entropy, concurrence_2q, entanglement_entropy
from .gates import BeamSplitterParams, GateMatrix
from .svcore import (
    StateVector,
    apply_unitary,
    fidelity,
    measure_slot,
    tensor_product,
)

STAGES = (
    "initial",
    "bs1",
    "spin_flip",
    "attach_q2",
    "alice_cnot",
    "attach_q3",
    "bob_cnot",
    "bs2",
    "sg",
)
PATH_OUTCOMES = ("T'", "R'")
SPIN_OUTCOMES = (0, 1)
OUTCOMES = tuple((p, s) for p in PATH_OUTCOMES for s in SPIN_OUTCOMES)
DEFAULT_SEED = 20240917

STAGE_DESCRIPTIONS = {
    "initial": "carrier enters in the T port, spin up",
    "bs1": "after the input beam splitter",
    "spin_flip": "path-spin entangled carrier",
    "attach_q2": "Alice's ancilla q2 attached in |0>",
    "alice_cnot": "after Alice's CNOT s -> q2",
    "attach_q3": "Bob's ancilla q3 attached in |0>",
    "bob_cnot": "after Bob's CNOT s -> q3",
    "bs2": "after the 50-50 recombiner",
    "sg": "after the spin rotation ahead of the Stern-Gerlach readout",
}


class SwapVerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class Correction:
    """Local correction ``q2_gate (x) q3_gate``; ``None`` means identity."""

    name: str
    q3_gate: GateMatrix | None
    q2_gate: GateMatrix | None = None


def table_corrections() -> dict[tuple[str, int], Correction]:
    s = gates.phase_s()
    zs = gates.pauli_z() @ s
    return {
        ("T'", 0): Correction("I⊗S", s),
        ("T'", 1): Correction("I⊗Z·S", zs),
        ("R'", 0): Correction("I⊗Z·S", zs),
        ("R'", 1): Correction("I⊗S", s),
    }


def phase_free_corrections() -> dict[tuple[str, int], Correction]:
    """The correction table with the phase gate dropped (negative control)."""
    z = gates.pauli_z()
    return {
        ("T'", 0): Correction("I⊗I", None),
        ("T'", 1): Correction("I⊗Z", z),
        ("R'", 0): Correction("I⊗Z", z),
        ("R'", 1): Correction("I⊗I", None),
    }


def correction_for(path_outcome: str, spin_outcome: int) -> Correction:
    key = (_norm_path(path_outcome), int(spin_outcome))
    try:
        return table_corrections()[key]
    except KeyError:
        raise ValueError(f"no correction for outcome {path_outcome!r}, {spin_outcome!r}") from None


def _norm_path(label: str) -> str:
    label = str(label).replace("′", "'")
    if label in ("T", "R"):
        label += "'"
    return label


@dataclass(frozen=True)
class ProtocolConfig:
    bs_params: BeamSplitterParams
    flip_channel: str = "R"
    sampling_seed: int | None = None
    corrections: Mapping[tuple[str, int], Correction] | None = None

    def __post_init__(self):
        if not isinstance(self.bs_params, BeamSplitterParams):
            raise TypeError("bs_params must be BeamSplitterParams")
        if self.flip_channel not in ("T", "R"):
            raise ValueError(f"flip_channel must be 'T' or 'R', got {self.flip_channel!r}")
        if self.corrections is not None and set(self.corrections) != set(OUTCOMES):
            raise ValueError("a correction table must cover all four outcomes")

    @classmethod
    def from_alpha(cls, alpha: float, **kw) -> "ProtocolConfig":
        return cls(BeamSplitterParams.from_alpha(alpha), **kw)

    @property
    def alpha(self) -> float:
        return self.bs_params.alpha

    @property
    def beta(self) -> float:
        return self.bs_params.beta

    @property
    def product_state_run(self) -> bool:
        return self.alpha * self.beta == 0.0

    def correction_table(self) -> Mapping[tuple[str, int], Correction]:
        return self.corrections if self.corrections is not None else table_corrections()


@dataclass(frozen=True)
class Operation:
    stage: str
    kind: str  # "prepare" | "gate" | "measure"
    name: str
    targets: tuple[str, ...]
    party: str


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    payload: str


@dataclass
class PartyLedger:
    """Who holds which qubit at each stage, plus every operation and message."""

    holdings: dict[str, dict[str, frozenset[str]]] = field(default_factory=dict)
    operations: list[Operation] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)

    def holder(self, stage: str, slot: str) -> str | None:
        for party, held in self.holdings[stage].items():
            if slot in held:
                return party
        return None

    def audit(self) -> list[str]:
        """Violations of the locality rules; empty when everything is local."""
        problems = []
        seen_alice_cnot = False
        for op in self.operations:
            if {"q2", "q3"} <= set(op.targets):
                problems.append(f"{op.stage}: {op.name} acts jointly on q2 and q3")
            holders = {self.holder(op.stage, t) for t in op.targets}
            if len(holders) != 1 or None in holders:
                problems.append(f"{op.stage}: {op.name} targets {op.targets} span parties {holders}")
            elif op.party not in holders:
                problems.append(f"{op.stage}: {op.name} run by {op.party} on qubits it does not hold")
            if seen_alice_cnot and "q2" in op.targets:
                problems.append(f"{op.stage}: {op.name} touches q2 after alice_cnot")
            if op.stage == "alice_cnot" and op.kind == "gate":
                seen_alice_cnot = True
        return problems


def _holdings(stage: str) -> dict[str, frozenset[str]]:
    # carrier (p, s) and q2 start with Alice; after her CNOT the carrier
    # travels to Bob and q2 to Charlie
    if stage in STAGES and STAGES.index(stage) <= STAGES.index("alice_cnot"):
        return {"Alice": frozenset({"p", "s", "q2"}), "Bob": frozenset({"q3"}), "Charlie": frozenset()}
    return {"Alice": frozenset(), "Bob": frozenset({"p", "s", "q3"}), "Charlie": frozenset({"q2"})}


@dataclass(frozen=True)
class BranchOutcome:
    path_outcome: str
    spin_outcome: int
    probability: float
    pre_correction_state: StateVector | None
    correction_name: str


@dataclass(frozen=True)
class BranchMeasures:
    fidelity: float
    concurrence: float
    entropy: float


@dataclass(frozen=True)
class ProtocolTranscript:
    config: ProtocolConfig
    stages: list[tuple[str, StateVector]]
    branches: list[BranchOutcome]
    final_states: list[StateVector | None]
    measures: list[BranchMeasures | None]
    ledger: PartyLedger
    target: StateVector
    input_concurrence: float

    def stage(self, name: str) -> StateVector:
        for n, st in self.stages:
            if n == name:
                return st
        raise KeyError(name)


def target_state(alpha: float, beta: float) -> StateVector:
    """``alpha|00> + i beta|11>`` on ``(q2, q3)``."""
    return StateVector(("q2", "q3"), [alpha, 0, 0, 1j * beta])


class _Runner:
    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.ledger = PartyLedger()
        self.stages: list[tuple[str, StateVector]] = []

    def record(self, stage, state):
        self.ledger.holdings[stage] = _holdings(stage)
        self.stages.append((stage, state))
        return state

    def gate(self, stage, state, g, targets, party):
        self.ledger.holdings.setdefault(stage, _holdings(stage))
        self.ledger.operations.append(Operation(stage, "gate", g.name, tuple(targets), party))
        return apply_unitary(state, g, targets)

    def prepare(self, stage, slots, party):
        self.ledger.holdings.setdefault(stage, _holdings(stage))
        self.ledger.operations.append(Operation(stage, "prepare", "|0>", tuple(slots), party))


def run_protocol(config: ProtocolConfig) -> ProtocolTranscript:
    r = _Runner(config)
    a, b = config.alpha, config.beta

    r.prepare("initial", ("p", "s"), "Alice")
    psi = r.record("initial", StateVector.basis(p="T", s=0))
    psi = r.record("bs1", r.gate("bs1", psi, gates.beam_splitter_bs1(config.bs_params), ["p"], "Alice"))
    psi = r.record(
        "spin_flip", r.gate("spin_flip", psi, gates.spin_flipper(config.flip_channel), ["p", "s"], "Alice")
    )
    input_concurrence = concurrence_2q(psi)

    r.prepare("attach_q2", ("q2",), "Alice")
    psi = r.record("attach_q2", tensor_product(psi, StateVector.basis(q2=0)))
    psi = r.record("alice_cnot", r.gate("alice_cnot", psi, gates.cnot(), ["s", "q2"], "Alice"))
    r.ledger.messages.append(Message("Alice", "Bob", "quantum: carrier particle (p, s)"))
    r.ledger.messages.append(Message("Alice", "Charlie", "quantum: ancilla q2"))

    r.prepare("attach_q3", ("q3",), "Bob")
    psi = r.record("attach_q3", tensor_product(psi, StateVector.basis(q3=0)))
    psi = r.record("bob_cnot", r.gate("bob_cnot", psi, gates.cnot(), ["s", "q3"], "Bob"))
    psi = r.record("bs2", r.gate("bs2", psi, gates.beam_splitter_bs2(), ["p"], "Bob"))
    psi = r.record("sg", r.gate("sg", psi, gates.sg_rotation(), ["s"], "Bob"))

    ledger = r.ledger
    for stage in ("measure", "correct"):
        ledger.holdings[stage] = _holdings(stage)
    for slot in ("p", "s"):
        ledger.operations.append(Operation("measure", "measure", f"M[{slot}]", (slot,), "Bob"))

    table = config.correction_table()
    branches = enumerate_branches(psi, table)
    target = target_state(a, b)
    finals, measures = [], []
    for br in branches:
        corr = table[(br.path_outcome, br.spin_outcome)]
        if corr.q3_gate is not None:
            ledger.operations.append(Operation("correct", "gate", corr.q3_gate.name, ("q3",), "Bob"))
        if corr.q2_gate is not None:
            ledger.operations.append(Operation("correct", "gate", corr.q2_gate.name, ("q2",), "Charlie"))
        if br.pre_correction_state is None:
            finals.append(None)
            measures.append(None)
            continue
        out = apply_correction(br, table)
        finals.append(out)
        measures.append(
            BranchMeasures(
                fidelity=fidelity(target, out),
                concurrence=concurrence_2q(out),
                entropy=entanglement_entropy(out, ["q2"]),
            )
        )
    ledger.messages.append(Message("Bob", "Charlie", "classical: swap complete"))

    return ProtocolTranscript(
        config=config,
        stages=r.stages,
        branches=branches,
        final_states=finals,
        measures=measures,
        ledger=ledger,
        target=target,
        input_concurrence=input_concurrence,
    )


def enumerate_branches(
    post_sg_state: StateVector, corrections: Mapping[tuple[str, int], Correction] | None = None
) -> list[BranchOutcome]:
    """All four (path, spin) readouts, path first, with exact probabilities."""
    if post_sg_state.slots != ("p", "s", "q2", "q3"):
        raise ValueError(f"expected a state on (p, s, q2, q3), got {post_sg_state.slots}")
    table = corrections if corrections is not None else table_corrections()
    out = []
    for path in measure_slot(post_sg_state, "p"):
        path_label = PATH_OUTCOMES[path.outcome]
        if path.state is None:
            spin_branches = [(s, 0.0, None) for s in SPIN_OUTCOMES]
        else:
            spin_branches = measure_slot(path.state, "s")
        for spin, p_spin, state in spin_branches:
            out.append(
                BranchOutcome(
                    path_outcome=path_label,
                    spin_outcome=spin,
                    probability=path.probability * p_spin,
                    pre_correction_state=state,
                    correction_name=table[(path_label, spin)].name,
                )
            )
    return out


def apply_correction(
    branch: BranchOutcome, corrections: Mapping[tuple[str, int], Correction] | None = None
) -> StateVector:
    if branch.pre_correction_state is None:
        raise ValueError("empty branch: nothing to correct in a zero-probability outcome")
    table = corrections if corrections is not None else table_corrections()
    corr = table[(branch.path_outcome, branch.spin_outcome)]
    psi = branch.pre_correction_state
    if corr.q2_gate is not None:
        psi = apply_unitary(psi, corr.q2_gate, ["q2"])
    if corr.q3_gate is not None:
        psi = apply_unitary(psi, corr.q3_gate, ["q3"])
    return psi


def sample_run(config: ProtocolConfig, shots: int) -> dict[tuple[str, int], int]:
    """Seeded multinomial draw of ``shots`` readouts from the exact branch distribution."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    seed = DEFAULT_SEED if config.sampling_seed is None else config.sampling_seed
    transcript = run_protocol(config)
    probs = np.array([br.probability for br in transcript.branches])
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    return {(br.path_outcome, br.spin_outcome): int(c) for br, c in zip(transcript.branches, counts)}


def chi_square_uniform(counts: Mapping[object, int]) -> float:
    n = sum(counts.values())
    expected = n / len(counts)
    return float(sum((c - expected) ** 2 / expected for c in counts.values()))


# ---------------------------------------------------------------------------
# closed-form reference states and the verifier


def expected_stage_amplitudes(alpha: float, beta: float) -> dict[str, dict[tuple, complex]]:
    """Hand-derived amplitudes for the five checkpoints, flip in channel ``R``.

    Keys of each inner dict are basis tuples in the stage's slot order;
    absent keys are zero.
    """
    h = 1 / math.sqrt(2)
    return {
        # (p, s)
        "bs1": {(0, 0): alpha, (1, 0): 1j * beta},
        "spin_flip": {(0, 0): alpha, (1, 1): 1j * beta},
        # (p, s, q2)
        "alice_cnot": {(0, 0, 0): alpha, (1, 1, 1): 1j * beta},
        # (p, s, q2, q3)
        "bob_cnot": {(0, 0, 0, 0): alpha, (1, 1, 1, 1): 1j * beta},
        "bs2": {
            (0, 0, 0, 0): 1j * h * alpha,
            (0, 1, 1, 1): 1j * h * beta,
            (1, 0, 0, 0): h * alpha,
            (1, 1, 1, 1): -h * beta,
        },
    }


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    stage: str | None = None
    value: float | None = None


@dataclass(frozen=True)
class VerificationReport:
    config: ProtocolConfig
    tol: float
    checks: list[CheckResult]
    transcript: ProtocolTranscript

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def raise_if_failed(self):
        if not self.passed:
            lines = [f"{c.name} [{c.stage or '-'}]: {c.detail}" for c in self.failures()]
            raise SwapVerificationError("swap verification failed:\n  " + "\n  ".join(lines))


def _stage_diff(state: StateVector, expected: dict[tuple, complex]):
    worst, worst_label = 0.0, None
    n = state.num_slots
    for idx, amp in enumerate(state.amps):
        bits = tuple((idx >> (n - 1 - j)) & 1 for j in range(n))
        d = abs(amp - expected.get(bits, 0.0))
        if d > worst:
            worst, worst_label = d, bits
    return worst, worst_label


def verify_swap(config: ProtocolConfig, tol: float = 1e-12) -> VerificationReport:
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    tr = run_protocol(config)
    a, b = config.alpha, config.beta
    c_expected = 2 * a * b
    h_expected = binary_entropy(a * a)
    checks = []

    for br, final, m in zip(tr.branches, tr.final_states, tr.measures):
        tag = f"{br.path_outcome},{br.spin_outcome}"
        if m is None:
            checks.append(CheckResult(f"fidelity[{tag}]", False, "branch has no state", "correct"))
            continue
        checks.append(
            CheckResult(
                f"fidelity[{tag}]",
                m.fidelity >= 1 - tol,
                f"fidelity to target {m.fidelity!r} (need >= 1 - {tol:g})",
                "correct",
                m.fidelity,
            )
        )
        checks.append(
            CheckResult(
                f"concurrence[{tag}]",
                abs(m.concurrence - c_expected) <= tol,
                f"concurrence {m.concurrence!r} vs 2*alpha*beta = {c_expected!r}",
                "correct",
                m.concurrence,
            )
        )
        checks.append(
            CheckResult(
                f"entropy[{tag}]",
                abs(m.entropy - h_expected) <= max(tol, 1e-10),
                f"entropy {m.entropy!r} vs binary entropy {h_expected!r}",
                "correct",
                m.entropy,
            )
        )

    total = sum(br.probability for br in tr.branches)
    worst_p = max(abs(br.probability - 0.25) for br in tr.branches)
    checks.append(
        CheckResult(
            "branch_probabilities",
            abs(total - 1) <= tol and worst_p <= tol,
            f"sum {total!r}, max |p - 1/4| = {worst_p:.3e}",
            "measure",
            worst_p,
        )
    )

    problems = tr.ledger.audit()
    checks.append(
        CheckResult("locality", not problems, "; ".join(problems) or "no joint q2/q3 action", None)
    )

    expected = expected_stage_amplitudes(a, b)
    for stage, amps in expected.items():
        diff, label = _stage_diff(tr.stage(stage), amps)
        detail = f"max amplitude diff {diff:.3e}"
        if label is not None and diff > tol:
            detail += f" at {dict(zip(tr.stage(stage).slots, label))}"
        checks.append(CheckResult(f"amplitudes[{stage}]", diff <= tol, detail, stage, diff))

    c_out = [m.concurrence for m in tr.measures if m is not None]
    worst_c = max((abs(c - tr.input_concurrence) for c in c_out), default=math.inf)
    checks.append(
        CheckResult(
            "entanglement_conserved",
            worst_c <= tol,
            f"input (p|s) concurrence {tr.input_concurrence!r}, max output deviation {worst_c:.3e}",
            "spin_flip",
            worst_c,
        )
    )
    return VerificationReport(config, tol, checks, tr)
