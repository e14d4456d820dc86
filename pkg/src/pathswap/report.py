"""Self-describing key-value reports and their parser.

Every float is written with 17 significant digits so ``parse_run_report``
recovers it bit-for-bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

from .protocol import VerificationReport

RUN_FORMAT = "pathswap-run/1"
AMP_LABELS = ("q2=0 q3=0", "q2=0 q3=1", "q2=1 q3=0", "q2=1 q3=1")


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def fmt_complex(z: complex) -> str:
    return f"{fmt_float(z.real)} {fmt_float(z.imag)}"


def _parse_complex(text: str) -> complex:
    re_, im = text.split()
    return complex(float(re_), float(im))


def _parse_bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def _fmt_bool(b: bool) -> str:
    return "true" if b else "false"


@dataclass(frozen=True)
class BranchRecord:
    path: str
    spin: int
    probability: float
    correction: str
    pre: tuple[complex, ...] | None
    post: tuple[complex, ...] | None
    fidelity: float | None
    concurrence: float | None
    entropy: float | None


@dataclass(frozen=True)
class RunReport:
    alpha: float
    beta: float
    flip_channel: str
    tol: float
    seed: int | None
    product_state_run: bool
    phase_gate_omitted: bool
    input_concurrence: float
    branches: tuple[BranchRecord, ...]
    checks: tuple[tuple[str, bool], ...]
    passed: bool

    @classmethod
    def from_verification(cls, rep: VerificationReport, phase_gate_omitted: bool = False) -> "RunReport":
        tr = rep.transcript
        cfg = rep.config
        branches = []
        for br, final, m in zip(tr.branches, tr.final_states, tr.measures):
            branches.append(
                BranchRecord(
                    path=br.path_outcome,
                    spin=br.spin_outcome,
                    probability=br.probability,
                    correction=br.correction_name,
                    pre=None if br.pre_correction_state is None else tuple(complex(a) for a in br.pre_correction_state.amps),
                    post=None if final is None else tuple(complex(a) for a in final.amps),
                    fidelity=None if m is None else m.fidelity,
                    concurrence=None if m is None else m.concurrence,
                    entropy=None if m is None else m.entropy,
                )
            )
        return cls(
            alpha=cfg.alpha,
            beta=cfg.beta,
            flip_channel=cfg.flip_channel,
            tol=rep.tol,
            seed=cfg.sampling_seed,
            product_state_run=cfg.product_state_run,
            phase_gate_omitted=phase_gate_omitted,
            input_concurrence=tr.input_concurrence,
            branches=tuple(branches),
            checks=tuple((c.name, c.passed) for c in rep.checks),
            passed=rep.passed,
        )


def _opt_float(x):
    return "none" if x is None else fmt_float(x)


def emit_run_report(r: RunReport) -> str:
    lines = [
        f"format = {RUN_FORMAT}",
        f"alpha = {fmt_float(r.alpha)}",
        f"beta = {fmt_float(r.beta)}",
        f"flip_channel = {r.flip_channel}",
        f"tol = {fmt_float(r.tol)}",
        f"seed = {'none' if r.seed is None else r.seed}",
        f"product_state_run = {_fmt_bool(r.product_state_run)}",
        f"phase_gate_omitted = {_fmt_bool(r.phase_gate_omitted)}",
        f"input_concurrence = {fmt_float(r.input_concurrence)}",
    ]
    for b in r.branches:
        lines += ["", f"[branch {b.path} {b.spin}]"]
        lines.append(f"probability = {fmt_float(b.probability)}")
        lines.append(f"correction = {b.correction}")
        for tag, amps in (("pre", b.pre), ("post", b.post)):
            if amps is None:
                lines.append(f"{tag} = none")
                continue
            for lab, z in zip(AMP_LABELS, amps):
                lines.append(f"{tag}[{lab}] = {fmt_complex(z)}")
        lines.append(f"fidelity = {_opt_float(b.fidelity)}")
        lines.append(f"concurrence = {_opt_float(b.concurrence)}")
        lines.append(f"entropy = {_opt_float(b.entropy)}")
    lines += ["", "[checks]"]
    lines += [f"{name} = {'pass' if ok else 'fail'}" for name, ok in r.checks]
    lines += ["", "[summary]", f"passed = {_fmt_bool(r.passed)}"]
    return "\n".join(lines) + "\n"


def _sections(text: str) -> list[tuple[str, list[tuple[str, str]]]]:
    sections: list[tuple[str, list[tuple[str, str]]]] = [("", [])]
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append((line[1:-1], []))
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"malformed report line: {raw!r}")
        sections[-1][1].append((key, value))
    return sections


def parse_run_report(text: str) -> RunReport:
    sections = _sections(text)
    head = dict(sections[0][1])
    if head.get("format") != RUN_FORMAT:
        raise ValueError(f"not a {RUN_FORMAT} report")
    branches, checks, passed = [], [], None
    for title, items in sections[1:]:
        kv = dict(items)
        if title.startswith("branch "):
            _, path, spin = title.split(" ")
            amps = {}
            for tag in ("pre", "post"):
                if kv.get(tag) == "none":
                    amps[tag] = None
                else:
                    amps[tag] = tuple(_parse_complex(kv[f"{tag}[{lab}]"]) for lab in AMP_LABELS)
            opt = lambda k: None if kv[k] == "none" else float(kv[k])  # noqa: E731
            branches.append(
                BranchRecord(
                    path=path,
                    spin=int(spin),
                    probability=float(kv["probability"]),
                    correction=kv["correction"],
                    pre=amps["pre"],
                    post=amps["post"],
                    fidelity=opt("fidelity"),
                    concurrence=opt("concurrence"),
                    entropy=opt("entropy"),
                )
            )
        elif title == "checks":
            checks = [(k, v == "pass") for k, v in items]
        elif title == "summary":
            passed = _parse_bool(kv["passed"])
        else:
            raise ValueError(f"unknown report section [{title}]")
    if passed is None:
        raise ValueError("report has no [summary] section")
    return RunReport(
        alpha=float(head["alpha"]),
        beta=float(head["beta"]),
        flip_channel=head["flip_channel"],
        tol=float(head["tol"]),
        seed=None if head["seed"] == "none" else int(head["seed"]),
        product_state_run=_parse_bool(head["product_state_run"]),
        phase_gate_omitted=_parse_bool(head["phase_gate_omitted"]),
        input_concurrence=float(head["input_concurrence"]),
        branches=tuple(branches),
        checks=tuple(checks),
        passed=passed,
    )


def emit_table(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def parse_table(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def emit_key_values(pairs: Iterable[tuple[str, object]]) -> str:
    out = []
    for k, v in pairs:
        if isinstance(v, bool):
            v = _fmt_bool(v)
        elif isinstance(v, float):
            v = fmt_float(v)
        elif v is None:
            v = "none"
        out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"
