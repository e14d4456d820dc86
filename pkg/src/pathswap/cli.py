"""Command-line front end.

Exit codes: 0 verified, 1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional

import numpy as np

from .protocol import (
    DEFAULT_SEED,
    OUTCOMES,
    STAGE_DESCRIPTIONS,
    ProtocolConfig,
    chi_square_uniform,
    phase_free_corrections,
    run_protocol,
    sample_run,
    verify_swap,
)
from .report import RunReport, emit_key_values, emit_run_report, emit_table, fmt_complex, fmt_float
from .svcore import amplitude, labeled_amplitudes

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
# 99.9% quantile of chi-square with 3 degrees of freedom
CHI2_CRITICAL_3DOF_999 = 16.266236196238129


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= a <= 1.0:  # also rejects nan
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1], got {text}")
    return a


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return x


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathswap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--flip-channel", choices=("T", "R"), default="R",
                        help="interferometer arm holding the spin flipper (default R)")
    common.add_argument("--tol", type=_positive_float, default=1e-12)
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("text", "table"), default=None,
                        help="text (key-value report) or table (CSV); sweep defaults to table")

    for verb, help_ in (("run", "run the protocol and verify the swap"),
                        ("verify", "list every verification check")):
        p = sub.add_parser(verb, parents=[common], help=help_)
        p.add_argument("--alpha", type=_alpha, required=True)
        p.add_argument("--omit-phase-gate", action="store_true",
                       help="negative control: drop S from every correction")

    p = sub.add_parser("sweep", parents=[common], help="tabulate measures over a range of alpha")
    p.add_argument("--alpha-min", type=_alpha, default=0.0)
    p.add_argument("--alpha-max", type=_alpha, default=1.0)
    p.add_argument("--steps", type=int, default=11)

    p = sub.add_parser("sample", parents=[common], help="seeded sampling of measurement outcomes")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--shots", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("trace", parents=[common], help="print every intermediate state")
    p.add_argument("--alpha", type=_alpha, required=True)
    return parser


def _config(args, **kw) -> ProtocolConfig:
    corrections = phase_free_corrections() if getattr(args, "omit_phase_gate", False) else None
    return ProtocolConfig.from_alpha(args.alpha, flip_channel=args.flip_channel, corrections=corrections, **kw)


def cmd_run(args) -> tuple[str, int]:
    rep = verify_swap(_config(args), args.tol)
    report = RunReport.from_verification(rep, phase_gate_omitted=args.omit_phase_gate)
    if args.format == "text":
        text = emit_run_report(report)
    else:
        text = emit_table(
            ["path", "spin", "probability", "correction", "fidelity", "concurrence", "entropy"],
            [(b.path, b.spin, b.probability, b.correction, b.fidelity, b.concurrence, b.entropy)
             for b in report.branches],
        )
    return text, EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> tuple[str, int]:
    rep = verify_swap(_config(args), args.tol)
    if args.format == "table":
        text = emit_table(
            ["check", "stage", "passed", "value", "detail"],
            [(c.name, c.stage or "", "pass" if c.passed else "fail",
              "" if c.value is None else float(c.value), c.detail) for c in rep.checks],
        )
    else:
        cfg = rep.config
        lines = [
            f"alpha = {fmt_float(cfg.alpha)}",
            f"beta = {fmt_float(cfg.beta)}",
            f"flip_channel = {cfg.flip_channel}",
            f"tol = {fmt_float(rep.tol)}",
        ]
        if cfg.product_state_run:
            lines.append("note = product-state run")
        for c in rep.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name} [{c.stage or '-'}] {c.detail}")
        lines.append(f"passed = {'true' if rep.passed else 'false'}")
        text = "\n".join(lines) + "\n"
    return text, EXIT_OK if rep.passed else EXIT_FAIL


SWEEP_COLUMNS = [
    "alpha", "beta", "p_T0", "p_T1", "p_R0", "p_R1",
    "min_fidelity", "concurrence", "entropy", "passed",
]


def sweep_rows(alpha_min: float, alpha_max: float, steps: int, flip_channel="R", tol=1e-12):
    rows = []
    for a in np.linspace(alpha_min, alpha_max, steps):
        a = float(min(max(a, 0.0), 1.0))
        rep = verify_swap(ProtocolConfig.from_alpha(a, flip_channel=flip_channel), tol)
        tr = rep.transcript
        ms = [m for m in tr.measures if m is not None]
        rows.append((
            a, tr.config.beta, *[br.probability for br in tr.branches],
            min(m.fidelity for m in ms), min(m.concurrence for m in ms), min(m.entropy for m in ms),
            "pass" if rep.passed else "fail",
        ))
    return rows


def cmd_sweep(args) -> tuple[str, int]:
    if not args.alpha_min < args.alpha_max:
        raise _Usage("--alpha-min must be smaller than --alpha-max")
    if args.steps < 2:
        raise _Usage("--steps must be at least 2")
    rows = sweep_rows(args.alpha_min, args.alpha_max, args.steps, args.flip_channel, args.tol)
    if args.format == "table":
        text = emit_table(SWEEP_COLUMNS, rows)
    else:
        text = "".join(
            f"[row {i}]\n" + emit_key_values(zip(SWEEP_COLUMNS, row)) for i, row in enumerate(rows)
        )
    ok = all(r[-1] == "pass" for r in rows)
    return text, EXIT_OK if ok else EXIT_FAIL


def cmd_sample(args) -> tuple[str, int]:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    cfg = ProtocolConfig.from_alpha(args.alpha, flip_channel=args.flip_channel, sampling_seed=seed)
    counts = sample_run(cfg, args.shots)
    chi2 = chi_square_uniform(counts)
    ok = chi2 < CHI2_CRITICAL_3DOF_999
    if args.format == "table":
        text = emit_table(
            ["path", "spin", "count", "expected"],
            [(p, s, counts[(p, s)], args.shots / 4) for p, s in OUTCOMES],
        )
        text += f"# seed,{seed}\n# chi_square,{fmt_float(chi2)}\n"
    else:
        pairs = [
            ("format", "pathswap-sample/1"),
            ("alpha", cfg.alpha),
            ("beta", cfg.beta),
            ("flip_channel", cfg.flip_channel),
            ("shots", args.shots),
            ("seed", seed),
            ("seed_source", "default" if args.seed is None else "user"),
        ]
        pairs += [(f"count[{p},{s}]", counts[(p, s)]) for p, s in OUTCOMES]
        pairs += [
            ("expected_per_branch", args.shots / 4),
            ("chi_square", chi2),
            ("chi_square_critical_999", CHI2_CRITICAL_3DOF_999),
            ("passed", ok),
        ]
        text = emit_key_values(pairs)
    return text, EXIT_OK if ok else EXIT_FAIL


_PRIMED = ("bs2", "sg")


def cmd_trace(args) -> tuple[str, int]:
    cfg = ProtocolConfig.from_alpha(args.alpha, flip_channel=args.flip_channel)
    tr = run_protocol(cfg)
    a, b = cfg.alpha, cfg.beta
    bs1 = tr.stage("bs1")
    pattern_ok = (
        abs(amplitude(bs1, p="T", s=0) - a) <= args.tol
        and abs(amplitude(bs1, p="R", s=0) - 1j * b) <= args.tol
        and abs(amplitude(bs1, p="T", s=1)) <= args.tol
        and abs(amplitude(bs1, p="R", s=1)) <= args.tol
    )

    sections = []  # (section, description, state, path names)
    for name, st in tr.stages:
        names = ("T'", "R'") if name in _PRIMED else ("T", "R")
        sections.append((name, STAGE_DESCRIPTIONS[name], st, names))
    for br, final in zip(tr.branches, tr.final_states):
        tag = f"branch[{br.path_outcome},{br.spin_outcome}]"
        prob = f"probability {fmt_float(br.probability)}"
        sections.append((f"{tag}.pre", f"{prob}, before correction", br.pre_correction_state, None))
        sections.append((f"{tag}.post", f"{prob}, after {br.correction_name}", final, None))

    if args.format == "table":
        rows = []
        for sect, _, st, names in sections:
            if st is not None:
                amps = labeled_amplitudes(st, atol=args.tol, path_names=names or ("T", "R"))
                rows += [(sect, lab, z.real, z.imag) for lab, z in amps.items()]
        text = emit_table(["section", "label", "re", "im"], rows)
        text += f"# bs1_pattern_check,{'pass' if pattern_ok else 'fail'}\n"
    else:
        lines = [f"alpha = {fmt_float(a)}", f"beta = {fmt_float(b)}", f"flip_channel = {cfg.flip_channel}"]
        for sect, desc, st, names in sections:
            lines.append(f"{sect}: {desc}")
            if st is None:
                lines.append("  (no state)")
                continue
            amps = labeled_amplitudes(st, atol=args.tol, path_names=names or ("T", "R"))
            lines += [f"  {lab} : {fmt_complex(z)}" for lab, z in amps.items()]
        lines.append(
            "bs1 pattern check (alpha on p=T s=0, i*beta on p=R s=0, nothing else): "
            + ("pass" if pattern_ok else "fail")
        )
        text = "\n".join(lines) + "\n"
    return text, EXIT_OK if pattern_ok else EXIT_FAIL


class _Usage(Exception):
    pass


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "trace": cmd_trace,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = "table" if args.verb == "sweep" else "text"
    try:
        text, code = COMMANDS[args.verb](args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"pathswap {args.verb}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"pathswap {args.verb}: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    return code


if __name__ == "__main__":
    raise SystemExit(main())
