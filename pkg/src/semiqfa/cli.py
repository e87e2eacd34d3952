"""
Command-line interface.

Exit codes: 0 on success, 1 when a check fails (invalid model, violations,
inconsistent isolation, fuzz failures), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from semiqfa import bounds
from semiqfa.conversion import to_mo
from semiqfa.fileformat import FormatError, load_automaton, parse_automaton, save_automaton
from semiqfa.fuzz import equivalence_fuzz
from semiqfa.models import (
    Dfa,
    InvalidModelError,
    ModelStructureError,
    OracleCapError,
    Word,
    accept_prob,
    validate_model,
)
from semiqfa.random_models import KINDS, SEMI_QUANTUM_KINDS, FuzzConfig, gen_random_model

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_word(text: str, alphabet: Sequence[str]) -> Word:
    """Comma-separated symbols, or one character per symbol when every symbol is a single character."""
    if text == "":
        return ()
    if "," in text:
        word = tuple(text.split(","))
    elif all(len(s) == 1 for s in alphabet):
        word = tuple(text)
    else:
        word = (text,)
    bad = [s for s in word if s not in alphabet]
    if bad:
        raise UsageError(f"--input: symbol {bad[0]!r} is not in alphabet {list(alphabet)}")
    return word


def _format_word(w: Word | None) -> str:
    if w is None:
        return "none"
    if not w:
        return "(empty string)"
    return "".join(w) if all(len(s) == 1 for s in w) else ",".join(w)


def _load_dfa(path: str, flag: str) -> Dfa:
    d = load_automaton(path)
    if not isinstance(d, Dfa):
        raise UsageError(f"{flag}: expected a dfa document, got {d.kind}")
    return d


def cmd_validate(args: argparse.Namespace) -> int:
    with open(args.file, encoding="utf-8") as fh:
        model = parse_automaton(fh.read(), validate=False)
    report = validate_model(model)
    if report.ok:
        print(f"{model.kind}: valid")
        return EXIT_OK
    print(f"{model.kind}: {len(report.violations)} violation(s)")
    for v in report.violations:
        print(f"  {v}")
    return EXIT_CHECK


def cmd_run(args: argparse.Namespace) -> int:
    model = load_automaton(args.file)
    word = parse_word(args.input, model.alphabet)
    print(f"{accept_prob(model, word):#.12g}")
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    model = load_automaton(args.file)
    mo, report = to_mo(model)
    save_automaton(mo, args.output)
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    cfg = FuzzConfig(seed=args.seed, trials=args.trials, max_q=args.max_q, max_k=args.max_k,
                     max_outcomes=args.max_outcomes, max_len=args.max_len, tolerance=args.tolerance)
    report = equivalence_fuzz(cfg, args.kind)
    for line in report.lines():
        print(line)
    for f in report.failures[:10]:
        print(f"  trial {f.trial} word {_format_word(f.word)}: direct {f.direct:.12g} converted {f.converted:.12g}")
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_bound(args: argparse.Namespace) -> int:
    if args.which == "dfa-upper":
        report = bounds.dfa_upper_bound_from_qfa(args.dim, args.delta)
    elif args.which == "dim-lower":
        report = bounds.mo_dim_lower_bound(args.dfa_states, args.delta)
    else:
        report = bounds.qk_lower_bound(args.dfa_states, args.delta)
    print(report.format_value(4))
    return EXIT_OK


def cmd_isolation(args: argparse.Namespace) -> int:
    mo, _ = to_mo(load_automaton(args.file))
    lang = _load_dfa(args.dfa, "--dfa")
    est = bounds.estimate_isolation(mo, lang, args.cutpoint, args.max_len)
    print(f"strings checked: {est.strings_checked}")
    print(f"consistent: {'yes' if est.consistent else 'no'}")
    print(f"witness: {_format_word(est.witness)}")
    print(f"isolation estimate: {est.iso_hat:.12g} ({est.note})")
    return EXIT_OK if est.consistent else EXIT_CHECK


def cmd_separation(args: argparse.Namespace) -> int:
    mo, _ = to_mo(load_automaton(args.file))
    min_dfa, _ = bounds.minimal_dfa(_load_dfa(args.dfa, "--dfa"))
    audit = bounds.separation_audit(mo, min_dfa, args.delta, args.max_len)
    dist = "none" if audit.min_cross_distance == float("inf") else f"{audit.min_cross_distance:.12g}"
    print(f"dimension: {audit.dim}")
    print(f"classes observed: {audit.class_count}")
    print(f"max ||vec(rho_x)||: {audit.max_vec_norm:.12g}")
    print(f"threshold: {audit.threshold:.12g}")
    print(f"min cross-class distance: {dist}")
    print(f"violations: {audit.violation_count}")
    for x, y in audit.violations[:10]:
        print(f"  {_format_word(x)} / {_format_word(y)}")
    return EXIT_OK if audit.ok else EXIT_CHECK


def cmd_minimize(args: argparse.Namespace) -> int:
    d = _load_dfa(args.file, "FILE")
    out, size = bounds.minimal_dfa(d)
    save_automaton(out, args.output)
    print(f"states: {d.size} -> {size}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = FuzzConfig(seed=args.seed, max_q=args.max_q, max_k=args.max_k, max_outcomes=args.max_outcomes)
    save_automaton(gen_random_model(args.kind, cfg), args.output)
    return EXIT_OK


def _caps(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-q", type=int, default=3)
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--max-outcomes", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semiqfa", description="Semi-quantum finite automata toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model's invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="print the acceptance probability of a string")
    p.add_argument("file")
    p.add_argument("--input", required=True, help="symbols, one character each or comma-separated")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convert", help="convert to an equivalent MO-1gQFA")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("equiv", help="fuzz a conversion against the direct semantics")
    p.add_argument("--kind", required=True, choices=SEMI_QUANTUM_KINDS)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--tolerance", type=float, default=1e-7)
    _caps(p)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("bound", help="evaluate a size bound")
    bsub = p.add_subparsers(dest="which", required=True)
    b = bsub.add_parser("dfa-upper")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--delta", type=float, required=True)
    for name in ("dim-lower", "qk-lower"):
        b = bsub.add_parser(name)
        b.add_argument("--dfa-states", type=int, required=True)
        b.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("isolation", help="estimate cut-point isolation on short strings")
    p.add_argument("file")
    p.add_argument("--dfa", required=True)
    p.add_argument("--cutpoint", type=float, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_isolation)

    p = sub.add_parser("separation", help="audit vec separation across Nerode classes")
    p.add_argument("file")
    p.add_argument("--dfa", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_separation)

    p = sub.add_parser("minimize", help="minimise a DFA")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("gen", help="generate a random model")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    _caps(p)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (FormatError, ModelStructureError, UsageError, OracleCapError, bounds.BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
