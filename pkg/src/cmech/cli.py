"""Command-line front end: ``cmech <command> ...``.

Exit codes: 0 success, 1 verify found a counterexample, 2 usage,
3 resource guard, 4 data error, 5 not determinizable at this horizon.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import machine as mach
from .derivation import DEFAULT_TOL, derive_epsilon_machine
from .errors import CMechError, DeterminizationDiverged, SequenceTooShort
from .information import empirical_entropy_report, entropy_report
from .oracle import verify_all
from .process import PRESETS, Alphabet, load_process, sample
from .reconstruction import reconstruct


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _probability(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {value}")
    return value


def read_data(source: str, fmt: str = "auto"):
    """Read a symbol sequence; returns ``(alphabet, word)``.

    ``tokens`` splits on whitespace, ``chars`` takes every non-space
    character as a symbol. ``auto`` picks chars when the text is a single
    field or every field is one character long.
    """
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    fields = text.split()
    if fmt == "auto":
        fmt = "chars" if len(fields) <= 1 or all(len(f) == 1 for f in fields) else "tokens"
    tokens = list("".join(fields)) if fmt == "chars" else fields
    if not tokens:
        raise SequenceTooShort(f"no symbols in {source!r}")
    alphabet = Alphabet(tuple(sorted(set(tokens))))
    return alphabet, alphabet.encode(tokens)


def _emit(text: str, dest: str | None):
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def cmd_generate(args):
    spec = load_process(args.process)
    word = sample(spec, args.n, args.seed)
    fmt = args.format or ("chars" if spec.alphabet.single_char else "tokens")
    if fmt == "chars" and not spec.alphabet.single_char:
        raise argparse.ArgumentTypeError("chars format needs single-character symbols")
    sep = "" if fmt == "chars" else " "
    _emit(sep.join(spec.alphabet.symbols[s] for s in word) + "\n", args.output)
    print(
        f"alphabet: {' '.join(spec.alphabet.symbols)}  length: {args.n}  seed: {args.seed}",
        file=sys.stderr,
    )
    return 0


def cmd_analyze(args):
    if args.process:
        report = entropy_report(load_process(args.process), args.L_max)
    else:
        alphabet, word = read_data(args.data, args.format)
        report = empirical_entropy_report(word, len(alphabet), args.L_max)
    print("\n".join(report.lines()))
    return 0


def _write_machine(m, args):
    out = sys.stdout
    if args.output == "-":
        out = sys.stderr
    elif args.output:
        Path(args.output).write_text(mach.dumps(m))
    print(m.summary(), file=out)
    if args.output == "-":
        sys.stdout.write(mach.dumps(m))


def cmd_derive(args):
    spec = load_process(args.process)
    m = derive_epsilon_machine(spec, args.K, args.L, args.tol)
    _write_machine(m, args)
    if m.transient_histories:
        decoded = ", ".join(m.alphabet.decode(h) for h in m.transient_histories)
        print(f"transient histories: {decoded}", file=sys.stderr)
    return 0


def cmd_reconstruct(args):
    alphabet, word = read_data(args.data, args.format)
    try:
        m, diag = reconstruct(word, args.K, args.L, args.alpha, args.min_count, alphabet)
    except DeterminizationDiverged as exc:
        if exc.partial is not None and args.output not in (None, "-"):
            Path(args.output).write_text(mach.dumps(exc.partial))
        raise
    _write_machine(m, args)
    out = sys.stderr if args.output == "-" else sys.stdout
    print("diagnostics:", file=out)
    for line in diag.lines(alphabet.decode):
        print("  " + line, file=out)
    return 0


def cmd_verify(args):
    spec = load_process(args.process)
    report = verify_all(spec, args.K, args.L)
    sys.stdout.write(report.to_text(spec.alphabet.decode))
    return 0 if report.all_hold else 1


def cmd_export(args):
    m = mach.loads(Path(args.machine).read_text())
    _emit(mach.to_dot(m), args.dot)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="cmech", description="Build and audit epsilon-machines.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)
    procs = f"preset ({', '.join(sorted(PRESETS))}) or spec file"

    g = sub.add_parser("generate", help="sample a sequence from a process")
    g.add_argument("--process", required=True, help=procs)
    g.add_argument("-n", type=_positive, required=True, help="sequence length")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=["tokens", "chars"])
    g.add_argument("-o", "--output", help="output file (default stdout)")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="block entropies and E(L) estimates")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--process", help=procs)
    src.add_argument("--data", help="data file, '-' for stdin")
    a.add_argument("--L-max", dest="L_max", type=_positive, default=4)
    a.add_argument("--format", choices=["auto", "tokens", "chars"], default="auto")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("derive", help="exact epsilon-machine of a known process")
    d.add_argument("--process", required=True, help=procs)
    d.add_argument("-K", type=_positive, required=True, help="history length")
    d.add_argument("-L", type=_positive, required=True, help="future length")
    d.add_argument("--tol", type=float, default=DEFAULT_TOL)
    d.add_argument("-o", "--output", help="write machine JSON here ('-' for stdout)")
    d.set_defaults(func=cmd_derive)

    r = sub.add_parser("reconstruct", help="epsilon-machine from sampled data")
    r.add_argument("--data", required=True, help="data file, '-' for stdin")
    r.add_argument("--format", choices=["auto", "tokens", "chars"], default="auto")
    r.add_argument("-K", type=_positive, required=True)
    r.add_argument("-L", type=_positive, required=True)
    r.add_argument("--alpha", type=_probability, default=0.05)
    r.add_argument("--min-count", dest="min_count", type=_positive, default=10)
    r.add_argument("-o", "--output", help="write machine JSON here ('-' for stdout)")
    r.set_defaults(func=cmd_reconstruct)

    v = sub.add_parser("verify", help="exhaustive optimality checks over all partitions")
    v.add_argument("--process", required=True, help=procs)
    v.add_argument("-K", type=_positive, required=True)
    v.add_argument("-L", type=_positive, required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="render a saved machine as Graphviz DOT")
    e.add_argument("--machine", required=True, help="machine JSON file")
    e.add_argument("--dot", default="-", help="DOT output file (default stdout)")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CMechError as exc:
        print(f"cmech: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        print(f"cmech: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"cmech: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
