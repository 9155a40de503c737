"""Command line front end.

    tcmonoid run FILE [--strategy hlt|felsch|felsch-mod|alt:H,F] [--kind K]
                      [--max-nodes N] [--max-steps N]
                      [--output classes|normal-forms|dot|stats|all]
                      [--order shortlex|lex]
                      [--stephen W [--accepts U ...] | --rees W ...]

Exit status is 0 when the run completes, 2 when a limit stopped it and 1 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import sys

from .enumerator import enumerate_congruence, parse_strategy
from .variants import StephenStatus, run_rees, stephen_build, with_zero_letter
from .word_graph import to_dot
from .words import CongruenceKind, PresentationError, parse_presentation

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_LIMIT = 2

OUTPUTS = ("classes", "normal-forms", "dot", "stats", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tcmonoid", description="Congruence enumeration for finitely presented monoids.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", help="enumerate the congruence described by a presentation file")
    run.add_argument("file")
    run.add_argument("--strategy", default="hlt")
    run.add_argument("--kind", choices=[k.value for k in CongruenceKind])
    run.add_argument("--max-nodes", type=float, default=None)
    run.add_argument("--max-steps", type=float, default=None)
    run.add_argument("--output", choices=OUTPUTS, default="classes")
    run.add_argument("--order", choices=("shortlex", "lex"), default="shortlex")
    run.add_argument("--stephen", metavar="W")
    run.add_argument("--accepts", metavar="U", action="append", default=[])
    run.add_argument("--rees", metavar="W", action="append", default=[])
    return parser


def _count(value, name):
    if value is None:
        return None
    if value != int(value) or value < 1:
        raise UsageError(f"--{name} must be a positive integer")
    return int(value)


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        if args.command != "run":
            raise UsageError("expected a command: run")
        if args.stephen is not None and args.rees:
            raise UsageError("--stephen and --rees cannot be combined")
        if args.accepts and args.stephen is None:
            raise UsageError("--accepts needs --stephen")
        parse_strategy(args.strategy)
        max_nodes = _count(args.max_nodes, "max-nodes")
        max_steps = _count(args.max_steps, "max-steps")
        with open(args.file, encoding="utf-8") as fh:
            p, pairs, kind = parse_presentation(fh.read())
        if args.kind:
            kind = CongruenceKind(args.kind)
        limits = {"max_steps": max_steps}
        if max_nodes is not None:
            limits["max_nodes"] = max_nodes
        if args.stephen is not None:
            return _stephen(p, args, limits, out)
        if args.rees:
            ideal = [p.parse_word(w) for w in args.rees]
            result = run_rees(p, ideal, args.strategy, kind, order=args.order, **limits)
            names = with_zero_letter(p)
        else:
            result = enumerate_congruence(p, pairs, kind, args.strategy, order=args.order, **limits)
            names = p
    except UsageError as e:
        print(f"tcmonoid: usage error: {e}", file=err)
        return EXIT_ERROR
    except (OSError, PresentationError, ValueError) as e:
        print(f"tcmonoid: {e}", file=err)
        return EXIT_ERROR
    return _report(result, names, args.output, out, err)


def _stats_lines(status, stats, extra=()):
    lines = [f"status={status}"]
    lines += [f"{k}={v}" for k, v in extra]
    lines += [f"{k}={v}" for k, v in stats.items()]
    return lines


def _report(result, p, output, out, err) -> int:
    if not result.complete:
        # an unfinished graph has no classes to report
        print(f"tcmonoid: stopped at {result.status.value}", file=err)
        for line in _stats_lines(result.status.value, result.stats, [("graph_nodes", result.graph.num_nodes)]):
            print(line, file=out)
        return EXIT_LIMIT
    forms = [p.format_word(w) for w in result.normal_forms()]
    blocks = []
    if output in ("classes", "all"):
        lines = [f"{result.num_classes} classes"]
        for i, w in enumerate(forms):
            mark = "  (zero)" if i == result.zero_class else ""
            lines.append(f"{i}\t{w}{mark}")
        blocks.append("\n".join(lines))
    if output in ("normal-forms", "all"):
        blocks.append("\n".join(forms))
    if output in ("dot", "all"):
        blocks.append(to_dot(result.graph, forms, p.letter_names()).rstrip("\n"))
    if output in ("stats", "all"):
        extra = [("classes", result.num_classes)]
        if result.zero_class is not None:
            extra.append(("zero_class", result.zero_class))
        blocks.append("\n".join(_stats_lines(result.status.value, result.stats, extra)))
    print("\n\n".join(blocks), file=out)
    return EXIT_OK


def _stephen(p, args, limits, out) -> int:
    w = p.parse_word(args.stephen)
    tests = [(u, p.parse_word(u)) for u in args.accepts]
    g = stephen_build(p, w, **limits)
    status = g.run()
    lines = _stats_lines(status.value, g.stats, [("accept", g.accept)])
    if status is not StephenStatus.CLOSED:
        print("\n".join(lines), file=out)
        return EXIT_LIMIT
    blocks = []
    if tests:
        blocks.append("\n".join(f"{text} {'accepted' if g.accepts(u) else 'rejected'}" for text, u in tests))
    if args.output in ("dot", "all"):
        blocks.append(to_dot(g.graph, None, p.letter_names()).rstrip("\n"))
    if args.output in ("stats", "all") or not blocks:
        blocks.append("\n".join(lines))
    print("\n\n".join(blocks), file=out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
