"""Command-line front end.

Payloads (JSON or CSV) go to standard output or ``--out``; a one-line human
summary goes to standard error.  Exit status: 0 success, 1 verification
failure, 2 usage error, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import dynamics, ghostdet, involution, pfaffian, prescribed
from .errors import InvalidArgument, ResourceLimit
from .ghostdet import FinalState
from .serialize import dumps, fmt, load_graph, state_to_json
from .spacetime import (
    DEFAULT_PATH_CAP,
    Configuration,
    check_consecutive_collision_property,
    check_crossing_property,
    lattice_instance,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

STATE_HELP = """\
final states are written as comma-separated fields:
  k=K                        number of ghost pairs (optional, checked)
  survivors=Y1,Y2,...        survivor positions in increasing order
  ghosts=(A1,B1);(A2,B2)     ordered ghost-pair positions
e.g.  k=0,survivors=0,2   or   k=1,survivors=3,ghosts=(1,5)
On a lattice positions are integers at the final time; with --graph they
are vertex ids."""

_FIELD = re.compile(r"(?:^|,)\s*(k|survivors|ghosts)\s*=")


@dataclass
class RunConfig:
    """Validated inputs shared by the subcommands."""

    graph: object
    sources: tuple
    targets: tuple
    vertex: object  # label -> vertex
    label: object  # vertex -> label
    starts: tuple | None = None
    t: int | None = None
    states: list = field(default_factory=list)


def parse_state(text: str, vertex=lambda v: v, cast=int) -> FinalState:
    """Parse the state mini-language described in :data:`STATE_HELP`."""
    matches = list(_FIELD.finditer(text))
    if not matches or matches[0].start() != 0:
        raise InvalidArgument(f"cannot parse state {text!r}")
    fields: dict[str, str] = {}
    for m, nxt in zip(matches, matches[1:] + [None]):
        name = m.group(1)
        if name in fields:
            raise InvalidArgument(f"field {name!r} given twice in {text!r}")
        fields[name] = text[m.end() : nxt.start() if nxt else len(text)].strip()
    try:
        survivors = [vertex(cast(y.strip())) for y in fields.get("survivors", "").split(",") if y.strip()]
        pairs = []
        for chunk in filter(None, (c.strip() for c in fields.get("ghosts", "").split(";"))):
            inner = re.fullmatch(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)", chunk)
            if not inner:
                raise InvalidArgument(f"ghost pair must look like (a,b): {chunk!r}")
            pairs.append((vertex(cast(inner.group(1))), vertex(cast(inner.group(2)))))
        state = FinalState(tuple(survivors), tuple(pairs))
        if "k" in fields and int(fields["k"]) != state.k:
            raise InvalidArgument(f"k={fields['k']} but {state.k} ghost pairs given")
    except ValueError as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"cannot parse state {text!r}: {exc}") from None
    return state


def _parse_positions(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise InvalidArgument(f"expected comma-separated integers, got {text!r}") from None


def build_config(args, same_parity: bool = True) -> RunConfig:
    if args.lattice is not None:
        if args.t is None:
            raise InvalidArgument("--t is required with --lattice")
        starts = _parse_positions(args.lattice)
        inst = lattice_instance(starts, args.t, same_parity=same_parity)
        cfg = RunConfig(
            inst.graph,
            inst.sources,
            inst.targets,
            vertex=inst.vertex,
            label=lambda v: v[0],
            starts=starts,
            t=args.t,
        )
        cast = int
    else:
        graph, data = load_graph(args.graph)
        sources = args.sources.split(",") if args.sources else data.get("sources")
        if not sources:
            raise InvalidArgument("graph runs need --sources or a 'sources' list in the file")
        targets = data.get("targets") or [v for v in graph.vertices if not graph.successors(v)]
        if "lattice" in data:
            # lattice files address sources by position at time 0, everything else at the horizon
            horizon = int(data["lattice"]["horizon"])
            start = [(int(p), 0) for p in sources]
            end = [v if isinstance(v, tuple) else (int(v), horizon) for v in targets]
            cfg = RunConfig(
                graph, tuple(start), tuple(end), vertex=lambda p: (p, horizon), label=lambda v: v[0], t=horizon
            )
            cast = int
        else:
            cfg = RunConfig(
                graph,
                tuple(str(s) for s in sources),
                tuple(str(t) for t in targets),
                vertex=str,
                label=str,
            )
            cast = str
        for v in cfg.sources + cfg.targets:
            graph.check_vertex(v)
    for text in args.state or []:
        cfg.states.append(parse_state(text, cfg.vertex, cast))
    if getattr(args, "all_states", False):
        cfg.states.extend(ghostdet.enumerate_final_states(cfg.targets, len(cfg.sources)))
    return cfg


def _emit(args, payload, rows=None) -> None:
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = dumps(payload) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _state_text(state: FinalState, label) -> str:
    d = state_to_json(state, label)
    ghosts = ";".join(f"({a},{b})" for a, b in d["ghost_pairs"])
    return f"k={d['k']},survivors={','.join(map(str, d['survivors']))},ghosts={ghosts}"


def cmd_weight(args) -> int:
    cfg = build_config(args)
    if not cfg.states:
        raise InvalidArgument("give at least one --state or --all-states")
    results = []
    for state in cfg.states:
        z = ghostdet.final_state_weight(cfg.graph, cfg.sources, state)
        if args.all_states and not args.state and not z:
            continue
        results.append((state, z))
    payload = {"weights": [{"state": state_to_json(s, cfg.label), "weight": fmt(z)} for s, z in results]}
    _emit(args, payload, [["state", "weight"]] + [[_state_text(s, cfg.label), fmt(z)] for s, z in results])
    for s, z in results[:20]:
        print(fmt(z) if len(results) == 1 else f"{_state_text(s, cfg.label)}: {fmt(z)}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.lattice is None:
        raise InvalidArgument("compare needs --lattice (the oracle simulates lattice walkers)")
    cfg = build_config(args)
    table = dynamics.annihilation_distribution(cfg.starts, cfg.t, cap=args.cap, workers=args.workers)
    mismatches = []
    formula_total = Fraction(0)
    rows = [["state", "oracle", "formula", "match"]]
    for state, p in table.items():
        z = ghostdet.final_state_weight(cfg.graph, cfg.sources, state)
        if args.corrupt_formula:
            z += Fraction(1, 2 ** (len(cfg.starts) * cfg.t + 1))
        formula_total += z
        rows.append([_state_text(state, cfg.label), fmt(p), fmt(z), str(p == z).lower()])
        if p != z:
            mismatches.append({"state": state_to_json(state, cfg.label), "oracle": fmt(p), "formula": fmt(z)})
    total = table.total()
    payload = {
        "starts": list(cfg.starts),
        "t": cfg.t,
        "states": len(table),
        "mismatches": mismatches,
        "total": fmt(total),
        "formula_total": fmt(formula_total),
    }
    failed = bool(mismatches) or total != 1 or formula_total != 1
    summary = f"states: {len(table)}, mismatches: {len(mismatches)}, total: {fmt(total)}"
    if args.pfaffian:
        if len(cfg.starts) % 2:
            raise InvalidArgument("--pfaffian needs an even number of walkers")
        pf = pfaffian.pairwise_coalescence_weight(cfg.graph, cfg.sources, cfg.targets)
        complete = table.marginal_k(len(cfg.starts) // 2)
        coal = dynamics.pairwise_coalescence_probability(cfg.starts, cfg.t, cap=args.cap)
        payload["pfaffian"] = {
            "pfaffian": fmt(pf),
            "complete_annihilation": fmt(complete),
            "pairwise_coalescence": fmt(coal),
            "equal": pf == complete == coal,
        }
        failed = failed or not (pf == complete == coal)
        summary += f"\npfaffian: {fmt(pf)} complete_annihilation: {fmt(complete)} pairwise_coalescence: {fmt(coal)}"
    _emit(args, payload, rows)
    print(summary, file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_audit(args) -> int:
    cfg = build_config(args, same_parity=False)
    config = Configuration(cfg.sources, cfg.targets, cfg.t)
    p1 = check_crossing_property(cfg.graph, config, DEFAULT_PATH_CAP)
    p2 = check_consecutive_collision_property(cfg.graph, config, DEFAULT_PATH_CAP)
    payload = {"planarity": {"crossing": p1.holds, "consecutive_collision": p2.holds}}
    if not (p1.holds and p2.holds):
        payload["planarity"]["violations"] = (p1.violations + p2.violations)[:10]
        _emit(args, payload)
        print(
            f"refused: configuration is not planar (P1 holds: {p1.holds}, P2 holds: {p2.holds})",
            file=sys.stderr,
        )
        return EXIT_FAIL
    if not cfg.states:
        raise InvalidArgument("give at least one --state or --all-states")
    if cfg.starts is not None:
        if len(cfg.starts) * cfg.t > args.cap:
            raise ResourceLimit(f"n*t = {len(cfg.starts) * cfg.t} exceeds the enumeration cap {args.cap}")
        perf_table = involution.lattice_performance_table(cfg.starts, cfg.t, cfg.graph)
    else:
        perf_table = None
    total = involution.AuditReport(performances=0 if perf_table is not None else None)
    audited = 0
    for state in cfg.states:
        perfs = perf_table.get(state, []) if perf_table is not None else None
        report = involution.audit_involution(cfg.graph, cfg.sources, state, performances=perfs)
        audited += 1
        total.checked += report.checked
        total.fixed_points += report.fixed_points
        total.paired += report.paired
        if perfs is not None:
            total.performances += len(perfs)
        for v in report.violations:
            total.violations.append({"state": state_to_json(state, cfg.label), **v})
    payload.update(total.to_json())
    payload["states"] = audited
    _emit(args, payload)
    print(
        f"states: {audited}, castings: {total.checked}, fixed_points: {total.fixed_points}, "
        f"paired: {total.paired}, violations: {len(total.violations)}",
        file=sys.stderr,
    )
    return EXIT_FAIL if total.violations else EXIT_OK


def _parse_tuples(text: str) -> list[tuple[int, ...]]:
    return [_parse_positions(chunk.strip("() ")) for chunk in text.split(";") if chunk.strip()]


def cmd_prescribed(args) -> int:
    tuples = _parse_tuples(args.tuples) if args.tuples else None
    report = prescribed.reproduce_appendix(tuples, pooled_horizons=() if args.no_pooled else (1, 2, 3, 4, 5))
    _emit(args, report)
    if tuples is None:
        print(
            f"inconsistent: {str(report['inconsistent']).lower()}; minimal: {str(report['minimal']).lower()}",
            file=sys.stderr,
        )
        if "pooled_horizons" in report:
            pooled = report["pooled_horizons"]
            print(
                f"pooled horizons {pooled['horizons']}: "
                f"{'consistent' if pooled['result']['consistent'] else 'inconsistent'}",
                file=sys.stderr,
            )
        return EXIT_OK if report["minimal"] else EXIT_FAIL
    print("inconsistent" if report["inconsistent"] else "consistent", file=sys.stderr)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, graph_allowed: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lattice", metavar="P1,P2,...", help="start positions of +-1 walkers on Z")
    if graph_allowed:
        src.add_argument("--graph", metavar="FILE", help="graph specification (JSON)")
        p.add_argument("--sources", metavar="ID,ID,...", help="source vertex ids for --graph")
    p.add_argument("--t", type=int, help="number of time steps (lattice)")
    p.add_argument("--state", action="append", metavar="SPEC", help="final state (repeatable); see below")
    p.add_argument("--all-states", action="store_true", help="every final state over the targets")
    p.add_argument("--cap", type=int, default=dynamics.DEFAULT_ENUMERATION_CAP, help="max n*t for enumeration")
    p.add_argument("--out", metavar="FILE", help="write the payload here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostwalk",
        description="Exact annihilation and coalescence weights for walkers on spacetime graphs.",
        epilog=STATE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    kw = dict(epilog=STATE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)

    p = sub.add_parser("weight", help="annihilation weight of final states", **kw)
    _add_common(p)
    p.set_defaults(func=cmd_weight)

    p = sub.add_parser("compare", help="formula vs brute-force oracle", **kw)
    _add_common(p, graph_allowed=False)
    p.add_argument("--pfaffian", action="store_true", help="also run the Pfaffian three-way check")
    p.add_argument("--workers", type=int, default=1, help="processes for the oracle enumeration")
    p.add_argument("--corrupt-formula", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("audit", help="planarity checks and the involution audit", **kw)
    _add_common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("prescribed", help="prescribed-annihilation linear system (n=3, t=4)")
    p.add_argument("--tuples", metavar="A,Y,B;...", help="override the tuples, e.g. --tuples=-2,0,2;0,2,4")
    p.add_argument("--no-pooled", action="store_true", help="skip the pooled-horizon system")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_prescribed)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
