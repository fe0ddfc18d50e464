"""Command-line entry point: ``z2hc {gen,hc,sweep,critical,search,batch}``.

Exit codes: 0 success (or HC found), 1 no HC found, 2 usage error,
3 resource cap exceeded, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import InvalidArgumentError, Z2HCError

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE, EXIT_NUMERIC = 0, 1, 2, 3, 4

FORMATS = """\
file formats:
  graph     text; '#' comments; first line 'N_v N_e'; then one 'u v' edge per line (0-based)
  trace     CSV with header g,energy,z,x,err_bound (reverse sweeps add a lambda column)
  critical  JSON with g_c_H, g_c_Z, lambda_c_H, lambda_c_Z, window, range, flags
  journal   JSON lines, one sample record per line, in <output-dir>/journal.jsonl
  plots     SVG plus a CSV of the plotted points, in <output-dir>/plots/
"""


def _default_spec() -> Path:
    return Path(str(resources.files("z2hc") / "specs" / "desk_ne18.json"))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


GLOBAL_DEFAULTS = {"seed": 0, "threads": None, "output_dir": Path("."), "qubit_cap": None, "backend": "sector", "verbose": False}


def _global_flags(p: argparse.ArgumentParser, defaults: dict) -> None:
    p.add_argument("--seed", type=int, default=defaults["seed"], help="master RNG seed (default 0)")
    p.add_argument("--threads", type=_positive_int, default=defaults["threads"], help="numba worker threads")
    p.add_argument("--output-dir", type=Path, default=defaults["output_dir"], help="directory for written files")
    p.add_argument("--qubit-cap", type=_positive_int, default=defaults["qubit_cap"], help="largest full state vector (qubits)")
    p.add_argument("--backend", choices=("sector", "statevector"), default=defaults["backend"],
                   help="evolution engine: gauge-invariant sector (default) or full state vector")
    p.add_argument("-v", "--verbose", action="store_true", default=defaults["verbose"])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="z2hc",
        description="Z2 lattice gauge theory on graphs and adiabatic Hamiltonian cycle search.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"z2hc {__version__}")
    _global_flags(p, GLOBAL_DEFAULTS)
    p.set_defaults(**GLOBAL_DEFAULTS)
    # the same flags are accepted after the subcommand; unset ones keep the global value
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, {k: argparse.SUPPRESS for k in GLOBAL_DEFAULTS})
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, text):
        return sub.add_parser(name, help=text, parents=[common])

    g = add("gen", "generate random connected graphs (or a torus)")
    g.add_argument("--nv", type=int, default=9)
    g.add_argument("--ne", type=int, default=18)
    g.add_argument("--count", type=_positive_int, default=1)
    g.add_argument("--torus", metavar="RxC", help="write the R x C torus instead of random graphs")
    g.add_argument("--out", type=Path, default=None, help="target directory (default --output-dir)")

    h = add("hc", "count Hamiltonian cycles and closed-string configurations")
    h.add_argument("graph", type=Path)
    h.add_argument("--method", choices=("backtrack", "held_karp", "cycle_space"), default="backtrack")

    s = add("sweep", "adiabatic sweep, writes a trace CSV")
    s.add_argument("graph", type=Path)
    _schedule_flags(s)
    s.add_argument("--direction", choices=("forward_g", "reverse_lambda"), default="forward_g")
    s.add_argument("--trace-out", type=Path, default=None)
    s.add_argument("--plot", action="store_true", help="also write an SVG of the trace")

    c = add("critical", "critical couplings from a forward trace")
    c.add_argument("trace", type=Path)
    c.add_argument("--window", type=int, default=11)
    c.add_argument("--range", nargs=2, type=float, default=(0.05, 1.0), metavar=("GMIN", "GMAX"))
    c.add_argument("--out", type=Path, default=None)

    r = add("search", "sample the prepared state for Hamiltonian cycles")
    r.add_argument("graph", type=Path)
    r.add_argument("--shots", type=_positive_int, default=10000)
    r.add_argument("--g", type=float, default=0.0, help="sweep up to this coupling first (0 = condensate)")
    _schedule_flags(r, with_gmax=False)

    b = add("batch", "ensemble study from a JSON spec")
    b.add_argument("spec", type=Path, nargs="?", default=None, help="ensemble spec (default: shipped desk-scale spec)")
    b.add_argument("--paper-scale", action="store_true", help="full sample counts and schedule (very long)")
    b.add_argument("--workers", type=_positive_int, default=None)
    return p


def _schedule_flags(p: argparse.ArgumentParser, with_gmax: bool = True) -> None:
    p.add_argument("--gs", type=float, default=0.001, help="coupling step (default 0.001)")
    p.add_argument("--ts", type=float, default=0.1, help="evolution time per step (default 0.1)")
    p.add_argument("--n", type=int, default=100, help="Trotter substeps per step (default 100)")
    if with_gmax:
        p.add_argument("--gmax", type=float, default=1.0, help="final coupling (or lambda) (default 1)")


def _configure(args) -> None:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads is not None:
        import numba

        if args.threads > numba.config.NUMBA_NUM_THREADS:
            raise InvalidArgumentError(f"--threads {args.threads} exceeds the {numba.config.NUMBA_NUM_THREADS} available")
        numba.set_num_threads(args.threads)


def _cap(args) -> int:
    from .statevector.full import QUBIT_CAP

    return args.qubit_cap or QUBIT_CAP


def _parse_torus(text: str) -> tuple[int, int]:
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise InvalidArgumentError(f"--torus expects RxC, got {text!r}") from None
    return r, c


def cmd_gen(args) -> int:
    from .graph_core import random_connected_graph, torus_graph, write_graph

    out = args.out or args.output_dir
    if args.torus:
        graphs = [torus_graph(*_parse_torus(args.torus))]
    else:
        graphs = [random_connected_graph(args.nv, args.ne, [args.seed, i]) for i in range(args.count)]
    out.mkdir(parents=True, exist_ok=True)
    for graph in graphs:
        path = out / f"{graph.digest}.graph"
        write_graph(graph, path)
        print(f"{graph.digest} {graph.n_vertices} {graph.n_edges} {path}")
    return EXIT_OK


def cmd_hc(args) -> int:
    from .graph_core import count_hamiltonian_cycles, count_hc_via_cycle_space, cycle_space_basis, read_graph

    graph = read_graph(args.graph)
    if args.method == "cycle_space":
        n_hc = count_hc_via_cycle_space(graph)
    else:
        n_hc = count_hamiltonian_cycles(graph, args.method)
    print(f"N_hc={n_hc} S0={cycle_space_basis(graph).size}")
    return EXIT_OK


def _schedule(args, direction="forward_g", endpoint=None):
    from .adiabatic import Schedule

    return Schedule(direction, args.gs, args.ts, args.n, args.gmax if endpoint is None else endpoint)


def cmd_sweep(args) -> int:
    from .adiabatic import run_sweep
    from .graph_core import read_graph

    graph = read_graph(args.graph)
    schedule = _schedule(args, args.direction)
    trace = run_sweep(graph, schedule, args.backend, _cap(args))
    out = args.trace_out or args.output_dir / f"{graph.digest}.trace.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out)
    last = trace.rows[-1]
    print(f"rows={len(trace.rows)} final: g={last.g:.6g} energy={last.energy:.10g} err_bound={last.err_bound:.3e} -> {out}")
    if args.plot:
        from .experiments import emit_plots

        emit_plots(trace, "trace", out.with_name(out.stem + ".plot.svg"))
    return EXIT_OK


def cmd_critical(args) -> int:
    from .adiabatic import read_trace_csv
    from .critical import detect_critical

    report = detect_critical(read_trace_csv(args.trace), args.window, tuple(args.range)).to_json()
    if args.out:
        args.out.write_text(report + "\n", encoding="utf-8")
    print(report)
    return EXIT_OK


def cmd_search(args) -> int:
    from .adiabatic import make_engine, run_forward_sweep
    from .graph_core import read_graph
    from .statevector import hc_search

    graph = read_graph(args.graph)
    if args.g < 0:
        raise InvalidArgumentError("--g must be >= 0")
    if args.g == 0:
        state = make_engine(graph, args.backend, _cap(args)).condensate()
    else:
        final = {}
        run_forward_sweep(graph, _schedule(args, endpoint=args.g), args.backend, _cap(args),
                          on_step=lambda k, g, st: final.update(state=st))
        state = final["state"]
    res = hc_search(state, graph, args.shots, args.seed)
    if not res.found:
        print(f"not found (shots={res.shots})")
        return EXIT_NEGATIVE
    bits = format(res.witness, f"0{graph.n_edges}b")[::-1]  # character l is edge l
    edges = [graph.edges[l] for l in range(graph.n_edges) if res.witness >> l & 1]
    print(f"witness={bits} hits={res.hc_hit_count}/{res.shots} edges={' '.join(f'{u}-{v}' for u, v in edges)}")
    return EXIT_OK


def cmd_batch(args) -> int:
    from .experiments import EnsembleSpec, run_batch

    with open(args.spec or _default_spec(), encoding="utf-8") as fh:
        raw = json.load(fh)
    if args.paper_scale:
        raw["paper_scale"] = True
        print("WARNING: full-scale batch: full sample counts and the fine schedule; this runs for days "
              "on desk hardware", file=sys.stderr)
    spec = EnsembleSpec.from_dict(raw)
    records, summary, files = run_batch(spec, args.output_dir, args.workers)
    print(f"records={len(records)} flagged={summary.get('n_flagged', 0)} plots={sum(1 for f in files if f.suffix == '.svg')}"
          f" journal={args.output_dir / 'journal.jsonl'}")
    for name in ("sqrt_nhc_fit", "spearman"):
        if name in summary:
            print(f"{name}: {json.dumps(summary[name], sort_keys=True)}")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "hc": cmd_hc, "sweep": cmd_sweep, "critical": cmd_critical, "search": cmd_search, "batch": cmd_batch}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _configure(args)
        return COMMANDS[args.command](args)
    except Z2HCError as exc:
        print(f"z2hc {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"z2hc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())
