"""Command line front end.

Every subcommand writes its CSV outputs plus a ``<command>_manifest.json``
into ``--out``.  Outputs depend only on the inputs, the numerical settings and
the seed, never on ``--threads``.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

from . import __version__
from .analysis import (
    Linkage,
    agglomerate,
    log_histogram,
    rank_by_topic,
    read_topics,
    write_clusters_csv,
)
from .coupling import coupling_table, write_coupling_csv
from .errors import CiteResistError, DisconnectedError, InputError, NumericError
from .exact import exact_all_pairs
from .graph import (
    Weighting,
    build_graph,
    parse_edge_list,
    prune_singleton_sources,
    read_edge_list,
    weigh,
)
from .matrix import DistanceMatrix, fmt
from .resistance import SolverConfig, Sweep, all_pairs_resistance, resistance_between
from .sampling import (
    SamplerConfig,
    estimate_distribution,
    write_estimate_csv,
    write_samples_csv,
)

# excluded from the manifest so that outputs are identical across machines
# and thread counts
_VOLATILE = {"threads", "out", "func"}


def _delimiter(text: str) -> str:
    named = {"tab": "\t", "\\t": "\t", "comma": ",", "space": " "}
    return named.get(text, text)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict[str, str]:
    out = {"citeresist": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            pass
    return out


def _write_manifest(args, inputs: list, outputs: list[str]) -> None:
    config = {
        k: (v.value if hasattr(v, "value") else v)
        for k, v in sorted(vars(args).items())
        if k not in _VOLATILE
    }
    manifest = {
        "command": args.command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs if p},
        "outputs": outputs,
        "versions": _versions(),
    }
    path = Path(args.out) / f"{args.command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _open_out(args, name: str):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return open(out / name, "w", newline="", encoding="utf-8")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(args.epsilon, args.max_iter, Sweep(args.sweep))


def _load(args):
    if not args.input:
        raise InputError("--input is required for this command")
    raw = build_graph(read_edge_list(args.input, _delimiter(args.delimiter)))
    pruned, report = prune_singleton_sources(raw)
    g = weigh(pruned, Weighting(args.weighting))
    return raw, g, report


def _read_matrix(path) -> DistanceMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        return DistanceMatrix.from_csv(fh)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_distances(args) -> int:
    t0 = time.perf_counter()
    raw, g, report = _load(args)
    if args.exact:
        m = exact_all_pairs(g)
    else:
        m = all_pairs_resistance(g, None, _solver_config(args), args.threads)
    with _open_out(args, "distances.csv") as fh:
        m.to_csv(fh)
    with _open_out(args, "pruning.csv") as fh:
        report.to_csv(fh)
    _write_manifest(args, [args.input], ["distances.csv", "pruning.csv"])
    _log(
        f"nodes {raw.n_nodes} -> {g.n_nodes} after pruning "
        f"({len(report.singleton_sources)} singleton sources, "
        f"{len(report.isolated_papers)} isolated papers); "
        f"edges {g.n_edges}; papers {m.n}; pairs {len(m)}; "
        f"{time.perf_counter() - t0:.2f}s"
    )
    if not m.all_converged:
        _log(f"warning: {int((~m.converged).sum())} pair(s) did not converge")
        return NumericError.exit_code
    return 0


def cmd_pair(args) -> int:
    _, g, _ = _load(args)
    r = resistance_between(g, args.p, args.q, _solver_config(args))
    header = "paper_a,paper_b,resistance,lower,upper,iterations,converged\n"
    row = (
        f"{args.p},{args.q},{fmt(r.resistance)},{fmt(r.lower_bound)},"
        f"{fmt(r.upper_bound)},{r.iterations},{'true' if r.converged else 'false'}\n"
    )
    sys.stdout.write(header + row)
    with _open_out(args, "pair.csv") as fh:
        fh.write(header + row)
    _write_manifest(args, [args.input], ["pair.csv"])
    return 0 if r.converged else NumericError.exit_code


def cmd_sample(args) -> int:
    _, g, _ = _load(args)
    eps = args.sample_epsilon if args.sample_epsilon is not None else args.epsilon
    cfg = SamplerConfig(eps, args.streak, args.seed)
    est, rows = estimate_distribution(g, None, cfg, _solver_config(args), args.threads)
    with _open_out(args, "sample_estimate.csv") as fh:
        write_estimate_csv(fh, est, args.seed)
    with _open_out(args, "sample_distances.csv") as fh:
        write_samples_csv(fh, rows, args.seed)
    _write_manifest(args, [args.input], ["sample_estimate.csv", "sample_distances.csv"])
    _log(f"sampled {est.n} of {est.N} pairs; mean {fmt(est.mean)}; S_R {fmt(est.std_error)}")
    return 0


def cmd_rank(args) -> int:
    m = _read_matrix(args.matrix)
    with open(args.topics, newline="", encoding="utf-8") as fh:
        topics = read_topics(fh)
    if args.label not in topics:
        raise InputError(
            f"unknown topic label {args.label!r}; available: {', '.join(sorted(topics))}"
        )
    result = rank_by_topic(m, topics[args.label])
    with _open_out(args, "ranking.csv") as fh:
        result.to_csv(fh)
    _write_manifest(args, [args.matrix, args.topics], ["ranking.csv"])
    return 0


def _explicit_pairs(path, delimiter):
    with open(path, "rb") as fh:
        return parse_edge_list(fh, delimiter)


def cmd_couple(args) -> int:
    _, g, _ = _load(args)
    if args.pairs == "all":
        papers = [g.ids[i] for i in g.papers]
        pairs = list(itertools.combinations(papers, 2))
        inputs = [args.input]
    else:
        pairs = _explicit_pairs(args.pairs, _delimiter(args.delimiter))
        inputs = [args.input, args.pairs]
    rows = coupling_table(g, pairs)
    with _open_out(args, "coupling.csv") as fh:
        write_coupling_csv(fh, rows)
    _write_manifest(args, inputs, ["coupling.csv"])
    return 0


def cmd_cluster(args) -> int:
    m = _read_matrix(args.matrix)
    if not 1 <= args.k <= m.n:
        raise InputError(f"--k must lie in [1, {m.n}]")
    dendro, labels = agglomerate(m, Linkage(args.linkage), args.k, args.ward_squared)
    with _open_out(args, "dendrogram.csv") as fh:
        dendro.to_csv(fh)
    with _open_out(args, "clusters.csv") as fh:
        write_clusters_csv(fh, m.ids, labels)
    _write_manifest(args, [args.matrix], ["dendrogram.csv", "clusters.csv"])
    return 0


def cmd_histogram(args) -> int:
    m = _read_matrix(args.matrix)
    hist = log_histogram(m, args.bins)
    with _open_out(args, "histogram.csv") as fh:
        hist.to_csv(fh)
    _write_manifest(args, [args.matrix], ["histogram.csv"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="edge list: citing_id<delim>cited_id per line")
    common.add_argument("--delimiter", default="\t", help="column delimiter (default: tab)")
    common.add_argument(
        "--weighting", choices=[w.value for w in Weighting], default="geodeg"
    )
    common.add_argument("--epsilon", type=float, default=0.1, help="bound-gap tolerance")
    common.add_argument("--max-iter", type=int, default=100_000)
    common.add_argument("--sweep", choices=[s.value for s in Sweep], default="jacobi")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="citeresist-out", help="output directory")

    parser = argparse.ArgumentParser(
        prog="citeresist",
        description="Resistance distances between papers in citation networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distances", parents=[common], help="all paper-pair distances")
    p.add_argument("--exact", action="store_true", help="dense exact solve (small graphs)")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("pair", parents=[common], help="resistance between two nodes")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("sample", parents=[common], help="sampled distance distribution")
    p.add_argument("--sample-epsilon", type=float, default=None,
                   help="stop when S_R < this/10 (default: --epsilon)")
    p.add_argument("--streak", type=int, default=10)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("rank", parents=[common], help="rank papers against a topic")
    p.add_argument("--matrix", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--label", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("couple", parents=[common], help="bibliographic coupling measures")
    p.add_argument("--pairs", default="all", help="'all' or a two-column pair file")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("cluster", parents=[common], help="hierarchical clustering")
    p.add_argument("--matrix", required=True)
    p.add_argument("--linkage", choices=[x.value for x in Linkage], default="ward")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ward-squared", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("histogram", parents=[common], help="histogram of log distances")
    p.add_argument("--matrix", required=True)
    p.add_argument("--bins", type=int, default=30)
    p.set_defaults(func=cmd_histogram)
    return parser


def _report_components(exc: DisconnectedError) -> None:
    for label, ids in sorted(exc.components.items()):
        shown = ", ".join(ids[:5]) + (" ..." if len(ids) > 5 else "")
        _log(f"  component {label}: {len(ids)} paper(s): {shown}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        _log("error: --threads must be at least 1")
        return InputError.exit_code
    try:
        return args.func(args)
    except DisconnectedError as exc:
        _log(f"error: {exc}")
        _report_components(exc)
        return exc.exit_code
    except CiteResistError as exc:
        _log(f"error: {exc}")
        return exc.exit_code
    except OSError as exc:
        _log(f"error: {exc}")
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
