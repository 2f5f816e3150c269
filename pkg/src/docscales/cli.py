"""Command-line pipeline: graph -> scan -> select -> eval.

Stages share one output directory and communicate only through the files
they write, so the expensive scan stage can be re-run or resumed without
repeating graph construction. All randomness derives from the master seed
recorded in config.json. Exit codes: 0 success, 2 input/validation error,
3 graph-property error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_io
from . import report
from .graph import build_mst_knn, cosine_similarity, load_graph, save_graph
from .kernel import DisconnectedGraphError, build_kernel
from .metrics import coherence_report, nmi, sankey_links, summarize_clusters
from .plots import coherence_figure, sankey_figure, scan_figure
from .scan import ScanResult, TimeGrid, cross_vi_matrix, scan_point, select_scales
from .stability import Partition

EXIT_INPUT = 2
EXIT_GRAPH = 3

GRAPH_EDGES = "graph_edges.csv"
GRAPH_META = "graph_meta.json"
CONFIG_JSON = "config.json"


@dataclass
class RunConfig:
    """Every knob of a pipeline run; serialized into the output directory."""

    vectors: str | None = None
    tokens: str | None = None
    labels: str | None = None
    out: str = "run"
    k: int = 13
    t_min: float = 1e-2
    t_max: float = 1e2
    n_points: int = 100
    n_repeats: int = 500
    master_seed: int = 0
    vi_threshold: float = 0.1
    max_scales: int = 4
    n_workers: int = 1

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.t_min < self.t_max:
            raise ValueError(f"need 0 < t_min < t_max, got [{self.t_min}, {self.t_max}]")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")
        if self.n_repeats < 2:
            raise ValueError(f"n_repeats must be >= 2, got {self.n_repeats}")
        if self.vi_threshold <= 0:
            raise ValueError(f"vi_threshold must be > 0, got {self.vi_threshold}")
        if self.max_scales < 1:
            raise ValueError(f"max_scales must be >= 1, got {self.max_scales}")
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {self.n_workers}")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        _fail(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        _fail(f"config {path} has unknown keys: {sorted(unknown)}")
    return data


def _merge_config(config_path: str | None, cli_values: dict) -> RunConfig:
    cfg = RunConfig()
    for key, value in _load_config_file(config_path).items():
        setattr(cfg, key, value)
    for key, value in cli_values.items():
        if value is not None:
            setattr(cfg, key, value)
    try:
        cfg.validate()
    except ValueError as exc:
        _fail(str(exc))
    return cfg


def _write_config(cfg: RunConfig, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n"
    (outdir / CONFIG_JSON).write_text(payload, encoding="utf-8")


def _fail(message: str, code: int = EXIT_INPUT) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


_shared_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON file with RunConfig fields; explicit flags override it."),
    click.option("--out", default=None, help="Output directory shared by all stages."),
]


def _with_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def main() -> None:
    """Multi-resolution document clustering over a similarity graph."""


@main.command("graph")
@_with_options(_shared_options)
@click.option("--vectors", default=None, help="vectors.csv input path.")
@click.option("--k", type=int, default=None, help="Neighbours per node (default 13).")
def cmd_graph(config_path, out, vectors, k) -> None:
    """Build the MST-kNN similarity graph from document vectors."""
    cfg = _merge_config(config_path, {"out": out, "vectors": vectors, "k": k})
    if cfg.vectors is None:
        _fail("graph stage needs --vectors")
    try:
        corpus = corpus_io.load_vectors(cfg.vectors)
    except (OSError, corpus_io.CorpusFormatError) as exc:
        _fail(str(exc))
    if cfg.k > corpus.n - 1:
        _fail(f"k={cfg.k} out of range for corpus of {corpus.n} documents")
    sim = cosine_similarity(corpus)
    graph = build_mst_knn(sim, cfg.k)
    outdir = Path(cfg.out)
    _write_config(cfg, outdir)
    save_graph(
        graph,
        outdir / GRAPH_EDGES,
        outdir / GRAPH_META,
        corpus.doc_ids,
        params={"k": cfg.k, "distance": "1 - cosine", "method": "mst-knn"},
    )
    click.echo(
        f"graph: {graph.n_nodes} nodes, {graph.n_edges} edges, "
        f"connected={graph.is_connected()}, k={cfg.k}"
    )


def _load_graph_stage(outdir: Path):
    edges, meta = outdir / GRAPH_EDGES, outdir / GRAPH_META
    if not edges.exists() or not meta.exists():
        _fail(f"no graph artifacts in {outdir}; run the graph stage first")
    return load_graph(edges, meta)


@main.command("scan")
@_with_options(_shared_options)
@click.option("--t-min", type=float, default=None)
@click.option("--t-max", type=float, default=None)
@click.option("--n-points", type=int, default=None)
@click.option("--n-repeats", type=int, default=None)
@click.option("--master-seed", type=int, default=None)
@click.option("--n-workers", type=int, default=None)
def cmd_scan(config_path, out, t_min, t_max, n_points, n_repeats, master_seed, n_workers) -> None:
    """Sweep Markov times with a Louvain ensemble per time (resumable)."""
    cfg = _merge_config(config_path, {
        "out": out, "t_min": t_min, "t_max": t_max, "n_points": n_points,
        "n_repeats": n_repeats, "master_seed": master_seed, "n_workers": n_workers,
    })
    outdir = Path(cfg.out)
    graph, doc_ids, _ = _load_graph_stage(outdir)
    try:
        kernel = build_kernel(graph)
    except DisconnectedGraphError as exc:
        _fail(str(exc), code=EXIT_GRAPH)
    _write_config(cfg, outdir)
    grid = TimeGrid.logspaced(cfg.t_min, cfg.t_max, cfg.n_points)

    points = {}
    ckdir = outdir / report.CHECKPOINT_DIR
    for index in range(grid.n_points):
        path = ckdir / f"point_{index:03d}.json"
        if path.exists():
            point = report.read_checkpoint(path)
            if point.index == index and np.isclose(point.t, grid.times[index]):
                points[index] = point
    todo = [i for i in range(grid.n_points) if i not in points]
    if points:
        click.echo(f"scan: resuming, {len(points)} of {grid.n_points} times checkpointed")

    if cfg.n_workers > 1 and todo:
        from concurrent.futures import ProcessPoolExecutor
        from .scan import _init_worker, _scan_point_task

        tasks = [(float(grid.times[i]), i, cfg.n_repeats, cfg.master_seed) for i in todo]
        with ProcessPoolExecutor(
            max_workers=cfg.n_workers, initializer=_init_worker, initargs=(kernel,)
        ) as pool:
            for point in pool.map(_scan_point_task, tasks):
                report.write_checkpoint(outdir, point)
                points[point.index] = point
    else:
        for i in todo:
            point = scan_point(kernel, float(grid.times[i]), i, cfg.n_repeats, cfg.master_seed)
            report.write_checkpoint(outdir, point)
            points[i] = point

    ordered = tuple(points[i] for i in range(grid.n_points))
    result = ScanResult(grid, ordered, cross_vi_matrix(list(ordered)))
    report.write_scan_artifacts(result, doc_ids, outdir)
    scan_figure(result, outdir / "scan.png")
    click.echo(f"scan: {grid.n_points} times x {cfg.n_repeats} repeats written to {outdir}")


@main.command("select")
@_with_options(_shared_options)
@click.option("--max-scales", type=int, default=None)
@click.option("--vi-threshold", type=float, default=None,
              help="Plateau VI bound as a fraction of ln(N).")
def cmd_select(config_path, out, max_scales, vi_threshold) -> None:
    """Rank robust scales from the scan artifacts."""
    cfg = _merge_config(config_path, {
        "out": out, "max_scales": max_scales, "vi_threshold": vi_threshold,
    })
    outdir = Path(cfg.out)
    if not (outdir / report.SCAN_JSON).exists():
        _fail(f"no scan artifacts in {outdir}; run the scan stage first")
    result, doc_ids = report.load_scan_artifacts(outdir)
    _write_config(cfg, outdir)
    scales = select_scales(result, cfg.max_scales, cfg.vi_threshold)
    report.write_selected_scales(scales, doc_ids, outdir, cfg.vi_threshold)
    if not scales:
        click.echo("select: no plateau satisfied the criteria; empty selection written")
    for rank, s in enumerate(scales, start=1):
        click.echo(
            f"select: #{rank} t={s.t:.4g} C={s.n_communities} "
            f"span=[{s.plateau_span[0]:.4g}, {s.plateau_span[1]:.4g}] score={s.score:.3g}"
        )


@main.command("eval")
@_with_options(_shared_options)
@click.option("--vectors", default=None, help="vectors.csv (for cluster summaries).")
@click.option("--tokens", default=None, help="tokens.jsonl (for PMI coherence).")
@click.option("--labels", default=None, help="labels.csv (for NMI).")
@click.option("--require", "required", multiple=True,
              type=click.Choice(["coherence", "nmi", "summaries"]),
              help="Fail (exit 2) if this metric's inputs are missing instead of skipping.")
def cmd_eval(config_path, out, vectors, tokens, labels, required) -> None:
    """Score the selected scales; metrics without inputs are skipped with a notice."""
    cfg = _merge_config(config_path, {
        "out": out, "vectors": vectors, "tokens": tokens, "labels": labels,
    })
    outdir = Path(cfg.out)
    scales_path = outdir / report.SCALES_JSON
    if not scales_path.exists():
        _fail(f"no {report.SCALES_JSON} in {outdir}; run the select stage first")
    selection = json.loads(scales_path.read_text(encoding="utf-8"))
    if not selection["scales"]:
        _fail("selection is empty; nothing to evaluate")
    _write_config(cfg, outdir)

    by_t: list[tuple[float, Partition]] = []
    doc_ids: tuple[str, ...] = ()
    for rec in sorted(selection["scales"], key=lambda r: r["t"]):
        partition, doc_ids = report.load_partition_csv(outdir / rec["partition_file"])
        by_t.append((rec["t"], partition))

    skipped: list[str] = []

    corpus = None
    if cfg.vectors is not None:
        try:
            corpus = corpus_io.load_vectors(cfg.vectors)
        except (OSError, corpus_io.CorpusFormatError) as exc:
            _fail(str(exc))
        if corpus.doc_ids != doc_ids:
            _fail("vectors file does not match the documents in the scan artifacts")

    stats = None
    if cfg.tokens is not None:
        try:
            stats = corpus_io.load_tokens(cfg.tokens, corpus)
        except (OSError, corpus_io.CorpusFormatError) as exc:
            _fail(str(exc))
        if stats.doc_ids != doc_ids:
            _fail("tokens file does not match the documents in the scan artifacts")

    labeling = None
    if cfg.labels is not None:
        try:
            labeling = corpus_io.load_labels(cfg.labels, corpus)
        except (OSError, corpus_io.CorpusFormatError) as exc:
            _fail(str(exc))
        if corpus is None:
            # align to the scanned documents; unlabeled ones default like load_labels
            known = dict(zip(labeling.doc_ids, labeling.labels))
            labeling = corpus_io.ExternalLabeling(
                doc_ids, tuple(known.get(d, corpus_io.UNCLASSIFIED) for d in doc_ids)
            )

    if stats is not None:
        reports = [(t, coherence_report(stats, p)) for t, p in by_t]
        payload = {"scales": [
            {
                "t": t,
                "n_communities": p.n_communities,
                "aggregate": rep.aggregate,
                "clusters": [
                    {
                        "cluster": r.cluster,
                        "size": r.size,
                        "top_words": list(r.top_words),
                        "median_pmi": r.median_pmi,
                        "defined_pairs": r.n_defined_pairs,
                        "excluded_pairs": r.n_excluded_pairs,
                    }
                    for r in rep.per_cluster
                ],
            }
            for (t, p), (_, rep) in zip(by_t, reports)
        ]}
        report.write_eval_json(payload, outdir, "coherence.json")
        coherence_figure(reports, outdir / "coherence.png")
        click.echo("eval: coherence.json written")
    else:
        skipped.append("coherence (no --tokens given)")

    if labeling is not None:
        payload = {"labels_file": cfg.labels, "scales": []}
        for t, p in by_t:
            value = nmi(p, labeling)
            payload["scales"].append({
                "t": t,
                "n_communities": p.n_communities,
                "nmi": value,
                "undefined": value is None,
            })
        report.write_eval_json(payload, outdir, "nmi.json")
        click.echo("eval: nmi.json written")
    else:
        skipped.append("nmi (no --labels given)")

    if len(by_t) >= 2:
        flows = []
        for (t_fine, p_fine), (t_coarse, p_coarse) in zip(by_t, by_t[1:]):
            links = sankey_links(p_fine, p_coarse)
            flows.append({
                "t_fine": t_fine,
                "t_coarse": t_coarse,
                "links": [
                    {"source": f"t{t_fine:.6g}/c{s}", "target": f"t{t_coarse:.6g}/c{d}",
                     "value": v}
                    for s, d, v in links
                ],
            })
        report.write_eval_json(
            {"links": [l for f in flows for l in f["links"]], "flows": flows},
            outdir, "sankey.json",
        )
        sankey_figure(by_t, outdir / "sankey.png")
        click.echo("eval: sankey.json written")
    else:
        skipped.append("sankey (fewer than two selected scales)")

    if corpus is not None:
        payload = {"scales": []}
        for t, p in by_t:
            summaries = summarize_clusters(corpus, p)
            payload["scales"].append({
                "t": t,
                "clusters": [
                    {
                        "cluster": s.cluster,
                        "size": s.size,
                        "centroid": [float(x) for x in s.centroid],
                        "nearest_docs": [
                            {"doc_id": d, "cosine": c} for d, c in s.nearest_docs
                        ],
                    }
                    for s in summaries
                ],
            })
        report.write_eval_json(payload, outdir, "summaries.json")
        click.echo("eval: summaries.json written")
    else:
        skipped.append("summaries (no --vectors given)")

    for note in skipped:
        click.echo(f"eval: skipped {note}")
    missing_required = [r for r in required if any(s.startswith(r) for s in skipped)]
    if missing_required:
        _fail(f"required metrics missing inputs: {', '.join(missing_required)}")


if __name__ == "__main__":
    main()
