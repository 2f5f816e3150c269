"""Artifact serialization for the pipeline stages.

Everything written here is deterministic for a fixed run configuration:
JSON is key-sorted, floats use the shortest round-trip repr, and row order
follows document/grid order. Re-running a stage with the same inputs must
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .scan import ScanPoint, ScanResult, SelectedScale, TimeGrid
from .stability import Partition, StabilityScore

SCAN_JSON = "scan.json"
CURVES_CSV = "curves.csv"
CROSS_VI_CSV = "cross_vi.csv"
SCALES_JSON = "selected_scales.json"
PARTITION_DIR = "partitions"
CHECKPOINT_DIR = "checkpoints"

__all__ = [
    "load_partition_csv",
    "load_scan_artifacts",
    "read_checkpoint",
    "write_checkpoint",
    "write_eval_json",
    "write_partition_csv",
    "write_scan_artifacts",
    "write_selected_scales",
]


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_partition_csv(p: Partition, doc_ids: tuple[str, ...], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "community"])
        for doc_id, c in zip(doc_ids, p.assignment):
            writer.writerow([doc_id, int(c)])


def load_partition_csv(path: Path) -> tuple[Partition, tuple[str, ...]]:
    doc_ids: list[str] = []
    labels: list[int] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["doc_id", "community"]:
            raise ValueError(f"{path}: header must be doc_id,community")
        for row in reader:
            doc_ids.append(row[0])
            labels.append(int(row[1]))
    return Partition.from_labels(np.array(labels, dtype=np.int64)), tuple(doc_ids)


def _partition_filename(index: int) -> str:
    return f"{PARTITION_DIR}/point_{index:03d}.csv"


def write_scan_artifacts(
    result: ScanResult, doc_ids: tuple[str, ...], outdir: Path
) -> None:
    """scan.json + curves.csv + cross_vi.csv + per-time partition files."""
    outdir = Path(outdir)
    (outdir / PARTITION_DIR).mkdir(parents=True, exist_ok=True)
    points_json = []
    for p in result.points:
        rel = _partition_filename(p.index)
        write_partition_csv(p.best.partition, doc_ids, outdir / rel)
        points_json.append(
            {
                "index": p.index,
                "t": p.t,
                "n_communities": p.n_communities,
                "stability": p.best.r,
                "vi_ensemble": p.vi_ensemble,
                "partition_file": rel,
            }
        )
    _dump_json({"n_points": len(result.points), "points": points_json}, outdir / SCAN_JSON)
    with (outdir / CURVES_CSV).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "C", "r", "vi"])
        for p in result.points:
            writer.writerow([repr(p.t), p.n_communities, repr(p.best.r), repr(p.vi_ensemble)])
    with (outdir / CROSS_VI_CSV).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in result.cross_vi:
            writer.writerow([repr(float(v)) for v in row])


def load_scan_artifacts(outdir: Path) -> tuple[ScanResult, tuple[str, ...]]:
    """Rebuild a ScanResult (and the doc ids) from a scan output directory."""
    outdir = Path(outdir)
    meta = json.loads((outdir / SCAN_JSON).read_text(encoding="utf-8"))
    points: list[ScanPoint] = []
    doc_ids: tuple[str, ...] = ()
    for rec in sorted(meta["points"], key=lambda r: r["index"]):
        partition, doc_ids = load_partition_csv(outdir / rec["partition_file"])
        best = StabilityScore(rec["t"], rec["stability"], partition)
        points.append(
            ScanPoint(rec["index"], rec["t"], best, rec["n_communities"], rec["vi_ensemble"])
        )
    cross = np.loadtxt(outdir / CROSS_VI_CSV, delimiter=",", ndmin=2)
    grid = TimeGrid(np.array([p.t for p in points]))
    return ScanResult(grid, tuple(points), cross), doc_ids


def write_checkpoint(outdir: Path, point: ScanPoint) -> Path:
    """One self-contained record per scan time; presence marks completion."""
    ckdir = Path(outdir) / CHECKPOINT_DIR
    ckdir.mkdir(parents=True, exist_ok=True)
    path = ckdir / f"point_{point.index:03d}.json"
    _dump_json(
        {
            "index": point.index,
            "t": point.t,
            "stability": point.best.r,
            "n_communities": point.n_communities,
            "vi_ensemble": point.vi_ensemble,
            "assignment": [int(c) for c in point.best.partition.assignment],
        },
        path,
    )
    return path


def read_checkpoint(path: Path) -> ScanPoint:
    rec = json.loads(Path(path).read_text(encoding="utf-8"))
    partition = Partition.from_labels(np.array(rec["assignment"], dtype=np.int64))
    best = StabilityScore(rec["t"], rec["stability"], partition)
    return ScanPoint(rec["index"], rec["t"], best, rec["n_communities"], rec["vi_ensemble"])


def write_selected_scales(
    scales: list[SelectedScale],
    doc_ids: tuple[str, ...],
    outdir: Path,
    vi_threshold: float,
) -> None:
    outdir = Path(outdir)
    records = []
    for rank, s in enumerate(scales, start=1):
        rec = {
            "rank": rank,
            "t": s.t,
            "n_communities": s.n_communities,
            "plateau_t_lo": s.plateau_span[0],
            "plateau_t_hi": s.plateau_span[1],
            "index_lo": s.index_span[0],
            "index_hi": s.index_span[1],
            "vi_dip_depth": s.vi_dip_depth,
            "score": s.score,
            "partition_file": _partition_filename(s.index_span[0] + (s.index_span[1] - s.index_span[0]) // 2),
        }
        records.append(rec)
    _dump_json({"vi_threshold": vi_threshold, "scales": records}, outdir / SCALES_JSON)


def write_eval_json(obj: dict, outdir: Path, name: str) -> Path:
    path = Path(outdir) / name
    _dump_json(obj, path)
    return path
