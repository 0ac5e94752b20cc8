"""Run outputs: evaluation log, archive CSV, hypervolume trace and run summary."""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Tuple, Union

from pydantic import BaseModel

from ..errors import FormatError, MissingArtifactError
from .archive import ArchiveEntry

logger = logging.getLogger(__name__)

RUNLOG_FILE = "runlog.jsonl"
ARCHIVE_FILE = "archive.csv"
HV_FILE = "hv.csv"
SUMMARY_FILE = "summary.json"


class EvaluationRecord(BaseModel):
    eval_index: int
    algo: str
    seed: int
    genotype: str
    accuracy: float
    madds: int
    skipped: bool
    feasible: bool
    threshold: float
    wall_ms: int


class RunSummary(BaseModel):
    algorithm: str
    seed: int
    population_size: int
    budget: int
    evaluations: int
    fresh_evaluations: int
    skipped: int
    skip_fraction: float
    termination: str
    hypervolume: float
    archive_size: int
    wall_seconds: float
    reference_madds: dict


def write_runlog(records: Iterable[EvaluationRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json() + "\n")
    return path


def read_runlog(path: Union[str, Path]) -> List[EvaluationRecord]:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"run log not found: {path}")
    records = []
    with path.open(encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(EvaluationRecord(**json.loads(line)))
            except (json.JSONDecodeError, TypeError, ValueError) as e:
                raise FormatError(f"{path}:{number}: bad run log record ({e})") from None
    return records


def write_archive_csv(entries: Iterable[ArchiveEntry], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["accuracy", "madds", "genotype"])
        for entry in entries:
            writer.writerow([repr(entry.point.accuracy), entry.point.madds, entry.genotype])
    return path


def read_archive_csv(path: Union[str, Path]) -> List[Tuple[float, int, str]]:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"archive not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != ["accuracy", "madds", "genotype"]:
            raise FormatError(f"{path}: expected header accuracy,madds,genotype, got {reader.fieldnames}")
        return [(float(row["accuracy"]), int(row["madds"]), row["genotype"]) for row in reader]


def write_hv_trace(trace: Iterable[Tuple[int, float]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["eval_index", "hypervolume"])
        for eval_index, value in trace:
            writer.writerow([eval_index, repr(value)])
    return path


def write_summary(summary: RunSummary, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(summary.model_dump_json(indent=1) + "\n", encoding="utf-8")
    return path


def read_summary(path: Union[str, Path]) -> RunSummary:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"run summary not found: {path}")
    try:
        return RunSummary.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as e:
        raise FormatError(f"{path}: bad run summary ({e})") from None
