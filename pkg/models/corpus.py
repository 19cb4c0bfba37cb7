"""Corpus files: one canonical JSON trajectory record per line"""

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Any, Callable, Iterable

from . import record
from .errors import CorpusParseError, SchemaViolation
from .registry import ToolRegistry
from .trajectory import TrajectoryRecord
from .utils import atomic_write, canonical_dumps

logger = logging.getLogger(__name__)


class CorpusStats(record.Record):
    _fields = ('n_instances', 'n_steps', 'avg_steps', 'by_domain', 'by_modality', 'by_tool')

    def __init__(self, n_instances: int = 0, n_steps: int = 0, avg_steps: float = 0.0,
                 by_domain: dict[str, int] | None = None,
                 by_modality: dict[str, int] | None = None,
                 by_tool: dict[str, int] | None = None):
        self.n_instances = n_instances
        self.n_steps = n_steps
        self.avg_steps = avg_steps
        self.by_domain = dict(by_domain or {})
        self.by_modality = dict(by_modality or {})
        self.by_tool = dict(by_tool or {})

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "CorpusStats":
        return cls(**{key: dict_[key] for key in cls._fields if key in dict_})

    def histogram(self, by: str) -> dict[str, int]:
        return {'domain': self.by_domain, 'modality': self.by_modality, 'tool': self.by_tool}[by]


def parse_corpus(content: str) -> list[TrajectoryRecord]:
    """Parses JSONL text. Blank lines are skipped, but a corpus without a single
    record is a parse error

    :raises CorpusParseError: A line is not JSON, or nothing to read at all
    :raises SchemaViolation: A record breaks the schema, or reuses an id
    """
    records: list[TrajectoryRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as err:
            raise CorpusParseError(err.msg, line_no) from err
        trajectory = TrajectoryRecord.from_dict(data)
        if trajectory.id in seen:
            raise SchemaViolation(trajectory.id, 'id', 'duplicate id')
        seen.add(trajectory.id)
        records.append(trajectory)
    if not records:
        raise CorpusParseError('corpus holds no record', 1)
    return records


def load_corpus(path: str | Path) -> list[TrajectoryRecord]:
    with open(path, 'r', encoding='utf-8') as file:
        return parse_corpus(file.read())


def dumps_corpus(records: Iterable[TrajectoryRecord]) -> str:
    return ''.join(canonical_dumps(trajectory.to_dict()) + '\n' for trajectory in records)


def save_corpus(path: str | Path, records: Iterable[TrajectoryRecord]) -> None:
    atomic_write(path, dumps_corpus(records))


def stats(records: Iterable[TrajectoryRecord]) -> CorpusStats:
    records = list(records)
    n_steps = sum(len(trajectory.steps) for trajectory in records)
    by_tool: Counter[str] = Counter()
    for trajectory in records:
        by_tool.update(trajectory.tool_sequence())
    return CorpusStats(
        n_instances=len(records),
        n_steps=n_steps,
        avg_steps=n_steps / len(records) if records else 0.0,
        by_domain=dict(sorted(Counter(t.task.domain for t in records).items())),
        by_modality=dict(sorted(Counter(t.task.modality for t in records).items())),
        by_tool=dict(sorted(by_tool.items())),
    )


def split(records: Iterable[TrajectoryRecord],
          predicate: Callable[[TrajectoryRecord], bool]) -> tuple[list[TrajectoryRecord], list[TrajectoryRecord]]:
    kept: list[TrajectoryRecord] = []
    dropped: list[TrajectoryRecord] = []
    for trajectory in records:
        (kept if predicate(trajectory) else dropped).append(trajectory)
    return kept, dropped


def unknown_tools(records: Iterable[TrajectoryRecord], registry: ToolRegistry) -> list[tuple[str, str]]:
    """(record id, tool) pairs naming tools the registry lacks. Logged as warnings"""
    unknown = sorted({
        (trajectory.id, tool)
        for trajectory in records
        for tool in trajectory.tool_sequence()
        if tool not in registry
    })
    for record_id, tool in unknown:
        logger.warning("Record %s calls unregistered tool %s", record_id, tool)
    return unknown
