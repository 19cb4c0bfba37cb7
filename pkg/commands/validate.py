"""Replays the corpus and splits it into accepted and rejected records"""

from typing import Any

from colors import *
from engine.replay import corpus_gate, reports_json
from evaluation.harness import EvalSettings
from models.corpus import save_corpus
from models.utils import atomic_write
from .loaders import load_fixtures, load_records, load_registry, output_dir, tool_settings

def validate(config: dict[str, Any], args: Any = None) -> int:
    """Writes the accepted records to ``validated.jsonl`` and the reports of the
    rejected ones to ``replay_report.json``

    :return: 0 when every record is accepted, 1 otherwise
    """
    registry = load_registry(config)
    records = load_records(config, registry)
    workers = EvalSettings.from_dict(config.get('evaluation')).workers
    accepted, rejected = corpus_gate(records, registry, load_fixtures(config), tool_settings(config),
                                     workers)

    out = output_dir(config)
    save_corpus(out / 'validated.jsonl', accepted)
    atomic_write(out / 'replay_report.json', reports_json(report for _, report in rejected))

    for record_id, report in rejected:
        failure = report.failures[0]
        print(f"{RD('rejected')} {B(record_id)} step {failure['step']}: {failure['code']}: {failure['detail']}")
    print(f"{status(not rejected, f'{len(accepted)}/{len(records)}')} records replay cleanly")
    return 1 if rejected else 0
