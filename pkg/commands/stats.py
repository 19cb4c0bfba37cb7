"""Prints corpus statistics"""

from typing import Any

from colors import *
from models.corpus import stats as corpus_stats
from .loaders import load_records, load_registry

def stats(config: dict[str, Any], by: str | None = None) -> int:
    result = corpus_stats(load_records(config, load_registry(config)))
    if by is None:
        print(f"{B('Records')} {result.n_instances}  {B('Steps')} {result.n_steps}  "
              f"{B('Avg steps')} {result.avg_steps:.2f}")
    for name in ([by] if by else ['domain', 'modality', 'tool']):
        print(B(f"By {name}"))
        for key, count in result.histogram(name).items():
            print(f"  {key:<28} {count}")
    return 0
