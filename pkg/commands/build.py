"""Builds the corpus file from its skeleton"""

from typing import Any

from colors import *
from engine.build import build_corpus
from models.corpus import save_corpus, stats
from .loaders import load_fixtures, load_registry, session_config, tool_settings

def build(config: dict[str, Any]) -> int:
    """Runs every planned call and writes the records to the configured corpus
    path. Nothing is written when a call fails"""
    records = build_corpus(config['skeleton'], load_registry(config), load_fixtures(config),
                           session_config(config), tool_settings(config))
    save_corpus(config['corpus'], records)
    result = stats(records)
    print(f"{GR('Built')} {result.n_instances} records, {result.n_steps} steps -> {config['corpus']}")
    return 0
