"""Builds the runtime objects a command needs from the effective config"""

from pathlib import Path
from typing import Any

from engine.orchestrator import SessionConfig
from models.errors import ConfigError
from models.corpus import load_corpus, unknown_tools
from models.fixtures import FixtureStore
from models.registry import ToolRegistry
from models.trajectory import TrajectoryRecord
from models.utils import read_json


def load_registry(config: dict[str, Any]) -> ToolRegistry:
    """Registry file with the category map applied. An empty file is an empty registry"""
    content = Path(config['registry']).read_text(encoding='utf-8')
    registry = ToolRegistry.from_json(content) if content.strip() else ToolRegistry({})
    mapping = config.get('category_map')
    if mapping and Path(mapping).is_file():
        registry = registry.with_categories(read_json(mapping))
    return registry


def load_fixtures(config: dict[str, Any]) -> FixtureStore:
    return FixtureStore.load(config['fixtures'])


def load_records(config: dict[str, Any], registry: ToolRegistry) -> list[TrajectoryRecord]:
    path = Path(config['corpus'])
    if not path.is_file():
        raise ConfigError(f'No corpus at {path}; run "georch build" first, or pass --corpus')
    records = load_corpus(path)
    unknown_tools(records, registry)
    return records


def session_config(config: dict[str, Any]) -> SessionConfig:
    return SessionConfig.from_dict(config.get('session'))


def tool_settings(config: dict[str, Any]) -> dict[str, Any]:
    """What executors read from the config"""
    return {'index_classes': config.get('index_classes') or {}, 'search': config.get('search') or {}}


def output_dir(config: dict[str, Any]) -> Path:
    path = Path(config.get('output_dir') or 'out')
    path.mkdir(parents=True, exist_ok=True)
    return path
