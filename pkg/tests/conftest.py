import copy
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import main  # noqa: E402
from commands import loaders  # noqa: E402
from engine.build import build_corpus  # noqa: E402


@pytest.fixture(scope='session')
def base_config():
    return main.load_config(None, local=os.devnull)


@pytest.fixture
def config(base_config, tmp_path):
    """Shipped configuration writing to a temporary output directory"""
    config = copy.deepcopy({key: val for key, val in base_config.items() if key != 'yaml_dump'})
    config['yaml_dump'] = base_config['yaml_dump']
    config['output_dir'] = str(tmp_path / 'out')
    return config


@pytest.fixture(scope='session')
def registry(base_config):
    return loaders.load_registry(base_config)


@pytest.fixture(scope='session')
def fixtures(base_config):
    return loaders.load_fixtures(base_config)


@pytest.fixture(scope='session')
def tool_settings(base_config):
    return loaders.tool_settings(base_config)


@pytest.fixture(scope='session')
def golden(base_config, registry, fixtures, tool_settings):
    """The golden corpus, built from its skeleton"""
    return build_corpus(base_config['skeleton'], registry, fixtures,
                        loaders.session_config(base_config), tool_settings)


@pytest.fixture(scope='session')
def golden_by_id(golden):
    return {record.id: record for record in golden}


@pytest.fixture
def corpus_file(golden, tmp_path):
    from models.corpus import save_corpus
    path = tmp_path / 'golden.jsonl'
    save_corpus(path, golden)
    return path
