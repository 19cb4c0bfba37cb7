#!/bin/env python
import logging
import os
import shutil
import sys
from pathlib import Path
from typing import Any

import yaml

class IndentDumper(yaml.Dumper):
    def increase_indent(self, flow=False, indentless=False):
        return super().increase_indent(flow, False)

try:
    real_path = os.readlink(__file__)
except OSError:
    real_path = __file__

project_dir = os.path.dirname(os.path.abspath(real_path))

# Config entries holding paths, as (section, key); section None is the top level
PATH_KEYS = (
    (None, 'registry'), (None, 'category_map'), (None, 'fixtures'), (None, 'corpus'),
    (None, 'skeleton'), (None, 'output_dir'), (None, 'prompt_template'),
    ('judge', 'prompt_template_path'),
)

def ensure_config_exists() -> str:
    """Makes sure config is setup and returns its path"""
    config_dir = os.environ.get('XDG_CONFIG_HOME', os.path.expanduser('~/.local/config'))
    if not os.path.exists(f"{config_dir}/georch"):
        os.makedirs(f"{config_dir}/georch")
    if not os.path.exists(f"{config_dir}/georch/config.yaml"):
        shutil.copy2(f"{project_dir}/data/config.yaml", f"{config_dir}/georch/config.yaml")

    return f"{config_dir}/georch/config.yaml"

def merge(base: dict[str, Any], override: dict[str, Any] | None) -> dict[str, Any]:
    """Recursive update: sections are merged key by key, other values replaced"""
    merged = dict(base)
    for key, val in (override or {}).items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], val)
        else:
            merged[key] = val
    return merged

def resolve_paths(config: dict[str, Any], root: str = project_dir) -> dict[str, Any]:
    for section, key in PATH_KEYS:
        holder = config.get(section) if section else config
        if isinstance(holder, dict) and holder.get(key):
            holder[key] = str(Path(root, os.path.expanduser(holder[key])))
    return config

def load_config(config_file: str | None = None, local: str = 'georch.yaml') -> dict[str, Any]:
    """Shipped defaults < user config < the ``config`` key of a local georch.yaml"""
    with open(f"{project_dir}/data/config.yaml", 'r') as file:
        config = yaml.safe_load(file)
    if config_file:
        with open(config_file, 'r') as file:
            config = merge(config, yaml.safe_load(file))

    # Allows project-specific config items to be defined next to the corpus
    if os.path.exists(local):
        with open(local, 'r') as file:
            local_content = yaml.safe_load(file) or {}
            if 'config' in local_content:
                config = merge(config, local_content['config'])

    config = resolve_paths(config)
    config['config_file'] = config_file
    config['project_dir'] = project_dir
    config['yaml_dump'] = lambda content, file: yaml.dump(content, file, sort_keys=False, Dumper=IndentDumper)
    return config

def setup_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING),
                        format='%(levelname)s %(name)s: %(message)s')


if __name__ == '__main__':
    import args

    config = load_config(ensure_config_exists())
    setup_logging(config.get('log_level', 'WARNING'))
    sys.exit(args.parse_args(config))
