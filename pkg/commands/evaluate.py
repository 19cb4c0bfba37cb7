"""Scores a policy over the corpus, step by step or end to end"""

from typing import Any

import requests

from colors import *
from evaluation import harness, make_judge, write_report
from evaluation.harness import EvalSettings
from models.report import EvalReport
from policies import PolicyHandle
from .loaders import (load_fixtures, load_records, load_registry, output_dir, session_config,
                      tool_settings)

WIDTH = 10

def evaluate(config: dict[str, Any], args: Any) -> int:
    """Exit code 0 once the reports are written, whatever the scores"""
    registry = load_registry(config)
    golds = load_records(config, registry)
    fixtures = load_fixtures(config) if args.mode == 'e2e' else None
    handle = PolicyHandle(args.policy, config)
    settings = EvalSettings.from_dict(config.get('evaluation'))

    # One connection pool for every session of the run
    with requests.Session() as http:
        judge = make_judge(config, session=http)
        factory = lambda gold: handle.build(registry, gold, http)
        report = harness.evaluate(args.mode, factory, golds, registry, fixtures,
                                  session_config(config), tool_settings(config), judge, settings,
                                  handle.name, config)

    json_path, csv_path = write_report(report, output_dir(config))
    print_report(report)
    print(f"Reports: {json_path} {csv_path}")
    return 0

def cell(value: float | None) -> str:
    text = '-' if value is None else f"{value:.2f}"
    return percent(value).replace(text, f"{text:>{WIDTH}}")

def print_report(report: EvalReport) -> None:
    row = report.table_row()
    row.pop('Model')
    print(B(f"{report.mode} evaluation of {report.model or '?'} on {report.n_tasks} task(s)"))
    print(' '.join(f"{key:>{WIDTH}}" for key in row))
    print(' '.join(cell(val) for val in row.values()))
    print("Errors: " + ', '.join(f"{name} {count}" for name, count in report.errors.items()))
    for task in report.tasks:
        if task.policy_failure:
            print(f"{RD('policy failure')} {task.task_id}: {task.policy_failure}")
