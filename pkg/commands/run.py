"""Runs one live session and prints its transcript"""

import logging
from typing import Any

import requests

from colors import *
from engine.orchestrator import RunOutcome, run as run_session
from models.errors import ConfigError
from models.trajectory import INPUT_KINDS, InputRef, TaskInstance, TrajectoryRecord
from models.utils import atomic_write, canonical_dumps
from policies import PolicyHandle
from .loaders import (load_fixtures, load_records, load_registry, output_dir, session_config,
                      tool_settings)

logger = logging.getLogger(__name__)


def parse_input(text: str, gsd: float | None = None) -> InputRef:
    """``image:images/a.png`` -> InputRef"""
    kind, sep, path = text.partition(':')
    if not sep or kind not in INPUT_KINDS or not path:
        raise ConfigError(f'Input "{text}" is not KIND:PATH with KIND in {", ".join(INPUT_KINDS)}')
    return InputRef(kind, path, gsd if kind == 'image' else None)


def task_from_args(args: Any) -> TaskInstance:
    if not (args.query or '').strip():
        raise ConfigError('A run needs --task or a non-empty --query')
    inputs = [parse_input(text, args.gsd) for text in args.input]
    modality = args.modality or ('rgb' if any(ref.kind == 'image' for ref in inputs) else 'gis')
    return TaskInstance(args.id or 'adhoc', args.domain, modality, args.query.strip(), inputs)


def run(config: dict[str, Any], args: Any) -> int:
    """Exit code 0 whenever the session ran, even if it ran out of steps"""
    registry = load_registry(config)
    gold: TrajectoryRecord | None = None
    if args.task:
        golds = {record.id: record for record in load_records(config, registry)}
        if args.task not in golds:
            raise ConfigError(f'No record "{args.task}" in {config["corpus"]}')
        gold = golds[args.task]
        task, answer_kind = gold.task, gold.answer_kind
    else:
        task, answer_kind = task_from_args(args), args.answer_kind

    workdir = output_dir(config) / 'runs' / task.id
    workdir.mkdir(parents=True, exist_ok=True)
    with requests.Session() as http:
        policy = PolicyHandle(args.policy, config).build(registry, gold, http)
        trajectory, outcome = run_session(policy, task, registry, load_fixtures(config),
                                          session_config(config), tool_settings(config),
                                          answer_kind, workdir)

    print_transcript(trajectory, outcome)
    path = output_dir(config) / 'runs' / f'{task.id}.json'
    atomic_write(path, canonical_dumps({'record': trajectory.to_dict(), 'outcome': outcome.to_dict()},
                                       indent=2) + '\n')
    logger.info("Session written to %s", path)
    return 0


def print_transcript(trajectory: TrajectoryRecord, outcome: RunOutcome) -> None:
    print(B(trajectory.task.query))
    for i, step in enumerate(trajectory.steps, start=1):
        print(f"{BL(f'[{i}]')} {step.thought}")
        if step.action is None:
            continue
        print(f"    {CY(step.action.tool)} {canonical_dumps(step.action.args)}")
        observation = step.observation
        if observation is None:
            continue
        if observation.ok:
            print(f"    {GR('->')} {canonical_dumps(observation.value)}")
        else:
            print(f"    {RD('->')} {observation.error['code']}: {observation.error['detail']}")
    answer = trajectory.final_answer or '-'
    print(f"{status(outcome.completed, outcome.label())} after {outcome.steps_used} step(s): {B(answer)}")
