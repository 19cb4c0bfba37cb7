"""Builds a corpus from its YAML skeleton: the skeleton lists the tasks and the
planned thoughts and calls, the build plays them through live sessions and
records the observations and final answers."""

import logging
from pathlib import Path
from typing import Any

from models.errors import BuildError, SchemaViolation
from models.fixtures import FixtureStore
from models.registry import ToolRegistry
from models.trajectory import ANSWER_KINDS, Call, Step, TaskInstance, TrajectoryRecord
from models.utils import read_yaml
from policies.scripted import ScriptedPolicy
from .orchestrator import SessionConfig, run

logger = logging.getLogger(__name__)


def plan_from_dict(dict_: dict[str, Any]) -> TrajectoryRecord:
    """Record of a skeleton entry. Its steps carry no observation yet"""
    task = TaskInstance.from_dict(dict_)
    answer_kind = dict_.get('answer_kind')
    if answer_kind not in ANSWER_KINDS:
        raise SchemaViolation(task.id, 'answer_kind', f'unknown answer kind "{answer_kind}"')
    steps = []
    for i, item in enumerate(dict_.get('steps') or []):
        call = item.get('call')
        thought = (item.get('thought') or '').strip()
        if call is None and not thought:
            raise SchemaViolation(task.id, f'steps[{i}]', 'a step needs a thought or a call')
        steps.append(Step(thought, Call.from_dict(call, task.id, f'steps[{i}].call') if call else None))
    if not steps:
        raise SchemaViolation(task.id, 'steps', 'no step planned')
    return TrajectoryRecord(task, steps, '', answer_kind)


def load_skeleton(path: str | Path) -> list[TrajectoryRecord]:
    content = read_yaml(path) or {}
    return [plan_from_dict(item) for item in content.get('records') or []]


def build_record(plan: TrajectoryRecord, registry: ToolRegistry, fixtures: FixtureStore,
                 config: SessionConfig | None = None,
                 settings: dict[str, Any] | None = None) -> TrajectoryRecord:
    """Plays the plan in a live session

    :raises BuildError: A call fails, or the session does not end with Terminate
    """
    base = config or SessionConfig()
    config = SessionConfig(**{**base.to_dict(), 'max_steps': max(base.max_steps, len(plan.steps))})
    trajectory, outcome = run(ScriptedPolicy(plan), plan.task, registry, fixtures, config, settings,
                              plan.answer_kind)
    failed = [(i, step) for i, step in enumerate(trajectory.steps, start=1)
              if step.observation is not None and not step.observation.ok]
    if failed:
        i, step = failed[0]
        raise BuildError(f'{plan.id}: step {i} ({step.action.tool}) fails: '
                         f"{step.observation.error['code']}: {step.observation.error['detail']}")
    if not outcome.completed or len(trajectory.steps) != len(plan.steps):
        raise BuildError(f'{plan.id}: session ended as {outcome.label()} after '
                         f'{len(trajectory.steps)} of {len(plan.steps)} step(s)')
    return trajectory


def build_corpus(skeleton: str | Path, registry: ToolRegistry, fixtures: FixtureStore,
                 config: SessionConfig | None = None,
                 settings: dict[str, Any] | None = None) -> list[TrajectoryRecord]:
    records = []
    for plan in load_skeleton(skeleton):
        records.append(build_record(plan, registry, fixtures, config, settings))
        logger.info("Built %s (%d steps)", plan.id, len(plan.steps))
    return records
