"""The perceive-reason-act loop: model text -> action -> validated, cached
execution -> observation fed back through the working memory"""

import json
import logging
import re
import tempfile
from pathlib import Path
from typing import Any, Protocol

import geotools
from geotools import ToolContext
from models import record
from models.errors import ConfigError, GeorchError, PolicyError, PolicyFailure
from models.fixtures import FixtureStore
from models.registry import ToolRegistry, validate_call
from models.trajectory import (TERMINATE, Action, Call, FormatError, Observation, Step,
                               TaskInstance, TrajectoryRecord, WorkingMemory)
from models.utils import canonical_dumps, fingerprint
from .prompt import ACTION_FENCE

logger = logging.getLogger(__name__)

ACTION_RE = re.compile(re.escape(ACTION_FENCE) + r'[ \t]*\r?\n(.*?)```', re.DOTALL)
# A bare action object outside any fence
LOOSE_CALL_RE = re.compile(r'\{\s*"tool"\s*:')
THOUGHT_PREFIX_RE = re.compile(r'^\s*Thought\s*:\s*', re.IGNORECASE)

DERIVED_KEYS = ('layer', 'change_layer', 'links_layer')


class Policy(Protocol):
    def next_action(self, memory: WorkingMemory) -> str: ...


class SessionConfig(record.Record):
    max_steps: int = 20
    thought_only_allowance: int = 1
    strict_validation: bool = True
    use_cache: bool = True
    observation_echo_bytes: int = 8192
    abort_after_format_errors: int = 3
    _fields = ('max_steps', 'thought_only_allowance', 'strict_validation', 'use_cache',
               'observation_echo_bytes', 'abort_after_format_errors')

    def __init__(self, **values: Any):
        unknown = set(values) - set(self._fields)
        if unknown:
            raise ConfigError(f'Unknown session setting(s): {", ".join(sorted(unknown))}')
        for key in self._fields:
            setattr(self, key, values.get(key, getattr(type(self), key)))
        if not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ConfigError(f'max_steps must be a positive integer, not {self.max_steps!r}')
        if self.thought_only_allowance < 0 or self.abort_after_format_errors < 1:
            raise ConfigError('thought_only_allowance must be >= 0 and abort_after_format_errors >= 1')

    @classmethod
    def from_dict(cls, dict_: dict[str, Any] | None) -> "SessionConfig":
        return cls(**(dict_ or {}))


class ExecutionCache:
    """Per-session cache: call fingerprint -> observation, and the bundle each
    derived layer was written to"""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.entries: dict[str, str] = {}
        self.derived_artifacts: dict[str, str] = {}
        self.hits = 0
        self.invocations = 0

    def lookup(self, key: str) -> Observation | None:
        if not self.enabled or key not in self.entries:
            return None
        self.hits += 1
        return Observation.from_dict(json.loads(self.entries[key]))

    def store(self, key: str, observation: Observation) -> None:
        if self.enabled and observation.ok:
            self.entries[key] = observation.wire()

    def register(self, call: Call, observation: Observation) -> None:
        bundle = call.args.get('geopackage')
        if not observation.ok or not isinstance(bundle, str) or not isinstance(observation.value, dict):
            return
        for key in DERIVED_KEYS:
            if isinstance(observation.value.get(key), str):
                self.derived_artifacts[observation.value[key]] = bundle


class RunOutcome(record.Record):
    """How a session ended. ``events`` has one entry per policy turn"""
    format_errors: int = 0
    _fields = ('status', 'steps_used', 'format_errors', 'events', 'total_calls', 'failed_calls',
               'executor_invocations', 'cache_hits')

    def __init__(self, status: str, steps_used: int = 0, format_errors: int = 0,
                 events: list[str] | None = None, total_calls: int = 0, failed_calls: int = 0,
                 executor_invocations: int = 0, cache_hits: int = 0):
        self.status = status
        self.steps_used = steps_used
        self.format_errors = format_errors
        self.events = list(events or [])
        self.total_calls = total_calls
        self.failed_calls = failed_calls
        self.executor_invocations = executor_invocations
        self.cache_hits = cache_hits

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "RunOutcome":
        return cls(**{key: dict_[key] for key in cls._fields if key in dict_})

    @property
    def completed(self) -> bool:
        return self.status == 'completed'

    def label(self) -> str:
        return f'aborted({self.format_errors})' if self.status == 'aborted' else self.status


def cache_fingerprint(tool: str, args: dict[str, Any]) -> str:
    return fingerprint(tool, args)


def _thought(text: str) -> str:
    return THOUGHT_PREFIX_RE.sub('', text.strip(), count=1).strip()


def parse_action(model_text: str, step_index: int, allowance_used: bool) -> Action | FormatError:
    """Turns model text into an action, or classifies why it cannot

    :param step_index: 1-based turn number, for error details
    :param allowance_used: Whether the thought-only turn was already spent
    """
    blocks = ACTION_RE.findall(model_text)
    if len(blocks) >= 2:
        return FormatError('MultipleCalls', f'step {step_index}: {len(blocks)} action blocks')

    if not blocks:
        if ACTION_FENCE in model_text or LOOSE_CALL_RE.search(model_text):
            return FormatError('WrongFormat', f'step {step_index}: action object outside a closed '
                                              f'{ACTION_FENCE} block')
        thought = _thought(model_text)
        if allowance_used or not thought:
            return FormatError('NoAction', f'step {step_index}: no action block')
        return Action(thought)

    try:
        body = json.loads(blocks[0])
    except json.JSONDecodeError as err:
        return FormatError('WrongFormat', f'step {step_index}: action is not JSON ({err.msg})')
    if not isinstance(body, dict) or set(body) - {'tool', 'args'} \
            or not isinstance(body.get('tool'), str) or not body['tool'] \
            or not isinstance(body.get('args', {}), dict):
        return FormatError('WrongFormat', f'step {step_index}: expected {{"tool": name, "args": {{...}}}}')
    thought = _thought(model_text[:model_text.index(ACTION_FENCE)])
    return Action(thought, Call(body['tool'], body.get('args', {})))


def step(memory: WorkingMemory, cache: ExecutionCache, registry: ToolRegistry, action: Action,
         context: ToolContext, strict: bool = True) -> Observation:
    """Validates and runs the call of ``action``, then appends the pair to the
    memory. Failures become error observations; they never raise"""
    call = action.call
    if call is None:
        raise ValueError('step needs an action with a call')
    report = validate_call(registry, call.tool, call.args, strict)
    if not report.ok:
        observation = Observation.failure('ValidationFailed', report.summary())
    else:
        key = cache_fingerprint(call.tool, call.args)
        observation = cache.lookup(key)
        if observation is not None:
            logger.debug("Cache hit for %s", call.tool)
        else:
            observation = _execute(registry, call, context, cache)
            cache.store(key, observation)
        cache.register(call, observation)
    memory.append(action, observation)
    return observation


def _execute(registry: ToolRegistry, call: Call, context: ToolContext,
             cache: ExecutionCache) -> Observation:
    tool = registry[call.tool]
    # Lenient validation lets unknown arguments through; executors never see them
    args = {key: val for key, val in call.args.items() if tool.param(key) is not None and val is not None}
    cache.invocations += 1
    try:
        value = geotools.execute(tool.executor_id, context, args)
        # Observations hold plain JSON only
        value = json.loads(canonical_dumps(value))
    except GeorchError as err:
        return Observation.failure('ExecutorError', f'{err.code}: {err}')
    except OSError as err:
        return Observation.failure('ExecutorError', f'IoFailure: {err.strerror or err}')
    except ValueError as err:
        return Observation.failure('ExecutorError', f'DomainError: {err}')
    except Exception as err:
        logger.warning("%s crashed on %s", tool.executor_id, call.args, exc_info=True)
        return Observation.failure('ExecutorError', f'{type(err).__name__}: {err}')
    return Observation.success(value)


class Session:
    """One task being solved. Owns its memory, cache and work directory"""

    def __init__(self, task: TaskInstance, registry: ToolRegistry, fixtures: FixtureStore,
                 workdir: str | Path, config: SessionConfig | None = None,
                 settings: dict[str, Any] | None = None):
        if TERMINATE not in registry:
            raise ConfigError('The registry has no Terminate tool')
        self.task = task
        self.registry = registry
        self.config = config or SessionConfig()
        self.memory = WorkingMemory.for_task(task)
        self.cache = ExecutionCache(self.config.use_cache)
        self.context = ToolContext(fixtures, workdir, settings)
        self.steps: list[Step] = []
        self.final_answer: str | None = None
        for ref in task.inputs:
            if ref.kind == 'geo_bundle':
                self.context.stage(ref.path)

    @property
    def terminated(self) -> bool:
        return self.final_answer is not None

    def step(self, action: Action) -> Observation:
        if self.terminated:
            raise ValueError('The session is over')
        observation = step(self.memory, self.cache, self.registry, action, self.context,
                           self.config.strict_validation)
        self.steps.append(Step(action.thought, action.call, observation))
        if action.call.tool == TERMINATE and observation.ok:
            self.final_answer = observation.value['answer']
        return observation

    def think(self, action: Action) -> None:
        self.memory.append(action, None)
        self.steps.append(Step(action.thought))

    def reject(self, model_text: str, error: FormatError) -> None:
        """Feeds a format error back to the policy. Not part of the record"""
        self.memory.append(Action(model_text.strip() or '(empty output)'),
                           Observation.failure(error.kind, error.detail))

    def run(self, policy: Policy, answer_kind: str = 'text') -> tuple[TrajectoryRecord, RunOutcome]:
        """Loops policy -> parse -> step until Terminate, the step budget, or
        too many consecutive format errors. Thought-only turns do not use the
        budget; format errors do

        :raises PolicyFailure: The policy could not produce text
        """
        config = self.config
        outcome = RunOutcome('step_exhausted')
        thoughts = 0
        consecutive_errors = 0
        while outcome.steps_used < config.max_steps:
            try:
                text = policy.next_action(self.memory)
            except PolicyError as err:
                raise PolicyFailure(f'{self.task.id}: {err.code}: {err}') from err
            parsed = parse_action(text, outcome.steps_used + 1,
                                  thoughts >= config.thought_only_allowance)

            if isinstance(parsed, FormatError):
                logger.info("%s: %s", self.task.id, parsed.detail)
                outcome.events.append(parsed.event)
                outcome.steps_used += 1
                outcome.format_errors += 1
                consecutive_errors += 1
                self.reject(text, parsed)
                if consecutive_errors >= config.abort_after_format_errors:
                    outcome.status = 'aborted'
                    break
                continue

            consecutive_errors = 0
            if parsed.call is None:
                thoughts += 1
                outcome.events.append('thought_only')
                self.think(parsed)
                continue

            outcome.steps_used += 1
            outcome.events.append('call')
            observation = self.step(parsed)
            outcome.total_calls += 1
            outcome.failed_calls += not observation.ok
            if self.terminated:
                outcome.status = 'completed'
                break

        outcome.executor_invocations = self.cache.invocations
        outcome.cache_hits = self.cache.hits
        trajectory = TrajectoryRecord(self.task, self.steps, self.final_answer or '', answer_kind)
        return trajectory, outcome


def run(policy: Policy, task: TaskInstance, registry: ToolRegistry, fixtures: FixtureStore,
        config: SessionConfig | None = None, settings: dict[str, Any] | None = None,
        answer_kind: str = 'text', workdir: str | Path | None = None) -> tuple[TrajectoryRecord, RunOutcome]:
    """Runs one session. Without ``workdir`` the session works in a temporary
    directory removed afterwards"""
    if workdir is not None:
        return Session(task, registry, fixtures, workdir, config, settings).run(policy, answer_kind)
    with tempfile.TemporaryDirectory(prefix='georch-') as tmp:
        return Session(task, registry, fixtures, tmp, config, settings).run(policy, answer_kind)
