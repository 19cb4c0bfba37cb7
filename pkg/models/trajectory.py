"""Task instances, actions, observations and the trajectory records built from
them. The record schema (canonical JSON keys) is::

    {id, domain, modality, query, inputs: [{kind, path, gsd_m_per_px?, crs?}],
     steps: [{thought, action: {tool, args}?, observation: {ok, value?, error?}?}],
     final_answer, answer_kind}
"""

from typing import Any, Optional

from . import record
from .errors import SchemaViolation
from .utils import canonical_dumps, is_number

DOMAINS = ('urban', 'disaster', 'environment', 'transportation', 'aviation', 'recreation',
           'industrial')
MODALITIES = ('rgb', 'sar', 'cd_pair', 'gis', 'index')
INPUT_KINDS = ('image', 'geo_bundle')
ANSWER_KINDS = ('numeric', 'bbox', 'text', 'generation')
TERMINATE = 'Terminate'


class InputRef(record.Record):
    gsd_m_per_px: Optional[float] = None
    crs: Optional[str] = None
    _fields = ('kind', 'path', 'gsd_m_per_px', 'crs')

    def __init__(self, kind: str, path: str, gsd_m_per_px: float | None = None,
                 crs: str | None = None):
        self.kind = kind
        self.path = path
        self.gsd_m_per_px = gsd_m_per_px
        self.crs = crs

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = '?', path: str = 'inputs') -> "InputRef":
        kind = record.require(dict_, 'kind', record_id, path, str)
        if kind not in INPUT_KINDS:
            raise SchemaViolation(record_id, f'{path}.kind', f'unknown input kind "{kind}"')
        ref = cls(kind, record.require(dict_, 'path', record_id, path, str))
        gsd = dict_.get('gsd_m_per_px')
        if gsd is not None:
            if not is_number(gsd) or gsd <= 0:
                raise SchemaViolation(record_id, f'{path}.gsd_m_per_px', 'must be positive')
            ref.gsd_m_per_px = gsd
        ref.crs = dict_.get('crs', cls.crs)
        return ref


class TaskInstance(record.Record):
    _fields = ('id', 'domain', 'modality', 'query', 'inputs')

    def __init__(self, id: str, domain: str, modality: str, query: str,
                 inputs: list[InputRef] | None = None):
        self.id = id
        self.domain = domain
        self.modality = modality
        self.query = query
        self.inputs = list(inputs or [])

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "TaskInstance":
        record_id = dict_.get('id') if isinstance(dict_, dict) else None
        record_id = record_id if isinstance(record_id, str) and record_id else '?'
        id_ = record.require(dict_, 'id', record_id, types=str)
        domain = record.require(dict_, 'domain', record_id, types=str)
        if domain not in DOMAINS:
            raise SchemaViolation(record_id, 'domain', f'unknown domain "{domain}"')
        modality = record.require(dict_, 'modality', record_id, types=str)
        if modality not in MODALITIES:
            raise SchemaViolation(record_id, 'modality', f'unknown modality "{modality}"')
        query = record.require(dict_, 'query', record_id, types=str)
        inputs = dict_.get('inputs', [])
        if not isinstance(inputs, list):
            raise SchemaViolation(record_id, 'inputs', 'expected a list')
        return cls(id_, domain, modality, query, [
            InputRef.from_dict(item, record_id, f'inputs[{i}]') for i, item in enumerate(inputs)
        ])

    def gsd(self) -> float | None:
        for ref in self.inputs:
            if ref.gsd_m_per_px is not None:
                return ref.gsd_m_per_px
        return None


class Call(record.Record):
    _fields = ('tool', 'args')

    def __init__(self, tool: str, args: dict[str, Any] | None = None):
        self.tool = tool
        self.args = dict(args or {})

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = '?', path: str = 'action') -> "Call":
        tool = record.require(dict_, 'tool', record_id, path, str)
        args = dict_.get('args', {})
        if not isinstance(args, dict):
            raise SchemaViolation(record_id, f'{path}.args', 'expected an object')
        return cls(tool, args)

    def to_dict(self) -> dict[str, Any]:
        return {'tool': self.tool, 'args': self.args}

    def wire(self) -> str:
        return canonical_dumps(self.to_dict())


class Action(record.Record):
    """One policy turn: a thought and at most one call"""
    call: Optional[Call] = None
    _fields = ('thought', 'call')

    def __init__(self, thought: str = '', call: Call | None = None):
        if not thought and call is None:
            raise ValueError('A thought-only action needs a thought')
        self.thought = thought
        self.call = call

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "Action":
        call = dict_.get('call')
        return cls(dict_.get('thought', ''), Call.from_dict(call) if call else None)

    @property
    def tool(self) -> str | None:
        return self.call.tool if self.call else None


class FormatError(record.Record):
    """Model output that could not be turned into an action"""
    KINDS = ('NoAction', 'WrongFormat', 'MultipleCalls')
    detail: str = ''
    _fields = ('kind', 'detail')

    def __init__(self, kind: str, detail: str = ''):
        if kind not in self.KINDS:
            raise ValueError(f'Unknown format error "{kind}"')
        self.kind = kind
        self.detail = detail

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "FormatError":
        return cls(dict_['kind'], dict_.get('detail', cls.detail))

    @property
    def event(self) -> str:
        """``WrongFormat`` -> ``wrong_format``"""
        return {'NoAction': 'no_action', 'WrongFormat': 'wrong_format',
                'MultipleCalls': 'multiple_calls'}[self.kind]


class Observation(record.Record):
    value: Any = None
    error: Optional[dict] = None
    _fields = ('ok', 'value', 'error')

    def __init__(self, ok: bool, value: Any = None, error: dict[str, str] | None = None):
        if ok == (error is not None):
            raise ValueError('An observation carries either a value or an error')
        self.ok = ok
        self.value = value
        self.error = error

    @classmethod
    def success(cls, value: Any) -> "Observation":
        return cls(True, value=value)

    @classmethod
    def failure(cls, code: str, detail: str) -> "Observation":
        return cls(False, error={'code': code, 'detail': detail})

    def to_dict(self) -> dict[str, Any]:
        if self.ok:
            return {'ok': True, 'value': self.value}
        return {'ok': False, 'error': self.error}

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = '?',
                  path: str = 'observation') -> "Observation":
        ok = record.require(dict_, 'ok', record_id, path, bool)
        if ok:
            if 'value' not in dict_:
                raise SchemaViolation(record_id, f'{path}.value')
            return cls(True, value=dict_['value'])
        error = record.require(dict_, 'error', record_id, path, dict)
        return cls(False, error={'code': str(error.get('code', '')),
                                 'detail': str(error.get('detail', ''))})

    def wire(self) -> str:
        return canonical_dumps(self.to_dict())


class Step(record.Record):
    action: Optional[Call] = None
    observation: Optional[Observation] = None
    _fields = ('thought', 'action', 'observation')

    def __init__(self, thought: str = '', action: Call | None = None,
                 observation: Observation | None = None):
        self.thought = thought
        self.action = action
        self.observation = observation

    def to_dict(self) -> dict[str, Any]:
        vals: dict[str, Any] = {'thought': self.thought}
        if self.action is not None:
            vals['action'] = self.action.to_dict()
        if self.observation is not None:
            vals['observation'] = self.observation.to_dict()
        return vals

    @classmethod
    def from_dict(cls, dict_: dict[str, Any], record_id: str = '?', path: str = 'steps') -> "Step":
        if not isinstance(dict_, dict):
            raise SchemaViolation(record_id, path, 'expected an object')
        thought = dict_.get('thought', '')
        if not isinstance(thought, str):
            raise SchemaViolation(record_id, f'{path}.thought', 'expected a string')
        action = dict_.get('action')
        observation = dict_.get('observation')
        step = cls(
            thought,
            Call.from_dict(action, record_id, f'{path}.action') if action is not None else None,
            Observation.from_dict(observation, record_id, f'{path}.observation')
            if observation is not None else None,
        )
        if step.action is None and not thought:
            raise SchemaViolation(record_id, f'{path}.thought', 'a thought-only step needs a thought')
        if step.action is not None and step.observation is None:
            raise SchemaViolation(record_id, f'{path}.observation')
        return step

    @property
    def thought_only(self) -> bool:
        return self.action is None

    def as_action(self) -> Action:
        return Action(self.thought, self.action)


class TrajectoryRecord(record.Record):
    _fields = ('task', 'steps', 'final_answer', 'answer_kind')

    def __init__(self, task: TaskInstance, steps: list[Step], final_answer: str,
                 answer_kind: str):
        self.task = task
        self.steps = list(steps)
        self.final_answer = final_answer
        self.answer_kind = answer_kind

    @property
    def id(self) -> str:
        return self.task.id

    def to_dict(self) -> dict[str, Any]:
        # Task fields sit at the top level of a record
        vals = self.task.to_dict()
        vals['steps'] = [step.to_dict() for step in self.steps]
        vals['final_answer'] = self.final_answer
        vals['answer_kind'] = self.answer_kind
        return vals

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "TrajectoryRecord":
        """Reconstructs a record, checking the schema

        :raises SchemaViolation: With the record id and the offending field path
        """
        if not isinstance(dict_, dict):
            raise SchemaViolation('?', '(root)', 'expected an object')
        task = TaskInstance.from_dict(dict_)
        steps = record.require(dict_, 'steps', task.id, types=list)
        final_answer = record.require(dict_, 'final_answer', task.id, types=str)
        answer_kind = record.require(dict_, 'answer_kind', task.id, types=str)
        if answer_kind not in ANSWER_KINDS:
            raise SchemaViolation(task.id, 'answer_kind', f'unknown answer kind "{answer_kind}"')
        trajectory = cls(
            task,
            [Step.from_dict(step, task.id, f'steps[{i}]') for i, step in enumerate(steps)],
            final_answer,
            answer_kind,
        )
        for i, step in enumerate(trajectory.steps[:-1]):
            if step.action is not None and step.action.tool == TERMINATE:
                raise SchemaViolation(task.id, f'steps[{i + 1}]', 'steps follow Terminate')
        return trajectory

    def calls(self) -> list[Call]:
        return [step.action for step in self.steps if step.action is not None]

    def tool_sequence(self) -> list[str]:
        return [call.tool for call in self.calls()]

    @property
    def completed(self) -> bool:
        return bool(self.steps) and self.steps[-1].action is not None \
            and self.steps[-1].action.tool == TERMINATE


class WorkingMemory:
    """Per-session transcript. Grows append-only; entry indices start at 1"""

    def __init__(self, instruction: str, inputs: list[InputRef] | None = None,
                 metadata: dict[str, Any] | None = None):
        self.instruction = instruction
        self.inputs = list(inputs or [])
        self.metadata = dict(metadata or {})
        self._transcript: list[tuple[Action, Observation | None]] = []

    @classmethod
    def for_task(cls, task: TaskInstance) -> "WorkingMemory":
        metadata: dict[str, Any] = {'crs': 'EPSG:4326'}
        gsd = task.gsd()
        if gsd is not None:
            metadata['gsd_m_per_px'] = gsd
        for ref in task.inputs:
            if ref.crs:
                metadata['crs'] = ref.crs
        return cls(task.query, task.inputs, metadata)

    @classmethod
    def from_steps(cls, task: TaskInstance, steps: list[Step]) -> "WorkingMemory":
        """Memory holding a gold prefix, for teacher forcing"""
        memory = cls.for_task(task)
        for step in steps:
            memory.append(step.as_action(), step.observation)
        return memory

    def append(self, action: Action, observation: Observation | None) -> int:
        self._transcript.append((action, observation))
        return len(self._transcript)

    @property
    def transcript(self) -> tuple[tuple[Action, Observation | None], ...]:
        return tuple(self._transcript)

    def entries(self) -> list[tuple[int, Action, Observation | None]]:
        return [(i, action, obs) for i, (action, obs) in enumerate(self._transcript, start=1)]

    def __len__(self) -> int:
        return len(self._transcript)
