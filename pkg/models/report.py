"""Scores and reports produced by replay and evaluation"""

from typing import Any

from . import record

MATCH_LEVELS = ('exact', 'tolerant', 'mismatch', 'skipped')

STEP_COLUMNS = ('Inst.', 'Tool.', 'ArgN.', 'ArgV.', 'Summ.')
E2E_COLUMNS = ('Per.', 'Op.', 'Logic.', 'GIS.', 'AnyOrder', 'SameOrder', 'Unique', 'Ans.', 'Gen.')
ERROR_CLASSES = ('no_action', 'wrong_format', 'answer_without_tool', 'multiple_calls')


class StepScores(record.Record):
    """Monotone ladder inst >= tool >= argn >= argv"""
    exempt: bool = False
    _fields = ('inst', 'tool', 'argn', 'argv', 'exempt')

    def __init__(self, inst: bool, tool: bool, argn: bool, argv: bool, exempt: bool = False):
        if (tool and not inst) or (argn and not tool) or (argv and not argn):
            raise ValueError(f'Non monotone step scores {inst, tool, argn, argv}')
        self.inst = inst
        self.tool = tool
        self.argn = argn
        self.argv = argv
        self.exempt = exempt

    @classmethod
    def ladder(cls, inst: bool, tool: bool, argn: bool, argv: bool,
               exempt: bool = False) -> "StepScores":
        """Each rung holds only if every rung below it holds"""
        tool = tool and inst
        argn = argn and tool
        return cls(inst, tool, argn, argv and argn, exempt)

    @classmethod
    def failed(cls, exempt: bool = False) -> "StepScores":
        return cls(False, False, False, False, exempt)

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "StepScores":
        return cls(dict_['inst'], dict_['tool'], dict_['argn'], dict_['argv'],
                   dict_.get('exempt', cls.exempt))


class OrderVerdict(record.Record):
    _fields = ('any_order', 'same_order', 'unique')

    def __init__(self, any_order: bool, same_order: bool, unique: bool):
        if (same_order and not any_order) or (any_order and not unique):
            raise ValueError(f'Non monotone order verdict {any_order, same_order, unique}')
        self.any_order = any_order
        self.same_order = same_order
        self.unique = unique

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "OrderVerdict":
        return cls(dict_['any_order'], dict_['same_order'], dict_['unique'])


class StepCheck(record.Record):
    """Replay outcome of one stored step"""
    _fields = ('arg_format_ok', 'validation_ok', 'execution_ok', 'observation_match')

    def __init__(self, arg_format_ok: bool = True, validation_ok: bool = True,
                 execution_ok: bool = True, observation_match: str = 'skipped'):
        if observation_match not in MATCH_LEVELS:
            raise ValueError(f'Unknown match level "{observation_match}"')
        self.arg_format_ok = arg_format_ok
        self.validation_ok = validation_ok
        self.execution_ok = execution_ok
        self.observation_match = observation_match

    def to_dict(self) -> dict[str, Any]:
        return {key: getattr(self, key) for key in self._fields}

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "StepCheck":
        return cls(**{key: dict_[key] for key in cls._fields})

    @property
    def passed(self) -> bool:
        return self.execution_ok and self.observation_match != 'mismatch'


class ReplayReport(record.Record):
    _fields = ('record_id', 'per_step', 'full_chain_executable', 'failures')

    def __init__(self, record_id: str, per_step: list[StepCheck] | None = None,
                 failures: list[dict[str, Any]] | None = None):
        self.record_id = record_id
        self.per_step = list(per_step or [])
        self.failures = list(failures or [])

    @property
    def full_chain_executable(self) -> bool:
        return not self.failures and all(check.passed for check in self.per_step)

    def fail(self, step: int, code: str, detail: str) -> None:
        self.failures.append({'step': step, 'code': code, 'detail': detail})

    def to_dict(self) -> dict[str, Any]:
        return {
            'record_id': self.record_id,
            'per_step': [check.to_dict() for check in self.per_step],
            'full_chain_executable': self.full_chain_executable,
            'failures': self.failures,
        }

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "ReplayReport":
        return cls(dict_['record_id'], [StepCheck.from_dict(c) for c in dict_.get('per_step', [])],
                   dict_.get('failures', []))

    def counts(self) -> dict[str, int]:
        levels = {level: 0 for level in MATCH_LEVELS}
        for check in self.per_step:
            levels[check.observation_match] += 1
        return levels


class TaskResult(record.Record):
    """What one task contributes to an evaluation report"""
    policy_failure: str = ''
    flags: list = []
    _fields = ('task_id', 'scores', 'policy_failure', 'flags')

    def __init__(self, task_id: str, scores: dict[str, Any] | None = None,
                 policy_failure: str = '', flags: list[str] | None = None):
        self.task_id = task_id
        self.scores = dict(scores or {})
        self.policy_failure = policy_failure
        self.flags = list(flags or [])

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "TaskResult":
        return cls(dict_['task_id'], dict_.get('scores'), dict_.get('policy_failure', ''),
                   dict_.get('flags'))


class EvalReport(record.Record):
    """Aggregated scores. Percentages are in [0, 100], None when nothing was
    scored for that column"""
    model: str = ''
    config_digest: str = ''
    georch_version: str = ''
    _fields = ('mode', 'model', 'n_tasks', 'stepwise', 'e2e', 'errors', 'call_stats',
               'flags', 'tasks', 'config_digest', 'georch_version')

    def __init__(self, mode: str, n_tasks: int = 0, stepwise: dict[str, Any] | None = None,
                 e2e: dict[str, Any] | None = None, errors: dict[str, int] | None = None,
                 call_stats: dict[str, int] | None = None, flags: dict[str, int] | None = None,
                 tasks: list[TaskResult] | None = None, model: str = '',
                 config_digest: str = '', georch_version: str = ''):
        self.mode = mode
        self.model = model
        self.n_tasks = n_tasks
        self.stepwise = dict(stepwise or {})
        self.e2e = dict(e2e or {})
        self.errors = dict(errors or {name: 0 for name in ERROR_CLASSES})
        self.call_stats = dict(call_stats or {'total_calls': 0, 'failed_calls': 0,
                                              'incomplete_runs': 0})
        self.flags = dict(flags or {})
        self.tasks = list(tasks or [])
        self.config_digest = config_digest
        self.georch_version = georch_version

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "EvalReport":
        return cls(
            dict_['mode'], dict_.get('n_tasks', 0), dict_.get('stepwise'), dict_.get('e2e'),
            dict_.get('errors'), dict_.get('call_stats'), dict_.get('flags'),
            [TaskResult.from_dict(task) for task in dict_.get('tasks', [])],
            dict_.get('model', cls.model), dict_.get('config_digest', cls.config_digest),
            dict_.get('georch_version', cls.georch_version),
        )

    def table_row(self) -> dict[str, Any]:
        """Row of the CSV report, keyed by the published column names"""
        row: dict[str, Any] = {'Model': self.model}
        if self.mode == 'step':
            keys = ('inst', 'tool', 'argn', 'argv', 'summ')
            row.update(zip(STEP_COLUMNS, (self.stepwise.get(key) for key in keys)))
        else:
            keys = ('f1_per', 'f1_op', 'f1_logic', 'f1_gis', 'any_order', 'same_order',
                    'unique', 'answer_acc', 'gen_acc')
            row.update(zip(E2E_COLUMNS, (self.e2e.get(key) for key in keys)))
        return row
