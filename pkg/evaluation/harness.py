"""Step-by-step (teacher forced) and end-to-end evaluation of a policy over
gold trajectories"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, TypeVar

import geotools
from engine.orchestrator import Policy, SessionConfig, parse_action, run
from models import VERSION, record
from models.errors import ConfigError, GeorchError, PolicyError, PolicyFailure
from models.fixtures import FixtureStore
from models.registry import CATEGORIES, ToolRegistry, validate_call
from models.report import ERROR_CLASSES, EvalReport, StepScores, TaskResult
from models.trajectory import TERMINATE, Action, FormatError, TrajectoryRecord, WorkingMemory
from models.utils import canonical_dumps, digest
from .metrics import (Judge, answered_without_tool, category_f1, grade_answer, order_metrics,
                      score_step)

logger = logging.getLogger(__name__)

PolicyFactory = Callable[[TrajectoryRecord], Policy]
T = TypeVar('T')

F1_KEYS = dict(zip(CATEGORIES, ('f1_per', 'f1_op', 'f1_logic', 'f1_gis')))
# Keys of the configuration that say nothing about the evaluation itself
VOLATILE_KEYS = ('config_file', 'editor', 'project_dir', 'log_level', 'yaml_dump')


class EvalSettings(record.Record):
    numeric_tolerance: float = 0.10
    iou_threshold: float = 0.5
    argv_rel_tol: float = 1e-3
    f1_mode: str = 'multiset'
    workers: int = 1
    _fields = ('numeric_tolerance', 'iou_threshold', 'argv_rel_tol', 'f1_mode', 'workers')

    def __init__(self, **values: Any):
        for key in self._fields:
            setattr(self, key, values.get(key, getattr(type(self), key)))
        if self.f1_mode not in ('multiset', 'set'):
            raise ConfigError(f'f1_mode is multiset or set, not "{self.f1_mode}"')
        if self.workers < 1:
            raise ConfigError('workers must be >= 1')

    @classmethod
    def from_dict(cls, dict_: dict[str, Any] | None) -> "EvalSettings":
        dict_ = dict_ or {}
        return cls(**{key: dict_[key] for key in cls._fields if dict_.get(key) is not None})

    def grading(self) -> dict[str, float]:
        return {'tolerance': self.numeric_tolerance, 'iou_threshold': self.iou_threshold}


def config_digest(config: dict[str, Any]) -> str:
    """SHA-256 of the canonical effective configuration"""
    return digest(canonical_dumps({key: val for key, val in config.items() if key not in VOLATILE_KEYS}))


def _percent(values: Iterable[float | bool | None]) -> float | None:
    values = [float(value) for value in values if value is not None]
    return 100.0 * sum(values) / len(values) if values else None


def _map_tasks(fn: Callable[[TrajectoryRecord], T], golds: list[TrajectoryRecord],
               workers: int) -> list[T]:
    if workers > 1 and len(golds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, golds))
    return [fn(gold) for gold in golds]


def _ask(policy: Policy, memory: WorkingMemory, task_id: str) -> str:
    try:
        return policy.next_action(memory)
    except PolicyError as err:
        raise PolicyFailure(f'{task_id}: {err.code}: {err}') from err


def _terminate_answer(pred: Action | FormatError) -> str:
    if isinstance(pred, Action) and pred.call is not None and pred.call.tool == TERMINATE:
        answer = pred.call.args.get('answer')
        return answer if isinstance(answer, str) else ''
    return ''


# Step by step
def stepwise_eval(policy: Policy, gold: TrajectoryRecord, registry: ToolRegistry,
                  judge: Judge | None = None, settings: EvalSettings | None = None,
                  session: SessionConfig | None = None) -> TaskResult:
    """Teacher forcing: at step t the policy sees the gold steps before t, and
    its output is scored against gold step t. Nothing is executed. The
    Terminate step is scored as the summary (Summ) against the gold answer.

    The policy is asked once per gold step, thought-only steps included, so a
    scripted policy stays aligned with the gold trajectory.

    :raises PolicyFailure: The policy could not answer
    """
    settings = settings or EvalSettings()
    allowance = (session or SessionConfig()).thought_only_allowance
    steps: list[StepScores] = []
    events: list[str] = []
    summ: float | None = None
    flags: list[str] = []

    for t, gold_step in enumerate(gold.steps, start=1):
        prefix = gold.steps[:t - 1]
        memory = WorkingMemory.from_steps(gold.task, prefix)
        text = _ask(policy, memory, gold.id)
        thoughts_used = sum(step.thought_only for step in prefix)
        pred = parse_action(text, t, thoughts_used >= allowance)
        if isinstance(pred, FormatError):
            events.append(pred.event)

        if gold_step.thought_only:
            continue
        if gold_step.action.tool == TERMINATE:
            answer = _terminate_answer(pred)
            # The gold transcript already holds the rendered output
            generation_ok = bool(answer) and validate_call(registry, TERMINATE, pred.call.args).ok
            summ, flag = grade_answer(answer, gold.final_answer, gold.answer_kind, judge,
                                      gold.task.query, generation_ok, **settings.grading())
            if flag:
                flags.append(flag)
            continue
        steps.append(score_step(pred, gold_step.as_action(), t, registry, settings.argv_rel_tol))

    return TaskResult(gold.id, {'steps': [score.to_dict() for score in steps], 'summ': summ,
                                'events': events}, flags=flags)


def _step_task(factory: PolicyFactory, registry: ToolRegistry, judge: Judge | None,
               settings: EvalSettings, session: SessionConfig) -> Callable[[TrajectoryRecord], TaskResult]:
    def evaluate(gold: TrajectoryRecord) -> TaskResult:
        try:
            return stepwise_eval(factory(gold), gold, registry, judge, settings, session)
        except GeorchError as err:
            logger.warning("%s failed: %s", gold.id, err)
            return TaskResult(gold.id, {'steps': [], 'summ': 0.0, 'events': []},
                              policy_failure=f'{err.code}: {err}', flags=['policy_failure'])
    return evaluate


def aggregate_stepwise(results: list[TaskResult], model: str = '') -> EvalReport:
    """Micro average over the non-exempt steps; Summ averaged over tasks"""
    scored = [score for result in results for score in result.scores['steps']
              if not score.get('exempt')]
    stepwise = {key: _percent(score[key] for score in scored)
                for key in ('inst', 'tool', 'argn', 'argv')}
    stepwise['summ'] = _percent(result.scores['summ'] for result in results)
    stepwise['scored_steps'] = len(scored)

    errors = {name: 0 for name in ERROR_CLASSES}
    for result in results:
        for event in result.scores['events']:
            errors[event] += 1
    return EvalReport('step', len(results), stepwise=stepwise, errors=errors,
                      flags=_count_flags(results), tasks=results, model=model)


# End to end
def _generation_ok(trajectory: TrajectoryRecord, gold: TrajectoryRecord,
                   registry: ToolRegistry) -> bool:
    """Every rendering tool of the gold run was called, validated and
    executed at least once"""
    is_renderer = lambda tool: tool in registry and registry[tool].executor_id in geotools.RENDERERS
    wanted = {tool for tool in gold.tool_sequence() if is_renderer(tool)}
    done = {step.action.tool for step in trajectory.steps
            if step.action is not None and is_renderer(step.action.tool) and step.observation.ok}
    return trajectory.completed and bool(done) and wanted <= done


def e2e_task(policy: Policy, gold: TrajectoryRecord, registry: ToolRegistry, fixtures: FixtureStore,
             session: SessionConfig | None = None, tool_settings: dict[str, Any] | None = None,
             judge: Judge | None = None, settings: EvalSettings | None = None) -> TaskResult:
    """Runs the gold task live and scores the run against the gold record. A
    failing policy is recorded in the result, never raised"""
    settings = settings or EvalSettings()
    mapping = registry.categories()
    try:
        trajectory, outcome = run(policy, gold.task, registry, fixtures, session, tool_settings,
                                  gold.answer_kind)
    except GeorchError as err:
        logger.warning("%s failed: %s", gold.id, err)
        trajectory, outcome, failure = None, None, f'{err.code}: {err}'
    else:
        failure = ''

    pred_seq = trajectory.tool_sequence() if trajectory else []
    ref_seq = gold.tool_sequence()
    completed = bool(outcome and outcome.completed)
    answer = trajectory.final_answer if trajectory and completed else ''
    generation_ok = bool(trajectory) and _generation_ok(trajectory, gold, registry)
    score, flag = grade_answer(answer, gold.final_answer, gold.answer_kind, judge, gold.task.query,
                               generation_ok, **settings.grading())
    flags = [flag] if flag else []
    if failure:
        flags.append('policy_failure')

    scores = {
        'f1': category_f1(pred_seq, ref_seq, mapping, settings.f1_mode == 'set'),
        'order': order_metrics(pred_seq, ref_seq).to_dict(),
        'answer_kind': gold.answer_kind,
        'answer': score,
        'completed': completed,
        'status': outcome.label() if outcome else 'policy_failure',
        'total_calls': outcome.total_calls if outcome else 0,
        'failed_calls': outcome.failed_calls if outcome else 0,
        'events': outcome.events if outcome else [],
        'answer_without_tool': bool(trajectory) and answered_without_tool(trajectory),
        'pred_tools': pred_seq,
    }
    return TaskResult(gold.id, scores, failure, flags)


def aggregate_e2e(results: list[TaskResult], model: str = '') -> EvalReport:
    """Macro average over tasks. A category both runs leave empty does not
    count for that category's F1"""
    e2e: dict[str, Any] = {
        key: _percent(result.scores['f1'][category] for result in results)
        for category, key in F1_KEYS.items()
    }
    for key in ('any_order', 'same_order', 'unique'):
        e2e[key] = _percent(result.scores['order'][key] for result in results)
    e2e['answer_acc'] = _percent(result.scores['answer'] for result in results
                                 if result.scores['answer_kind'] != 'generation')
    e2e['gen_acc'] = _percent(result.scores['answer'] for result in results
                              if result.scores['answer_kind'] == 'generation')

    errors = {name: 0 for name in ERROR_CLASSES}
    for result in results:
        for event in result.scores['events']:
            if event in errors:
                errors[event] += 1
        errors['answer_without_tool'] += result.scores['answer_without_tool']
    incomplete = sum(not result.scores['completed'] for result in results)
    call_stats = {
        'total_calls': sum(result.scores['total_calls'] for result in results),
        'failed_calls': sum(result.scores['failed_calls'] for result in results),
        'incomplete_runs': incomplete,
        'incomplete_pct': 100.0 * incomplete / len(results) if results else 0.0,
    }
    return EvalReport('e2e', len(results), e2e=e2e, errors=errors, call_stats=call_stats,
                      flags=_count_flags(results), tasks=results, model=model)


def _count_flags(results: list[TaskResult]) -> dict[str, int]:
    return dict(sorted(Counter(flag for result in results for flag in result.flags).items()))


def evaluate(mode: str, factory: PolicyFactory, golds: Iterable[TrajectoryRecord],
             registry: ToolRegistry, fixtures: FixtureStore | None = None,
             session: SessionConfig | None = None, tool_settings: dict[str, Any] | None = None,
             judge: Judge | None = None, settings: EvalSettings | None = None,
             model: str = '', config: dict[str, Any] | None = None) -> EvalReport:
    """Evaluates one policy over the gold records, in ``step`` or ``e2e`` mode.
    Tasks may run in parallel; results are reduced in task id order

    :param factory: Builds the policy of one task from its gold record
    """
    settings = settings or EvalSettings()
    session = session or SessionConfig()
    golds = list(golds)
    match mode:
        case 'step':
            results = _map_tasks(_step_task(factory, registry, judge, settings, session),
                                 golds, settings.workers)
            results.sort(key=lambda result: result.task_id)
            report = aggregate_stepwise(results, model)
        case 'e2e':
            if fixtures is None:
                raise ConfigError('End-to-end evaluation needs the fixtures')
            task = lambda gold: e2e_task(factory(gold), gold, registry, fixtures, session,
                                         tool_settings, judge, settings)
            results = _map_tasks(task, golds, settings.workers)
            results.sort(key=lambda result: result.task_id)
            report = aggregate_e2e(results, model)
        case _:
            raise ConfigError(f'Unknown evaluation mode "{mode}" (step or e2e)')
    report.config_digest = config_digest(config or {})
    report.georch_version = VERSION
    return report


def e2e_eval(factory: PolicyFactory, golds: Iterable[TrajectoryRecord], registry: ToolRegistry,
             fixtures: FixtureStore, **options: Any) -> EvalReport:
    return evaluate('e2e', factory, golds, registry, fixtures, **options)
