import csv
import json

import pytest

from engine.orchestrator import SessionConfig
from engine.prompt import render_action
from evaluation import EvalSettings, OverlapJudge, evaluate, stepwise_eval, write_report
from models.errors import ConfigError, TransportError
from models.registry import PATH_KINDS
from models.trajectory import TERMINATE, Action, Call, TrajectoryRecord
from policies import ScriptedPolicy


class PerturbedPolicy(ScriptedPolicy):
    """Plays the gold record, but with a wrong string argument at the given
    1-based steps"""

    def __init__(self, trajectory, registry, slips=()):
        super().__init__(trajectory)
        for t in slips:
            step = trajectory.steps[t - 1]
            key = string_arg(registry, step.action)
            args = {**step.action.args, key: step.action.args[key] + '_x'}
            self.script[t - 1] = render_action(Action(step.thought, Call(step.action.tool, args)))


class SilentAtPolicy(ScriptedPolicy):
    def __init__(self, trajectory, silent_at):
        super().__init__(trajectory)
        self.script[silent_at - 1] = ''


class LoopingPolicy:
    kind = 'looping'

    def next_action(self, memory):
        return render_action(Action('again', Call('Calculator', {'expression': '1+1'})))


class BrokenPolicy:
    kind = 'broken'

    def next_action(self, memory):
        raise TransportError('connection refused')


def string_arg(registry, call):
    """A plain string argument of ``call``, None when it has none"""
    for key, val in sorted(call.args.items()):
        param = registry[call.tool].param(key)
        if isinstance(val, str) and param.kind not in PATH_KINDS:
            return key
    return None


def scored_steps(gold):
    """1-based indexes of the steps that count in the step metrics"""
    return [t for t, step in enumerate(gold.steps, start=1)
            if t > 1 and not step.thought_only and step.action.tool != TERMINATE]


def percentages(section):
    return [val for key, val in section.items() if key != 'scored_steps' and val is not None]


@pytest.fixture
def scripted():
    return lambda gold: ScriptedPolicy(gold)


class TestStepwise:
    def test_identity(self, golden, registry, scripted):
        report = evaluate('step', scripted, golden, registry, judge=OverlapJudge(), model='scripted')
        assert report.n_tasks == 25
        assert percentages(report.stepwise) and set(percentages(report.stepwise)) == {100.0}
        assert report.stepwise['scored_steps'] == sum(len(scored_steps(gold)) for gold in golden)
        assert set(report.errors.values()) == {0}

    @pytest.mark.parametrize('k', [0, 1, 5])
    def test_argument_slips(self, golden, registry, k):
        eligible = [(gold.id, t) for gold in golden for t in scored_steps(gold)
                    if string_arg(registry, gold.steps[t - 1].action)]
        slips = eligible[:k]
        factory = lambda gold: PerturbedPolicy(gold, registry, [t for i, t in slips if i == gold.id])
        report = evaluate('step', factory, golden, registry)
        n = report.stepwise['scored_steps']
        assert report.stepwise['argv'] == pytest.approx(100.0 * (n - k) / n)
        for key in ('inst', 'tool', 'argn'):
            assert report.stepwise[key] == 100.0

    def test_no_action_does_not_stop_scoring(self, golden_by_id, registry):
        gold = golden_by_id['urban_kindergarten_bus_stops']
        result = stepwise_eval(SilentAtPolicy(gold, 3), gold, registry)
        steps = result.scores['steps']
        assert result.scores['events'] == ['no_action']
        assert len(steps) == len([s for s in gold.steps if not s.thought_only]) - 1
        assert not steps[1]['inst']
        assert all(score['argv'] for i, score in enumerate(steps) if i != 1)
        assert result.scores['summ'] == 1.0

    def test_policy_failure_is_recorded(self, golden, registry):
        report = evaluate('step', lambda gold: BrokenPolicy(), golden[:3], registry)
        assert [task.flags for task in report.tasks] == [['policy_failure']] * 3
        assert all('TransportError' in task.policy_failure for task in report.tasks)
        assert report.stepwise['summ'] == 0.0

    def test_workers_do_not_change_the_report(self, golden, registry, scripted):
        serial = evaluate('step', scripted, golden, registry, settings=EvalSettings(workers=1))
        parallel = evaluate('step', scripted, golden, registry, settings=EvalSettings(workers=4))
        assert serial.to_dict() == parallel.to_dict()


class TestEndToEnd:
    def test_identity(self, golden, registry, fixtures, tool_settings, scripted):
        report = evaluate('e2e', scripted, golden, registry, fixtures, tool_settings=tool_settings,
                          judge=OverlapJudge())
        assert set(percentages(report.e2e)) == {100.0}
        assert report.errors == {'no_action': 0, 'wrong_format': 0, 'answer_without_tool': 0,
                                 'multiple_calls': 0}
        assert report.call_stats['incomplete_runs'] == 0
        assert report.call_stats['failed_calls'] == 0

    def test_one_shuffled_run(self, golden, registry, fixtures, tool_settings):
        def factory(gold):
            if gold.id != 'transportation_parked_car_gap':
                return ScriptedPolicy(gold)
            steps = list(gold.steps)
            steps[0], steps[1] = steps[1], steps[0]
            return ScriptedPolicy(TrajectoryRecord(gold.task, steps, gold.final_answer, gold.answer_kind))
        report = evaluate('e2e', factory, golden, registry, fixtures, tool_settings=tool_settings)
        assert report.e2e['same_order'] == pytest.approx(96.0)
        assert report.e2e['any_order'] == 100.0
        assert report.e2e['unique'] == 100.0

    def test_never_terminating(self, golden, registry, fixtures):
        report = evaluate('e2e', lambda gold: LoopingPolicy(), golden, registry, fixtures,
                          session=SessionConfig(max_steps=3), judge=OverlapJudge())
        assert report.call_stats['incomplete_pct'] == 100.0
        assert report.e2e['answer_acc'] == 0.0
        assert report.e2e['gen_acc'] in (0.0, None)
        assert report.call_stats['total_calls'] == 3 * len(golden)

    def test_policy_failure_is_recorded(self, golden, registry, fixtures):
        report = evaluate('e2e', lambda gold: BrokenPolicy(), golden[:2], registry, fixtures)
        assert all('policy_failure' in task.flags for task in report.tasks)
        assert all(task.scores['status'] == 'policy_failure' for task in report.tasks)

    def test_needs_fixtures(self, golden, registry, scripted):
        with pytest.raises(ConfigError):
            evaluate('e2e', scripted, golden, registry)


class TestEvaluate:
    def test_unknown_mode(self, golden, registry, scripted):
        with pytest.raises(ConfigError):
            evaluate('fast', scripted, golden, registry)

    def test_config_digest(self, golden, registry, scripted):
        first = evaluate('step', scripted, golden[:2], registry, config={'a': 1, 'log_level': 'INFO'})
        second = evaluate('step', scripted, golden[:2], registry, config={'a': 1, 'log_level': 'DEBUG'})
        other = evaluate('step', scripted, golden[:2], registry, config={'a': 2})
        assert first.config_digest == second.config_digest != other.config_digest

    def test_report_files(self, golden, registry, scripted, tmp_path):
        report = evaluate('step', scripted, golden, registry, judge=OverlapJudge(), model='scripted')
        json_path, csv_path = write_report(report, tmp_path)
        assert json_path.name == 'step_report.json' and csv_path.name == 'step_report.csv'
        assert json.loads(json_path.read_text())['n_tasks'] == 25
        rows = list(csv.reader(csv_path.read_text().splitlines()))
        assert rows[0] == ['Model', 'Inst.', 'Tool.', 'ArgN.', 'ArgV.', 'Summ.']
        assert rows[1] == ['scripted', '100.0', '100.0', '100.0', '100.0', '100.0']
