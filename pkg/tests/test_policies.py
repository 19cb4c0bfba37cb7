import pytest
import requests

from engine.orchestrator import run
from evaluation import OverlapJudge, make_judge
from evaluation.judge import RemoteJudge
from models.errors import ConfigError, JudgeUnavailable, TransportError
from models.trajectory import TaskInstance, WorkingMemory
from policies import ChatClient, PolicyHandle, RemoteConfig, RemotePolicy, RuleBasedPolicy, ScriptedPolicy
from policies.remote import parse_json_reply
from policies.rule_based import find_expression


class FakeResponse:
    def __init__(self, body, status=200):
        self.body = body
        self.status = status

    def raise_for_status(self):
        if self.status >= 400:
            raise requests.HTTPError(f'{self.status} error')

    def json(self):
        if isinstance(self.body, Exception):
            raise self.body
        return self.body


class FakeSession:
    """Hands out the queued replies in turn; an exception is raised"""

    def __init__(self, *replies):
        self.replies = list(replies)
        self.requests = []

    def post(self, url, data=None, headers=None, timeout=None):
        self.requests.append({'url': url, 'data': data, 'headers': headers, 'timeout': timeout})
        reply = self.replies[min(len(self.requests), len(self.replies)) - 1]
        if isinstance(reply, Exception):
            raise reply
        return reply


def reply(content):
    return FakeResponse({'choices': [{'message': {'role': 'assistant', 'content': content}}]})


REMOTE = {'base_url': 'http://models.test/v1/', 'model': 'm', 'max_retries': 2, 'backoff_factor': 0}


class TestChatClient:
    def test_reply_content(self):
        session = FakeSession(reply('hello'))
        client = ChatClient(RemoteConfig.from_dict(REMOTE), session)
        assert client.complete([{'role': 'user', 'content': 'hi'}]) == 'hello'
        assert session.requests[0]['url'] == 'http://models.test/v1/chat/completions'

    def test_retries_then_fails(self):
        session = FakeSession(requests.ConnectionError('refused'))
        client = ChatClient(RemoteConfig.from_dict(REMOTE), session)
        with pytest.raises(TransportError):
            client.complete([])
        assert len(session.requests) == 3

    def test_recovers_after_a_failure(self):
        session = FakeSession(FakeResponse({}, status=503), reply('ok'))
        client = ChatClient(RemoteConfig.from_dict(REMOTE), session)
        assert client.complete([]) == 'ok'
        assert len(session.requests) == 2

    @pytest.mark.parametrize('body', [{}, {'choices': []}, ValueError('not json'),
                                      {'choices': [{'message': {'content': None}}]}])
    def test_malformed_reply(self, body):
        client = ChatClient(RemoteConfig.from_dict(REMOTE), FakeSession(FakeResponse(body)))
        with pytest.raises(TransportError):
            client.complete([])

    def test_key_comes_from_the_environment(self, monkeypatch):
        monkeypatch.setenv('GEORCH_TEST_KEY', 'secret')
        session = FakeSession(reply('ok'))
        client = ChatClient(RemoteConfig.from_dict({**REMOTE, 'api_key_env': 'GEORCH_TEST_KEY'}), session)
        client.complete([])
        assert session.requests[0]['headers']['Authorization'] == 'Bearer secret'

    def test_no_key_no_header(self, monkeypatch):
        monkeypatch.delenv('GEORCH_TEST_KEY', raising=False)
        session = FakeSession(reply('ok'))
        ChatClient(RemoteConfig.from_dict({**REMOTE, 'api_key_env': 'GEORCH_TEST_KEY'}), session).complete([])
        assert 'Authorization' not in session.requests[0]['headers']

    @pytest.mark.parametrize('values', [{'model': 'm'}, {**REMOTE, 'temperature': -1},
                                        {**REMOTE, 'max_retries': -1}])
    def test_bad_config(self, values):
        with pytest.raises(ConfigError):
            RemoteConfig.from_dict(values)


class TestPolicyHandle:
    def test_alias(self):
        handle = PolicyHandle('rule')
        assert handle.kind == 'rule_based' and handle.name == 'rule_based'

    def test_unknown(self):
        with pytest.raises(ConfigError):
            PolicyHandle('oracle')

    def test_scripted_needs_a_record(self, registry):
        with pytest.raises(ConfigError):
            PolicyHandle('scripted').build(registry)

    def test_remote(self, base_config, registry, golden_by_id):
        handle = PolicyHandle('remote', base_config)
        assert handle.name == base_config['remote']['model']
        session = FakeSession(reply('Thought: done.'))
        policy = handle.build(registry, session=session)
        assert isinstance(policy, RemotePolicy)
        memory = WorkingMemory.for_task(golden_by_id['transportation_parked_car_gap'].task)
        assert policy.next_action(memory) == 'Thought: done.'
        assert policy.request_digest(memory) == policy.request_digest(memory)

    def test_remote_without_template(self, base_config, registry):
        config = {**base_config, 'prompt_template': ''}
        with pytest.raises(ConfigError):
            PolicyHandle('remote', config).build(registry)


class TestRuleBased:
    @pytest.mark.parametrize('text, expression', [
        ('What is 6 * 7?', '6 * 7'),
        ('Add (2 + 3) / 4 to 2020 please', '(2 + 3) / 4'),
        ('No numbers here', '0'),
        ('Just 42', '0'),
    ])
    def test_find_expression(self, text, expression):
        assert find_expression(text) == expression

    def test_session(self, registry, fixtures):
        task = TaskInstance('calc', 'urban', 'gis', 'What is 6 * 7?')
        trajectory, outcome = run(RuleBasedPolicy(), task, registry, fixtures)
        assert outcome.completed and outcome.steps_used == 2
        assert trajectory.final_answer == '42'


class TestJudges:
    def test_overlap(self):
        judge = OverlapJudge()
        assert judge.score('q', 'The bridge is low', 'the BRIDGE is low') == 1.0
        assert judge.score('q', 'red car', 'blue boat') == 0.0

    def test_make_judge(self, base_config):
        assert make_judge(base_config) is None
        assert isinstance(make_judge(base_config, 'overlap'), OverlapJudge)
        with pytest.raises(ConfigError):
            make_judge(base_config, 'crowd')

    def test_remote(self, base_config):
        session = FakeSession(reply('Here you go: {"score": 0.7, "justification": "close"}'))
        judge = make_judge(base_config, 'remote', session)
        assert isinstance(judge, RemoteJudge)
        assert judge.score('How low?', '3.5 m', '3.4 m') == 0.7
        assert '3.4 m' in session.requests[0]['data'].decode('utf-8')

    @pytest.mark.parametrize('answer', [reply('no idea'), requests.ConnectionError('down')])
    def test_remote_unavailable(self, base_config, answer):
        config = {**base_config, 'remote': {**base_config['remote'], 'max_retries': 0}}
        judge = make_judge(config, 'remote', FakeSession(answer))
        with pytest.raises(JudgeUnavailable):
            judge.score('q', 'a', 'b')

    def test_parse_json_reply(self):
        assert parse_json_reply('x {bad} {"score": 1}') == {'score': 1}
        with pytest.raises(ValueError):
            parse_json_reply('nothing')


def test_scripted_plays_in_order(golden_by_id):
    gold = golden_by_id['urban_kindergarten_bus_stops']
    policy = ScriptedPolicy(gold)
    first = policy.next_action()
    policy.reset()
    assert policy.next_action() == first
