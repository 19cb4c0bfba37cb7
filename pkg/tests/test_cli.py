import json

import pytest
import requests

import args
import colors
from models.corpus import dumps_corpus, load_corpus
from models.trajectory import TrajectoryRecord


def cli(config, *argv):
    return args.parse_args(config, list(argv))


def corrupted(trajectory):
    data = trajectory.to_dict()
    data['final_answer'] = 'something else'
    return TrajectoryRecord.from_dict(data)


class TestValidate:
    def test_clean_corpus(self, config, corpus_file, capsys, tmp_path):
        assert cli(config, 'validate', '--corpus', str(corpus_file)) == 0
        assert '25/25' in capsys.readouterr().out
        out = tmp_path / 'out'
        assert len(load_corpus(out / 'validated.jsonl')) == 25
        assert json.loads((out / 'replay_report.json').read_text()) == {}

    def test_rejected_record(self, config, golden, capsys, tmp_path):
        path = tmp_path / 'broken.jsonl'
        path.write_text(dumps_corpus([corrupted(golden[0]), *golden[1:4]]), encoding='utf-8')
        assert cli(config, 'validate', '--corpus', str(path), '--workers', '2') == 1
        out = capsys.readouterr().out
        assert golden[0].id in out and 'FinalAnswerMismatch' in out and '3/4' in out
        report = json.loads((tmp_path / 'out' / 'replay_report.json').read_text())
        assert list(report) == [golden[0].id]

    def test_missing_corpus(self, config, tmp_path, capsys):
        assert cli(config, 'validate', '--corpus', str(tmp_path / 'none.jsonl')) == 2
        err = capsys.readouterr().err
        assert 'ConfigError' in err and 'georch build' in err

    def test_stats_without_corpus(self, config, tmp_path, capsys):
        config['corpus'] = str(tmp_path / 'none.jsonl')
        assert cli(config, 'stats') == 2
        assert 'georch build' in capsys.readouterr().err

    def test_unparsable_corpus(self, config, tmp_path, capsys):
        path = tmp_path / 'bad.jsonl'
        path.write_text('{"id":\n', encoding='utf-8')
        assert cli(config, 'validate', '--corpus', str(path)) == 2
        assert 'ParseError' in capsys.readouterr().err


class TestEvaluate:
    def test_step_mode(self, config, corpus_file, capsys, tmp_path):
        assert cli(config, 'evaluate', 'step', '--corpus', str(corpus_file), '--judge', 'overlap') == 0
        out = capsys.readouterr().out
        assert 'step evaluation of scripted on 25 task(s)' in out
        rows = (tmp_path / 'out' / 'step_report.csv').read_text().splitlines()
        assert rows[1] == 'scripted,100.0,100.0,100.0,100.0,100.0'

    def test_e2e_mode(self, config, corpus_file, tmp_path):
        assert cli(config, 'evaluate', 'e2e', '--corpus', str(corpus_file), '--workers', '4') == 0
        report = json.loads((tmp_path / 'out' / 'e2e_report.json').read_text())
        assert report['n_tasks'] == 25 and report['e2e']['same_order'] == 100.0

    def test_unknown_mode(self, config, corpus_file, capsys):
        assert cli(config, 'evaluate', 'fast', '--corpus', str(corpus_file)) == 2
        assert 'ConfigError' in capsys.readouterr().err

    def test_unreachable_endpoint(self, config, corpus_file, monkeypatch, capsys):
        def refuse(self, url, **kwargs):
            raise requests.ConnectionError(f'{url} refused')
        monkeypatch.setattr(requests.Session, 'post', refuse)
        config['remote'] = {**config['remote'], 'max_retries': 0}
        code = cli(config, 'evaluate', 'step', '--corpus', str(corpus_file), '--policy', 'remote',
                   '--endpoint', 'http://models.test/v1', '--model', 'm')
        assert code == 0
        assert capsys.readouterr().out.count('policy failure') == 25


class TestRun:
    def test_corpus_task(self, config, corpus_file, capsys, tmp_path):
        code = cli(config, 'run', '--corpus', str(corpus_file), '--task', 'transportation_parked_car_gap')
        assert code == 0
        assert '7.2 m' in capsys.readouterr().out
        saved = json.loads((tmp_path / 'out' / 'runs' / 'transportation_parked_car_gap.json').read_text())
        assert saved['outcome']['status'] == 'completed'
        assert saved['record']['final_answer'] == '7.2 m'

    def test_unknown_task(self, config, corpus_file):
        assert cli(config, 'run', '--corpus', str(corpus_file), '--task', 'nope') == 2

    def test_adhoc_query(self, config, capsys, tmp_path):
        code = cli(config, 'run', '--policy', 'rule', '--query', 'What is 2 * 21?', '--id', 'answer')
        assert code == 0
        saved = json.loads((tmp_path / 'out' / 'runs' / 'answer.json').read_text())
        assert saved['record']['final_answer'] == '42'
        assert saved['record']['modality'] == 'gis'

    @pytest.mark.parametrize('query', ['', '   '])
    def test_empty_query(self, config, query):
        assert cli(config, 'run', '--policy', 'rule', '--query', query) == 2

    def test_bad_input(self, config):
        assert cli(config, 'run', '--policy', 'rule', '--query', 'q', '--input', 'video:a.mp4') == 2

    def test_step_exhausted(self, config, capsys, tmp_path):
        code = cli(config, 'run', '--policy', 'rule', '--query', 'What is 2 * 21?', '--max-steps', '1')
        assert code == 0
        assert 'step_exhausted' in capsys.readouterr().out
        saved = json.loads((tmp_path / 'out' / 'runs' / 'adhoc.json').read_text())
        assert saved['outcome']['status'] == 'step_exhausted'


class TestCorpusCommands:
    def test_stats(self, config, corpus_file, capsys):
        assert cli(config, 'stats', '--corpus', str(corpus_file)) == 0
        out = capsys.readouterr().out
        assert '25' in out and '170' in out and '6.80' in out

    def test_stats_by_tool(self, config, corpus_file, capsys):
        assert cli(config, 'stats', '--corpus', str(corpus_file), '--by', 'tool') == 0
        out = capsys.readouterr().out
        assert 'By tool' in out and 'By domain' not in out and 'Terminate' in out

    def test_tools(self, config, capsys):
        assert cli(config, 'tools') == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 25
        assert any('ComputeDistance' in line and '[links_layer]' in line for line in lines)

    def test_empty_registry(self, config, tmp_path, capsys):
        path = tmp_path / 'registry.json'
        path.write_text('', encoding='utf-8')
        assert cli(config, 'tools', '--registry', str(path)) == 0
        assert len(capsys.readouterr().out.splitlines()) == 1

    def test_build(self, config, golden, tmp_path, capsys):
        path = tmp_path / 'built.jsonl'
        assert cli(config, 'build', '--corpus', str(path)) == 0
        assert dumps_corpus(load_corpus(path)) == dumps_corpus(golden)
        assert 'Built' in capsys.readouterr().out

    def test_show_config(self, config, capsys):
        assert cli(config, 'config', '--show') == 0
        assert 'max_steps: 20' in capsys.readouterr().out

    def test_no_command(self, config):
        assert cli(config) == 2


class TestColors:
    def test_score_cells(self):
        assert colors.percent(None) == '\x1b[2m-\x1b[m'
        assert colors.percent(100) == '\x1b[32m100.00\x1b[m'
        assert colors.percent(0) == '\x1b[31m0.00\x1b[m'
        assert colors.percent(42.5) == '\x1b[33m42.50\x1b[m'

    def test_status(self):
        assert colors.status(True, 'ok') == colors.GR('ok')
        assert colors.status(False, 'no') == colors.RD('no')
        assert colors.B('x') == '\x1b[1mx\x1b[m' and colors.CY('x') == '\x1b[36mx\x1b[m'
