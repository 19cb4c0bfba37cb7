import random

import pytest

from models.corpus import dumps_corpus, load_corpus, parse_corpus, save_corpus, split, stats, unknown_tools
from models.errors import CorpusParseError, SchemaViolation
from models.registry import ToolRegistry
from models.utils import canonical_dumps


class TestCorpusFile:
    def test_round_trip_is_byte_identical(self, golden, tmp_path):
        path = tmp_path / 'corpus.jsonl'
        save_corpus(path, golden)
        content = path.read_text(encoding='utf-8')
        assert dumps_corpus(load_corpus(path)) == content
        assert content.count('\n') == len(golden)

    def test_blank_lines_are_skipped(self, golden):
        content = '\n' + dumps_corpus(golden[:2]).replace('\n', '\n\n')
        assert [t.id for t in parse_corpus(content)] == [t.id for t in golden[:2]]

    @pytest.mark.parametrize('content', ['', '\n\n'])
    def test_empty(self, content):
        with pytest.raises(CorpusParseError):
            parse_corpus(content)

    def test_bad_json_line(self, golden):
        content = dumps_corpus(golden[:1]) + '{"id": \n'
        with pytest.raises(CorpusParseError) as err:
            parse_corpus(content)
        assert err.value.line == 2

    def test_missing_final_answer(self, golden):
        data = golden[0].to_dict()
        del data['final_answer']
        with pytest.raises(SchemaViolation, match='final_answer'):
            parse_corpus(canonical_dumps(data))

    def test_duplicate_id(self, golden):
        with pytest.raises(SchemaViolation, match='duplicate'):
            parse_corpus(dumps_corpus([golden[0], golden[0]]))

    def test_steps_after_terminate(self, golden):
        data = golden[0].to_dict()
        data['steps'].append({'thought': 'one more thing'})
        with pytest.raises(SchemaViolation):
            parse_corpus(canonical_dumps(data))


class TestStats:
    def test_golden(self, golden):
        result = stats(golden)
        assert result.n_instances == 25
        assert result.n_steps == 170
        assert result.avg_steps == pytest.approx(6.8)
        assert sum(result.by_domain.values()) == 25
        assert sum(result.by_modality.values()) == 25

    def test_permutation_invariant(self, golden):
        shuffled = list(golden)
        random.Random(7).shuffle(shuffled)
        assert stats(shuffled).to_dict() == stats(golden).to_dict()

    def test_single_record(self, golden_by_id):
        result = stats([golden_by_id['transportation_parked_car_gap']])
        assert (result.n_instances, result.n_steps, result.avg_steps) == (1, 5, 5.0)
        assert result.histogram('tool') == {'Calculator': 1, 'Solver': 2, 'Terminate': 1, 'TextToBbox': 1}

    def test_empty(self):
        result = stats([])
        assert (result.n_instances, result.n_steps, result.avg_steps) == (0, 0, 0.0)
        assert result.histogram('domain') == {}


class TestSplit:
    def test_partition_keeps_order(self, golden):
        kept, dropped = split(golden, lambda t: t.task.modality == 'gis')
        assert all(t.task.modality == 'gis' for t in kept)
        assert all(t.task.modality != 'gis' for t in dropped)
        assert sorted(t.id for t in kept + dropped) == sorted(t.id for t in golden)
        assert [t.id for t in kept] == [t.id for t in golden if t.task.modality == 'gis']

    def test_unknown_tools(self, golden, registry):
        assert unknown_tools(golden, registry) == []
        calculator_only = ToolRegistry({'Calculator': registry['Calculator']})
        pairs = unknown_tools(golden[:3], calculator_only)
        assert pairs and all(tool != 'Calculator' for _, tool in pairs)
