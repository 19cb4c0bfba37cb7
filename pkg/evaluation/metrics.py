"""Scores of single steps, tool sequences and final answers"""

import math
import re
from collections import Counter
from pathlib import PurePosixPath
from typing import Any, Iterable, Protocol

from geotools.geometry import iou
from models.errors import JudgeUnavailable
from models.registry import CATEGORIES, PATH_KINDS, ToolRegistry, validate_call
from models.report import ERROR_CLASSES, OrderVerdict, StepScores
from models.trajectory import TERMINATE, Action, FormatError, TrajectoryRecord
from models.utils import is_number

NUMBER_RE = re.compile(r'[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?')
UNMAPPED = 'unmapped'
# Issues that make a call unusable; a missing argument is scored by ArgN
INST_BREAKING = ('UnknownTool', 'UnknownArg', 'TypeMismatch')

NUMERIC_TOLERANCE = 0.10
IOU_THRESHOLD = 0.5
ARGV_REL_TOL = 1e-3


class Judge(Protocol):
    def score(self, question: str, reference: str, prediction: str) -> float: ...


def _same_value(pred: Any, gold: Any, kind: str | None, rel_tol: float) -> bool:
    if isinstance(pred, bool) or isinstance(gold, bool):
        return pred is gold
    if is_number(pred) and is_number(gold):
        return math.isclose(pred, gold, rel_tol=rel_tol, abs_tol=1e-12)
    if isinstance(pred, str) and isinstance(gold, str):
        if kind in PATH_KINDS:
            return PurePosixPath(pred.strip()).name == PurePosixPath(gold.strip()).name
        return pred.strip().lower() == gold.strip().lower()
    if isinstance(pred, list) and isinstance(gold, list):
        return len(pred) == len(gold) and all(
            _same_value(a, b, _item_kind(kind), rel_tol) for a, b in zip(pred, gold))
    if isinstance(pred, dict) and isinstance(gold, dict):
        return set(pred) == set(gold) and all(
            _same_value(pred[key], gold[key], None, rel_tol) for key in gold)
    return pred == gold


def _item_kind(kind: str | None) -> str | None:
    if kind and kind.startswith('array-of(') and kind.endswith(')'):
        return kind[len('array-of('):-1]
    return kind


def arg_values_match(pred: dict[str, Any], gold: dict[str, Any], registry: ToolRegistry,
                     tool: str, rel_tol: float = ARGV_REL_TOL) -> bool:
    """Whether every gold argument has a matching predicted value: numbers at
    a relative tolerance, strings trimmed and case-insensitive, paths by their
    last segment, arrays elementwise"""
    descriptor = registry.get(tool)
    for key, value in gold.items():
        if key not in pred:
            return False
        param = descriptor.param(key) if descriptor else None
        if not _same_value(pred[key], value, param.kind if param else None, rel_tol):
            return False
    return True


def score_step(pred: Action | FormatError, gold: Action, step_index: int,
               registry: ToolRegistry, rel_tol: float = ARGV_REL_TOL) -> StepScores:
    """Ladder inst -> tool -> argn -> argv of a predicted step against gold.
    The first step of a trajectory is exempt from aggregates"""
    exempt = step_index == 1
    if isinstance(pred, FormatError) or pred.call is None or gold.call is None:
        return StepScores.failed(exempt)
    call, gold_call = pred.call, gold.call

    report = validate_call(registry, call.tool, call.args, strict=True)
    inst = not any(code in INST_BREAKING for code in report.codes())
    tool = call.tool == gold_call.tool
    gold_tool = registry.get(gold_call.tool)
    needed = set(gold_call.args) | set(gold_tool.required if gold_tool else [])
    argn = needed <= {key for key, val in call.args.items() if val is not None}
    argv = arg_values_match(call.args, gold_call.args, registry, gold_call.tool, rel_tol)
    return StepScores.ladder(inst, tool, argn, argv, exempt)


def order_metrics(pred_seq: list[str], ref_seq: list[str]) -> OrderVerdict:
    same = list(pred_seq) == list(ref_seq)
    any_order = Counter(pred_seq) == Counter(ref_seq)
    return OrderVerdict(any_order, same, set(pred_seq) == set(ref_seq))


def category_f1(pred_tools: Iterable[str], ref_tools: Iterable[str], mapping: dict[str, str],
                set_mode: bool = False) -> dict[str, float | None]:
    """F1 per category between the predicted and reference tool multisets.

    A category empty on both sides scores None (1 by convention, left out of
    averages); empty on one side only scores 0. Tools missing from ``mapping``
    fall in the ``unmapped`` bucket.
    """
    pred, ref = Counter(pred_tools), Counter(ref_tools)
    if set_mode:
        pred, ref = Counter(set(pred)), Counter(set(ref))
    scores: dict[str, float | None] = {}
    for category in (*CATEGORIES, UNMAPPED):
        in_category = lambda name: mapping.get(name, UNMAPPED) == category
        pred_c = Counter({name: n for name, n in pred.items() if in_category(name)})
        ref_c = Counter({name: n for name, n in ref.items() if in_category(name)})
        n_pred, n_ref = sum(pred_c.values()), sum(ref_c.values())
        if not n_pred and not n_ref:
            scores[category] = None
            continue
        tp = sum((pred_c & ref_c).values())
        if not tp:
            scores[category] = 0.0
            continue
        precision, recall = tp / n_pred, tp / n_ref
        scores[category] = 2 * precision * recall / (precision + recall)
    return scores


def _numbers(text: str) -> list[float]:
    return [float(match) for match in NUMBER_RE.findall(text)]


def grade_answer(pred: str, gold: str, kind: str, judge: Judge | None = None,
                 question: str = '', generation_ok: bool | None = None,
                 tolerance: float = NUMERIC_TOLERANCE,
                 iou_threshold: float = IOU_THRESHOLD) -> tuple[float | None, str]:
    """(score, flag). The score is None when the answer could not be graded;
    the flag names why a score is 0 or missing, and is empty otherwise

    :param generation_ok: For generation answers, whether the rendering calls
        validated and executed
    """
    if kind == 'generation':
        return (1.0, '') if generation_ok else (0.0, 'generation_failed')
    if not pred or not pred.strip():
        return 0.0, 'empty_prediction'

    match kind:
        case 'numeric':
            pred_numbers, gold_numbers = _numbers(pred), _numbers(gold)
            if not pred_numbers or not gold_numbers:
                return 0.0, 'no_number'
            p, g = pred_numbers[0], gold_numbers[0]
            bound = 1e-9 if g == 0 else tolerance * abs(g) * (1 + 1e-9)
            return (1.0 if abs(p - g) <= bound else 0.0), ''
        case 'bbox':
            pred_numbers, gold_numbers = _numbers(pred), _numbers(gold)
            if len(pred_numbers) < 4 or len(gold_numbers) < 4:
                return 0.0, 'no_bbox'
            overlap = iou(pred_numbers[:4], gold_numbers[:4])
            return (1.0 if overlap >= iou_threshold else 0.0), ''
        case 'text':
            if judge is None:
                return None, 'skipped'
            try:
                return min(1.0, max(0.0, float(judge.score(question, gold, pred)))), ''
            except JudgeUnavailable:
                return None, 'skipped'
    raise ValueError(f'Unknown answer kind "{kind}"')


def answer_score(pred: str, gold: str, kind: str, judge: Judge | None = None,
                 **options: Any) -> float:
    """Score in [0, 1] of a final answer

    :raises JudgeUnavailable: A text answer and no judge to grade it
    """
    score, flag = grade_answer(pred, gold, kind, judge, **options)
    if score is None:
        raise JudgeUnavailable(f'Cannot grade a {kind} answer: {flag}')
    return score


def answered_without_tool(trajectory: TrajectoryRecord) -> bool:
    """Terminate was reached before any tool call succeeded"""
    if not trajectory.completed:
        return False
    return not any(
        step.observation is not None and step.observation.ok
        for step in trajectory.steps[:-1] if step.action is not None and step.action.tool != TERMINATE
    )


def error_taxonomy(runs: Iterable[tuple[TrajectoryRecord, list[str]]]) -> dict[str, int]:
    """Counts of the four error classes over (trajectory, turn events) pairs"""
    counts = {name: 0 for name in ERROR_CLASSES}
    for trajectory, events in runs:
        for event in events:
            if event in counts:
                counts[event] += 1
        counts['answer_without_tool'] += answered_without_tool(trajectory)
    return counts
