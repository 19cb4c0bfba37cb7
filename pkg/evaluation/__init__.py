"""Metric suites of the evaluation: step by step and end to end"""

from .harness import EvalSettings, e2e_eval, e2e_task, evaluate, stepwise_eval
from .judge import OverlapJudge, RemoteJudge, make_judge
from .metrics import (answer_score, category_f1, error_taxonomy, grade_answer, order_metrics,
                      score_step)
from .report import write_report

__all__ = [
    'EvalSettings',
    'OverlapJudge',
    'RemoteJudge',
    'answer_score',
    'category_f1',
    'e2e_eval',
    'e2e_task',
    'error_taxonomy',
    'evaluate',
    'grade_answer',
    'make_judge',
    'order_metrics',
    'score_step',
    'stepwise_eval',
    'write_report',
]
