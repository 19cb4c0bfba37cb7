"""Smoke-test policy: one Calculator call, then Terminate with its result"""

import re

from engine.prompt import render_action
from models.trajectory import TERMINATE, Action, Call, WorkingMemory

# Runs of arithmetic characters; one counts when an operator sits between two operands
RUN_RE = re.compile(r'[\d.()+\-*/^ ]+')
BINARY_RE = re.compile(r'[\d.)]\s*[-+*/^]\s*[\d.(]')


def find_expression(text: str) -> str:
    """Longest arithmetic expression of ``text``, ``0`` when there is none"""
    runs = [run.strip() for run in RUN_RE.findall(text)]
    return max((run for run in runs if BINARY_RE.search(run)), key=len, default='0')


class RuleBasedPolicy:
    kind = 'rule_based'

    def next_action(self, memory: WorkingMemory) -> str:
        calls = [(action, observation) for _, action, observation in memory.entries()
                 if action.call is not None and action.call.tool == 'Calculator']
        if not calls:
            expression = find_expression(memory.instruction)
            return render_action(Action(f'Compute {expression}.', Call('Calculator', {'expression': expression})))

        _, observation = calls[-1]
        if observation is not None and observation.ok:
            answer = f"{observation.value['result']:g}"
        else:
            answer = 'no answer'
        return render_action(Action('Report the result.', Call(TERMINATE, {'answer': answer})))
