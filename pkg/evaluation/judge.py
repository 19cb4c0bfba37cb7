"""Graders of free-text answers"""

import logging
import re
from collections import Counter
from pathlib import Path
from string import Template
from typing import Any

import requests

from models.errors import ConfigError, JudgeUnavailable, TransportError
from policies.remote import ChatClient, RemoteConfig, parse_json_reply

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(r'\w+', re.UNICODE)
JUDGE_KINDS = ('none', 'remote', 'overlap')


class RemoteJudge:
    """Asks a chat model for ``{"score": ..., "justification": ...}``"""

    def __init__(self, config: RemoteConfig, template: Template,
                 session: requests.Session | None = None):
        self.client = ChatClient(config, session)
        self.template = template

    def prompt(self, question: str, reference: str, prediction: str) -> str:
        return self.template.substitute(question=question, reference=reference,
                                        prediction=prediction)

    def score(self, question: str, reference: str, prediction: str) -> float:
        """
        :raises JudgeUnavailable: The endpoint failed or replied without a score
        """
        messages = [{'role': 'user', 'content': self.prompt(question, reference, prediction)}]
        try:
            reply = parse_json_reply(self.client.complete(messages))
            return float(reply['score'])
        except TransportError as err:
            raise JudgeUnavailable(str(err)) from err
        except (ValueError, KeyError, TypeError) as err:
            raise JudgeUnavailable(f'Judge reply has no score: {err}') from err


class OverlapJudge:
    """Token-overlap F1 between the answer and the reference. An offline
    stand-in, not a semantic grader"""

    @staticmethod
    def tokens(text: str) -> Counter:
        return Counter(token.lower() for token in TOKEN_RE.findall(text))

    def score(self, question: str, reference: str, prediction: str) -> float:
        pred, ref = self.tokens(prediction), self.tokens(reference)
        common = sum((pred & ref).values())
        if not common:
            return 0.0
        precision = common / sum(pred.values())
        recall = common / sum(ref.values())
        return 2 * precision * recall / (precision + recall)


def make_judge(config: dict[str, Any], kind: str | None = None,
               session: requests.Session | None = None) -> RemoteJudge | OverlapJudge | None:
    """Judge described by the ``judge`` section of the configuration. ``kind``
    overrides its ``kind`` key; ``none`` gives no judge"""
    section = config.get('judge') or {}
    kind = kind or section.get('kind') or 'none'
    match kind:
        case 'none':
            return None
        case 'overlap':
            logger.warning("Text answers are graded by token overlap, not by a model")
            return OverlapJudge()
        case 'remote':
            template_path = section.get('prompt_template_path')
            if not template_path:
                raise ConfigError('The remote judge needs a prompt_template_path')
            with open(Path(template_path), 'r', encoding='utf-8') as file:
                template = Template(file.read())
            remote = {**(config.get('remote') or {}),
                      **{key: val for key, val in section.items() if val is not None}}
            return RemoteJudge(RemoteConfig.from_dict(remote), template, session)
    raise ConfigError(f'Unknown judge "{kind}" (known: {", ".join(JUDGE_KINDS)})')
