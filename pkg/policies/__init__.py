"""Agent-side policies. A policy turns the working memory into model text"""

from pathlib import Path
from typing import Any, Protocol

import requests

from engine.prompt import load_template
from models import record
from models.errors import ConfigError
from models.registry import ToolRegistry
from models.trajectory import TrajectoryRecord, WorkingMemory
from .remote import ChatClient, RemoteConfig, RemotePolicy
from .rule_based import RuleBasedPolicy
from .scripted import ScriptedPolicy

KINDS = ('scripted', 'rule_based', 'remote')
# Command line spelling -> kind
ALIASES = {'rule': 'rule_based'}


class Policy(Protocol):
    kind: str

    def next_action(self, memory: WorkingMemory) -> str: ...


class PolicyHandle(record.Record):
    """What is needed to build one policy instance per session"""
    config: dict = {}
    _fields = ('kind', 'config')

    def __init__(self, kind: str, config: dict[str, Any] | None = None):
        kind = ALIASES.get(kind, kind)
        if kind not in KINDS:
            raise ConfigError(f'Unknown policy "{kind}" (known: {", ".join(KINDS)})')
        self.kind = kind
        self.config = dict(config or {})
        if kind == 'remote':
            self.remote = RemoteConfig.from_dict(self.config.get('remote'))

    @classmethod
    def from_dict(cls, dict_: dict[str, Any]) -> "PolicyHandle":
        return cls(dict_['kind'], dict_.get('config'))

    @property
    def name(self) -> str:
        return self.remote.model if self.kind == 'remote' else self.kind

    def build(self, registry: ToolRegistry, trajectory: TrajectoryRecord | None = None,
              session: requests.Session | None = None) -> Policy:
        """New policy for one session

        :raises ConfigError: A scripted policy without a trajectory to play
        """
        match self.kind:
            case 'scripted':
                if trajectory is None:
                    raise ConfigError('The scripted policy needs a trajectory to play')
                return ScriptedPolicy(trajectory)
            case 'rule_based':
                return RuleBasedPolicy()
            case 'remote':
                if not self.config.get('prompt_template'):
                    raise ConfigError('The remote policy needs a prompt_template')
                template = load_template(Path(self.config['prompt_template']))
                echo = self.config.get('session', {}).get('observation_echo_bytes', 8192)
                return RemotePolicy(self.remote, registry, template, echo, session)


__all__ = ['ChatClient', 'KINDS', 'Policy', 'PolicyHandle', 'RemoteConfig', 'RemotePolicy',
           'RuleBasedPolicy', 'ScriptedPolicy']
