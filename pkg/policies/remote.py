"""Chat-completions client, used by the remote policy and the remote judge"""

import json
import logging
import os
from string import Template
from typing import Any

import backoff
import requests

from engine.prompt import DEFAULT_ECHO_BYTES, build_messages
from models import record
from models.errors import ConfigError, TransportError
from models.registry import ToolRegistry
from models.trajectory import WorkingMemory
from models.utils import canonical_dumps, digest

logger = logging.getLogger(__name__)


class RemoteConfig(record.Record):
    api_key_env: str = ''
    temperature: float = 0
    timeout_s: int = 60
    max_retries: int = 3
    backoff_factor: float = 1.0
    _fields = ('base_url', 'model', 'api_key_env', 'temperature', 'timeout_s', 'max_retries',
               'backoff_factor')

    def __init__(self, base_url: str, model: str, api_key_env: str = '', temperature: float = 0,
                 timeout_s: int = 60, max_retries: int = 3, backoff_factor: float = 1.0):
        if not base_url or not model:
            raise ConfigError('A remote endpoint needs a base_url and a model')
        if temperature < 0:
            raise ConfigError(f'temperature must be >= 0, not {temperature}')
        if max_retries < 0:
            raise ConfigError(f'max_retries must be >= 0, not {max_retries}')
        self.base_url = base_url.rstrip('/')
        self.model = model
        self.api_key_env = api_key_env
        self.temperature = temperature
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.backoff_factor = backoff_factor

    @classmethod
    def from_dict(cls, dict_: dict[str, Any] | None) -> "RemoteConfig":
        dict_ = dict_ or {}
        return cls(**{key: dict_[key] for key in cls._fields if dict_.get(key) is not None})

    @property
    def url(self) -> str:
        return f'{self.base_url}/chat/completions'


class ChatClient:
    """POSTs ``{model, messages, temperature}`` and returns the content of the
    first choice. Transport failures are retried with exponential backoff.
    The API key only ever comes from the environment variable named in the
    configuration."""

    def __init__(self, config: RemoteConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()

    def headers(self) -> dict[str, str]:
        headers = {'Content-Type': 'application/json'}
        key = os.environ.get(self.config.api_key_env) if self.config.api_key_env else None
        if key:
            headers['Authorization'] = f'Bearer {key}'
        return headers

    def payload(self, messages: list[dict[str, str]]) -> dict[str, Any]:
        return {'model': self.config.model, 'messages': messages,
                'temperature': self.config.temperature}

    def _post(self, payload: dict[str, Any]) -> requests.Response:
        response = self.session.post(self.config.url, data=canonical_dumps(payload).encode('utf-8'),
                                     headers=self.headers(), timeout=self.config.timeout_s)
        response.raise_for_status()
        return response

    def complete(self, messages: list[dict[str, str]]) -> str:
        """
        :raises TransportError: Every attempt failed, or the reply has no content
        """
        post = backoff.on_exception(
            backoff.expo,
            requests.RequestException,
            max_tries=self.config.max_retries + 1,
            factor=self.config.backoff_factor,
            logger=logger,
        )(self._post)
        try:
            response = post(self.payload(messages))
        except requests.RequestException as err:
            raise TransportError(f'{self.config.url}: {err}') from err
        try:
            content = response.json()['choices'][0]['message']['content']
        except (ValueError, KeyError, IndexError, TypeError) as err:
            raise TransportError(f'{self.config.url}: unexpected reply ({err!r})') from err
        if not isinstance(content, str):
            raise TransportError(f'{self.config.url}: reply content is not text')
        return content


class RemotePolicy:
    kind = 'remote'

    def __init__(self, config: RemoteConfig, registry: ToolRegistry, template: Template,
                 echo_bytes: int = DEFAULT_ECHO_BYTES, session: requests.Session | None = None):
        self.client = ChatClient(config, session)
        self.registry = registry
        self.template = template
        self.echo_bytes = echo_bytes

    def request_payload(self, memory: WorkingMemory) -> dict[str, Any]:
        return self.client.payload(build_messages(memory, self.registry, self.template, self.echo_bytes))

    def request_digest(self, memory: WorkingMemory) -> str:
        return digest(canonical_dumps(self.request_payload(memory)))

    def next_action(self, memory: WorkingMemory) -> str:
        payload = self.request_payload(memory)
        logger.debug("Requesting %s (%d messages)", self.client.config.model, len(payload['messages']))
        return self.client.complete(payload['messages'])


def parse_json_reply(text: str) -> Any:
    """First JSON object of a model reply, which may wrap it in prose or a fence"""
    start = text.find('{')
    while start != -1:
        try:
            value, _ = json.JSONDecoder().raw_decode(text, start)
            return value
        except json.JSONDecodeError:
            start = text.find('{', start + 1)
    raise ValueError('no JSON object in the reply')
